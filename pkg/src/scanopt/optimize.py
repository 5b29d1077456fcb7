"""Minimise a scan criterion over selection probabilities.

Both optimisers are grid-then-refine: criteria built on eigenvalue moduli
are not smooth where the dominant eigenvalue switches, so a coarse grid
picks the basin before any local refinement.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooLarge, ParameterOutOfRange

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
GRID_CAP = 10**7


@dataclass(frozen=True)
class OptimizationResult:
    alpha_star: np.ndarray
    value: float
    criterion: str
    method: str
    evaluations: int
    resolution: float

    @property
    def alpha1(self):
        return float(self.alpha_star[0])

    def as_dict(self):
        return {
            "alpha_star": [float(a) for a in self.alpha_star],
            "value": float(self.value),
            "criterion": self.criterion,
            "method": self.method,
            "evaluations": self.evaluations,
            "resolution": self.resolution,
        }


def _better(v, best_v):
    # strict improvement keeps the earliest (smallest / lexicographically first) candidate on ties
    return best_v is None or v < best_v


def grid_1d(lo, hi, step):
    n = int(round((hi - lo) / step))
    pts = lo + step * np.arange(n + 1)
    pts[-1] = min(pts[-1], hi)
    return np.round(pts, 12)


def optimize_1d(criterion, lo=0.01, hi=0.99, tol=1e-6, step=0.01, name="criterion"):
    """Minimise ``criterion(alpha1)`` on [lo, hi]: grid scan, then golden section."""
    if not (0.0 <= lo < hi <= 1.0):
        raise ParameterOutOfRange(f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    if tol <= 0 or step <= 0:
        raise ParameterOutOfRange("tol and step must be positive")
    pts = grid_1d(lo, hi, step)
    vals = [float(criterion(a)) for a in pts]
    evals = len(vals)
    k = int(np.argmin(vals))  # first minimum, i.e. smallest alpha1 on ties
    best_a, best_v = float(pts[k]), vals[k]

    a, b = float(pts[max(k - 1, 0)]), float(pts[min(k + 1, len(pts) - 1)])
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = float(criterion(c)), float(criterion(d))
    evals += 2
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = float(criterion(c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = float(criterion(d))
        evals += 1
    for cand, v in sorted(((c, fc), (d, fd))):
        if v < best_v:
            best_a, best_v = cand, v
    return OptimizationResult(np.array([best_a, 1.0 - best_a]), best_v, name, "golden_section", evals, tol)


def simplex_grid(d, n):
    """All compositions of n into d positive parts, lexicographic order."""
    if d == 1:
        yield (n,)
        return
    for first in range(1, n - d + 2):
        for rest in simplex_grid(d - 1, n - first):
            yield (first,) + rest


def optimize_simplex(criterion, d, resolution=0.01, min_step=1e-4, cap=GRID_CAP, name="criterion"):
    """Minimise ``criterion(alpha)`` over the interior simplex grid, then refine.

    Refinement moves mass between pairs of coordinates, halving the step
    from ``resolution / 2`` down to ``min_step``; each pass takes the best
    improving move, with ties going to the lexicographically first alpha.
    """
    if d < 2:
        raise ParameterOutOfRange("simplex optimisation needs d >= 2")
    if not 0.0 < resolution <= 0.5:
        raise ParameterOutOfRange(f"resolution must lie in (0, 0.5], got {resolution}")
    n = int(round(1.0 / resolution))
    size = math.comb(n - 1, d - 1)
    if size > cap:
        raise GridTooLarge(f"simplex grid has {size} points, cap is {cap}")

    best_a, best_v = None, None
    evals = 0
    for comp in simplex_grid(d, n):
        a = np.array(comp, dtype=float) / n
        v = float(criterion(a))
        evals += 1
        if _better(v, best_v):
            best_a, best_v = a, v

    step = resolution / 2.0
    while step >= min_step:
        moved = True
        while moved:
            moved = False
            cands = []
            for i in range(d):
                for j in range(d):
                    if i == j or best_a[j] - step <= 0.0:
                        continue
                    a = best_a.copy()
                    a[i] += step
                    a[j] -= step
                    cands.append(a)
            cands.sort(key=tuple)
            round_best, round_v = None, best_v
            for a in cands:
                v = float(criterion(a))
                evals += 1
                if v < round_v:
                    round_best, round_v = a, v
            if round_best is not None:
                best_a, best_v = round_best, round_v
                moved = True
        step /= 2.0
    return OptimizationResult(best_a, best_v, name, "simplex_search", evals, resolution)


def relative_gain(value_at_optimum, value_at_equal_alpha):
    if value_at_equal_alpha == 0:
        raise ZeroDivisionError("criterion at equal selection probabilities is zero")
    if value_at_equal_alpha < 0:
        raise ParameterOutOfRange("criterion at equal selection probabilities must be positive")
    return (value_at_equal_alpha - value_at_optimum) / value_at_equal_alpha
