"""Dense real linear algebra used by the rate and variance computations.

Matrices are plain 2-D float ``numpy`` arrays. The LU solver and the
nonsymmetric eigenvalue routine are written out here (partial pivoting;
balancing + Householder Hessenberg reduction + Francis double-shift QR)
so that singularity and non-convergence surface as typed errors with the
thresholds the rest of the package relies on.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, NoConvergence, NotStochastic, SingularMatrix

PIVOT_TOL = 1e-12
MAX_EIG_DIM = 2000
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # complex, length n
    converged: bool
    iterations: int

    @property
    def moduli(self):
        return np.abs(self.eigenvalues)


def as_matrix(a, square=True):
    """Coerce to a finite 2-D float array, optionally requiring it square."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    return m


def lu_factor(a):
    """Row-pivoted LU factorisation, packed as (lu, perm)."""
    lu = as_matrix(a)
    n = lu.shape[0]
    scale = np.max(np.abs(lu))
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < PIVOT_TOL * scale:
            raise SingularMatrix(
                f"pivot {abs(lu[p, k]):.3e} in column {k} below {PIVOT_TOL:g} x matrix scale {scale:.3e}"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm


def lu_solve(factors, b):
    lu, perm = factors
    n = lu.shape[0]
    x = np.array(b, dtype=float)[perm]
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def solve(a, b):
    """Solve ``a @ x = b`` for a vector or a matrix of right-hand sides."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} does not match matrix order {a.shape[0]}")
    factors = lu_factor(a)
    x = lu_solve(factors, b)
    # one step of iterative refinement
    x += lu_solve(factors, b - a @ x)
    return x


def invert(a):
    a = as_matrix(a)
    return solve(a, np.eye(a.shape[0]))


def balance(a):
    """Diagonal similarity scaling by powers of two (Parlett-Reinsch)."""
    a = as_matrix(a)
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.sum(np.abs(a[:, i])) - abs(a[i, i])
            r = np.sum(np.abs(a[i, :])) - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(a):
    """Upper Hessenberg form via Householder reflections (similarity)."""
    h = as_matrix(a)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(h, max_iter):
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Returns (eigenvalues, converged, iterations). Only the active window is
    updated, which is all that eigenvalues require.
    """
    a = h.copy()
    n = a.shape[0]
    wr = np.full(n, np.nan)
    wi = np.full(n, np.nan)
    anorm = np.sum(np.abs(np.triu(a, -1)))
    nn = n - 1
    t = 0.0
    total = 0
    its = 0
    while nn >= 0:
        l = nn
        while l >= 1:
            s = abs(a[l - 1, l - 1]) + abs(a[l, l])
            # floor at eps^2 * ||H|| so zero diagonals (e.g. rank-one input) still deflate
            s = max(s, _EPS * anorm)
            if abs(a[l, l - 1]) <= _EPS * s:
                a[l, l - 1] = 0.0
                break
            l -= 1
        x = a[nn, nn]
        if l == nn:
            wr[nn], wi[nn] = x + t, 0.0
            nn -= 1
            its = 0
            continue
        y = a[nn - 1, nn - 1]
        w = a[nn, nn - 1] * a[nn - 1, nn]
        if l == nn - 1:
            p = 0.5 * (y - x)
            q = p * p + w
            z = np.sqrt(abs(q))
            x += t
            if q >= 0.0:
                z = p + (z if p >= 0 else -z)
                wr[nn - 1] = wr[nn] = x + z
                if z != 0.0:
                    wr[nn] = x - w / z
                wi[nn - 1] = wi[nn] = 0.0
            else:
                wr[nn - 1] = wr[nn] = x + p
                wi[nn - 1] = -z
                wi[nn] = z
            nn -= 2
            its = 0
            continue
        if total >= max_iter:
            return wr + 1j * wi, False, total
        if its > 0 and its % 10 == 0:
            # exceptional shift
            t += x
            a[np.arange(nn + 1), np.arange(nn + 1)] -= x
            s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
            x = y = 0.75 * s
            w = -0.4375 * s * s
        its += 1
        total += 1
        m = nn - 2
        while m >= l:
            z = a[m, m]
            r = x - z
            s = y - z
            p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
            q = a[m + 1, m + 1] - z - r - s
            r = a[m + 2, m + 1]
            s = abs(p) + abs(q) + abs(r)
            p /= s
            q /= s
            r /= s
            if m == l:
                break
            u = abs(a[m, m - 1]) * (abs(q) + abs(r))
            v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
            if u <= _EPS * v:
                break
            m -= 1
        for i in range(m + 2, nn + 1):
            a[i, i - 2] = 0.0
            if i != m + 2:
                a[i, i - 3] = 0.0
        for k in range(m, nn):
            if k != m:
                p = a[k, k - 1]
                q = a[k + 1, k - 1]
                r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                x = abs(p) + abs(q) + abs(r)
                if x != 0.0:
                    p /= x
                    q /= x
                    r /= x
            s = np.sqrt(p * p + q * q + r * r)
            if p < 0:
                s = -s
            if s == 0.0:
                continue
            if k == m:
                if l != m:
                    a[k, k - 1] = -a[k, k - 1]
            else:
                a[k, k - 1] = -s * x
            p += s
            x = p / s
            y = q / s
            z = r / s
            q /= p
            r /= p
            cols = slice(k, nn + 1)
            pv = a[k, cols] + q * a[k + 1, cols]
            if k != nn - 1:
                pv += r * a[k + 2, cols]
                a[k + 2, cols] -= pv * z
            a[k + 1, cols] -= pv * y
            a[k, cols] -= pv * x
            rows = slice(l, min(nn, k + 3) + 1)
            pv = x * a[rows, k] + y * a[rows, k + 1]
            if k != nn - 1:
                pv += z * a[rows, k + 2]
                a[rows, k + 2] -= pv * r
            a[rows, k + 1] -= pv * q
            a[rows, k] -= pv
    return wr + 1j * wi, True, total


def _order(ev):
    # deterministic presentation: by modulus, then real part, then imaginary part (all descending)
    keys = np.lexsort((-ev.imag, -ev.real, -np.abs(ev)))
    return ev[keys]


def eigenvalues(a, max_dim=MAX_EIG_DIM, max_iter=None):
    """All eigenvalues of a real (generally nonsymmetric) square matrix.

    Raises ``NoConvergence`` if the QR sweep count exceeds ``max_iter``
    (default ``100 * n``); the exception carries the partial spectrum with
    unconverged entries set to NaN.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if n > max_dim:
        raise DimensionMismatch(f"matrix order {n} exceeds configured limit {max_dim}")
    if max_iter is None:
        max_iter = 100 * n
    if n == 1:
        return Spectrum(np.array([complex(a[0, 0])]), True, 0)
    ev, ok, its = _hqr(hessenberg(balance(a)), max_iter)
    if not ok:
        spec = Spectrum(ev, False, its)
        raise NoConvergence(f"QR iteration did not converge within {max_iter} sweeps", spec)
    return Spectrum(_order(ev), True, its)


def spectral_radius(a):
    return float(np.max(eigenvalues(a).moduli))


def check_stochastic(p, tol=1e-10):
    p = as_matrix(p)
    if np.min(p) < -1e-12:
        raise NotStochastic(f"negative entry {np.min(p):.3e}")
    dev = np.max(np.abs(p.sum(axis=1) - 1.0))
    if dev > tol:
        raise NotStochastic(f"row sums deviate from 1 by {dev:.3e}")
    return p


def second_eigenvalue_modulus(p):
    """Largest eigenvalue modulus after removing one copy of the eigenvalue nearest 1."""
    p = check_stochastic(p)
    ev = eigenvalues(p).eigenvalues
    if ev.size == 1:
        return 0.0
    dist = np.abs(ev - 1.0)
    nearest = np.flatnonzero(dist == dist.min())
    drop = nearest[np.argmax(ev.real[nearest])]
    return float(np.max(np.abs(np.delete(ev, drop))))
