"""Exact finite-state analysis of bivariate random-scan Gibbs chains.

States are (x, theta) integer pairs in lexicographic order. Coordinate 0 of
the selection vector updates theta (kernel ``p_theta``), coordinate 1
updates x (kernel ``p_x``), so ``P_rs = alpha1 * p_theta + (1 - alpha1) * p_x``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPmf, ParameterOutOfRange, SingularMatrix, TruncationNotConverged
from .linalg import check_stochastic, second_eigenvalue_modulus, solve

THETA, X = 0, 1


def log_comb(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binomial_pmf(n, p):
    """pmf of Binomial(n, p) on 0..n."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ParameterOutOfRange(f"binomial needs n >= 0 and p in [0, 1], got n={n}, p={p}")
    if p == 0.0 or p == 1.0:
        out = np.zeros(n + 1)
        out[0 if p == 0.0 else n] = 1.0
        return out
    k = np.arange(n + 1)
    logs = np.array([log_comb(n, j) for j in k]) + k * math.log(p) + (n - k) * math.log1p(-p)
    return np.exp(logs)


def hypergeometric_support(n1, n2, x):
    return np.arange(max(0, x - n2), min(n1, x) + 1)


def hypergeometric_pmf(n1, n2, x):
    """P(theta = j | x) = C(n1, j) C(n2, x - j) / C(n1 + n2, x) over the support."""
    if n1 < 0 or n2 < 0 or not 0 <= x <= n1 + n2:
        raise ParameterOutOfRange(f"hypergeometric needs 0 <= x <= n1 + n2, got n1={n1}, n2={n2}, x={x}")
    js = hypergeometric_support(n1, n2, x)
    denom = log_comb(n1 + n2, x)
    return js, np.exp([log_comb(n1, j) + log_comb(n2, x - j) - denom for j in js])


@dataclass
class DiscreteJointModel:
    states: list
    pi: np.ndarray
    p_theta: np.ndarray
    p_x: np.ndarray
    label: str
    params: tuple = None  # (n1, n2, p) for the binomial model
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def validate(self, tol=1e-10):
        """Check the structural invariants; raises on the first violation."""
        if abs(self.pi.sum() - 1.0) > 1e-12 or np.any(self.pi < 0):
            raise InvalidPmf("stationary pmf is not a probability vector")
        check_stochastic(self.p_theta, 1e-12)
        check_stochastic(self.p_x, 1e-12)
        xs = np.array([s[0] for s in self.states])
        ts = np.array([s[1] for s in self.states])
        if np.any(self.p_theta[xs[:, None] != xs[None, :]] != 0.0):
            raise InvalidPmf("theta update changes x")
        if np.any(self.p_x[ts[:, None] != ts[None, :]] != 0.0):
            raise InvalidPmf("x update changes theta")
        for name, k in (("p_theta", self.p_theta), ("p_x", self.p_x)):
            if np.max(np.abs(self.pi @ k - self.pi)) > tol:
                raise InvalidPmf(f"{name} does not preserve the joint pmf")
        return self


def _kernels(states, index, theta_rows, x_rows):
    n = len(states)
    p_theta = np.zeros((n, n))
    p_x = np.zeros((n, n))
    for i, (x, t) in enumerate(states):
        for j, w in theta_rows(x, t):
            p_theta[i, index[(x, j)]] = w
        for xn, w in x_rows(x, t):
            p_x[i, index[(xn, t)]] = w
    return p_theta, p_x


def build_binomial_model(n1, n2, p):
    """theta ~ Bin(n1, p), x = theta + Bin(n2, p); Gibbs kernels for both coordinates."""
    if int(n1) != n1 or int(n2) != n2 or n1 < 1 or n2 < 1:
        raise ParameterOutOfRange(f"n1 and n2 must be positive integers, got {n1}, {n2}")
    if not 0.0 < p < 1.0:
        raise ParameterOutOfRange(f"p must lie in (0, 1), got {p}")
    n1, n2 = int(n1), int(n2)
    states = [(x, t) for x in range(n1 + n2 + 1) for t in range(n1 + 1) if 0 <= x - t <= n2]
    index = {s: i for i, s in enumerate(states)}
    b1 = binomial_pmf(n1, p)
    b2 = binomial_pmf(n2, p)
    pi = np.array([b1[t] * b2[x - t] for x, t in states])

    def theta_rows(x, t):
        js, w = hypergeometric_pmf(n1, n2, x)
        return zip(js.tolist(), w)

    def x_rows(x, t):
        return ((t + e, b2[e]) for e in range(n2 + 1))

    p_theta, p_x = _kernels(states, index, theta_rows, x_rows)
    return DiscreteJointModel(states, pi, p_theta, p_x, f"binomial({n1},{n2},{p:g})", (n1, n2, p))


def build_custom_model(joint_pmf, label="custom"):
    """Model from a finite joint pmf {(x, theta): prob}; zero-probability pairs are dropped."""
    items = {}
    for key, prob in dict(joint_pmf).items():
        x, t = key
        if int(x) != x or int(t) != t:
            raise InvalidPmf(f"state {key!r} is not an integer pair")
        prob = float(prob)
        if not np.isfinite(prob) or prob < 0:
            raise InvalidPmf(f"probability for {key!r} is negative or non-finite")
        if (int(x), int(t)) in items:
            raise InvalidPmf(f"duplicate state {key!r}")
        items[(int(x), int(t))] = prob
    total = sum(items.values())
    if abs(total - 1.0) > 1e-9:
        raise InvalidPmf(f"probabilities sum to {total:.12g}, not 1")
    states = sorted(s for s, w in items.items() if w > 0)
    if not states:
        raise InvalidPmf("empty support")
    index = {s: i for i, s in enumerate(states)}
    pi = np.array([items[s] for s in states])
    pi /= pi.sum()
    by_x, by_t = {}, {}
    for (x, t), w in zip(states, pi):
        by_x.setdefault(x, []).append((t, w))
        by_t.setdefault(t, []).append((x, w))

    def theta_rows(x, t):
        row = by_x[x]
        z = sum(w for _, w in row)
        return ((j, w / z) for j, w in row)

    def x_rows(x, t):
        row = by_t[t]
        z = sum(w for _, w in row)
        return ((xn, w / z) for xn, w in row)

    p_theta, p_x = _kernels(states, index, theta_rows, x_rows)
    return DiscreteJointModel(states, pi, p_theta, p_x, label)


def function_on_states(model, h):
    """Per-state values of h, aligned with ``model.states``.

    ``h`` is one of "sum", "const", "coord:x", "coord:theta", a callable of
    (x, theta), or a sequence of values.
    """
    if isinstance(h, str):
        table = {
            "sum": lambda x, t: x + t,
            "const": lambda x, t: 1.0,
            "coord:x": lambda x, t: x,
            "coord:theta": lambda x, t: t,
        }
        if h not in table:
            raise ParameterOutOfRange(f"unknown function spec {h!r}")
        h = table[h]
    if callable(h):
        values = np.array([h(x, t) for x, t in model.states], dtype=float)
    else:
        values = np.asarray(h, dtype=float).reshape(-1)
    if values.size != len(model):
        raise ParameterOutOfRange(f"h has {values.size} values for {len(model)} states")
    if not np.all(np.isfinite(values)):
        raise ParameterOutOfRange("h has non-finite values")
    return values


@dataclass(frozen=True)
class ScanTransitionMatrix:
    p_rs: np.ndarray
    alpha1: float
    model: DiscreteJointModel = field(repr=False)


def assemble_scan_matrix(model, alpha1):
    if not 0.0 <= alpha1 <= 1.0:
        raise ParameterOutOfRange(f"alpha1 must lie in [0, 1], got {alpha1}")
    return ScanTransitionMatrix(alpha1 * model.p_theta + (1.0 - alpha1) * model.p_x, float(alpha1), model)


def discrete_scan_rate(scan):
    return second_eigenvalue_modulus(scan.p_rs)


def peskun_avar(scan, h):
    """h (2BZ - B - BA) h^T with Z the fundamental matrix {I - (P - A)}^-1."""
    pi = scan.model.pi
    h = np.asarray(h, dtype=float)
    n = pi.size
    a = np.tile(pi, (n, 1))
    try:
        zh = solve(np.eye(n) - (scan.p_rs - a), h)
    except SingularMatrix as exc:
        raise SingularMatrix(f"fundamental matrix does not exist (chain reducible?): {exc}") from exc
    bh = pi * h
    mean = bh.sum()
    return float(2.0 * bh @ zh - bh @ h - mean * mean)


def autocovariances(scan, h, max_lag):
    """Exact lag-0..max_lag autocovariances of h under the stationary chain."""
    pi = scan.model.pi
    c = np.asarray(h, dtype=float) - pi @ h
    out = np.empty(max_lag + 1)
    f = c.copy()
    for k in range(max_lag + 1):
        out[k] = (pi * c) @ f
        f = scan.p_rs @ f
    return out


def default_max_lag(scan):
    rho2 = discrete_scan_rate(scan)
    if rho2 >= 1.0 - 1e-12:
        return 10_000
    return 100 * math.ceil(1.0 / (1.0 - rho2))


def autocov_series_avar(scan, h, max_lag=None):
    """gamma_0 + 2 sum_k gamma_k, truncated once |gamma_k| < 1e-12 gamma_0."""
    if max_lag is None:
        max_lag = default_max_lag(scan)
    if max_lag < 1:
        raise ParameterOutOfRange("max_lag must be at least 1")
    pi = scan.model.pi
    h = np.asarray(h, dtype=float)
    c = h - pi @ h
    if np.max(np.abs(c)) <= 1e-14 * max(1.0, np.max(np.abs(h))):
        return 0.0  # constant up to rounding
    g0 = float((pi * c) @ c)
    total = g0
    f = c
    for _ in range(max_lag):
        f = scan.p_rs @ f
        gk = float((pi * c) @ f)
        total += 2.0 * gk
        if abs(gk) < 1e-12 * g0:
            return total
    raise TruncationNotConverged(f"series not converged after {max_lag} lags", total)
