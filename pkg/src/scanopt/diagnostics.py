"""Empirical asymptotic variance, autocovariance and exact TV decay."""

from dataclasses import dataclass

import numpy as np

from .discrete import function_on_states
from .errors import InvalidPmf, ParameterOutOfRange, TraceTooShort


@dataclass(frozen=True)
class AvarEstimate:
    point: float
    batch_count: int
    batch_size: int
    standard_error: float


@dataclass(frozen=True)
class Lag2Report:
    lag2_autocorrelation: float
    rate_squared: float


def gaussian_h(spec, d):
    """Vectorised h over an (m, d) state array for "sum", "const" or "coord:<i>"."""
    if spec == "sum":
        return lambda s: s.sum(axis=1)
    if spec == "const":
        return lambda s: np.ones(s.shape[0])
    if isinstance(spec, str) and spec.startswith("coord:"):
        i = int(spec.split(":", 1)[1])
        if not 0 <= i < d:
            raise ParameterOutOfRange(f"coordinate {i} out of range for dimension {d}")
        return lambda s: s[:, i]
    raise ParameterOutOfRange(f"unsupported function spec {spec!r} for a Gaussian target")


def trace_values(trace, h, model=None):
    """h evaluated along a trace.

    ``h`` may be a callable on the (m, d) state array, an array of per-state
    values (discrete traces), or a spec string resolved against ``model``.
    """
    if isinstance(h, str):
        if trace.is_discrete:
            if model is None:
                raise ParameterOutOfRange("a discrete model is needed to resolve a function spec")
            h = function_on_states(model, h)
        else:
            h = gaussian_h(h, trace.states.shape[1])
    if callable(h):
        return np.asarray(h(trace.states), dtype=float)
    values = np.asarray(h, dtype=float)
    if not trace.is_discrete:
        raise ParameterOutOfRange("per-state values only apply to discrete traces")
    return values[trace.state_index]


def batch_means_avar(trace, h, batch_count=None, model=None):
    """Non-overlapping batch-means estimate of lim m Var(mean of h)."""
    v = trace_values(trace, h, model)
    m = v.size
    if batch_count is None:
        batch_count = int(np.sqrt(m))
    if batch_count < 2 or m < 2 * batch_count:
        raise TraceTooShort(f"trace of length {m} cannot be split into {batch_count} batches of size >= 2")
    size = m // batch_count
    means = v[: batch_count * size].reshape(batch_count, size).mean(axis=1)
    if np.ptp(means) == 0.0:
        return AvarEstimate(0.0, batch_count, size, 0.0)
    point = size * float(np.var(means, ddof=1))
    return AvarEstimate(point, batch_count, size, point * np.sqrt(2.0 / (batch_count - 1)))


def empirical_autocov(trace, h, lag, model=None):
    v = trace_values(trace, h, model)
    m = v.size
    if not 0 <= lag < m:
        raise TraceTooShort(f"lag {lag} needs a trace longer than {m}")
    c = v - v.mean()
    return float(c[: m - lag] @ c[lag:]) / (m - lag)


def rate_lag2_report(trace, h, exact_rate, model=None):
    """Side-by-side lag-2 autocorrelation and squared rate; asserts nothing."""
    g0 = empirical_autocov(trace, h, 0, model)
    g2 = empirical_autocov(trace, h, 2, model)
    ratio = g2 / g0 if g0 > 0 else float("nan")
    return Lag2Report(ratio, float(exact_rate) ** 2)


def _check_pmf(initial, n):
    mu = np.asarray(initial, dtype=float).reshape(-1)
    if mu.size != n or np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-9:
        raise InvalidPmf("initial distribution must be a pmf over the model states")
    return mu


def tv_distance_exact(model, scan, t, initial):
    """0.5 * || initial P^t - pi ||_1, with P^t by repeated squaring."""
    if t < 0:
        raise ParameterOutOfRange("t must be nonnegative")
    mu = _check_pmf(initial, len(model))
    power = scan.p_rs
    k = int(t)
    while k:
        if k & 1:
            mu = mu @ power
        k >>= 1
        if k:
            power = power @ power
    return 0.5 * float(np.abs(mu - model.pi).sum())


def tv_curve(model, scan, t_max, initial):
    """tv(t) for t = 0..t_max by successive multiplication (plot-ready series)."""
    mu = _check_pmf(initial, len(model))
    out = np.empty(t_max + 1)
    for t in range(t_max + 1):
        out[t] = 0.5 * np.abs(mu - model.pi).sum()
        mu = mu @ scan.p_rs
    return out


def point_mass(model, state):
    mu = np.zeros(len(model))
    mu[model.index[tuple(state)]] = 1.0
    return mu


def tv_ratio_check(model, scan, rate, t_min=50, t_max=100, floor=1e-10):
    """Largest |tv(t+1)/tv(t) - rate| over t_min <= t < t_max, from the first state.

    Steps where tv has already dropped below ``floor`` are skipped since the
    ratio is then rounding noise.
    """
    tv = tv_curve(model, scan, t_max, point_mass(model, model.states[0]))
    worst = 0.0
    ratios = []
    for t in range(t_min, t_max):
        if tv[t] < floor:
            break
        r = tv[t + 1] / tv[t]
        ratios.append(r)
        worst = max(worst, abs(r - rate))
    return worst, np.array(ratios)
