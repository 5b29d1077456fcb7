"""Random-scan Gibbs samplers for Gaussian and finite bivariate targets.

All randomness flows through :class:`RngStream` (numpy Philox, keyed by a
``SeedSequence`` of (seed, stream_id)). Each step consumes one uniform for
the coordinate choice and one draw (uniform for discrete models, standard
normal for Gaussian ones) for the new value.
"""

import bisect
from dataclasses import dataclass, field

import numpy as np

from .discrete import (
    DiscreteJointModel,
    assemble_scan_matrix,
    binomial_pmf,
    function_on_states,
    hypergeometric_pmf,
    peskun_avar,
)
from .errors import (
    NotPositiveDefinite,
    ParameterOutOfRange,
    TraceTooShort,
    UnsupportedCombination,
)
from .gaussian import (
    BivariateGaussianSpec,
    GaussianTarget,
    as_alpha,
    bivariate_avar_sum,
    equal_alpha,
    gaussian_scan_rate,
)
from .optimize import optimize_1d, optimize_simplex

RNG_ALGORITHM = "numpy.Philox4x64-10(SeedSequence(seed,spawn_key=(stream_id,)))"
BLOCK = 1 << 16
GAUSSIAN_BURN_IN = 1000


@dataclass
class RngStream:
    seed: int
    stream_id: int = 0
    algorithm_name: str = RNG_ALGORITHM
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterOutOfRange("seed must be a 64-bit unsigned integer")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def spawn(self, stream_id):
        return RngStream(self.seed, stream_id)


@dataclass
class ChainTrace:
    states: np.ndarray  # (m, d); discrete columns are (x, theta)
    coordinate_visits: np.ndarray
    alpha: np.ndarray
    burn_in: int
    seed: int
    stream_id: int
    algorithm: str
    label: str
    state_index: np.ndarray = None  # discrete only: index into model.states
    columns: tuple = ()

    def __len__(self):
        return self.states.shape[0]

    @property
    def is_discrete(self):
        return self.state_index is not None

    def visit_frequencies(self):
        return np.bincount(self.coordinate_visits, minlength=self.alpha.size) / len(self)


@dataclass
class TuneReport:
    pilot_length: int
    estimated_sigma: np.ndarray
    alpha_hat: np.ndarray
    criterion: str
    value: float
    reference_alpha: np.ndarray = None


def sample_hypergeometric(n1, n2, x, rng):
    """Inverse-CDF draw of theta given x."""
    js, w = hypergeometric_pmf(n1, n2, x)
    return int(js[_inverse_cdf(np.cumsum(w), rng.gen.random())])


def sample_binomial(n, p, rng):
    w = binomial_pmf(n, p)
    return _inverse_cdf(np.cumsum(w), rng.gen.random())


def _inverse_cdf(cdf, u):
    k = bisect.bisect_right(cdf, u)
    return min(k, len(cdf) - 1)


class _DiscreteKernel:
    def __init__(self, model):
        self.model = model
        self.targets = []
        self.cdfs = []
        for k in (model.p_theta, model.p_x):
            tgt, cdf = [], []
            for row in k:
                nz = np.flatnonzero(row > 0)
                tgt.append(nz.tolist())
                cdf.append(np.cumsum(row[nz]).tolist())
            self.targets.append(tgt)
            self.cdfs.append(cdf)
        self.states = np.array(model.states, dtype=np.int64)

    def initial(self, rng):
        params = self.model.params
        if params is not None:
            n1, n2, p = params
            t = sample_binomial(n1, p, rng)
            x = t + sample_binomial(n2, p, rng)
            return self.model.index[(x, t)]
        return _inverse_cdf(np.cumsum(self.model.pi).tolist(), rng.gen.random())

    def draws(self, rng, k):
        return rng.gen.random(k)

    def run(self, s, coords, draws, keep_from):
        n = coords.size
        out = np.empty(max(n - keep_from, 0), dtype=np.int64)
        targets, cdfs = self.targets, self.cdfs
        coords, draws = coords.tolist(), draws.tolist()
        for t in range(n):
            c = coords[t]
            cdf = cdfs[c][s]
            k = bisect.bisect_right(cdf, draws[t])
            s = targets[c][s][min(k, len(cdf) - 1)]
            if t >= keep_from:
                out[t - keep_from] = s
        return s, out


class _GaussianKernel:
    def __init__(self, target):
        self.target = target
        self.coef = target.conditional_coefficients().tolist()
        self.sd = np.sqrt(target.cond_var_diag).tolist()

    def initial(self, rng):
        return [0.0] * self.target.dimension

    def draws(self, rng, k):
        return rng.gen.standard_normal(k)

    def run(self, x, coords, draws, keep_from):
        x = list(x)
        n = coords.size
        d = len(x)
        out = np.empty((max(n - keep_from, 0), d))
        coef, sd = self.coef, self.sd
        rng_d = range(d)
        coords, draws = coords.tolist(), draws.tolist()
        for t in range(n):
            i = coords[t]
            row = coef[i]
            mean = 0.0
            for j in rng_d:
                mean += row[j] * x[j]
            x[i] = mean + sd[i] * draws[t]
            if t >= keep_from:
                out[t - keep_from] = x
        return x, out


def _kernel(model):
    if isinstance(model, DiscreteJointModel):
        return _DiscreteKernel(model)
    if isinstance(model, GaussianTarget):
        return _GaussianKernel(model)
    raise UnsupportedCombination(f"no sampler for model of type {type(model).__name__}")


def _choose(alpha, u):
    cum = np.cumsum(alpha)
    cum[-1] = 1.0
    return np.searchsorted(cum, u, side="right").clip(max=alpha.size - 1)


def random_scan_step(model, state, alpha, rng):
    """One random-scan update; returns (next_state, chosen_coordinate)."""
    kern = _kernel(model)
    alpha = as_alpha(alpha, 2 if isinstance(model, DiscreteJointModel) else model.dimension)
    coords = _choose(alpha, rng.gen.random(1))
    draws = kern.draws(rng, 1)
    if isinstance(model, DiscreteJointModel):
        s, _ = kern.run(model.index[tuple(state)], coords, draws, 1)
        return model.states[s], int(coords[0])
    x, _ = kern.run(np.asarray(state, dtype=float), coords, draws, 1)
    return np.array(x), int(coords[0])


def run_chain(model, alpha, iterations, burn_in=None, rng=None, initial=None):
    """Run ``burn_in + iterations`` random-scan steps and keep the last ``iterations``.

    Discrete chains start from an exact draw from pi, Gaussian chains from
    the origin (default burn-in 1000). Pass ``initial`` to continue a chain.
    """
    if iterations < 1:
        raise ParameterOutOfRange("iterations must be at least 1")
    if rng is None:
        raise ParameterOutOfRange("run_chain needs an explicit RngStream")
    discrete = isinstance(model, DiscreteJointModel)
    kern = _kernel(model)
    alpha = as_alpha(alpha, 2 if discrete else model.dimension)
    if burn_in is None:
        burn_in = 0 if discrete else GAUSSIAN_BURN_IN
    if initial is None:
        state = kern.initial(rng)
    else:
        state = model.index[tuple(initial)] if discrete else list(map(float, initial))

    total = burn_in + iterations
    kept, visits = [], []
    done = 0
    while done < total:
        k = min(BLOCK, total - done)
        coords = _choose(alpha, rng.gen.random(k))
        draws = kern.draws(rng, k)
        keep_from = max(burn_in - done, 0)
        state, out = kern.run(state, coords, draws, keep_from)
        if keep_from < k:
            kept.append(out)
            visits.append(coords[keep_from:])
        done += k
    kept = np.concatenate(kept)
    visits = np.concatenate(visits).astype(np.int64)
    if discrete:
        return ChainTrace(kern.states[kept], visits, alpha, burn_in, rng.seed, rng.stream_id,
                          rng.algorithm_name, model.label, state_index=kept, columns=("x", "theta"))
    cols = tuple(f"x{i + 1}" for i in range(model.dimension))
    return ChainTrace(kept, visits, alpha, burn_in, rng.seed, rng.stream_id, rng.algorithm_name,
                      model.label, columns=cols)


def fit_gaussian(trace):
    if trace.is_discrete:
        raise UnsupportedCombination("Gaussian-approximation tuning needs a continuous-state trace")
    m, d = trace.states.shape
    if m < 10 * d:
        raise TraceTooShort(f"pilot has {m} states, need at least {10 * d}")
    cov = np.atleast_2d(np.cov(trace.states, rowvar=False, ddof=1))
    try:
        return GaussianTarget.from_sigma(cov, label=f"pilot-fit({trace.label})")
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"pilot covariance is singular: {exc}") from exc


def tune_pilot(trace, criterion="avar_sum", resolution=0.01, reference_sigma=None):
    """Fit N(0, sample covariance) to a pilot trace and optimise alpha for it."""
    fitted = fit_gaussian(trace)
    d = fitted.dimension

    def best_alpha(target):
        if criterion == "rate":
            if d == 2:
                return optimize_1d(lambda a: gaussian_scan_rate(target, (a, 1 - a)), name="rate")
            return optimize_simplex(lambda a: gaussian_scan_rate(target, a), d, resolution, name="rate")
        if criterion == "avar_sum":
            if d != 2:
                raise UnsupportedCombination("avar_sum tuning is only available for bivariate targets")
            s = target.sigma
            sd = np.sqrt(np.diag(s))
            spec = BivariateGaussianSpec(sd[0], sd[1], s[0, 1] / (sd[0] * sd[1]))
            return optimize_1d(lambda a: bivariate_avar_sum(spec, a), name="avar_sum")
        raise ParameterOutOfRange(f"unknown tuning criterion {criterion!r}")

    res = best_alpha(fitted)
    ref = None
    if reference_sigma is not None:
        ref = best_alpha(GaussianTarget.from_sigma(reference_sigma)).alpha_star
    return TuneReport(len(trace), fitted.sigma, res.alpha_star, criterion, res.value, ref)


def two_phase_run(model, h, phase1_iters, phase2_iters, rng, burn_in=None):
    """Equal-alpha phase, avar-optimal alpha chosen, then a second phase.

    Discrete models are optimised exactly (Peskun variance of ``h``);
    bivariate Gaussian models use pilot tuning on the phase-1 trace, which
    requires ``h == "sum"``. Phase 2 continues from the last phase-1 state.
    """
    discrete = isinstance(model, DiscreteJointModel)
    d = 2 if discrete else model.dimension
    trace1 = run_chain(model, equal_alpha(d), phase1_iters, burn_in, rng)
    if discrete:
        values = function_on_states(model, h)
        res = optimize_1d(lambda a: peskun_avar(assemble_scan_matrix(model, a), values), name="avar")
        report = TuneReport(len(trace1), None, res.alpha_star, "avar", res.value)
    else:
        if h != "sum" or d != 2:
            raise UnsupportedCombination(
                "Gaussian two-phase tuning supports h=sum on bivariate targets only"
            )
        report = tune_pilot(trace1, "avar_sum", reference_sigma=model.sigma)
    if phase2_iters <= 0:
        return trace1, report, None
    last = trace1.states[-1]
    start = (int(last[0]), int(last[1])) if discrete else last
    trace2 = run_chain(model, report.alpha_hat, phase2_iters, 0, rng, initial=start)
    return trace1, report, trace2
