import numpy as np
import pytest

from scanopt.discrete import assemble_scan_matrix, build_custom_model, function_on_states, peskun_avar
from scanopt.errors import NotPositiveDefinite, ParameterOutOfRange, TraceTooShort
from scanopt.gaussian import GaussianTarget, exchangeable_sigma
from scanopt.optimize import optimize_1d
from scanopt.sampler import (
    ChainTrace,
    RngStream,
    _DiscreteKernel,
    random_scan_step,
    run_chain,
    sample_binomial,
    sample_hypergeometric,
    tune_pilot,
    two_phase_run,
)
from scanopt.diagnostics import batch_means_avar


def exact_linear_avar(sigma, alpha, c):
    """Exact lim m Var for h = c.x under the random scan (test oracle).

    E[X_{t+1} | X_t] = M X_t with M = I - diag(alpha) S R, so
    gamma_k = c' M^k Sigma c and the series sums to c'[2 (I - M)^-1 - I] Sigma c.
    """
    r = np.linalg.inv(sigma)
    m = np.eye(len(alpha)) - np.diag(alpha) @ np.diag(1 / np.diag(r)) @ r
    return c @ (2 * np.linalg.inv(np.eye(len(alpha)) - m) - np.eye(len(alpha))) @ sigma @ c


def test_rng_reproducible_and_streams_distinct():
    a = RngStream(7).gen.random(5)
    b = RngStream(7).gen.random(5)
    c = RngStream(7, stream_id=1).gen.random(5)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ParameterOutOfRange):
        RngStream(-1)


def test_independent_streams_uncorrelated():
    a = RngStream(3, 0).gen.random(200_000)
    b = RngStream(3, 1).gen.random(200_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(200_000)


def test_step_degenerate_alpha(binom_63):
    rng = RngStream(1)
    state = (4, 2)
    for _ in range(50):
        state, c = random_scan_step(binom_63, state, (1.0, 0.0), rng)
        assert c == 0 and state[0] == 4


def test_step_theta_update_is_hypergeometric():
    from scanopt.discrete import build_binomial_model

    m = build_binomial_model(2, 1, 0.5)
    # with alpha = (1, 0) the theta draw uses the second uniform of each pair
    r1, r2 = RngStream(11), RngStream(11)
    for _ in range(200):
        state, _ = random_scan_step(m, (1, 0), (1.0, 0.0), r1)
        r2.gen.random()
        assert state == (1, sample_hypergeometric(2, 1, 1, r2))


def test_step_gaussian_keeps_other_coordinates(biv_example):
    t = biv_example.target()
    x = np.array([1.5, -0.5])
    y, c = random_scan_step(t, x, (0.5, 0.5), RngStream(2))
    assert y[1 - c] == x[1 - c] and y[c] != x[c]


def test_gaussian_conditionals_match_regression(biv_example):
    t = biv_example.target()
    s1, s2, rho = biv_example.sigma1, biv_example.sigma2, biv_example.rho
    b = t.conditional_coefficients()
    assert abs(b[0, 1] - rho * s1 / s2) <= 1e-12 and abs(b[1, 0] - rho * s2 / s1) <= 1e-12
    assert np.max(np.abs(t.cond_var_diag - [s1**2 * (1 - rho**2), s2**2 * (1 - rho**2)])) <= 1e-12


def test_hypergeometric_sampler():
    rng = RngStream(5)
    assert all(sample_hypergeometric(4, 3, 0, rng) == 0 for _ in range(20))
    assert all(sample_hypergeometric(4, 3, 7, rng) == 4 for _ in range(20))
    draws = [sample_hypergeometric(2, 1, 1, rng) for _ in range(100_000)]
    assert abs(np.mean(np.array(draws) == 1) - 2 / 3) <= 0.01
    with pytest.raises(ParameterOutOfRange):
        sample_hypergeometric(2, 1, 4, rng)


def test_binomial_sampler():
    rng = RngStream(6)
    assert all(sample_binomial(5, 0.0, rng) == 0 for _ in range(10))
    assert all(sample_binomial(5, 1.0, rng) == 5 for _ in range(10))
    n, p, m = 10, 0.3, 100_000
    mean = np.mean([sample_binomial(n, p, rng) for _ in range(m)])
    assert abs(mean - n * p) <= 4 * np.sqrt(n * p * (1 - p) / m)


def test_trace_length_and_burn_in(binom_11, biv_example):
    tr = run_chain(binom_11, (0.5, 0.5), 1, 0, RngStream(1))
    assert len(tr) == 1 and tr.burn_in == 0
    tr = run_chain(biv_example.target(), (0.5, 0.5), 10, None, RngStream(1))
    assert len(tr) == 10 and tr.burn_in == 1000
    with pytest.raises(ParameterOutOfRange):
        run_chain(binom_11, (0.5, 0.5), 0, 0, RngStream(1))


def test_reproducible_traces(binom_63, biv_example):
    for model in (binom_63, biv_example.target()):
        a = run_chain(model, (0.3, 0.7), 70_000, None, RngStream(9))
        b = run_chain(model, (0.3, 0.7), 70_000, None, RngStream(9))
        assert a.states.tobytes() == b.states.tobytes()
        assert a.coordinate_visits.tobytes() == b.coordinate_visits.tobytes()


@pytest.mark.parametrize("alpha", [(0.5, 0.5), (0.1, 0.9), (0.93, 0.07)])
def test_visit_frequencies(binom_63, alpha):
    m = 200_000
    tr = run_chain(binom_63, alpha, m, 0, RngStream(4))
    a = np.array(alpha)
    assert np.all(np.abs(tr.visit_frequencies() - a) <= 4 * np.sqrt(a * (1 - a) / m))


def test_discrete_chain_frequencies(binom_11):
    tr = run_chain(binom_11, (0.5, 0.5), 1_000_000, 0, RngStream(21))
    freq = np.bincount(tr.state_index, minlength=4) / len(tr)
    assert np.max(np.abs(freq - binom_11.pi)) <= 0.005


def test_gaussian_chain_covariance(biv_example):
    tr = run_chain(biv_example.target(), (0.5, 0.5), 1_000_000, None, RngStream(22))
    cov = np.cov(tr.states, rowvar=False)
    assert np.max(np.abs(cov - biv_example.sigma) / np.abs(biv_example.sigma)) <= 0.05


def test_gaussian_batch_means_matches_exact_linear_avar(biv_example):
    # independent check of the sampler: the exact avar for h = x1 + x2 at alpha1 = 0.5 is 143/3
    exact = exact_linear_avar(biv_example.sigma, np.array([0.5, 0.5]), np.ones(2))
    assert exact == pytest.approx(143 / 3, abs=1e-9)
    tr = run_chain(biv_example.target(), (0.5, 0.5), 1_000_000, None, RngStream(23))
    est = batch_means_avar(tr, "sum")
    assert abs(est.point - exact) / exact <= 0.10


def test_stationarity_preserved_each_step():
    from scipy.stats import chi2

    from scanopt.discrete import build_binomial_model

    m = build_binomial_model(3, 2, 0.4)
    kern = _DiscreteKernel(m)
    g = RngStream(8).gen
    reps, steps = 100_000, 4
    cdf = np.cumsum(m.pi)
    states = np.minimum(np.searchsorted(cdf, g.random(reps), side="right"), len(m) - 1)
    alpha_cum = 0.4
    for _ in range(steps):
        coords = (g.random(reps) >= alpha_cum).astype(np.int64)
        draws = g.random(reps)
        states = np.array([kern.run(int(s), coords[i:i + 1], draws[i:i + 1], 0)[1][0]
                           for i, s in enumerate(states)])
        counts = np.bincount(states, minlength=len(m))
        expected = reps * m.pi
        stat = np.sum((counts - expected) ** 2 / expected)
        assert stat < chi2.ppf(0.999, len(m) - 1)


def test_custom_model_chain():
    w = {(0, 0): 0.1, (0, 1): 0.2, (1, 0): 0.3, (2, 1): 0.4}
    m = build_custom_model(w)
    tr = run_chain(m, (0.5, 0.5), 400_000, 0, RngStream(2))
    freq = np.bincount(tr.state_index, minlength=len(m)) / len(tr)
    assert np.max(np.abs(freq - m.pi)) <= 0.005


def test_tune_pilot_avar_sum(biv_example):
    tr = run_chain(biv_example.target(), (0.5, 0.5), 100_000, None, RngStream(30))
    rep = tune_pilot(tr, "avar_sum", reference_sigma=biv_example.sigma)
    assert abs(rep.alpha_hat[0] - 0.93) <= 0.05
    assert abs(rep.reference_alpha[0] - 13 / 14) <= 1e-5
    assert np.allclose(rep.estimated_sigma, rep.estimated_sigma.T)


def test_tune_pilot_rate_symmetric():
    t = GaussianTarget.from_sigma(exchangeable_sigma([1.0, 1.0, 1.0]))
    tr = run_chain(t, (1 / 3, 1 / 3, 1 / 3), 100_000, None, RngStream(31))
    rep = tune_pilot(tr, "rate")
    assert np.max(np.abs(rep.alpha_hat - 1 / 3)) <= 0.05


def test_tune_pilot_errors(biv_example):
    const = ChainTrace(np.ones((100, 2)), np.zeros(100, dtype=int), np.array([0.5, 0.5]), 0, 0, 0, "x", "c")
    with pytest.raises(NotPositiveDefinite):
        tune_pilot(const, "avar_sum")
    short = ChainTrace(np.random.default_rng(0).normal(size=(5, 2)), np.zeros(5, dtype=int),
                       np.array([0.5, 0.5]), 0, 0, 0, "x", "c")
    with pytest.raises(TraceTooShort):
        tune_pilot(short, "avar_sum")


def test_two_phase_discrete(binom_63):
    tr1, rep, tr2 = two_phase_run(binom_63, "sum", 50_000, 50_000, RngStream(40))
    h = function_on_states(binom_63, "sum")
    exact = optimize_1d(lambda a: peskun_avar(assemble_scan_matrix(binom_63, a), h))
    assert np.allclose(tr1.alpha, 0.5)
    assert rep.alpha_hat[0] == exact.alpha1
    assert np.array_equal(tr2.alpha, rep.alpha_hat) and len(tr2) == 50_000


def test_two_phase_gaussian(biv_example):
    tr1, rep, tr2 = two_phase_run(biv_example.target(), "sum", 100_000, 10_000, RngStream(41))
    assert abs(rep.alpha_hat[0] - 0.93) <= 0.05
    assert len(tr2) == 10_000


def test_two_phase_no_second_phase(binom_11):
    tr1, rep, tr2 = two_phase_run(binom_11, "sum", 1000, 0, RngStream(42))
    assert tr2 is None and len(tr1) == 1000 and rep.alpha_hat.size == 2
