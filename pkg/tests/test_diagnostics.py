import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scanopt.diagnostics import (
    batch_means_avar,
    empirical_autocov,
    point_mass,
    rate_lag2_report,
    tv_curve,
    tv_distance_exact,
    tv_ratio_check,
)
from scanopt.discrete import (
    assemble_scan_matrix,
    autocovariances,
    build_binomial_model,
    discrete_scan_rate,
    function_on_states,
    peskun_avar,
)
from scanopt.errors import InvalidPmf, TraceTooShort
from scanopt.sampler import ChainTrace, RngStream, run_chain

# regression data: (1,1,0.5), alpha1 = 0.5, seed 2008, m = 1e5, h = sum
FROZEN_LAG2 = 0.7216517417953355
RHO2_11 = (2 + np.sqrt(2)) / 4


def iid_trace(values):
    v = np.asarray(values, dtype=float).reshape(-1, 1)
    return ChainTrace(v, np.zeros(len(v), dtype=np.int64), np.array([1.0]), 0, 0, 0, "iid", "iid")


def test_iid_batch_means():
    v = np.random.default_rng(1).standard_normal(1_000_000)
    est = batch_means_avar(iid_trace(v), lambda s: s[:, 0])
    assert abs(est.point - 1.0) <= 0.10
    assert est.batch_count == 1000 and est.batch_size == 1000
    assert est.standard_error > 0


def test_batch_means_shape_and_errors():
    tr = iid_trace(np.arange(10.0))
    est = batch_means_avar(tr, lambda s: s[:, 0], batch_count=3)
    assert est.batch_count * est.batch_size <= 10 and est.batch_size == 3
    with pytest.raises(TraceTooShort):
        batch_means_avar(tr, lambda s: s[:, 0], batch_count=6)
    with pytest.raises(TraceTooShort):
        batch_means_avar(tr, lambda s: s[:, 0], batch_count=1)


def test_constant_h_is_exactly_zero(binom_63, biv_example):
    tr = run_chain(binom_63, (0.5, 0.5), 10_000, 0, RngStream(3))
    assert batch_means_avar(tr, "const", model=binom_63).point == 0.0
    tr = run_chain(biv_example.target(), (0.5, 0.5), 10_000, None, RngStream(3))
    assert batch_means_avar(tr, "const").point == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("n1,n2", [(1, 1), (3, 2), (6, 3)])
@pytest.mark.parametrize("a1", [0.3, 0.5, 0.7])
def test_discrete_batch_means_matches_peskun(n1, n2, a1):
    m = build_binomial_model(n1, n2, 0.5)
    h = function_on_states(m, "sum")
    exact = peskun_avar(assemble_scan_matrix(m, a1), h)
    tr = run_chain(m, (a1, 1 - a1), 1_000_000, 0, RngStream(100 + 10 * n1 + int(10 * a1)))
    est = batch_means_avar(tr, h)
    assert abs(est.point - exact) / exact < 0.10


def test_autocov_lag0_is_variance():
    v = np.random.default_rng(2).normal(size=5000)
    assert empirical_autocov(iid_trace(v), lambda s: s[:, 0], 0) == pytest.approx(np.var(v), rel=1e-12)


def test_iid_lag1_near_zero():
    m = 1_000_000
    v = np.random.default_rng(3).normal(size=m)
    tr = iid_trace(v)
    g0 = empirical_autocov(tr, lambda s: s[:, 0], 0)
    assert abs(empirical_autocov(tr, lambda s: s[:, 0], 1)) <= 4 / np.sqrt(m) * g0


def test_autocov_lag_errors():
    with pytest.raises(TraceTooShort):
        empirical_autocov(iid_trace([1.0, 2.0]), lambda s: s[:, 0], 2)


@pytest.mark.parametrize("lag", [1, 2, 5])
def test_discrete_autocov_matches_exact(binom_63, lag):
    a1 = 0.5
    scan = assemble_scan_matrix(binom_63, a1)
    h = function_on_states(binom_63, "sum")
    exact = autocovariances(scan, h, lag)[lag]
    m = 1_000_000
    tr = run_chain(binom_63, (a1, 1 - a1), m, 0, RngStream(50 + lag))
    est = empirical_autocov(tr, h, lag)
    # sd of the lagged product mean is about sqrt(avar of the product / m); bound it by batch means
    c = h[tr.state_index] - h[tr.state_index].mean()
    prod = iid_trace(c[:-lag] * c[lag:])
    se = np.sqrt(batch_means_avar(prod, lambda s: s[:, 0]).point / m)
    assert abs(est - exact) <= 4 * se


def test_lag2_report_frozen(binom_11):
    scan = assemble_scan_matrix(binom_11, 0.5)
    tr = run_chain(binom_11, (0.5, 0.5), 100_000, 0, RngStream(2008))
    rep = rate_lag2_report(tr, "sum", discrete_scan_rate(scan), binom_11)
    assert abs(rep.lag2_autocorrelation - FROZEN_LAG2) <= 1e-12
    assert abs(rep.rate_squared - RHO2_11**2) <= 1e-12


def test_lag2_report_total(biv_example):
    tr = run_chain(biv_example.target(), (0.5, 0.5), 2000, None, RngStream(1))
    rep = rate_lag2_report(tr, "sum", 1.0)
    assert np.isfinite(rep.lag2_autocorrelation) and rep.rate_squared == 1.0


def test_tv_from_pi_is_zero(binom_63):
    scan = assemble_scan_matrix(binom_63, 0.4)
    for t in (0, 1, 7, 64):
        assert tv_distance_exact(binom_63, scan, t, binom_63.pi) <= 1e-12


def test_tv_point_mass_at_zero(binom_63):
    scan = assemble_scan_matrix(binom_63, 0.4)
    for i in (0, 5, len(binom_63) - 1):
        mu = point_mass(binom_63, binom_63.states[i])
        assert tv_distance_exact(binom_63, scan, 0, mu) == pytest.approx(1 - binom_63.pi[i], abs=1e-14)


def test_tv_ratio_tends_to_rho2(binom_11):
    scan = assemble_scan_matrix(binom_11, 0.5)
    rho2 = discrete_scan_rate(scan)
    assert abs(rho2 - RHO2_11) <= 1e-12
    worst, ratios = tv_ratio_check(binom_11, scan, rho2)
    assert worst <= 0.01 and ratios.size == 50


@given(st.sampled_from([(1, 1), (3, 2), (2, 4)]), st.floats(0.05, 0.95), st.integers(0, 30))
def test_tv_squaring_matches_curve_and_decreases(nn, a1, t):
    m = build_binomial_model(nn[0], nn[1], 0.5)
    scan = assemble_scan_matrix(m, a1)
    mu = point_mass(m, m.states[-1])
    curve = tv_curve(m, scan, 31, mu)
    assert abs(tv_distance_exact(m, scan, t, mu) - curve[t]) <= 1e-12
    assert np.all(np.diff(curve) <= 1e-12)


def test_tv_rejects_bad_initial(binom_11):
    scan = assemble_scan_matrix(binom_11, 0.5)
    with pytest.raises(InvalidPmf):
        tv_distance_exact(binom_11, scan, 3, [0.5, 0.5, 0.5, 0.0])
