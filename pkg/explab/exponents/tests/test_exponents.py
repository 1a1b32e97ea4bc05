import numpy as np
from numpy.testing import assert_allclose, assert_raises

from explab.channel import bsc, validate_channel, uniform_distribution
from explab.channel import cutoff_rate, mutual_information
from explab.channel import bhattacharyya_matrix
from explab.typecalc import kl_divergence, tilted_distribution
from explab.typecalc import simplex_grid_minimize, trc_objective
from explab.exponents import e0_iid, e0_cc, e0, e_rce, critical_rate
from explab.exponents import ex_gallager, ex_limit, e_ex, e_sp, e_trc
from explab.exponents import e_trc_direct, expurgated_bound, exponent_table
from explab.exponents import trc_branch
from explab.core import RhoOutOfRangeError, RateOutOfRangeError
from explab.core import DivergingError
from explab.utils import rate_grid

ch = bsc(0.11)
q = uniform_distribution(2)
r0 = cutoff_rate(ch, q)
capacity = mutual_information(ch, q)
z_channel = validate_channel([[1., 0.], [0.3, 0.7]])


def test_e0_iid():
    assert_allclose(e0_iid(0., q, ch), 0., atol=1E-15)
    assert_allclose(e0_iid(1., q, ch), r0, rtol=1E-12)
    assert_allclose(r0, 0.2071, atol=1E-3)
    half = e0_iid(0.5, q, ch)
    assert 0 < half < r0
    assert half > 0.5 * (e0_iid(0., q, ch) + e0_iid(1., q, ch))
    assert_raises(RhoOutOfRangeError, e0_iid, 1.5, q, ch)
    assert_raises(RhoOutOfRangeError, e0_iid, -0.1, q, ch)


def test_e0_concave_nondecreasing():
    rhos = np.linspace(0., 1., 11)
    for w in [ch, z_channel, bsc(0.25)]:
        v = np.array([e0_iid(r, q, w) for r in rhos])
        assert np.all(np.diff(v) >= -1E-15)
        assert np.all(np.diff(v, 2) <= 1E-12)


def test_e0_cc():
    assert_allclose(e0_cc(0., q, ch), 0.)
    for rho in [0.3, 0.7, 1.]:
        assert_allclose(e0_cc(rho, q, ch), e0_iid(rho, q, ch), atol=1E-8)
    skew = uniform_distribution(2)
    assert e0_cc(1., skew, z_channel) >= e0_iid(1., skew, z_channel) - 1E-9
    assert_raises(RhoOutOfRangeError, e0_cc, 2., q, ch)
    # rho above 1 is allowed through the dispatcher
    assert e0(2., q, ch) > e0(1., q, ch)
    assert_allclose(e0(1., q, ch, "cc"), e0_cc(1., q, ch))


def test_e_rce():
    pt = e_rce(0., q, ch)
    assert_allclose(pt.value, r0, atol=1E-10)
    assert_allclose(pt.optimizer, 1.)
    assert_allclose(e_rce(capacity, q, ch).value, 0., atol=1E-8)
    pt = e_rce(0.05, q, ch)
    assert_allclose(pt.value, r0 - 0.05, atol=1E-8)
    assert_allclose(pt.optimizer, 1.)
    assert_allclose(e_rce(0.5, q, ch).value, 0.)
    assert_raises(RateOutOfRangeError, e_rce, -0.1, q, ch)


def test_e_rce_shape():
    rates = rate_grid(capacity, 50)
    v = np.array([e_rce(r, q, ch).value for r in rates])
    assert np.all(np.diff(v) <= 1E-12)
    assert np.all(np.diff(v, 2) >= -1E-9)


def test_critical_rate():
    r_crit = critical_rate(q, ch)
    assert 0 < r_crit < r0
    assert e_rce(r_crit - 1E-4, q, ch).optimizer >= 1. - 1E-3
    assert e_rce(r_crit + 1E-2, q, ch).optimizer < 1.
    assert_allclose(e_rce(r_crit, q, ch).value, r0 - r_crit, atol=1E-6)
    assert_allclose(critical_rate(q, ch, "cc"), r_crit, atol=1E-6)
    assert critical_rate(q, bsc(0.499)) < 1E-4


def test_ex_gallager():
    d = bhattacharyya_matrix(ch)
    assert_allclose(ex_gallager(1., q, ch), r0, rtol=1E-12)
    assert_allclose(ex_limit(q, ch), 0.5 * d.d[0, 1], rtol=1E-12)
    assert_allclose(ex_limit(q, ch), 0.2344, atol=1E-3)
    assert_allclose(ex_gallager(1E5, q, ch), ex_limit(q, ch), atol=1E-4)
    assert ex_gallager(10., q, ch) < ex_gallager(100., q, ch)
    assert_raises(RhoOutOfRangeError, ex_gallager, 0.5, q, ch)


def test_e_ex():
    pt = e_ex(0., q, ch)
    assert_allclose(pt.value, ex_limit(q, ch))
    assert np.isinf(pt.optimizer)
    # above the slope of Ex at rho = 1 the supremum sits at rho = 1
    pt = e_ex(0.15, q, ch)
    assert_allclose(pt.optimizer, 1.)
    assert_allclose(pt.value, ex_gallager(1., q, ch) - 0.15, atol=1E-12)
    pt = e_ex(0.01, q, ch)
    assert pt.optimizer > 1.
    assert pt.value >= e_rce(0.01, q, ch).value
    slope = kl_divergence(tilted_distribution(q, bhattacharyya_matrix(ch),
                                              1.)[0], q, q)
    assert_allclose(e_ex(slope + 1E-3, q, ch).optimizer, 1.)


def test_e_sp():
    r_crit = critical_rate(q, ch)
    for rate in np.linspace(r_crit, capacity, 6)[:-1]:
        assert_allclose(e_sp(rate, q, ch).value, e_rce(rate, q, ch).value,
                        atol=1E-6)
    assert_allclose(e_sp(capacity, q, ch).value, 0., atol=1E-8)
    assert_raises(DivergingError, e_sp, 0., q, ch)
    pt = e_sp(1E-6, q, ch)
    assert np.isfinite(pt.value)
    assert pt.value >= e_ex(0., q, ch).value


def test_e_trc():
    assert_allclose(e_trc(0., q, ch).value, ex_limit(q, ch))
    r_crit = critical_rate(q, ch)
    rates = rate_grid(capacity, 50)
    for rate in rates:
        trc = e_trc(rate, q, ch).value
        rce = e_rce(rate, q, ch).value
        assert trc >= rce
        assert trc <= expurgated_bound(rate, q, ch) + 1E-9
        if rate >= r_crit:
            assert_allclose(trc, rce, atol=1E-8)
    assert_raises(RateOutOfRangeError, e_trc, capacity, q, ch)


def test_e_trc_direct_interior():
    sol = e_trc_direct(0.02, q, ch)
    assert sol.branch == "InteriorP0"
    assert sol.lambda_star is None
    assert_allclose(sol.exponent, r0 - 0.02, atol=1E-12)
    assert_allclose(sol.exponent, e_rce(0.02, q, ch).value, atol=1E-8)
    assert_allclose(sol.exponent, e_trc(0.02, q, ch).value, atol=1E-4)
    assert kl_divergence(sol.p_opt, q, q) <= 0.04


def test_e_trc_direct_boundary():
    rate = 0.005
    sol = e_trc_direct(rate, q, ch)
    assert sol.branch == "BoundaryPStar"
    assert sol.lambda_star > 0
    assert_allclose(kl_divergence(sol.p_opt, q, q), 2. * rate, atol=1E-8)
    assert_allclose(sol.exponent, e_trc(rate, q, ch).value, atol=1E-4)
    assert sol.exponent > e_rce(rate, q, ch).value
    d = bhattacharyya_matrix(ch)
    oracle, p_grid = simplex_grid_minimize(trc_objective(q, d, rate),
                                           2. * rate, q, step=0.01)
    assert_allclose(sol.exponent, oracle, atol=2E-3)
    assert oracle >= sol.exponent - 1E-12


def test_e_trc_direct_agreement():
    r_crit = critical_rate(q, ch)
    for rate in r_crit * np.arange(1, 6) / 6.:
        sol = e_trc_direct(rate, q, ch)
        assert_allclose(sol.exponent, e_trc(rate, q, ch).value, atol=2E-3)


def test_e_trc_direct_errors():
    r_crit = critical_rate(q, ch)
    assert_raises(RateOutOfRangeError, e_trc_direct, 0., q, ch)
    assert_raises(RateOutOfRangeError, e_trc_direct, r_crit + 1E-3, q, ch)
    assert trc_branch(r_crit + 1E-3, q, ch) == "HighRateRce"
    assert trc_branch(0.005, q, ch) == "BoundaryPStar"


def test_exponent_table():
    rates = rate_grid(capacity, 8)
    rows = exponent_table(rates, q, ch, n_threads=2)
    assert len(rows) == 8
    assert np.isinf(rows[0]["e_sp"])
    assert rows[-1]["above_critical"] == 1
    assert rows[-1]["trc_branch"] == "HighRateRce"
    assert_allclose([r["e_rce"] for r in rows],
                    [e_rce(r, q, ch).value for r in rates])
    assert_raises(RateOutOfRangeError, exponent_table, [0.5], q, ch)
