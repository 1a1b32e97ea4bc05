import numpy as np
from numpy.testing import assert_allclose, assert_raises, assert_array_equal

from explab.channel import bsc, uniform_distribution, validate_distribution
from explab.channel import bhattacharyya_matrix, cutoff_rate
from explab.typecalc import JointDistribution, kl_divergence
from explab.typecalc import empirical_joint_type, joint_type_enumerate
from explab.typecalc import count_joint_types, log_type_class_size
from explab.typecalc import product_distribution, marginals
from explab.typecalc import tilted_distribution, simplex_grid_minimize
from explab.typecalc import kl_objective, trc_objective
from explab.core import SupportViolationError, LengthMismatchError
from explab.core import EnumerationTooLargeError, EmptyFeasibleSetError
from explab.core import NonStochasticRowError

ch = bsc(0.11)
q = uniform_distribution(2)
d = bhattacharyya_matrix(ch)


def test_joint_distribution():
    assert_raises(NonStochasticRowError, JointDistribution,
                  [[0.5, 0.5], [0.5, 0.]])
    assert_raises(LengthMismatchError, JointDistribution, [[1., 0.]])
    qq = product_distribution(q, validate_distribution([0.3, 0.7]))
    row, col = marginals(qq)
    assert_allclose(row, [0.5, 0.5])
    assert_allclose(col, [0.3, 0.7])


def test_kl_divergence():
    assert_allclose(kl_divergence(product_distribution(q, q), q, q), 0.,
                    atol=1E-15)
    point = JointDistribution([[1., 0.], [0., 0.]])
    assert_allclose(kl_divergence(point, q, q), np.log(4.), rtol=1E-12)
    skewed = validate_distribution([1., 0.])
    assert_raises(SupportViolationError, kl_divergence,
                  JointDistribution([[0.5, 0.], [0.5, 0.]]), skewed, q)
    random_state = np.random.RandomState(1999)
    for i in range(20):
        p = random_state.rand(2, 2)
        assert kl_divergence(JointDistribution(p / p.sum()), q, q) >= 0.


def test_empirical_joint_type():
    jt = empirical_joint_type([0, 0, 1, 1], [0, 1, 0, 1])
    assert_array_equal(jt.counts, [[1, 1], [1, 1]])
    assert jt.n == 4
    jt = empirical_joint_type([0, 1, 1, 0, 1], [0, 1, 1, 0, 1])
    assert_array_equal(jt.counts, [[2, 0], [0, 3]])
    assert_raises(LengthMismatchError, empirical_joint_type, [0, 1], [0])
    assert_raises(LengthMismatchError, empirical_joint_type, [], [])


def test_random_joint_type_concentrates():
    n = 10000
    rng = np.random.default_rng(1999)
    xi = rng.integers(0, 2, n)
    xj = rng.integers(0, 2, n)
    jt = empirical_joint_type(xi, xj, alphabet=2)
    off = (jt.counts[0, 1] + jt.counts[1, 0]) / float(n)
    assert abs(off - 0.5) < 5 * np.sqrt(0.25 / n)


def test_joint_type_enumerate():
    assert len(joint_type_enumerate(1, 2)) == 4
    types = joint_type_enumerate(2, 2)
    assert len(types) == 10
    assert len(set(tuple(t.counts.ravel()) for t in types)) == 10
    assert all(t.n == 2 for t in types)
    assert len(joint_type_enumerate(12, 2)) == 455
    for n, k in [(3, 2), (2, 3), (5, 2)]:
        assert len(joint_type_enumerate(n, k)) == count_joint_types(n, k)
    assert_raises(EnumerationTooLargeError, joint_type_enumerate, 1000, 3)


def test_log_type_class_size():
    jt = empirical_joint_type([0, 0, 1, 1], [0, 1, 0, 1])
    assert_allclose(log_type_class_size(jt), np.log(24.), rtol=1E-12)
    jt = empirical_joint_type([0, 0, 0], [0, 0, 0])
    assert_allclose(log_type_class_size(jt), 0., atol=1E-12)


def test_tilted_distribution():
    p0, log_z = tilted_distribution(q, d, 1.)
    assert_allclose(p0.p.sum(), 1.)
    # -ln Z of the s = 1 tilt is the cutoff rate
    assert_allclose(-log_z, cutoff_rate(ch, q), rtol=1E-12)
    flat, log_z = tilted_distribution(q, d, 0.)
    assert_allclose(flat.p, 0.25)


def test_grid_minimize_kl():
    value, argmin = simplex_grid_minimize(kl_objective(q), 0.1, q, step=0.01)
    assert_allclose(value, 0., atol=1E-15)
    assert_allclose(argmin.p, 0.25)


def test_grid_minimize_cutoff_rate():
    value, argmin = simplex_grid_minimize(trc_objective(q, d, 0.), np.inf, q,
                                          step=0.01)
    assert_allclose(value, cutoff_rate(ch, q), atol=1E-3)
    assert value >= cutoff_rate(ch, q) - 1E-12


def test_grid_minimize_errors():
    third = validate_distribution([1. / 3., 2. / 3.])
    assert_raises(EmptyFeasibleSetError, simplex_grid_minimize,
                  kl_objective(third), 0., third, 0.01)
    assert_raises(ValueError, simplex_grid_minimize, kl_objective(q), 1., q,
                  0.5)
    three = uniform_distribution(3)
    assert_raises(ValueError, simplex_grid_minimize, kl_objective(three), 1.,
                  three, 0.01)
