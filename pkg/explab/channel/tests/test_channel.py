import os
import shutil
import tempfile
import numpy as np
from numpy.testing import assert_allclose, assert_raises

from explab.channel import validate_channel, bsc, bhattacharyya_matrix
from explab.channel import mutual_information, cutoff_rate, binary_entropy
from explab.channel import uniform_distribution, validate_distribution
from explab.channel import load_channel_file, load_distribution_file
from explab.channel import channel_from_dict
from explab.core import NonStochasticRowError, NegativeEntryError
from explab.core import AlphabetTooSmallError, DegenerateChannelError
from explab.core import InfiniteDistanceError
from explab.utils import write_json

p = 0.11
ch = bsc(p)
q = uniform_distribution(2)


def test_validate_channel():
    w = validate_channel([[0.9, 0.1], [0.2, 0.8]])
    assert w.input_size == 2
    assert w.output_size == 2
    assert not w.is_bsc
    assert_raises(NonStochasticRowError, validate_channel,
                  [[0.5, 0.4], [0.1, 0.9]])
    assert_raises(NegativeEntryError, validate_channel,
                  [[1.2, -0.2], [0., 1.]])
    assert_raises(AlphabetTooSmallError, validate_channel, [[0.5, 0.5]])
    assert_raises(AlphabetTooSmallError, validate_channel, [[1.], [1.]])
    # rows are never renormalized
    assert_raises(NonStochasticRowError, validate_channel,
                  [[0.5, 0.5 + 1E-6], [0.5, 0.5]])


def test_bsc():
    assert ch.is_bsc
    assert_allclose(ch.crossover, p)
    assert_raises(DegenerateChannelError, bsc, 0.5)
    assert_raises(DegenerateChannelError, bsc, 0.)
    assert_raises(DegenerateChannelError, bsc, 0.7)


def test_bhattacharyya_matrix():
    d = bhattacharyya_matrix(ch)
    expected = -np.log(2. * np.sqrt(p * (1. - p)))
    assert_allclose(d.d[0, 1], expected, rtol=1E-12)
    assert_allclose(d.d, d.d.T)
    assert_allclose(np.diag(d.d), 0.)
    assert_allclose(d.d_max, expected, rtol=1E-12)
    assert_raises(InfiniteDistanceError, bhattacharyya_matrix,
                  validate_channel([[1., 0.], [0., 1.]]))
    assert_raises(DegenerateChannelError, bhattacharyya_matrix,
                  validate_channel([[0.5, 0.5], [0.5, 0.5]]))


def test_information_quantities():
    assert_allclose(mutual_information(ch, q), np.log(2.) - binary_entropy(p),
                    rtol=1E-12)
    assert_allclose(mutual_information(ch, q), 0.34663, atol=1E-4)
    r0 = cutoff_rate(ch, q)
    assert_allclose(r0, -np.log(0.5 * (1. + 2. * np.sqrt(p * (1. - p)))),
                    rtol=1E-12)
    assert 0 < r0 < mutual_information(ch, q)
    assert_allclose(binary_entropy(0.), 0.)
    assert_allclose(binary_entropy(0.5), np.log(2.))
    # a deterministic input carries no information
    assert_allclose(mutual_information(ch, validate_distribution([1., 0.])),
                    0., atol=1E-15)


def test_cutoff_rate_below_mutual_information():
    rng = np.random.default_rng(1999)
    for trial in range(200):
        k_x = rng.integers(2, 5)
        k_y = rng.integers(2, 5)
        alpha = rng.choice([0.3, 1., 5.])
        w = validate_channel(rng.dirichlet(alpha * np.ones(k_y), size=k_x))
        qr = validate_distribution(rng.dirichlet(np.ones(k_x)))
        r0 = cutoff_rate(w, qr)
        assert r0 >= -1E-12
        assert r0 <= mutual_information(w, qr) + 1E-12
    # both vanish when the rows agree
    flat = validate_channel([[0.2, 0.8], [0.2, 0.8]])
    assert_allclose(cutoff_rate(flat, q), 0., atol=1E-15)
    assert_allclose(mutual_information(flat, q), 0., atol=1E-15)


def test_validate_distribution():
    assert_raises(NegativeEntryError, validate_distribution, [1.1, -0.1])
    assert_raises(NonStochasticRowError, validate_distribution, [0.5, 0.6])
    assert_raises(AlphabetTooSmallError, validate_distribution,
                  [0.5, 0.5], 3)
    assert len(validate_distribution([0.2, 0.3, 0.5])) == 3


def test_channel_files():
    tmp = tempfile.mkdtemp()
    try:
        path = write_json(os.path.join(tmp, "ch.json"),
                          {"W": [[0.9, 0.1], [0.3, 0.7]], "Q": [0.4, 0.6]})
        w, qq = load_channel_file(path)
        assert_allclose(w.w, [[0.9, 0.1], [0.3, 0.7]])
        assert_allclose(qq.q, [0.4, 0.6])
        path = write_json(os.path.join(tmp, "q.json"), {"Q": [0.25, 0.75]})
        assert_allclose(load_distribution_file(path, size=2).q, [0.25, 0.75])
        w2, q2 = channel_from_dict(w.to_dict())
        assert q2 is None
        assert_allclose(w2.w, w.w)
        assert_raises(NonStochasticRowError, channel_from_dict, {"Q": [1.]})
    finally:
        shutil.rmtree(tmp)
