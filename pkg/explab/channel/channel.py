# License: BSD 3-clause
import numbers
import numpy as np
from scipy.special import entr, rel_entr

from ..core import get_logger
from ..core import NonStochasticRowError, NegativeEntryError
from ..core import AlphabetTooSmallError, DegenerateChannelError
from ..core import InfiniteDistanceError
from ..utils import read_json

logger = get_logger()

# accepted deviation of a row (or distribution) sum from 1 on input
ROW_SUM_TOL = 1E-9


def _freeze(arr):
    arr = np.array(arr, dtype="float64")
    arr.flags.writeable = False
    return arr


class Channel(object):
    """
    Discrete memoryless channel W(y|x), rows indexed by input symbol

    Build through validate_channel or bsc, which check the matrix. The
    transition matrix is read-only.
    """
    def __init__(self, w):
        self.w = _freeze(w)
        self.input_size, self.output_size = self.w.shape

    @property
    def is_bsc(self):
        w = self.w
        return (w.shape == (2, 2) and w[0, 1] == w[1, 0]
                and w[0, 0] == w[1, 1] and 0. < w[0, 1] < 0.5)

    @property
    def crossover(self):
        if not self.is_bsc:
            raise AttributeError("crossover is only defined for a BSC")
        return float(self.w[0, 1])

    def __repr__(self):
        return "Channel(input_size=%i, output_size=%i)" % (
            self.input_size, self.output_size)

    def to_dict(self):
        return {"W": self.w.tolist()}


class InputDistribution(object):
    """ Probability vector over the channel input alphabet """
    def __init__(self, q):
        self.q = _freeze(q)
        self.size = len(self.q)

    def __len__(self):
        return self.size

    def __repr__(self):
        return "InputDistribution(%s)" % np.array2string(self.q)

    def to_dict(self):
        return {"Q": self.q.tolist()}


class BhattacharyyaMatrix(object):
    """
    Symmetric matrix of Bhattacharyya distances d_B(x, x') in nats

    Attributes
    ----------
    d : array, shape (|X|, |X|)
        Zero diagonal, finite nonnegative entries

    d_max : float
        Largest entry, strictly positive

    """
    def __init__(self, d):
        self.d = _freeze(d)
        self.size = self.d.shape[0]
        self.d_max = float(self.d.max())

    def __repr__(self):
        return "BhattacharyyaMatrix(d_max=%f)" % self.d_max


def validate_channel(w):
    """
    Check a raw transition matrix and wrap it as a Channel

    Rows are never renormalized; a matrix whose rows do not sum to 1 within
    ROW_SUM_TOL is rejected.

    Parameters
    ----------
    w : array-like, shape (|X|, |Y|)
        W(y|x), one row per input symbol

    Returns
    -------
    channel : Channel

    """
    try:
        w = np.array(w, dtype="float64")
    except ValueError:
        raise NonStochasticRowError("Channel matrix must be rectangular")
    if w.ndim != 2:
        raise NonStochasticRowError("Channel matrix must be 2D, got %i "
                                    "dimensions" % w.ndim)
    if w.shape[0] < 2:
        raise AlphabetTooSmallError("Input alphabet has size %i, need >= 2"
                                    % w.shape[0])
    if w.shape[1] < 2:
        raise AlphabetTooSmallError("Output alphabet has size %i, need >= 2"
                                    % w.shape[1])
    if not np.all(np.isfinite(w)):
        raise NonStochasticRowError("Channel matrix has non-finite entries")
    if np.any(w < 0):
        x, y = np.argwhere(w < 0)[0]
        raise NegativeEntryError("W(%i|%i) = %g is negative" % (y, x, w[x, y]))
    row_sums = w.sum(axis=1)
    bad = np.abs(row_sums - 1.) > ROW_SUM_TOL
    if np.any(bad):
        x = int(np.argmax(bad))
        raise NonStochasticRowError("Row %i sums to %.12g" % (x, row_sums[x]))
    return Channel(w)


def bsc(p):
    """
    Binary symmetric channel with crossover probability p, 0 < p < 0.5
    """
    if not isinstance(p, numbers.Real) or not (0. < p < 0.5):
        raise DegenerateChannelError("BSC crossover must satisfy "
                                     "0 < p < 0.5, got %r" % (p,))
    p = float(p)
    return Channel([[1. - p, p], [p, 1. - p]])


def validate_distribution(q, size=None):
    """ Check a probability vector and wrap it as an InputDistribution """
    q = np.array(q, dtype="float64").ravel()
    if len(q) < 2:
        raise AlphabetTooSmallError("Input distribution has %i entries, "
                                    "need >= 2" % len(q))
    if size is not None and len(q) != size:
        raise AlphabetTooSmallError("Input distribution has %i entries but "
                                    "the channel has %i inputs"
                                    % (len(q), size))
    if not np.all(np.isfinite(q)):
        raise NonStochasticRowError("Input distribution has non-finite "
                                    "entries")
    if np.any(q < 0):
        raise NegativeEntryError("Q(%i) = %g is negative"
                                 % (int(np.argmin(q)), q.min()))
    if abs(q.sum() - 1.) > ROW_SUM_TOL:
        raise NonStochasticRowError("Input distribution sums to %.12g"
                                    % q.sum())
    return InputDistribution(q)


def uniform_distribution(size):
    return InputDistribution(np.ones(size) / float(size))


def bhattacharyya_matrix(ch):
    """
    Pairwise Bhattacharyya distances between input symbols

    d(x, x') = -ln sum_y sqrt(W(y|x) W(y|x')), in nats.

    Parameters
    ----------
    ch : Channel

    Returns
    -------
    bm : BhattacharyyaMatrix

    """
    sw = np.sqrt(ch.w)
    overlap = np.dot(sw, sw.T)
    zero = overlap <= 0.
    np.fill_diagonal(zero, False)
    if np.any(zero):
        x, x2 = np.argwhere(zero)[0]
        raise InfiniteDistanceError("Inputs %i and %i have disjoint output "
                                    "supports, d_B is infinite" % (x, x2))
    with np.errstate(divide="ignore"):
        d = -np.log(overlap)
    d = np.maximum(0.5 * (d + d.T), 0.)
    np.fill_diagonal(d, 0.)
    if d.max() <= 0.:
        raise DegenerateChannelError("All input symbols induce the same "
                                     "output distribution")
    return BhattacharyyaMatrix(d)


def mutual_information(ch, q):
    """
    I(Q, W) in nats; terms with W(y|x) = 0 or Q(x) = 0 contribute 0
    """
    qv = q.q
    py = np.dot(qv, ch.w)
    used = qv > 0
    terms = rel_entr(ch.w[used], py[None, :]).sum(axis=1)
    return float(np.dot(qv[used], terms))


def cutoff_rate(ch, q):
    """
    R0(Q) = -ln sum_y (sum_x Q(x) sqrt(W(y|x)))^2
    """
    inner = np.dot(q.q, np.sqrt(ch.w))
    return float(-np.log(np.sum(inner ** 2)))


def binary_entropy(p):
    """ H_b(p) in nats """
    return float(entr(p) + entr(1. - p))


def channel_from_dict(d):
    """
    Build (Channel, InputDistribution or None) from a parsed document

    The document holds "W" as an array of rows and optionally "Q".
    """
    if "W" not in d:
        raise NonStochasticRowError("Channel document has no 'W' key")
    ch = validate_channel(d["W"])
    q = None
    if d.get("Q") is not None:
        q = validate_distribution(d["Q"], size=ch.input_size)
    return ch, q


def load_channel_file(path):
    logger.info("Loading channel from %s" % path)
    return channel_from_dict(read_json(path))


def load_distribution_file(path, size=None):
    d = read_json(path)
    if isinstance(d, dict):
        if "Q" not in d:
            raise NonStochasticRowError("Distribution document %s has no "
                                        "'Q' key" % path)
        d = d["Q"]
    return validate_distribution(d, size=size)
