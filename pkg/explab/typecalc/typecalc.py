# License: BSD 3-clause
import numpy as np
from scipy.special import comb, gammaln, rel_entr

from ..core import get_logger
from ..core import SupportViolationError, LengthMismatchError
from ..core import EnumerationTooLargeError, EmptyFeasibleSetError
from ..core import NonStochasticRowError, NegativeEntryError

logger = get_logger()

MAX_ENUMERATION = 10 ** 7
PROB_TOL = 1E-12


class JointDistribution(object):
    """
    Probability matrix P(x, x') over pairs of input symbols

    Parameters
    ----------
    p : array-like, shape (|X|, |X|)
        Nonnegative entries summing to 1

    check : bool, default True
        Validate entries and total mass

    """
    def __init__(self, p, check=True):
        p = np.array(p, dtype="float64")
        if check:
            if p.ndim != 2 or p.shape[0] != p.shape[1]:
                raise LengthMismatchError("Joint distribution must be square, "
                                          "got shape %s" % (p.shape,))
            if np.any(p < 0):
                raise NegativeEntryError("Joint distribution has negative "
                                         "entries")
            if abs(p.sum() - 1.) > PROB_TOL:
                raise NonStochasticRowError("Joint distribution sums to %.15g"
                                            % p.sum())
        p.flags.writeable = False
        self.p = p
        self.size = p.shape[0]

    def marginals(self):
        return marginals(self)

    def __repr__(self):
        return "JointDistribution(%s)" % np.array2string(self.p, precision=6)


class JointType(object):
    """ Integer pair counts along two length-n sequences """
    def __init__(self, counts):
        counts = np.array(counts, dtype="int64")
        counts.flags.writeable = False
        self.counts = counts
        self.n = int(counts.sum())
        self.size = counts.shape[0]

    def distribution(self):
        return JointDistribution(self.counts / float(self.n), check=False)

    def __repr__(self):
        return "JointType(n=%i, counts=%s)" % (self.n, self.counts.tolist())


def product_distribution(qx, qx2):
    return JointDistribution(np.outer(qx.q, qx2.q), check=False)


def marginals(p):
    return p.p.sum(axis=1), p.p.sum(axis=0)


def kl_divergence(p, qx, qx2):
    """
    D(P || Qx Qx2) in nats with 0 ln 0 = 0

    Parameters
    ----------
    p : JointDistribution

    qx : InputDistribution
        Row marginal of the reference product

    qx2 : InputDistribution
        Column marginal of the reference product

    Returns
    -------
    divergence : float

    """
    ref = np.outer(qx.q, qx2.q)
    if p.p.shape != ref.shape:
        raise LengthMismatchError("Joint distribution shape %s does not match "
                                  "reference %s" % (p.p.shape, ref.shape))
    outside = (p.p > 0) & (ref <= 0)
    if np.any(outside):
        x, x2 = np.argwhere(outside)[0]
        raise SupportViolationError("P puts mass %g on (%i, %i) where Q x Q "
                                    "has none" % (p.p[x, x2], x, x2))
    return float(rel_entr(p.p, ref).sum())


def empirical_joint_type(xi, xj, alphabet=None):
    """
    Joint type of two equal-length symbol sequences

    Parameters
    ----------
    xi, xj : array-like of int, shape (n,)

    alphabet : int or None
        Alphabet size; inferred from the largest symbol when None

    Returns
    -------
    joint_type : JointType

    """
    xi = np.asarray(xi, dtype="int64").ravel()
    xj = np.asarray(xj, dtype="int64").ravel()
    if len(xi) != len(xj):
        raise LengthMismatchError("Sequences have lengths %i and %i"
                                  % (len(xi), len(xj)))
    if len(xi) < 1:
        raise LengthMismatchError("Sequences must have length >= 1")
    if alphabet is None:
        alphabet = int(max(xi.max(), xj.max())) + 1
    counts = np.bincount(xi * alphabet + xj, minlength=alphabet * alphabet)
    return JointType(counts.reshape(alphabet, alphabet))


def count_joint_types(n, alphabet):
    """ Number of joint types of length n over an alphabet x alphabet grid """
    cells = alphabet * alphabet
    return int(comb(n + cells - 1, cells - 1, exact=True))


def _simplex_lattice(total, parts):
    """
    All nonnegative integer vectors of length parts summing to total

    Rows come out in lexicographic order.
    """
    if parts == 1:
        return np.array([[total]], dtype="int64")
    blocks = []
    for first in range(total + 1):
        rest = _simplex_lattice(total - first, parts - 1)
        head = np.full((rest.shape[0], 1), first, dtype="int64")
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def joint_type_enumerate(n, alphabet, max_count=MAX_ENUMERATION):
    """
    Every joint type of blocklength n on an alphabet x alphabet grid

    Parameters
    ----------
    n : int
        Blocklength

    alphabet : int
        Input alphabet size

    max_count : int, default MAX_ENUMERATION
        Guard on the number of types

    Returns
    -------
    joint_types : list of JointType
        In lexicographic order of the flattened counts

    """
    if n < 1 or alphabet < 1:
        raise ValueError("Need n >= 1 and alphabet >= 1, got %i, %i"
                         % (n, alphabet))
    count = count_joint_types(n, alphabet)
    if count > max_count:
        raise EnumerationTooLargeError("%i joint types for n=%i, |X|=%i "
                                       "exceeds %i"
                                       % (count, n, alphabet, max_count))
    lattice = _simplex_lattice(n, alphabet * alphabet)
    return [JointType(c.reshape(alphabet, alphabet)) for c in lattice]


def log_type_class_size(joint_type):
    """ ln of the number of sequence pairs with this joint type """
    c = joint_type.counts.ravel()
    return float(gammaln(joint_type.n + 1) - np.sum(gammaln(c + 1)))


def tilted_distribution(q, d, s):
    """
    Q(x)Q(x') exp(-s d(x, x')) / Z

    s = 1 gives P0, s = 1 / (1 + lambda) gives P* of the typical exponent.

    Returns
    -------
    p : JointDistribution

    log_z : float
        ln Z

    """
    qq = np.outer(q.q, q.q)
    w = qq * np.exp(-s * d.d)
    z = w.sum()
    return JointDistribution(w / z, check=False), float(np.log(z))


def _stacked_kl(ps, ref):
    """ D(P || ref) for a stack of joint distributions, shape (K, k, k) """
    return rel_entr(ps, ref[None]).reshape(len(ps), -1).sum(axis=1)


def kl_objective(q):
    """ Vectorized P -> D(P || Q x Q) """
    ref = np.outer(q.q, q.q)

    def objective(ps):
        return _stacked_kl(ps, ref)
    return objective


def trc_objective(q, d, rate):
    """ Vectorized P -> D(P || Q x Q) + sum d P - rate """
    ref = np.outer(q.q, q.q)

    def objective(ps):
        return (_stacked_kl(ps, ref)
                + np.einsum("kab,ab->k", ps, d.d) - rate)
    return objective


def _grid_values(objective, ref, points, radius):
    ps = points.reshape(-1, 2, 2)
    values = objective(ps)
    if np.isfinite(radius):
        feasible = _stacked_kl(ps, ref) <= radius
        values = np.where(feasible, values, np.inf)
    return values


def simplex_grid_minimize(objective, constraint_radius, q, step=0.005):
    """
    Brute force minimum over a grid of the binary joint simplex

    Minimizes objective over grid points P with D(P || Q x Q) <= radius, then
    refines once on a grid of spacing step / 10 around the incumbent. Ties go
    to the lexicographically smallest grid point.

    Parameters
    ----------
    objective : callable
        Maps an array of joint distributions, shape (K, 2, 2), to values of
        shape (K,)

    constraint_radius : float
        2R in nats, np.inf for no constraint

    q : InputDistribution
        Binary input distribution

    step : float, default 0.005
        Grid spacing in [1e-3, 1e-1]; 1 / step should be an integer

    Returns
    -------
    value : float

    argmin : JointDistribution

    """
    if q.size != 2:
        raise ValueError("Grid oracle only handles binary alphabets, got %i"
                         % q.size)
    if not (1E-3 <= step <= 1E-1):
        raise ValueError("step must lie in [1e-3, 1e-1], got %g" % step)
    ref = np.outer(q.q, q.q)
    total = int(round(1. / step))

    best_value = np.inf
    best_point = None
    # chunk over the first cell so the largest grids stay in memory
    for first in range(total + 1):
        rest = _simplex_lattice(total - first, 3)
        head = np.full((rest.shape[0], 1), first, dtype="int64")
        points = np.hstack([head, rest]) / float(total)
        values = _grid_values(objective, ref, points, constraint_radius)
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value = float(values[i])
            best_point = points[i]
    if best_point is None:
        raise EmptyFeasibleSetError("No grid point of spacing %g satisfies "
                                    "D(P||QxQ) <= %g" % (step, constraint_radius))
    logger.debug("Coarse grid minimum %.10f at %s" % (best_value, best_point))

    # refine on step / 10 around the incumbent, staying on the simplex
    fine = step / 10.
    offsets = np.arange(-10, 11) * fine
    o0, o1, o2 = np.meshgrid(offsets, offsets, offsets, indexing="ij")
    head = best_point[:3][None, :] + np.stack(
        [o0.ravel(), o1.ravel(), o2.ravel()], axis=1)
    last = 1. - head.sum(axis=1, keepdims=True)
    points = np.hstack([head, last])
    # snap to the fine lattice so the incumbent itself is reproduced exactly
    points = np.round(points / fine) * fine
    points[:, 3] = 1. - points[:, :3].sum(axis=1)
    inside = np.all(points >= -1E-15, axis=1)
    points = np.clip(points[inside], 0., 1.)
    values = _grid_values(objective, ref, points, constraint_radius)
    i = int(np.argmin(values))
    if values[i] < best_value:
        best_value = float(values[i])
        best_point = points[i]
    return best_value, JointDistribution(best_point.reshape(2, 2), check=False)
