# License: BSD 3-clause
import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.stats import kstest

from ..core import get_logger
from ..core import QuadratureFailureError, TooFewSamplesError

logger = get_logger()

QUAD_LIMITS = (-12., 12.)
QUAD_TOL = 1E-9
KINDS = ("StandardGaussian", "MinOfGaussians", "NormalizedMinOfGaussians")
LATTICE_TOL = 1E-6


def gauss_q(t):
    """
    Gaussian tail function Q(t) = P[N(0, 1) >= t]

    erfc keeps the far right tail accurate, Q(40) is about 3.7e-350 and
    underflows to 0.
    """
    return 0.5 * special.erfc(np.asarray(t, dtype="float64") / np.sqrt(2.))


def _log_gauss_q(t):
    return special.log_ndtr(-np.asarray(t, dtype="float64"))


def _log_gauss_pdf(t):
    t = np.asarray(t, dtype="float64")
    return -0.5 * t ** 2 - 0.5 * np.log(2. * np.pi)


def _check_count(L):
    if int(L) != L or L < 1:
        raise ValueError("L must be a positive integer, got %r" % (L,))
    return int(L)


def min_gauss_cdf(L, t):
    """
    CDF of the minimum of L independent standard normals, 1 - Q(t)^L
    """
    L = _check_count(L)
    # -expm1(L ln Q) keeps accuracy where Q(t)^L is close to 1
    return -np.expm1(L * _log_gauss_q(t))


def min_gauss_pdf(L, t):
    """ Density L phi(t) Q(t)^(L-1), evaluated in the log domain """
    L = _check_count(L)
    return np.exp(np.log(L) + _log_gauss_pdf(t) + (L - 1) * _log_gauss_q(t))


def _quad_checked(func, what):
    lo, hi = QUAD_LIMITS
    value, err = quad(func, lo, hi, epsabs=1E-12, epsrel=1E-12, limit=200)
    if err > QUAD_TOL:
        raise QuadratureFailureError("Quadrature for %s reports error %g "
                                     "above %g" % (what, err, QUAD_TOL))
    return value


def min_gauss_moments(L):
    """
    Mean and variance of the minimum of L independent standard normals

    Adaptive quadrature of the density on [-12, 12].

    Parameters
    ----------
    L : int
        Number of normals, >= 1

    Returns
    -------
    mean : float

    variance : float

    """
    L = _check_count(L)
    mean = _quad_checked(lambda t: t * min_gauss_pdf(L, t), "mean, L=%i" % L)
    second = _quad_checked(lambda t: (t - mean) ** 2 * min_gauss_pdf(L, t),
                           "variance, L=%i" % L)
    logger.debug("min of %i normals: mean %.12f, variance %.12f"
                 % (L, mean, second))
    return mean, second


class ReferenceDistribution(object):
    """
    Limit law to compare normalized simulation samples against

    Parameters
    ----------
    kind : str
        One of "StandardGaussian", "MinOfGaussians",
        "NormalizedMinOfGaussians"

    L : int, default 1
        Number of normals in the minimum, ignored for StandardGaussian

    Moments of the Min kinds are computed once at construction.
    """
    def __init__(self, kind, L=1):
        if kind not in KINDS:
            raise ValueError("Unknown reference kind %s, expected one of %s"
                             % (kind, KINDS))
        self.kind = kind
        if kind == "StandardGaussian":
            self.L = 1
            self.min_mean_ = 0.
            self.min_variance_ = 1.
        else:
            self.L = _check_count(L)
            self.min_mean_, self.min_variance_ = min_gauss_moments(self.L)
        if not self.min_variance_ > 0:
            raise QuadratureFailureError("Nonpositive variance %g for L=%i"
                                         % (self.min_variance_, self.L))
        self.min_std_ = np.sqrt(self.min_variance_)

    def __repr__(self):
        if self.kind == "StandardGaussian":
            return "ReferenceDistribution(StandardGaussian)"
        return "ReferenceDistribution(%s, L=%i)" % (self.kind, self.L)

    def _standardize(self, t):
        t = np.asarray(t, dtype="float64")
        if self.kind == "NormalizedMinOfGaussians":
            return self.min_mean_ + self.min_std_ * t
        return t

    def cdf(self, t):
        return min_gauss_cdf(self.L, self._standardize(t))

    def pdf(self, t):
        scale = 1.
        if self.kind == "NormalizedMinOfGaussians":
            scale = self.min_std_
        return scale * min_gauss_pdf(self.L, self._standardize(t))

    @property
    def mean(self):
        if self.kind == "NormalizedMinOfGaussians":
            return 0.
        return self.min_mean_

    @property
    def variance(self):
        if self.kind == "NormalizedMinOfGaussians":
            return 1.
        return self.min_variance_


def normalize_samples(samples):
    """ (samples - mean) / std, std with ddof=0 """
    samples = np.asarray(samples, dtype="float64")
    std = samples.std()
    if not std > 0:
        raise TooFewSamplesError("Samples have zero spread, cannot normalize")
    return (samples - samples.mean()) / std


def lattice_step(samples):
    """
    Spacing h when all samples lie on one grid a + k h, else None

    Gaps between distinct values must be integer multiples of the smallest
    gap within LATTICE_TOL.
    """
    values = np.unique(np.asarray(samples, dtype="float64"))
    if len(values) < 2:
        return None
    gaps = np.diff(values)
    h = gaps.min()
    ratio = gaps / h
    if np.max(np.abs(ratio - np.round(ratio))) > LATTICE_TOL:
        return None
    return float(h)


def kolmogorov_distance(samples, ref, lattice=None):
    """
    Kolmogorov distance between the empirical CDF and a reference law

    Both one-sided gaps at every jump of the right-continuous empirical CDF
    are checked.

    Parameters
    ----------
    samples : array-like, >= 2 values
        Sorted or not

    ref : ReferenceDistribution

    lattice : float or None, default None
        Grid spacing of lattice-valued samples. The reference is then
        rounded to the grid first: the empirical CDF at an atom a is
        compared with the reference CDF at a + lattice / 2, and its left
        limit with the reference CDF at a - lattice / 2.

    Returns
    -------
    distance : float in [0, 1]

    """
    samples = np.asarray(samples, dtype="float64").ravel()
    if len(samples) < 2:
        raise TooFewSamplesError("Kolmogorov distance needs >= 2 samples, "
                                 "got %i" % len(samples))
    if lattice is None:
        res = kstest(samples, ref.cdf, method="asymp")
        return float(res.statistic)
    if not lattice > 0:
        raise ValueError("lattice must be positive, got %r" % (lattice,))
    atoms, counts = np.unique(samples, return_counts=True)
    upper = np.cumsum(counts) / float(len(samples))
    lower = upper - counts / float(len(samples))
    half = 0.5 * lattice
    return float(max(np.max(np.abs(upper - ref.cdf(atoms + half))),
                     np.max(np.abs(lower - ref.cdf(atoms - half)))))


def reference_curve(ref, grid, loc=0., scale=1.):
    """
    Reference law moved to a location and scale, sampled on grid

    Returns an array of rows (x, pdf, cdf) where x = loc + scale * t
    for t on the standardized axis.
    """
    grid = np.asarray(grid, dtype="float64")
    if not scale > 0:
        raise ValueError("scale must be positive, got %r" % (scale,))
    t = (grid - loc) / scale
    return np.column_stack([grid, ref.pdf(t) / scale, ref.cdf(t)])
