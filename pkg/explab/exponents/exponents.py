# License: BSD 3-clause
from collections import namedtuple, OrderedDict
import numpy as np
from scipy.optimize import minimize, minimize_scalar, brentq
from scipy.special import logsumexp

from ..core import get_logger, threaded_map
from ..core import RhoOutOfRangeError, RateOutOfRangeError
from ..core import NonConvergenceError, BracketExhaustedError
from ..core import DivergingError, BisectionFailureError
from ..channel import bhattacharyya_matrix, mutual_information
from ..typecalc import tilted_distribution, kl_divergence

logger = get_logger()

RHO_TOL = 1E-10
CRITICAL_RATE_STEP = 1E-6
E0_CC_MAXITER = 10000
E0_CC_GTOL = 1E-10
EX_RHO_MAX = 1E6
SP_RHO_MAX = 1E4
PLATEAU_TOL = 1E-10
LAMBDA_BRACKET = (1E-9, 1E3)
LAMBDA_MAX = 1E9
LAMBDA_RESIDUAL_TOL = 1E-10

ENSEMBLES = ("iid", "cc")
BRANCHES = ("InteriorP0", "BoundaryPStar", "HighRateRce")

ExponentPoint = namedtuple("ExponentPoint", ["rate", "value", "optimizer"])
TrcSolution = namedtuple("TrcSolution",
                         ["exponent", "branch", "lambda_star", "p_opt"])


def check_ensemble(ensemble):
    if ensemble == "constant_composition":
        ensemble = "cc"
    if ensemble not in ENSEMBLES:
        raise ValueError("Unknown ensemble %s, expected one of %s"
                         % (ensemble, ENSEMBLES))
    return ensemble


def _check_rate(rate):
    if not np.isfinite(rate) or rate < 0:
        raise RateOutOfRangeError("Rate must be finite and >= 0, got %r"
                                  % (rate,))


def _log_w(ch):
    with np.errstate(divide="ignore"):
        return np.log(ch.w)


def _e0_iid(rho, q, ch):
    if rho == 0:
        return 0.
    lw = _log_w(ch)
    inner = logsumexp(lw / (1. + rho), b=q.q[:, None], axis=0)
    return float(-logsumexp((1. + rho) * inner))


def e0_iid(rho, q, ch):
    """
    Gallager function of the i.i.d. ensemble

    E0(rho, Q) = -ln sum_y (sum_x Q(x) W(y|x)^(1/(1+rho)))^(1+rho)

    Parameters
    ----------
    rho : float in [0, 1]

    q : InputDistribution

    ch : Channel

    Returns
    -------
    e0 : float
        nats

    """
    if not (0. <= rho <= 1.):
        raise RhoOutOfRangeError("rho must lie in [0, 1], got %r" % (rho,))
    return _e0_iid(rho, q, ch)


def _e0_cc_objective(rho, a, q, ch, lw=None):
    """ ln sum_y (sum_x Q W^(1/(1+rho)) e^(a - phi_a))^(1+rho), and gradient """
    if lw is None:
        lw = _log_w(ch)
    s = 1. + rho
    a = a - np.dot(q.q, a)
    logits = lw / s + a[:, None]
    inner = logsumexp(logits, b=q.q[:, None], axis=0)
    outer = s * inner
    value = logsumexp(outer)
    # posterior over x given y, and the outer softmax over y
    with np.errstate(invalid="ignore"):
        post = q.q[:, None] * np.exp(logits - inner[None, :])
    post = np.where(np.isfinite(post), post, 0.)
    pi = np.exp(outer - value)
    grad = s * (np.dot(post, pi) - q.q)
    return float(value), grad


def _e0_cc_solve(rho, q, ch):
    lw = _log_w(ch)
    res = minimize(lambda a: _e0_cc_objective(rho, a, q, ch, lw),
                   np.zeros(q.size), jac=True, method="BFGS",
                   options={"maxiter": E0_CC_MAXITER, "gtol": E0_CC_GTOL})
    if res.status == 1 or not np.isfinite(res.fun):
        raise NonConvergenceError("Constant-composition E0 ascent at rho=%g "
                                  "did not converge: %s" % (rho, res.message))
    a_opt = res.x - np.dot(q.q, res.x)
    value = -float(res.fun)
    baseline = _e0_iid(rho, q, ch)
    if value < baseline:
        # a = 0 is the i.i.d. point, never worse
        return baseline, np.zeros(q.size)
    logger.debug("cc E0 at rho=%g: %.12f after %i iterations"
                 % (rho, value, res.nit))
    return value, a_opt


def e0_cc(rho, q, ch):
    """
    Gallager function of the constant-composition ensemble

    The supremum over the auxiliary function a(x) is taken with BFGS on the
    convex objective, with the gauge fixed by sum_x Q(x) a(x) = 0. The result
    is never below e0_iid.
    """
    if not (0. <= rho <= 1.):
        raise RhoOutOfRangeError("rho must lie in [0, 1], got %r" % (rho,))
    if rho == 0:
        return 0.
    value, a_opt = _e0_cc_solve(rho, q, ch)
    return value


def e0(rho, q, ch, ensemble="iid"):
    """ E0 of either ensemble; rho may exceed 1 here """
    ensemble = check_ensemble(ensemble)
    if rho < 0:
        raise RhoOutOfRangeError("rho must be >= 0, got %r" % (rho,))
    if ensemble == "iid":
        return _e0_iid(rho, q, ch)
    if rho == 0:
        return 0.
    return _e0_cc_solve(rho, q, ch)[0]


def _maximize_concave(f, lo, hi):
    """
    Maximize a concave function of one variable on [lo, hi]

    Bounded golden-section/parabolic search plus the two endpoints; the
    endpoints win ties so boundary optima come back exactly.
    """
    res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": RHO_TOL})
    best_x = hi
    best_value = f(hi)
    for x, value in ((lo, f(lo)), (float(res.x), -float(res.fun))):
        if value > best_value:
            best_x = x
            best_value = value
    return best_value, best_x


def _maximize_expanding(f, lo, hi_max, first_hi=10.):
    """
    Maximize a concave function on [lo, inf) by expanding the bracket tenfold

    Returns (value, argmax, exhausted). exhausted is True when the maximizer
    still sits on the upper edge at hi_max and no plateau was detected.
    """
    hi = min(first_hi, hi_max)
    while True:
        value, x = _maximize_concave(f, lo, hi)
        if x < hi * (1. - 1E-6):
            return value, x, False
        if hi >= hi_max:
            return value, x, True
        wider = min(10. * hi, hi_max)
        f_hi = f(hi)
        f_wider = f(wider)
        if abs(f_wider - f_hi) <= PLATEAU_TOL * abs(f_hi):
            logger.debug("Plateau between %g and %g, value %.12f"
                         % (hi, wider, f_wider))
            return max(f_hi, f_wider), wider, False
        logger.debug("Expanding bracket from %g to %g" % (hi, wider))
        hi = wider


def e_rce(rate, q, ch, ensemble="iid"):
    """
    Random-coding exponent max_{0 <= rho <= 1} E0(rho, Q) - rho R

    Parameters
    ----------
    rate : float
        nats per channel use, >= 0

    q : InputDistribution

    ch : Channel

    ensemble : str, default "iid"
        "iid" or "cc"

    Returns
    -------
    point : ExponentPoint
        optimizer holds rho*

    """
    _check_rate(rate)
    ensemble = check_ensemble(ensemble)
    value, rho = _maximize_concave(
        lambda r: e0(r, q, ch, ensemble) - r * rate, 0., 1.)
    return ExponentPoint(rate, max(value, 0.), rho)


def critical_rate(q, ch, ensemble="iid"):
    """
    Slope of E0 at rho = 1 by central difference

    For the constant-composition ensemble a(x) is frozen at its optimum for
    rho = 1, which gives the same derivative by the envelope theorem.
    """
    ensemble = check_ensemble(ensemble)
    h = CRITICAL_RATE_STEP
    if ensemble == "iid":
        hi = _e0_iid(1. + h, q, ch)
        lo = _e0_iid(1. - h, q, ch)
    else:
        value, a_opt = _e0_cc_solve(1., q, ch)
        hi = -_e0_cc_objective(1. + h, a_opt, q, ch)[0]
        lo = -_e0_cc_objective(1. - h, a_opt, q, ch)[0]
    return float(max((hi - lo) / (2. * h), 0.))


def ex_gallager(rho, q, ch):
    """
    Ex(rho, Q) = -rho ln sum_{x,x'} Q(x)Q(x') (sum_y sqrt(W(y|x)W(y|x')))^(1/rho)
    """
    if not rho >= 1.:
        raise RhoOutOfRangeError("rho must be >= 1, got %r" % (rho,))
    d = bhattacharyya_matrix(ch).d
    qq = np.outer(q.q, q.q)
    # log1p/expm1 keep the large-rho end accurate
    return float(-rho * np.log1p(np.sum(qq * np.expm1(-d / rho))))


def ex_limit(q, ch):
    """ Q x Q average of d_B, the rho -> infinity value of Ex """
    d = bhattacharyya_matrix(ch).d
    return float(np.dot(q.q, np.dot(d, q.q)))


def e_ex(rate, q, ch):
    """
    Expurgated exponent sup_{rho >= 1} Ex(rho, Q) - rho R

    At R = 0 the supremum is the rho -> infinity limit, returned in closed
    form with optimizer inf. Otherwise the bracket [1, 10] grows tenfold up
    to EX_RHO_MAX.
    """
    _check_rate(rate)
    if rate == 0:
        return ExponentPoint(0., ex_limit(q, ch), np.inf)
    d = bhattacharyya_matrix(ch).d
    qq = np.outer(q.q, q.q)

    def f(rho):
        return -rho * np.log1p(np.sum(qq * np.expm1(-d / rho))) - rho * rate

    value, rho, exhausted = _maximize_expanding(f, 1., EX_RHO_MAX)
    if exhausted:
        raise BracketExhaustedError("Expurgated supremum at R=%g still "
                                    "increasing at rho=%g" % (rate, rho))
    return ExponentPoint(rate, float(value), rho)


def expurgated_bound(rate, q, ch):
    """ max{E_ex(R), E_rce(R)} """
    return max(e_ex(rate, q, ch).value, e_rce(rate, q, ch).value)


def e_sp(rate, q, ch, ensemble="iid"):
    """
    Sphere-packing exponent sup_{rho >= 0} E0(rho, Q) - rho R

    Raises DivergingError when the supremum is not attained for
    rho <= SP_RHO_MAX, which includes R = 0.
    """
    _check_rate(rate)
    if rate == 0:
        raise DivergingError("Sphere-packing exponent is not attained at R=0")
    ensemble = check_ensemble(ensemble)

    def f(rho):
        return e0(rho, q, ch, ensemble) - rho * rate

    value, rho, exhausted = _maximize_expanding(f, 0., SP_RHO_MAX)
    if exhausted:
        raise DivergingError("Sphere-packing supremum at R=%g not attained "
                             "for rho <= %g" % (rate, SP_RHO_MAX))
    return ExponentPoint(rate, max(float(value), 0.), rho)


def _check_below_capacity(rate, q, ch):
    _check_rate(rate)
    capacity = mutual_information(ch, q)
    if rate >= capacity:
        raise RateOutOfRangeError("Rate %.12g nats is not below I(Q,W) = "
                                  "%.12g nats" % (rate, capacity))
    return capacity


def e_trc(rate, q, ch):
    """
    Typical random-coding exponent max{E_ex(2R) + R, E_rce(R)}

    Parameters
    ----------
    rate : float
        nats, 0 <= rate < I(Q, W)

    Returns
    -------
    point : ExponentPoint
        optimizer is a dict naming the winning term and its rho*

    """
    _check_below_capacity(rate, q, ch)
    ex = e_ex(2. * rate, q, ch)
    rce = e_rce(rate, q, ch)
    if ex.value + rate > rce.value:
        return ExponentPoint(rate, ex.value + rate,
                             {"term": "expurgated", "rho": ex.optimizer})
    return ExponentPoint(rate, rce.value,
                         {"term": "random_coding", "rho": rce.optimizer})


def _lambda_bracket(divergence, target):
    lo, hi = LAMBDA_BRACKET
    while divergence(hi) > target:
        if hi >= LAMBDA_MAX:
            raise BisectionFailureError("D(P*||QxQ) still above 2R=%g at "
                                        "lambda=%g" % (target, hi))
        logger.debug("Expanding lambda bracket to %g" % (10. * hi))
        hi *= 10.
    if divergence(lo) <= target:
        raise BisectionFailureError("D(P*||QxQ) already below 2R=%g at "
                                    "lambda=%g" % (target, lo))
    grid = np.geomspace(lo, hi, 25)
    values = np.array([divergence(lam) for lam in grid])
    if np.any(np.diff(values) > 1E-15):
        raise BisectionFailureError("D(P*(lambda)||QxQ) is not decreasing in "
                                    "lambda on [%g, %g]" % (lo, hi))
    return lo, hi


def e_trc_direct(rate, q, ch):
    """
    Typical random-coding exponent from the joint-type minimization

    min over P with D(P || Q x Q) <= 2R of D(P || Q x Q) + sum d_B P - R,
    solved through its KKT optimizers. When the tilted distribution P0
    satisfies the constraint it is optimal; otherwise the constraint is
    active and lambda* solves D(P*(lambda) || Q x Q) = 2R. Uses the i.i.d.
    joint-type formula; there is no constant-composition variant.

    Parameters
    ----------
    rate : float
        nats, 0 < rate < critical_rate(q, ch)

    q : InputDistribution

    ch : Channel

    Returns
    -------
    solution : TrcSolution

    """
    _check_rate(rate)
    r_crit = critical_rate(q, ch)
    if not (0. < rate < r_crit):
        raise RateOutOfRangeError("Direct TRC needs 0 < R < R_crit = %.12g, "
                                  "got %.12g" % (r_crit, rate))
    bm = bhattacharyya_matrix(ch)
    target = 2. * rate

    p0, log_z0 = tilted_distribution(q, bm, 1.)
    d0 = kl_divergence(p0, q, q)
    if d0 <= target:
        value = d0 + float(np.sum(bm.d * p0.p)) - rate
        return TrcSolution(value, "InteriorP0", None, p0)

    def divergence(lam):
        p, log_z = tilted_distribution(q, bm, 1. / (1. + lam))
        return kl_divergence(p, q, q)

    lo, hi = _lambda_bracket(divergence, target)
    lam = brentq(lambda l: divergence(l) - target, lo, hi,
                 xtol=1E-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    p_star, log_z = tilted_distribution(q, bm, 1. / (1. + lam))
    d_star = kl_divergence(p_star, q, q)
    residual = abs(d_star - target)
    if residual > LAMBDA_RESIDUAL_TOL:
        raise BisectionFailureError("lambda* = %g leaves residual %g"
                                    % (lam, residual))
    logger.debug("lambda* = %.12g, residual %.3g" % (lam, residual))
    value = d_star + float(np.sum(bm.d * p_star.p)) - rate
    return TrcSolution(value, "BoundaryPStar", float(lam), p_star)


def trc_branch(rate, q, ch):
    """ Which optimizer of the direct formula applies at this rate """
    if rate >= critical_rate(q, ch):
        return "HighRateRce"
    if rate <= 0:
        return "BoundaryPStar"
    return e_trc_direct(rate, q, ch).branch


def _table_row(rate, q, ch, r_crit):
    rce = e_rce(rate, q, ch).value
    ex = e_ex(rate, q, ch).value
    try:
        sp = e_sp(rate, q, ch).value
    except DivergingError as e:
        logger.warning("E_sp set to inf: %s" % e)
        sp = np.inf
    trc = e_trc(rate, q, ch).value
    if rate >= r_crit:
        branch = "HighRateRce"
    elif rate == 0:
        branch = "BoundaryPStar"
    else:
        branch = e_trc_direct(rate, q, ch).branch
    row = OrderedDict()
    row["rate"] = rate
    row["e_rce"] = rce
    row["e_ex"] = ex
    row["e_sp"] = sp
    row["e_trc"] = trc
    row["above_critical"] = int(rate >= r_crit)
    row["trc_branch"] = branch
    return row


def exponent_table(rates, q, ch, n_threads=1):
    """
    Every exponent at every rate, one OrderedDict per rate

    Rates are in nats and must lie in [0, I(Q, W)).
    """
    for rate in rates:
        _check_below_capacity(rate, q, ch)
    r_crit = critical_rate(q, ch)
    logger.info("Computing exponents at %i rates, R_crit = %.6f nats"
                % (len(rates), r_crit))
    return threaded_map(lambda r: _table_row(float(r), q, ch, r_crit),
                        list(rates), n_threads=n_threads)
