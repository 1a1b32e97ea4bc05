# License: BSD 3-clause
"""
Cross-module consistency suites behind `explab verify`

Each suite returns a list of CheckResult. A check passes when its residual,
the worst violation found, is within its tolerance.
"""
from collections import namedtuple, OrderedDict
import numpy as np
from scipy.stats import binom

from ..core import get_logger, DEFAULT_SEED
from ..channel import bsc, validate_channel, uniform_distribution
from ..channel import mutual_information, cutoff_rate, bhattacharyya_matrix
from ..typecalc import simplex_grid_minimize, trc_objective, kl_divergence
from ..exponents import e0_iid, e0_cc, e_rce, e_ex, e_sp, e_trc
from ..exponents import e_trc_direct, critical_rate, ex_gallager, ex_limit
from ..exponents import expurgated_bound
from ..refdist import gauss_q, min_gauss_moments
from ..ensemble import tiny_code_corpus, error_probability_bounds
from ..ensemble import union_bound_pe, exact_error_probability, Codebook
from ..utils import rate_grid

logger = get_logger()

CheckResult = namedtuple("CheckResult",
                         ["suite", "name", "passed", "residual", "tolerance"])

ORDERING_CROSSOVERS = (0.05, 0.11, 0.25)
TRC_CROSSOVER = 0.11


def _check(suite, name, residual, tolerance):
    residual = float(residual)
    return CheckResult(suite, name, bool(residual <= tolerance), residual,
                       tolerance)


def sandwich_suite(seed=DEFAULT_SEED, crossover=TRC_CROSSOVER):
    """ De Caen <= exact Pe <= union bound on the tiny code corpus """
    ch = bsc(crossover)
    lower = upper = union_gap = m2_gap = -np.inf
    corpus = tiny_code_corpus(seed)
    for cb in corpus:
        bounds = error_probability_bounds(cb, ch)
        closed_union = union_bound_pe(cb, ch)
        lower = max(lower, bounds.de_caen - bounds.exact)
        upper = max(upper, bounds.exact - bounds.union)
        union_gap = max(union_gap, abs(closed_union - bounds.union))
        if cb.m == 2:
            m2_gap = max(m2_gap, abs(bounds.de_caen - bounds.exact),
                         abs(bounds.union - bounds.exact))
    logger.info("Sandwich suite over %i codebooks" % len(corpus))
    return [_check("sandwich", "de_caen <= exact", lower, 1E-12),
            _check("sandwich", "exact <= union", upper, 1E-12),
            _check("sandwich", "binomial union = enumerated union",
                   union_gap, 1E-12),
            _check("sandwich", "M=2 bounds are tight", m2_gap, 1E-12)]


def trc_suite(n_rates=20, step=0.01, crossover=TRC_CROSSOVER):
    """ Closed-form, KKT and grid-oracle TRC exponents on (0, R_crit) """
    ch = bsc(crossover)
    q = uniform_distribution(2)
    d = bhattacharyya_matrix(ch)
    r_crit = critical_rate(q, ch)
    rates = r_crit * np.arange(1, n_rates + 1) / float(n_rates + 1)
    closed_gap = oracle_gap = residual = 0.
    for rate in rates:
        direct = e_trc_direct(rate, q, ch)
        closed = e_trc(rate, q, ch).value
        oracle, p_grid = simplex_grid_minimize(
            trc_objective(q, d, rate), 2. * rate, q, step=step)
        closed_gap = max(closed_gap, abs(closed - direct.exponent))
        oracle_gap = max(oracle_gap, abs(direct.exponent - oracle))
        if direct.branch == "BoundaryPStar":
            residual = max(residual, abs(kl_divergence(direct.p_opt, q, q)
                                         - 2. * rate))
        logger.debug("R=%.6f: closed %.8f, direct %.8f (%s), grid %.8f"
                     % (rate, closed, direct.exponent, direct.branch, oracle))
    logger.info("TRC suite over %i rates below R_crit = %.6f"
                % (len(rates), r_crit))
    return [_check("trc", "e_trc = e_trc_direct", closed_gap, 2E-3),
            _check("trc", "e_trc_direct = grid oracle", oracle_gap, 2E-3),
            _check("trc", "lambda* residual", residual, 1E-8)]


def ordering_suite(n_rates=50, crossovers=ORDERING_CROSSOVERS):
    """ E_rce <= E_trc <= expurgated envelope, high-rate coincidences """
    results = []
    q = uniform_distribution(2)
    for p in crossovers:
        ch = bsc(p)
        suite = "ordering"
        r_crit = critical_rate(q, ch)
        rates = rate_grid(mutual_information(ch, q), n_rates)
        rce_trc = trc_ex = trc_high = sp_high = 0.
        for rate in rates:
            rce = e_rce(rate, q, ch).value
            trc = e_trc(rate, q, ch).value
            rce_trc = max(rce_trc, rce - trc)
            trc_ex = max(trc_ex, trc - expurgated_bound(rate, q, ch))
            if rate >= r_crit:
                trc_high = max(trc_high, abs(trc - rce))
                sp_high = max(sp_high, abs(e_sp(rate, q, ch).value - rce))
        r0_gap = abs(e_rce(0., q, ch).value - cutoff_rate(ch, q))
        tag = "p=%g: " % p
        results.extend([
            _check(suite, tag + "E_rce <= E_trc", rce_trc, 1E-12),
            _check(suite, tag + "E_trc <= expurgated bound", trc_ex, 1E-9),
            _check(suite, tag + "E_trc = E_rce above R_crit", trc_high, 1E-6),
            _check(suite, tag + "E_sp = E_rce above R_crit", sp_high, 1E-6),
            _check(suite, tag + "E_rce(0) = R0", r0_gap, 1E-10)])
    return results


def refdist_suite(seed=DEFAULT_SEED, n_mc=10 ** 7, L=12):
    """
    Tail function and min-of-Gaussians moments against exact values

    The L = 12 mean is compared with an n_mc draw Monte Carlo oracle, drawn
    in chunks of 10^5 and reduced to running sums.
    """
    t = np.linspace(-8., 8., 161)
    symmetry = np.max(np.abs(gauss_q(t) + gauss_q(-t) - 1.))
    mean1, var1 = min_gauss_moments(1)
    mean2, var2 = min_gauss_moments(2)
    mean_l, var_l = min_gauss_moments(L)
    rng = np.random.default_rng(seed)
    total = 0.
    total_sq = 0.
    for start in range(0, n_mc, 10 ** 5):
        stop = min(start + 10 ** 5, n_mc)
        draws = rng.standard_normal((stop - start, L)).min(axis=1)
        total += draws.sum()
        total_sq += np.sum(draws ** 2)
    mc_mean = total / n_mc
    mc_var = (total_sq - n_mc * mc_mean ** 2) / (n_mc - 1.)
    stderr = np.sqrt(mc_var / n_mc)
    return [_check("refdist", "Q(0) = 0.5", abs(gauss_q(0.) - 0.5), 1E-15),
            _check("refdist", "Q(t) + Q(-t) = 1", symmetry, 1E-12),
            _check("refdist", "L=1 moments", max(abs(mean1), abs(var1 - 1.)),
                   1E-9),
            _check("refdist", "L=2 mean = -1/sqrt(pi)",
                   abs(mean2 + 1. / np.sqrt(np.pi)), 1E-8),
            _check("refdist", "L=%i mean vs Monte Carlo (in std errors)" % L,
                   abs(mean_l - mc_mean) / stderr, 3.)]


def identities_suite(crossover=TRC_CROSSOVER, step=0.01):
    """ Identities linking channel quantities and exponents """
    ch = bsc(crossover)
    q = uniform_distribution(2)
    d = bhattacharyya_matrix(ch)
    r0 = cutoff_rate(ch, q)
    z_channel = validate_channel([[1., 0.], [0.3, 0.7]])
    grid_value, p_grid = simplex_grid_minimize(trc_objective(q, d, 0.),
                                               np.inf, q, step=step)
    repetition = Codebook([[0, 0, 0], [1, 1, 1]])
    rep_exact = exact_error_probability(repetition, ch)
    rep_formula = binom.sf(1, 3, crossover)
    return [_check("identities", "E0(1) = R0",
                   abs(e0_iid(1., q, ch) - r0), 1E-12),
            _check("identities", "E_ex(0) = E_trc(0) = mean d_B",
                   max(abs(e_ex(0., q, ch).value - ex_limit(q, ch)),
                       abs(e_trc(0., q, ch).value - ex_limit(q, ch))), 1E-12),
            _check("identities", "Ex plateau by rho=1e5",
                   abs(ex_gallager(1E5, q, ch) - ex_limit(q, ch)), 1E-4),
            _check("identities", "cc E0 >= iid E0 on a Z channel",
                   e0_iid(1., q, z_channel) - e0_cc(1., q, z_channel), 1E-9),
            _check("identities", "unconstrained grid minimum = R0",
                   abs(grid_value - r0), 1E-3),
            _check("identities", "repetition code Pe = binomial tail",
                   abs(rep_exact - rep_formula), 1E-15)]


SUITES = OrderedDict([("sandwich", sandwich_suite),
                      ("trc", trc_suite),
                      ("ordering", ordering_suite),
                      ("refdist", refdist_suite),
                      ("identities", identities_suite)])


def run_suites(names):
    """
    Run the named suites ("all" expands to every suite) and log a report

    Returns
    -------
    results : list of CheckResult

    all_passed : bool

    """
    if "all" in names:
        names = list(SUITES.keys())
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError("Unknown suite %s, expected one of %s"
                             % (name, list(SUITES.keys()) + ["all"]))
        logger.info("Running suite %s" % name)
        results.extend(SUITES[name]())
    for r in results:
        logger.info("%s %-10s %-48s residual %.3e (tol %.1e)"
                    % ("PASS" if r.passed else "FAIL", r.suite, r.name,
                       r.residual, r.tolerance))
    all_passed = all(r.passed for r in results)
    n_failed = sum(1 for r in results if not r.passed)
    logger.info("%i checks, %i failed" % (len(results), n_failed))
    return results, all_passed
