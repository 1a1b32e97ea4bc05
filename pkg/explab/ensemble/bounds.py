# License: BSD 3-clause
"""
Exhaustive error probabilities of small codes under ML decoding

Every output sequence is enumerated, so these are only usable while
|Y|^n stays below MAX_OUTPUTS. Ties in likelihood count as errors.
"""
from collections import namedtuple
import numpy as np
from scipy.stats import binom

from ..core import get_logger
from ..core import InstanceTooLargeError, LengthMismatchError
from ..utils import pack_codewords, hamming_distance_packed

logger = get_logger()

MAX_OUTPUTS = 2 * 10 ** 7
OUTPUT_CHUNK = 2 ** 15
TIE_RTOL = 1E-12

ErrorProbabilities = namedtuple("ErrorProbabilities",
                                ["de_caen", "exact", "union"])


def _check_outputs(n, output_size):
    total = output_size ** n
    if total > MAX_OUTPUTS:
        raise InstanceTooLargeError("Enumerating %i^%i = %i outputs exceeds "
                                    "%i" % (output_size, n, total, MAX_OUTPUTS))
    return total


def _output_chunks(n, output_size):
    """ All output sequences, as (B, n) symbol arrays in lexicographic order """
    total = _check_outputs(n, output_size)
    powers = output_size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, OUTPUT_CHUNK):
        codes = np.arange(start, min(start + OUTPUT_CHUNK, total),
                          dtype=np.int64)
        yield (codes[:, None] // powers[None, :]) % output_size


def _log_likelihoods(symbols, ys, ch):
    """
    ln W^n(y | x_m) for a chunk of outputs, shape (B, M), from joint-type
    counts

    Codewords at equal likelihood can still differ here by an ulp when
    their joint types differ, see _competitors.
    """
    n_cells = ch.input_size * ch.output_size
    idx = symbols[None, :, :].astype(np.int64) * ch.output_size + ys[:, None, :]
    counts = np.empty(idx.shape[:2] + (n_cells,), dtype=np.float64)
    for c in range(n_cells):
        counts[..., c] = (idx == c).sum(axis=-1)
    with np.errstate(divide="ignore"):
        lw = np.log(ch.w).ravel()
    with np.errstate(invalid="ignore"):
        terms = np.where(counts > 0, counts * lw, 0.)
    return terms.sum(axis=-1)


def _check_codebook(symbols, ch):
    symbols = np.asarray(symbols)
    if symbols.ndim != 2 or symbols.shape[0] < 2:
        raise LengthMismatchError("Need at least 2 codewords of equal length")
    if symbols.max() >= ch.input_size:
        raise LengthMismatchError("Codeword symbol %i outside input alphabet "
                                  "of size %i" % (symbols.max(), ch.input_size))
    return symbols


def _hamming_distances(symbols, ys):
    """ d_H(y, x_m) for a chunk of outputs, shape (B, M) """
    return (symbols[None, :, :] != ys[:, None, :]).sum(axis=-1)


def _competitors(ll, distances, i):
    """
    Boolean (B, M): codewords at least as likely as x_i given each output

    On a BSC the comparison runs on integer Hamming distances. Otherwise
    log-likelihoods within TIE_RTOL of x_i's count as ties.
    """
    if distances is not None:
        return distances <= distances[:, i:i + 1]
    ref = ll[:, i:i + 1]
    with np.errstate(invalid="ignore"):
        return ll >= ref - TIE_RTOL * np.abs(ref)


def _enumerate_events(symbols, ch):
    """
    Exact Pe and the pairwise intersection probabilities of all error events

    Returns
    -------
    pe : float

    g : array, shape (M, M, M)
        g[i, j, k] = P[{x_i -> x_j} and {x_i -> x_k} | x_i sent], zero when
        j or k equals i

    """
    symbols = _check_codebook(symbols, ch)
    m, n = symbols.shape
    pe = 0.
    g = np.zeros((m, m, m))
    for ys in _output_chunks(n, ch.output_size):
        ll = _log_likelihoods(symbols, ys, ch)
        distances = None
        if ch.is_bsc:
            distances = _hamming_distances(symbols, ys)
        for i in range(m):
            w = np.exp(ll[:, i])
            events = _competitors(ll, distances, i)
            events[:, i] = False
            pe += np.sum(w[events.any(axis=1)])
            ev = events.astype(np.float64)
            g[i] += np.dot((ev * w[:, None]).T, ev)
    return pe / m, g


def exact_error_probability(cb, ch):
    """
    Average ML error probability of a codebook, ties counted as errors

    Parameters
    ----------
    cb : Codebook

    ch : Channel

    Returns
    -------
    pe : float

    """
    pe, g = _enumerate_events(cb.symbols, ch)
    return float(pe)


def _bsc_pairwise(distance, p):
    distance = np.asarray(distance, dtype=np.int64)
    # an even split is a tie, which is an error
    threshold = (distance + 1) // 2
    return np.where(distance == 0, 1.,
                    binom.sf(threshold - 1, distance, p))


def pairwise_error_probability(xi, xj, ch):
    """
    P[x_i -> x_j]: probability that x_j is at least as likely as x_i when x_i
    is sent. Binomial tail over the differing positions for a BSC,
    exhaustive otherwise.
    """
    xi = np.asarray(xi).ravel()
    xj = np.asarray(xj).ravel()
    if len(xi) != len(xj):
        raise LengthMismatchError("Codewords have lengths %i and %i"
                                  % (len(xi), len(xj)))
    if ch.is_bsc:
        distance = int(np.sum(xi != xj))
        return float(_bsc_pairwise(distance, ch.crossover))
    pe, g = _enumerate_events(np.vstack([xi, xj]), ch)
    return float(g[0, 1, 1])


def union_bound_pe(cb, ch):
    """
    (1/M) sum_i sum_{j != i} P[x_i -> x_j]
    """
    m = cb.m
    if ch.is_bsc:
        packed = pack_codewords(cb.symbols)
        dist = hamming_distance_packed(packed[:, None, :], packed[None, :, :])
        pair = _bsc_pairwise(dist, ch.crossover)
        np.fill_diagonal(pair, 0.)
        return float(pair.sum() / m)
    pe, g = _enumerate_events(cb.symbols, ch)
    return float(np.trace(g, axis1=1, axis2=2).sum() / m)


def _de_caen(g):
    m = g.shape[0]
    total = 0.
    for i in range(m):
        p = np.diag(g[i])
        denom = g[i].sum(axis=1)
        used = p > 0
        # events of probability zero are not counted
        total += np.sum(p[used] ** 2 / denom[used])
    return total / m


def de_caen_lower_bound(cb, ch):
    """
    De Caen lower bound on the union of pairwise error events

    (1/M) sum_i sum_j P(A_j)^2 / sum_k P(A_j and A_k), A_j = {x_i -> x_j},
    with 0 / 0 = 0.
    """
    pe, g = _enumerate_events(cb.symbols, ch)
    return float(_de_caen(g))


def error_probability_bounds(cb, ch):
    """ De Caen bound, exact Pe and union bound from a single enumeration """
    pe, g = _enumerate_events(cb.symbols, ch)
    union = np.trace(g, axis1=1, axis2=2).sum() / cb.m
    return ErrorProbabilities(float(_de_caen(g)), float(pe), float(union))


def code_error_exponent(cb, ch):
    """ -(1/n) ln Pe of the exact error probability, inf when Pe = 0 """
    pe = exact_error_probability(cb, ch)
    if pe <= 0:
        return np.inf
    return float(-np.log(pe) / cb.n)


def union_bound_exponent(cb, ch):
    ub = union_bound_pe(cb, ch)
    if ub <= 0:
        return np.inf
    return float(-np.log(ub) / cb.n)
