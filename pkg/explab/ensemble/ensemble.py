# License: BSD 3-clause
import os
from collections import namedtuple, OrderedDict
import numbers
import numpy as np
from scipy.stats import norm

from ..core import get_logger, threaded_map, safe_zip, DEFAULT_SEED
from ..core import LengthMismatchError, TooFewSamplesError
from ..core import InstanceTooLargeError
from ..utils import pack_codewords, popcount, hamming_distance_packed
from ..utils import trial_iterator, write_csv, read_csv
from ..utils import write_json, read_json, array_digest
from ..utils import to_unit, from_unit
from ..channel import validate_distribution
from ..refdist import ReferenceDistribution, kolmogorov_distance
from ..refdist import normalize_samples, lattice_step
from .bounds import exact_error_probability

logger = get_logger()

ENSEMBLE_KINDS = ("iid", "constant_composition")
DEFAULT_BINS = 60
CHUNK_SIZE = 256
MIN_DIAGNOSTIC_SAMPLES = 1000
MAX_CODEBOOKS = 2 ** 16
WILSON_LEVEL = 0.95

SecondMoment = namedtuple("SecondMoment",
                          ["ratio", "mean_pe", "mean_pe2", "se_mean_pe",
                           "se_mean_pe2", "n_codebooks"])
TailEstimate = namedtuple("TailEstimate",
                          ["lower_tail_freq", "upper_tail_freq",
                           "confidence_radius"])


def composition(q, n):
    """
    Integer composition of length n closest to n Q by largest remainder

    Ties in the remainder go to the lower symbol index, so the result is
    deterministic and max_x |c(x) / n - Q(x)| <= 1 / n.
    """
    if n < 1:
        raise ValueError("Blocklength must be >= 1, got %r" % (n,))
    target = n * q.q
    counts = np.floor(target).astype(np.int64)
    short = n - int(counts.sum())
    if short > 0:
        order = np.argsort(-(target - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


class EnsembleConfig(object):
    """
    Random-coding ensemble and experiment size

    Parameters
    ----------
    kind : str
        "iid" or "constant_composition" ("cc" is accepted)

    q : InputDistribution

    n : int
        Blocklength, >= 1

    m : int
        Number of codewords, >= 2

    trials : int, default 1

    seed : int, default DEFAULT_SEED
        64 bit master seed; trial t draws from a stream derived from
        (seed, t)

    """
    def __init__(self, kind, q, n, m, trials=1, seed=DEFAULT_SEED):
        if kind == "cc":
            kind = "constant_composition"
        if kind not in ENSEMBLE_KINDS:
            raise ValueError("Unknown ensemble %s, expected one of %s"
                             % (kind, ENSEMBLE_KINDS))
        for name, value, low in (("n", n, 1), ("m", m, 2),
                                 ("trials", trials, 1)):
            if not isinstance(value, numbers.Integral) or value < low:
                raise ValueError("%s must be an integer >= %i, got %r"
                                 % (name, low, value))
        if (not isinstance(seed, numbers.Integral) or seed < 0
                or seed >= 2 ** 64):
            raise ValueError("seed must be a 64 bit nonnegative integer, "
                             "got %r" % (seed,))
        self.kind = kind
        self.q = q
        self.n = int(n)
        self.m = int(m)
        self.trials = int(trials)
        self.seed = int(seed)
        self.composition = None
        if kind == "constant_composition":
            self.composition = composition(q, self.n)

    def __repr__(self):
        return ("EnsembleConfig(kind=%s, n=%i, m=%i, trials=%i, seed=%i)"
                % (self.kind, self.n, self.m, self.trials, self.seed))

    def to_dict(self):
        d = OrderedDict()
        d["kind"] = self.kind
        d["q"] = self.q.q.tolist()
        d["n"] = self.n
        d["m"] = self.m
        d["trials"] = self.trials
        d["seed"] = self.seed
        if self.composition is not None:
            d["composition"] = self.composition.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], validate_distribution(d["q"]), d["n"], d["m"],
                   trials=d["trials"], seed=d["seed"])


class Codebook(object):
    """
    M codewords of length n, one per row of symbols

    Binary codebooks are also kept bit-packed (8 symbols per byte) for fast
    Hamming distances.
    """
    def __init__(self, symbols, alphabet=2):
        symbols = np.array(symbols, dtype=np.uint8)
        if symbols.ndim != 2:
            raise LengthMismatchError("Codebook must be a 2D array of "
                                      "codewords, got %i dimensions"
                                      % symbols.ndim)
        symbols.flags.writeable = False
        self.symbols = symbols
        self.m, self.n = symbols.shape
        self.alphabet = alphabet
        self.packed = None
        if alphabet == 2:
            self.packed = pack_codewords(symbols)

    def __len__(self):
        return self.m

    def __repr__(self):
        return "Codebook(m=%i, n=%i)" % (self.m, self.n)

    def compositions(self):
        """ Symbol counts of every codeword, shape (M, |X|) """
        return np.stack([np.bincount(row, minlength=self.alphabet)
                         for row in self.symbols])


def trial_rng(seed, trial):
    """ Generator for one trial, independent of how trials are scheduled """
    return np.random.default_rng([int(seed), int(trial)])


def sample_codebook(config, trial):
    """
    Draw the codebook of one trial

    iid: every symbol independently from Q. constant_composition: the fixed
    composition vector, independently permuted for each codeword.
    """
    rng = trial_rng(config.seed, trial)
    q = config.q
    shape = (config.m, config.n)
    if config.kind == "iid":
        if q.size == 2:
            symbols = rng.random(shape) < q.q[1]
        else:
            symbols = rng.choice(q.size, size=shape, p=q.q)
    else:
        base = np.repeat(np.arange(q.size), config.composition)
        symbols = rng.permuted(np.tile(base, (config.m, 1)), axis=1)
    return Codebook(symbols, alphabet=q.size)


def pairwise_exponent(xi, xj, d):
    """
    Bhattacharyya exponent (1/n) sum_k d(xi_k, xj_k) of one codeword pair

    Parameters
    ----------
    xi, xj : array-like of int, shape (n,)

    d : BhattacharyyaMatrix

    Returns
    -------
    exponent : float
        nats per symbol

    """
    xi = np.asarray(xi).ravel()
    xj = np.asarray(xj).ravel()
    if len(xi) != len(xj):
        raise LengthMismatchError("Codewords have lengths %i and %i"
                                  % (len(xi), len(xj)))
    n = len(xi)
    if d.size == 2:
        dist = hamming_distance_packed(pack_codewords(xi), pack_codewords(xj))
        return float(d.d[0, 1] * dist / n)
    return float(d.d[xi, xj].sum() / n)


def pairwise_statistics(cb, d):
    """
    Z_ij / n over unordered pairs i < j, in np.triu_indices order
    """
    iu, ju = np.triu_indices(cb.m, 1)
    if d.size == 2 and cb.packed is not None:
        dist = popcount(np.bitwise_xor(cb.packed[iu], cb.packed[ju]))
        return d.d[0, 1] * dist / float(cb.n)
    return d.d[cb.symbols[iu], cb.symbols[ju]].sum(axis=1) / float(cb.n)


def min_pairwise_statistic(cb, d):
    """ V / n: the smallest pairwise Bhattacharyya exponent of a codebook """
    if cb.m < 2:
        raise LengthMismatchError("Need M >= 2 codewords, got %i" % cb.m)
    return float(pairwise_statistics(cb, d).min())


class SimulationRun(object):
    """
    Per-trial V_n / n samples of an experiment and their summaries

    Attributes
    ----------
    config : EnsembleConfig

    samples : array, shape (trials,)
        In trial order

    mean, variance : float

    bin_edges : array, shape (bins + 1,)

    counts : array of int, shape (bins,)

    """
    def __init__(self, config, samples, bins=DEFAULT_BINS):
        samples = np.asarray(samples, dtype=np.float64)
        if len(samples) != config.trials:
            raise LengthMismatchError("Got %i samples for %i trials"
                                      % (len(samples), config.trials))
        samples.flags.writeable = False
        self.config = config
        self.samples = samples
        self.bins = bins
        self.mean = float(samples.mean())
        self.variance = float(max(samples.var(), 0.))
        lo, hi = samples.min(), samples.max()
        self.counts, self.bin_edges = np.histogram(samples, bins=bins,
                                                   range=(lo, hi))

    def __repr__(self):
        return "SimulationRun(%r, mean=%.6f)" % (self.config, self.mean)

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _simulate_chunk(config, d, trials):
    return np.array([min_pairwise_statistic(sample_codebook(config, t), d)
                     for t in trials])


def run_concentration_experiment(config, d, bins=DEFAULT_BINS, n_threads=1,
                                 chunk_size=CHUNK_SIZE):
    """
    Sample config.trials codebooks and record V_n / n for each

    Trials run in chunks on n_threads workers. Samples are merged by trial
    index, so the run is identical for any n_threads.

    Parameters
    ----------
    config : EnsembleConfig

    d : BhattacharyyaMatrix

    bins : int, default DEFAULT_BINS
        Histogram bins over [min, max] of the samples

    n_threads : int, default 1

    chunk_size : int, default CHUNK_SIZE
        Trials per work item

    Returns
    -------
    run : SimulationRun

    """
    logger.info("Running %i trials of %r on %i threads"
                % (config.trials, config, n_threads))
    chunks = list(trial_iterator(config.trials, chunk_size))
    results = threaded_map(lambda trials: _simulate_chunk(config, d, trials),
                           chunks, n_threads=n_threads)
    run = SimulationRun(config, np.concatenate(results), bins=bins)
    logger.info("Sample mean %.6f nats, std %.6f nats"
                % (run.mean, np.sqrt(run.variance)))
    return run


def wilson_radius(freq, n_samples, level=WILSON_LEVEL):
    """ Half width of the Wilson score interval for a binomial frequency """
    z = norm.ppf(0.5 + level / 2.)
    z2n = z ** 2 / n_samples
    return float(z / (1. + z2n) * np.sqrt(freq * (1. - freq) / n_samples
                                          + z2n / (4. * n_samples)))


def tail_probability_estimate(run, e_ref, eps):
    """
    Frequencies of samples below e_ref - eps and above e_ref + eps

    confidence_radius is the larger of the two 95% Wilson half widths.
    """
    n_samples = len(run.samples)
    if n_samples < MIN_DIAGNOSTIC_SAMPLES:
        raise TooFewSamplesError("Tail estimates need >= %i samples, got %i"
                                 % (MIN_DIAGNOSTIC_SAMPLES, n_samples))
    lower = float(np.mean(run.samples < e_ref - eps))
    upper = float(np.mean(run.samples > e_ref + eps))
    radius = max(wilson_radius(lower, n_samples),
                 wilson_radius(upper, n_samples))
    return TailEstimate(lower, upper, radius)


def _check_exhaustive(config, ch):
    if ch.output_size ** config.n > 2 * 10 ** 7:
        raise InstanceTooLargeError("n=%i is too long for exact error "
                                    "probabilities" % config.n)


def second_moment_ratio(config, ch, n_threads=1):
    """
    Monte Carlo estimate of E[Pe^2] / E[Pe]^2 over config.trials codebooks

    Pe of every sampled codebook is computed exactly, so n must be tiny.

    Returns
    -------
    moments : SecondMoment
        ratio with the sample means of Pe and Pe^2 and their standard errors

    """
    _check_exhaustive(config, ch)
    pes = threaded_map(
        lambda t: exact_error_probability(sample_codebook(config, t), ch),
        list(range(config.trials)), n_threads=n_threads)
    pes = np.array(pes)
    mean_pe = float(pes.mean())
    mean_pe2 = float((pes ** 2).mean())
    se1 = se2 = 0.
    if len(pes) > 1:
        se1 = float(pes.std(ddof=1) / np.sqrt(len(pes)))
        se2 = float((pes ** 2).std(ddof=1) / np.sqrt(len(pes)))
    ratio = mean_pe2 / mean_pe ** 2
    logger.info("E[Pe^2]/E[Pe]^2 = %.6f over %i codebooks"
                % (ratio, len(pes)))
    return SecondMoment(ratio, mean_pe, mean_pe2, se1, se2, len(pes))


def ensemble_pe_moments_exact(config, ch):
    """
    E[Pe], E[Pe^2] and their ratio by enumerating every codebook

    Each codebook is weighted by its probability under the ensemble; for the
    constant-composition ensemble that is uniform over codebooks whose
    codewords all have the configured composition.
    """
    _check_exhaustive(config, ch)
    k = config.q.size
    size = config.m * config.n
    total = k ** size
    if total > MAX_CODEBOOKS:
        raise InstanceTooLargeError("%i codebooks exceeds %i"
                                    % (total, MAX_CODEBOOKS))
    powers = k ** np.arange(size - 1, -1, -1, dtype=np.int64)
    all_symbols = (np.arange(total, dtype=np.int64)[:, None]
                   // powers[None, :]) % k
    if config.kind == "iid":
        weights = np.prod(config.q.q[all_symbols], axis=1)
    else:
        rows = all_symbols.reshape(total, config.m, config.n)
        counts = np.stack([(rows == x).sum(axis=2) for x in range(k)], axis=2)
        ok = np.all(counts == config.composition[None, None, :], axis=(1, 2))
        weights = ok / float(ok.sum())
    m1 = m2 = 0.
    for symbols, w in safe_zip(all_symbols, weights):
        if w <= 0:
            continue
        cb = Codebook(symbols.reshape(config.m, config.n), alphabet=k)
        pe = exact_error_probability(cb, ch)
        m1 += w * pe
        m2 += w * pe ** 2
    return float(m1), float(m2), float(m2 / m1 ** 2)


def paley_zygmund_bound(ratio, theta):
    """
    Lower bound (1 - theta)^2 / ratio on P[Pe > theta E[Pe]]
    """
    if not (0. <= theta <= 1.):
        raise ValueError("theta must lie in [0, 1], got %r" % (theta,))
    if not ratio >= 1. - 1E-12:
        raise ValueError("A second moment ratio is >= 1, got %r" % (ratio,))
    return (1. - theta) ** 2 / ratio


def gaussianity_diagnostic(run, L=None):
    """
    Kolmogorov distances of the normalized samples to the Gaussian and to
    the normalized min of L Gaussians, L = M(M - 1) by default

    V / n of a binary code sits on a grid (spacing 2 d_B / n for constant
    composition codes). When a grid is found both references are rounded to
    it before comparing, and its normalized spacing is reported as
    "lattice_step" (None otherwise).
    """
    if L is None:
        L = run.config.m * (run.config.m - 1)
    n_samples = len(run.samples)
    if n_samples < MIN_DIAGNOSTIC_SAMPLES:
        raise TooFewSamplesError("Distribution diagnostics need >= %i "
                                 "samples, got %i"
                                 % (MIN_DIAGNOSTIC_SAMPLES, n_samples))
    z = normalize_samples(run.samples)
    step = lattice_step(z)
    d = OrderedDict()
    d["L"] = L
    d["lattice_step"] = step
    d["ks_gaussian"] = kolmogorov_distance(
        z, ReferenceDistribution("StandardGaussian"), lattice=step)
    d["ks_min_gaussians"] = kolmogorov_distance(
        z, ReferenceDistribution("NormalizedMinOfGaussians", L),
        lattice=step)
    logger.info("Kolmogorov distance to Gaussian %.5f, to min of %i "
                "Gaussians %.5f" % (d["ks_gaussian"], L,
                                    d["ks_min_gaussians"]))
    return d


def save_run(run, out_dir, unit="nats"):
    """
    Write samples.csv, histogram.csv and run.json into out_dir

    Samples, bin positions, mean and variance are written in unit (nats or
    bits); run.json records the unit and samples_sha256 hashes the nats
    samples. Returns the list of written paths.
    """
    scale = float(to_unit(1., unit))
    samples_path = os.path.join(out_dir, "samples.csv")
    hist_path = os.path.join(out_dir, "histogram.csv")
    json_path = os.path.join(out_dir, "run.json")
    write_csv(samples_path, ["trial", "sample"],
              [(str(i), s) for i, s in enumerate(run.samples * scale)])
    write_csv(hist_path, ["bin_center", "count"],
              [(c, str(int(k)))
               for c, k in safe_zip(run.bin_centers * scale, run.counts)])
    doc = OrderedDict()
    doc["config"] = run.config.to_dict()
    doc["unit"] = unit
    doc["n_samples"] = len(run.samples)
    doc["mean"] = run.mean * scale
    doc["variance"] = run.variance * scale ** 2
    doc["bins"] = run.bins
    doc["bin_edges"] = (run.bin_edges * scale).tolist()
    doc["counts"] = run.counts.tolist()
    doc["samples_sha256"] = array_digest(run.samples)
    write_json(json_path, doc)
    return [samples_path, hist_path, json_path]


def load_run(out_dir):
    """ Rebuild a SimulationRun written by save_run, samples back in nats """
    doc = read_json(os.path.join(out_dir, "run.json"))
    header, rows = read_csv(os.path.join(out_dir, "samples.csv"))
    samples = from_unit([float(r[1]) for r in rows], doc.get("unit", "nats"))
    config = EnsembleConfig.from_dict(doc["config"])
    return SimulationRun(config, samples, bins=doc["bins"])


def tiny_code_corpus(seed=DEFAULT_SEED, n_random=60):
    """
    Deterministic set of small binary codebooks (n <= 10, M <= 4)

    A few hand-picked codes come first, then n_random random ones.
    """
    corpus = [Codebook([[0, 0, 0], [1, 1, 1]]),
              Codebook([[0, 0, 0], [0, 1, 1], [1, 0, 1]]),
              Codebook([[0, 1, 1, 0], [0, 1, 1, 0]]),
              Codebook([[0], [1]]),
              Codebook([[0, 0, 0, 0, 0], [1, 1, 1, 0, 0],
                        [0, 0, 1, 1, 1], [1, 1, 0, 1, 1]])]
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        n = int(rng.integers(1, 11))
        m = int(rng.integers(2, 5))
        corpus.append(Codebook(rng.integers(0, 2, size=(m, n))))
    return corpus
