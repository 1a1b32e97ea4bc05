import numpy as np
from numpy.testing import assert_allclose

from explab.channel import bsc, uniform_distribution, bhattacharyya_matrix
from explab.ensemble import EnsembleConfig, run_concentration_experiment
from explab.ensemble import tail_probability_estimate, gaussianity_diagnostic
from explab.exponents import e_trc, ex_limit
from explab.utils.test_utils import with_slow

ch = bsc(0.11)
q = uniform_distribution(2)
d = bhattacharyya_matrix(ch)

# desk scale: M=4, n=10000, 10^5 codebooks on 8 workers
m = 4
n = 10000
trials = 10 ** 5
n_threads = 8


def _desk_run(kind):
    cfg = EnsembleConfig(kind, q, n, m, trials=trials)
    return run_concentration_experiment(cfg, d, n_threads=n_threads)


def _check_concentration(run, spacing):
    inside = np.mean((run.samples >= 0.225) & (run.samples <= 0.2375))
    assert inside >= 0.99
    assert run.samples.min() >= 0.220
    assert run.samples.max() <= 0.245
    diag = gaussianity_diagnostic(run)
    assert diag["L"] == 12
    # V / n sits on a grid, compared against the rounded references
    assert_allclose(diag["lattice_step"] * np.sqrt(run.variance),
                    spacing / n, rtol=1E-6)
    assert diag["ks_min_gaussians"] <= 0.02
    assert diag["ks_min_gaussians"] < diag["ks_gaussian"]


@with_slow
def test_iid_concentration():
    run = _desk_run("iid")
    _check_concentration(run, d.d[0, 1])
    assert 0.2290 <= run.mean <= 0.2320


@with_slow
def test_cc_concentration():
    _check_concentration(_desk_run("cc"), 2. * d.d[0, 1])


@with_slow
def test_tails_with_blocklength():
    e_ref = e_trc(0., q, ch).value
    upper = ex_limit(q, ch) + 0.01
    freqs = []
    for blocklength in [2000, 4000, 8000]:
        cfg = EnsembleConfig("iid", q, blocklength, m, trials=10 ** 4)
        run = run_concentration_experiment(cfg, d, n_threads=n_threads)
        est = tail_probability_estimate(run, e_ref, 0.003)
        freqs.append(est.lower_tail_freq)
        assert (run.samples > upper).sum() == 0
    assert freqs[0] > freqs[1] > freqs[2]
