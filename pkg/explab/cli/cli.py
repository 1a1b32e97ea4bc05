# License: BSD 3-clause
"""
Batch front end

    explab exponents --bsc 0.11 --rates 50 --unit bits --out runs/bsc
    explab simulate --bsc 0.11 --ensemble iid --m 4 --n 10000 --trials 100000
    explab verify --suite all
"""
import argparse
import os
import sys
import time
from collections import OrderedDict
import numpy as np

from ..core import get_logger, set_verbosity, get_seed, get_output_dir
from ..core import ExplabError, TooFewSamplesError
from ..utils import UNITS, to_unit, from_unit, rate_grid, write_csv
from ..utils import write_json
from ..channel import bsc, load_channel_file, load_distribution_file
from ..channel import uniform_distribution, mutual_information
from ..channel import bhattacharyya_matrix
from ..exponents import exponent_table, critical_rate, e_trc
from ..refdist import ReferenceDistribution, reference_curve
from ..ensemble import EnsembleConfig, run_concentration_experiment
from ..ensemble import save_run, gaussianity_diagnostic
from ..ensemble import DEFAULT_BINS, MIN_DIAGNOSTIC_SAMPLES
from .verify import SUITES, run_suites

logger = get_logger()

CURVE_POINTS = 200
EXPONENT_COLUMNS = ["E_rce", "E_ex", "E_sp", "E_trc"]


class RunManifest(object):
    """
    What a command did: its arguments, resolved config, seed and outputs

    Written as manifest.json next to the outputs it lists.
    """
    def __init__(self, command, argv, unit="nats", seed=None):
        self.command = command
        self.argv = list(argv)
        self.unit = unit
        self.seed = seed
        self.config = OrderedDict()
        self.outputs = []
        self.extra = OrderedDict()
        self.start_time_ = time.time()

    def add_output(self, path):
        self.outputs.append(os.path.basename(path))

    def to_dict(self):
        d = OrderedDict()
        d["command"] = self.command
        d["argv"] = self.argv
        d["config"] = self.config
        d["seed"] = self.seed
        d["unit"] = self.unit
        d["outputs"] = self.outputs
        d["duration_seconds"] = time.time() - self.start_time_
        d.update(self.extra)
        return d

    def write(self, out_dir):
        path = os.path.join(out_dir, "manifest.json")
        self.outputs.append("manifest.json")
        write_json(path, self.to_dict())
        logger.info("Wrote manifest %s" % path)
        return path


def _channel_and_q(args):
    q = None
    if args.bsc is not None:
        ch = bsc(args.bsc)
    else:
        ch, q = load_channel_file(args.channel)
    if args.q is not None and args.q != "uniform":
        q = load_distribution_file(args.q, size=ch.input_size)
    elif args.q == "uniform" or q is None:
        q = uniform_distribution(ch.input_size)
    return ch, q


def _channel_config(args, ch, q):
    config = OrderedDict()
    config["channel"] = ch.to_dict()
    config["q"] = q.q.tolist()
    return config


def cmd_exponents(args, argv):
    """ Exponent table over a rate grid, written as exponents.csv """
    ch, q = _channel_and_q(args)
    capacity = mutual_information(ch, q)
    if args.rate:
        rates = from_unit(args.rate, args.unit)
    else:
        rates = rate_grid(capacity, args.rates)
    out_dir = get_output_dir(args.out)
    manifest = RunManifest("exponents", argv, unit=args.unit)
    manifest.config = _channel_config(args, ch, q)
    manifest.config["rates_nats"] = [float(r) for r in rates]

    rows = exponent_table(rates, q, ch, n_threads=args.threads)
    r_crit = critical_rate(q, ch)
    header = ["rate"] + EXPONENT_COLUMNS + ["above_critical", "trc_branch"]
    table = []
    for row in rows:
        values = to_unit([row["rate"], row["e_rce"], row["e_ex"], row["e_sp"],
                          row["e_trc"]], args.unit)
        table.append(list(values) + [str(row["above_critical"]),
                                     row["trc_branch"]])
    path = write_csv(os.path.join(out_dir, "exponents.csv"), header, table)
    manifest.add_output(path)
    manifest.extra["critical_rate"] = float(to_unit(r_crit, args.unit))
    manifest.extra["mutual_information"] = float(to_unit(capacity, args.unit))
    manifest.write(out_dir)
    logger.info("Exponents at %i rates written to %s" % (len(rows), path))
    return 0


def _write_reference_curves(run, out_dir, manifest, unit="nats"):
    std = np.sqrt(run.variance)
    if not std > 0:
        logger.warning("Samples have no spread, reference curves skipped")
        return
    lo, hi = run.samples.min(), run.samples.max()
    pad = 0.25 * (hi - lo)
    grid = np.linspace(lo - pad, hi + pad, CURVE_POINTS)
    L = run.config.m * (run.config.m - 1)
    refs = [("reference_gaussian.csv",
             ReferenceDistribution("StandardGaussian")),
            ("reference_min_gaussians.csv",
             ReferenceDistribution("NormalizedMinOfGaussians", L))]
    for name, ref in refs:
        curve = reference_curve(ref, grid, loc=run.mean, scale=std)
        # a density per bit is ln 2 times the density per nat
        curve[:, 0] = to_unit(curve[:, 0], unit)
        curve[:, 1] = curve[:, 1] / to_unit(1., unit)
        path = write_csv(os.path.join(out_dir, name), ["x", "pdf", "cdf"],
                         curve)
        manifest.add_output(path)


def cmd_simulate(args, argv):
    """ Concentration experiment: V_n / n samples, histogram and references """
    ch, q = _channel_and_q(args)
    seed = get_seed(args.seed)
    config = EnsembleConfig(args.ensemble, q, args.n, args.m,
                            trials=args.trials, seed=seed)
    out_dir = get_output_dir(args.out)
    manifest = RunManifest("simulate", argv, unit=args.unit, seed=seed)
    manifest.config = _channel_config(args, ch, q)
    manifest.config["ensemble"] = config.to_dict()
    manifest.config["bins"] = args.bins

    d = bhattacharyya_matrix(ch)
    run = run_concentration_experiment(config, d, bins=args.bins,
                                       n_threads=args.threads)
    for path in save_run(run, out_dir, unit=args.unit):
        manifest.add_output(path)
    _write_reference_curves(run, out_dir, manifest, unit=args.unit)

    scale = float(to_unit(1., args.unit))
    manifest.extra["e_trc_zero_rate"] = e_trc(0., q, ch).value * scale
    manifest.extra["sample_mean"] = run.mean * scale
    manifest.extra["sample_variance"] = run.variance * scale ** 2
    try:
        manifest.extra["diagnostics"] = gaussianity_diagnostic(run)
    except TooFewSamplesError:
        logger.warning("Only %i samples, distribution diagnostics are "
                       "suppressed below %i"
                       % (len(run.samples), MIN_DIAGNOSTIC_SAMPLES))
    manifest.write(out_dir)
    return 0


def cmd_verify(args, argv):
    results, all_passed = run_suites(args.suite)
    if args.out is not None:
        out_dir = get_output_dir(args.out)
        manifest = RunManifest("verify", argv)
        path = write_csv(os.path.join(out_dir, "verify.csv"),
                         ["suite", "check", "passed", "residual",
                          "tolerance"],
                         [(r.suite, r.name, str(int(r.passed)), r.residual,
                           r.tolerance) for r in results])
        manifest.add_output(path)
        manifest.extra["all_passed"] = all_passed
        manifest.write(out_dir)
    return 0 if all_passed else 1


def _add_channel_flags(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--channel", help="JSON file with 'W' and optional 'Q'")
    source.add_argument("--bsc", type=float, help="BSC crossover probability")
    parser.add_argument("--q", default=None,
                        help="'uniform' or a JSON file holding Q")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="explab",
        description="Error exponents of discrete memoryless channels and "
                    "concentration experiments over random code ensembles.")
    parser.add_argument("--verbose", action="store_true",
                        help="Log per-iteration detail")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("exponents", help="Exponent table over rates")
    _add_channel_flags(p)
    p.add_argument("--rate", type=float, action="append",
                   help="Rate in --unit, repeatable")
    p.add_argument("--rates", type=int, default=50,
                   help="Number of evenly spaced rates in [0, I(Q,W))")
    p.add_argument("--unit", choices=UNITS, default="nats")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="Output directory")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("simulate", help="Concentration experiment")
    _add_channel_flags(p)
    p.add_argument("--ensemble", choices=("iid", "cc"), default="iid")
    p.add_argument("--m", type=int, default=4, help="Number of codewords")
    p.add_argument("--n", type=int, default=10000, help="Blocklength")
    p.add_argument("--trials", type=int, default=10 ** 5)
    p.add_argument("--seed", type=int, default=None,
                   help="Master seed, EXPLAB_SEED overrides")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--unit", choices=UNITS, default="nats",
                   help="Unit of samples, histogram and reference curves")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="Output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Run consistency suites")
    p.add_argument("--suite", action="append",
                   choices=list(SUITES.keys()) + ["all"],
                   help="Suite to run, repeatable (default all)")
    p.add_argument("--out", default=None,
                   help="Write verify.csv and manifest.json here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    """
    Entry point of the explab console script

    Returns 0 on success, 1 on a computation error or failed check, 2 on a
    usage error.
    """
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    set_verbosity(args.verbose)
    if getattr(args, "suite", None) is None and args.command == "verify":
        args.suite = ["all"]
    try:
        return args.func(args, argv)
    except ExplabError as e:
        logger.error("%s: %s" % (type(e).__name__, e))
        return 1
    except ValueError as e:
        logger.error("Usage error: %s" % e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
