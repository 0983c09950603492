"""``bcs run <experiment>``: run a seeded experiment and write its CSV outputs.

Settings come from the experiment's defaults, then an optional key=value
config file, then command-line flags (flags win). On failure a single
``error: <Kind>: <message>`` line goes to stderr and the exit code is
nonzero.
"""

from __future__ import annotations

import argparse
import sys

from .errors import BCSError, ConfigInvalid
from .experiments import EXPERIMENTS, _parse_real, default_config, load_config, run_experiment, summarize, with_overrides

EXIT_CONFIG = 2
EXIT_RUNTIME = 1


def _snr_list(text):
    try:
        return tuple(_parse_real(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR list {text!r}") from None


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text} is not a 64-bit unsigned integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="bcs", description="Blind compressed sensing experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", metavar="FILE", help="key=value settings file")
    run.add_argument("--seed", type=_u64, help="base seed (64-bit unsigned)")
    run.add_argument("--jobs", type=int, help="trials run concurrently")
    run.add_argument("--out", metavar="DIR", help="output directory")
    run.add_argument("--snr", type=_snr_list, metavar="LIST", help="comma-separated SNRs in dB, 'inf' for noiseless")
    run.add_argument("--k", type=int, help="sparsity level (restricts a k sweep to this value)")
    run.add_argument("--signals", type=int, metavar="INT", help="number of signals N (restricts an N sweep)")
    run.add_argument("--trials", type=int, help="number of trials")
    run.add_argument("--quiet", action="store_true", help="do not print the summary table")
    return parser


def config_from_args(args):
    cfg = default_config(args.experiment)
    if args.config:
        cfg = with_overrides(cfg, **load_config(args.config))
    sweep_k = cfg.experiment in ("fbcs-ksweep", "sparse-ksweep", "obd-ksweep")
    sweep_n = cfg.experiment in ("obd-nsweep", "obd-ksweep")
    return with_overrides(
        cfg,
        seed=args.seed,
        jobs=args.jobs,
        output_dir=args.out,
        snr_list=args.snr,
        k=args.k,
        k_list=(args.k,) if args.k is not None and sweep_k else None,
        N=args.signals,
        N_list=(args.signals,) if args.signals is not None and sweep_n else None,
        trials=args.trials,
    )


def _print_summary(rows, out):
    print(f"{'snr':>6} {'k':>3} {'N':>5} {'method':<17} {'error %':>12} {'miss %':>7} {'fail':>4}", file=out)
    for s in summarize(rows):
        print(
            f"{s['snr']:>6g} {s['k']:>3} {s['N']:>5} {s['method']:<17} "
            f"{s['mean_error_pct']:>12.4g} {s['miss_detected_pct']:>7.2f} {s['failures']:>4}",
            file=out,
        )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg)
    except ConfigInvalid as exc:
        print(f"error: ConfigInvalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BCSError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        _print_summary(report.rows, sys.stdout)
        print(f"wrote {cfg.output_dir}/report.csv", file=sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
