"""Command-line front end.

Subcommands: predict (closed-form limits, no RNG), simulate (one config
file), sweep (figure presets), spike (rank-one recovery grid), selftest
(invariant suites), plot (render an existing CSV). Exit codes: 0 success,
2 usage or validation failure, 3 runtime numerical failure.

Human-mode numbers print with 6 decimals; CSVs keep shortest-round-trip
floats. COVMEANS_OUTPUT_DIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .asymptotics import (
    ARITHMETIC,
    HARMONIC,
    limiting_law,
    op_error_limit,
    overlap_gap,
    spike_prediction,
    support_edges,
)
from .errors import ConfigError, CovmeansError, ValidationError
from .harness import (
    load_config,
    run_experiment,
    run_sweep,
    spike_experiment,
    write_csv,
)
from .selftest import run_selftest

OUTPUT_DIR_ENV = "COVMEANS_OUTPUT_DIR"


def _kv(key: str, value: float) -> None:
    print(f"{key} = {value:.6f}")


def _output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _resolve_output(flag_value, config_value, default_name: str) -> Path:
    if flag_value:
        return Path(flag_value)
    if config_value:
        return Path(config_value)
    return _output_dir() / default_name


def _maybe_plot(args, csv_path: Path) -> None:
    if getattr(args, "plot", False):
        from .figures import render_csv  # deferred: pulls in matplotlib

        for path in render_csv(csv_path):
            print(f"rendered {path}")


def cmd_predict(args) -> int:
    means = (ARITHMETIC, HARMONIC) if args.mean == "both" else (args.mean,)
    if args.theta is not None and HARMONIC in means and args.splits != 2:
        raise ValidationError(
            f"spike predictions are derived for 2 splits, got {args.splits}"
        )
    for kind in means:
        law = limiting_law(args.gamma, kind, args.splits)
        lower, upper = support_edges(
            args.gamma, kind, args.splits if kind == HARMONIC else None
        )
        print(f"[{kind}]")
        _kv("E_minus", lower)
        _kv("E_plus", upper)
        _kv("op_limit", op_error_limit(args.gamma, kind, args.splits))
        # exact for every split count, unlike the fixed two-split constant
        _kv("frob_limit", law.moment(2) - 2.0 * law.moment(1) + 1.0)
        if args.theta is not None:
            pred = spike_prediction(args.theta, args.gamma, kind)
            _kv("threshold", pred.threshold)
            _kv("lambda1", pred.lambda1_limit)
            _kv("overlap_sq", pred.overlap_sq_limit)
    if args.theta is not None and len(means) == 2:
        try:
            _kv("overlap_gap", overlap_gap(args.theta, args.gamma))
        except ValidationError:
            pass  # subcritical for the harmonic mean: no gap defined
    return 0


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    records = run_experiment(config)
    out = _resolve_output(args.output, config.output_path, f"{config.experiment_id}.csv")
    write_csv(records, out)
    print(
        f"wrote {len(records)} rows ({config.trials} trials x "
        f"{len(config.estimators)} estimators) to {out}"
    )
    _maybe_plot(args, out)
    return 0


def cmd_sweep(args) -> int:
    def progress(config):
        print(f"done {config.experiment_id} ({config.trials} trials)")

    records = run_sweep(args.figure, args.scale, args.seed, progress=progress)
    out = _resolve_output(args.output, None, f"fig{args.figure}.csv")
    write_csv(records, out)
    print(f"wrote {len(records)} rows to {out}")
    _maybe_plot(args, out)
    return 0


def cmd_spike(args) -> int:
    def progress(config):
        print(f"done {config.experiment_id} ({config.trials} trials)")

    records = spike_experiment(
        args.p, args.gamma, args.theta, args.trials, args.field, args.seed,
        progress=progress,
    )
    out = _resolve_output(args.output, None, "spike.csv")
    write_csv(records, out)
    print(f"wrote {len(records)} rows to {out}")
    _maybe_plot(args, out)
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest()
    for result in results:
        tag = "ok  " if result.passed else "FAIL"
        print(f"{tag} {result.name}: {result.detail}")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed")
        return 3
    print(f"all {len(results)} checks passed")
    return 0


def cmd_plot(args) -> int:
    from .figures import render_csv  # deferred: pulls in matplotlib

    out_dir = args.output_dir or _output_dir()
    for path in render_csv(args.csv, out_dir):
        print(f"rendered {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covmeans",
        description="Harmonic vs. arithmetic means of Wishart matrices: "
        "closed-form limits and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="print closed-form limits (no RNG)")
    p.add_argument("--gamma", type=float, required=True, help="ratio p / T")
    p.add_argument("--splits", type=int, default=2, help="split count N (default 2)")
    p.add_argument("--theta", type=float, default=None, help="spike size for rank-one predictions")
    p.add_argument("--mean", choices=(ARITHMETIC, HARMONIC, "both"), default="both")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run one experiment from a config file")
    p.add_argument("--config", required=True, help="path to a key = value config")
    p.add_argument("--output", default=None, help="CSV path (overrides config and env)")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a figure preset grid")
    p.add_argument("--figure", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--scale", type=float, default=1.0, help="multiplies p and trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="CSV path")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spike", help="rank-one spike recovery experiment")
    p.add_argument("--p", type=int, required=True, help="dimension")
    p.add_argument("--gamma", type=float, required=True, help="ratio p / T")
    p.add_argument("--theta", type=float, nargs="+", required=True, help="spike sizes")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--field", choices=("real", "complex"), default="complex")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="CSV path")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_spike)

    p = sub.add_parser("selftest", help="run the invariant suites")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("plot", help="render figures from an existing results CSV")
    p.add_argument("--csv", required=True, help="results CSV to render")
    p.add_argument("--output-dir", default=None, help="directory for PNGs")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CovmeansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
