"""Command-line entry point.

Subcommands map one-to-one onto the run kinds; flags common to all of them
are --config (JSON file of ExperimentConfig fields), --seed, --out, and
--verbose.  Exit status: 0 all checks passed, 1 a check failed, 2 config
error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import ExperimentConfig, run

KINDS = {
    "fool": "build a fooling witness and verify vanishing + integral floor",
    "quad": "sweep worst-case quadrature gap certificates over n",
    "seq": "verify a super-exponential sequence with exact arithmetic",
    "adv": "construct an adversarial partial-sum target",
    "train": "run the particle gradient flow with growth diagnostics",
    "rates": "train and fit the log-log risk decay rate",
}
# "report" is registered separately: it replays artifacts instead of running


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codlab",
        description="desk-scale experiments on slow training of shallow networks")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, help_text in KINDS.items():
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("--config", help="JSON config file", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--verbose", action="store_true")
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--activation", default=None)
        p.add_argument("--T-end", type=float, default=None, dest="T_end")
    rep = sub.add_parser("report",
                         help="re-render plots and summary from a run directory")
    rep.add_argument("run_dir", help="directory written by a previous run")
    rep.add_argument("--verbose", action="store_true")
    return parser


def _report(args) -> int:
    import json
    from pathlib import Path
    from .harness import emit_plots
    run_dir = Path(args.run_dir)
    report_path = run_dir / "report.json"
    if not run_dir.is_dir() or not report_path.exists():
        print(f"config error: {run_dir} is not a run directory with report.json")
        return 2
    try:
        made = emit_plots(run_dir)
    except ValueError as exc:
        print(f"config error: {exc}")
        return 2
    with open(report_path) as fh:
        report = json.load(fh)
    summary = {k: v for k, v in report.items() if k != "config"}
    if args.verbose:
        print(json.dumps(summary, indent=2, default=str))
    for path in made:
        print(f"wrote {path}")
    status = 0 if report.get("passed", True) else 1
    print(f"report: {'PASS' if status == 0 else 'FAIL'} -> {run_dir}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.kind == "report":
        return _report(args)
    try:
        if args.config:
            config = ExperimentConfig.from_file(args.config)
            config.kind = args.kind
        else:
            config = ExperimentConfig(kind=args.kind)
    except (OSError, ValueError, TypeError) as exc:
        print(f"config error: {exc}")
        return 2
    for name in ("seed", "d", "r", "n", "m", "activation", "T_end"):
        value = getattr(args, name)
        if value is not None:
            setattr(config, name, value)
    if args.out is not None:
        config.out_dir = args.out
    return run(config, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
