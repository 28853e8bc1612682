"""``subrk`` command line."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import SUITES, default_config, emit_report, load_config, run_suite


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subrk", description="Numerical checks of sub-Riemannian heat kernel bounds.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("suite", choices=sorted(SUITES))
    run.add_argument("--config", help="JSON config file (defaults to the committed config of the suite)")
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_parser("list", help="list the suites")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        width = max(map(len, SUITES))
        for name, (_, desc) in SUITES.items():
            print(f"{name:<{width}}  {desc}")
        return 0
    try:
        cfg = load_config(args.config) if args.config else default_config(args.suite)
        if cfg.suite != args.suite:
            raise ValueError(f"config is for suite {cfg.suite!r}, not {args.suite!r}")
        over = {k: v for k, v in (("seed", args.seed), ("samples", args.samples)) if v is not None}
        if over:
            cfg = dataclasses.replace(cfg, **over)
        report = run_suite(cfg)
        text = emit_report(report, args.format, args.out)
    except Exception as exc:  # noqa: BLE001 - reported as an execution error
        print(f"subrk: error: {exc}", file=sys.stderr)
        return 3
    if args.out is None:
        sys.stdout.write(text)
    s = report.summary
    print(f"{report.suite}: {s['pass']} pass, {s['fail']} fail, {s['inconclusive']} inconclusive "
          f"({report.wall_time:.1f}s)", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
