"""Command-line front end.

Four subcommands cover the reproduction workflow:

``estimate``
    one run of the configured method, human-readable result on stdout.
``experiment``
    K replicates (optionally in parallel), summary JSON on stdout and a
    ``report.json`` + ``replicates.csv`` pair under ``--out``.
``validate``
    the executable invariant suites; nonzero exit if any fail.
``figure``
    CSV data behind a named figure, computed from an existing report if
    one is found in ``--out``, else by running the experiment first.

Configs are flat ``key = value`` files (see ``parse_config_text``); the
``--seed/--replicates/--workers/--method/--out`` flags override file
values.  With ``--strict`` any aborted replicate makes the exit code
nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (FIGURE_IDS, load_config, load_report, run_experiment,
                      save_report, emit_figure_data)
from .validation import SUITES, run_suites


def _add_common(sp: argparse.ArgumentParser, with_method: bool = True) -> None:
    sp.add_argument("--config", required=True, help="flat key = value config file")
    sp.add_argument("--seed", type=int, help="override the master seed")
    sp.add_argument("--replicates", type=int, help="override the replicate count")
    sp.add_argument("--workers", type=int, help="override the worker count")
    sp.add_argument("--out", help="output directory for report files")
    if with_method:
        sp.add_argument("--method", help="override the estimation method")
    sp.add_argument("--strict", action="store_true",
                    help="exit nonzero if any replicate aborts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lastparticle",
        description="Rare-event probability estimation on absorbed Markov "
                    "chain trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run the configured method once")
    _add_common(est)

    exp = sub.add_parser("experiment", help="run K replicates and summarize")
    _add_common(exp)

    val = sub.add_parser("validate", help="run the invariant suites")
    val.add_argument("--suite", help="comma-separated suite keys "
                                     f"(default all: {','.join(SUITES)})")

    fig = sub.add_parser("figure", help="emit CSV data for one figure")
    _add_common(fig)
    fig.add_argument("--figure", required=True, choices=FIGURE_IDS,
                     help="figure identifier")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("seed", "replicates", "workers", "out", "method")
    return {k: getattr(args, k, None) for k in keys}


def _print_single(report: dict) -> None:
    row = report["replicates"][0]
    if row["status"] != "ok":
        print(f"aborted: {row['error']}")
        return
    r = row["result"]
    if "p_hat" in r:
        print(f"p_hat      = {r['p_hat']:.6e}")
        print(f"interval   = [{r['ci_low']:.6e}, {r['ci_high']:.6e}]")
        print(f"m          = {r['m']} level iterations "
              f"(N={r['n_particles']}, T={r['hm_iterations']})")
        if r["acceptance_log"]:
            import numpy as np
            print(f"acceptance = {float(np.mean(r['acceptance_log'])):.3f} mean")
        if r["tie_warnings"]:
            print(f"ties       = {r['tie_warnings']} tied level iterations")
    else:
        print(f"p_tilde    = {r['p_tilde']:.6e}")
        print(f"interval   = [{r['ci_low']:.6e}, {r['ci_high']:.6e}] "
              f"(exact binomial, {r['confidence']:.2f})")
        print(f"successes  = {r['successes']} / {r['trials']}")
    print(f"wall_time  = {r['wall_time']:.3f} s")


def _run_to_report(args: argparse.Namespace, single: bool) -> tuple[dict, int]:
    over = _overrides(args)
    if single:
        over["replicates"] = 1
        over["workers"] = 1
    config = load_config(args.config, over)
    report = run_experiment(config)
    if config.out:
        path = save_report(report, config.out)
        print(f"report written to {path}", file=sys.stderr)
    aborted = report["summary"]["aborted"]
    code = 1 if (args.strict and aborted) else 0
    return report, code


def cmd_estimate(args: argparse.Namespace) -> int:
    report, code = _run_to_report(args, single=True)
    _print_single(report)
    return code


def cmd_experiment(args: argparse.Namespace) -> int:
    report, code = _run_to_report(args, single=False)
    print(json.dumps(report["summary"], indent=2, sort_keys=True))
    return code


def cmd_validate(args: argparse.Namespace) -> int:
    keys = args.suite.split(",") if args.suite else None
    try:
        results = run_suites(keys)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} ({r.key}) {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed} of {len(results)} suites failed")
    return 1 if failed else 0


def cmd_figure(args: argparse.Namespace) -> int:
    if not args.out:
        print("--out is required to place the figure CSV", file=sys.stderr)
        return 2
    out = Path(args.out)
    code = 0
    if (out / "report.json").exists():
        report = load_report(out / "report.json")
    else:
        report, code = _run_to_report(args, single=False)
    target = out / f"{args.figure}.csv"
    emit_figure_data(report, args.figure, target)
    print(f"figure data written to {target}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"estimate": cmd_estimate, "experiment": cmd_experiment,
                "validate": cmd_validate, "figure": cmd_figure}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
