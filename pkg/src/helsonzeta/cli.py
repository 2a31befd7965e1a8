"""Command-line front end.

Subcommands:
  plan    validate a config and print the canonical residue plan
  build   run the full pipeline and write artifacts + report
  verify  reload a written chi table and re-check ledger invariants
  eval    evaluate zeta-side quantities against a written table

Exit codes: 0 success / all checks pass, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys

from .chi import load_table, verify_assignment
from .engine import Evaluator, make_evaluator
from .errors import HelsonError
from .pipeline import RunConfig, parse_config, config_to_plan, run_pipeline
from .targets import StripMode, parse_complex


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = RunConfig()
    if args.xmax is not None:
        cfg.x_max = args.xmax
    if args.mode is not None:
        cfg.mode = StripMode(args.mode)
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    return cfg


def _add_common(p: argparse.ArgumentParser, with_out: bool = True):
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--xmax", type=float, default=None,
                   help="prime cutoff for the greedy construction")
    p.add_argument("--mode", choices=["unconditional", "rh"], default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="worker count (accepted for interface stability; "
                        "the current implementation is single-threaded)")
    if with_out:
        p.add_argument("--out", help="artifact output directory")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="helsonzeta",
        description="prescribed zeroes and poles for Helson zeta functions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="validate targets, print the plan")
    _add_common(p_plan, with_out=False)

    p_build = sub.add_parser("build", help="build the table and verify")
    _add_common(p_build)
    p_build.add_argument("--tolerance", type=float, default=None,
                         help="override the two-route kernel tolerance")
    p_build.add_argument("--fourier-check", action="store_true",
                         help="run the Fourier/closed-form kernel cross-check")

    p_verify = sub.add_parser("verify", help="re-check a written table")
    p_verify.add_argument("table", help="path to a chi table file")

    p_eval = sub.add_parser("eval", help="evaluate against a written table")
    p_eval.add_argument("table", help="path to a chi table file")
    p_eval.add_argument("--at", required=True,
                        help="point s, e.g. '0.8+5i' or '2'")
    p_eval.add_argument("--what", choices=["logderiv", "zeta", "residue"],
                        default="logderiv")
    p_eval.add_argument("--threads", type=int, default=1,
                        help="worker count (accepted for interface "
                             "stability; single-threaded)")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except HelsonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2

    if args.command == "plan":
        cfg = _load_config(args)
        plan = config_to_plan(cfg)
        print(f"mode {plan.mode.kind} (alpha = {plan.mode.alpha})")
        for e in plan.entries:
            kind = "zero" if e.residue > 0 else "pole"
            print(f"  [{e.index}] {kind} at {e.location} "
                  f"residue {e.residue:+d}")
        print(f"fingerprint {plan.fingerprint()}")
        return 0

    if args.command == "build":
        cfg = _load_config(args)
        if args.tolerance is not None:
            cfg.eps_q = args.tolerance
        if args.fourier_check:
            cfg.fourier_check = True
        _, rows, report = run_pipeline(cfg)
        print(report, end="")
        return 0 if all(r.ok for r in rows) else 1

    if args.command == "verify":
        assignment, ledger = load_table(args.table)
        ev = _evaluator_from_table(assignment, ledger)
        rows = verify_assignment(assignment, ledger, ev.q)
        ok = True
        for name, measured, bound, row_ok in rows:
            verdict = "PASS" if row_ok else "FAIL"
            print(f"CHECK {name} {float(measured).hex()} "
                  f"{float(bound).hex()} {verdict}")
            ok = ok and row_ok
        return 0 if ok else 1

    if args.command == "eval":
        assignment, ledger = load_table(args.table)
        ev = _evaluator_from_table(assignment, ledger)
        s = parse_complex(args.at)
        if args.what == "logderiv":
            val, bound = ev.log_derivative_g(s)
            print(f"{val!r} +- {bound!r}")
        elif args.what == "zeta":
            if s.real > 1.0:
                val, bound = ev.zeta_euler(s)
                print(f"{val!r} +- {bound!r}")
            else:
                print(repr(ev.zeta_continued(s)))
        else:
            res, err = ev.residue_at(s)
            print(f"{res!r} +- {err!r}")
        return 0

    return 2


def _evaluator_from_table(assignment, ledger) -> Evaluator:
    from .targets import ResiduePlan

    plan = ResiduePlan(assignment.plan_entries, assignment.mode)
    return make_evaluator(assignment, ledger, plan)


if __name__ == "__main__":
    sys.exit(main())
