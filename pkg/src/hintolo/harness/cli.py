"""Command line entry point: ``run``, ``verify`` and ``sweep``."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from .checks import SUITES, run_suite
from .config import ALGOS, build_config
from .runner import all_gated_pass, run_experiment

RUN_FLAGS = {
    # flag: (type, default)
    "algo": (str, "hinted"),
    "env": (str, "random_unit"),
    "alpha": (float, 1.0),
    "T": (int, 1000),
    "d": (int, None),
    "K": (float, 1.0),
    "epsilon": (float, 1.0),
    "trials": (int, 10),
    "seed": (int, 0),
    "bad_frac": (float, 0.0),
    "bad_count": (int, None),
    "bad_mode": (str, "negate"),
    "hint_policy": (str, None),
    "noise_scale": (float, 0.5),
    "hint_magnitude": (float, 2.0),
    "drift": (float, 0.3),
    "replay_path": (str, None),
    "query_cap": (int, None),
    "C_ref": (float, 1.0),
    "out_dir": (str, None),
    "emit": (str, "json"),
}


def _add_run_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    for name, (typ, default) in RUN_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        extra = {"choices": ALGOS} if name == "algo" else {}
        p.add_argument(flag, dest=name, type=typ, default=default if defaults else None, **extra)


def _print_summary(summary: dict, out=sys.stdout) -> None:
    print(
        f"{summary['algo']} on {summary['env']}: T={summary['T']} trials={summary['trials']} "
        f"mean_regret={summary['mean_regret']:.4f} mean_query_cost={summary['mean_query_cost']:.4f}",
        file=out,
    )
    for b in summary["bounds"]:
        flag = "PASS" if b["satisfied"] else "FAIL"
        gate = "" if b["gated"] else " (reported)"
        print(f"  {flag} {b['bound_id']}: lhs={b['lhs']:.6g} rhs={b['rhs']:.6g} [{b['kind']}]{gate}", file=out)


def _run_one(kwargs: dict) -> dict:
    kwargs = dict(kwargs)
    if kwargs.get("emit") and not kwargs.get("out_dir"):
        kwargs["emit"] = ""
    traces, summary = run_experiment(build_config(**kwargs))
    _print_summary(summary)
    return summary


def cmd_run(args) -> int:
    summary = _run_one({k: getattr(args, k) for k in RUN_FLAGS})
    return 0 if all_gated_pass(summary) else 1


def cmd_verify(args) -> int:
    results = run_suite(args.suite, args.cases, args.seed)
    bad = 0
    for name, (fails, checks) in results.items():
        print(f"{'PASS' if fails == 0 else 'FAIL'} {name}: {checks - fails}/{checks} checks")
        bad += fails
    return 0 if bad == 0 else 1


def expand_sweep(base: dict) -> list[dict]:
    """Cartesian product over every list-valued entry of a sweep file."""
    keys = [k for k, v in base.items() if isinstance(v, list) and k != "checkpoints"]
    grids = [base[k] for k in keys]
    runs = []
    for combo in itertools.product(*grids) if keys else [()]:
        run = dict(base)
        run.update(zip(keys, combo))
        runs.append(run)
    return runs


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        file_cfg = json.load(fh)
    unknown = set(file_cfg) - set(RUN_FLAGS)
    if unknown:
        print(f"unknown keys in sweep file: {sorted(unknown)}", file=sys.stderr)
        return 2
    merged = {k: default for k, (_, default) in RUN_FLAGS.items()}
    merged.update(file_cfg)
    merged.update({k: getattr(args, k) for k in RUN_FLAGS if getattr(args, k) is not None})
    ok = True
    runs = expand_sweep(merged)
    for i, run in enumerate(runs):
        if run.get("out_dir") and len(runs) > 1:
            run["out_dir"] = str(Path(run["out_dir"]) / f"run_{i:03d}")
        ok &= all_gated_pass(_run_one(run))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hintolo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    _add_run_flags(run, defaults=True)
    run.set_defaults(func=cmd_run)
    ver = sub.add_parser("verify", help="randomised self-checks")
    ver.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ver.add_argument("--cases", type=int, default=50)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)
    sw = sub.add_parser("sweep", help="run experiments from a JSON file")
    sw.add_argument("--config", required=True)
    _add_run_flags(sw, defaults=False)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
