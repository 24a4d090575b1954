"""Regret growth exponent of one learner over a range of horizons.

    python scripts/growth_exponent.py --algo hinted --env lb1 --alpha 0.25 --T 1000 10000 100000
    python scripts/growth_exponent.py --algo hinted --env lb1 --alpha 1 --capped

With ``--capped`` the hint budget is ``sqrt(T)/(10 alpha)`` per horizon, so each
horizon is a separate run; otherwise one run at the largest horizon is read at
checkpoints (the learners do not depend on T).
"""

from __future__ import annotations

import argparse
import json
import math

from hintolo.harness.config import build_config
from hintolo.harness.runner import run_experiment
from hintolo.harness.stats import log_growth_exponent


def mean_regrets(args) -> list[float]:
    base = dict(algo=args.algo, env=args.env, alpha=args.alpha, K=args.K, trials=args.trials, seed=args.seed)
    if args.hint_policy:
        base["hint_policy"] = args.hint_policy
    if args.capped:
        out = []
        for T in args.T:
            _, s = run_experiment(build_config(T=T, query_cap=int(math.sqrt(T) / (10 * args.alpha)), **base))
            out.append(s["mean_regret"])
        return out
    _, s = run_experiment(build_config(T=max(args.T), checkpoints=tuple(args.T), **base))
    return [s["checkpoint_mean_regret"][str(T)] for T in args.T]


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--algo", default="hinted")
    p.add_argument("--env", default="lb1")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--hint-policy", default=None)
    p.add_argument("--T", type=int, nargs="+", default=[1000, 10000, 100000])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capped", action="store_true")
    args = p.parse_args(argv)
    args.T = sorted(args.T)
    means = mean_regrets(args)
    print(json.dumps({
        "T": args.T,
        "mean_regret": means,
        "exponent": log_growth_exponent(args.T, means),
    }, indent=2))


if __name__ == "__main__":
    main()
