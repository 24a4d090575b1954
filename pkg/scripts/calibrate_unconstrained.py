"""Fit the base-learner constants A, B on hint-free random-unit traces.

For every trace and comparator u the regret of the vector base learner must
satisfy ``R(u) <= eps + A a(u) + B b(u)`` with ``(a, b)`` from
``base_bound_shape``. The smallest such pair (in the sense of minimising the
bound averaged over all instances) is found by linear programming.

    python scripts/calibrate_unconstrained.py --trials 20 --T 1000 10000
"""

from __future__ import annotations

import argparse
import json

import numpy as np
from scipy.optimize import linprog

from hintolo.adversaries import random_unit_vectors
from hintolo.core import inner, norm
from hintolo.harness.runner import comparator_set
from hintolo.unconstrained import base_bound_shape, base_d_init, base_d_update


def base_regrets(T: int, trials: int, d: int, epsilon: float, U: np.ndarray, seed: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, T, d]))
    C = random_unit_vectors(d, rng, (T, trials))
    state = base_d_init(d, epsilon, (trials,))
    loss = np.zeros(trials)
    for t in range(T):
        loss += inner(C[t], state.w)
        state = base_d_update(state, C[t])
    total = C.sum(axis=0)
    regret = loss[:, None] - total @ U.T
    sigma = inner(C, C).sum(axis=0)
    return regret, sigma


def fit(rows_a, rows_b, rows_r, epsilon: float) -> tuple[float, float]:
    a, b, r = (np.concatenate(v).ravel() for v in (rows_a, rows_b, rows_r))
    res = linprog(
        c=[a.mean(), b.mean()],
        A_ub=-np.column_stack([a, b]),
        b_ub=-(r - epsilon),
        bounds=[(0, None), (0, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(res.message)
    return float(res.x[0]), float(res.x[1])


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, nargs="+", default=[1000, 10000])
    p.add_argument("--d", type=int, nargs="+", default=[2, 4])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--comparators", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args(argv)
    rows_a, rows_b, rows_r = [], [], []
    worst = 0.0
    for d in args.d:
        U = comparator_set(args.seed, d, args.comparators, norm_range=(0.5, 5.0), with_origin=False)
        for T in args.T:
            regret, sigma = base_regrets(T, args.trials, d, args.epsilon, U, args.seed)
            a, b = base_bound_shape(norm(U)[None, :], sigma[:, None], T, args.epsilon)
            rows_a.append(np.broadcast_to(a, regret.shape))
            rows_b.append(np.broadcast_to(b, regret.shape))
            rows_r.append(regret)
            worst = max(worst, float(regret.max()))
    A, B = fit(rows_a, rows_b, rows_r, args.epsilon)
    print(json.dumps({"A": A, "B": B, "max_regret": worst}, indent=2))


if __name__ == "__main__":
    main()
