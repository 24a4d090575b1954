"""Randomised self-checks run by ``hintolo verify``.

Each suite draws ``cases`` random instances and returns the number of
failed checks together with the number performed.
"""

from __future__ import annotations

import math

import numpy as np

from ..adversaries import (
    det_lb_next,
    expected_hint_block,
    lb1_block,
    random_unit_vectors,
    sum_lengths_gap,
)
from ..core import (
    PrefixState,
    ball_objective,
    ball_regularized_argmin,
    inner,
    log_ratio_sum,
    norm,
    project_to_ball,
)
from ..expected_hints import eh_init, eh_play, eh_round, eh_surrogate_eval
from ..ftrl import prefix_regrets, run_ftrl, stability_violations
from ..hinted import RoundEnv, hinted_init, hinted_round, run_hinted_batch
from ..ogd import ogd_bound_rhs, run_ogd, switch_once_grid, switch_once_oracle
from ..rng import COIN, round_uniforms, stream_key
from ..unconstrained import UncConfig, det_hint_gain_bounds, run_unc_batch
from ..adversaries import alpha_good_block

SUITES = ("core", "ftrl", "ogd", "hinted", "unconstrained", "expected", "adversaries")


def random_ball_points(rng, d: int, n: int) -> np.ndarray:
    """Uniform samples from the unit ball."""
    dirs = random_unit_vectors(d, rng, (n,))
    return dirs * rng.uniform(size=n)[:, None] ** (1.0 / d)


def admissible_feedback(rng, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Random ``(z, sigma)`` with ``z^2 <= 4 sigma``."""
    sigma = rng.uniform(size=T) ** rng.uniform(0.2, 3.0)
    z = 2.0 * np.sqrt(sigma) * rng.uniform(-1.0, 1.0, size=T)
    return z, sigma


def check_core(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        d = int(rng.integers(1, 6))
        g = rng.standard_normal(d) * rng.uniform(0, 3)
        r = rng.uniform(0.05, 4.0)
        x = ball_regularized_argmin(g, r)
        pts = random_ball_points(rng, d, 10_000)
        fails += int(norm(x) > 1 + 1e-12) + int(ball_objective(x, g, r) > ball_objective(pts, g, r).min() + 1e-12)
        fails += int(np.any(norm(project_to_ball(pts * 3.0)) > 1 + 1e-12))
        a = rng.exponential(size=int(rng.integers(1, 50)))
        fails += int(log_ratio_sum(a) > math.log1p(a.sum()) + 1e-12)
        checks += 4
    return fails, checks


def check_ftrl(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        d = int(rng.integers(1, 6))
        T = int(rng.integers(1, 400))
        C = random_unit_vectors(d, rng, (T,)) * rng.uniform(size=(T, 1))
        xs = run_ftrl(C)
        reg = prefix_regrets(C, xs[:-1])
        fails += int(np.any(reg > 4.5 * np.sqrt(1 + np.cumsum(inner(C, C))) + 1e-9))
        stab = stability_violations(C, xs, float(rng.uniform(0.05, 1.0)))
        fails += int(sum(int(v) for v in stab.values()) > 0)
        checks += 2
    return fails, checks


def check_ogd(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        T = int(rng.integers(1, 300))
        lam = float(rng.choice([1.0, 10.0, 40.0]))
        z, sigma = admissible_feedback(rng, T)
        ps = run_ogd(z, sigma, lam)
        val = switch_once_oracle(z, sigma, lam, ps)
        fails += int(val > ogd_bound_rhs(sigma.sum(), lam) + 1e-9)
        if T <= 12:
            fails += int(abs(val - switch_once_grid(z, sigma, lam, ps)) > 1e-6)
            checks += 1
        checks += 1
    return fails, checks


def check_hinted(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for case in range(cases):
        alpha = float(rng.uniform(0.1, 1.0))
        T = int(rng.integers(1, 60))
        H, C = lb1_block(alpha, rng, (T,))
        key = stream_key(int(rng.integers(1 << 30)), case, COIN)
        state = hinted_init(alpha, 2, key)
        recs = []
        for t in range(T):
            rec, state = hinted_round(state, RoundEnv(C[t], H[t]))
            recs.append(rec)
        batch = run_hinted_batch(C[:, None], H[:, None], alpha, round_uniforms(key, 1, T)[:, None])
        fails += int(not np.array_equal([r.p_t for r in recs], batch.p[:, 0]))
        fails += int(not np.allclose([r.loss for r in recs], batch.loss[:, 0], atol=1e-12, rtol=0))
        fails += int(any(r.z_t**2 > 4 * r.sigma_t + 1e-9 for r in recs))
        checks += 3
    return fails, checks


def check_unconstrained(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        alpha = float(rng.uniform(0.1, 1.0))
        K = float(rng.choice([1.0, 2.0, 5.0]))
        T = int(rng.integers(1, 500))
        d = int(rng.integers(1, 4))
        C = random_unit_vectors(d, rng, (T, 1)) * rng.uniform(0.2, 1.0, size=(T, 1, 1))
        H = alpha_good_block(C, alpha, rng)
        batch = run_unc_batch(C, H, UncConfig(1.0, alpha, K, "deterministic"))
        sig = inner(C, C)[:, 0]
        lo, hi = det_hint_gain_bounds(np.cumsum(sig) - sig, K, alpha)
        Z = batch.hint_gain_cum[:, 0]
        fails += int(np.any(Z < lo - 1e-9)) + int(np.any(Z > hi + 1e-9))
        checks += 2
    return fails, checks


def check_expected(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        d = int(rng.integers(1, 5))
        alpha = float(rng.uniform(0.1, 1.0))
        state = eh_init(alpha, d)
        for _ in range(int(rng.integers(1, 50))):
            c = random_unit_vectors(d, rng, ()) * rng.uniform()
            h = random_ball_points(rng, d, 1)[0]
            raw, played, _ = eh_play(state.x_bar, h)
            fails += int(abs(inner(c, raw) - eh_surrogate_eval(state.x_bar, c, h)) > 1e-12)
            fails += int(norm(raw) > 1 + 1e-12)
            _, _, state = eh_round(state, h, c)
            checks += 2
        c = random_unit_vectors(d, rng, ())
        h = expected_hint_block(np.tile(c, (2000, 1)), alpha, 2.0, rng)
        fails += int(inner(c, h).mean() < alpha * inner(c, c) - 3 * inner(c, h).std() / math.sqrt(2000))
        checks += 1
    return fails, checks


def check_adversaries(rng, cases: int) -> tuple[int, int]:
    fails = checks = 0
    for _ in range(cases):
        alpha = float(rng.uniform(0.05, 1.0))
        H, C = lb1_block(alpha, rng, (50,))
        fails += int(np.any(np.abs(inner(C, H) - alpha) > 1e-12)) + int(np.any(np.abs(norm(C) - 1) > 1e-12))
        prefix = PrefixState.zero(4)
        cs, qs = [], []
        for _ in range(int(rng.integers(1, 40))):
            q = bool(rng.uniform() < 0.3)
            x = random_ball_points(rng, 4, 1)[0]
            _, c = det_lb_next(q, x, prefix)
            if not q:
                fails += int(abs(c[0]) > 1e-12) + int(abs(inner(c, x)) > 1e-12)
                checks += 2
            prefix = prefix.advance(c)
            cs.append(c)
            qs.append(q)
            fails += int(sum_lengths_gap(np.array(cs), np.array(qs)) > 1e-9)
            checks += 1
        checks += 2
    return fails, checks


SUITE_FUNCS = {
    "core": check_core,
    "ftrl": check_ftrl,
    "ogd": check_ogd,
    "hinted": check_hinted,
    "unconstrained": check_unconstrained,
    "expected": check_expected,
    "adversaries": check_adversaries,
}


def run_suite(name: str, cases: int, seed: int) -> dict[str, tuple[int, int]]:
    names = SUITES if name == "all" else (name,)
    out = {}
    for i, n in enumerate(names):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        out[n] = SUITE_FUNCS[n](rng, cases)
    return out
