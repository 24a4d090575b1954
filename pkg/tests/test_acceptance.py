"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE #n PASS|FAIL`` line; the lines are
repeated in the terminal summary. Runs are cached so that the stability
check of criterion 13 reuses the FTRL traces of criteria 1 to 8.
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from hintolo.adversaries import random_unit_vectors
from hintolo.core import ball_objective, ball_regularized_argmin, log_ratio_sum, norm
from hintolo.harness.checks import admissible_feedback, random_ball_points
from hintolo.harness.config import build_config
from hintolo.harness.runner import run_experiment
from hintolo.harness.stats import log_growth_exponent
from hintolo.ogd import ogd_bound_rhs, run_ogd, switch_once_grid, switch_once_oracle

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}
GROWTH_T = (1_000, 10_000, 100_000)


def record(n: int, name: str, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE #{n:>2} {'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def bound(summary: dict, bound_id: str) -> dict:
    return next(b for b in summary["bounds"] if b["bound_id"] == bound_id)


def bound_text(b: dict) -> str:
    return f"{b['bound_id']} lhs={b['lhs']:.4g} rhs={b['rhs']:.4g}"


@lru_cache(maxsize=None)
def run(**kw):
    return run_experiment(build_config(**kw))


def ftrl_runs():
    return [run(algo="ftrl", env="random_unit", d=d, T=2000, trials=500, alpha=a, seed=100 + d)
            for d in (2, 4, 8) for a in (0.25, 0.5, 1.0)]


def main_runs(algo):
    return [run(algo=algo, env="lb1", T=10_000, trials=200, alpha=a, seed=4, keep_series=True) for a in (0.25, 1.0)]


GROWTH_ENVS = (
    dict(env="lb1", alpha=0.25),
    dict(env="lb1", alpha=1.0),
    dict(env="drift", alpha=0.5, hint_policy="alpha_good"),
)


def growth_runs():
    return [run(algo="hinted", T=GROWTH_T[-1], trials=50, seed=5, checkpoints=GROWTH_T, **e) for e in GROWTH_ENVS]


def bad_hint_runs():
    return [run(algo="hinted", env="lb1", T=10_000, trials=200, alpha=a, seed=6, bad_count=100, bad_mode="negate")
            for a in (0.25, 1.0)]


def optimistic_run():
    return run(algo="hinted", env="random_unit", T=10_000, trials=200, alpha=0.25, seed=7,
               hint_policy="optimistic_noise", noise_scale=1.5, bad_count=100)


def test_01_ftrl_part1():
    viol = checks = 0
    worst = np.inf
    for _, s in ftrl_runs():
        b = bound(s, "FTRL_PART1")
        viol += b["detail"]["prefix_violations"]
        checks += s["trials"] * s["T"]
        worst = min(worst, b["margin"])
    ok = record(1, "FTRL part-1 prefix bound", viol == 0,
                f"{checks} prefix checks, {viol} violations, worst margin {worst:.3g}")
    assert ok


def test_02_ftrl_part2():
    viol = 0
    lines = []
    for (_, s) in ftrl_runs():
        b = bound(s, "FTRL_PART2")
        viol += b["detail"]["violations"]
        lines.append(f"d={s['d']} a={s['alpha']}:{b['detail']['violations']}")
    ok = record(2, "FTRL part-2 full-horizon bound", viol == 0, f"violations {' '.join(lines)}")
    assert ok


def test_03_ogd_switch_once():
    rng = np.random.default_rng(np.random.SeedSequence([3, 0]))
    viol = 0
    for _ in range(500):
        T = int(rng.integers(1, 2001))
        lam = float(rng.choice([1.0, 10.0, 40.0]))
        z, sigma = admissible_feedback(rng, T)
        ps = run_ogd(z, sigma, lam)
        viol += int(switch_once_oracle(z, sigma, lam, ps) > ogd_bound_rhs(sigma.sum(), lam) + 1e-9)
    gap = 0.0
    for _ in range(100):
        T = int(rng.integers(1, 21))
        lam = float(rng.choice([1.0, 10.0, 40.0]))
        z, sigma = admissible_feedback(rng, T)
        ps = run_ogd(z, sigma, lam)
        gap = max(gap, abs(switch_once_oracle(z, sigma, lam, ps) - switch_once_grid(z, sigma, lam, ps)))
    ok = record(3, "OGD switch-once regret", viol == 0 and gap <= 1e-6,
                f"500 traces, {viol} violations; oracle vs grid max gap {gap:.2e}")
    assert ok


def test_04_hinted_regret_and_queries():
    ok, parts = True, []
    for _, s in main_runs("hinted"):
        r, q = bound(s, "HINTED_REGRET"), bound(s, "HINTED_QUERY")
        count_ok = s["mean_queries"] <= 25 * math.sqrt(s["T"])
        ok &= r["satisfied"] and q["satisfied"] and count_ok
        parts.append(f"a={s['alpha']}: {bound_text(r)} {bound_text(q)} "
                     f"queries={s['mean_queries']:.0f} (limit {25 * math.sqrt(s['T']):.0f})")
    ok = record(4, "expected regret and query cost", ok, "; ".join(parts))
    assert ok


def test_05_log_growth():
    slopes = []
    for (_, s), e in zip(growth_runs(), GROWTH_ENVS):
        means = [s["checkpoint_mean_regret"][str(T)] for T in GROWTH_T]
        slopes.append((e["env"], e["alpha"], log_growth_exponent(GROWTH_T, means), means))
    ok = all(sl < 0.25 for _, _, sl, _ in slopes)
    detail = "; ".join(f"{env} a={a}: slope {sl:.3f} means {[round(m, 1) for m in ms]}" for env, a, sl, ms in slopes)
    ok = record(5, "logarithmic regret growth", ok, detail)
    assert ok


def test_06_bad_hints():
    ok, parts = True, []
    for _, s in bad_hint_runs():
        b, q = bound(s, "BAD_HINTS"), bound(s, "HINTED_QUERY")
        ok &= b["satisfied"] and q["satisfied"]
        parts.append(f"a={s['alpha']}: {bound_text(b)} {bound_text(q)} |B|={b['detail']['bad_rounds']:.0f}")
    ok = record(6, "regret with bad hints", ok, "; ".join(parts))
    assert ok


def test_07_optimistic():
    _, s = optimistic_run()
    b, q = bound(s, "OPTIMISTIC"), bound(s, "HINTED_QUERY")
    ok = record(7, "optimistic bound", b["satisfied"] and q["satisfied"],
                f"{bound_text(b)} bad_diff_sq={b['detail']['bad_diff_sq']:.3g}; {bound_text(q)}")
    assert ok


def test_08_abstention():
    ok, parts = True, []
    for (hint_tr, _), (abst_tr, s) in zip(main_runs("hinted"), main_runs("abstain")):
        r, q = bound(s, "ABSTAIN_REGRET"), bound(s, "HINTED_QUERY")
        same_p = hint_tr.series["p"].tobytes() == abst_tr.series["p"].tobytes()
        ok &= r["satisfied"] and q["satisfied"] and same_p
        parts.append(f"a={s['alpha']}: {bound_text(r)} {bound_text(q)} p bit-identical={same_p}")
    ok = record(8, "abstention", ok, "; ".join(parts))
    assert ok


def test_09_deterministic_lower_bound():
    ok, parts = True, []
    for C in (1.0, 4.0):
        _, s = run(algo="det_reference", env="det_lb", T=10_000, trials=1, C_ref=C, seed=9)
        lb, sl = bound(s, "DET_LB_REGRET"), bound(s, "DET_SUM_LENGTHS")
        ok &= lb["satisfied"] and sl["satisfied"]
        parts.append(f"C={C:g}: regret {s['mean_regret']:.3f} >= {lb['lhs']:.3f}, "
                     f"sum-lengths max gap {sl['lhs']:.2e}")
    ok = record(9, "deterministic lower bound", ok, "; ".join(parts))
    assert ok


def test_10_randomized_lower_bound():
    ok, parts = True, []
    for alpha in (0.25, 1.0):
        means = []
        for T in GROWTH_T:
            cap = int(math.sqrt(T) / (10 * alpha))
            _, s = run(algo="hinted", env="lb1", T=T, trials=100, alpha=alpha, seed=10, query_cap=cap)
            means.append(s["mean_regret"])
        slope = log_growth_exponent(GROWTH_T, means)
        ok &= slope >= 0.35
        parts.append(f"a={alpha}: exponent {slope:.3f} means {[round(m, 1) for m in means]}")
    ok = record(10, "randomized lower-bound growth", ok, "; ".join(parts))
    assert ok


def test_11_unconstrained_deterministic():
    ok, parts = True, []
    for K in (1.0, 5.0):
        traces, s = run(algo="unc_det", env="random_unit", T=GROWTH_T[-1], trials=50, alpha=0.5, K=K,
                        seed=11, comparators=50, checkpoints=GROWTH_T)
        z, q = bound(s, "UNC_DET_Z"), bound(s, "UNC_QUERY")
        per_u = traces.data["comparator_regret"].mean(axis=0)
        slopes = np.array([log_growth_exponent(GROWTH_T, per_u[:, j]) for j in range(per_u.shape[1])])
        ok &= z["satisfied"] and q["satisfied"] and bool(np.all(slopes < 0.25))
        parts.append(
            f"K={K:g}: Z violations lo={z['detail']['lower_violations']} hi={z['detail']['upper_violations']}, "
            f"{bound_text(q)}, comparator slope max {slopes.max():.3f} ({int(np.sum(slopes >= 0.25))}/50 >= 0.25)"
        )
    ok = record(11, "unconstrained deterministic", ok, "; ".join(parts))
    assert ok


def test_12_expected_hints():
    ok, parts = True, []
    for alpha in (0.5, 1.0):
        _, s = run(algo="expected_hints", env="random_unit", T=10_000, trials=200, alpha=alpha, seed=12)
        b = bound(s, "EH_LOG_REGRET")
        ident = b["detail"]["identity_err"]
        ok &= b["satisfied"] and ident <= 1e-12
        parts.append(f"a={alpha}: {bound_text(b)} identity err {ident:.1e}")
    ok = record(12, "expected hints", ok, "; ".join(parts))
    assert ok


def test_13_appendix_properties():
    rng = np.random.default_rng(np.random.SeedSequence([13, 0]))
    log_viol = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 200))
        kind = rng.integers(3)
        if kind == 0:
            a = rng.exponential(size=n)
        elif kind == 1:
            a = rng.pareto(1.0, size=n)
        else:
            a = rng.uniform(size=n) * (rng.uniform(size=n) < 0.5)
        log_viol += int(log_ratio_sum(a) > math.log1p(a.sum()) + 1e-12)

    argmin_viol = 0
    for _ in range(100):
        d = int(rng.integers(1, 6))
        g = rng.standard_normal(d) * rng.uniform(0, 3)
        r = float(rng.uniform(0.05, 4.0))
        x = ball_regularized_argmin(g, r)
        pts = random_ball_points(rng, d, 10_000)
        argmin_viol += int(norm(x) > 1 + 1e-12 or ball_objective(x, g, r) > ball_objective(pts, g, r).min() + 1e-12)

    pz = []
    for n, d in ((10, 2), (100, 3), (400, 5)):
        Z = random_unit_vectors(d, rng, (10_000, n)).sum(axis=1)
        sq = norm(Z) ** 2
        pz.append((n, d, abs(sq.mean() / n - 1), norm(Z).mean() / math.sqrt(n)))
    pz_ok = all(rel <= 0.05 and ratio >= 0.5 for _, _, rel, ratio in pz)

    stab = {"radius": 0, "boundary_lock": 0, "unit_radius": 0}
    runs = ftrl_runs() + main_runs("hinted") + main_runs("abstain") + growth_runs() + bad_hint_runs()
    for _, s in runs + [optimistic_run()]:
        for k, v in s["stability_violations"].items():
            stab[k] += v
    ok = log_viol == 0 and argmin_viol == 0 and pz_ok and sum(stab.values()) == 0
    pz_text = " ".join(f"n={n},d={d}: rel {rel:.3f} ratio {ratio:.3f}" for n, d, rel, ratio in pz)
    ok = record(13, "appendix properties", ok,
                f"log-inequality violations {log_viol}/10000; argmin violations {argmin_viol}/100; "
                f"{pz_text}; stability {stab} over {len(runs) + 1} FTRL runs")
    assert ok
