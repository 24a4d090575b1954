"""Bound formulas and the pass/fail report for each guarantee.

Exact bounds are checked trial by trial with ``1e-9`` absolute slack.
Expected-value bounds compare the trial mean of the left side against the
trial mean of the right side plus three standard errors of the left side.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .stats import aggregate

BOUND_IDS = (
    "FTRL_PART1",
    "FTRL_PART2",
    "OGD_SWITCH_ONCE",
    "HINTED_REGRET",
    "HINTED_QUERY",
    "BAD_HINTS",
    "OPTIMISTIC",
    "ABSTAIN_REGRET",
    "UNC_DET_Z",
    "UNC_QUERY",
    "EH_LOG_REGRET",
)
EXACT_TOL = 1e-9
MC_SE_SLACK = 3.0


@dataclass(frozen=True)
class BoundReport:
    bound_id: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    kind: str
    gated: bool = True
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["detail"] = {k: _plain(v) for k, v in self.detail.items()}
        return out


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def exact_report(bound_id: str, lhs, rhs, gated: bool = True, **detail) -> BoundReport:
    """Worst case over the supplied ``(lhs, rhs)`` pairs; passes iff every pair holds."""
    lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
    gap = lhs - rhs
    i = int(np.argmax(gap))
    violations = int(np.count_nonzero(gap > EXACT_TOL))
    return BoundReport(
        bound_id, float(lhs.flat[i]), float(rhs.flat[i]), violations == 0,
        float(rhs.flat[i] - lhs.flat[i]), "exact", gated,
        dict(detail, violations=violations, checks=int(lhs.size)),
    )


def mc_report(bound_id: str, lhs_trials, rhs_trials, gated: bool = True, **detail) -> BoundReport:
    lhs = aggregate(lhs_trials)
    rhs = float(np.mean(rhs_trials))
    ok = lhs.mean <= rhs + MC_SE_SLACK * lhs.se
    return BoundReport(
        bound_id, lhs.mean, rhs, bool(ok), rhs - lhs.mean, "monte_carlo", gated,
        dict(detail, se=lhs.se, trials=lhs.n),
    )


# Right-hand sides, vectorised over trials.

def ftrl_part1_rhs(sigma_prefix):
    return 4.5 * np.sqrt(1.0 + np.asarray(sigma_prefix, dtype=float))


def ogd_rhs(sigma_total, lam):
    return lam * (1.0 + 3.0 * np.log1p(np.asarray(sigma_total, dtype=float)))


def hinted_regret_rhs(sigma_total, alpha):
    return (78.0 + 38.0 * np.log1p(np.asarray(sigma_total, dtype=float))) / alpha


def hinted_query_rhs(sigma_total):
    return 20.0 * np.sqrt(np.asarray(sigma_total, dtype=float))


def bad_hints_rhs(sigma_total, alpha, bad_cost_sq, bad_hint_sq):
    L = np.log1p(np.asarray(sigma_total, dtype=float))
    return (
        hinted_regret_rhs(sigma_total, alpha)
        + 40.0 * np.sqrt(bad_cost_sq)
        + (20.0 / alpha) * np.sqrt(bad_hint_sq) * np.sqrt(L)
    )


def optimistic_rhs(sigma_total, bad_diff_sq):
    L = np.log1p(np.asarray(sigma_total, dtype=float))
    return 312.0 + 152.0 * L + 80.0 * (1.0 + np.sqrt(L)) * np.sqrt(bad_diff_sq)


def unc_query_rhs(sigma_total, K):
    return 2.0 * K * np.sqrt(np.asarray(sigma_total, dtype=float))


def eh_rhs(T, alpha, slack: float = 4.0):
    return slack * (0.5 + (8.0 / alpha) * math.log(T + 1.0))


def det_lb_rhs(T, C):
    return math.sqrt(T) / (2.0 * (1.0 + C))
