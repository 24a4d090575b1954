"""Trial aggregation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

Z99 = NormalDist().inv_cdf(0.995)


@dataclass(frozen=True)
class Stats:
    n: int
    mean: float
    std: float
    se: float
    half_width99: float

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(values) -> Stats:
    """Mean, sample std (0 for a single trial), standard error and 99% half-width."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("need at least one trial")
    mean = float(v.mean())
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    se = std / math.sqrt(v.size)
    return Stats(int(v.size), mean, std, se, Z99 * se)


def aggregate_all(trial_summaries: list[dict]) -> dict[str, Stats]:
    """Aggregate each numeric key shared by a list of per-trial dicts."""
    if not trial_summaries:
        raise ValueError("need at least one trial")
    keys = [k for k, v in trial_summaries[0].items() if isinstance(v, (int, float, np.floating))]
    return {k: aggregate([s[k] for s in trial_summaries]) for k in keys}


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ``ys`` against ``xs``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.polyfit(xs, ys, 1)[0])


def log_growth_exponent(T_values, regrets, floor: float = 1.0) -> float:
    """Slope of ``log max(regret, floor)`` against ``log T``."""
    r = np.maximum(np.asarray(regrets, dtype=float), floor)
    return fit_slope(np.log(np.asarray(T_values, dtype=float)), np.log(r))
