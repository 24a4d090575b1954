"""Adaptive FTRL on the unit ball with regularizer weight ``sqrt(1 + sigma_{1:t})``.

The cumulative weight ``r_{0:t}`` is recomputed from ``sigma_{1:t}`` at each
step; the individual increments ``r_t`` are only materialised by
:func:`regularizer_increments` for the telescoping check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    PrefixState,
    ball_regularized_argmin,
    check_alpha,
    check_costs,
    inner,
    norm,
)

# Closed-form boundary iterates have norm 1 up to rounding.
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class FtrlState:
    prefix: PrefixState
    x_next: np.ndarray

    @property
    def r_cum(self):
        return np.sqrt(1.0 + self.prefix.sigma_sum)

    @property
    def t(self) -> int:
        return self.prefix.t


def ftrl_init(d: int, batch: tuple[int, ...] = ()) -> FtrlState:
    prefix = PrefixState.zero(d, batch)
    return FtrlState(prefix, np.zeros(batch + (d,)))


def ftrl_update(state: FtrlState, c) -> FtrlState:
    """Feed cost ``c``; the point played this round was ``state.x_next``."""
    prefix = state.prefix.advance(c)
    x_next = ball_regularized_argmin(prefix.cost_sum, np.sqrt(1.0 + prefix.sigma_sum))
    return FtrlState(prefix, x_next)


def run_ftrl(costs) -> np.ndarray:
    """Iterates ``x_1 .. x_{T+1}`` for a ``(T, d)`` cost sequence (or ``(T, n, d)`` batch)."""
    costs = check_costs(costs)
    T = costs.shape[0]
    sums = np.cumsum(costs, axis=0)
    sigmas = np.cumsum(inner(costs, costs), axis=0)
    xs = np.empty((T + 1,) + costs.shape[1:])
    xs[0] = 0.0
    xs[1:] = ball_regularized_argmin(sums, np.sqrt(1.0 + sigmas))
    return xs


def small_prefix_mask(costs, alpha: float) -> np.ndarray:
    """``mask[S-1]`` is True when ``|c_{1:S}| <= (alpha/4)(1 + sigma_{1:S})``."""
    alpha = check_alpha(alpha)
    costs = np.asarray(costs, dtype=float)
    if costs.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    sums = norm(np.cumsum(costs, axis=0))
    sigmas = np.cumsum(inner(costs, costs), axis=0)
    return sums <= 0.25 * alpha * (1.0 + sigmas)


def largest_small_prefix(costs, alpha: float) -> int:
    """Largest ``S`` in ``[T]`` with a short aggregate, or 0 when none qualifies."""
    mask = small_prefix_mask(costs, alpha)
    hits = np.flatnonzero(mask)
    return int(hits[-1]) + 1 if hits.size else 0


def regularizer_increments(costs) -> np.ndarray:
    """``r_0 = 1`` followed by ``r_t = sqrt(1+sigma_{1:t}) - sqrt(1+sigma_{1:t-1})``."""
    costs = np.asarray(costs, dtype=float)
    cum = np.sqrt(1.0 + np.concatenate([[0.0], np.cumsum(inner(costs, costs))]))
    return np.concatenate([[1.0], np.diff(cum)])


def psi(c_t, r_t: float, x) -> float:
    """Per-round FTRL objective ``<c_t, x> + (r_t/2)|x|^2``."""
    x = np.asarray(x, dtype=float)
    return float(inner(c_t, x) + 0.5 * r_t * inner(x, x))


def ftl_telescoping_gap(costs, xs, m: int, u) -> float:
    """``psi_{0:T}(u) - [psi_{0:m}(x_{m+1}) + sum_{t>m} psi_t(x_{t+1})]``; nonnegative for valid FTRL."""
    costs = np.asarray(costs, dtype=float)
    T, d = costs.shape
    c_all = np.vstack([np.zeros((1, d)), costs])  # c_0 = 0
    r = regularizer_increments(costs)
    u = np.asarray(u, dtype=float)
    lhs = sum(psi(c_all[t], r[t], xs[m]) for t in range(m + 1))
    lhs += sum(psi(c_all[t], r[t], xs[t]) for t in range(m + 1, T + 1))
    rhs = sum(psi(c_all[t], r[t], u) for t in range(T + 1))
    return rhs - lhs


# Stability radii, all evaluated from quantities known at the end of round t.

def stability_radius(c_norm, sigma_prev):
    """Bound on ``|x_t - x_{t+1}|`` from the regularizer strength."""
    return 2.0 * np.asarray(c_norm) / np.sqrt(1.0 + np.asarray(sigma_prev))


def unit_stability_radius(c_norm, sigma_now, alpha: float):
    """Bound on ``|x_t - x_{t+1}|`` when both iterates are unit vectors past the short prefix."""
    return 8.0 * np.asarray(c_norm) / (alpha * (1.0 + np.asarray(sigma_now)))


def stability_violations(costs, xs, alpha: float, tol: float = 1e-12) -> dict:
    """Count per-round stability failures on an FTRL run.

    ``costs`` has shape ``(T, ..., d)`` and ``xs`` holds the iterates
    ``x_1 .. x_{T+1}`` as returned by :func:`run_ftrl`. The boundary-lock and
    unit-iterate checks only apply after the largest short prefix ``S``.
    """
    alpha = check_alpha(alpha)
    costs = np.asarray(costs, dtype=float)
    xs = np.asarray(xs, dtype=float)
    T = costs.shape[0]
    if T == 0:
        zero = np.zeros(costs.shape[1:-1], dtype=int)
        return {"radius": zero, "boundary_lock": zero, "unit_radius": zero}
    c_norm = norm(costs)
    sig = np.cumsum(c_norm**2, axis=0)
    sig_prev = np.concatenate([np.zeros((1,) + sig.shape[1:]), sig[:-1]])
    step = norm(xs[:-1] - xs[1:])
    radius = step > stability_radius(c_norm, sig_prev) + tol

    small = norm(np.cumsum(costs, axis=0)) <= 0.25 * alpha * (1.0 + sig)
    idx = np.arange(1, T + 1).reshape((T,) + (1,) * (sig.ndim - 1))
    S = np.max(np.where(small, idx, 0), axis=0)
    past = idx > S
    n = norm(xs)
    unit_next = np.abs(n[1:] - 1.0) <= UNIT_TOL
    unit_both = (np.abs(n[:-1] - 1.0) <= UNIT_TOL) & unit_next
    locked = np.sqrt(1.0 + sig) >= 4.0 / alpha
    lock_bad = past & locked & ~unit_next
    unit_bad = past & unit_both & (step > unit_stability_radius(c_norm, sig, alpha) + tol)
    # Counts per trace: a scalar for one trace, otherwise one per column.
    return {
        "radius": np.count_nonzero(radius, axis=0),
        "boundary_lock": np.count_nonzero(lock_bad, axis=0),
        "unit_radius": np.count_nonzero(unit_bad, axis=0),
    }


def part1_rhs(sigma_prefix):
    return 4.5 * np.sqrt(1.0 + np.asarray(sigma_prefix))


def prefix_regrets(costs, plays) -> np.ndarray:
    """Regret against the best ball point of each prefix ``N = 1..T``."""
    costs = np.asarray(costs, dtype=float)
    losses = np.cumsum(inner(costs, plays), axis=0)
    return losses + norm(np.cumsum(costs, axis=0))


def part2_rhs(costs, plays, alpha: float) -> float:
    """Refined full-horizon bound with ``S`` the largest short prefix."""
    alpha = check_alpha(alpha)
    costs = np.asarray(costs, dtype=float)
    plays = np.asarray(plays, dtype=float)
    S = largest_small_prefix(costs, alpha)
    sigma_T = float(np.sum(inner(costs, costs)))
    head = costs[:S]
    sigma_S = float(np.sum(inner(head, head)))
    return (
        0.5 * np.sqrt(1.0 + sigma_S)
        + (18.0 + 8.0 * np.log1p(sigma_T)) / alpha
        + float(norm(head.sum(axis=0)))
        + float(np.sum(inner(head, plays[:S])))
    )
