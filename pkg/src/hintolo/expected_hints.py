"""Learner for hints that are only good on average.

The played point ``x_t = xbar_t + ((|xbar_t|^2 - 1)/4) h_t`` is chosen so that
its loss equals the surrogate ``l_t(xbar_t)``, where
``l_t(x) = <c_t, x> + (<c_t, h_t>/4)(|x|^2 - 1)``. The inner learner runs FTRL
on the linearised surrogates with quadratic weight ``1 + mu_{1:t}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ball_regularized_argmin,
    check_alpha,
    check_costs,
    inner,
    norm,
    project_to_ball,
    InvalidInputError,
)


@dataclass(frozen=True)
class EhState:
    alpha: float
    x_bar: np.ndarray
    g_sum: np.ndarray
    mu_sum: np.ndarray | float
    projections: int = 0


def eh_init(alpha: float, d: int, batch: tuple[int, ...] = ()) -> EhState:
    alpha = check_alpha(alpha)
    mu = np.zeros(batch) if batch else 0.0
    return EhState(alpha, np.zeros(batch + (d,)), np.zeros(batch + (d,)), mu)


def eh_play(x_bar, h) -> tuple[np.ndarray, np.ndarray, np.ndarray | bool]:
    """Return ``(raw, played, projected)``; ``raw`` is the unprojected point."""
    x_bar = np.asarray(x_bar, dtype=float)
    h = np.asarray(h, dtype=float)
    raw = x_bar + ((inner(x_bar, x_bar) - 1.0) / 4.0)[..., None] * h
    projected = norm(raw) > 1.0
    return raw, project_to_ball(raw), projected


def eh_surrogate_eval(x, c, h):
    x = np.asarray(x, dtype=float)
    return inner(c, x) + inner(c, h) / 4.0 * (inner(x, x) - 1.0)


def eh_surrogate_grad(x, c, h) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.asarray(c, dtype=float) + (inner(c, h) / 2.0)[..., None] * x


def eh_round(state: EhState, h, c):
    """One round: returns ``(played, loss, new_state)``."""
    c = check_costs(c)
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("hint has non-finite components")
    _, played, projected = eh_play(state.x_bar, h)
    loss = inner(c, played)
    g_sum = state.g_sum + eh_surrogate_grad(state.x_bar, c, h)
    mu_sum = state.mu_sum + 0.5 * state.alpha * inner(c, c)
    x_bar = ball_regularized_argmin(g_sum, 1.0 + mu_sum)
    new = EhState(state.alpha, x_bar, g_sum, mu_sum, state.projections + int(np.count_nonzero(projected)))
    if np.ndim(loss) == 0:
        loss = float(loss)
    return played, loss, new


@dataclass(frozen=True)
class EhBatch:
    x_bar: np.ndarray
    raw: np.ndarray
    played: np.ndarray
    projected: np.ndarray
    loss: np.ndarray
    surrogate: np.ndarray


def run_eh_batch(C, H, alpha: float) -> EhBatch:
    """Run over ``(T, n, d)`` costs and hints; ``surrogate[t] = l_t(xbar_t)``."""
    C = check_costs(C)
    H = np.asarray(H, dtype=float)
    T = C.shape[0]
    state = eh_init(alpha, C.shape[-1], C.shape[1:-1])
    x_bar = np.empty_like(C)
    raw = np.empty_like(C)
    played = np.empty_like(C)
    projected = np.zeros(C.shape[:-1], dtype=bool)
    surrogate = np.empty(C.shape[:-1])
    for t in range(T):
        x_bar[t] = state.x_bar
        raw[t], played[t], projected[t] = eh_play(state.x_bar, H[t])
        surrogate[t] = eh_surrogate_eval(state.x_bar, C[t], H[t])
        _, _, state = eh_round(state, H[t], C[t])
    loss = inner(C, played)
    return EhBatch(x_bar, raw, played, projected, loss, surrogate)


def surrogate_regret(C, H, x_bar, u) -> np.ndarray:
    """``sum_t l_t(xbar_t) - l_t(u)`` over the leading time axis."""
    lhs = eh_surrogate_eval(x_bar, C, H).sum(axis=0)
    rhs = eh_surrogate_eval(np.broadcast_to(u, np.shape(C)), C, H).sum(axis=0)
    return lhs - rhs


def eh_regret_rhs(T: int, alpha: float) -> float:
    return 0.5 + (8.0 / alpha) * np.log(T + 1.0)
