"""Unconstrained OLO with hints, and the parameter-free base learners it needs.

The scalar base learner is Krichevsky-Trofimov coin betting. The vector base
learner splits a play into a magnitude, learned by a scalar bettor on
``<c_t, dir_t>``, and a direction, learned by the adaptive ball FTRL. The
hint-using learner plays ``w_t - 1_t h_t y_t`` where ``w_t`` comes from the
vector learner and ``y_t`` from a second scalar bettor fed
``g_t = -1_t <h_t, c_t>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    InvalidInputError,
    InvalidParameterError,
    PrefixState,
    RoundRecord,
    check_alpha,
    check_costs,
    inner,
)
from .ftrl import FtrlState, ftrl_init, ftrl_update
from .hinted import HintEnv, check_hint_norm
from .rng import round_uniform

UNC_MODES = ("randomized", "deterministic")

# Fitted by scripts/calibrate_unconstrained.py (T in {1e2, 1e3, 1e4}, d in {2, 4},
# 30 trials, 50 comparators: A=0.560, B=1.908), rounded up and frozen.
BASE_A = 0.6
BASE_B = 2.0


@dataclass(frozen=True)
class UncConfig:
    epsilon: float = 1.0
    alpha: float = 1.0
    K: float = 1.0
    mode: str = "deterministic"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        if not self.K > 0:
            raise InvalidParameterError("K must be positive")
        check_alpha(self.alpha)
        if self.mode not in UNC_MODES:
            raise InvalidParameterError(f"mode must be one of {UNC_MODES}")


@dataclass(frozen=True)
class KtState:
    """Coin-betting state; ``y`` is the play for the upcoming round."""

    wealth: np.ndarray | float
    reward_sum: np.ndarray | float
    t: int
    y: np.ndarray | float


def kt_init(epsilon: float, batch: tuple[int, ...] = ()) -> KtState:
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    if batch:
        return KtState(np.full(batch, float(epsilon)), np.zeros(batch), 0, np.zeros(batch))
    return KtState(float(epsilon), 0.0, 0, 0.0)


def kt_1d_update(state: KtState, g) -> KtState:
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)) or np.any(np.abs(g) > 1.0 + 1e-12):
        raise InvalidInputError("scalar costs must satisfy |g| <= 1")
    wealth = state.wealth - g * state.y
    reward_sum = state.reward_sum - g
    t = state.t + 1
    y = reward_sum / (t + 1) * wealth
    if np.ndim(y) == 0:
        return KtState(float(wealth), float(reward_sum), t, float(y))
    return KtState(wealth, reward_sum, t, y)


@dataclass(frozen=True)
class BaseDState:
    magnitude: KtState
    direction: FtrlState

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.magnitude.y)[..., None] * self.direction.x_next

    @property
    def t(self) -> int:
        return self.magnitude.t


def base_d_init(d: int, epsilon: float, batch: tuple[int, ...] = ()) -> BaseDState:
    return BaseDState(kt_init(epsilon, batch), ftrl_init(d, batch))


def base_d_update(state: BaseDState, c) -> BaseDState:
    c = check_costs(c)
    s = inner(c, state.direction.x_next)
    return BaseDState(kt_1d_update(state.magnitude, s), ftrl_update(state.direction, c))


def base_bound_shape(u_norm, sigma_total, T: int, epsilon: float):
    """The two comparator-dependent terms ``(a, b)`` of the standard parameter-free bound."""
    u_norm = np.asarray(u_norm, dtype=float)
    L = np.log(u_norm * T / epsilon + 1.0)
    return u_norm * np.sqrt(np.asarray(sigma_total) * L), u_norm * L


def base_bound_rhs(u_norm, sigma_total, T: int, epsilon: float, A: float = BASE_A, B: float = BASE_B):
    a, b = base_bound_shape(u_norm, sigma_total, T, epsilon)
    return epsilon + A * a + B * b


@dataclass(frozen=True)
class UncState:
    config: UncConfig
    base_d: BaseDState
    base_1d: KtState
    prefix: PrefixState
    hint_gain_sum: float
    coin_key: tuple[int, int]

    @property
    def t(self) -> int:
        return self.prefix.t


def unc_init(config: UncConfig, d: int, coin_key: tuple[int, int] = (0, 0)) -> UncState:
    return UncState(
        config,
        base_d_init(d, config.epsilon),
        kt_init(config.epsilon),
        PrefixState.zero(d),
        0.0,
        coin_key,
    )


def randomized_query_probability(K: float, alpha: float, sigma_prev):
    return np.minimum(1.0, K / (alpha * np.sqrt(1.0 + np.asarray(sigma_prev, dtype=float))))


def deterministic_query(K: float, hint_gain_sum, sigma_prev):
    return 1.0 + np.asarray(hint_gain_sum) <= K * np.sqrt(1.0 + np.asarray(sigma_prev, dtype=float))


def unc_round(state: UncState, env: HintEnv) -> tuple[RoundRecord, UncState]:
    cfg = state.config
    t = state.t + 1
    sigma_prev = float(state.prefix.sigma_sum)
    if cfg.mode == "randomized":
        q = float(randomized_query_probability(cfg.K, cfg.alpha, sigma_prev))
        ind = round_uniform(state.coin_key, t) < q
    else:
        ind = bool(deterministic_query(cfg.K, state.hint_gain_sum, sigma_prev))
        q = float(ind)
    w = state.base_d.w
    y = float(state.base_1d.y)
    hint = None
    x = w
    if ind:
        hint = np.asarray(env.fetch_hint(), dtype=float)
        check_hint_norm(hint)
        x = w - hint * y
    c = check_costs(np.asarray(env.reveal_cost(), dtype=float))
    gain = float(inner(c, hint)) if ind else 0.0
    record = RoundRecord(
        t=t,
        queried=bool(ind),
        abstained=False,
        hint=hint,
        ftrl_point=w,
        played=x,
        cost=c,
        loss=float(inner(c, x)),
        p_t=q,
        z_t=-gain,
        sigma_t=float(inner(c, c)),
    )
    new_state = replace(
        state,
        base_d=base_d_update(state.base_d, c),
        base_1d=kt_1d_update(state.base_1d, -gain),
        prefix=state.prefix.advance(c),
        hint_gain_sum=state.hint_gain_sum + gain,
    )
    return record, new_state


@dataclass(frozen=True)
class UncBatch:
    """Per-round arrays over ``(T, n)`` (``(T, n, d)`` for vectors)."""

    played: np.ndarray
    w: np.ndarray
    y: np.ndarray
    q: np.ndarray
    queried: np.ndarray
    g: np.ndarray
    hint_gain_cum: np.ndarray
    loss: np.ndarray


def run_unc_batch(C, H, config: UncConfig, uniforms=None) -> UncBatch:
    """Vectorised equivalent of repeated :func:`unc_round` calls over ``n`` trials."""
    C = check_costs(C)
    H = np.asarray(H, dtype=float)
    T, n, d = C.shape
    if config.mode == "randomized" and uniforms is None:
        raise InvalidParameterError("randomized mode needs coin uniforms")
    base = base_d_init(d, config.epsilon, (n,))
    kt = kt_init(config.epsilon, (n,))
    sigma = np.zeros(n)
    gain_sum = np.zeros(n)
    out = {k: np.empty((T, n, d)) for k in ("played", "w")}
    out.update({k: np.empty((T, n)) for k in ("y", "q", "g", "hint_gain_cum", "loss")})
    queried = np.zeros((T, n), dtype=bool)
    for t in range(T):
        if config.mode == "randomized":
            q = randomized_query_probability(config.K, config.alpha, sigma)
            ind = uniforms[t] < q
        else:
            ind = deterministic_query(config.K, gain_sum, sigma)
            q = ind.astype(float)
        w = base.w
        y = kt.y
        h = np.where(ind[:, None], H[t], 0.0)
        if np.any(ind):
            check_hint_norm(h)
        x = w - h * y[:, None]
        c = C[t]
        gain = inner(c, h)
        out["played"][t], out["w"][t], out["y"][t], out["q"][t] = x, w, y, q
        out["g"][t] = -gain
        out["loss"][t] = inner(c, x)
        queried[t] = ind
        base = base_d_update(base, c)
        kt = kt_1d_update(kt, -gain)
        sigma = sigma + inner(c, c)
        gain_sum = gain_sum + gain
        out["hint_gain_cum"][t] = gain_sum
    return UncBatch(queried=queried, **out)


def unc_regret(C, played, u) -> np.ndarray:
    """Prefix regrets ``sum_{t<=N} <c_t, x_t - u>`` for ``N = 1..T``."""
    C = np.asarray(C, dtype=float)
    return np.cumsum(inner(C, played) - inner(C, u), axis=0)


def det_hint_gain_bounds(sigma_prev, K: float, alpha: float):
    """Lower and upper limits on the cumulative hint gain after a round.

    ``sigma_prev`` is the squared-norm mass up to, but excluding, the latest round.
    """
    sigma_prev = np.asarray(sigma_prev, dtype=float)
    lo = np.sqrt(sigma_prev) - K - 1.0 - K / (2.0 * alpha)
    hi = K * np.sqrt(1.0 + sigma_prev)
    return lo, hi


def unc_query_cost_rhs(sigma_total, K: float):
    return 2.0 * K * np.sqrt(np.asarray(sigma_total, dtype=float))


@dataclass(frozen=True)
class UncBoundParams:
    """Quantities entering the reduction bound; reported, never gated."""

    M: float
    N: float
    H: float
    F: float

    @classmethod
    def for_mode(cls, config: UncConfig, bad_hint_sq: float = 0.0, sigma_total: float = 0.0) -> "UncBoundParams":
        K, a = config.K, config.alpha
        if config.mode == "deterministic":
            return cls(M=K, N=3 * K + 1 + K / (2 * a), H=0.0, F=K)
        H = (K / a) * math.sqrt(bad_hint_sq * math.log1p(sigma_total))
        return cls(M=K, N=a, H=H, F=2 * K / a)
