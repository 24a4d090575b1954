"""Randomized learner that queries hints with an OGD-tuned probability.

Each round the learner draws one uniform from its coin stream. If it falls
below ``p_t`` the learner queries the hint and plays ``-h_t`` (or abstains,
in the abstention variant); otherwise it plays the FTRL point. FTRL always
sees the cost, and the OGD instance is fed the scalar
``z_t = -alpha |c_t|^2 - <c_t, x_t>``, so the ``p_t`` sequence does not
depend on the coin outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Protocol

import numpy as np

from .core import (
    NORM_SLACK,
    InvalidHintError,
    InvalidParameterError,
    ProtocolViolationError,
    RoundRecord,
    as_point,
    check_alpha,
    check_costs,
    inner,
    norm,
)
from .ftrl import FtrlState, ftrl_init, ftrl_update, run_ftrl
from .ogd import OgdState, check_z_protocol, ogd_init, ogd_update, run_ogd
from .rng import round_uniform

MODES = ("hint", "abstain")


class HintEnv(Protocol):
    def fetch_hint(self) -> np.ndarray: ...

    def reveal_cost(self) -> np.ndarray: ...


class RoundEnv:
    """Single-round handshake around a committed ``(cost, hint)`` pair.

    The hint may be fetched at most once and only before the cost is revealed.
    """

    def __init__(self, cost, hint=None):
        self._cost = as_point(cost, "cost")
        self._hint = None if hint is None else as_point(hint, "hint")
        self.hint_fetched = False
        self.revealed = False

    def fetch_hint(self) -> np.ndarray:
        if self.revealed:
            raise ProtocolViolationError("hint requested after the cost was revealed")
        if self.hint_fetched:
            raise ProtocolViolationError("hint requested twice in one round")
        if self._hint is None:
            raise ProtocolViolationError("this round has no hint")
        self.hint_fetched = True
        return self._hint

    def reveal_cost(self) -> np.ndarray:
        self.revealed = True
        return self._cost


@dataclass(frozen=True)
class HintedState:
    alpha: float
    ftrl: FtrlState
    ogd: OgdState
    coin_key: tuple[int, int]
    mode: str = "hint"
    budget: Optional[int] = None
    queries: int = 0

    @property
    def t(self) -> int:
        return self.ftrl.t


def hinted_init(alpha: float, d: int, coin_key: tuple[int, int], mode: str = "hint",
                budget: Optional[int] = None) -> HintedState:
    alpha = check_alpha(alpha)
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}")
    return HintedState(alpha, ftrl_init(d), ogd_init(10.0 / alpha), coin_key, mode, budget)


def query_probability_cap(alpha: float, sigma_prev):
    return np.minimum(1.0, 10.0 / (alpha * np.sqrt(1.0 + np.asarray(sigma_prev, dtype=float))))


def check_hint_norm(h) -> None:
    if np.any(norm(h) > 1.0 + NORM_SLACK):
        raise InvalidHintError("hint norm exceeds 1")


def hinted_round(state: HintedState, env: HintEnv) -> tuple[RoundRecord, HintedState]:
    t = state.t + 1
    x = state.ftrl.x_next
    p = float(state.ogd.p)
    draw = round_uniform(state.coin_key, t)
    under_budget = state.budget is None or state.queries < state.budget
    queried = bool(draw < p) and under_budget

    hint = None
    if queried and state.mode == "hint":
        hint = np.asarray(env.fetch_hint(), dtype=float)
        check_hint_norm(hint)
    c = check_costs(np.asarray(env.reveal_cost(), dtype=float))
    sigma = float(inner(c, c))

    if not queried:
        played, loss = x, float(inner(c, x))
    elif state.mode == "hint":
        played, loss = -hint, -float(inner(c, hint))
    else:
        played, loss = x, -state.alpha * sigma

    z = -state.alpha * sigma - float(inner(c, x))
    check_z_protocol(z, sigma)
    record = RoundRecord(
        t=t,
        queried=queried and state.mode == "hint",
        abstained=queried and state.mode == "abstain",
        hint=hint,
        ftrl_point=x,
        played=played,
        cost=c,
        loss=loss,
        p_t=p,
        z_t=z,
        sigma_t=sigma,
    )
    new_state = replace(
        state,
        ftrl=ftrl_update(state.ftrl, c),
        ogd=ogd_update(state.ogd, z, sigma),
        queries=state.queries + int(queried),
    )
    return record, new_state


def expected_round_loss(p: float, c, h, x) -> float:
    return -p * float(inner(c, h)) + (1.0 - p) * float(inner(c, x))


@dataclass(frozen=True)
class HintedBatch:
    """Arrays over ``(T, n)`` rounds by trials (``(T, n, d)`` for vectors)."""

    xs: np.ndarray
    p: np.ndarray
    z: np.ndarray
    sigma: np.ndarray
    queried: np.ndarray
    abstained: np.ndarray
    played: np.ndarray
    loss: np.ndarray


def run_hinted_batch(C, H, alpha: float, uniforms, mode: str = "hint",
                     budget: Optional[int] = None) -> HintedBatch:
    """Vectorised equivalent of repeated :func:`hinted_round` calls.

    ``C`` and ``H`` have shape ``(T, n, d)``; ``uniforms`` has shape ``(T, n)``
    and holds the round uniforms of each trial's coin stream.
    """
    alpha = check_alpha(alpha)
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}")
    C = check_costs(C)
    H = np.asarray(H, dtype=float)
    xs = run_ftrl(C)[:-1]
    sigma = inner(C, C)
    cx = inner(C, xs)
    z = -alpha * sigma - cx
    p = run_ogd(z, sigma, 10.0 / alpha)
    hit = np.asarray(uniforms) < p
    if budget is not None:
        hit &= np.cumsum(hit, axis=0) <= budget
    if mode == "hint":
        if np.any(hit & (norm(H) > 1.0 + NORM_SLACK)):
            raise InvalidHintError("hint norm exceeds 1")
        played = np.where(hit[..., None], -H, xs)
        loss = np.where(hit, -inner(C, H), cx)
        queried, abstained = hit, np.zeros_like(hit)
    else:
        played = xs
        loss = np.where(hit, -alpha * sigma, cx)
        queried, abstained = np.zeros_like(hit), hit
    return HintedBatch(xs, p, z, sigma, queried, abstained, played, loss)


def expected_batch_loss(batch: HintedBatch, C, H, alpha: float, mode: str = "hint") -> np.ndarray:
    """Per-round conditional expected loss given ``p_t`` (no budget)."""
    cx = inner(C, batch.xs)
    gain = inner(C, H) if mode == "hint" else alpha * batch.sigma
    return -batch.p * gain + (1.0 - batch.p) * cx
