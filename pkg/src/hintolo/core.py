"""Unit-ball geometry, prefix accounting, and the regret / query-cost definitions.

Vectors are plain float64 numpy arrays. Every geometric helper accepts a
leading batch shape ``(..., d)`` so the same code drives a single learner
and a stack of independent Monte-Carlo trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Slack allowed on ``norm(c) <= 1`` style checks, absorbing float rounding
# in callers that normalise vectors themselves.
NORM_SLACK = 1e-12


class InvalidInputError(ValueError):
    """Raised for malformed or non-finite vectors and sequences."""


class InvalidParameterError(ValueError):
    """Raised for out-of-range scalar parameters (alpha, r, lambda, ...)."""


class InvalidCostError(InvalidInputError):
    """Raised when a cost vector leaves the unit ball."""


class InvalidHintError(InvalidInputError):
    """Raised when a hint vector leaves the unit ball."""


class ProtocolViolationError(RuntimeError):
    """Raised when a caller breaks an online protocol precondition."""


def as_point(v, name: str = "vector") -> np.ndarray:
    """Return ``v`` as a read-only finite 1-D float array."""
    arr = np.array(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite components: {arr}")
    arr.setflags(write=False)
    return arr


def norm(v) -> np.ndarray | float:
    """Euclidean norm over the last axis."""
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


def inner(a, b) -> np.ndarray | float:
    """Inner product over the last axis (broadcasting)."""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def _require_finite(v: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite components")


def check_costs(c, name: str = "cost") -> np.ndarray:
    """Validate that every vector in ``c`` is finite and inside the unit ball."""
    c = np.asarray(c, dtype=float)
    _require_finite(c, name)
    n = norm(c)
    if np.any(n > 1.0 + NORM_SLACK):
        raise InvalidCostError(f"{name} norm {np.max(n)!r} exceeds 1")
    return c


def project_to_ball(v) -> np.ndarray:
    """Euclidean projection onto the closed unit ball."""
    v = np.asarray(v, dtype=float)
    _require_finite(v, "vector")
    scale = np.maximum(norm(v), 1.0)
    return v / np.expand_dims(scale, -1)


def ball_regularized_argmin(g, r) -> np.ndarray:
    """Minimise ``<g, x> + (r/2)|x|^2`` over the unit ball.

    The unconstrained minimiser is ``-g/r``; when that leaves the ball the
    constrained optimum is the boundary point ``-g/|g|``. Both cases are
    ``-g / max(r, |g|)``.
    """
    g = np.asarray(g, dtype=float)
    r = np.asarray(r, dtype=float)
    _require_finite(g, "g")
    if np.any(~(r > 0)):
        raise InvalidParameterError(f"regularizer weight must be positive, got {r!r}")
    denom = np.maximum(r, norm(g))
    return -g / np.expand_dims(denom, -1)


def ball_objective(x, g, r) -> np.ndarray | float:
    """The quadratic ``<g, x> + (r/2)|x|^2`` minimised by :func:`ball_regularized_argmin`."""
    x = np.asarray(x, dtype=float)
    return inner(g, x) + 0.5 * np.asarray(r, dtype=float) * inner(x, x)


def best_fixed_comparator(costs) -> tuple[np.ndarray, float]:
    """Best fixed point of the ball in hindsight and its total cost.

    Returns ``(u, v)`` with ``u = -c_{1:T}/|c_{1:T}|`` and ``v = -|c_{1:T}|``;
    a zero aggregate gives ``u = 0`` (every point attains 0).
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 2 or costs.shape[0] == 0:
        raise InvalidInputError("need a non-empty (T, d) sequence of costs")
    check_costs(costs)
    total = costs.sum(axis=0)
    n = float(norm(total))
    if n == 0.0:
        return np.zeros_like(total), 0.0
    return -total / n, -n


def log_ratio_sum(a) -> float:
    """``sum_t a_t / (1 + a_{1:t})``; never exceeds ``log(1 + a_{1:T})`` for a >= 0."""
    a = np.asarray(a, dtype=float)
    return float(np.sum(a / (1.0 + np.cumsum(a))))


@dataclass(frozen=True)
class PrefixState:
    """Running aggregates ``t``, ``c_{1:t}`` and ``sigma_{1:t} = sum |c|^2``.

    ``cost_sum`` may carry a leading batch shape; ``sigma_sum`` then has the
    matching shape.
    """

    t: int
    cost_sum: np.ndarray
    sigma_sum: np.ndarray | float

    @classmethod
    def zero(cls, d: int, batch: tuple[int, ...] = ()) -> "PrefixState":
        if d < 1:
            raise InvalidParameterError("dimension must be positive")
        sigma = np.zeros(batch) if batch else 0.0
        return cls(0, np.zeros(batch + (d,)), sigma)

    def advance(self, c) -> "PrefixState":
        c = check_costs(c)
        sq = inner(c, c)
        return PrefixState(self.t + 1, self.cost_sum + c, self.sigma_sum + sq)

    @property
    def d(self) -> int:
        return self.cost_sum.shape[-1]

    @property
    def cost_norm(self):
        return norm(self.cost_sum)


@dataclass(frozen=True)
class RoundRecord:
    """Transcript of a single round.

    ``ftrl_point`` is the point the base learner proposed; ``played`` is what
    was actually played. On abstained rounds ``played`` repeats the base
    point but the loss is the abstention reward ``-alpha |c|^2``.
    """

    t: int
    queried: bool
    abstained: bool
    hint: Optional[np.ndarray]
    ftrl_point: np.ndarray
    played: np.ndarray
    cost: np.ndarray
    loss: float
    p_t: float
    z_t: float
    sigma_t: float
    projected: bool = field(default=False)

    def __post_init__(self):
        if (self.hint is not None) != self.queried:
            raise InvalidInputError("a hint is present exactly on queried rounds")


def _stack_costs(records: Sequence[RoundRecord]) -> np.ndarray:
    return np.stack([r.cost for r in records])


def regret_of_trace(records: Sequence[RoundRecord]) -> float:
    """Total recorded loss minus the best fixed ball point's loss."""
    if len(records) == 0:
        return 0.0
    total_loss = float(sum(r.loss for r in records))
    _, best = best_fixed_comparator(_stack_costs(records))
    return total_loss - best


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    return alpha


def query_cost_of_trace(records: Sequence[RoundRecord], alpha: float) -> float:
    """``sum_t 1_t * alpha * |c_t|^2`` over queried or abstained rounds."""
    alpha = check_alpha(alpha)
    return float(
        sum(alpha * float(inner(r.cost, r.cost)) for r in records if r.queried or r.abstained)
    )
