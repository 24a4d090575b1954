"""One-dimensional OGD on a shrinking interval, plus the switch-once oracle.

The learner plays ``p_t`` in ``[0, 1]``; after seeing ``(z_t, sigma_t)`` it
takes a step of size ``lambda/(1+sigma_{1:t})`` and projects onto
``[0, min(1, lambda/sqrt(1+sigma_{1:t}))]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, InvalidParameterError, ProtocolViolationError

Z_SLACK = 1e-9


@dataclass(frozen=True)
class OgdState:
    lam: float
    p: np.ndarray | float
    sigma_sum: np.ndarray | float
    domain_hi: np.ndarray | float


def ogd_init(lam: float, batch: tuple[int, ...] = ()) -> OgdState:
    lam = float(lam)
    if not (lam >= 1.0 and np.isfinite(lam)):
        raise InvalidParameterError(f"lambda must be >= 1, got {lam!r}")
    if batch:
        return OgdState(lam, np.zeros(batch), np.zeros(batch), np.ones(batch))
    return OgdState(lam, 0.0, 0.0, 1.0)


def check_z_protocol(z, sigma) -> None:
    z = np.asarray(z, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any((sigma < 0) | (sigma > 1.0 + 1e-12)):
        raise ProtocolViolationError(f"sigma must lie in [0, 1], got {sigma!r}")
    if np.any(z * z > 4.0 * sigma + Z_SLACK):
        raise ProtocolViolationError("z^2 exceeds 4 sigma")


def ogd_update(state: OgdState, z, sigma) -> OgdState:
    check_z_protocol(z, sigma)
    sigma_sum = state.sigma_sum + np.asarray(sigma, dtype=float)
    eta = state.lam / (1.0 + sigma_sum)
    hi = np.minimum(1.0, state.lam / np.sqrt(1.0 + sigma_sum))
    p = np.clip(state.p - eta * np.asarray(z, dtype=float), 0.0, hi)
    if np.ndim(p) == 0:
        return OgdState(state.lam, float(p), float(sigma_sum), float(hi))
    return OgdState(state.lam, p, sigma_sum, hi)


def run_ogd(zs, sigmas, lam: float) -> np.ndarray:
    """Plays ``p_1 .. p_T`` for the given feedback (the play precedes each update)."""
    zs = np.asarray(zs, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if zs.shape != sigmas.shape:
        raise InvalidInputError("zs and sigmas differ in length")
    state = ogd_init(lam, zs.shape[1:])
    ps = np.empty_like(zs)
    for t in range(zs.shape[0]):
        ps[t] = state.p
        state = ogd_update(state, zs[t], sigmas[t])
    return ps


@dataclass(frozen=True)
class SwitchOnceSeq:
    """``q_t = delta`` for ``t <= S`` and 0 afterwards."""

    S: int
    delta: float

    def values(self, T: int) -> np.ndarray:
        q = np.zeros(T)
        q[: self.S] = self.delta
        return q


def max_delta(sigmas, lam: float) -> np.ndarray:
    """Largest admissible ``delta`` for each switch index ``S = 0..T``."""
    sig = np.concatenate([[0.0], np.cumsum(np.asarray(sigmas, dtype=float))])
    return np.minimum(1.0, lam / np.sqrt(1.0 + sig))


def switch_once_best(zs, sigmas, lam: float, ps) -> tuple[float, SwitchOnceSeq]:
    """Maximise ``sum z_t (p_t - q_t)`` over switch-once sequences.

    The objective is linear in ``delta`` for fixed ``S``, so checking the
    two endpoints ``0`` and ``max_delta(S)`` is exact.
    """
    zs = np.asarray(zs, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if not (zs.shape == sigmas.shape == ps.shape) or zs.ndim != 1:
        raise InvalidInputError("zs, sigmas and ps must be 1-D of equal length")
    if lam < 1.0:
        raise InvalidParameterError("lambda must be >= 1")
    base = float(np.dot(zs, ps))
    Z = np.concatenate([[0.0], np.cumsum(zs)])
    gains = -max_delta(sigmas, lam) * Z
    S = int(np.argmax(gains))
    if gains[S] <= 0.0:
        return base, SwitchOnceSeq(0, 0.0)
    return base + float(gains[S]), SwitchOnceSeq(S, float(max_delta(sigmas, lam)[S]))


def switch_once_oracle(zs, sigmas, lam: float, ps) -> float:
    return switch_once_best(zs, sigmas, lam, ps)[0]


def switch_once_grid(zs, sigmas, lam: float, ps, n_grid: int = 10_000) -> float:
    """Same supremum by brute force over a ``delta`` grid, for cross-checking."""
    zs = np.asarray(zs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    base = float(np.dot(zs, ps))
    Z = np.concatenate([[0.0], np.cumsum(zs)])
    hi = max_delta(sigmas, lam)
    frac = np.linspace(0.0, 1.0, n_grid)
    vals = -np.outer(hi, frac) * Z[:, None]
    return base + float(vals.max())


def ogd_bound_rhs(sigma_total, lam: float):
    return lam * (1.0 + 3.0 * np.log1p(np.asarray(sigma_total, dtype=float)))


def switch_once_values(zs, sigmas, lam: float, ps) -> np.ndarray:
    """Column-wise :func:`switch_once_oracle` for ``(T, n)`` arrays of independent traces."""
    zs = np.asarray(zs, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    ps = np.asarray(ps, dtype=float)
    zero = np.zeros((1,) + zs.shape[1:])
    Z = np.concatenate([zero, np.cumsum(zs, axis=0)])
    sig = np.concatenate([zero, np.cumsum(sigmas, axis=0)])
    hi = np.minimum(1.0, lam / np.sqrt(1.0 + sig))
    gain = np.maximum(0.0, np.max(-hi * Z, axis=0))
    return np.sum(zs * ps, axis=0) + gain
