"""Cost and hint generators.

Oblivious environments are driven by a per-trial ``numpy`` Generator and
emit ``(costs, hints)`` blocks. Draws are made in fixed internal chunks, so
the sequence for a trial does not depend on how callers slice the horizon.
The deterministic lower-bound adversary is adaptive and is exposed as a
single-round function instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (
    InvalidInputError,
    InvalidParameterError,
    PrefixState,
    check_alpha,
    inner,
    norm,
    project_to_ball,
)
from .rng import aux_generator, env_generator

ENV_KINDS = ("random_unit", "lb1", "det_lb", "drift", "replay_file")
HINT_POLICIES = ("perfect", "alpha_good", "optimistic_noise", "expected")
BAD_MODES = ("negate", "orthogonal", "zero")

GS_TOL = 1e-9
CHUNK = 1024


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_unit_vectors(d, rng, ())


def random_unit_vectors(d: int, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform draws from the unit sphere in ``R^d`` with leading ``shape``."""
    if d < 1:
        raise InvalidParameterError("dimension must be >= 1")
    while True:
        v = rng.standard_normal(tuple(shape) + (d,))
        n = norm(v)
        # Zero-norm draws have probability zero; redraw rather than divide by 0.
        if np.all(n > 0):
            return v / n[..., None]


def rotate90(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def lb1_next(alpha: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    h, c = lb1_block(alpha, rng, ())
    return h, c


def lb1_block(alpha: float, rng: np.random.Generator, shape: tuple[int, ...]):
    """Hint uniform on the circle; cost ``alpha*h + s*sqrt(1-alpha^2)*h_perp`` with a fair sign."""
    alpha = check_alpha(alpha)
    h = random_unit_vectors(2, rng, shape)
    s = rng.choice(np.array([-1.0, 1.0]), size=shape)
    c = alpha * h + (np.asarray(s)[..., None] * math.sqrt(1.0 - alpha * alpha)) * rotate90(h)
    return h, c


def gram_schmidt_complement(vectors, d: int) -> np.ndarray:
    """First standard basis vector with a nonzero residual against ``vectors``, normalised."""
    basis = []

    def residual(v):
        # Two passes keep the result orthogonal to working precision.
        for _ in range(2):
            for b in basis:
                v = v - np.dot(v, b) * b
        return v

    for v in vectors:
        v = np.asarray(v, dtype=float)
        scale = np.linalg.norm(v)
        if scale == 0.0:
            continue
        r = residual(v / scale)
        n = np.linalg.norm(r)
        if n > GS_TOL:
            basis.append(r / n)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        r = residual(e)
        n = np.linalg.norm(r)
        if n > GS_TOL:
            r = residual(r / n)
            return r / np.linalg.norm(r)
    raise InvalidInputError("no orthogonal direction available")


def det_lb_next(will_query: bool, x_t, prefix: PrefixState) -> tuple[Optional[np.ndarray], np.ndarray]:
    """One round of the deterministic lower-bound adversary in ``R^4``.

    On a query round the hint and cost are both ``e_0``. Otherwise the cost
    is a unit vector orthogonal to ``e_0``, to the would-be play and to the
    running cost sum.
    """
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape != (4,) or prefix.d != 4:
        raise InvalidInputError("the deterministic adversary works in four dimensions")
    e0 = np.zeros(4)
    e0[0] = 1.0
    if will_query:
        return e0.copy(), e0.copy()
    # Removing the e_0 component first keeps the search inside S = e_0^perp.
    ps = lambda v: v - v[0] * e0  # noqa: E731
    c = gram_schmidt_complement([e0, ps(x_t), ps(np.asarray(prefix.cost_sum))], 4)
    return None, c


def orthogonal_unit(c) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``c`` (zero vector when ``d = 1``)."""
    c = np.asarray(c, dtype=float)
    d = c.shape[-1]
    if d == 1:
        return np.zeros(1)
    return gram_schmidt_complement([c], d)


def corrupt_hints(h, c, t: int, bad_set, mode: str = "negate") -> np.ndarray:
    if t not in bad_set:
        return np.asarray(h, dtype=float)
    return _corrupt(np.asarray(h, dtype=float), np.asarray(c, dtype=float), mode)


def _corrupt(h: np.ndarray, c: np.ndarray, mode: str) -> np.ndarray:
    if mode == "negate":
        return -h
    if mode == "zero":
        return np.zeros_like(h)
    if mode == "orthogonal":
        if c.ndim == 1:
            return orthogonal_unit(c)
        return np.stack([orthogonal_unit(row) for row in c])
    raise InvalidParameterError(f"unknown corruption mode {mode!r}")


def copied_count(d: int, alpha: float) -> int:
    return max(1, math.ceil(alpha * d - 1e-9))


def expected_hint(c, alpha: float, magnitude: float, rng: np.random.Generator) -> np.ndarray:
    return expected_hint_block(np.asarray(c, dtype=float)[None], alpha, magnitude, rng)[0]


def expected_hint_block(C, alpha: float, magnitude: float, rng: np.random.Generator) -> np.ndarray:
    """Copy the largest-|c_i| coordinates of each row, fill the rest with ``+-magnitude``."""
    alpha = check_alpha(alpha)
    C = np.asarray(C, dtype=float)
    d = C.shape[-1]
    k = copied_count(d, alpha)
    signs = rng.choice(np.array([-magnitude, magnitude]), size=C.shape)
    if k >= d:
        return C.copy()
    order = np.argsort(-np.abs(C), axis=-1, kind="stable")
    keep = np.zeros(C.shape, dtype=bool)
    np.put_along_axis(keep, order[..., :k], True, axis=-1)
    return np.where(keep, C, signs)


def alpha_good_block(C, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """``h = alpha*c_hat + sqrt(1-alpha^2)*c_perp`` with a random unit ``c_perp`` orthogonal to ``c``.

    ``<c, h> = alpha |c| >= alpha |c|^2`` for every cost in the ball.
    """
    alpha = check_alpha(alpha)
    C = np.asarray(C, dtype=float)
    n = norm(C)
    safe = np.where(n > 0, n, 1.0)
    c_hat = C / safe[..., None]
    if C.shape[-1] == 1:
        return alpha * c_hat
    xi = rng.standard_normal(C.shape)
    for _ in range(2):
        # A second pass removes the residual left by cancellation.
        xi -= inner(xi, c_hat)[..., None] * c_hat
        xn = norm(xi)
        xi = xi / np.where(xn > 0, xn, 1.0)[..., None]
    h = alpha * c_hat + math.sqrt(1.0 - alpha * alpha) * xi
    return project_to_ball(h)


def bad_round_set(T: int, count: int, seed: int) -> frozenset:
    """A fixed random subset of ``[T]`` (1-based) shared by all trials of an experiment."""
    count = int(min(max(count, 0), T))
    if count == 0:
        return frozenset()
    picks = aux_generator(seed, tag=1).choice(T, size=count, replace=False) + 1
    return frozenset(int(t) for t in picks)


@dataclass(frozen=True)
class EnvSpec:
    kind: str = "random_unit"
    d: int = 2
    alpha: float = 1.0
    bad_set: frozenset = field(default_factory=frozenset)
    hint_policy: str = "perfect"
    noise_scale: float = 0.5
    hint_fraction: Optional[float] = None
    hint_magnitude: float = 2.0
    bad_mode: str = "negate"
    drift: float = 0.3
    replay_path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise InvalidParameterError(f"unknown environment kind {self.kind!r}")
        if self.hint_policy not in HINT_POLICIES:
            raise InvalidParameterError(f"unknown hint policy {self.hint_policy!r}")
        if self.bad_mode not in BAD_MODES:
            raise InvalidParameterError(f"unknown corruption mode {self.bad_mode!r}")
        if self.kind == "lb1" and self.d != 2:
            raise InvalidParameterError("lb1 is a two-dimensional construction")
        if self.kind == "det_lb" and self.d != 4:
            raise InvalidParameterError("det_lb is a four-dimensional construction")
        if self.kind == "replay_file" and not self.replay_path:
            raise InvalidParameterError("replay_file needs replay_path")
        check_alpha(self.alpha)
        if not 0.0 <= self.drift <= 1.0:
            raise InvalidParameterError("drift must lie in [0, 1]")


class TrialStream:
    """Sequential ``(costs, hints)`` source for one trial of an oblivious environment."""

    def __init__(self, spec: EnvSpec, trial: int, replay: Optional[dict] = None):
        if spec.kind == "det_lb":
            raise InvalidParameterError("det_lb is adaptive; drive it through det_lb_next")
        self.spec = spec
        self.trial = trial
        self.rng = env_generator(spec.seed, trial)
        self._replay = None
        if spec.kind == "replay_file":
            table = replay if replay is not None else load_replay(spec.replay_path)
            if trial not in table:
                raise InvalidInputError(f"replay file has no trial {trial}")
            self._replay = table[trial]
        self._buf_c = np.zeros((0, spec.d))
        self._buf_h = np.zeros((0, spec.d))
        self._t = 0

    def _chunk(self):
        spec, rng = self.spec, self.rng
        if self._replay is not None:
            C, H = self._replay
            lo = self._t + len(self._buf_c)
            if lo >= len(C):
                raise InvalidInputError("replay file exhausted")
            return C[lo : lo + CHUNK], H[lo : lo + CHUNK]
        if spec.kind == "lb1":
            H, C = lb1_block(spec.alpha, rng, (CHUNK,))
        else:
            if spec.kind == "random_unit":
                C = random_unit_vectors(spec.d, rng, (CHUNK,))
            else:
                e1 = np.zeros(spec.d)
                e1[0] = 1.0
                C = spec.drift * e1 + (1.0 - spec.drift) * random_unit_vectors(spec.d, rng, (CHUNK,))
            H = self._hints(C)
        return C, H

    def _hints(self, C):
        spec, rng = self.spec, self.rng
        if spec.hint_policy == "perfect":
            return C.copy()
        if spec.hint_policy == "alpha_good":
            return alpha_good_block(C, spec.alpha, rng)
        if spec.hint_policy == "expected":
            frac = spec.alpha if spec.hint_fraction is None else spec.hint_fraction
            return expected_hint_block(C, frac, spec.hint_magnitude, rng)
        # optimistic_noise: perturbation drawn every round, used only on bad rounds
        xi = random_unit_vectors(spec.d, rng, (len(C),))
        return project_to_ball(C + spec.noise_scale * xi)

    def take(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Rounds ``t+1 .. t+n`` as ``(n, d)`` arrays of costs and (corrupted) hints."""
        while len(self._buf_c) < n:
            C, H = self._chunk()
            self._buf_c = np.concatenate([self._buf_c, C])
            self._buf_h = np.concatenate([self._buf_h, H])
        C, H = self._buf_c[:n], self._buf_h[:n].copy()
        self._buf_c, self._buf_h = self._buf_c[n:], self._buf_h[n:]
        rounds = np.arange(self._t + 1, self._t + n + 1)
        self._t += n
        if self._replay is None:
            H = self._apply_bad(rounds, C, H)
        return C, H

    def _apply_bad(self, rounds, C, H):
        spec = self.spec
        if not spec.bad_set:
            if spec.hint_policy == "optimistic_noise":
                return C.copy()
            return H
        bad = np.fromiter((int(t) in spec.bad_set for t in rounds), bool, len(rounds))
        if spec.hint_policy == "optimistic_noise":
            return np.where(bad[:, None], H, C)
        if bad.any():
            H[bad] = _corrupt(H[bad], C[bad], spec.bad_mode)
        return H


def load_replay(path) -> dict:
    """Read a costs file with columns ``trial, t, c0..c{d-1}, h0..h{d-1}``."""
    rows: dict[int, list] = {}
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = sum(1 for k in header if k.startswith("c"))
        for row in reader:
            trial, t = int(row[0]), int(row[1])
            vals = [float(v) for v in row[2:]]
            rows.setdefault(trial, []).append((t, vals[:d], vals[d : 2 * d]))
    table = {}
    for trial, items in rows.items():
        items.sort(key=lambda r: r[0])
        ts = [r[0] for r in items]
        if ts != list(range(1, len(ts) + 1)):
            raise InvalidInputError(f"trial {trial} rounds are not 1..T")
        table[trial] = (np.array([r[1] for r in items]), np.array([r[2] for r in items]))
    return table


def sum_lengths_gap(costs, queried) -> float:
    """``| |sum of non-query costs|^2 - #non-query rounds |`` for the adversary's identity."""
    costs = np.asarray(costs, dtype=float)
    free = ~np.asarray(queried, dtype=bool)
    s = costs[free].sum(axis=0) if free.any() else np.zeros(costs.shape[-1])
    return abs(float(inner(s, s)) - float(free.sum()))
