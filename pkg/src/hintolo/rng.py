"""Seeded, counter-addressed randomness.

Learner coins come from a Philox stream keyed by ``(seed, trial, purpose)``;
the uniform for round ``t`` is output ``t - 1`` of that stream, so it can be
computed from the key and the round index alone. Environment randomness
uses a separate, ordinary ``Generator`` per trial.
"""

from __future__ import annotations

import numpy as np

COIN = 0
ENV = 1
AUX = 2

_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53, matches Generator.random


def stream_key(seed: int, trial: int, purpose: int = COIN) -> tuple[int, int]:
    state = np.random.SeedSequence([int(seed), int(trial), int(purpose)]).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def round_uniforms(key: tuple[int, int], first_round: int, n: int) -> np.ndarray:
    """Uniforms in [0, 1) for rounds ``first_round .. first_round + n - 1`` (1-based)."""
    if first_round < 1:
        raise ValueError("rounds are 1-based")
    offset = first_round - 1
    block, lane = divmod(offset, 4)
    bitgen = np.random.Philox(
        key=np.array(key, dtype=np.uint64),
        counter=np.array([block, 0, 0, 0], dtype=np.uint64),
    )
    raw = bitgen.random_raw(lane + n)[lane:]
    return (raw >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def round_uniform(key: tuple[int, int], t: int) -> float:
    return float(round_uniforms(key, t, 1)[0])


def env_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), ENV]))


def aux_generator(seed: int, tag: int = 0) -> np.random.Generator:
    """Generator for experiment-level draws (comparator sets, bad sets) independent of trials."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), AUX, int(tag)]))
