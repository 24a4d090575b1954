"""Experiment configuration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from ..adversaries import EnvSpec, bad_round_set
from ..core import InvalidParameterError, check_alpha

ALGOS = ("ftrl", "hinted", "abstain", "unc_rand", "unc_det", "expected_hints", "det_reference")
EMITS = ("csv", "json")


class ConfigError(InvalidParameterError):
    """Raised for inconsistent experiment settings."""


@dataclass(frozen=True)
class ExperimentConfig:
    algo: str = "hinted"
    env: EnvSpec = field(default_factory=EnvSpec)
    T: int = 1000
    trials: int = 10
    alpha: float = 1.0
    K: float = 1.0
    epsilon: float = 1.0
    seed: int = 0
    out_dir: Optional[str] = None
    emit: tuple[str, ...] = ()
    # Hard cap on hint queries per trial (None = no cap).
    query_cap: Optional[int] = None
    # Query budget scale C of the deterministic reference learner.
    C_ref: float = 1.0
    # Rounds at which per-trial regret is recorded in the summary.
    checkpoints: tuple[int, ...] = ()
    # Keep the (T, trials) per-round series even when no CSV is written.
    keep_series: bool = False
    comparators: int = 20

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algo {self.algo!r}; choose from {ALGOS}")
        if self.T < 1 or self.trials < 1:
            raise ConfigError("T and trials must be positive")
        check_alpha(self.alpha)
        bad = [e for e in self.emit if e not in EMITS]
        if bad:
            raise ConfigError(f"unknown emit targets {bad}")
        if self.emit and not self.out_dir:
            raise ConfigError("emitting files needs out_dir")
        if self.env.kind == "det_lb" and self.algo not in ("det_reference", "ftrl", "unc_det"):
            raise ConfigError("det_lb only drives deterministic learners")
        if self.algo == "det_reference" and self.env.kind != "det_lb":
            raise ConfigError("det_reference is paired with the det_lb environment")
        if any(not 1 <= c <= self.T for c in self.checkpoints):
            raise ConfigError("checkpoints must lie in [1, T]")

    @property
    def d(self) -> int:
        return self.env.d

    @property
    def series_needed(self) -> bool:
        return self.keep_series or "csv" in self.emit

    def to_dict(self) -> dict:
        out = asdict(self)
        out["env"]["bad_set"] = sorted(self.env.bad_set)
        return out


def build_config(
    algo: str = "hinted",
    env: str = "random_unit",
    d: Optional[int] = None,
    T: int = 1000,
    trials: int = 10,
    alpha: float = 1.0,
    K: float = 1.0,
    epsilon: float = 1.0,
    seed: int = 0,
    bad_frac: float = 0.0,
    bad_count: Optional[int] = None,
    bad_mode: str = "negate",
    hint_policy: Optional[str] = None,
    noise_scale: float = 0.5,
    hint_magnitude: float = 2.0,
    drift: float = 0.3,
    replay_path: Optional[str] = None,
    out_dir: Optional[str] = None,
    emit=(),
    **extra,
) -> ExperimentConfig:
    """Flat keyword form used by the CLI and sweep files."""
    if d is None:
        d = {"lb1": 2, "det_lb": 4}.get(env, 2)
    if bad_count is None:
        bad_count = math.ceil(bad_frac * T) if bad_frac > 0 else 0
    if hint_policy is None:
        hint_policy = "expected" if algo == "expected_hints" else (
            "alpha_good" if algo in ("unc_rand", "unc_det") else "perfect")
    if isinstance(emit, str):
        emit = tuple(e for e in emit.split(",") if e)
    spec = EnvSpec(
        kind=env,
        d=d,
        alpha=alpha,
        bad_set=bad_round_set(T, bad_count, seed),
        hint_policy=hint_policy,
        noise_scale=noise_scale,
        hint_magnitude=hint_magnitude,
        bad_mode=bad_mode,
        drift=drift,
        replay_path=replay_path,
        seed=seed,
    )
    if "checkpoints" in extra and extra["checkpoints"] is not None:
        extra["checkpoints"] = tuple(int(c) for c in extra["checkpoints"])
    return ExperimentConfig(
        algo=algo, env=spec, T=T, trials=trials, alpha=alpha, K=K, epsilon=epsilon,
        seed=seed, out_dir=out_dir, emit=tuple(emit), **extra,
    )


def with_env(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, env=replace(config.env, **changes))
