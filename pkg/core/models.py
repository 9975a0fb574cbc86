"""
Dataclasses for environment specs, experiment configs, regret traces and reports.
These are the shared value objects used across the entire system.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any
import math
import uuid


# ── Enums ──────────────────────────────────────────────────────────

class EnvKind(str, Enum):
    RIVERSWIM = "riverswim"
    BANDITS = "bandits"
    GAME_OF_SKILL_V1 = "game_of_skill_v1"
    GAME_OF_SKILL_V2 = "game_of_skill_v2"
    CUSTOM = "custom"


class AlgoKind(str, Enum):
    UCRLV = "ucrlv"
    UCRL2 = "ucrl2"
    TSDE = "tsde"
    OPTIMAL = "optimal"
    FIXED = "fixed"


class RunEvent(str, Enum):
    EXPERIMENT_STARTED = "experiment_started"
    EXPERIMENT_FINISHED = "experiment_finished"
    TRIAL_FINISHED = "trial_finished"
    TRIAL_FAILED = "trial_failed"
    SWEEP_POINT = "sweep_point"
    VERIFY_SUITE = "verify_suite"


class VerifyScope(str, Enum):
    SUBSETS = "subsets"
    OPTIMISM = "optimism"
    SUBMODULARITY = "submodularity"
    COVERAGE = "coverage"
    EVI = "evi"
    ALL = "all"


# ── Errors ─────────────────────────────────────────────────────────

class UcrlbError(Exception):
    """Base class for every failure raised by this package."""


class ConfigError(UcrlbError):
    """Invalid environment spec or experiment config.  `key` names the field."""

    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason

    def __reduce__(self):
        return (self.__class__, (self.key, self.reason))


class DataError(UcrlbError):
    pass


class NonConvergenceError(UcrlbError):
    """An iteration hit its cap.  Carries the residual trail for diagnostics."""

    def __init__(self, what: str, iterations: int, last_span: float,
                 span_history: list[float] | None = None):
        super().__init__(
            f"{what} did not converge after {iterations} iterations (last span {last_span:.3e})"
        )
        self.what = what
        self.iterations = iterations
        self.last_span = last_span
        self.span_history = list(span_history or [])

    def __reduce__(self):
        return (self.__class__, (self.what, self.iterations, self.last_span, self.span_history))


class GuardError(UcrlbError):
    pass


class EpisodeBoundError(UcrlbError):
    pass


class SweepError(UcrlbError):
    def __init__(self, ds: float, reason: str):
        super().__init__(f"ds={ds:g}: {reason}")
        self.ds = ds
        self.reason = reason

    def __reduce__(self):
        return (self.__class__, (self.ds, self.reason))


class TrialError(UcrlbError):
    def __init__(self, trial: int, cause: Exception, diagnostics: dict[str, Any] | None = None):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.cause = cause
        self.diagnostics = dict(diagnostics or {})

    def __reduce__(self):
        return (self.__class__, (self.trial, self.cause, self.diagnostics))


# ── EnvSpec ────────────────────────────────────────────────────────

@dataclass
class EnvSpec:
    """Declarative environment description.  Unset fields take the YAML defaults."""
    kind: EnvKind = EnvKind.RIVERSWIM
    chain_length: int | None = None
    success_prob: float | None = None
    reward_left: float | None = None
    reward_right: float | None = None
    horizon_hint: int | None = None
    # RiverSwim transition overrides (keys as in mdp/default_envs.yaml)
    river: dict[str, float] = field(default_factory=dict)
    # custom kind only
    transitions: list | None = None
    rewards: list | None = None

    def check(self) -> tuple[bool, str, str]:
        """Return (ok, offending_field, reason)."""
        if self.chain_length is not None:
            if self.kind in (EnvKind.RIVERSWIM, EnvKind.GAME_OF_SKILL_V1, EnvKind.GAME_OF_SKILL_V2):
                if self.chain_length < 2:
                    return False, "chain_length", "chain length must be >= 2"
        if self.success_prob is not None and not (0.0 < self.success_prob <= 1.0):
            return False, "success_prob", "probability must lie in (0, 1]"
        for name in ("reward_left", "reward_right"):
            value = getattr(self, name)
            if value is not None and not (0.0 <= value <= 1.0):
                return False, name, "reward must lie in [0, 1]"
        if self.horizon_hint is not None and self.horizon_hint < 1:
            return False, "horizon_hint", "must be a positive integer"
        if self.kind == EnvKind.BANDITS and self.horizon_hint is not None:
            if self.horizon_hint ** -0.25 >= 0.2:
                return False, "horizon_hint", "bandit Beta arm needs T > 625"
        for key, p in self.river.items():
            if not (0.0 <= p <= 1.0):
                return False, f"river.{key}", "probability must lie in [0, 1]"
        if self.kind == EnvKind.CUSTOM and (self.transitions is None or self.rewards is None):
            return False, "transitions", "custom environments need transitions and rewards"
        return True, "", "ok"

    @property
    def label(self) -> str:
        if self.kind == EnvKind.GAME_OF_SKILL_V2 and self.chain_length is not None:
            return f"{self.kind.value}[L={self.chain_length}]"
        return self.kind.value

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value,
            "chain_length": self.chain_length,
            "success_prob": self.success_prob,
            "reward_left": self.reward_left,
            "reward_right": self.reward_right,
            "horizon_hint": self.horizon_hint,
        }
        if self.river:
            out["river"] = dict(self.river)
        return out


# ── GainReport ─────────────────────────────────────────────────────

@dataclass
class GainReport:
    """
    Optimal average reward of a model.  `bias` is relative (min entry 0).
    Single-state models have diameter 0 by convention, which callers of the
    regret bound clamp to 1.
    """
    gain: float
    bias: Any
    policy: Any
    iterations: int
    residual_span: float

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "bias": [float(b) for b in self.bias],
            "policy": [int(a) for a in self.policy],
            "iterations": self.iterations,
            "residual_span": self.residual_span,
        }


# ── AlgoSpec / ExperimentConfig ────────────────────────────────────

@dataclass
class AlgoSpec:
    kind: AlgoKind = AlgoKind.UCRLV
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params)}


@dataclass
class ExperimentConfig:
    env: EnvSpec = field(default_factory=EnvSpec)
    algo: AlgoSpec = field(default_factory=AlgoSpec)
    horizon: int = 2 ** 24
    trials: int = 40
    delta: float = 0.05
    base_seed: int = 0
    masking: bool = True
    checkpoint_base: int = 2

    def check(self) -> tuple[bool, str, str]:
        if self.horizon < 1:
            return False, "run.horizon", "must be >= 1"
        if self.trials < 1:
            return False, "run.trials", "must be >= 1"
        if not (0.0 < self.delta < 1.0):
            return False, "run.delta", "must lie in (0, 1)"
        if self.base_seed < 0:
            return False, "run.base_seed", "must be >= 0"
        if self.checkpoint_base < 2:
            return False, "run.checkpoint_base", "must be >= 2"
        ok, key, reason = self.env.check()
        if not ok:
            return False, f"env.{key}", reason
        return True, "", "ok"

    def checkpoints(self) -> list[int]:
        """Geometric grid 1, b, b^2, ... capped at the horizon (horizon always included)."""
        points: list[int] = []
        t = 1
        while t <= self.horizon:
            points.append(t)
            t *= self.checkpoint_base
        if points[-1] != self.horizon:
            points.append(self.horizon)
        return points

    def to_dict(self) -> dict:
        return {
            "env": self.env.to_dict(),
            "algo": self.algo.to_dict(),
            "horizon": self.horizon,
            "trials": self.trials,
            "delta": self.delta,
            "base_seed": self.base_seed,
            "masking": self.masking,
            "checkpoint_base": self.checkpoint_base,
        }


# ── Traces and results ─────────────────────────────────────────────

@dataclass
class MaskingMaps:
    """state_perm[true] = masked id, action_perm[true] = masked id."""
    state_perm: list[int]
    action_perm: list[int]

    def __post_init__(self) -> None:
        self.state_inverse = _inverse(self.state_perm, "state_perm")
        self.action_inverse = _inverse(self.action_perm, "action_perm")

    @classmethod
    def identity(cls, num_states: int, num_actions: int) -> "MaskingMaps":
        return cls(list(range(num_states)), list(range(num_actions)))


def _inverse(perm: list[int], name: str) -> list[int]:
    if sorted(perm) != list(range(len(perm))):
        raise ConfigError(name, "masking map is not a bijection")
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


@dataclass
class RegretTrace:
    algo: str
    env: str
    trial: int
    checkpoints: list[int] = field(default_factory=list)
    cumulative_regret: list[float] = field(default_factory=list)
    episodes_at: list[int] = field(default_factory=list)
    episode_starts: list[int] = field(default_factory=list)
    optimal_gain: float = 0.0
    total_reward: float = 0.0
    duration_ms: int | None = None

    @property
    def episode_count(self) -> int:
        return len(self.episode_starts)

    @property
    def final_regret(self) -> float:
        return self.cumulative_regret[-1] if self.cumulative_regret else 0.0

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "env": self.env,
            "trial": self.trial,
            "checkpoints": list(self.checkpoints),
            "cumulative_regret": list(self.cumulative_regret),
            "episodes_at": list(self.episodes_at),
            "episode_count": self.episode_count,
            "optimal_gain": self.optimal_gain,
            "total_reward": self.total_reward,
        }


@dataclass
class SummaryRow:
    t: int
    mean_regret: float
    std_regret: float
    bound_ref: float | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list[RegretTrace] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)

    @property
    def final_mean(self) -> float:
        return self.summary[-1].mean_regret if self.summary else 0.0

    @property
    def final_std(self) -> float:
        return self.summary[-1].std_regret if self.summary else 0.0


@dataclass
class SweepRow:
    algo: str
    ds: float
    num_states: int
    diameter: float
    success_prob: float
    raw_regret: float
    norm_regret: float
    horizon: int

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "ds": self.ds,
            "s": self.num_states,
            "d": self.diameter,
            "q": self.success_prob,
            "raw_regret": self.raw_regret,
            "norm_regret": self.norm_regret,
        }


@dataclass
class BoundReport:
    """Closed-form diagnostics.  The regret bound is a reference shape, constants as printed."""
    theoretical_regret: float
    episode_bound: float
    diameter: float
    num_states: int
    num_actions: int
    horizon: float
    delta: float
    label: str = "reference shape, constants as printed"

    def to_dict(self) -> dict:
        return {
            "theoretical_regret": self.theoretical_regret,
            "episode_bound": self.episode_bound,
            "D": self.diameter,
            "S": self.num_states,
            "A": self.num_actions,
            "T": self.horizon,
            "delta": self.delta,
            "label": self.label,
        }


# ── RunEntry ───────────────────────────────────────────────────────

@dataclass
class RunEntry:
    """Immutable record of one run-log event."""
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    event: str = ""
    algo: str = ""
    env: str = ""
    trial: int | None = None
    details: dict[str, Any] = field(default_factory=dict)
    error: str | None = None
    duration_ms: int | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": self.timestamp.isoformat(),
            "event": self.event,
            "algo": self.algo,
            "env": self.env,
            "trial": self.trial,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
            "error": self.error,
            "duration_ms": self.duration_ms,
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "tolist"):
        return value.tolist()
    return value
