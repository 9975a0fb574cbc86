"""
Benchmark environments: RiverSwim, two-armed Bandits, GameOfSkill-v1/v2, custom.

Defaults come from default_envs.yaml next to this file; any field set on the
EnvSpec overrides them.  Action 0 is "left", action 1 is "right" on chains.

GameOfSkill endpoints: the reward-paying actions (left at the leftmost state,
right at the rightmost state) are self-transitions.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from core.models import ConfigError, EnvKind, EnvSpec
from mdp.model import TabularMDP

LEFT, RIGHT = 0, 1

_DEFAULTS_PATH = Path(__file__).parent / "default_envs.yaml"


@lru_cache(maxsize=None)
def _load_defaults(path: str = str(_DEFAULTS_PATH)) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def env_defaults(kind: EnvKind) -> dict[str, Any]:
    return dict(_load_defaults().get(kind.value, {}))


# ── builders ───────────────────────────────────────────────────────

def build_env(spec: EnvSpec) -> TabularMDP:
    ok, key, reason = spec.check()
    if not ok:
        raise ConfigError(key, reason)

    if spec.kind == EnvKind.RIVERSWIM:
        return _riverswim(spec)
    if spec.kind == EnvKind.BANDITS:
        return _bandits(spec)
    if spec.kind in (EnvKind.GAME_OF_SKILL_V1, EnvKind.GAME_OF_SKILL_V2):
        return _game_of_skill(spec)
    if spec.kind == EnvKind.CUSTOM:
        return TabularMDP(
            transitions=np.asarray(spec.transitions, dtype=float),
            reward_mean=np.asarray(spec.rewards, dtype=float),
            name="custom",
        )
    raise ConfigError("kind", f"unknown environment kind '{spec.kind}'")


def _pick(spec: EnvSpec, defaults: dict[str, Any], name: str) -> Any:
    value = getattr(spec, name)
    return defaults[name] if value is None else value


def _riverswim(spec: EnvSpec) -> TabularMDP:
    defaults = env_defaults(EnvKind.RIVERSWIM)
    L = int(_pick(spec, defaults, "chain_length"))
    river = {**defaults["river"], **spec.river}
    for prefix in ("interior", "leftmost", "rightmost"):
        total = sum(v for k, v in river.items() if k.startswith(prefix))
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"river.{prefix}_*", f"probabilities sum to {total}, expected 1")

    P = np.zeros((L, 2, L))
    R = np.zeros((L, 2))
    for s in range(L):
        P[s, LEFT, max(s - 1, 0)] = 1.0
        if s == 0:
            P[s, RIGHT, 1] += river["leftmost_right"]
            P[s, RIGHT, 0] += river["leftmost_stay"]
        elif s == L - 1:
            P[s, RIGHT, s] += river["rightmost_stay"]
            P[s, RIGHT, s - 1] += river["rightmost_left"]
        else:
            P[s, RIGHT, s + 1] += river["interior_right"]
            P[s, RIGHT, s] += river["interior_stay"]
            P[s, RIGHT, s - 1] += river["interior_left"]
    R[0, LEFT] = _pick(spec, defaults, "reward_left")
    R[L - 1, RIGHT] = _pick(spec, defaults, "reward_right")
    return TabularMDP(P, R, initial_state=0, name=EnvKind.RIVERSWIM.value)


def _bandits(spec: EnvSpec) -> TabularMDP:
    defaults = env_defaults(EnvKind.BANDITS)
    if spec.horizon_hint is None:
        raise ConfigError("horizon_hint", "bandits needs the horizon to set the Beta arm")
    shift = spec.horizon_hint ** -0.25
    center = float(defaults["beta_arm_center"])
    a, b = center + shift, 1.0 - center - shift
    P = np.ones((1, 2, 1))
    R = np.array([[a / (a + b), float(defaults["deterministic_arm"])]])
    B = np.zeros((1, 2, 2))
    B[0, 0] = (a, b)
    return TabularMDP(P, R, B, initial_state=0, name=EnvKind.BANDITS.value)


def _game_of_skill(spec: EnvSpec) -> TabularMDP:
    defaults = env_defaults(spec.kind)
    L = int(_pick(spec, defaults, "chain_length"))
    q = float(_pick(spec, defaults, "success_prob"))
    reset_left = spec.kind == EnvKind.GAME_OF_SKILL_V2

    P = np.zeros((L, 2, L))
    R = np.zeros((L, 2))
    for s in range(L):
        if s == 0:
            P[s, LEFT, 0] = 1.0
        else:
            P[s, LEFT, 0 if reset_left else s - 1] = 1.0
        if s == L - 1:
            P[s, RIGHT, s] = 1.0
        else:
            P[s, RIGHT, s + 1] = q
            P[s, RIGHT, s] += 1.0 - q
    R[0, LEFT] = _pick(spec, defaults, "reward_left")
    R[L - 1, RIGHT] = _pick(spec, defaults, "reward_right")
    return TabularMDP(P, R, initial_state=0, name=spec.kind.value)
