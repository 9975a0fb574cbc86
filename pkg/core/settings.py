"""
Experiment configuration: YAML files with `env`, `algo`, `run` and an
optional `sweep` section.

    env:
      kind: riverswim
    algo:
      kind: [ucrlv, ucrl2]      # a list expands into one experiment per algorithm
      params: {}
    run:
      horizon: 262144
      trials: 10
    sweep:
      ds: [8, 27, 64, 125]

Run values merge as DEFAULT_RUN < file < preset, so `--preset desk` always
shrinks a full-scale file.
"""

from __future__ import annotations

import os
from dataclasses import fields
from pathlib import Path
from typing import Any

import yaml

from core.models import AlgoKind, AlgoSpec, ConfigError, EnvKind, EnvSpec, ExperimentConfig

THREADS_ENV = "UCRLB_THREADS"

DEFAULT_RUN: dict[str, Any] = {
    "delta": 0.05,
    "trials": 40,
    "base_seed": 0,
    "masking": True,
    "checkpoint_base": 2,
}

PRESETS: dict[str, dict[str, Any]] = {
    "full":        {"horizon": 2 ** 24, "trials": 40},
    "desk":        {"horizon": 2 ** 18, "trials": 10},
    "sweep-desk":  {"horizon": 2 ** 20, "trials": 10},
    "sweep-full":  {"horizon": 2 ** 23, "trials": 50},
}

_RUN_TYPES: dict[str, type] = {
    "horizon": int,
    "trials": int,
    "delta": float,
    "base_seed": int,
    "masking": bool,
    "checkpoint_base": int,
}

_ENV_FIELDS = {f.name for f in fields(EnvSpec)}


# ── reading ────────────────────────────────────────────────────────

def read_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"YAML parse error: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping with env/algo/run sections")
    return raw


def load_experiments(path: str | Path, preset: str | None = None) -> list[ExperimentConfig]:
    return parse_experiments(read_config(path), preset)


def load_sweep(path: str | Path, preset: str | None = None) -> tuple[list[ExperimentConfig], list[float]]:
    raw = read_config(path)
    return parse_experiments(raw, preset), parse_sweep_values(raw)


# ── parsing ────────────────────────────────────────────────────────

def parse_experiments(raw: dict[str, Any], preset: str | None = None) -> list[ExperimentConfig]:
    env = _parse_env(_section(raw, "env", required=True))
    algo_raw = _section(raw, "algo")
    run = _parse_run(_section(raw, "run"), preset)

    kinds = algo_raw.get("kind", AlgoKind.UCRLV.value)
    if not isinstance(kinds, list):
        kinds = [kinds]
    if not kinds:
        raise ConfigError("algo.kind", "empty algorithm list")
    params = algo_raw.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("algo.params", "must be a mapping")

    configs = []
    for kind in kinds:
        algo = AlgoSpec(kind=_enum(AlgoKind, kind, "algo.kind"), params=dict(params))
        cfg = ExperimentConfig(env=env, algo=algo, **run)
        ok, key, reason = cfg.check()
        if not ok:
            raise ConfigError(key, reason)
        configs.append(cfg)
    return configs


def parse_sweep_values(raw: dict[str, Any]) -> list[float]:
    sweep = _section(raw, "sweep", required=True)
    values = sweep.get("ds")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.ds", "must be a non-empty list of numbers")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError("sweep.ds", f"invalid value {v!r}")
        out.append(float(v))
    return out


def _section(raw: dict[str, Any], name: str, required: bool = False) -> dict[str, Any]:
    value = raw.get(name)
    if value is None:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a mapping")
    return value


def _parse_env(section: dict[str, Any]) -> EnvSpec:
    if "kind" not in section:
        raise ConfigError("env.kind", "missing required key")
    unknown = set(section) - _ENV_FIELDS
    if unknown:
        raise ConfigError(f"env.{sorted(unknown)[0]}", "unknown key")
    values = dict(section)
    values["kind"] = _enum(EnvKind, values["kind"], "env.kind")
    if "river" in values and not isinstance(values["river"], dict):
        raise ConfigError("env.river", "must be a mapping")
    values.setdefault("river", {})
    spec = EnvSpec(**values)
    ok, key, reason = spec.check()
    if not ok:
        raise ConfigError(f"env.{key}", reason)
    return spec


def _parse_run(section: dict[str, Any], preset: str | None) -> dict[str, Any]:
    unknown = set(section) - set(_RUN_TYPES)
    if unknown:
        raise ConfigError(f"run.{sorted(unknown)[0]}", "unknown key")
    merged = dict(DEFAULT_RUN)
    merged.update(section)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset '{preset}' (have {', '.join(PRESETS)})")
        merged.update(PRESETS[preset])
    if "horizon" not in merged:
        raise ConfigError("run.horizon", "missing required key")

    run: dict[str, Any] = {}
    for key, typ in _RUN_TYPES.items():
        run[key] = _coerce(merged[key], typ, f"run.{key}")
    return run


def _coerce(value: Any, typ: type, key: str) -> Any:
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if typ is int:
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _enum(enum_cls, value: Any, key: str):
    try:
        return enum_cls(str(value).strip().lower())
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(key, f"unknown value '{value}' (allowed: {allowed})") from None


# ── environment ────────────────────────────────────────────────────

def worker_count(default: int | None = None) -> int:
    """Trial worker processes: UCRLB_THREADS if set, else the CPU count."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(THREADS_ENV, f"expected a positive integer, got '{raw}'") from None
        if n < 1:
            raise ConfigError(THREADS_ENV, "must be >= 1")
        return n
    if default is not None:
        return max(1, default)
    return os.cpu_count() or 1
