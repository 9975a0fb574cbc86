"""
Harness — runs seeded trials, accounts regret, aggregates, sweeps DS.

Flow:  ExperimentConfig  ->  run_trial() x trials  ->  summarize()  ->  ExperimentResult

The environment and the random streams always use TRUE state/action ids;
the agent only ever sees the masked ids of its trial.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Sequence

import numpy as np

from agents.base import AgentContext
from core.audit import RunLogger
from core.models import (
    AlgoKind,
    BoundReport,
    ConfigError,
    EnvKind,
    EnvSpec,
    EpisodeBoundError,
    ExperimentConfig,
    ExperimentResult,
    GuardError,
    MaskingMaps,
    NonConvergenceError,
    RegretTrace,
    RunEvent,
    SummaryRow,
    SweepError,
    SweepRow,
    TrialError,
)
from core.registry import AgentRegistry, default_registry
from core.settings import worker_count
from core.streams import draw_masking, make_streams
from mdp.environments import build_env
from mdp.model import TabularMDP, env_step
from mdp.oracles import diameter, optimal_gain
from verify.bounds import bound_report, episode_bound, theoretical_regret_bound

OPTIMAL_GAIN_TOL = 1e-9
SWEEP_DIAMETER_TOL = 1e-6
SWEEP_DIAMETER_SLACK = 0.10
SWEEP_BISECTION_STEPS = 200
BOUND_LABEL = BoundReport.__dataclass_fields__["label"].default


# ── environment ────────────────────────────────────────────────────

def resolve_env_spec(cfg: ExperimentConfig) -> EnvSpec:
    """Bandits size their Beta arm from the horizon unless told otherwise."""
    if cfg.env.kind == EnvKind.BANDITS and cfg.env.horizon_hint is None:
        return replace(cfg.env, horizon_hint=cfg.horizon)
    return cfg.env


def build_trial_env(cfg: ExperimentConfig) -> TabularMDP:
    return build_env(resolve_env_spec(cfg))


# ── single trial ───────────────────────────────────────────────────

def run_trial(
    cfg: ExperimentConfig,
    trial: int,
    registry: AgentRegistry | None = None,
) -> RegretTrace:
    """
    Run one seeded trial for cfg.horizon rounds.

    Cumulative regret at round t is t * V* - (sum of realised rewards up to t),
    recorded at cfg.checkpoints().  Configuration problems raise ConfigError;
    everything else that goes wrong mid-run is wrapped in TrialError.
    """
    registry = registry or default_registry()
    started = time.perf_counter()

    mdp = build_trial_env(cfg)
    S, A = mdp.num_states, mdp.num_actions
    v_star = optimal_gain(mdp, tol=OPTIMAL_GAIN_TOL).gain
    masks = draw_masking(cfg.base_seed, trial, S, A) if cfg.masking else MaskingMaps.identity(S, A)
    streams = make_streams(cfg.base_seed, trial, S, A)

    ctx = AgentContext(
        num_states=S,
        num_actions=A,
        delta=cfg.delta,
        horizon=cfg.horizon,
        rng=streams.agent,
        params=dict(cfg.algo.params),
        model=mdp.permuted(masks.state_perm, masks.action_perm),
        masks=masks,
    )
    agent = registry.build(cfg.algo.kind, ctx)

    trace = RegretTrace(
        algo=cfg.algo.kind.value,
        env=resolve_env_spec(cfg).label,
        trial=trial,
        optimal_gain=v_star,
    )
    checkpoints = cfg.checkpoints()
    next_cp = 0
    state_perm, action_inverse = masks.state_perm, masks.action_inverse

    s = mdp.initial_state
    total = 0.0
    t = 0
    try:
        agent.start()
        for t in range(1, cfg.horizon + 1):
            masked_s = state_perm[s]
            masked_a = agent.act(masked_s)
            a = action_inverse[masked_a]
            episodes_now = agent.episode_count
            reward, nxt = env_step(mdp, s, a, streams.pair(s, a))
            total += reward
            agent.observe(masked_s, masked_a, reward, state_perm[nxt])
            if t == checkpoints[next_cp]:
                trace.checkpoints.append(t)
                trace.cumulative_regret.append(t * v_star - total)
                trace.episodes_at.append(episodes_now)
                next_cp += 1
            s = nxt
    except ConfigError:
        raise
    except Exception as exc:
        raise TrialError(trial, exc, _diagnostics(cfg, agent, t, exc)) from exc

    # an episode opened after round T was never played
    trace.episode_starts = [k for k in agent.episode_starts if k <= cfg.horizon]
    trace.total_reward = total
    trace.duration_ms = int((time.perf_counter() - started) * 1000)

    if cfg.algo.kind == AlgoKind.UCRLV and cfg.horizon > S * A:
        limit = episode_bound(S, A, cfg.horizon)
        if trace.episode_count > limit:
            err = EpisodeBoundError(
                f"{trace.episode_count} episodes exceed the bound {limit:.2f} "
                f"(S={S}, A={A}, T={cfg.horizon})"
            )
            raise TrialError(trial, err, {"episode_starts": trace.episode_starts[-10:]})
    return trace


def _diagnostics(cfg: ExperimentConfig, agent, t: int, exc: Exception) -> dict:
    out = {
        "algo": cfg.algo.kind.value,
        "env": cfg.env.kind.value,
        "round": t,
        "episode": agent.state.episode_index,
        "episode_start": agent.state.episode_start_round,
    }
    if isinstance(exc, NonConvergenceError):
        out["iterations"] = exc.iterations
        out["last_span"] = exc.last_span
        out["span_history"] = exc.span_history
    return out


def _trial_job(cfg: ExperimentConfig, trial: int) -> RegretTrace:
    return run_trial(cfg, trial)


# ── experiments ────────────────────────────────────────────────────

def run_experiment(
    cfg: ExperimentConfig,
    registry: AgentRegistry | None = None,
    logger: RunLogger | None = None,
    workers: int | None = None,
) -> ExperimentResult:
    """
    Run cfg.trials trials and aggregate them per checkpoint.

    Trials fan out to worker processes only with the default registry (a custom
    registry may hold unpicklable factories).  Aggregation is always in
    trial-index order, so results do not depend on scheduling.
    """
    ok, key, reason = cfg.check()
    if not ok:
        raise ConfigError(key, reason)
    logger = logger or RunLogger()
    n_workers = worker_count() if workers is None else max(1, workers)
    algo, env_label = cfg.algo.kind.value, resolve_env_spec(cfg).label
    logger.log(RunEvent.EXPERIMENT_STARTED, algo=algo, env=env_label, details=cfg.to_dict())
    started = time.perf_counter()

    traces: list[RegretTrace | None] = [None] * cfg.trials
    if registry is None and n_workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=min(n_workers, cfg.trials)) as pool:
            futures = [pool.submit(_trial_job, cfg, i) for i in range(cfg.trials)]
            for i, future in enumerate(futures):
                traces[i] = _collect(future.result, i, logger, algo, env_label)
    else:
        for i in range(cfg.trials):
            traces[i] = _collect(lambda i=i: run_trial(cfg, i, registry), i, logger, algo, env_label)

    mdp = build_trial_env(cfg)
    D = reference_diameter(mdp)
    result = ExperimentResult(config=cfg, traces=traces, summary=summarize(traces, mdp, cfg.delta, D))
    details = {
        "trials": cfg.trials,
        "final_mean_regret": result.final_mean,
        "final_std_regret": result.final_std,
        "bound_label": BOUND_LABEL,
    }
    S, A = mdp.num_states, mdp.num_actions
    if cfg.horizon > S * A and cfg.horizon >= 2:
        details["bound"] = bound_report(D, S, A, cfg.horizon, cfg.delta).to_dict()
    logger.log(
        RunEvent.EXPERIMENT_FINISHED,
        algo=algo,
        env=env_label,
        details=details,
        duration_ms=int((time.perf_counter() - started) * 1000),
    )
    return result


def _collect(job, trial: int, logger: RunLogger, algo: str, env: str) -> RegretTrace:
    try:
        trace = job()
    except TrialError as exc:
        logger.log(RunEvent.TRIAL_FAILED, algo=algo, env=env, trial=trial,
                   error=str(exc), details=exc.diagnostics)
        raise
    logger.log(
        RunEvent.TRIAL_FINISHED,
        algo=algo,
        env=env,
        trial=trial,
        details={"episodes": trace.episode_count, "final_regret": trace.final_regret},
        duration_ms=trace.duration_ms,
    )
    return trace


def reference_diameter(mdp: TabularMDP) -> float:
    """Diameter for the bound reference, clamped to >= 1 (a single state has D = 0)."""
    return max(1.0, diameter(mdp))


def summarize(
    traces: Sequence[RegretTrace],
    mdp: TabularMDP,
    delta: float,
    D: float | None = None,
) -> list[SummaryRow]:
    """Mean and population std of regret per checkpoint, plus the bound reference for t > SA."""
    if not traces:
        return []
    S, A = mdp.num_states, mdp.num_actions
    D = reference_diameter(mdp) if D is None else D
    regret = np.array([tr.cumulative_regret for tr in traces], dtype=float)
    rows = []
    for j, t in enumerate(traces[0].checkpoints):
        column = regret[:, j]
        bound = None
        if t > S * A and t >= 2:
            bound = theoretical_regret_bound(D, S, A, t, delta)
        rows.append(SummaryRow(
            t=t,
            mean_regret=float(column.mean()),
            std_regret=float(column.std()),
            bound_ref=bound,
        ))
    return rows


# ── DS sweep ───────────────────────────────────────────────────────

def sweep_chain_length(ds: float) -> int:
    return max(2, int(round(ds ** (1.0 / 3.0))))


def tune_success_prob(ds: float, chain_length: int, base_env: EnvSpec | None = None) -> tuple[float, float]:
    """
    Pick q so GameOfSkill-v2 with the given chain length has diameter ~ ds^(2/3).

    Starts from the hitting-time identity D = (S - 1) / q, checks it against
    the diameter oracle and falls back to bisection.  Returns (q, D).
    """
    target = ds ** (2.0 / 3.0)
    base_env = base_env or EnvSpec(kind=EnvKind.GAME_OF_SKILL_V2)

    def measure(q: float) -> float:
        spec = replace(base_env, kind=EnvKind.GAME_OF_SKILL_V2, chain_length=chain_length, success_prob=q)
        return diameter(build_env(spec), tol=SWEEP_DIAMETER_TOL)

    def close(d: float) -> bool:
        return abs(d - target) <= SWEEP_DIAMETER_SLACK * target

    q = (chain_length - 1) / target
    if q > 1.0:
        raise SweepError(ds, f"diameter {target:.3g} unreachable with {chain_length} states (q would be {q:.3g} > 1)")
    d = measure(q)
    if close(d):
        return q, d

    # diameter decreases in q
    lo, hi = 1e-6, 1.0
    if measure(hi) > target * (1 + SWEEP_DIAMETER_SLACK):
        raise SweepError(ds, f"even q = 1 gives a diameter above {target:.3g}")
    for _ in range(SWEEP_BISECTION_STEPS):
        q = 0.5 * (lo + hi)
        d = measure(q)
        if close(d):
            return q, d
        if d > target:
            lo = q
        else:
            hi = q
    raise SweepError(ds, f"could not tune q to diameter {target:.3g} within {SWEEP_DIAMETER_SLACK:.0%}")


def normalizer(horizon: int) -> float:
    if horizon < 2:
        raise GuardError("normalisation needs T >= 2")
    return math.sqrt(horizon * math.log(horizon))


def ds_sweep(
    base_cfg: ExperimentConfig,
    ds_values: Sequence[float],
    registry: AgentRegistry | None = None,
    logger: RunLogger | None = None,
    workers: int | None = None,
) -> list[SweepRow]:
    """One row per DS target: GameOfSkill-v2 with S ~ x^(1/3), D ~ x^(2/3), regret / sqrt(T ln T)."""
    logger = logger or RunLogger()
    scale = normalizer(base_cfg.horizon)
    rows = []
    for ds in ds_values:
        if ds <= 0:
            raise SweepError(ds, "DS must be positive")
        S = sweep_chain_length(ds)
        q, D = tune_success_prob(ds, S, base_cfg.env)
        env = replace(base_cfg.env, kind=EnvKind.GAME_OF_SKILL_V2, chain_length=S, success_prob=q)
        cfg = replace(base_cfg, env=env)
        logger.log(RunEvent.SWEEP_POINT, algo=cfg.algo.kind.value, env=env.label,
                   details={"ds": ds, "s": S, "q": q, "d": D})
        try:
            result = run_experiment(cfg, registry=registry, logger=logger, workers=workers)
        except TrialError as exc:
            raise SweepError(ds, str(exc)) from exc
        raw = result.final_mean
        rows.append(SweepRow(
            algo=cfg.algo.kind.value,
            ds=float(ds),
            num_states=S,
            diameter=D,
            success_prob=q,
            raw_regret=raw,
            norm_regret=raw / scale,
            horizon=cfg.horizon,
        ))
    return rows


def sqrt_reference(rows: Sequence[SweepRow]) -> list[float]:
    """c * sqrt(DS) with c the least-squares fit to the rows' normalised regret."""
    if not rows:
        return []
    x = np.array([r.ds for r in rows], dtype=float)
    y = np.array([r.norm_regret for r in rows], dtype=float)
    c = float(np.dot(y, np.sqrt(x)) / x.sum())
    return [c * math.sqrt(v) for v in x]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise GuardError("slope fit needs at least two paired points")
    if (x <= 0).any() or (y <= 0).any():
        raise GuardError("log-log fit needs positive values")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
