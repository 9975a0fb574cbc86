"""
Per-(s,a) sufficient statistics and empirical-Bernstein confidence radii.

The agent keeps, for every (s,a): total count N_t, in-episode count N_k, the
count snapshot N_{t_k} taken when the episode started, a Welford accumulator
for rewards, and next-state counts n(s'|s,a).  Transition variances are never
stored: the empirical mass of any subset X is p(X) = sum n(s'|s,a) / N and its
variance is p(X) * (1 - p(X)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from core.models import DataError

BERNSTEIN_CORRECTION = 7.0 / 3.0


# ── Welford accumulator ────────────────────────────────────────────

class MomentAccumulator:
    """
    Online mean and sum of squared deviations (Welford), shape-generic.

    variance() divides by N (population style), which is the convention the
    confidence radius expects.  N = 0 gives mean 0 and variance 0.
    """

    def __init__(self, shape: tuple[int, ...] = ()):
        self.count = np.zeros(shape, dtype=np.int64)
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def push(self, value: float, index: tuple[int, ...] = ()) -> None:
        n = self.count[index] + 1
        delta = value - self.mean[index]
        mean = self.mean[index] + delta / n
        self.m2[index] += delta * (value - mean)
        self.mean[index] = mean
        self.count[index] = n

    def variance(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            var = np.where(self.count > 0, self.m2 / np.maximum(self.count, 1), 0.0)
        return np.maximum(var, 0.0)


# ── counts ─────────────────────────────────────────────────────────

class CountsTable:
    def __init__(self, num_states: int, num_actions: int):
        self.num_states = num_states
        self.num_actions = num_actions
        S, A = num_states, num_actions
        self.total = np.zeros((S, A), dtype=np.int64)
        self.episode = np.zeros((S, A), dtype=np.int64)
        self.at_episode_start = np.zeros((S, A), dtype=np.int64)
        self.rewards = MomentAccumulator((S, A))
        self.next_states = np.zeros((S, A, S), dtype=np.int64)

    def start_episode(self) -> None:
        self.at_episode_start = self.total.copy()
        self.episode[:] = 0

    def record_transition(self, s: int, a: int, reward: float, nxt: int) -> None:
        if not (0.0 <= reward <= 1.0):
            raise DataError(f"reward {reward!r} for ({s}, {a}) is outside [0, 1]")
        self.total[s, a] += 1
        self.episode[s, a] += 1
        self.rewards.push(reward, (s, a))
        self.next_states[s, a, nxt] += 1

    # ── estimates ──────────────────────────────────────────────────

    def reward_means(self) -> np.ndarray:
        return self.rewards.mean

    def reward_variances(self) -> np.ndarray:
        return self.rewards.variance()

    def empirical_transitions(self) -> np.ndarray:
        """p(s'|s,a) = n / N, all zeros for unvisited pairs."""
        N = np.maximum(self.total, 1)[:, :, None]
        return self.next_states / N

    def episode_progress(self) -> float:
        """sum_{s,a} N_k(s,a) / max(1, N_{t_k}(s,a))."""
        return float(np.sum(self.episode / np.maximum(self.at_episode_start, 1)))


@dataclass(frozen=True)
class ConfidenceLevels:
    delta_r: float
    delta_p: float
    t_k: int


def record_transition(table: CountsTable, s: int, a: int, reward: float, nxt: int) -> CountsTable:
    table.record_transition(s, a, reward, nxt)
    return table


def episode_confidence_levels(t_k: int, delta: float, num_states: int, num_actions: int) -> ConfidenceLevels:
    L = max(1.0, math.log(t_k))
    S, A = num_states, num_actions
    return ConfidenceLevels(
        delta_r=delta / (4.0 * S * A * L),
        delta_p=delta / (8.0 * S * S * A * L),
        t_k=t_k,
    )


# ── radii ──────────────────────────────────────────────────────────

def bernstein_radius(var, n, delta_f: float):
    """
    min(1, sqrt(2 var ln(2/d) / n) + 7/3 ln(2/d) / (n - 1)); 1 when n <= 1.

    Accepts scalars or broadcastable arrays; returns a float for scalar input.
    """
    var_arr = np.maximum(np.asarray(var, dtype=float), 0.0)
    n_arr = np.asarray(n, dtype=float)
    log_term = math.log(2.0 / delta_f)
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = (
            np.sqrt(2.0 * var_arr * log_term / n_arr)
            + BERNSTEIN_CORRECTION * log_term / (n_arr - 1.0)
        )
    radius = np.where(n_arr <= 1.0, 1.0, np.minimum(1.0, radius))
    if radius.ndim == 0:
        return float(radius)
    return radius


def subset_mass(table: CountsTable, s: int, a: int, subset) -> float:
    """Empirical p(subset|s,a); integer sums first so equal subsets give equal floats."""
    N = int(table.total[s, a])
    if N == 0:
        return 0.0
    idx = list(subset)
    hits = int(table.next_states[s, a, idx].sum()) if idx else 0
    return hits / N


def subset_upper_bound(table: CountsTable, s: int, a: int, subset, levels: ConfidenceLevels) -> float:
    p = subset_mass(table, s, a, subset)
    return p + bernstein_radius(p * (1.0 - p), int(table.total[s, a]), levels.delta_p)


def reward_upper_bound(table: CountsTable, s: int, a: int, levels: ConfidenceLevels) -> float:
    return float(reward_upper_bounds(table, levels)[s, a])


def reward_upper_bounds(table: CountsTable, levels: ConfidenceLevels) -> np.ndarray:
    """min(1, r + c_r) for every (s,a)."""
    radius = bernstein_radius(table.reward_variances(), table.total, levels.delta_r)
    return np.minimum(1.0, table.reward_means() + radius)


def prefix_upper_bounds(table: CountsTable, order: np.ndarray, levels: ConfidenceLevels) -> np.ndarray:
    """
    p_hat of every prefix {order[0..j]} for every (s,a), shape (S, A, S).

    Prefix masses are cumulative integer counts divided by N, so the j = S
    prefix has mass exactly 1 for visited pairs.
    """
    hits = np.cumsum(table.next_states[:, :, order], axis=-1)
    N = table.total[:, :, None]
    p = hits / np.maximum(N, 1)
    radius = bernstein_radius(p * (1.0 - p), np.broadcast_to(N, p.shape), levels.delta_p)
    return p + radius
