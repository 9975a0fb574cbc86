"""
Modified extended value iteration.

Each sweep picks, for every (s,a), the optimistic reward min(1, r + c_r) and the
transition vector in the plausible polytope that maximises p . u.  For the
Bernstein sets the inner maximum is a greedy prefix assignment: sort states by
descending u, then give state j as much mass as the prefix bound p_hat(S_1^j)
and the remaining budget allow.  Because the subset radius is submodular, the
S prefix constraints imply all 2^S subset constraints.

The iterate is renormalised (min subtracted) after every sweep; the stopping
statistic is the span of the raw difference u_{i+1} - u_i.  `iterations`
counts sweeps, the first one starting from u_0 = 0.  On a single-state table
the difference is a scalar, so the loop stops after exactly one sweep with
the best optimistic reward as its gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from core.models import NonConvergenceError
from planning.confidence import (
    ConfidenceLevels,
    CountsTable,
    prefix_upper_bounds,
    reward_upper_bounds,
)

MAX_SWEEPS = 10 ** 7
EPSILON_FLOOR = 1e-9
SPAN_HISTORY = 32

TransitionFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class ValueVector:
    values: np.ndarray
    iteration: int = 0

    @classmethod
    def zeros(cls, num_states: int) -> "ValueVector":
        return cls(np.zeros(num_states), 0)

    def span(self) -> float:
        return span(self.values)

    def descending_order(self) -> np.ndarray:
        """State indices by descending value, ties by ascending index."""
        return np.argsort(-self.values, kind="stable")


@dataclass
class OptimisticPlan:
    policy: np.ndarray
    u: ValueVector
    gain_estimate: float
    span_residual: float
    iterations: int
    rewards: np.ndarray
    transitions: np.ndarray


def span(diff) -> float:
    values = diff.values if isinstance(diff, ValueVector) else np.asarray(diff)
    return float(np.max(values) - np.min(values))


def planning_epsilon(t_k: int) -> float:
    return max(1.0 / math.sqrt(t_k), EPSILON_FLOOR)


# ── inner maximum ──────────────────────────────────────────────────

def optimistic_transitions(u: ValueVector, table: CountsTable, levels: ConfidenceLevels) -> np.ndarray:
    """OptimisticTransition for every (s,a) at once, shape (S, A, S)."""
    order = u.descending_order()
    caps = np.minimum(prefix_upper_bounds(table, order, levels), 1.0)
    # Concavity of the radius makes the capped prefix bounds nondecreasing;
    # the accumulate only absorbs rounding.
    caps = np.maximum.accumulate(caps, axis=-1)
    caps[..., -1] = 1.0
    mass_sorted = np.diff(caps, axis=-1, prepend=0.0)
    p_tilde = np.empty_like(mass_sorted)
    p_tilde[..., order] = mass_sorted
    return p_tilde


def optimistic_transition(u: ValueVector, table: CountsTable, s: int, a: int,
                          levels: ConfidenceLevels) -> np.ndarray:
    return optimistic_transitions(u, table, levels)[s, a]


# ── sweeps ─────────────────────────────────────────────────────────

def _sweep(u: np.ndarray, rewards: np.ndarray, p_tilde: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    q = rewards + p_tilde @ u
    greedy = np.argmax(q, axis=1)  # first maximum: lowest action index
    return q.max(axis=1), greedy, q


def evi_sweep(u: ValueVector, table: CountsTable, levels: ConfidenceLevels) -> tuple[ValueVector, np.ndarray]:
    rewards = reward_upper_bounds(table, levels)
    p_tilde = optimistic_transitions(u, table, levels)
    raw, greedy, _ = _sweep(u.values, rewards, p_tilde)
    return ValueVector(raw - raw.min(), u.iteration + 1), greedy


def extended_value_iteration(
    rewards: np.ndarray,
    transition_fn: Callable[[ValueVector], np.ndarray],
    epsilon: float,
    max_iter: int = MAX_SWEEPS,
) -> OptimisticPlan:
    """Generic loop: `transition_fn(u)` returns the optimistic kernel for iterate u."""
    S = rewards.shape[0]
    u = ValueVector.zeros(S)
    history: list[float] = []
    for i in range(1, max_iter + 1):
        p_tilde = transition_fn(u)
        raw, greedy, _ = _sweep(u.values, rewards, p_tilde)
        diff = raw - u.values
        res = span(diff)
        history.append(res)
        if len(history) > SPAN_HISTORY:
            del history[0]
        if res <= epsilon:
            return OptimisticPlan(
                policy=greedy,
                u=ValueVector(raw - raw.min(), i),
                gain_estimate=0.5 * (float(diff.max()) + float(diff.min())),
                span_residual=res,
                iterations=i,
                rewards=rewards,
                transitions=p_tilde,
            )
        u = ValueVector(raw - raw.min(), i)
    raise NonConvergenceError("extended value iteration", max_iter, history[-1], history)


def modified_extended_vi(
    table: CountsTable,
    levels: ConfidenceLevels,
    epsilon: float,
    max_iter: int = MAX_SWEEPS,
) -> OptimisticPlan:
    rewards = reward_upper_bounds(table, levels)
    return extended_value_iteration(
        rewards,
        lambda u: optimistic_transitions(u, table, levels),
        max(epsilon, EPSILON_FLOOR),
        max_iter=max_iter,
    )
