"""
UCRL2 baseline — Hoeffding reward radius, Weissman L1 transition ball,
standard doubling episodes.

  reward radius      sqrt(C_r ln(2 S A t_k / delta) / (2 max(1, N)))      C_r = 7
  transition radius  sqrt(C_p S ln(2 A t_k / delta) / max(1, N))          C_p = 14

Both constants can be overridden through algo.params (reward_const,
transition_const).
"""

from __future__ import annotations

import math

import numpy as np

from agents.base import AgentContext, LearningAgent
from planning.evi import (
    MAX_SWEEPS,
    OptimisticPlan,
    ValueVector,
    extended_value_iteration,
    planning_epsilon,
)
from planning.confidence import CountsTable


def ucrl2_reward_radius(table: CountsTable, t_k: int, delta: float, const: float = 7.0) -> np.ndarray:
    S, A = table.num_states, table.num_actions
    log_term = math.log(2.0 * S * A * t_k / delta)
    return np.sqrt(const * log_term / (2.0 * np.maximum(table.total, 1)))


def ucrl2_transition_radius(table: CountsTable, t_k: int, delta: float, const: float = 14.0) -> np.ndarray:
    S, A = table.num_states, table.num_actions
    log_term = math.log(2.0 * A * t_k / delta)
    return np.sqrt(const * S * log_term / np.maximum(table.total, 1))


def l1_optimistic_transitions(u: ValueVector, p_hat: np.ndarray, budget: np.ndarray) -> np.ndarray:
    """
    Maximise p . u over ||p - p_hat||_1 <= budget on the simplex, for every (s,a).

    Adds budget/2 to the best state, then removes the excess from the lowest
    valued states first.
    """
    order = u.descending_order()
    best = order[0]
    p = p_hat.copy()
    p[..., best] = np.minimum(1.0, p_hat[..., best] + budget / 2.0)
    excess = p.sum(axis=-1) - 1.0
    for idx in order[:0:-1]:
        take = np.clip(excess, 0.0, None)
        take = np.minimum(take, p[..., idx])
        p[..., idx] -= take
        excess -= take
    return p


class UCRL2Agent(LearningAgent):
    def __init__(self, ctx: AgentContext):
        super().__init__(ctx)
        self.reward_const = float(ctx.params.get("reward_const", 7.0))
        self.transition_const = float(ctx.params.get("transition_const", 14.0))
        self.max_sweeps = int(ctx.params.get("max_sweeps", MAX_SWEEPS))
        self.last_plan: OptimisticPlan | None = None

    @property
    def name(self) -> str:
        return "ucrl2"

    def reward_upper_bounds(self) -> np.ndarray:
        st = self.state
        radius = ucrl2_reward_radius(st.counts, st.episode_start_round, self.ctx.delta, self.reward_const)
        return np.minimum(1.0, st.counts.reward_means() + radius)

    def replan(self) -> None:
        st = self.state
        counts = st.counts
        t_k = st.episode_start_round
        p_hat = counts.empirical_transitions()
        unvisited = counts.total == 0
        p_hat[unvisited] = 1.0 / counts.num_states
        budget = ucrl2_transition_radius(counts, t_k, self.ctx.delta, self.transition_const)
        plan = extended_value_iteration(
            self.reward_upper_bounds(),
            lambda u: l1_optimistic_transitions(u, p_hat, budget),
            planning_epsilon(t_k),
            max_iter=self.max_sweeps,
        )
        self.last_plan = plan
        st.policy = plan.policy

    def episode_should_end(self, s: int, a: int) -> bool:
        counts = self.state.counts
        return counts.episode[s, a] >= max(1, counts.at_episode_start[s, a])
