"""
Non-learning baselines: a constant policy, or the true optimal policy.

They never end episodes, so every run has exactly one episode.
"""

from __future__ import annotations

import numpy as np

from agents.base import AgentContext, LearningAgent
from core.models import ConfigError
from mdp.oracles import solve_average_reward


def _checked(policy: np.ndarray, ctx: AgentContext) -> np.ndarray:
    if policy.shape != (ctx.num_states,):
        raise ConfigError("algo.params.policy", f"must list one action per state ({ctx.num_states})")
    if (policy < 0).any() or (policy >= ctx.num_actions).any():
        raise ConfigError("algo.params.policy", f"actions must lie in [0, {ctx.num_actions})")
    return policy


class FixedPolicyAgent(LearningAgent):
    """
    Plays algo.params.policy, written in TRUE state/action ids; the masking
    maps in the context translate it to the agent's view.
    """

    def __init__(self, ctx: AgentContext, policy=None):
        super().__init__(ctx)
        if policy is None:
            policy = self._from_params(ctx)
        self._fixed = _checked(np.asarray(policy, dtype=np.int64), ctx)

    @staticmethod
    def _from_params(ctx: AgentContext) -> np.ndarray:
        raw = ctx.params.get("policy")
        if raw is None:
            raise ConfigError("algo.params.policy", "fixed agent needs a policy")
        true_policy = _checked(np.asarray(raw, dtype=np.int64), ctx)
        if ctx.masks is None:
            return true_policy
        masked = np.empty_like(true_policy)
        for s, a in enumerate(true_policy):
            masked[ctx.masks.state_perm[s]] = ctx.masks.action_perm[int(a)]
        return masked

    @property
    def name(self) -> str:
        return "fixed"

    def replan(self) -> None:
        self.state.policy = self._fixed

    def episode_should_end(self, s: int, a: int) -> bool:
        return False


class OptimalPolicyAgent(FixedPolicyAgent):
    """Plays the gain-optimal policy of the (masked) true model."""

    def __init__(self, ctx: AgentContext):
        if ctx.model is None:
            raise ConfigError("algo.kind", "optimal agent needs the true model")
        report = solve_average_reward(ctx.model.transitions, ctx.model.reward_mean)
        super().__init__(ctx, policy=report.policy)

    @property
    def name(self) -> str:
        return "optimal"
