"""
TSDE baseline — posterior sampling with dynamically sized episodes.

Priors: Beta(1/2, 1/2) on every mean reward, Dirichlet(1/S, ..., 1/S) on
every transition row.  Rewards in [0, 1] are binarised with a coin of bias r
drawn from the agent stream before the conjugate Beta update.  A sampled
model takes the Beta posterior means as rewards and one Dirichlet draw per
transition row.

An episode ends when its length exceeds the previous episode's length, or
when some N_t(s,a) exceeds twice its value at the episode start.  Either
rule can be switched off through algo.params (length_rule, doubling_rule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from agents.base import AgentContext, LearningAgent
from core.models import ConfigError
from mdp.oracles import MAX_SWEEPS, solve_average_reward
from planning.evi import planning_epsilon

REWARD_PRIOR = 0.5


@dataclass
class PosteriorState:
    reward_alpha: np.ndarray
    reward_beta: np.ndarray
    dirichlet: np.ndarray
    previous_episode_length: int = 0

    @classmethod
    def prior(cls, num_states: int, num_actions: int) -> "PosteriorState":
        S, A = num_states, num_actions
        return cls(
            reward_alpha=np.full((S, A), REWARD_PRIOR),
            reward_beta=np.full((S, A), REWARD_PRIOR),
            dirichlet=np.full((S, A, S), 1.0 / S),
        )

    def update(self, s: int, a: int, success: bool, nxt: int) -> None:
        if success:
            self.reward_alpha[s, a] += 1.0
        else:
            self.reward_beta[s, a] += 1.0
        self.dirichlet[s, a, nxt] += 1.0

    def is_valid(self) -> bool:
        return bool(
            (self.reward_alpha > 0).all()
            and (self.reward_beta > 0).all()
            and (self.dirichlet > 0).all()
        )

    def reward_means(self) -> np.ndarray:
        return self.reward_alpha / (self.reward_alpha + self.reward_beta)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """One model (P, R): Dirichlet rows drawn from `rng`, Beta means as rewards."""
        R = self.reward_means()
        G = rng.standard_gamma(self.dirichlet)
        totals = G.sum(axis=-1, keepdims=True)
        S = self.dirichlet.shape[-1]
        # all-zero gamma rows (tiny shapes underflow) fall back to uniform
        P = np.where(totals > 0, G / np.where(totals > 0, totals, 1.0), 1.0 / S)
        return P, R


class TSDEAgent(LearningAgent):
    def __init__(self, ctx: AgentContext):
        super().__init__(ctx)
        if ctx.rng is None:
            raise ConfigError("algo.kind", "TSDE needs an agent random stream")
        self.rng = ctx.rng
        self.posterior = PosteriorState.prior(ctx.num_states, ctx.num_actions)
        self.length_rule = bool(ctx.params.get("length_rule", True))
        self.doubling_rule = bool(ctx.params.get("doubling_rule", True))
        self.max_sweeps = int(ctx.params.get("max_sweeps", MAX_SWEEPS))

    @property
    def name(self) -> str:
        return "tsde"

    def _begin_episode(self) -> None:
        if self.episode_starts:
            self.posterior.previous_episode_length = self.state.t - self.state.episode_start_round
        super()._begin_episode()

    def _after_record(self, s: int, a: int, reward: float, nxt: int) -> None:
        success = self.rng.random() < reward
        self.posterior.update(s, a, success, nxt)

    def sample_model(self) -> tuple[np.ndarray, np.ndarray]:
        return self.posterior.sample(self.rng)

    def replan(self) -> None:
        P, R = self.sample_model()
        report = solve_average_reward(
            P, R, tol=planning_epsilon(self.state.episode_start_round), max_iter=self.max_sweeps
        )
        self.state.policy = report.policy

    def episode_should_end(self, s: int, a: int) -> bool:
        st = self.state
        length = st.t - st.episode_start_round
        if self.length_rule and length > self.posterior.previous_episode_length:
            return True
        if self.doubling_rule:
            counts = st.counts
            return bool(counts.total[s, a] > 2 * counts.at_episode_start[s, a])
        return False
