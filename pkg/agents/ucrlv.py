"""
UCRL-V — optimism over Bernstein subset sets with the extended doubling trick.

An episode ends as soon as sum_{s,a} N_k(s,a) / max(1, N_{t_k}(s,a)) >= 1,
i.e. when a new pair is tried, one pair's count doubles, or visited pairs
double on average.  Planning runs modified extended VI at eps = 1/sqrt(t_k).
"""

from __future__ import annotations

from agents.base import AgentContext, LearningAgent
from planning.confidence import episode_confidence_levels
from planning.evi import MAX_SWEEPS, OptimisticPlan, modified_extended_vi, planning_epsilon

PROGRESS_TOL = 1e-12


class UCRLVAgent(LearningAgent):
    def __init__(self, ctx: AgentContext):
        super().__init__(ctx)
        self.max_sweeps = int(ctx.params.get("max_sweeps", MAX_SWEEPS))
        self.last_plan: OptimisticPlan | None = None

    @property
    def name(self) -> str:
        return "ucrlv"

    def replan(self) -> None:
        st = self.state
        levels = episode_confidence_levels(
            st.episode_start_round, self.ctx.delta, self.ctx.num_states, self.ctx.num_actions
        )
        plan = modified_extended_vi(
            st.counts, levels, planning_epsilon(st.episode_start_round), max_iter=self.max_sweeps
        )
        self.last_plan = plan
        st.policy = plan.policy

    def episode_should_end(self, s: int, a: int) -> bool:
        # k plays of a pair with N_{t_k} = k must close the episode despite rounding
        return self.state.counts.episode_progress() >= 1.0 - PROGRESS_TOL
