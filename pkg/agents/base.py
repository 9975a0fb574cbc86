"""
Base learning-agent interface.
Every algorithm inherits from LearningAgent and implements act() / observe().
"""

from __future__ import annotations
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from core.models import MaskingMaps
from mdp.model import TabularMDP
from planning.confidence import CountsTable


@dataclass
class AgentContext:
    """What the harness hands an agent factory.  Indices are the agent's (masked) view."""
    num_states: int
    num_actions: int
    delta: float = 0.05
    horizon: int = 1
    rng: np.random.Generator | None = None
    params: dict[str, Any] = field(default_factory=dict)
    # Masked view of the true model; only oracle baselines may read it.
    model: TabularMDP | None = None
    masks: MaskingMaps | None = None


@dataclass
class AgentState:
    counts: CountsTable
    policy: np.ndarray
    episode_index: int = 0
    episode_start_round: int = 1
    t: int = 1


class LearningAgent(ABC):
    """Abstract base for all agents run by the harness."""

    def __init__(self, ctx: AgentContext):
        self.ctx = ctx
        self.state = AgentState(
            counts=CountsTable(ctx.num_states, ctx.num_actions),
            policy=np.zeros(ctx.num_states, dtype=np.int64),
        )
        self.episode_starts: list[int] = []

    @property
    @abstractmethod
    def name(self) -> str:
        """Short algorithm identifier used in CSV rows."""

    # ── episodes ───────────────────────────────────────────────────

    def start(self) -> None:
        """Called once before round 1."""
        self._begin_episode()

    def _begin_episode(self) -> None:
        st = self.state
        st.episode_index += 1
        st.episode_start_round = st.t
        st.counts.start_episode()
        self.episode_starts.append(st.t)
        self.replan()

    @abstractmethod
    def replan(self) -> None:
        """Install a new policy in self.state.policy."""

    @abstractmethod
    def episode_should_end(self, s: int, a: int) -> bool:
        """Evaluated after every observation; (s, a) is the pair just played."""

    # ── interaction ────────────────────────────────────────────────

    def act(self, s: int) -> int:
        return int(self.state.policy[s])

    def observe(self, s: int, a: int, reward: float, nxt: int) -> bool:
        """Record one transition.  Returns True when a new episode was started."""
        self.state.counts.record_transition(s, a, reward, nxt)
        self._after_record(s, a, reward, nxt)
        self.state.t += 1
        if self.episode_should_end(s, a):
            self._begin_episode()
            return True
        return False

    def _after_record(self, s: int, a: int, reward: float, nxt: int) -> None:
        """Hook for agents with extra per-step statistics."""

    @property
    def episode_count(self) -> int:
        return len(self.episode_starts)
