"""
Agent Registry — register algorithm factories, list them, build agents.
"""

from __future__ import annotations
from typing import Callable

from agents.base import AgentContext, LearningAgent
from agents.fixed import FixedPolicyAgent, OptimalPolicyAgent
from agents.tsde import TSDEAgent
from agents.ucrl2 import UCRL2Agent
from agents.ucrlv import UCRLVAgent
from core.models import AlgoKind, ConfigError

AgentFactory = Callable[[AgentContext], LearningAgent]


class AgentRegistry:
    """Central catalogue of runnable algorithms."""

    def __init__(self):
        self._factories: dict[str, AgentFactory] = {}
        self._descriptions: dict[str, str] = {}

    # ── registration ───────────────────────────────────────────────

    def register(self, kind: str, factory: AgentFactory, description: str = "") -> None:
        key = kind.value if isinstance(kind, AlgoKind) else str(kind)
        self._factories[key] = factory
        self._descriptions[key] = description

    def get(self, kind: str) -> AgentFactory | None:
        key = kind.value if isinstance(kind, AlgoKind) else str(kind)
        return self._factories.get(key)

    def list_names(self) -> list[str]:
        return list(self._factories.keys())

    def describe(self) -> list[dict[str, str]]:
        return [{"name": k, "description": self._descriptions[k]} for k in self._factories]

    # ── building ───────────────────────────────────────────────────

    def build(self, kind: str, ctx: AgentContext) -> LearningAgent:
        factory = self.get(kind)
        if factory is None:
            raise ConfigError("algo.kind", f"unknown algorithm '{getattr(kind, 'value', kind)}'")
        return factory(ctx)


def default_registry() -> AgentRegistry:
    registry = AgentRegistry()
    registry.register(AlgoKind.UCRLV, UCRLVAgent, "Bernstein subset sets, extended doubling trick")
    registry.register(AlgoKind.UCRL2, UCRL2Agent, "Hoeffding / L1 sets, standard doubling")
    registry.register(AlgoKind.TSDE, TSDEAgent, "posterior sampling, dynamic episodes")
    registry.register(AlgoKind.OPTIMAL, OptimalPolicyAgent, "true optimal policy (oracle)")
    registry.register(AlgoKind.FIXED, FixedPolicyAgent, "constant policy from algo.params.policy")
    return registry
