"""
TabularMDP — the ground-truth model an agent interacts with.

Kernel and rewards are dense numpy arrays:
  transitions   (S, A, S)  p(s'|s,a)
  reward_mean   (S, A)     expected reward (the constant itself for deterministic pairs)
  reward_beta   (S, A, 2)  Beta(a, b) parameters, (0, 0) for deterministic pairs

Instances are never mutated after construction, so one model can be shared
read-only by concurrently running trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from core.models import ConfigError

ROW_SUM_TOL = 1e-12


@dataclass(eq=False)
class TabularMDP:
    transitions: np.ndarray
    reward_mean: np.ndarray
    reward_beta: np.ndarray | None = None
    initial_state: int = 0
    name: str = "custom"
    _cdf: np.ndarray = field(init=False, repr=False)
    _stochastic: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.transitions = np.asarray(self.transitions, dtype=float)
        self.reward_mean = np.asarray(self.reward_mean, dtype=float)
        if self.reward_beta is None:
            self.reward_beta = np.zeros(self.reward_mean.shape + (2,))
        self.reward_beta = np.asarray(self.reward_beta, dtype=float)
        self._validate()
        self._stochastic = self.reward_beta.sum(axis=-1) > 0
        self._cdf = np.cumsum(self.transitions, axis=-1)
        for arr in (self.transitions, self.reward_mean, self.reward_beta, self._cdf, self._stochastic):
            arr.setflags(write=False)

    # ── validation ─────────────────────────────────────────────────

    def _validate(self) -> None:
        P = self.transitions
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ConfigError("transitions", f"expected shape (S, A, S), got {P.shape}")
        S, A, _ = P.shape
        if S < 1 or A < 1:
            raise ConfigError("transitions", "need at least one state and one action")
        if self.reward_mean.shape != (S, A):
            raise ConfigError("rewards", f"expected shape ({S}, {A}), got {self.reward_mean.shape}")
        if self.reward_beta.shape != (S, A, 2):
            raise ConfigError("rewards", "Beta parameter array must have shape (S, A, 2)")
        if (P < 0).any():
            raise ConfigError("transitions", "negative transition probability")
        worst = float(np.max(np.abs(P.sum(axis=-1) - 1.0)))
        if worst > ROW_SUM_TOL:
            raise ConfigError("transitions", f"kernel rows must sum to 1 (off by {worst:.2e})")
        if (self.reward_mean < 0).any() or (self.reward_mean > 1).any():
            raise ConfigError("rewards", "rewards must lie in [0, 1]")
        if (self.reward_beta < 0).any():
            raise ConfigError("rewards", "Beta parameters must be positive")
        if not (0 <= self.initial_state < S):
            raise ConfigError("initial_state", f"must be in [0, {S})")

    # ── shape ──────────────────────────────────────────────────────

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]

    def is_stochastic(self, s: int, a: int) -> bool:
        return bool(self._stochastic[s, a])

    # ── relabelling ────────────────────────────────────────────────

    def permuted(self, state_perm, action_perm) -> "TabularMDP":
        """Copy in which true state s is called state_perm[s] (same for actions)."""
        sp = np.asarray(state_perm)
        ap = np.asarray(action_perm)
        P = np.empty_like(self.transitions)
        R = np.empty_like(self.reward_mean)
        B = np.empty_like(self.reward_beta)
        P[np.ix_(sp, ap, sp)] = self.transitions
        R[np.ix_(sp, ap)] = self.reward_mean
        B[np.ix_(sp, ap)] = self.reward_beta
        return TabularMDP(P, R, B, initial_state=int(sp[self.initial_state]), name=self.name)


def env_step(mdp: TabularMDP, s: int, a: int, stream: np.random.Generator) -> tuple[float, int]:
    """
    Sample (reward, next_state) for playing a in s.

    Consumes one uniform for the transition, then one Beta draw for
    stochastic rewards; deterministic rewards consume nothing.
    """
    u = stream.random()
    nxt = int(np.searchsorted(mdp._cdf[s, a], u, side="right"))
    if nxt >= mdp.num_states:
        nxt = mdp.num_states - 1
    if mdp._stochastic[s, a]:
        alpha, beta = mdp.reward_beta[s, a]
        reward = float(stream.beta(alpha, beta))
    else:
        reward = float(mdp.reward_mean[s, a])
    return reward, nxt
