"""
Random count tables and value vectors for the property suites.
"""

from __future__ import annotations

import numpy as np

from planning.confidence import ConfidenceLevels, CountsTable, episode_confidence_levels
from planning.evi import ValueVector


def random_counts_table(
    rng: np.random.Generator,
    num_states: int,
    num_actions: int = 1,
    min_visits: int = 0,
    max_visits: int = 60,
    concentration: float = 0.5,
) -> CountsTable:
    """
    Visit counts uniform in [min_visits, max_visits]; next states drawn from a
    Dirichlet(concentration) row, so tables range from spread out to near
    deterministic.  Rewards are uniform in [0, 1].
    """
    table = CountsTable(num_states, num_actions)
    for s in range(num_states):
        for a in range(num_actions):
            n = int(rng.integers(min_visits, max_visits + 1))
            if n == 0:
                continue
            row = rng.dirichlet(np.full(num_states, concentration))
            table.next_states[s, a] = rng.multinomial(n, row)
            table.total[s, a] = n
            for r in rng.random(n):
                table.rewards.push(float(r), (s, a))
    return table


def random_levels(rng: np.random.Generator, num_states: int, num_actions: int,
                  delta: float = 0.05, max_round: int = 10 ** 6) -> ConfidenceLevels:
    t_k = int(rng.integers(2, max_round + 1))
    return episode_confidence_levels(t_k, delta, num_states, num_actions)


def random_values(rng: np.random.Generator, num_states: int, scale: float = 10.0) -> ValueVector:
    values = rng.random(num_states) * scale
    return ValueVector(values - values.min())


def synthetic_table(next_state_counts) -> CountsTable:
    """One-pair table with the given next-state counts."""
    counts = np.asarray(next_state_counts, dtype=np.int64)
    table = CountsTable(len(counts), 1)
    table.next_states[0, 0] = counts
    table.total[0, 0] = int(counts.sum())
    return table
