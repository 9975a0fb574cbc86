"""
Counter-based random streams for reproducible, paired trials.

Each (trial, s, a) owns a Philox generator keyed by
SeedSequence(base_seed, spawn_key=(trial, 0, s, a)), always with TRUE
(unmasked) indices.  Two algorithms that take the same actions in the same
trial therefore see identical transitions and rewards.  The agent stream
uses spawn_key (trial, 1) and the masking draw (trial, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.models import MaskingMaps

_PAIR, _AGENT, _MASK = 0, 1, 2


def _generator(base_seed: int, spawn_key: tuple[int, ...]) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class StreamBank:
    pairs: list[list[np.random.Generator]]
    agent: np.random.Generator

    def pair(self, s: int, a: int) -> np.random.Generator:
        return self.pairs[s][a]


def make_streams(base_seed: int, trial: int, num_states: int, num_actions: int) -> StreamBank:
    pairs = [
        [_generator(base_seed, (trial, _PAIR, s, a)) for a in range(num_actions)]
        for s in range(num_states)
    ]
    return StreamBank(pairs=pairs, agent=_generator(base_seed, (trial, _AGENT)))


def draw_masking(base_seed: int, trial: int, num_states: int, num_actions: int) -> MaskingMaps:
    """Per-trial relabelling, shared by every algorithm run on that trial."""
    rng = _generator(base_seed, (trial, _MASK))
    return MaskingMaps(
        state_perm=[int(x) for x in rng.permutation(num_states)],
        action_perm=[int(x) for x in rng.permutation(num_actions)],
    )
