"""
Extended value iteration — the inner maximum and the stopping rule.
Run with:  python -m pytest tests/test_evi.py -v
"""

import numpy as np
import pytest

from core.models import EnvKind, EnvSpec, NonConvergenceError
from mdp.environments import build_env
from mdp.model import env_step
from mdp.oracles import optimal_gain
from planning.confidence import ConfidenceLevels, CountsTable, episode_confidence_levels
from planning.evi import (
    EPSILON_FLOOR,
    ValueVector,
    evi_sweep,
    extended_value_iteration,
    modified_extended_vi,
    optimistic_transition,
    optimistic_transitions,
    planning_epsilon,
    span,
)
from verify.corpus import random_counts_table, random_levels, random_values, synthetic_table
from verify.oracles import check_all_subsets

LEVELS = ConfidenceLevels(delta_r=0.1, delta_p=0.1, t_k=10)


def _two_cycle_table(visits: int = 1000) -> CountsTable:
    """State 0 pays 1, state 1 pays 0, each always moves to the other."""
    table = CountsTable(2, 1)
    for _ in range(visits):
        table.record_transition(0, 0, 1.0, 1)
        table.record_transition(1, 0, 0.0, 0)
    return table


ROLLOUT_STEPS = 10 ** 4


def _riverswim_plan(seed: int):
    """Counts from a uniformly random RiverSwim rollout, planned on at t_k = ROLLOUT_STEPS."""
    mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM))
    rng = np.random.default_rng(seed)
    table = CountsTable(mdp.num_states, mdp.num_actions)
    s = mdp.initial_state
    for _ in range(ROLLOUT_STEPS):
        a = int(rng.integers(mdp.num_actions))
        reward, nxt = env_step(mdp, s, a, rng)
        table.record_transition(s, a, reward, nxt)
        s = nxt
    levels = episode_confidence_levels(ROLLOUT_STEPS, 0.05, mdp.num_states, mdp.num_actions)
    eps = planning_epsilon(ROLLOUT_STEPS)
    return optimal_gain(mdp).gain, eps, modified_extended_vi(table, levels, eps)


# ── helpers ────────────────────────────────────────────────────────

class TestValueVector:
    def test_descending_order_breaks_ties_by_index(self):
        u = ValueVector(np.array([1.0, 3.0, 1.0, 3.0]))
        assert u.descending_order().tolist() == [1, 3, 0, 2]

    def test_span(self):
        assert ValueVector(np.array([2.0, -1.0, 0.5])).span() == 3.0
        assert span(np.array([4.0, 4.0])) == 0.0


class TestPlanningEpsilon:
    def test_inverse_sqrt(self):
        assert planning_epsilon(4) == 0.5
        assert planning_epsilon(10 ** 6) == pytest.approx(1e-3)

    def test_floor(self):
        assert planning_epsilon(10 ** 20) == EPSILON_FLOOR


# ── inner maximum ──────────────────────────────────────────────────

class TestOptimisticTransition:
    def test_half_split_moves_mass_up(self):
        table = synthetic_table([50, 50])
        p = optimistic_transition(ValueVector(np.array([1.0, 0.0])), table, 0, 0, LEVELS)
        assert p[0] == pytest.approx(0.693, abs=1e-3)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_unvisited_pair_is_point_mass_on_best(self):
        table = CountsTable(3, 1)
        p = optimistic_transition(ValueVector(np.array([0.0, 2.0, 1.0])), table, 0, 0, LEVELS)
        assert p.tolist() == [0.0, 1.0, 0.0]

    def test_rows_are_distributions(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            table = random_counts_table(rng, 4, 3)
            P = optimistic_transitions(random_values(rng, 4), table, random_levels(rng, 4, 3))
            assert (P >= -1e-15).all()
            assert np.allclose(P.sum(axis=-1), 1.0, atol=1e-12)

    def test_inside_every_subset_bound(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            table = random_counts_table(rng, 5, 1, min_visits=1)
            levels = random_levels(rng, 5, 1)
            p = optimistic_transition(random_values(rng, 5), table, 0, 0, levels)
            assert check_all_subsets(p, table, 0, 0, levels)

    def test_dominates_empirical_kernel(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            table = random_counts_table(rng, 4, 2, min_visits=1)
            u = random_values(rng, 4)
            P = optimistic_transitions(u, table, random_levels(rng, 4, 2))
            p_hat = table.empirical_transitions()
            assert (P @ u.values >= p_hat @ u.values - 1e-12).all()


# ── value iteration ────────────────────────────────────────────────

class TestEviSweep:
    def test_renormalised(self):
        table = _two_cycle_table()
        u, greedy = evi_sweep(ValueVector.zeros(2), table, LEVELS)
        assert u.values.min() == 0.0
        assert u.iteration == 1
        assert greedy.tolist() == [0, 0]


class TestExtendedValueIteration:
    def test_single_state_stops_after_one_sweep(self):
        table = CountsTable(1, 2)
        for _ in range(20):
            table.record_transition(0, 0, 0.4, 0)
            table.record_transition(0, 1, 0.7, 0)
        plan = modified_extended_vi(table, LEVELS, 0.01)
        assert plan.iterations == 1
        assert plan.span_residual == 0.0
        assert plan.gain_estimate == pytest.approx(plan.rewards[0].max())
        assert plan.policy.tolist() == [int(np.argmax(plan.rewards[0]))]

    def test_mixing_chain(self):
        rewards = np.array([[1.0], [0.0]])
        kernel = np.full((2, 1, 2), 0.5)
        plan = extended_value_iteration(rewards, lambda u: kernel, 1e-9)
        assert plan.gain_estimate == pytest.approx(0.5)
        assert plan.span_residual <= 1e-9

    def test_optimistic_gain_covers_empirical_gain(self):
        table = _two_cycle_table()
        levels = episode_confidence_levels(2000, 0.05, 2, 1)
        eps = planning_epsilon(2000)
        plan = modified_extended_vi(table, levels, eps)
        assert plan.span_residual <= eps
        assert plan.gain_estimate >= 0.5 - eps

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_riverswim_rollout_is_optimistic(self, seed):
        gain, eps, plan = _riverswim_plan(seed)
        assert plan.span_residual <= eps
        assert plan.gain_estimate >= gain - eps

    @pytest.mark.slow
    def test_riverswim_rollout_is_optimistic_over_40_seeds(self):
        misses = 0
        for seed in range(40):
            gain, eps, plan = _riverswim_plan(seed)
            misses += plan.gain_estimate < gain - eps
        # holds with probability 1 - delta per seed
        assert misses <= 0.05 * 40

    def test_picks_better_action(self):
        table = CountsTable(1, 2)
        for _ in range(500):
            table.record_transition(0, 0, 0.2, 0)
            table.record_transition(0, 1, 0.9, 0)
        plan = modified_extended_vi(table, LEVELS, 1e-6)
        assert plan.policy.tolist() == [1]

    def test_iteration_cap(self):
        with pytest.raises(NonConvergenceError) as info:
            modified_extended_vi(_two_cycle_table(), LEVELS, 1e-6, max_iter=1)
        assert info.value.iterations == 1
        assert info.value.span_history == [info.value.last_span]

    def test_epsilon_floor_applied(self):
        plan = modified_extended_vi(_two_cycle_table(), LEVELS, 0.0)
        assert plan.span_residual <= EPSILON_FLOOR
