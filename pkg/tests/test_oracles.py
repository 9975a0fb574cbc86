"""
Exact-model oracles — optimal gain, policy gain, hitting times, diameter.
Run with:  python -m pytest tests/test_oracles.py -v
"""

import numpy as np
import pytest

from core.models import EnvKind, EnvSpec, NonConvergenceError
from mdp.environments import LEFT, RIGHT, build_env
from mdp.model import TabularMDP
from mdp.oracles import diameter, expected_hitting_times, optimal_gain, policy_gain, solve_average_reward, span

TOL = 1e-9

WEAK_CURRENT = {
    "interior_right": 0.35, "interior_stay": 0.6, "interior_left": 0.05,
    "leftmost_right": 0.4, "leftmost_stay": 0.6,
    "rightmost_stay": 0.6, "rightmost_left": 0.4,
}


def _two_cycle() -> TabularMDP:
    P = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
    R = np.array([[1.0], [0.0]])
    return TabularMDP(P, R, name="cycle")


def _simulate_gain(mdp: TabularMDP, policy, chains=2000, steps=5000, burn_in=1000, seed=0):
    """Parallel chains under a fixed policy; returns (mean reward per step, standard error)."""
    rng = np.random.default_rng(seed)
    idx = np.arange(mdp.num_states)
    cdf = np.cumsum(mdp.transitions[idx, policy], axis=-1)
    reward = mdp.reward_mean[idx, policy]
    s = np.zeros(chains, dtype=int)
    totals = np.zeros(chains)
    for t in range(steps):
        if t >= burn_in:
            totals += reward[s]
        u = rng.random(chains)
        s = np.minimum((u[:, None] >= cdf[s]).sum(axis=1), mdp.num_states - 1)
    per_chain = totals / (steps - burn_in)
    return per_chain.mean(), per_chain.std(ddof=1) / np.sqrt(chains)


# ── span ───────────────────────────────────────────────────────────

class TestSpan:
    def test_constant(self):
        assert span(np.full(4, 3.0)) == 0.0

    def test_example(self):
        assert span(np.array([3.0, 1.0, 2.0])) == 2.0

    def test_translation_invariant(self):
        x = np.array([0.3, -1.2, 4.0])
        assert span(x + 17.0) == pytest.approx(span(x))


# ── gain ───────────────────────────────────────────────────────────

class TestOptimalGain:
    def test_bandits(self):
        mdp = build_env(EnvSpec(kind=EnvKind.BANDITS, horizon_hint=2 ** 24))
        report = optimal_gain(mdp, tol=TOL)
        assert report.gain == pytest.approx(0.815625, abs=TOL)
        assert list(report.policy) == [0]

    def test_periodic_two_cycle(self):
        report = optimal_gain(_two_cycle(), tol=TOL)
        assert report.gain == pytest.approx(0.5, abs=TOL)
        assert report.residual_span <= TOL

    def test_riverswim_default_numbers_favour_the_bank(self):
        # swimming right earns 0.5 * 34.71 / 155.71 ~ 0.111 under the default current
        report = optimal_gain(build_env(EnvSpec(kind=EnvKind.RIVERSWIM)), tol=TOL)
        assert report.gain == pytest.approx(0.208, abs=TOL)
        assert report.policy[0] == LEFT

    def test_riverswim_weak_current_prefers_swimming_right(self):
        mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM, river=WEAK_CURRENT))
        report = optimal_gain(mdp, tol=TOL)
        assert all(a == RIGHT for a in report.policy)
        # birth-death chain: stationary mass 2401 / 5602 on the rightmost state
        assert report.gain == pytest.approx(0.5 * 2401 / 5602, abs=1e-8)

    def test_riverswim_matches_simulation(self):
        mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM))
        report = optimal_gain(mdp, tol=TOL)
        mean, se = _simulate_gain(mdp, report.policy)
        assert abs(mean - report.gain) <= 3 * se + 1e-3

    def test_game_of_skill_gain(self):
        mdp = build_env(EnvSpec(kind=EnvKind.GAME_OF_SKILL_V2))
        # staying put at either end beats crossing the chain
        assert optimal_gain(mdp, tol=TOL).gain == pytest.approx(0.9, abs=TOL)

    @pytest.mark.parametrize("kind", [EnvKind.RIVERSWIM, EnvKind.GAME_OF_SKILL_V1])
    def test_permutation_invariant(self, kind):
        mdp = build_env(EnvSpec(kind=kind))
        rng = np.random.default_rng(4)
        other = mdp.permuted(rng.permutation(mdp.num_states), rng.permutation(mdp.num_actions))
        assert optimal_gain(other, tol=TOL).gain == pytest.approx(optimal_gain(mdp, tol=TOL).gain, abs=2 * TOL)

    def test_bias_is_relative(self):
        report = optimal_gain(build_env(EnvSpec(kind=EnvKind.RIVERSWIM)), tol=TOL)
        assert min(report.bias) == pytest.approx(0.0, abs=1e-12)

    def test_iteration_cap(self):
        mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM))
        with pytest.raises(NonConvergenceError) as info:
            optimal_gain(mdp, tol=1e-12, max_iter=2)
        assert info.value.iterations == 2
        assert info.value.last_span > 1e-12


class TestPolicyGain:
    def test_fixed_policy(self):
        mdp = build_env(EnvSpec(kind=EnvKind.BANDITS, horizon_hint=2 ** 12))
        assert policy_gain(mdp.transitions, mdp.reward_mean, [1]) == pytest.approx(0.8, abs=TOL)

    def test_never_above_optimal(self):
        mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM))
        best = optimal_gain(mdp).gain
        for policy in ([0] * 6, [1] * 6, [0, 1, 0, 1, 0, 1]):
            assert policy_gain(mdp.transitions, mdp.reward_mean, policy) <= best + TOL

    def test_array_level_solver(self):
        P = np.array([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]])
        R = np.array([[0.1, 0.0], [0.7, 0.0]])
        assert solve_average_reward(P, R).gain == pytest.approx(0.7, abs=TOL)


# ── diameter ───────────────────────────────────────────────────────

class TestDiameter:
    def test_flip_mdp(self):
        assert diameter(_two_cycle()) == pytest.approx(1.0, abs=1e-6)

    def test_single_state(self):
        assert diameter(build_env(EnvSpec(kind=EnvKind.BANDITS, horizon_hint=2 ** 24))) == 0.0

    def test_game_of_skill_v1(self):
        mdp = build_env(EnvSpec(kind=EnvKind.GAME_OF_SKILL_V1))
        assert diameter(mdp) == pytest.approx(19 * 25, abs=1e-3)

    def test_game_of_skill_monte_carlo(self):
        rng = np.random.default_rng(11)
        n = 100_000
        # 19 right moves, each a geometric number of tries with success 1/25
        walks = rng.geometric(1 / 25, size=(n, 19)).sum(axis=1)
        se = walks.std(ddof=1) / np.sqrt(n)
        H = expected_hitting_times(build_env(EnvSpec(kind=EnvKind.GAME_OF_SKILL_V1)))
        assert abs(walks.mean() - H[19, 0]) <= 3 * se

    @pytest.mark.parametrize("L,q", [(2, 0.5), (5, 0.25), (8, 0.1)])
    def test_v2_identity(self, L, q):
        mdp = build_env(EnvSpec(kind=EnvKind.GAME_OF_SKILL_V2, chain_length=L, success_prob=q))
        assert diameter(mdp) == pytest.approx((L - 1) / q, rel=1e-6)

    def test_permutation_invariant_and_at_least_one(self):
        mdp = build_env(EnvSpec(kind=EnvKind.RIVERSWIM))
        other = mdp.permuted([2, 0, 1, 5, 3, 4], [1, 0])
        d = diameter(mdp)
        assert d >= 1.0
        assert diameter(other) == pytest.approx(d, rel=1e-9)

    def test_not_communicating(self):
        P = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
        mdp = TabularMDP(P, np.zeros((2, 1)))
        with pytest.raises(NonConvergenceError):
            diameter(mdp, max_iter=1000)
