"""
Property suites run by `python -m core verify --scope <name>`.

  subsets        every optimistic transition satisfies all 2^S subset bounds (S = 5)
  optimism       p_tilde . u dominates the grid inner-max oracle (S = 3)
  submodularity  subset upper bounds have diminishing returns (S <= 6)
  coverage       empirical Bernstein radius covers Bernoulli means
  evi            stopping residual and greedy-policy gain within epsilon

Each suite has a corrupted variant that must FAIL; a negative control that
passes means the oracle is vacuous.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from core.audit import RunLogger
from core.models import ConfigError, RunEvent, VerifyScope
from mdp.oracles import policy_gain
from planning.confidence import ConfidenceLevels, CountsTable, bernstein_radius, episode_confidence_levels
from planning.evi import modified_extended_vi, optimistic_transitions, planning_epsilon
from verify.corpus import random_counts_table, random_levels, random_values
from verify.oracles import (
    BoundFn,
    find_subset_violation,
    find_submodularity_violation,
    inner_max_oracle,
    table_bound_fn,
)

MAX_RECORDED_FAILURES = 20
OPTIMISM_GRID = 1e-3
OPTIMISM_TOL = 2e-3
COVERAGE_DELTA = 0.05
COVERAGE_SIZES = (10, 100, 1000)
COVERAGE_MEANS = (0.1, 0.5, 0.9)


@dataclass
class SuiteResult:
    name: str
    cases: int
    corrupt: bool = False
    failures: list[dict] = field(default_factory=list)
    failure_count: int = 0
    duration_ms: int = 0

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def fail(self, record: dict) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_RECORDED_FAILURES:
            self.failures.append(record)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "corrupt": self.corrupt,
            "passed": self.passed,
            "failure_count": self.failure_count,
            "failures": self.failures,
            "duration_ms": self.duration_ms,
        }


def _table_dump(table: CountsTable, s: int, a: int, levels: ConfidenceLevels) -> dict:
    return {
        "next_state_counts": table.next_states[s, a].tolist(),
        "n": int(table.total[s, a]),
        "delta_p": levels.delta_p,
        "t_k": levels.t_k,
    }


# ── suites ─────────────────────────────────────────────────────────

def suite_subsets(rng: np.random.Generator, cases: int, corrupt: bool = False) -> SuiteResult:
    S, A = 5, 2
    result = SuiteResult("subsets", cases, corrupt)
    singletons = np.eye(S, dtype=bool)
    for case in range(cases):
        if corrupt:
            table = random_counts_table(rng, S, A, min_visits=200, max_visits=400)
        else:
            table = random_counts_table(rng, S, A)
        levels = random_levels(rng, S, A)
        u = random_values(rng, S)
        P = optimistic_transitions(u, table, levels)
        for s in range(S):
            for a in range(A):
                p = P[s, a]
                if corrupt:
                    # all mass on the state with the tightest singleton bound
                    tightest = int(np.argmin(table_bound_fn(table, s, a, levels)(singletons)))
                    p = np.eye(S)[tightest]
                bad = find_subset_violation(p, table, s, a, levels)
                if bad is not None:
                    result.fail({"case": case, "s": s, "a": a, **bad, **_table_dump(table, s, a, levels)})
    return result


def suite_optimism(rng: np.random.Generator, cases: int, corrupt: bool = False) -> SuiteResult:
    S = 3
    result = SuiteResult("optimism", cases, corrupt)
    for case in range(cases):
        table = random_counts_table(rng, S, 1)
        levels = random_levels(rng, S, 1)
        u = random_values(rng, S)
        p = optimistic_transitions(u, table, levels)[0, 0]
        if corrupt:
            p = np.eye(S)[int(np.argmin(u.values))]
        achieved = float(p @ u.values)
        oracle = inner_max_oracle(u, table, 0, 0, levels, grid=OPTIMISM_GRID)
        if achieved < oracle - OPTIMISM_TOL * u.span():
            result.fail({
                "case": case,
                "u": u.values.tolist(),
                "p_tilde": p.tolist(),
                "achieved": achieved,
                "oracle": oracle,
                **_table_dump(table, 0, 0, levels),
            })
    return result


def convex_bound_fn(table: CountsTable, s: int, a: int) -> BoundFn:
    """p(X) + p(X)^2: a strictly convex composition, hence not submodular."""
    counts = table.next_states[s, a]
    N = max(int(table.total[s, a]), 1)

    def bounds(members: np.ndarray) -> np.ndarray:
        p = (members.astype(np.int64) @ counts) / N
        return p + p * p

    return bounds


def suite_submodularity(rng: np.random.Generator, cases: int, corrupt: bool = False) -> SuiteResult:
    result = SuiteResult("submodularity", cases, corrupt)
    for case in range(cases):
        S = int(rng.integers(2, 7))
        if corrupt:
            table = random_counts_table(rng, S, 1, min_visits=50, max_visits=200, concentration=5.0)
        else:
            table = random_counts_table(rng, S, 1)
        levels = random_levels(rng, S, 1)
        bound_fn = convex_bound_fn(table, 0, 0) if corrupt else None
        bad = find_submodularity_violation(table, 0, 0, levels, bound_fn=bound_fn)
        if bad is not None:
            result.fail({"case": case, "S": S, **bad, **_table_dump(table, 0, 0, levels)})
    return result


def suite_coverage(rng: np.random.Generator, cases: int, corrupt: bool = False) -> SuiteResult:
    """
    Violation frequency of |mean - p| > radius over `cases` repetitions per
    (n, p) cell must stay within 2 delta + 3 binomial standard errors.
    """
    result = SuiteResult("coverage", cases, corrupt)
    delta = COVERAGE_DELTA
    limit = 2 * delta + 3 * np.sqrt(2 * delta * (1 - 2 * delta) / cases)
    for n in COVERAGE_SIZES:
        for p in COVERAGE_MEANS:
            means = rng.binomial(n, p, size=cases) / n
            radius = bernstein_radius(means * (1 - means), np.full(cases, n), delta)
            if corrupt:
                radius = 0.1 * radius
            freq = float(np.mean(np.abs(means - p) > radius))
            if freq > limit:
                result.fail({"n": n, "p": p, "violation_frequency": freq, "limit": float(limit)})
    return result


def suite_evi(rng: np.random.Generator, cases: int, corrupt: bool = False) -> SuiteResult:
    result = SuiteResult("evi", cases, corrupt)
    A = 2
    for case in range(cases):
        S = int(rng.integers(2, 6))
        table = random_counts_table(rng, S, A)
        t_k = int(rng.integers(2, 10 ** 6 + 1))
        levels = episode_confidence_levels(t_k, 0.05, S, A)
        eps = planning_epsilon(t_k)
        plan = modified_extended_vi(table, levels, eps)
        estimate = plan.gain_estimate + (3 * eps if corrupt else 0.0)
        greedy_gain = policy_gain(plan.transitions, plan.rewards, plan.policy, tol=eps * 1e-3)
        if plan.span_residual > eps or abs(estimate - greedy_gain) > eps:
            result.fail({
                "case": case,
                "S": S,
                "epsilon": eps,
                "span_residual": plan.span_residual,
                "gain_estimate": estimate,
                "greedy_gain": greedy_gain,
                "policy": plan.policy.tolist(),
            })
    return result


SuiteFn = Callable[[np.random.Generator, int, bool], SuiteResult]

SUITES: dict[str, tuple[SuiteFn, int]] = {
    VerifyScope.SUBSETS.value: (suite_subsets, 1000),
    VerifyScope.OPTIMISM.value: (suite_optimism, 1000),
    VerifyScope.SUBMODULARITY.value: (suite_submodularity, 1000),
    VerifyScope.COVERAGE.value: (suite_coverage, 10_000),
    VerifyScope.EVI.value: (suite_evi, 200),
}


def run_suites(
    scope: str,
    corrupt: bool = False,
    cases: int | None = None,
    seed: int = 0,
    logger: RunLogger | None = None,
) -> list[SuiteResult]:
    """Run one suite or all of them; each suite draws from its own seeded generator."""
    try:
        scope = VerifyScope(scope).value
    except ValueError:
        allowed = ", ".join(v.value for v in VerifyScope)
        raise ConfigError("scope", f"unknown scope '{scope}' (allowed: {allowed})") from None
    if cases is not None and cases < 1:
        raise ConfigError("cases", "must be >= 1")
    names = list(SUITES) if scope == VerifyScope.ALL.value else [scope]

    logger = logger or RunLogger()
    results = []
    for name in names:
        fn, default_cases = SUITES[name]
        index = list(SUITES).index(name)
        rng = np.random.default_rng([seed, index])
        started = time.perf_counter()
        res = fn(rng, cases or default_cases, corrupt)
        res.duration_ms = int((time.perf_counter() - started) * 1000)
        logger.log(
            RunEvent.VERIFY_SUITE,
            details={"suite": name, "cases": res.cases, "corrupt": corrupt,
                     "passed": res.passed, "failure_count": res.failure_count},
            duration_ms=res.duration_ms,
        )
        results.append(res)
    return results
