"""
Brute-force oracles for the Bernstein transition sets.

Subsets of the state space are bitmasks; `subset_members(S)` expands every
mask 0 .. 2^S - 1 into a boolean membership row.  Every checker accepts an
optional `bound_fn(members) -> bounds`, mapping a (k, S) membership matrix
to the k subset upper bounds, so synthetic bounds can replace the table's.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from core.models import DataError, GuardError
from planning.confidence import ConfidenceLevels, CountsTable, bernstein_radius

MAX_SUBSET_STATES = 20
MAX_GRID_STATES = 4
MAX_SUBMODULAR_STATES = 6
SUBSET_TOL = 1e-12
GRID_FEASIBILITY_TOL = 1e-9
MAX_GRID_POINTS = 5_000_000

BoundFn = Callable[[np.ndarray], np.ndarray]


def subset_members(num_states: int) -> np.ndarray:
    masks = np.arange(1 << num_states, dtype=np.int64)
    return ((masks[:, None] >> np.arange(num_states)) & 1).astype(bool)


def table_bound_fn(table: CountsTable, s: int, a: int, levels: ConfidenceLevels) -> BoundFn:
    """p_hat(X) = p(X) + radius(p(X)(1 - p(X)), N, delta_p), vectorised over subsets."""
    counts = table.next_states[s, a]
    N = int(table.total[s, a])

    def bounds(members: np.ndarray) -> np.ndarray:
        hits = members.astype(np.int64) @ counts
        p = hits / N if N > 0 else np.zeros(len(members))
        return p + bernstein_radius(p * (1.0 - p), np.full(p.shape, N), levels.delta_p)

    return bounds


def _guard(S: int, limit: int, what: str) -> None:
    if S > limit:
        raise GuardError(f"{what} enumerates 2^S subsets; S={S} exceeds the limit {limit}")


# ── all-subset constraints ─────────────────────────────────────────

def find_subset_violation(
    p_tilde: np.ndarray,
    table: CountsTable | None = None,
    s: int = 0,
    a: int = 0,
    levels: ConfidenceLevels | None = None,
    bound_fn: BoundFn | None = None,
    tol: float = SUBSET_TOL,
) -> dict | None:
    """First subset X with p_tilde(X) > bound(X) + tol, or None."""
    p_tilde = np.asarray(p_tilde, dtype=float)
    S = p_tilde.shape[0]
    _guard(S, MAX_SUBSET_STATES, "subset check")
    bound_fn = bound_fn or table_bound_fn(table, s, a, levels)
    members = subset_members(S)
    mass = members @ p_tilde
    bounds = bound_fn(members)
    bad = np.flatnonzero(mass > bounds + tol)
    if bad.size == 0:
        return None
    mask = int(bad[0])
    return {
        "subset": [int(i) for i in np.flatnonzero(members[mask])],
        "mask": mask,
        "mass": float(mass[mask]),
        "bound": float(bounds[mask]),
        "p_tilde": p_tilde.tolist(),
    }


def check_all_subsets(
    p_tilde: np.ndarray,
    table: CountsTable | None = None,
    s: int = 0,
    a: int = 0,
    levels: ConfidenceLevels | None = None,
    bound_fn: BoundFn | None = None,
    tol: float = SUBSET_TOL,
) -> bool:
    return find_subset_violation(p_tilde, table, s, a, levels, bound_fn, tol) is None


# ── inner maximum on a simplex grid ────────────────────────────────

@lru_cache(maxsize=4)
def simplex_grid(num_states: int, steps: int) -> np.ndarray:
    """Every vector k / steps with nonnegative integers k summing to steps (read-only, cached)."""
    if num_states == 1:
        return np.ones((1, 1))
    if math.comb(steps + num_states - 1, num_states - 1) > MAX_GRID_POINTS:
        raise GuardError(f"simplex grid with {steps} steps in {num_states} states is too large")
    head = np.arange(steps + 1)[:, None]
    for _ in range(num_states - 2):
        room = steps - head.sum(axis=1) + 1
        tail = np.concatenate([np.arange(r) for r in room])
        head = np.hstack([np.repeat(head, room, axis=0), tail[:, None]])
    last = steps - head.sum(axis=1, keepdims=True)
    points = np.hstack([head, last]) / steps
    points.setflags(write=False)
    return points


def inner_max_oracle(
    u,
    table: CountsTable | None = None,
    s: int = 0,
    a: int = 0,
    levels: ConfidenceLevels | None = None,
    grid: float = 1e-3,
    bound_fn: BoundFn | None = None,
) -> float:
    """
    max p . u over grid points p of the simplex that satisfy every subset bound.

    Grid points are a subset of the polytope, so the result never exceeds the
    true maximum and trails it by at most about grid * span(u).
    """
    values = np.asarray(getattr(u, "values", u), dtype=float)
    S = values.shape[0]
    _guard(S, MAX_GRID_STATES, "grid oracle")
    steps = int(round(1.0 / grid))
    bound_fn = bound_fn or table_bound_fn(table, s, a, levels)
    members = subset_members(S)
    bounds = bound_fn(members)

    points = simplex_grid(S, steps)
    mass = points @ members.T.astype(float)
    feasible = (mass <= bounds[None, :] + GRID_FEASIBILITY_TOL).all(axis=1)
    if not feasible.any():
        raise DataError("no grid point satisfies the subset bounds; refine the grid")
    return float((points[feasible] @ values).max())


# ── submodularity ──────────────────────────────────────────────────

def _subset_pairs(S: int) -> tuple[np.ndarray, np.ndarray]:
    masks = np.arange(1 << S)
    X, Y = np.meshgrid(masks, masks, indexing="ij")
    keep = (X & ~Y) == 0
    return X[keep], Y[keep]


def find_submodularity_violation(
    table: CountsTable | None = None,
    s: int = 0,
    a: int = 0,
    levels: ConfidenceLevels | None = None,
    bound_fn: BoundFn | None = None,
    tol: float = SUBSET_TOL,
    num_states: int | None = None,
) -> dict | None:
    """
    Exhaustive diminishing-returns check of f = subset upper bound:
    f(Y) - f(Y - x) <= f(X) - f(X - x) + tol for all X in Y, x in X.
    """
    S = num_states if num_states is not None else table.num_states
    _guard(S, MAX_SUBMODULAR_STATES, "submodularity check")
    bound_fn = bound_fn or table_bound_fn(table, s, a, levels)
    f = bound_fn(subset_members(S))
    X, Y = _subset_pairs(S)
    for x in range(S):
        bit = 1 << x
        sel = (X & bit) != 0
        xs, ys = X[sel], Y[sel]
        gain_small = f[xs] - f[xs ^ bit]
        gain_large = f[ys] - f[ys ^ bit]
        bad = np.flatnonzero(gain_large > gain_small + tol)
        if bad.size:
            i = int(bad[0])
            return {
                "X": int(xs[i]),
                "Y": int(ys[i]),
                "x": x,
                "marginal_X": float(gain_small[i]),
                "marginal_Y": float(gain_large[i]),
            }
    return None


def check_submodularity(
    table: CountsTable | None = None,
    s: int = 0,
    a: int = 0,
    levels: ConfidenceLevels | None = None,
    bound_fn: BoundFn | None = None,
    tol: float = SUBSET_TOL,
    num_states: int | None = None,
) -> bool:
    return find_submodularity_violation(table, s, a, levels, bound_fn, tol, num_states) is None
