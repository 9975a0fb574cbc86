"""
Exact oracles on a known model: optimal gain, single-policy gain, diameter.

Average-reward iteration runs on the aperiodicity-transformed operator
    P' = tau * I + (1 - tau) * P
which has the same gains and optimal policies as P but lets relative value
iteration converge on periodic chains (e.g. a deterministic 2-cycle).
"""

from __future__ import annotations

import numpy as np

from core.models import GainReport, NonConvergenceError
from mdp.model import TabularMDP

DEFAULT_TOL = 1e-9
MAX_SWEEPS = 10 ** 6
APERIODICITY = 0.5


def span(x: np.ndarray) -> float:
    return float(np.max(x) - np.min(x))


# ── average reward ─────────────────────────────────────────────────

def solve_average_reward(
    P: np.ndarray,
    R: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_SWEEPS,
    tau: float = APERIODICITY,
) -> GainReport:
    """Relative value iteration for the optimal gain of arrays P (S,A,S), R (S,A)."""
    S = P.shape[0]
    eye = np.eye(S)[:, None, :]
    P_ap = tau * eye + (1.0 - tau) * P
    u = np.zeros(S)
    for i in range(1, max_iter + 1):
        q = R + P_ap @ u
        u_next = q.max(axis=1)
        diff = u_next - u
        res = span(diff)
        u = u_next - u_next.min()
        if res <= tol:
            gain = 0.5 * (float(diff.max()) + float(diff.min()))
            policy = np.argmax(R + P_ap @ u, axis=1)
            return GainReport(
                gain=gain,
                bias=(1.0 - tau) * u,
                policy=policy,
                iterations=i,
                residual_span=res,
            )
    raise NonConvergenceError("relative value iteration", max_iter, res)


def optimal_gain(mdp: TabularMDP, tol: float = DEFAULT_TOL, max_iter: int = MAX_SWEEPS) -> GainReport:
    return solve_average_reward(mdp.transitions, mdp.reward_mean, tol=tol, max_iter=max_iter)


def policy_gain(
    P: np.ndarray,
    R: np.ndarray,
    policy: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_SWEEPS,
) -> float:
    """Gain of a deterministic stationary policy whose induced chain is unichain."""
    idx = np.arange(P.shape[0])
    policy = np.asarray(policy)
    P_pi = P[idx, policy][:, None, :]
    R_pi = R[idx, policy][:, None]
    return solve_average_reward(P_pi, R_pi, tol=tol, max_iter=max_iter).gain


# ── diameter ───────────────────────────────────────────────────────

def expected_hitting_times(
    mdp: TabularMDP,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_SWEEPS,
) -> np.ndarray:
    """
    H[t, s] = minimal expected number of steps from s to reach t.

    All targets iterate together on the fixed point
        h_t(s) = 1 + min_a sum_{s'' != t} p(s''|s,a) h_t(s''),  h_t(t) = 0.
    """
    P = mdp.transitions
    S = mdp.num_states
    H = np.zeros((S, S))
    diag = np.arange(S)
    for _ in range(max_iter):
        # (t, s, a) = sum_k P[s, a, k] * H[t, k]
        cont = np.einsum("sak,tk->tsa", P, H)
        H_next = 1.0 + cont.min(axis=2)
        H_next[diag, diag] = 0.0
        change = float(np.max(np.abs(H_next - H)))
        H = H_next
        if change <= tol:
            return H
    raise NonConvergenceError("hitting-time iteration (model not communicating?)", max_iter, change)


def diameter(mdp: TabularMDP, tol: float = DEFAULT_TOL, max_iter: int = MAX_SWEEPS) -> float:
    """Max over ordered pairs s != s' of the minimal expected travel time.  0 for S = 1."""
    if mdp.num_states == 1:
        return 0.0
    H = expected_hitting_times(mdp, tol=tol, max_iter=max_iter)
    return float(H.max())
