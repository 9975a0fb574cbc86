"""
Closed-form regret and episode-count bounds.

  regret(T) <= 2^10 sqrt(D T S A min{ln(D+1), S} ln(8T/SA) ln(B S / delta))
               + 64 D S A ln(8T/SA) ln(B / delta),     B = 32 S A ln T
  episodes  <= S A log2(8T / SA)

The regret bound is a reference shape only: constants are used as printed.
"""

from __future__ import annotations

import math

from core.models import BoundReport, GuardError


def _check_domain(S: int, A: int, T: float) -> None:
    if S < 1 or A < 1:
        raise GuardError(f"S and A must be positive (S={S}, A={A})")
    if T <= S * A:
        raise GuardError(f"horizon T={T} must exceed S*A={S * A}")


def episode_bound(S: int, A: int, T: float) -> float:
    _check_domain(S, A, T)
    return S * A * math.log2(8.0 * T / (S * A))


def theoretical_regret_bound(D: float, S: int, A: int, T: float, delta: float) -> float:
    _check_domain(S, A, T)
    if D <= 0:
        raise GuardError(f"diameter must be positive (D={D})")
    if not (0.0 < delta < 1.0):
        raise GuardError(f"delta must lie in (0, 1) (delta={delta})")
    if T < 2:
        raise GuardError("T must be at least 2 so that ln T > 0")
    SA = S * A
    B = 32.0 * SA * math.log(T)
    log_episodes = math.log(8.0 * T / SA)
    lead = 2.0 ** 10 * math.sqrt(
        D * T * SA * min(math.log(D + 1.0), S) * log_episodes * math.log(B * S / delta)
    )
    tail = 64.0 * D * SA * log_episodes * math.log(B / delta)
    return lead + tail


def bound_report(D: float, S: int, A: int, T: float, delta: float) -> BoundReport:
    return BoundReport(
        theoretical_regret=theoretical_regret_bound(D, S, A, T, delta),
        episode_bound=episode_bound(S, A, T),
        diameter=D,
        num_states=S,
        num_actions=A,
        horizon=T,
        delta=delta,
    )
