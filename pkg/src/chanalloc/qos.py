"""Per-user satisfaction, dissatisfaction counters and the complaint budget.

Satisfaction of a served user decays with the delay-exceedance ratio d/tau
as exp(-d/tau) - 1, bounded in (-1, 0]. Users left to local computation sit
at the fixed dissatisfaction level. A user whose satisfaction reaches that
level (inclusive) accrues one dissatisfaction count; every time the count
hits a fresh multiple of the user's threshold the user complains, and the
system-wide complaint tally is capped by a budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QosProfile:
    tolerable_delay_s: np.ndarray  # (N,) tau, seconds
    complaint_threshold: np.ndarray  # (N,) dissatisfactions per complaint
    complaint_budget: int  # episode-wide complaint cap
    dissatisfaction_level: float = -0.5

    def __post_init__(self):
        tau = np.array(self.tolerable_delay_s, dtype=float)
        tau.setflags(write=False)
        object.__setattr__(self, "tolerable_delay_s", tau)
        thresh = np.array(self.complaint_threshold, dtype=np.int64)
        thresh.setflags(write=False)
        object.__setattr__(self, "complaint_threshold", thresh)
        if tau.ndim != 1 or thresh.shape != tau.shape:
            raise ValueError("tolerable_delay_s and complaint_threshold must be 1-D with equal length")
        if not np.all(tau > 0):
            raise ValueError("tolerable_delay_s entries must be > 0")
        if not np.all(thresh >= 1):
            raise ValueError("complaint_threshold entries must be >= 1")
        if self.complaint_budget < 0:
            raise ValueError("complaint_budget must be >= 0")
        if not -1.0 < self.dissatisfaction_level < 0.0:
            raise ValueError("dissatisfaction_level must lie in (-1, 0)")

    @property
    def num_users(self) -> int:
        return self.tolerable_delay_s.shape[0]


@dataclass
class QosState:
    """Mutable per-episode QoS bookkeeping, owned by one environment."""

    dissat_count: np.ndarray  # (N,) non-negative ints, never decreasing
    satisfaction_last: np.ndarray  # (N,) floats in [-1, 0]

    @classmethod
    def fresh(cls, num_users: int) -> "QosState":
        return cls(
            dissat_count=np.zeros(num_users, dtype=np.int64),
            satisfaction_last=np.zeros(num_users, dtype=float),
        )

    def copy(self) -> "QosState":
        return QosState(self.dissat_count.copy(), self.satisfaction_last.copy())


def satisfaction(
    data_bits: float,
    rate: float,
    tau_s: float,
    allocated: bool,
    dissatisfaction_level: float = -0.5,
) -> float:
    """Satisfaction in [-1, 0]: exp(-d/tau) - 1 when served, else the fixed level."""
    if not allocated:
        return dissatisfaction_level
    if rate <= 0:
        raise ValueError(f"rate must be > 0 for an allocated user, got {rate}")
    if tau_s <= 0:
        raise ValueError("tau_s must be > 0")
    return math.exp(-data_bits / (rate * tau_s)) - 1.0


def update_dissatisfaction(
    s: float,
    state: QosState,
    profile: QosProfile,
    user: int,
) -> tuple[int, bool]:
    """Record one step's satisfaction for ``user``; returns (count, complained).

    The count increments when s is at or below the dissatisfaction level;
    a complaint fires exactly when the incremented count is a positive
    multiple of the user's threshold, so the running complaint total always
    equals sum(floor(count / threshold)).
    """
    state.satisfaction_last[user] = s
    if s > profile.dissatisfaction_level:
        return int(state.dissat_count[user]), False
    state.dissat_count[user] += 1
    count = int(state.dissat_count[user])
    complained = count % int(profile.complaint_threshold[user]) == 0
    return count, complained


def total_complaints(state: QosState, profile: QosProfile) -> int:
    """System-wide complaint tally: sum of floor(count / threshold)."""
    return int(np.sum(state.dissat_count // profile.complaint_threshold))
