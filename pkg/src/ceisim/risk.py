"""Perceived collision risk of a plan under a belief, and re-plan triggers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .belief import Belief, BeliefPoint

EXACT = "exact"
LINEARIZED = "linearized"

CONTINUE = "continue"
REPLAN_UPPER = "replan_upper"
REPLAN_LOWER = "replan_lower"


@dataclass(frozen=True)
class RiskParams:
    rho_l: float = 0.2
    rho_u: float = 0.5
    tau: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.rho_l < self.rho_u <= 1.0:
            raise ValueError("thresholds must satisfy 0 <= rho_l < rho_u <= 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def constraint(self) -> float:
        """Risk level a re-plan must stay below."""
        return 0.5 * (self.rho_l + self.rho_u)


@dataclass(frozen=True)
class RiskEvaluation:
    per_point: np.ndarray
    max_risk: float
    argmax_time: float


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def interval_probability(lower, upper, mu, sigma):
    """Gaussian mass between ``lower`` and ``upper`` (vectorised)."""
    return ndtr((upper - mu) / sigma) - ndtr((lower - mu) / sigma)


def point_collision_probability(
    own_planned_s: float,
    own_side: str,
    belief_point: BeliefPoint,
    track,
    bounds_mode: str = EXACT,
) -> float:
    if bounds_mode == EXACT:
        b = track._exact_bounds(float(own_planned_s), own_side)
        if b.empty:
            return 0.0
        lower, upper = b.lower, b.upper
    elif bounds_mode == LINEARIZED:
        lo, up, _, _ = track.linear_bounds(np.array([own_planned_s]), own_side)
        lower, upper = float(lo[0]), float(up[0])
    else:
        raise ValueError(f"unknown bounds mode {bounds_mode!r}")
    if upper <= lower:
        return 0.0
    mu, sd = belief_point.mu, belief_point.sigma
    p = _phi((upper - mu) / sd) - _phi((lower - mu) / sd)
    return min(1.0, max(0.0, p))


def plan_positions_at(plan_s: np.ndarray, dt: float, lead_times: np.ndarray) -> np.ndarray:
    """Planned own positions at the given lead times.

    ``plan_s[k]`` is the position ``(k + 1) * dt`` after now. Lead times on
    the plan grid hit samples exactly; others interpolate linearly.
    """
    times = dt * np.arange(1, len(plan_s) + 1)
    if np.any(lead_times > times[-1] + 1e-9):
        raise ValueError("plan horizon shorter than belief horizon")
    return np.interp(lead_times, times, plan_s)


def evaluate(
    plan,
    belief: Belief,
    track,
    own_side: str,
    now: float,
    bounds_mode: str = EXACT,
) -> RiskEvaluation:
    """Collision probability per belief point and its maximum."""
    leads = belief.lead_times(now)
    own = plan_positions_at(plan.s, plan.dt, leads)
    if bounds_mode == EXACT:
        lo = np.empty(len(own))
        up = np.empty(len(own))
        for i, s in enumerate(own):
            b = track._exact_bounds(float(s), own_side)
            lo[i], up[i] = (s, s) if b.empty else (b.lower, b.upper)
    elif bounds_mode == LINEARIZED:
        lo, up, _, _ = track.linear_bounds(own, own_side)
    else:
        raise ValueError(f"unknown bounds mode {bounds_mode!r}")
    p = np.clip(interval_probability(lo, up, belief.mu, belief.sigma), 0.0, 1.0)
    i = int(np.argmax(p))
    return RiskEvaluation(per_point=p, max_risk=float(p[i]), argmax_time=float(leads[i]))


def trigger(current_risk: float, time_since_replan: float, params: RiskParams) -> str:
    if current_risk > params.rho_u:
        return REPLAN_UPPER
    if current_risk < params.rho_l and time_since_replan > params.tau:
        return REPLAN_LOWER
    return CONTINUE
