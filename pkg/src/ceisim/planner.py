"""Deterministic acceleration plans over the planning horizon.

A plan is a sequence of inputs at the simulation rate together with the
states it induces. Plans are optimised for speed tracking and comfort only::

    cost = sum_n (v_n - v_d)**2 + a_n**2

Risk enters solely as a constraint when re-planning: the collision
probability at every belief point must stay below the driver's constraint
level. The constraint is enforced with a quadratic penalty whose weight
grows over a fixed schedule, each stage solved with box-bounded L-BFGS.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr

from .belief import Belief
from .dynamics import DynamicsParams, VehicleState, resistance, rollout_arrays

log = logging.getLogger(__name__)

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PlannerParams:
    v_d: float = 10.0
    risk_constraint: float = 0.35
    max_iterations: int = 200
    tolerance: float = 1e-3
    penalty_schedule: tuple[float, ...] = (1e3, 1e4, 1e5, 1e6, 1e7)
    horizon: float = 4.0

    def __post_init__(self):
        if self.v_d < 0:
            raise ValueError("desired velocity must be non-negative")
        if not 0.0 <= self.risk_constraint <= 1.0:
            raise ValueError("risk constraint must be a probability")


@dataclass(frozen=True, eq=False)
class Plan:
    inputs: np.ndarray
    s: np.ndarray
    v: np.ndarray
    created_at: float
    s0: float
    v0: float
    dt: float

    @classmethod
    def from_inputs(
        cls, state: VehicleState, inputs, dyn: DynamicsParams, created_at: float = 0.0
    ) -> Plan:
        inputs = np.clip(np.asarray(inputs, dtype=float), -dyn.a_max, dyn.a_max)
        s, v = rollout_arrays(state.s, state.v, inputs, dyn)
        return cls(inputs, s, v, created_at, state.s, state.v, dyn.dt)

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def states(self) -> list[VehicleState]:
        return [
            VehicleState(float(s), float(v), float(a))
            for s, v, a in zip(self.s, self.v, self.inputs)
        ]


@dataclass
class ReplanInfo:
    """Optimiser diagnostics for one re-plan."""

    stage: int = 1
    candidate: str = "previous"
    iterations: int = 0
    penalty: float = 0.0
    max_risk: float = 0.0
    feasible: bool = True
    history: list = field(default_factory=list)


def cost(plan: Plan, v_d: float) -> float:
    return float(np.sum((plan.v - v_d) ** 2) + np.sum(plan.inputs**2))


@dataclass
class RiskTerms:
    """Everything the risk penalty needs, fixed for one re-plan."""

    track: object
    side: str
    mu: np.ndarray
    sigma: np.ndarray
    index: np.ndarray  # plan sample below each lead time
    weight: np.ndarray  # interpolation weight of the sample above
    limit: float

    @classmethod
    def build(cls, track, side, belief: Belief, now: float, n_steps: int, dt: float, limit: float):
        leads = belief.lead_times(now)
        pos = leads / dt - 1.0  # fractional index into plan.s
        if np.any(pos > n_steps - 1 + 1e-9) or np.any(pos < -1e-9):
            raise ValueError("belief lead times fall outside the plan horizon")
        rounded = np.round(pos)
        pos = np.where(np.abs(pos - rounded) < 1e-9, rounded, pos)
        index = np.minimum(np.floor(pos).astype(int), n_steps - 2)
        weight = pos - index
        return cls(track, side, belief.mu.copy(), belief.sigma.copy(), index, weight, limit)

    def positions(self, s: np.ndarray) -> np.ndarray:
        return (1.0 - self.weight) * s[self.index] + self.weight * s[self.index + 1]

    def probabilities(self, s: np.ndarray):
        """Per-point probability and its derivative w.r.t. own position."""
        own = self.positions(s)
        lo, up, dlo, dup = self.track.linear_bounds(own, self.side)
        zu = (up - self.mu) / self.sigma
        zl = (lo - self.mu) / self.sigma
        p = ndtr(zu) - ndtr(zl)
        dens_u = np.exp(-0.5 * zu * zu) / _SQRT_2PI
        dens_l = np.exp(-0.5 * zl * zl) / _SQRT_2PI
        dp = (dens_u * dup - dens_l * dlo) / self.sigma
        return np.clip(p, 0.0, 1.0), dp

    def max_risk(self, s: np.ndarray) -> float:
        return float(np.max(self.probabilities(s)[0]))


def objective(
    inputs,
    s0: float,
    v0: float,
    v_d: float,
    dyn: DynamicsParams,
    risk: RiskTerms | None = None,
    penalty: float = 0.0,
) -> tuple[float, np.ndarray]:
    """Cost plus risk penalty, with its exact gradient by reverse sweep."""
    a = np.asarray(inputs, dtype=float)
    n = a.size
    alpha, beta, a_max, dt = dyn.alpha, dyn.beta, dyn.a_max, dyn.dt
    s = np.empty(n + 1)
    v = np.empty(n + 1)
    live = np.empty(n, dtype=bool)
    s[0], v[0] = s0, v0
    sk, vk = float(s0), float(v0)
    for k in range(n):
        ak = min(a_max, max(-a_max, float(a[k])))
        vn = vk + (ak - (alpha * vk * vk + beta)) * dt
        sk = sk + vk * dt
        live[k] = vn > 0.0
        vk = vn if vn > 0.0 else 0.0
        s[k + 1] = sk
        v[k + 1] = vk

    dv = v[1:] - v_d
    value = float(dv @ dv + a @ a)
    g_v = np.zeros(n + 1)
    g_s = np.zeros(n + 1)
    g_v[1:] = 2.0 * dv

    if risk is not None and penalty > 0.0:
        p, dp = risk.probabilities(s[1:])
        viol = np.maximum(p - risk.limit, 0.0)
        value += penalty * float(viol @ viol)
        ds = 2.0 * penalty * viol * dp
        np.add.at(g_s, risk.index + 1, (1.0 - risk.weight) * ds)
        np.add.at(g_s, risk.index + 2, risk.weight * ds)

    grad = 2.0 * a
    lam_s = g_s[n]
    lam_v = g_v[n]
    g_v_l, g_s_l, v_l, live_l = g_v.tolist(), g_s.tolist(), v.tolist(), live.tolist()
    for k in range(n - 1, -1, -1):
        if live_l[k]:
            grad[k] += lam_v * dt
            lam_v_prev = g_v_l[k] + lam_v * (1.0 - 2.0 * alpha * v_l[k] * dt) + lam_s * dt
        else:
            lam_v_prev = g_v_l[k] + lam_s * dt
        lam_s = g_s_l[k] + lam_s
        lam_v = lam_v_prev
    return value, grad


class Planner:
    """Plans for one driver on one track."""

    def __init__(self, params: PlannerParams, dyn: DynamicsParams, track, side: str):
        self.params = params
        self.dyn = dyn
        self.track = track
        self.side = side
        self.n_steps = int(round(params.horizon / dyn.dt))

    # -- helpers -----------------------------------------------------------

    def _bounds(self):
        a = self.dyn.a_max
        return [(-a, a)] * self.n_steps

    def _minimize(self, x0, state, risk=None, penalty=0.0):
        res = minimize(
            objective,
            np.asarray(x0, dtype=float),
            args=(state.s, state.v, self.params.v_d, self.dyn, risk, penalty),
            jac=True,
            method="L-BFGS-B",
            bounds=self._bounds(),
            options={"maxiter": self.params.max_iterations},
        )
        return np.clip(res.x, -self.dyn.a_max, self.dyn.a_max), int(res.nit)

    def _plan(self, state, inputs, now) -> Plan:
        return Plan.from_inputs(state, inputs, self.dyn, created_at=now)

    # -- operations --------------------------------------------------------

    def initial_plan(self, state: VehicleState, now: float = 0.0) -> Plan:
        """Unconstrained optimum from an all-zero start."""
        x, nit = self._minimize(np.zeros(self.n_steps), state)
        log.debug("initial plan after %d iterations", nit)
        return self._plan(state, x, now)

    def continue_plan(self, plan: Plan) -> Plan:
        return continue_plan(plan, self.dyn)

    def _constrained(self, x0, state, risk: RiskTerms, info: ReplanInfo):
        """Penalty continuation; stops at the first stage that satisfies the constraint."""
        x = np.asarray(x0, dtype=float)
        tol = self.params.tolerance
        best_x, best_risk = x, np.inf
        for penalty in self.params.penalty_schedule:
            x, nit = self._minimize(x, state, risk, penalty)
            s, _ = rollout_arrays(state.s, state.v, x, self.dyn)
            r = risk.max_risk(s)
            info.iterations += nit
            info.penalty = penalty
            info.history.append((info.stage, penalty, nit, r))
            if r < best_risk:
                best_x, best_risk = x, r
            if r <= risk.limit + tol:
                return x, r, True
        return best_x, best_risk, False

    def replan(
        self, old_plan: Plan, state: VehicleState, belief: Belief, now: float
    ) -> tuple[Plan, ReplanInfo]:
        """Risk-constrained re-optimisation warm-started from ``old_plan``.

        Falls back to the cheapest of full braking, coasting and full
        acceleration as a new starting point when the warm start cannot
        satisfy the constraint.
        """
        risk = RiskTerms.build(
            self.track, self.side, belief, now, self.n_steps, self.dyn.dt,
            self.params.risk_constraint,
        )
        info = ReplanInfo()
        x1, r1, ok = self._constrained(old_plan.inputs, state, risk, info)
        if ok:
            info.max_risk = r1
            return self._plan(state, x1, now), info

        a = self.dyn.a_max
        candidates = [("brake", -a), ("coast", 0.0), ("accelerate", a)]
        costs = []
        for name, value in candidates:
            c = cost(self._plan(state, np.full(self.n_steps, value), now), self.params.v_d)
            costs.append(c)
        pick = int(np.argmin(costs))  # first minimum: brake, coast, accelerate
        info.stage = 2
        info.candidate = candidates[pick][0]
        x2, r2, ok = self._constrained(
            np.full(self.n_steps, candidates[pick][1]), state, risk, info
        )
        if ok:
            info.max_risk = r2
            return self._plan(state, x2, now), info
        info.feasible = False
        x, r = (x1, r1) if r1 <= r2 else (x2, r2)
        info.max_risk = r
        return self._plan(state, x, now), info


def continue_plan(plan: Plan, dyn: DynamicsParams) -> Plan:
    """Advance one step; the appended input holds the final velocity."""
    v_end = float(plan.v[-1])
    hold = 0.0 if v_end == 0.0 else min(dyn.a_max, max(-dyn.a_max, resistance(v_end, dyn)))
    s_new = float(plan.s[-1]) + v_end * dyn.dt
    v_new = max(0.0, v_end + (hold - (dyn.alpha * v_end * v_end + dyn.beta)) * dyn.dt)
    return replace(
        plan,
        inputs=np.append(plan.inputs[1:], hold),
        s=np.append(plan.s[1:], s_new),
        v=np.append(plan.v[1:], v_new),
        created_at=plan.created_at,
        s0=float(plan.s[0]),
        v0=float(plan.v[0]),
    )
