"""Closed-loop simulation of two interacting drivers.

Each tick both drivers read the same snapshot of the world: they observe the
other vehicle's position and velocity, update their belief, evaluate the
risk of their current plan, re-plan if a threshold is crossed, and finally
execute the first input of their plan.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .belief import Belief
from .dynamics import VehicleState, step
from .planner import Plan, Planner, PlannerParams, continue_plan
from .risk import CONTINUE, EXACT, RiskParams, evaluate, trigger
from .scenario import ScenarioConfig
from .track import LEFT, RIGHT, SIDES, other_side

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("time", "side", "s", "v", "a_in", "a_net", "max_risk", "event")
REPLAN_COLUMNS = (
    "time", "side", "trigger", "stage", "candidate", "iterations",
    "penalty", "max_risk", "feasible",
)


@dataclass
class AgentState:
    side: str
    vehicle: VehicleState
    plan: Plan
    belief: Belief
    risk_params: RiskParams
    planner: Planner
    last_replan_at: float = 0.0

    @property
    def planner_params(self) -> PlannerParams:
        return self.planner.params


@dataclass(frozen=True)
class TraceRecord:
    time: float
    side: str
    s: float
    v: float
    a_in: float
    a_net: float
    max_risk: float
    trigger: str = CONTINUE
    flagged: bool = False
    monitored_risk: float | None = None  # before any re-plan this tick

    @property
    def event(self) -> str:
        if self.trigger == CONTINUE:
            return "none"
        return "infeasible" if self.flagged else self.trigger


@dataclass(frozen=True)
class ReplanRecord:
    time: float
    side: str
    trigger: str
    stage: int
    candidate: str
    iterations: int
    penalty: float
    max_risk: float
    feasible: bool


@dataclass
class SimOutcome:
    collided: bool = False
    collision_time: float | None = None
    merge_pass_times: dict = field(default_factory=lambda: {LEFT: None, RIGHT: None})
    headway_at_merge: float | None = None
    first_to_merge: str | None = None
    final_time: float = 0.0
    timed_out: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


class Simulation:
    """Mutable world state for one scenario run."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.track = config.track
        self.dyn = config.dynamics
        self.tick_index = 0
        self.trace: list[TraceRecord] = []
        self.replans: list[ReplanRecord] = []
        self.outcome = SimOutcome()

        vehicles = {
            side: VehicleState(s=config.driver(side).x_0, v=config.driver(side).v_0)
            for side in SIDES
        }
        self.agents: dict[str, AgentState] = {}
        for side in SIDES:
            d = config.driver(side)
            rp = RiskParams(rho_l=d.rho_l, rho_u=d.rho_u, tau=d.tau)
            pp = PlannerParams(
                v_d=d.v_d,
                risk_constraint=rp.constraint,
                max_iterations=config.planner.max_iterations,
                tolerance=config.planner.tolerance,
                horizon=config.belief.horizon,
            )
            planner = Planner(pp, self.dyn, self.track, side)
            other = vehicles[other_side(side)]
            self.agents[side] = AgentState(
                side=side,
                vehicle=vehicles[side],
                plan=planner.initial_plan(vehicles[side], now=0.0),
                belief=Belief.initial(0.0, other.s, other.v, config.belief),
                risk_params=rp,
                planner=planner,
            )

    @property
    def now(self) -> float:
        return self.tick_index * self.dyn.dt

    def _decide(self, agent: AgentState, other: VehicleState, now: float):
        agent.belief = agent.belief.observe(now, other.s, other.v)
        ev = evaluate(agent.plan, agent.belief, self.track, agent.side, now, EXACT)
        monitored = ev.max_risk
        decision = trigger(monitored, now - agent.last_replan_at, agent.risk_params)
        flagged = False
        if decision != CONTINUE:
            plan, info = agent.planner.replan(agent.plan, agent.vehicle, agent.belief, now)
            agent.plan = plan
            agent.last_replan_at = now
            flagged = not info.feasible
            self.replans.append(
                ReplanRecord(
                    now, agent.side, decision, info.stage, info.candidate,
                    info.iterations, info.penalty, info.max_risk, info.feasible,
                )
            )
            ev = evaluate(plan, agent.belief, self.track, agent.side, now, EXACT)
        return ev.max_risk, monitored, decision, flagged

    def tick(self) -> None:
        now = self.now
        snapshot = {side: self.agents[side].vehicle for side in SIDES}
        decisions = {
            side: self._decide(self.agents[side], snapshot[other_side(side)], now)
            for side in SIDES
        }
        for side in SIDES:
            agent = self.agents[side]
            before = agent.vehicle
            after = step(before, float(agent.plan.inputs[0]), self.dyn)
            max_risk, monitored, decision, flagged = decisions[side]
            self.trace.append(
                TraceRecord(
                    time=now, side=side, s=before.s, v=before.v, a_in=after.a_in,
                    a_net=(after.v - before.v) / self.dyn.dt, max_risk=max_risk,
                    trigger=decision, flagged=flagged, monitored_risk=monitored,
                )
            )
            agent.vehicle = after
            agent.plan = continue_plan(agent.plan, self.dyn)
        self.tick_index += 1
        self._bookkeeping(snapshot)

    def _bookkeeping(self, before: dict[str, VehicleState]) -> None:
        now = self.now
        out = self.outcome
        after = {side: self.agents[side].vehicle for side in SIDES}
        merge = self.track.merge_point
        if merge is not None:
            for side in SIDES:
                if out.merge_pass_times[side] is None and after[side].s >= merge:
                    frac = (merge - before[side].s) / (after[side].s - before[side].s)
                    out.merge_pass_times[side] = now - self.dyn.dt * (1.0 - frac)
                    if out.first_to_merge is None:
                        out.first_to_merge = side
                    else:
                        lead = other_side(side)
                        lead_s = before[lead].s + frac * (after[lead].s - before[lead].s)
                        out.headway_at_merge = lead_s - merge
        if bool(self.track.overlap(LEFT, after[LEFT].s, RIGHT, after[RIGHT].s)):
            out.collided = True
            out.collision_time = now

    def done(self) -> bool:
        if self.outcome.collided:
            return True
        if all(a.vehicle.s >= self.track.end for a in self.agents.values()):
            return True
        return self.now >= self.config.sim_cap - 1e-9

    def run(self) -> tuple[list[TraceRecord], SimOutcome]:
        while not self.done():
            self.tick()
        self.outcome.final_time = self.now
        self.outcome.timed_out = not self.outcome.collided and not all(
            a.vehicle.s >= self.track.end for a in self.agents.values()
        )
        return self.trace, self.outcome


def run(config: ScenarioConfig) -> tuple[list[TraceRecord], SimOutcome]:
    return Simulation(config).run()


def tick(world: Simulation) -> Simulation:
    world.tick()
    return world


# --------------------------------------------------------------------------
# trace helpers


def trace_csv(trace: list[TraceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow(
            [f"{r.time:.2f}", r.side, repr(r.s), repr(r.v), repr(r.a_in),
             repr(r.a_net), repr(r.max_risk), r.event]
        )
    return buf.getvalue()


def replans_csv(replans: list[ReplanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPLAN_COLUMNS)
    for r in replans:
        w.writerow([f"{r.time:.2f}", r.side, r.trigger, r.stage, r.candidate,
                    r.iterations, repr(r.penalty), repr(r.max_risk), r.feasible])
    return buf.getvalue()


def side_series(trace: list[TraceRecord], side: str) -> dict[str, np.ndarray]:
    rows = [r for r in trace if r.side == side]
    return {
        "time": np.array([r.time for r in rows]),
        "s": np.array([r.s for r in rows]),
        "v": np.array([r.v for r in rows]),
        "a_in": np.array([r.a_in for r in rows]),
        "a_net": np.array([r.a_net for r in rows]),
        "max_risk": np.array([r.max_risk for r in rows]),
        "monitored_risk": np.array([r.monitored_risk for r in rows], dtype=float),
        "trigger": np.array([r.trigger for r in rows]),
    }


def bumper_gap(trace: list[TraceRecord], vehicle_length: float) -> tuple[np.ndarray, np.ndarray]:
    """Time series of the bumper-to-bumper gap along the shared path."""
    left, right = side_series(trace, LEFT), side_series(trace, RIGHT)
    return left["time"], np.abs(right["s"] - left["s"]) - vehicle_length


def steady_state_gap(trace, vehicle_length: float, window: float = 1.0) -> float:
    """Mean bumper gap over the final ``window`` seconds of the trace."""
    t, gap = bumper_gap(trace, vehicle_length)
    return float(np.mean(gap[t > t[-1] - window + 1e-9]))


def replan_counts(trace: list[TraceRecord], side: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for r in trace:
        if r.side == side and r.trigger != CONTINUE:
            counts[r.trigger] = counts.get(r.trigger, 0) + 1
    return counts
