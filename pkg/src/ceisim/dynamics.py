"""Longitudinal vehicle dynamics with quadratic drag and constant resistance.

Net acceleration is the applied input minus ``alpha * v**2 + beta``. States
advance with explicit Euler at a fixed timestep; position uses the velocity
from before the step, and velocity never drops below zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DynamicsParams:
    alpha: float = 0.0005
    beta: float = 0.1
    a_max: float = 2.5
    dt: float = 0.05

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not self.a_max > 0:
            raise ValueError("a_max must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class VehicleState:
    s: float = 0.0
    v: float = 0.0
    a_in: float = 0.0

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("velocity must be non-negative")


def resistance(v: float, params: DynamicsParams = DynamicsParams()) -> float:
    """Deceleration due to drag and rolling resistance at velocity ``v``."""
    if v < 0:
        raise ValueError("velocity must be non-negative")
    return params.alpha * v * v + params.beta


def clip_input(a_in: float, params: DynamicsParams = DynamicsParams()) -> float:
    return min(params.a_max, max(-params.a_max, a_in))


def step(
    state: VehicleState, a_in: float, params: DynamicsParams = DynamicsParams()
) -> VehicleState:
    a = clip_input(a_in, params)
    v = state.v + (a - resistance(state.v, params)) * params.dt
    return VehicleState(s=state.s + state.v * params.dt, v=max(0.0, v), a_in=a)


def net_acceleration(before: VehicleState, after: VehicleState, dt: float) -> float:
    """Effective acceleration over one step (zero once the clamp engages)."""
    return (after.v - before.v) / dt


def rollout(
    state: VehicleState, inputs, params: DynamicsParams = DynamicsParams()
) -> list[VehicleState]:
    """States after each input; the k-th entry has seen ``k + 1`` steps."""
    out = []
    for a in inputs:
        state = step(state, float(a), params)
        out.append(state)
    return out


def rollout_arrays(
    s0: float, v0: float, inputs, params: DynamicsParams = DynamicsParams()
) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`rollout`: positions and velocities after each step.

    Bit-identical to repeated :func:`step` calls.
    """
    alpha, beta, a_max, dt = params.alpha, params.beta, params.a_max, params.dt
    n = len(inputs)
    s_out = np.empty(n)
    v_out = np.empty(n)
    s, v = float(s0), float(v0)
    for k in range(n):
        a = min(a_max, max(-a_max, float(inputs[k])))
        v_next = v + (a - (alpha * v * v + beta)) * dt
        s = s + v * dt
        v = max(0.0, v_next)
        s_out[k] = s
        v_out[k] = v
    return s_out, v_out
