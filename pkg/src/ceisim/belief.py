"""Gaussian beliefs about the other vehicle's future arc position.

A belief is a rolling sequence of points, one every ``1/point_rate`` seconds
over the planning horizon. Each point is a Gaussian over the other vehicle's
position at a fixed absolute timestamp. Points are initialised from a
constant-velocity prediction with a spread covering the physical acceleration
bound, and updated every tick from the observed velocity under a
constant-velocity likelihood whose spread covers the comfortable acceleration
bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 1e-9


@dataclass(frozen=True)
class BeliefParams:
    horizon: float = 4.0
    point_rate: float = 4.0
    a_c: float = 1.0
    a_max: float = 2.5

    def __post_init__(self):
        if not (self.horizon > 0 and self.point_rate > 0):
            raise ValueError("horizon and point_rate must be positive")
        if abs(self.n_points - self.horizon * self.point_rate) > 1e-9:
            raise ValueError("horizon * point_rate must be an integer")
        if not (self.a_c > 0 and self.a_max > 0):
            raise ValueError("accelerations must be positive")

    @property
    def n_points(self) -> int:
        return int(round(self.horizon * self.point_rate))

    @property
    def spacing(self) -> float:
        return 1.0 / self.point_rate


@dataclass(frozen=True)
class BeliefPoint:
    t: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def _check_lead(t: float) -> None:
    if not t > 0:
        raise ValueError(f"lead time must be positive, got {t}")


def init_point(
    other_s: float, other_v: float, t: float, a_max: float = 2.5
) -> BeliefPoint:
    """Constant-velocity mean; the max-acceleration bound sits at 3 sigma."""
    _check_lead(t)
    if other_v < 0:
        raise ValueError("velocity must be non-negative")
    mu = other_s + other_v * t
    ub = mu + 0.5 * a_max * t * t
    return BeliefPoint(t=t, mu=mu, sigma=(ub - mu) / 3.0)


def likelihood_params(p: float, t: float, a_c: float = 1.0) -> tuple[float, float]:
    """Mean and spread of the observed velocity given displacement ``p``."""
    _check_lead(t)
    return p / t, a_c * t / 6.0


def _posterior(d0, var0, v, t, a_c):
    # Observing v ~ N(d/t, (a_c t/6)^2) is observing d with sd a_c t^2 / 6.
    obs_var = (a_c * t * t / 6.0) ** 2
    precision = 1.0 / var0 + 1.0 / obs_var
    mean = (d0 / var0 + v * t / obs_var) / precision
    return mean, 1.0 / precision


def update_point(
    prior: BeliefPoint, observed_v: float, other_current_s: float, a_c: float = 1.0
) -> BeliefPoint:
    """Conjugate update of one point from one velocity observation."""
    if not prior.sigma > 0:
        raise ValueError("prior sigma must be positive")
    _check_lead(prior.t)
    mean, var = _posterior(
        prior.mu - other_current_s, prior.sigma**2, observed_v, prior.t, a_c
    )
    return BeliefPoint(t=prior.t, mu=mean + other_current_s, sigma=math.sqrt(var))


@dataclass(frozen=True)
class Belief:
    """Belief points stored by absolute timestamp.

    ``lead_times(now)`` gives the per-point ``t`` used by the likelihood and
    by risk evaluation.
    """

    timestamps: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    params: BeliefParams = BeliefParams()

    def __len__(self) -> int:
        return len(self.timestamps)

    def lead_times(self, now: float) -> np.ndarray:
        return self.timestamps - now

    def points(self, now: float) -> list[BeliefPoint]:
        return [
            BeliefPoint(float(t), float(m), float(s))
            for t, m, s in zip(self.lead_times(now), self.mu, self.sigma)
        ]

    @classmethod
    def initial(
        cls, now: float, other_s: float, other_v: float, params: BeliefParams = BeliefParams()
    ) -> Belief:
        leads = params.spacing * np.arange(1, params.n_points + 1)
        pts = [init_point(other_s, other_v, float(t), params.a_max) for t in leads]
        return cls(
            timestamps=now + leads,
            mu=np.array([p.mu for p in pts]),
            sigma=np.array([p.sigma for p in pts]),
            params=params,
        )

    def roll(self, now: float, other_s: float, other_v: float) -> Belief:
        """Replace expired head points by fresh points at the horizon tail."""
        b = self
        while len(b) and b.timestamps[0] <= now + _EPS:
            fresh = init_point(other_s, other_v, b.params.horizon, b.params.a_max)
            b = Belief(
                timestamps=np.append(b.timestamps[1:], now + b.params.horizon),
                mu=np.append(b.mu[1:], fresh.mu),
                sigma=np.append(b.sigma[1:], fresh.sigma),
                params=b.params,
            )
        return b

    def update(self, now: float, other_s: float, other_v: float) -> Belief:
        """Bayesian update of every point from one (position, velocity) view."""
        t = self.lead_times(now)
        if np.any(t <= 0):
            raise ValueError("expired belief points must be rolled before updating")
        mean, var = _posterior(
            self.mu - other_s, self.sigma**2, other_v, t, self.params.a_c
        )
        return Belief(self.timestamps, mean + other_s, np.sqrt(var), self.params)

    def observe(self, now: float, other_s: float, other_v: float) -> Belief:
        """Roll, then update: one tick of belief maintenance."""
        return self.roll(now, other_s, other_v).update(now, other_s, other_v)
