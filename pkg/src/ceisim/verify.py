"""Brute-force oracles for the closed-form pieces of the model.

Each suite compares an analytic routine against an independent numerical
computation and returns a :class:`SuiteReport`. The oracles deliberately share
as little code as possible with what they check: the bounds oracle sweeps the
rectangle test on a fine grid, the posterior oracle integrates prior times
likelihood on a grid, and the risk oracle samples positions and tests body
overlap directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import BeliefPoint, update_point
from .risk import EXACT, point_collision_probability
from .track import SIDES, TrackGeometry, other_side

BOUNDS_TOL = 0.2
BOUNDS_WINDOW = 5.0
ORACLE_STEP = 0.01
POSTERIOR_TOL = 1e-4
GRID_POINTS = 100_000
GRID_SPAN = 8.0
MC_SAMPLES = 1_000_000
MC_SIGMAS = 3.0


@dataclass
class SuiteReport:
    name: str
    passed: bool
    checks: int
    failures: int
    stats: dict = field(default_factory=dict)
    threshold: str = ""

    def lines(self) -> list[str]:
        head = f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.checks - self.failures}/{self.checks} within {self.threshold})"
        return [head] + [f"  {k} = {v:.6g}" for k, v in self.stats.items()]


# --------------------------------------------------------------------------
# bounds


def swept_bounds(track, own_s: float, own_side: str, step: float = ORACLE_STEP):
    """Extreme colliding positions of the other vehicle on a ``step`` grid.

    Returns ``None`` when nothing on the grid overlaps.
    """
    reach = track.diagonal * 2.0 + 2.0
    grid = np.arange(own_s - reach, own_s + reach + 0.5 * step, step)
    hits = track.overlap(own_side, own_s, other_side(own_side), grid)
    if not np.any(hits):
        return None
    idx = np.flatnonzero(hits)
    return float(grid[idx[0]]), float(grid[idx[-1]])


def verify_bounds(
    track: TrackGeometry | None = None,
    step: float = 0.05,
    window: float = BOUNDS_WINDOW,
    tol: float = BOUNDS_TOL,
) -> SuiteReport:
    """Linearised bounds against the swept oracle away from the merge point.

    Past the merge the two vehicles share one lane; from one body length past
    the merge the linearised bounds must match the exact ones to 1e-9.
    """
    track = track or TrackGeometry()
    merge = track.merge_point
    own = np.arange(0.0, track.end + 0.5 * step, step)
    own = own[np.abs(own - merge) > window]
    worst = 0.0
    worst_at = float("nan")
    worst_shared = 0.0
    failures = 0
    checks = 0
    for side in SIDES:
        for s in own:
            s = float(s)
            checks += 1
            lin = track.collision_bounds_linearized(s, side)
            ref = swept_bounds(track, s, side)
            if ref is None or lin.empty:
                # an empty side must match an empty side, up to a grid step of slack
                if ref is None and lin.empty:
                    continue
                if ref is not None and ref[1] - ref[0] <= tol:
                    continue
                failures += 1
                worst, worst_at = float("inf"), s
                continue
            err = max(abs(lin.lower - ref[0]), abs(lin.upper - ref[1]))
            if err > worst:
                worst, worst_at = err, s
            if err > tol:
                failures += 1
            if s >= merge + track.vehicle_length:
                exact = track.collision_bounds(s, side)
                d = max(abs(lin.lower - exact.lower), abs(lin.upper - exact.upper))
                worst_shared = max(worst_shared, d)
                if d > 1e-9:
                    failures += 1
    return SuiteReport(
        name="bounds",
        passed=failures == 0,
        checks=checks,
        failures=failures,
        stats={"max_deviation_m": worst, "at_own_s": worst_at,
               "max_shared_lane_deviation_m": worst_shared},
        threshold=f"{tol} m outside +/-{window} m of the merge point",
    )


# --------------------------------------------------------------------------
# posterior


def grid_posterior(prior: BeliefPoint, observed_v: float, other_s: float, a_c: float = 1.0,
                   points: int = GRID_POINTS, span: float = GRID_SPAN):
    """Posterior mean and sd by integrating prior x likelihood on a grid."""
    x = np.linspace(prior.mu - span * prior.sigma, prior.mu + span * prior.sigma, points)
    t = prior.t
    lik_sd = a_c * t / 6.0
    log_w = -0.5 * ((x - prior.mu) / prior.sigma) ** 2
    log_w -= 0.5 * ((observed_v - (x - other_s) / t) / lik_sd) ** 2
    w = np.exp(log_w - log_w.max())
    z = np.trapezoid(w, x)
    mean = np.trapezoid(w * x, x) / z
    var = np.trapezoid(w * (x - mean) ** 2, x) / z
    return float(mean), float(np.sqrt(var))


def random_posterior_case(rng: np.random.Generator):
    t = float(rng.uniform(0.25, 4.0))
    other_s = float(rng.uniform(0.0, 100.0))
    v = float(rng.uniform(0.0, 15.0))
    sigma = float(rng.uniform(0.2, 1.0)) * 2.5 * t * t / 6.0
    # keep the observation within a few prior sds so the posterior sits on the grid
    mu = other_s + v * t + float(rng.normal(0.0, sigma))
    v_obs = (mu - other_s + float(rng.uniform(-3.0, 3.0)) * sigma) / t
    return BeliefPoint(t=t, mu=mu, sigma=sigma), v_obs, other_s


def verify_posterior(instances: int = 100, seed: int = 0, tol: float = POSTERIOR_TOL) -> SuiteReport:
    rng = np.random.default_rng(seed)
    d_mu = d_sd = 0.0
    failures = 0
    for _ in range(instances):
        prior, v_obs, other_s = random_posterior_case(rng)
        post = update_point(prior, v_obs, other_s)
        g_mu, g_sd = grid_posterior(prior, v_obs, other_s)
        e_mu, e_sd = abs(post.mu - g_mu), abs(post.sigma - g_sd)
        d_mu, d_sd = max(d_mu, e_mu), max(d_sd, e_sd)
        if e_mu > tol or e_sd > tol:
            failures += 1
    return SuiteReport(
        name="posterior",
        passed=failures == 0,
        checks=instances,
        failures=failures,
        stats={"max_abs_dmu_m": d_mu, "max_abs_dsigma_m": d_sd},
        threshold=f"{tol} m",
    )


# --------------------------------------------------------------------------
# risk


def monte_carlo_probability(track, own_s, own_side, point: BeliefPoint, samples: int, rng):
    other = rng.normal(point.mu, point.sigma, samples)
    hits = track.overlap(own_side, own_s, other_side(own_side), other)
    return float(np.count_nonzero(hits)) / samples


def random_risk_case(track, rng: np.random.Generator):
    side = SIDES[int(rng.integers(2))]
    if isinstance(track, TrackGeometry):
        own_s = float(rng.uniform(track.approach_empty_until - 2.0, track.end - 5.0))
    else:
        own_s = float(rng.uniform(10.0, track.end - 10.0))
    sigma = float(rng.uniform(0.1, 6.0))
    mu = own_s + float(rng.uniform(-8.0, 8.0))
    return own_s, side, BeliefPoint(t=float(rng.uniform(0.25, 4.0)), mu=mu, sigma=sigma)


def verify_risk(
    instances: int = 50, samples: int = MC_SAMPLES, seed: int = 0, track=None,
    n_sigma: float = MC_SIGMAS,
) -> SuiteReport:
    track = track or TrackGeometry()
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_diff = 0.0
    failures = 0
    for _ in range(instances):
        own_s, side, point = random_risk_case(track, rng)
        p = point_collision_probability(own_s, side, point, track, EXACT)
        mc = monte_carlo_probability(track, own_s, side, point, samples, rng)
        sd = np.sqrt(max(p * (1.0 - p), 0.0) / samples)
        diff = abs(p - mc)
        worst_diff = max(worst_diff, diff)
        # a zero-variance binomial only passes on exact agreement
        ratio = diff / sd if sd > 0 else (0.0 if diff == 0 else np.inf)
        worst = max(worst, ratio)
        if ratio > n_sigma:
            failures += 1
    return SuiteReport(
        name="risk",
        passed=failures == 0,
        checks=instances,
        failures=failures,
        stats={"max_abs_diff": worst_diff, "max_binomial_sigmas": worst},
        threshold=f"{n_sigma} binomial sd of {samples} samples",
    )


SUITES = {
    "bounds": verify_bounds,
    "posterior": verify_posterior,
    "risk": verify_risk,
}
