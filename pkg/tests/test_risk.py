import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from ceisim.belief import Belief, BeliefPoint
from ceisim.dynamics import DynamicsParams, VehicleState
from ceisim.planner import Plan
from ceisim.risk import (
    CONTINUE,
    EXACT,
    LINEARIZED,
    REPLAN_LOWER,
    REPLAN_UPPER,
    RiskParams,
    evaluate,
    interval_probability,
    plan_positions_at,
    point_collision_probability,
    trigger,
)
from ceisim.track import LEFT, RIGHT, StraightTrack, TrackGeometry
from ceisim.verify import monte_carlo_probability

T = TrackGeometry()
DYN = DynamicsParams()


def test_constraint_is_mid_threshold():
    assert RiskParams(0.2, 0.5).constraint == pytest.approx(0.35)


@pytest.mark.parametrize("kw", [dict(rho_l=0.5, rho_u=0.4), dict(rho_l=-0.1), dict(tau=0.0)])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        RiskParams(**kw)


def test_empty_bounds_give_zero():
    assert point_collision_probability(0.0, LEFT, BeliefPoint(1.0, 0.0, 5.0), T) == 0.0


def test_three_sigma_mass():
    assert interval_probability(-3.0, 3.0, 0.0, 1.0) == pytest.approx(0.9973, abs=1e-4)


def test_one_sigma_half_interval():
    assert interval_probability(2.0, 2.5, 2.0, 0.5) == pytest.approx(norm.cdf(1) - 0.5, abs=1e-12)
    assert interval_probability(0.0, 1.0, 0.0, 1.0) == pytest.approx(0.3413, abs=1e-4)


def test_straight_track_probability_by_hand():
    t = StraightTrack()
    p = point_collision_probability(100.0, LEFT, BeliefPoint(1.0, 104.5, 2.0), t)
    assert p == pytest.approx(norm.cdf(0.0) - norm.cdf(-9.0 / 2.0))


@given(st.floats(-10, 10), st.floats(0.1, 5), st.floats(0, 5), st.floats(0, 5))
def test_probability_monotone_in_width(mu, sigma, w1, extra):
    a = interval_probability(-w1, w1, mu, sigma)
    b = interval_probability(-w1 - extra, w1 + extra, mu, sigma)
    assert b >= a - 1e-15


@pytest.mark.parametrize(
    "risk, elapsed, expected",
    [(0.6, 0.0, REPLAN_UPPER), (0.1, 3.0, REPLAN_LOWER), (0.3, 5.0, CONTINUE),
     (0.5, 5.0, CONTINUE), (0.2, 5.0, CONTINUE), (0.1, 2.0, CONTINUE)],
)
def test_trigger(risk, elapsed, expected):
    assert trigger(risk, elapsed, RiskParams(0.2, 0.5, 2.0)) == expected


@given(st.floats(0, 1), st.floats(0, 2.0))
def test_no_lower_trigger_before_saturation(risk, elapsed):
    assert trigger(risk, elapsed, RiskParams(0.2, 0.5, 2.0)) != REPLAN_LOWER


def _plan(v0, s0=0.0, n=80):
    return Plan.from_inputs(VehicleState(s0, v0), np.full(n, 0.1 + 0.0005 * v0 * v0), DYN)


def test_positions_align_every_fifth_sample():
    plan = _plan(10.0)
    leads = 0.25 * np.arange(1, 17)
    pos = plan_positions_at(plan.s, DYN.dt, leads)
    assert np.array_equal(pos, plan.s[4::5])


def test_positions_interpolate_between_samples():
    s = np.arange(1.0, 81.0)
    assert plan_positions_at(s, 0.05, np.array([0.075]))[0] == pytest.approx(1.5)


def test_plan_must_cover_belief():
    with pytest.raises(ValueError):
        plan_positions_at(np.arange(10.0), 0.05, np.array([4.0]))


def test_far_apart_no_risk():
    plan = _plan(1.0)
    belief = Belief.initial(0.0, 0.0, 1.0)
    ev = evaluate(plan, belief, T, LEFT, 0.0)
    assert ev.max_risk == 0.0


def test_coincident_on_exit_leg_is_certain():
    plan = _plan(0.0, s0=70.0)
    belief = Belief(0.25 * np.arange(1, 17), np.full(16, 70.0), np.full(16, 1e-6))
    ev = evaluate(plan, belief, T, LEFT, 0.0)
    assert ev.max_risk == pytest.approx(1.0)


@given(st.permutations(range(16)))
def test_max_risk_invariant_to_point_order(perm):
    plan = _plan(10.0, s0=5.0)
    belief = Belief.initial(0.0, 6.0, 9.0)
    ev = evaluate(plan, belief, T, LEFT, 0.0)
    own = plan.s[4::5]
    p = [point_collision_probability(own[i], LEFT, BeliefPoint(0.25 * (i + 1), belief.mu[i], belief.sigma[i]), T)
         for i in perm]
    assert max(p) == pytest.approx(ev.max_risk, abs=1e-12)


@given(st.floats(0, 15), st.floats(0, 40), st.floats(0, 15), st.sampled_from([EXACT, LINEARIZED]))
def test_risk_is_probability(v0, s_other, v_other, mode):
    plan = _plan(v0)
    belief = Belief.initial(0.0, s_other, v_other)
    ev = evaluate(plan, belief, T, RIGHT, 0.0, mode)
    assert 0.0 <= ev.max_risk <= 1.0
    assert np.all((ev.per_point >= 0) & (ev.per_point <= 1))
    assert ev.max_risk == ev.per_point.max()


def test_unknown_mode():
    with pytest.raises(ValueError):
        point_collision_probability(50.0, LEFT, BeliefPoint(1.0, 50.0, 1.0), T, "fuzzy")


@pytest.mark.parametrize("own_s, mu, sigma", [(50.0, 51.0, 2.0), (46.0, 47.0, 1.5), (60.0, 55.0, 3.0)])
def test_matches_monte_carlo(own_s, mu, sigma):
    rng = np.random.default_rng(7)
    n = 200_000
    point = BeliefPoint(1.0, mu, sigma)
    p = point_collision_probability(own_s, LEFT, point, T)
    mc = monte_carlo_probability(T, own_s, LEFT, point, n, rng)
    assert abs(p - mc) <= 3 * np.sqrt(p * (1 - p) / n)
