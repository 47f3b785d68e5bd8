import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ceisim.track import (
    LEFT,
    RIGHT,
    SIDES,
    StraightTrack,
    TrackGeometry,
    rectangles_overlap,
)
from ceisim.verify import swept_bounds

T = TrackGeometry()
L = T.vehicle_length
sides = st.sampled_from(SIDES)
arc = st.floats(0.0, 100.0)


def test_defaults():
    assert (T.l_a, T.l_b, T.vehicle_length, T.vehicle_width) == (25.0, 50.0, 4.5, 1.8)
    assert T.end == 100.0


@pytest.mark.parametrize("kw", [dict(l_a=0), dict(l_b=-1), dict(vehicle_length=0), dict(vehicle_width=0)])
def test_invalid_geometry(kw):
    with pytest.raises(ValueError):
        TrackGeometry(**kw)


def test_start_points_are_l_a_apart():
    a, b = T.arc_to_pose(LEFT, 0.0), T.arc_to_pose(RIGHT, 0.0)
    assert math.hypot(a.x - b.x, a.y - b.y) == pytest.approx(25.0, abs=1e-12)


def test_merge_point_coincides():
    a, b = T.arc_to_pose(LEFT, 50.0), T.arc_to_pose(RIGHT, 50.0)
    assert (a.x, a.y) == pytest.approx((b.x, b.y), abs=1e-12)
    assert a.heading == pytest.approx(b.heading)
    exit_heading = T.arc_to_pose(LEFT, 75.0).heading
    assert a.heading == pytest.approx(exit_heading)


def test_exit_leg_is_shared():
    assert T.arc_to_pose(LEFT, 75.0) == pytest.approx(T.arc_to_pose(RIGHT, 75.0))


def test_leg_lengths():
    start = T.arc_to_pose(LEFT, 0.0)
    merge = T.arc_to_pose(LEFT, 50.0)
    assert math.hypot(merge.x - start.x, merge.y - start.y) == pytest.approx(50.0)


def test_heading_changes_instantly_at_merge():
    before = T.arc_to_pose(LEFT, 50.0 - 1e-9).heading
    after = T.arc_to_pose(LEFT, 50.0).heading
    assert abs(before - after) > 0.2


@pytest.mark.parametrize("s", [-0.1, 100.1])
def test_arc_domain(s):
    with pytest.raises(ValueError):
        T.arc_to_pose(LEFT, s)
    with pytest.raises(ValueError):
        T.collision_bounds(s, LEFT)


def test_unknown_side():
    with pytest.raises(ValueError):
        T.arc_to_pose("middle", 1.0)


@pytest.mark.parametrize("side", SIDES)
def test_bounds_empty_at_start(side):
    assert T.collision_bounds(0.0, side).empty
    assert T.collision_bounds_linearized(0.0, side).empty


@pytest.mark.parametrize("side", SIDES)
def test_bounds_on_exit_leg(side):
    b = T.collision_bounds(75.0, side)
    assert (b.lower, b.upper) == pytest.approx((70.5, 79.5), abs=1e-9)
    lin = T.collision_bounds_linearized(75.0, side)
    assert (lin.lower, lin.upper) == pytest.approx((70.5, 79.5), abs=1e-12)


@pytest.mark.parametrize("side", SIDES)
def test_bounds_at_merge_match_sweep_oracle(side):
    b = T.collision_bounds(50.0, side)
    lo, up = swept_bounds(T, 50.0, side, step=0.01)
    # the sweep reports the first/last hit on a 1 cm grid
    assert 0.0 <= lo - b.lower <= 0.01 + 1e-9
    assert 0.0 <= b.upper - up <= 0.01 + 1e-9


@pytest.mark.parametrize("s", [44.0, 45.0, 47.3, 55.0, 56.0, 60.0])
def test_linearized_near_merge_within_tolerance(s):
    for side in SIDES:
        ref = swept_bounds(T, s, side, step=0.01)
        lin = T.collision_bounds_linearized(s, side)
        if ref is None:
            assert lin.empty
        else:
            assert abs(lin.lower - ref[0]) <= 0.2 and abs(lin.upper - ref[1]) <= 0.2


def test_contact_onset_is_a_jump():
    onset = None
    for s in np.arange(40.0, 50.0, 0.001):
        if not T.collision_bounds(float(s), LEFT).empty:
            onset = float(s)
            break
    assert onset is not None
    assert T.collision_bounds(onset, LEFT).width > 4.0


def test_linearized_continuous_across_merge():
    eps = 1e-6
    for side in SIDES:
        a = T.collision_bounds_linearized(50.0 - eps, side)
        b = T.collision_bounds_linearized(50.0 + eps, side)
        assert abs(a.lower - b.lower) < 1e-3 and abs(a.upper - b.upper) < 1e-3


@given(arc)
def test_bounds_symmetric_between_sides(s):
    a, b = T.collision_bounds(s, LEFT), T.collision_bounds(s, RIGHT)
    assert a.empty == b.empty
    if not a.empty:
        assert (a.lower, a.upper) == pytest.approx((b.lower, b.upper), abs=1e-9)


@given(st.floats(50.0, 100.0))
def test_own_position_inside_bounds_on_exit_leg(s):
    b = T.collision_bounds(s, LEFT)
    assert b.contains(s)


@given(st.floats(T.l_b + L, 100.0), sides)
def test_linearization_exact_past_one_length(s, side):
    lin = T.collision_bounds_linearized(s, side)
    ex = T.collision_bounds(s, side)
    assert (lin.lower, lin.upper) == pytest.approx((ex.lower, ex.upper), abs=1e-9)


def test_width_grows_along_approach():
    widths = []
    for s in np.arange(0.0, 50.0, 0.05):
        b = T.collision_bounds(float(s), LEFT)
        widths.append(0.0 if b.empty else b.width)
    assert np.all(np.diff(widths) >= -1e-9)


@given(arc, sides, st.floats(-8.0, 8.0))
def test_bounds_agree_with_direct_overlap(s, side, offset):
    other = s + offset
    b = T.collision_bounds(s, side)
    inside = (not b.empty) and b.lower + 1e-6 < other < b.upper - 1e-6
    outside = b.empty or other < b.lower - 1e-6 or other > b.upper + 1e-6
    hit = bool(T.overlap(side, s, RIGHT if side == LEFT else LEFT, other))
    if inside:
        assert hit
    if outside:
        assert not hit


@given(arc, sides)
def test_linear_slopes_match_finite_differences(s, side):
    h = 1e-6
    lo, up, dlo, dup = T.linear_bounds(np.array([s - h, s, s + h]), side)
    if np.ptp(dlo) == 0 and np.ptp(dup) == 0:  # same linear piece
        assert (lo[2] - lo[0]) / (2 * h) == pytest.approx(dlo[1], abs=1e-4)
        assert (up[2] - up[0]) / (2 * h) == pytest.approx(dup[1], abs=1e-4)


def test_rectangle_overlap_axis_aligned():
    a = (0.0, 0.0, 0.0)
    assert rectangles_overlap(a, (4.4, 0.0, 0.0), 4.5, 1.8)
    assert not rectangles_overlap(a, (4.6, 0.0, 0.0), 4.5, 1.8)
    assert rectangles_overlap(a, (0.0, 1.7, 0.0), 4.5, 1.8)
    assert not rectangles_overlap(a, (0.0, 1.9, 0.0), 4.5, 1.8)


def test_rectangle_overlap_rotated():
    # a body turned 90 degrees: its half-length now extends along y
    a = (0.0, 0.0, 0.0)
    assert rectangles_overlap(a, (0.0, 3.0, 0.5 * math.pi), 4.5, 1.8)
    assert not rectangles_overlap(a, (0.0, 3.2, 0.5 * math.pi), 4.5, 1.8)


def test_straight_track():
    t = StraightTrack()
    assert t.end == 400.0
    b = t.collision_bounds(100.0, LEFT)
    assert (b.lower, b.upper) == (95.5, 104.5)
    assert t.arc_to_pose(LEFT, 10.0) == t.arc_to_pose(RIGHT, 10.0)
    assert t.merge_point is None
