"""Track geometry, body overlap tests and bounds of collision.

Two layouts share one interface: the symmetric merge track (two straight
approach legs that join at a merge point and continue as one exit leg) and a
single straight road used for car following. Positions along a path are arc
lengths in meters; ``arc_to_pose`` maps them to a planar pose.

Coordinates: ``x`` is lateral, ``y`` points along the exit leg. The merge
point sits at ``(0, h)`` with the two start points at ``(-l_a/2, 0)`` (left)
and ``(l_a/2, 0)`` (right).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

# Finest resolution of the exact bounds (bisection stops below this).
_BISECT_TOL = 1e-7
_SWEEP_STEP = 0.05

# Linear approximation of the bounds: max deviation allowed at refinement
# probes, smallest node spacing, and width of the ramp where contact begins.
LINEAR_TOL = 0.02
MIN_NODE_SPACING = 1.0 / 64
ONSET_RAMP = _BISECT_TOL


def other_side(side: str) -> str:
    if side == LEFT:
        return RIGHT
    if side == RIGHT:
        return LEFT
    raise ValueError(f"unknown side {side!r}")


class Pose2D(NamedTuple):
    x: float
    y: float
    heading: float


@dataclass(frozen=True)
class CollisionBounds:
    """Interval of other-vehicle arc positions that overlap the own body.

    ``lower``/``upper`` are ``None`` when no position of the other vehicle
    can collide.
    """

    lower: float | None = None
    upper: float | None = None

    @property
    def empty(self) -> bool:
        return self.lower is None

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.upper - self.lower

    def contains(self, s: float) -> bool:
        return not self.empty and self.lower <= s <= self.upper


EMPTY = CollisionBounds()


# --------------------------------------------------------------------------
# rectangle overlap (separating axis test)


def _corners(x, y, heading, length, width):
    """Corner coordinates of heading-aligned rectangles, shape (..., 4, 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    heading = np.asarray(heading, dtype=float)
    c, s = np.cos(heading), np.sin(heading)
    hl, hw = 0.5 * length, 0.5 * width
    offsets = ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))
    pts = [
        np.stack([x + a * c - b * s, y + a * s + b * c], axis=-1)
        for a, b in offsets
    ]
    return np.stack(pts, axis=-2)


def rectangles_overlap(pose_a, pose_b, length: float, width: float):
    """Separating axis test for two equally sized heading-aligned rectangles.

    Either pose may hold array fields; the result broadcasts. Touching
    rectangles do not count as overlapping.
    """
    ca = _corners(pose_a[0], pose_a[1], pose_a[2], length, width)
    cb = _corners(pose_b[0], pose_b[1], pose_b[2], length, width)
    ca, cb = np.broadcast_arrays(ca, cb)
    ha = np.asarray(pose_a[2], dtype=float)
    hb = np.asarray(pose_b[2], dtype=float)
    ha, hb = np.broadcast_arrays(ha, hb)
    separated = np.zeros(ha.shape, dtype=bool)
    for ang in (ha, ha + 0.5 * np.pi, hb, hb + 0.5 * np.pi):
        axis = np.stack([np.cos(ang), np.sin(ang)], axis=-1)[..., None, :]
        pa = np.sum(ca * axis, axis=-1)
        pb = np.sum(cb * axis, axis=-1)
        separated |= (pa.max(axis=-1) <= pb.min(axis=-1)) | (
            pb.max(axis=-1) <= pa.min(axis=-1)
        )
    return ~separated


def _overlap_scalar(pa: Pose2D, pb: Pose2D, length: float, width: float) -> bool:
    # Pure-python twin of rectangles_overlap; used inside bisection loops.
    hl, hw = 0.5 * length, 0.5 * width

    def corners(p):
        c, s = math.cos(p[2]), math.sin(p[2])
        return [
            (p[0] + a * c - b * s, p[1] + a * s + b * c)
            for a, b in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))
        ]

    ca, cb = corners(pa), corners(pb)
    for ang in (pa[2], pa[2] + 0.5 * math.pi, pb[2], pb[2] + 0.5 * math.pi):
        ux, uy = math.cos(ang), math.sin(ang)
        qa = [px * ux + py * uy for px, py in ca]
        qb = [px * ux + py * uy for px, py in cb]
        if max(qa) <= min(qb) or max(qb) <= min(qa):
            return False
    return True


# --------------------------------------------------------------------------
# geometries


class _Geometry:
    """Shared machinery; subclasses define ``_pose`` and the exact regions."""

    vehicle_length: float
    vehicle_width: float

    @property
    def end(self) -> float:
        raise NotImplementedError

    @property
    def diagonal(self) -> float:
        return math.hypot(self.vehicle_length, self.vehicle_width)

    def arc_to_pose(self, side: str, s: float) -> Pose2D:
        """Pose of a vehicle centre at arc position ``s`` on ``side``'s path."""
        other_side(side)
        if not 0.0 <= s <= self.end:
            raise ValueError(f"arc position {s} outside [0, {self.end}]")
        return self._pose(side, s)

    def poses(self, side: str, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorised pose lookup; extends the paths linearly past both ends."""
        raise NotImplementedError

    def _pose(self, side: str, s: float) -> Pose2D:
        x, y, h = self.poses(side, np.asarray(float(s)))
        return Pose2D(float(x), float(y), float(h))

    def overlap(self, side_a: str, s_a, side_b: str, s_b):
        """Whether vehicle bodies at the given arc positions overlap."""
        return rectangles_overlap(
            self.poses(side_a, s_a),
            self.poses(side_b, s_b),
            self.vehicle_length,
            self.vehicle_width,
        )

    # -- exact bounds ------------------------------------------------------

    def _closed_form(self, own_s: float) -> CollisionBounds | None:
        """Bounds when they follow from geometry alone, else ``None``."""
        raise NotImplementedError

    def collision_bounds(self, own_s: float, own_side: str) -> CollisionBounds:
        if not 0.0 <= own_s <= self.end:
            raise ValueError(f"arc position {own_s} outside [0, {self.end}]")
        return self._exact_bounds(float(own_s), own_side)

    def _exact_bounds(self, own_s: float, own_side: str) -> CollisionBounds:
        quick = self._closed_form(own_s)
        if quick is not None:
            return quick
        return self._swept_bounds(own_s, own_side)

    def _swept_bounds(self, own_s: float, own_side: str) -> CollisionBounds:
        side_b = other_side(own_side)
        reach = self._sweep_reach
        grid = own_s + np.arange(-reach, reach + 0.5 * _SWEEP_STEP, _SWEEP_STEP)
        hits = np.flatnonzero(self.overlap(own_side, own_s, side_b, grid))
        if hits.size == 0:
            return EMPTY
        own = self._pose(own_side, own_s)
        L, W = self.vehicle_length, self.vehicle_width

        def hit(s):
            return _overlap_scalar(own, self._pose(side_b, s), L, W)

        def refine(inside, outside):
            while abs(outside - inside) > _BISECT_TOL:
                mid = 0.5 * (inside + outside)
                if hit(mid):
                    inside = mid
                else:
                    outside = mid
            return inside

        lo_i, hi_i = hits[0], hits[-1]
        if lo_i == 0 or hi_i == grid.size - 1:
            raise RuntimeError("collision sweep window too narrow")
        lower = refine(grid[lo_i], grid[lo_i - 1])
        upper = refine(grid[hi_i], grid[hi_i + 1])
        return CollisionBounds(float(lower), float(upper))

    @property
    def _sweep_reach(self) -> float:
        return self.diagonal + 1.0

    # -- linearised bounds -------------------------------------------------

    def linear_bounds(self, own_s, own_side: str):
        """Piecewise-linear bounds and their slopes for an array of positions.

        Returns ``(lower, upper, dlower, dupper)``. Where no collision is
        possible the interval degenerates to zero width, which yields zero
        probability without breaking continuity.
        """
        raise NotImplementedError

    def collision_bounds_linearized(
        self, own_s: float, own_side: str
    ) -> CollisionBounds:
        if not 0.0 <= own_s <= self.end:
            raise ValueError(f"arc position {own_s} outside [0, {self.end}]")
        lo, up, _, _ = self.linear_bounds(np.array([float(own_s)]), own_side)
        if up[0] - lo[0] <= 1e-12:
            return EMPTY
        return CollisionBounds(float(lo[0]), float(up[0]))


@dataclass(frozen=True)
class TrackGeometry(_Geometry):
    """Symmetric merge track.

    Each approach leg and the exit leg are ``l_b`` long; the two start
    points are ``l_a`` apart.
    """

    l_a: float = 25.0
    l_b: float = 50.0
    vehicle_length: float = 4.5
    vehicle_width: float = 1.8
    table_step: float = field(default=1.0, repr=False)

    kind = "merge"

    def __post_init__(self):
        for name in ("l_a", "l_b", "vehicle_length", "vehicle_width", "table_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.l_a >= 2 * self.l_b:
            raise ValueError("l_a must be smaller than 2*l_b")

    @property
    def end(self) -> float:
        return 2.0 * self.l_b

    @property
    def merge_point(self) -> float:
        return self.l_b

    @cached_property
    def _sin_leg(self) -> float:
        # angle between an approach leg and the exit direction
        return 0.5 * self.l_a / self.l_b

    @cached_property
    def _cos_leg(self) -> float:
        return math.sqrt(1.0 - self._sin_leg**2)

    @cached_property
    def merge_xy(self) -> tuple[float, float]:
        return 0.0, self.l_b * self._cos_leg

    def poses(self, side, s):
        s = np.asarray(s, dtype=float)
        sign = -1.0 if side == LEFT else 1.0
        if side not in SIDES:
            raise ValueError(f"unknown side {side!r}")
        mx, my = self.merge_xy
        before = s < self.l_b
        d = s - self.l_b
        # approach leg: direction (-sign*sin, cos)
        ax, ay = -sign * self._sin_leg, self._cos_leg
        x = np.where(before, mx + d * ax, mx)
        y = np.where(before, my + d * ay, my + d)
        heading = np.where(before, math.atan2(ay, ax), 0.5 * math.pi)
        return x, y, heading

    @cached_property
    def exit_exact_from(self) -> float:
        """Own position past which bounds are exactly ``own_s -/+ length``.

        Beyond it even the forward-most corner of a vehicle still on its
        approach leg cannot reach the own rear bumper.
        """
        L, W = self.vehicle_length, self.vehicle_width
        reach = 0.5 * L * self._cos_leg + 0.5 * W * self._sin_leg
        return self.l_b + 0.5 * L + reach

    @cached_property
    def approach_empty_until(self) -> float:
        """Own position before which no overlap is geometrically possible."""
        sin2 = min(1.0, 2.0 * self._sin_leg * self._cos_leg)
        return self.l_b - self.diagonal / sin2

    @property
    def _sweep_reach(self) -> float:
        return self.diagonal / self._cos_leg + 1.0

    def _closed_form(self, own_s):
        if own_s < self.approach_empty_until:
            return EMPTY
        if own_s > self.exit_exact_from:
            L = self.vehicle_length
            return CollisionBounds(own_s - L, own_s + L)
        return None

    @cached_property
    def _tables(self) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
        return {side: self._build_table(side) for side in SIDES}

    def _build_table(self, side):
        """Nodes of the linear approximation for one side.

        Starts from a regular grid, inserts a short ramp where contact
        begins (the exact bounds jump there) and bisects any segment whose
        midpoint misses the exact bounds by more than ``LINEAR_TOL``.
        """

        def value(s):
            b = self._exact_bounds(s, side)
            return (s, s) if b.empty else (b.lower, b.upper)

        def is_empty(s):
            return self._exact_bounds(s, side).empty

        nodes = {}
        grid = np.arange(0.0, self.end + 0.5 * self.table_step, self.table_step)
        for s in grid:
            nodes[float(s)] = value(float(s))
        for a, b in zip(grid[:-1], grid[1:]):
            a, b = float(a), float(b)
            if is_empty(a) == is_empty(b):
                continue
            ea = is_empty(a)
            while b - a > _BISECT_TOL:
                m = 0.5 * (a + b)
                if is_empty(m) == ea:
                    a = m
                else:
                    b = m
            if ea:  # contact starts: ramp up from zero width
                nodes[b - ONSET_RAMP] = (b - ONSET_RAMP, b - ONSET_RAMP)
                nodes[b] = value(b)
            else:
                nodes[a] = value(a)
                nodes[a + ONSET_RAMP] = (a + ONSET_RAMP, a + ONSET_RAMP)

        keys = sorted(nodes)
        stack = list(zip(keys[:-1], keys[1:]))
        while stack:
            a, b = stack.pop()
            if b - a <= MIN_NODE_SPACING:
                continue
            va, vb = nodes[a], nodes[b]
            for frac in (0.25, 0.5, 0.75):
                m = a + frac * (b - a)
                if is_empty(m) and (va[1] - va[0]) + (vb[1] - vb[0]) == 0.0:
                    continue
                vm = value(m)
                err = max(
                    abs(va[k] + frac * (vb[k] - va[k]) - vm[k]) for k in (0, 1)
                )
                if err > LINEAR_TOL:
                    mid = 0.5 * (a + b)
                    nodes[mid] = value(mid)
                    stack.extend([(a, mid), (mid, b)])
                    break
        keys = np.array(sorted(nodes))
        lo = np.array([nodes[k][0] for k in keys])
        up = np.array([nodes[k][1] for k in keys])
        return keys, lo, up

    def linear_bounds(self, own_s, own_side):
        own_s = np.asarray(own_s, dtype=float)
        grid, lo_t, up_t = self._tables[own_side]
        L = self.vehicle_length
        idx = np.clip(np.searchsorted(grid, own_s, side="right") - 1, 0, grid.size - 2)
        h = grid[idx + 1] - grid[idx]
        dlo = (lo_t[idx + 1] - lo_t[idx]) / h
        dup = (up_t[idx + 1] - up_t[idx]) / h
        lo = lo_t[idx] + dlo * (own_s - grid[idx])
        up = up_t[idx] + dup * (own_s - grid[idx])
        # outside the table: empty before the start, aligned lane past the end
        before = own_s < grid[0]
        after = own_s > grid[-1]
        lo = np.where(before, own_s, np.where(after, own_s - L, lo))
        up = np.where(before, own_s, np.where(after, own_s + L, up))
        dlo = np.where(before | after, 1.0, dlo)
        dup = np.where(before | after, 1.0, dup)
        return lo, up, dlo, dup


@dataclass(frozen=True)
class StraightTrack(_Geometry):
    """Single straight lane shared by both vehicles (car following)."""

    length: float = 400.0
    vehicle_length: float = 4.5
    vehicle_width: float = 1.8

    kind = "straight"
    merge_point = None

    def __post_init__(self):
        for name in ("length", "vehicle_length", "vehicle_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def end(self) -> float:
        return self.length

    def poses(self, side, s):
        if side not in SIDES:
            raise ValueError(f"unknown side {side!r}")
        s = np.asarray(s, dtype=float)
        zero = np.zeros_like(s)
        return zero, s, zero + 0.5 * math.pi

    def _closed_form(self, own_s):
        L = self.vehicle_length
        return CollisionBounds(own_s - L, own_s + L)

    def linear_bounds(self, own_s, own_side):
        own_s = np.asarray(own_s, dtype=float)
        L = self.vehicle_length
        one = np.ones_like(own_s)
        return own_s - L, own_s + L, one, one
