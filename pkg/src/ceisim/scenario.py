"""Scenario configurations: built-in presets and INI-style config files.

Config files are sectioned key-value documents read with :mod:`configparser`::

    [scenario]
    schema_version = 1
    preset = A            ; optional base preset, other keys override it
    track = merge         ; merge | straight
    sim_cap = 60

    [track]               ; l_a, l_b, vehicle_length, vehicle_width, length
    [dynamics]            ; alpha, beta, a_max, dt
    [belief]              ; horizon, point_rate, a_c
    [planner]             ; max_iterations, tolerance
    [left]                ; rho_l, rho_u, tau, v_0, v_d, x_0
    [right]

Without a preset, ``v_0`` and ``v_d`` are required for both drivers. Unknown
sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace

from .belief import BeliefParams
from .dynamics import DynamicsParams
from .track import LEFT, RIGHT, SIDES, StraightTrack, TrackGeometry

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending key."""


@dataclass(frozen=True)
class DriverParams:
    v_0: float
    v_d: float
    x_0: float = 0.0
    rho_l: float = 0.2
    rho_u: float = 0.5
    tau: float = 2.0


@dataclass(frozen=True)
class PlannerSettings:
    max_iterations: int = 200
    tolerance: float = 1e-3


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    track: TrackGeometry | StraightTrack
    left: DriverParams
    right: DriverParams
    dynamics: DynamicsParams = DynamicsParams()
    belief: BeliefParams = BeliefParams()
    planner: PlannerSettings = PlannerSettings()
    sim_cap: float = 60.0

    def __post_init__(self):
        validate(self)

    def driver(self, side: str) -> DriverParams:
        return self.left if side == LEFT else self.right


def validate(cfg: ScenarioConfig) -> None:
    for side in SIDES:
        d = cfg.driver(side)
        if not 0.0 <= d.rho_l < d.rho_u <= 1.0:
            raise ConfigError(f"{side}.rho_l/rho_u: thresholds ordered (need 0 <= rho_l < rho_u <= 1)")
        if d.v_0 < 0:
            raise ConfigError(f"{side}.v_0: must be non-negative")
        if d.v_d < 0:
            raise ConfigError(f"{side}.v_d: must be non-negative")
        if not 0.0 <= d.x_0 <= cfg.track.end:
            raise ConfigError(f"{side}.x_0: outside the track [0, {cfg.track.end}]")
        if not d.tau > 0:
            raise ConfigError(f"{side}.tau: must be positive")
    if not cfg.sim_cap > 0:
        raise ConfigError("scenario.sim_cap: must be positive")
    if abs(cfg.belief.a_max - cfg.dynamics.a_max) > 1e-12:
        raise ConfigError("belief.a_max: must equal dynamics.a_max")
    steps = cfg.belief.horizon / cfg.dynamics.dt
    if abs(steps - round(steps)) > 1e-9:
        raise ConfigError("belief.horizon: must be a multiple of dynamics.dt")


# --------------------------------------------------------------------------
# presets

_MERGE = TrackGeometry()


def _merge(name, left, right):
    return ScenarioConfig(name=name, track=_MERGE, left=left, right=right)


PRESETS = {
    "A": lambda: _merge(
        "A", DriverParams(v_0=10.0, v_d=10.0), DriverParams(v_0=9.0, v_d=9.0)
    ),
    "B": lambda: _merge(
        "B", DriverParams(v_0=10.0, v_d=10.0), DriverParams(v_0=9.0, v_d=9.0, x_0=1.2)
    ),
    "C": lambda: _merge(
        "C",
        DriverParams(v_0=10.0, v_d=10.0, rho_l=0.2, rho_u=0.4),
        DriverParams(v_0=10.0, v_d=10.0, rho_l=0.3, rho_u=0.6),
    ),
    "D": lambda: _merge(
        "D",
        DriverParams(v_0=10.0, v_d=10.0, rho_l=0.3, rho_u=0.4),
        DriverParams(v_0=10.0, v_d=10.0, rho_l=0.3, rho_u=0.6),
    ),
}

CAR_FOLLOWING_LENGTH = 400.0


def car_following(follower_v: float, name: str | None = None, time_gap: float = 1.0) -> ScenarioConfig:
    """Straight-road following: leader at 90% of the follower's speed.

    The follower (left) starts at 0; the leader (right) starts one time gap
    ahead, bumper to bumper, at the follower's speed.
    """
    if not follower_v > 0:
        raise ConfigError("velocity must be positive")
    track = StraightTrack(length=CAR_FOLLOWING_LENGTH)
    leader_v = 0.9 * follower_v
    x_lead = follower_v * time_gap + track.vehicle_length
    # room for the slower leader to clear the road, plus settling time
    cap = max(60.0, math.ceil(track.length / leader_v) + 10.0)
    return ScenarioConfig(
        name=name or f"car_following_{follower_v:g}",
        track=track,
        left=DriverParams(v_0=follower_v, v_d=follower_v, x_0=0.0),
        right=DriverParams(v_0=leader_v, v_d=leader_v, x_0=x_lead),
        sim_cap=cap,
    )


PRESETS["car_following"] = lambda: car_following(10.0, name="car_following")

PRESET_DESCRIPTIONS = {
    "A": "merge, no expected collision (right driver slower)",
    "B": "merge, collision course (right driver 1.2 m ahead)",
    "C": "merge, low thresholds left vs high thresholds right",
    "D": "merge, C with a narrower threshold band for the left driver",
    "car_following": "straight 400 m road, leader 9 m/s, follower 10 m/s",
}


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(PRESETS)}") from None


def gap_sweep_protocol(velocities) -> list[ScenarioConfig]:
    """One car-following config per follower velocity (10% slower leader, 1 s gap)."""
    configs = []
    for v in velocities:
        if not v > 0:
            raise ConfigError(f"velocity {v}: must be positive")
        configs.append(car_following(float(v)))
    return configs


# --------------------------------------------------------------------------
# config files

_TRACK_KEYS = {"l_a", "l_b", "vehicle_length", "vehicle_width", "length"}
_SCENARIO_KEYS = {"schema_version", "preset", "track", "sim_cap", "name"}
_DRIVER_KEYS = {f.name for f in fields(DriverParams)}
_SECTION_TYPES = {
    "dynamics": DynamicsParams,
    "belief": BeliefParams,
    "planner": PlannerSettings,
}


def _number(section, key, raw, kind=float):
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: malformed number {raw!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{section}.{key}: must be finite")
    return value


def parse_config(text: str) -> ScenarioConfig:
    """Parse a scenario document; see the module docstring for the schema."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    known = {"scenario", "track", *_SECTION_TYPES, *SIDES}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"{section}: unknown section")

    def keys(section, allowed):
        if not cp.has_section(section):
            return {}
        items = dict(cp.items(section, raw=True))
        for key in items:
            if key not in allowed:
                raise ConfigError(f"{section}.{key}: unknown key")
        return items

    head = keys("scenario", _SCENARIO_KEYS)
    version = _number("scenario", "schema_version", head.get("schema_version", SCHEMA_VERSION), int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"scenario.schema_version: unsupported version {version}")

    base = preset(head["preset"]) if "preset" in head else None

    kind = head.get("track", base.track.kind if base else "merge")
    track_items = keys("track", _TRACK_KEYS)
    if kind == "merge":
        if "length" in track_items:
            raise ConfigError("track.length: only valid for straight tracks")
        start = base.track if base and base.track.kind == "merge" else TrackGeometry()
        allowed = {"l_a", "l_b", "vehicle_length", "vehicle_width"}
    elif kind == "straight":
        for key in ("l_a", "l_b"):
            if key in track_items:
                raise ConfigError(f"track.{key}: only valid for merge tracks")
        start = base.track if base and base.track.kind == "straight" else StraightTrack()
        allowed = {"length", "vehicle_length", "vehicle_width"}
    else:
        raise ConfigError(f"scenario.track: unknown track kind {kind!r}")
    overrides = {k: _number("track", k, v) for k, v in track_items.items() if k in allowed}
    try:
        track = replace(start, **overrides)
    except ValueError as exc:
        raise ConfigError(f"track: {exc}") from None

    parts = {}
    for section, cls in _SECTION_TYPES.items():
        allowed = {f.name for f in fields(cls)}
        if cls is BeliefParams:
            allowed.discard("a_max")  # tied to dynamics.a_max
        items = keys(section, allowed)
        start = getattr(base, section) if base else cls()
        vals = {}
        for k, v in items.items():
            ftype = type(getattr(start, k))
            vals[k] = _number(section, k, v, int if ftype is int else float)
        try:
            parts[section] = replace(start, **vals)
        except ValueError as exc:
            raise ConfigError(f"{section}: {exc}") from None
    parts["belief"] = replace(parts["belief"], a_max=parts["dynamics"].a_max)

    drivers = {}
    for side in SIDES:
        items = keys(side, _DRIVER_KEYS)
        vals = {k: _number(side, k, v) for k, v in items.items()}
        if base is not None:
            drivers[side] = replace(base.driver(side), **vals)
        else:
            for req in ("v_0", "v_d"):
                if req not in vals:
                    raise ConfigError(f"{side}.{req}: missing required field")
            drivers[side] = DriverParams(**vals)

    sim_cap = _number("scenario", "sim_cap", head["sim_cap"]) if "sim_cap" in head else (
        base.sim_cap if base else 60.0
    )
    name = head.get("name", base.name if base else "custom")
    return ScenarioConfig(
        name=name,
        track=track,
        left=drivers[LEFT],
        right=drivers[RIGHT],
        sim_cap=sim_cap,
        **parts,
    )


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def to_ini(cfg: ScenarioConfig) -> str:
    """Serialise a config so that ``parse_config(to_ini(cfg)) == cfg``."""
    lines = [
        "[scenario]",
        f"schema_version = {SCHEMA_VERSION}",
        f"name = {cfg.name}",
        f"track = {cfg.track.kind}",
        f"sim_cap = {cfg.sim_cap!r}",
        "",
        "[track]",
    ]
    track_keys = (
        ("l_a", "l_b", "vehicle_length", "vehicle_width")
        if cfg.track.kind == "merge"
        else ("length", "vehicle_length", "vehicle_width")
    )
    lines += [f"{k} = {getattr(cfg.track, k)!r}" for k in track_keys]
    for section in ("dynamics", "belief", "planner"):
        lines += ["", f"[{section}]"]
        for k, v in asdict(getattr(cfg, section)).items():
            if section == "belief" and k == "a_max":
                continue
            lines.append(f"{k} = {v!r}")
    for side in SIDES:
        lines += ["", f"[{side}]"]
        lines += [f"{k} = {v!r}" for k, v in asdict(cfg.driver(side)).items()]
    return "\n".join(lines) + "\n"
