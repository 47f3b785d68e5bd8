"""Simulator of two drivers negotiating a highway merge.

Each driver keeps a deterministic acceleration plan, a Gaussian belief about
where the other vehicle will be, and re-plans only when the perceived
collision risk leaves a band of acceptable values.
"""

from .engine import Simulation, SimOutcome, TraceRecord, run
from .scenario import ScenarioConfig, car_following, load_config, parse_config, preset
from .track import LEFT, RIGHT, StraightTrack, TrackGeometry

__all__ = [
    "LEFT",
    "RIGHT",
    "ScenarioConfig",
    "SimOutcome",
    "Simulation",
    "StraightTrack",
    "TraceRecord",
    "TrackGeometry",
    "car_following",
    "load_config",
    "parse_config",
    "preset",
    "run",
]

__version__ = "0.1.0"
