import functools

import pytest
from hypothesis import HealthCheck, settings

from ceisim.engine import Simulation
from ceisim.scenario import car_following, preset

settings.register_profile(
    "ceisim",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ceisim")


@functools.lru_cache(maxsize=None)
def simulate(name: str):
    """Run a preset once per test session; returns the finished Simulation."""
    sim = Simulation(preset(name))
    sim.run()
    return sim


@functools.lru_cache(maxsize=None)
def simulate_following(velocity: float):
    sim = Simulation(car_following(velocity))
    sim.run()
    return sim


@pytest.fixture(scope="session")
def run_preset():
    return simulate


@pytest.fixture(scope="session")
def run_following():
    return simulate_following


_ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
