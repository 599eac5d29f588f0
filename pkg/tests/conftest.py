"""Shared fixtures: full scenario runs are simulated once per session."""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from gufic.config import load_config, scenario_dir
from gufic.geometry import Pose
from gufic.sim import simulate

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (passed, detail); filled by test_acceptance and reported at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def scenario(name):
    return load_config(scenario_dir() / f"{name}.json")


class TimedRun:
    def __init__(self, cfg):
        t0 = time.perf_counter()
        self.log = simulate(cfg)
        self.seconds = time.perf_counter() - t0
        self.cfg = cfg


@pytest.fixture(scope="session")
def circle_run():
    return TimedRun(scenario("circle"))


@pytest.fixture(scope="session")
def circle_gic_run():
    return TimedRun(scenario("circle").with_controller("gic"))


@pytest.fixture(scope="session")
def sphere_run():
    return TimedRun(scenario("sphere"))


@pytest.fixture(scope="session")
def lowtank_run():
    return TimedRun(scenario("sphere_lowtank"))


@pytest.fixture(scope="session")
def naive_run():
    return TimedRun(load_config(FIXTURES / "naive_sphere.json"))


def random_pose(rng, scale=1.0):
    return Pose(Rotation.random(random_state=rng).as_matrix(), scale * rng.normal(size=3))


finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vec3 = st.lists(finite, min_size=3, max_size=3).map(np.array)
vec6 = st.lists(finite, min_size=6, max_size=6).map(np.array)


@st.composite
def poses(draw, scale=1.0):
    q = np.array(draw(st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4)))
    if np.linalg.norm(q) < 1e-3:
        q = np.array([0.0, 0.0, 0.0, 1.0])
    R = Rotation.from_quat(q / np.linalg.norm(q)).as_matrix()
    p = draw(st.lists(st.floats(-scale, scale), min_size=3, max_size=3))
    return Pose(R, np.array(p))
