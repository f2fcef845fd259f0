import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FOUR_ROOMS = "PointMaze-FourRooms"
ROOM_CORNERS = [(8.5, 1.5), (1.5, 8.5), (8.5, 8.5)]
CROSSING = "MiniGrid-SimpleCrossingS13N4"
CROSSING_GOALS = [(11, 1), (11, 11), (1, 11)]


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Policy cache shared by the whole session so each policy trains once."""
    return tmp_path_factory.mktemp("policy-cache")


@pytest.fixture(scope="session")
def room_gc_policy(cache_dir):
    from odgr.agents import obtain_gc_policy
    return obtain_gc_policy(FOUR_ROOMS, ROOM_CORNERS, 100_000, seed=0, cache_root=cache_dir)


@pytest.fixture(scope="session")
def crossing_policies(cache_dir):
    from odgr.agents import QLEARNING, obtain_policy
    return {g: obtain_policy(CROSSING, g, (QLEARNING, 100_000), 0, cache_dir) for g in CROSSING_GOALS}


ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
