"""Goal-controllable environments and their registry."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from ..core import as_goal
from .grid import (ACTION_NAMES, EAST, FORWARD, NORTH, SOUTH, STAY, TURN_LEFT,
                   TURN_RIGHT, WEST, GCObservation, GridCrossingEnv)
from .layouts import (FOUR_ROOMS_DOORS, FOUR_ROOMS_MAP, OBSTACLE_MAP, GridLayout,
                      connected_components, empty_grid, lava_crossing, maze_cells,
                      simple_crossing)
from .maze import SUCCESS_RADIUS, PointMazeEnv
from .render import render_ascii, render_image

MINIGRID = "minigrid"
POINT_MAZE = "point_maze"


@dataclass(frozen=True)
class EnvInfo:
    name: str
    domain: str
    continuous: bool
    gc_adaptable: bool
    build_layout: Callable


def _maze_layout(rows) -> Callable:
    def build():
        cells = maze_cells(rows)
        h, w = cells.shape
        walls = frozenset((x, y) for y in range(h) for x in range(w) if cells[y, x])
        return GridLayout(w, h, walls)
    return build


MAZE_MAPS = {"PointMaze-Obstacle": OBSTACLE_MAP, "PointMaze-FourRooms": FOUR_ROOMS_MAP}

REGISTRY = {
    "MiniGrid-SimpleCrossingS13N4": EnvInfo("MiniGrid-SimpleCrossingS13N4", MINIGRID, False, False, simple_crossing),
    "MiniGrid-LavaCrossingS9N2": EnvInfo("MiniGrid-LavaCrossingS9N2", MINIGRID, False, False, lava_crossing),
    "PointMaze-Obstacle": EnvInfo("PointMaze-Obstacle", POINT_MAZE, True, True, _maze_layout(OBSTACLE_MAP)),
    "PointMaze-FourRooms": EnvInfo("PointMaze-FourRooms", POINT_MAZE, True, True, _maze_layout(FOUR_ROOMS_MAP)),
}

ALIASES = {
    "SimpleCrossing13N4": "MiniGrid-SimpleCrossingS13N4",
    "SimpleCrossingS13N4": "MiniGrid-SimpleCrossingS13N4",
    "MiniGrid-SimpleCrossing": "MiniGrid-SimpleCrossingS13N4",
    "LavaCrossing9N2": "MiniGrid-LavaCrossingS9N2",
    "LavaCrossingS9N2": "MiniGrid-LavaCrossingS9N2",
    "MiniGrid-LavaCrossing": "MiniGrid-LavaCrossingS9N2",
    "PointMazeObstacle": "PointMaze-Obstacle",
    "PointMaze-Obstacles": "PointMaze-Obstacle",
    "PointMazeFourRooms": "PointMaze-FourRooms",
}

_EMPTY = re.compile(r"^GridWorld-Empty-(\d+)x(\d+)$")
_DYNAMIC = re.compile(r"^(?P<base>.+)-DynamicGoal-(?P<goal>[-0-9.x]+)-v\d+$")


def _empty_info(name: str) -> EnvInfo:
    m = _EMPTY.match(name)
    w, h = int(m.group(1)), int(m.group(2))
    if w != h or w < 1:
        raise KeyError(f"empty grids must be square, got {name!r}")
    return EnvInfo(name, MINIGRID, False, False, lambda: empty_grid(w))


def resolve(env_name: str) -> tuple:
    """Map a registered name or a dynamic-goal id to ``(EnvInfo, goal)``."""
    goal = None
    m = _DYNAMIC.match(env_name)
    if m:
        env_name, goal = m.group("base"), as_goal(m.group("goal"))
    env_name = ALIASES.get(env_name, env_name)
    if env_name in REGISTRY:
        return REGISTRY[env_name], goal
    if _EMPTY.match(env_name):
        return _empty_info(env_name), goal
    raise KeyError(f"unknown environment {env_name!r}; registered: {sorted(REGISTRY)}")


def env_info(env_name: str) -> EnvInfo:
    return resolve(env_name)[0]


def layout(env_name: str) -> GridLayout:
    """Walls and lava of a registered environment (cell coordinates)."""
    return env_info(env_name).build_layout()


def make_env(env_name: str, goal=None, goal_set=None, **kwargs):
    """Build an environment with a fixed goal or a per-reset goal set.

    A dynamic-goal id such as ``MiniGrid-SimpleCrossingS13N4-DynamicGoal-11x1-v0``
    fixes the goal from its name.
    """
    info, named_goal = resolve(env_name)
    if goal is None and goal_set is None:
        goal = named_goal
    lay = info.build_layout()
    if info.continuous:
        if goal is None and goal_set is None:
            goal = (8.5, 8.5)
        return PointMazeEnv(info.name, maze_cells(MAZE_MAPS[info.name]), goal=goal,
                            goal_set=goal_set, **kwargs)
    if goal is None and goal_set is None:
        goal = (lay.width - 2, lay.height - 2)
    return GridCrossingEnv(info.name, lay, goal=goal, goal_set=goal_set, **kwargs)


__all__ = [
    "ACTION_NAMES", "ALIASES", "EAST", "FORWARD", "FOUR_ROOMS_DOORS", "EnvInfo",
    "GCObservation", "GridCrossingEnv", "GridLayout", "MINIGRID", "NORTH", "POINT_MAZE",
    "PointMazeEnv", "REGISTRY", "SOUTH", "STAY", "SUCCESS_RADIUS", "TURN_LEFT",
    "TURN_RIGHT", "WEST", "connected_components", "env_info", "layout", "make_env",
    "render_ascii", "render_image", "resolve",
]
