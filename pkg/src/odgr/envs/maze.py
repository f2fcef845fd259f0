"""Continuous point-mass mazes (double integrator with wall stops)."""

from __future__ import annotations

import numpy as np

from ..core import Box, DomainTheory, as_goal
from .grid import GCObservation

SUCCESS_RADIUS = 0.5


class PointMazeEnv:
    """A force-actuated ball in a walled maze.

    Cell ``(x, y)`` of ``cell_map`` covers ``[x, x+1] x [y, y+1]``. Each step
    applies ``v <- damping * v + dt * clip(a)`` then ``p <- p + dt * v``; a
    move that would enter a wall cell is cancelled along that axis and the
    matching velocity component is zeroed. Reward is -1 per step and 0 on the
    step that brings the ball strictly within ``SUCCESS_RADIUS`` of the goal.
    """

    continuous = True
    gc_adaptable = True

    def __init__(self, name: str, cell_map: np.ndarray, goal=None, goal_set=None,
                 start=(1.5, 1.5), dt: float = 0.1, damping: float = 0.9,
                 max_force: float = 1.0, max_steps: int = 300, seed: int | None = None):
        self.name = name
        self.cell_map = np.asarray(cell_map, dtype=bool)
        self.height, self.width = self.cell_map.shape
        self.dt, self.damping, self.max_force = float(dt), float(damping), float(max_force)
        self.max_steps = int(max_steps)
        self.max_speed = self.max_force * self.dt / (1.0 - self.damping)
        self.position_space = Box((0.0, 0.0), (float(self.width), float(self.height)))
        self.state_space = Box(
            (0.0, 0.0, -self.max_speed, -self.max_speed),
            (float(self.width), float(self.height), self.max_speed, self.max_speed),
        )
        self.action_space = Box((-self.max_force,) * 2, (self.max_force,) * 2)
        self.domain = DomainTheory(self.state_space, self.action_space)
        self.start = self._check_point(start, "start")
        if goal is not None and goal_set is not None:
            raise ValueError("pass either a fixed goal or a goal set, not both")
        if goal is None and goal_set is None:
            raise ValueError("a maze environment needs a goal or a goal set")
        if goal is not None:
            self.goal_set = (self._check_point(goal, "goal"),)
        else:
            self.goal_set = tuple(self._check_point(g, "goal") for g in goal_set)
            if not self.goal_set:
                raise ValueError("goal set is empty")
        self.fixed_goal = len(self.goal_set) == 1
        self.goal = self.goal_set[0]
        self._rng = np.random.default_rng(seed)
        self.position = np.array(self.start, dtype=float)
        self.velocity = np.zeros(2)
        self.step_count = 0

    def is_free(self, point) -> bool:
        x, y = float(point[0]), float(point[1])
        if not (0.0 <= x < self.width and 0.0 <= y < self.height):
            return False
        return not self.cell_map[int(y), int(x)]

    def _check_point(self, point, what: str) -> tuple:
        p = tuple(float(v) for v in as_goal(point))
        if len(p) != 2:
            raise ValueError(f"{what} must be a 2-d point, got {point}")
        if not self.is_free(p):
            raise ValueError(f"{what} {p} lies inside a wall")
        return p

    @property
    def goal_space(self) -> Box:
        return Box((1.0, 1.0), (self.width - 1.0, self.height - 1.0))

    def sample_goal(self, rng: np.random.Generator, region: Box | None = None) -> tuple:
        """Uniform free point inside ``region`` (defaults to the goal space)."""
        region = region or self.goal_space
        for _ in range(10_000):
            p = rng.uniform(region.low, region.high)
            if self.is_free(p):
                return (float(p[0]), float(p[1]))
        raise ValueError(f"region {region} contains no free space")

    @property
    def state(self) -> tuple:
        return (*map(float, self.position), *map(float, self.velocity))

    def _observe(self) -> GCObservation:
        return GCObservation(self.state, tuple(map(float, self.position)), self.goal)

    def reset(self, seed: int | None = None, start=None) -> GCObservation:
        """New episode at rest at ``start`` (default: the env's start point)."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        if not self.fixed_goal:
            self.goal = self.goal_set[int(self._rng.integers(len(self.goal_set)))]
        self.position = np.array(self.start if start is None else self._check_point(start, "start"), dtype=float)
        self.velocity = np.zeros(2)
        self.step_count = 0
        return self._observe()

    def set_goal(self, goal) -> None:
        self.goal = self._check_point(goal, "goal")
        self.goal_set = (self.goal,)
        self.fixed_goal = True

    def dynamics(self, position, velocity, action) -> tuple:
        """One physics step from an explicit state; returns new (position, velocity)."""
        force = np.clip(np.asarray(action, dtype=float), -self.max_force, self.max_force)
        v = self.damping * np.asarray(velocity, dtype=float) + self.dt * force
        p = np.array(position, dtype=float)
        for axis in (0, 1):
            trial = p.copy()
            trial[axis] += self.dt * v[axis]
            if self.is_free(trial):
                p = trial
            else:
                v[axis] = 0.0
        return p, v

    def reached(self, position) -> bool:
        return float(np.hypot(position[0] - self.goal[0], position[1] - self.goal[1])) < SUCCESS_RADIUS

    def step(self, action):
        a = np.asarray(action, dtype=float).ravel()
        if a.size != 2 or not np.all(np.isfinite(a)) or not self.action_space.contains(a):
            raise ValueError(f"action {action!r} is not in {self.action_space}")
        self.step_count += 1
        self.position, self.velocity = self.dynamics(self.position, self.velocity, a)
        terminated = self.reached(self.position)
        reward = 0.0 if terminated else -1.0
        truncated = not terminated and self.step_count >= self.max_steps
        return self._observe(), reward, terminated, truncated

    def __repr__(self) -> str:
        goal = self.goal if self.fixed_goal else list(self.goal_set)
        return f"PointMazeEnv({self.name!r}, goal={goal})"
