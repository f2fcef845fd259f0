"""Discrete crossing grid worlds with explicit goal control."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Discrete, DomainTheory, MultiDiscrete, as_goal
from .layouts import GridLayout

# Headings follow screen coordinates: y grows downwards.
EAST, SOUTH, WEST, NORTH = 0, 1, 2, 3
DIRECTION_VECTORS = ((1, 0), (0, 1), (-1, 0), (0, -1))
DIRECTION_NAMES = "ESWN"

TURN_LEFT, TURN_RIGHT, FORWARD, STAY = 0, 1, 2, 3
ACTION_NAMES = ("turn_left", "turn_right", "forward", "stay")

LAVA_REWARD = -1.0


@dataclass(frozen=True)
class GCObservation:
    observation: tuple
    achieved_goal: tuple
    desired_goal: tuple


class GridCrossingEnv:
    """Minigrid-style navigation: the agent turns, steps forward or waits.

    The state is ``(x, y, direction)``. Reaching the goal pays
    ``1 - 0.9 * step_count / max_steps``; stepping into lava ends the episode
    with ``LAVA_REWARD``. With ``reward_mode="unit"`` success always pays 1,
    which keeps the MDP Markovian for exact planning.
    """

    continuous = False
    gc_adaptable = False

    def __init__(self, name: str, layout: GridLayout, goal=None, goal_set=None,
                 max_steps: int | None = None, start=(1, 1), start_dir: int = EAST,
                 reward_mode: str = "decay", seed: int | None = None):
        if reward_mode not in ("decay", "unit"):
            raise ValueError(f"unknown reward_mode {reward_mode!r}")
        self.name = name
        self.layout = layout
        self.width, self.height = layout.width, layout.height
        self.walls = layout.walls
        self.lava = layout.lava
        self.start = tuple(start)
        self.start_dir = start_dir
        self.max_steps = max_steps if max_steps is not None else 4 * self.width * self.height
        self.reward_mode = reward_mode
        self.domain = DomainTheory(MultiDiscrete((self.width, self.height, 4)), Discrete(4))
        self.action_space = self.domain.action_space
        self.state_space = self.domain.state_space
        self._check_cell(self.start, "start")
        if goal is not None and goal_set is not None:
            raise ValueError("pass either a fixed goal or a goal set, not both")
        if goal is None and goal_set is None:
            raise ValueError("a grid environment needs a goal or a goal set")
        if goal is not None:
            self.goal_set = (self._check_cell(as_goal(goal), "goal"),)
            self.fixed_goal = True
        else:
            cells = tuple(self._check_cell(as_goal(g), "goal") for g in goal_set)
            if not cells:
                raise ValueError("goal set is empty")
            self.goal_set = cells
            self.fixed_goal = len(cells) == 1
        self.goal = self.goal_set[0]
        self._rng = np.random.default_rng(seed)
        self.agent = (*self.start, self.start_dir)
        self.step_count = 0

    def _check_cell(self, cell, what: str) -> tuple:
        if len(cell) != 2 or not all(isinstance(v, int) for v in cell):
            raise ValueError(f"{what} must be an integer (x, y) cell, got {cell}")
        x, y = cell
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"{what} {cell} lies outside the {self.width}x{self.height} grid")
        if cell in self.walls or cell in self.lava:
            raise ValueError(f"{what} {cell} is a wall or lava cell")
        return tuple(cell)

    @property
    def goal_space(self) -> list:
        return self.layout.free_cells()

    def _observe(self) -> GCObservation:
        return GCObservation(self.agent, self.agent[:2], self.goal)

    def reset(self, seed: int | None = None) -> GCObservation:
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        if not self.fixed_goal:
            self.goal = self.goal_set[int(self._rng.integers(len(self.goal_set)))]
        self.agent = (*self.start, self.start_dir)
        self.step_count = 0
        return self._observe()

    def set_goal(self, goal) -> None:
        """Pin the goal for subsequent episodes."""
        self.goal = self._check_cell(as_goal(goal), "goal")
        self.goal_set = (self.goal,)
        self.fixed_goal = True

    def move(self, state: tuple, action: int) -> tuple:
        """Pure transition on ``(x, y, direction)``; ignores goal and lava."""
        x, y, d = state
        if action == TURN_LEFT:
            return (x, y, (d - 1) % 4)
        if action == TURN_RIGHT:
            return (x, y, (d + 1) % 4)
        if action == FORWARD:
            dx, dy = DIRECTION_VECTORS[d]
            if (x + dx, y + dy) in self.walls:
                return state
            return (x + dx, y + dy, d)
        return state

    def success_reward(self, step_count: int) -> float:
        if self.reward_mode == "unit":
            return 1.0
        return 1.0 - 0.9 * (step_count / self.max_steps)

    def transition(self, state: tuple, action: int, step_count: int) -> tuple:
        """``(next_state, reward, terminated)`` for the current goal, no bookkeeping.

        ``step_count`` is the count *after* taking the action.
        """
        nxt = self.move(state, action)
        cell = nxt[:2]
        if action == FORWARD and cell == self.goal and nxt != state:
            return nxt, self.success_reward(step_count), True
        if cell in self.lava:
            return nxt, LAVA_REWARD, True
        return nxt, 0.0, False

    def step(self, action):
        a = np.asarray(action)
        if a.size != 1 or not self.action_space.contains(a):
            raise ValueError(f"action {action!r} is not in {self.action_space}")
        self.step_count += 1
        self.agent, reward, terminated = self.transition(self.agent, int(a.reshape(())), self.step_count)
        truncated = not terminated and self.step_count >= self.max_steps
        return self._observe(), reward, terminated, truncated

    def __repr__(self) -> str:
        goal = self.goal if self.fixed_goal else list(self.goal_set)
        return f"GridCrossingEnv({self.name!r}, goal={goal})"
