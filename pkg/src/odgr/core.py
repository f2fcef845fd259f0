"""Domain types shared across the package.

Goals are plain tuples: ``(x, y)`` integer cells for grid worlds and float
points for continuous mazes. Everything here is immutable once built so
recognizers and traces can be handed to worker processes as-is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

Goal = tuple
Point = Union[int, float, Sequence[float]]

CONSECUTIVE = "consecutive"
NON_CONSECUTIVE = "non_consecutive"
TRACE_TYPES = (CONSECUTIVE, NON_CONSECUTIVE)
DEFAULT_OBSERVABILITY = (0.3, 0.5, 0.7, 1.0)


class ODGRError(Exception):
    """Base class for errors raised by this package."""


class CapabilityError(ODGRError):
    """An algorithm or operation cannot run on the requested environment."""

    def __init__(self, message: str, *, recognizer: str | None = None, env_name: str | None = None):
        super().__init__(message)
        self.recognizer = recognizer
        self.env_name = env_name


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Discrete:
    """Integers ``0 .. n-1``."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("discrete space needs at least one element")

    @property
    def ndim(self) -> int:
        return 1

    def contains(self, point) -> bool:
        arr = np.asarray(point)
        if arr.size != 1:
            raise ValueError(f"expected a scalar, got shape {arr.shape}")
        value = arr.reshape(()).item()
        if isinstance(value, float) and not value.is_integer():
            return False
        return 0 <= value < self.n


@dataclass(frozen=True)
class MultiDiscrete:
    """Integer tuples with per-dimension cardinalities."""

    sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("every dimension needs at least one element")

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    def contains(self, point) -> bool:
        arr = np.asarray(point).ravel()
        if arr.size != len(self.sizes):
            raise ValueError(f"expected {len(self.sizes)} dimensions, got {arr.size}")
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            return False
        return bool(np.all(arr >= 0) and np.all(arr < np.asarray(self.sizes)))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``low <= x <= high``."""

    low: tuple
    high: tuple

    def __post_init__(self):
        low = tuple(float(v) for v in np.ravel(self.low))
        high = tuple(float(v) for v in np.ravel(self.high))
        if len(low) != len(high):
            raise ValueError("low and high must have the same length")
        if any(lo >= hi for lo, hi in zip(low, high)):
            raise ValueError("box bounds need low < high in every dimension")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def ndim(self) -> int:
        return len(self.low)

    def contains(self, point) -> bool:
        arr = np.asarray(point, dtype=float).ravel()
        if arr.size != len(self.low):
            raise ValueError(f"expected {len(self.low)} dimensions, got {arr.size}")
        return bool(np.all(arr >= self.low) and np.all(arr <= self.high))

    def clip(self, point) -> np.ndarray:
        return np.clip(np.asarray(point, dtype=float), self.low, self.high)


Space = Union[Discrete, MultiDiscrete, Box]


def contains(space: Space, point) -> bool:
    """Membership test; raises ``ValueError`` on a dimensionality mismatch."""
    return space.contains(point)


def is_continuous(space: Space) -> bool:
    return isinstance(space, Box)


@dataclass(frozen=True)
class DomainTheory:
    state_space: Space
    action_space: Space

    @property
    def discrete(self) -> bool:
        return not (is_continuous(self.state_space) or is_continuous(self.action_space))


def as_goal(value) -> Goal:
    """Normalise a goal to a hashable tuple (ints stay ints, floats stay floats)."""
    if isinstance(value, str):
        parts = value.replace("x", ",").strip("()[] ").split(",")
        value = [float(p) if "." in p else int(p) for p in parts if p.strip()]
    items = []
    for v in np.ravel(np.asarray(value, dtype=object)):
        if isinstance(v, (bool, np.bool_)):
            raise TypeError("goal coordinates must be numbers")
        if isinstance(v, (int, np.integer)):
            items.append(int(v))
        else:
            items.append(float(v))
    return tuple(items)


def format_goal(goal: Goal) -> str:
    """Compact filesystem-friendly label, e.g. ``11x1`` or ``7.5x7.5``."""
    return "x".join(f"{v:g}" if isinstance(v, float) else str(v) for v in goal)


# ---------------------------------------------------------------------------
# observations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservationStep:
    state: tuple
    action: Any

    def __post_init__(self):
        object.__setattr__(self, "state", _as_tuple(self.state))
        action = self.action
        if isinstance(action, (np.ndarray, list, tuple)):
            action = _as_tuple(action)
            if len(action) == 1 and isinstance(action[0], int):
                action = action[0]
        elif isinstance(action, np.integer):
            action = int(action)
        elif isinstance(action, np.floating):
            action = float(action)
        object.__setattr__(self, "action", action)


def _as_tuple(values) -> tuple:
    out = []
    for v in np.ravel(np.asarray(values, dtype=object)):
        if isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_)):
            out.append(int(v))
        else:
            out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class ObservationSequence:
    """An ordered, possibly degraded, view of one actor trajectory."""

    steps: tuple
    source_indices: tuple = None
    is_consecutive: bool = True
    observability: float = 1.0

    def __post_init__(self):
        steps = tuple(s if isinstance(s, ObservationStep) else ObservationStep(*s) for s in self.steps)
        if not steps:
            raise ValueError("an observation sequence needs at least one step")
        idx = self.source_indices
        idx = tuple(range(len(steps))) if idx is None else tuple(int(i) for i in idx)
        if len(idx) != len(steps):
            raise ValueError("source_indices must align with steps")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("source_indices must be strictly increasing")
        if self.is_consecutive and idx != tuple(range(len(steps))):
            raise ValueError("a consecutive sequence must cover indices 0..len-1")
        if not 0.0 < self.observability <= 1.0:
            raise ValueError("observability must lie in (0, 1]")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "source_indices", idx)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @property
    def states(self) -> np.ndarray:
        return np.array([s.state for s in self.steps], dtype=float)

    @property
    def actions(self) -> list:
        return [s.action for s in self.steps]

    @classmethod
    def from_arrays(cls, states, actions, **kwargs) -> "ObservationSequence":
        return cls(tuple(ObservationStep(s, a) for s, a in zip(states, actions)), **kwargs)


# ---------------------------------------------------------------------------
# problems and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GRInstance:
    goal_set: tuple
    observation: ObservationSequence
    true_goal: Goal
    trace_type: str = CONSECUTIVE
    trace_index: int = 0
    require_multiple: bool = False

    def __post_init__(self):
        goals = tuple(as_goal(g) for g in self.goal_set)
        true_goal = as_goal(self.true_goal)
        if true_goal not in goals:
            raise ValueError(f"true goal {true_goal} is not in the goal set")
        if self.require_multiple and len(set(goals)) < 2:
            raise ValueError("benchmark instances need at least two distinct goals")
        object.__setattr__(self, "goal_set", goals)
        object.__setattr__(self, "true_goal", true_goal)

    @property
    def observability(self) -> float:
        return self.observation.observability


@dataclass(frozen=True)
class ODGRProblemSpec:
    domain_name: str
    env_name: str
    base_goals: tuple
    dynamic_goals: tuple
    train_configs: tuple
    task_id: str = "L1"
    observability_levels: tuple = DEFAULT_OBSERVABILITY
    trace_types: tuple = TRACE_TYPES
    noise_profile: tuple | None = None
    base_train_config: tuple | None = None
    base_region: tuple | None = None

    def __post_init__(self):
        dyn = tuple(as_goal(g) for g in self.dynamic_goals)
        if not 3 <= len(dyn) <= 9:
            raise ValueError(f"an ODGR problem needs 3 to 9 dynamic goals, got {len(dyn)}")
        levels = tuple(float(v) for v in self.observability_levels)
        if any(not 0.0 < v <= 1.0 for v in levels):
            raise ValueError("observability levels must lie in (0, 1]")
        bad = set(self.trace_types) - set(TRACE_TYPES)
        if bad:
            raise ValueError(f"unknown trace types {sorted(bad)}")
        configs = tuple((str(a), int(t)) for a, t in self.train_configs)
        if len(configs) == 1 and len(dyn) > 1:
            configs = configs * len(dyn)
        if len(configs) != len(dyn):
            raise ValueError("train_configs must have one entry per dynamic goal")
        object.__setattr__(self, "dynamic_goals", dyn)
        object.__setattr__(self, "base_goals", tuple(as_goal(g) for g in self.base_goals))
        object.__setattr__(self, "train_configs", configs)
        object.__setattr__(self, "observability_levels", levels)
        object.__setattr__(self, "trace_types", tuple(self.trace_types))
        if self.noise_profile is not None:
            object.__setattr__(self, "noise_profile", tuple(float(v) for v in self.noise_profile))
        if self.base_train_config is not None:
            algo, steps = self.base_train_config
            object.__setattr__(self, "base_train_config", (str(algo), int(steps)))
        if self.base_region is not None:
            low, high = self.base_region
            object.__setattr__(self, "base_region", Box(tuple(low), tuple(high)))


@dataclass(frozen=True)
class RecognitionResult:
    predicted_goal: Goal
    scores: Mapping
    goal_order: tuple
    rank_of_true: int | None = None
    inference_seconds: float = 0.0

    @property
    def correct(self) -> bool | None:
        if self.rank_of_true is None:
            return None
        return self.rank_of_true == 1


def _ordered(scores: Mapping, order: Iterable | None) -> list:
    if order is None:
        return list(scores)
    order = list(order)
    missing = [g for g in scores if g not in order]
    return [g for g in order if g in scores] + missing


def argmax_with_tiebreak(scores: Mapping, order: Iterable | None = None) -> Goal:
    """Goal with the largest score; ties go to the goal listed first in ``order``.

    Without an explicit order the mapping's insertion order is used. NaN scores
    never win.
    """
    if not scores:
        raise ValueError("cannot take the argmax of an empty score mapping")
    best, best_score = None, -math.inf
    for g in _ordered(scores, order):
        s = float(scores[g])
        if best is None or s > best_score:
            best, best_score = g, (s if not math.isnan(s) else -math.inf)
    return best


def rank_of(scores: Mapping, true_goal: Goal, order: Iterable | None = None) -> int:
    """1-based rank of ``true_goal`` under the same tie-break as the argmax."""
    if true_goal not in scores:
        raise KeyError(f"true goal {true_goal} has no score")
    ordered = _ordered(scores, order)
    target = float(scores[true_goal])
    rank = 1
    for g in ordered:
        if g == true_goal:
            break
        if float(scores[g]) >= target:
            rank += 1
    rank += sum(1 for g in ordered[ordered.index(true_goal) + 1:] if float(scores[g]) > target)
    return rank


@dataclass
class Timer:
    """Context manager measuring wall-clock seconds."""

    seconds: float = field(default=0.0)

    def __enter__(self):
        import time

        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        import time

        self.seconds = time.perf_counter() - self._start
        return False
