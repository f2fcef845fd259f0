"""Recognizers that score observations against learned policies."""

from __future__ import annotations

import numpy as np

from ..agents import (FINE_TUNE_EPISODES, QLEARNING, TILEQ, ArtifactNotFound, fine_tune, load_artifact, obtain_gc_policy, obtain_policy, save_artifact)
from ..agents.tiles import cell_centre
from ..core import Box, ODGRError
from .base import (FINE_TUNED, RECALLED, TRAINED, ZERO_SHOT, GoalLibraryEntry, Recognizer, RecognizerCapability,
                   kl_score, mean_loglik_score, utility_score, zscore_score)

KL = "kl"
UTILITY = "utility"
LOGLIK = "loglik"
ZSCORE = "zscore"

DEFAULT_GOAL_TIMESTEPS = 100_000
DEFAULT_GC_TIMESTEPS = 200_000
COVERAGE_RADIUS = 2.0


def default_config(env) -> tuple:
    return (TILEQ if env.continuous else QLEARNING, DEFAULT_GOAL_TIMESTEPS)


class Graql(Recognizer):
    """One tabular Q-function per goal; KL divergence (default) or utility scoring."""

    name = "Graql"
    capability = RecognizerCapability(True, False, False, False)

    def __init__(self, *args, metric: str = KL, **kwargs):
        super().__init__(*args, **kwargs)
        if metric not in (KL, UTILITY):
            raise ValueError(f"Graql metric must be {KL!r} or {UTILITY!r}")
        self.metric = metric

    def _adapt(self, goal, train_config, example_sequences):
        artifact = obtain_policy(self.env_name, goal, train_config or default_config(self.env), self.seed,
                                 self.cache_root)
        return GoalLibraryEntry(goal, TRAINED, artifact, training_steps=artifact.timesteps)

    def score(self, entry, observation):
        if self.metric == UTILITY:
            return utility_score(entry.artifact, observation)
        return kl_score(entry.artifact, observation, temperature=self.temperature)


class Draco(Recognizer):
    """Per-goal policies scored by observation likelihood."""

    name = "Draco"
    capability = RecognizerCapability(True, True, False, False)

    def __init__(self, *args, metric: str = LOGLIK, **kwargs):
        super().__init__(*args, **kwargs)
        if metric not in (LOGLIK, ZSCORE):
            raise ValueError(f"{self.name} metric must be {LOGLIK!r} or {ZSCORE!r}")
        self.metric = metric

    def _adapt(self, goal, train_config, example_sequences):
        artifact = obtain_policy(self.env_name, goal, train_config or default_config(self.env), self.seed,
                                 self.cache_root)
        return GoalLibraryEntry(goal, TRAINED, artifact, training_steps=artifact.timesteps)

    def _condition(self, entry):
        return entry.goal if entry.artifact.goal_conditioned else None

    def score(self, entry, observation):
        fn = zscore_score if self.metric == ZSCORE else mean_loglik_score
        return fn(entry.artifact, observation, self._condition(entry), self.temperature)


class _GoalConditioned(Draco):
    """Shared domain learning: one goal-conditioned policy over the base goals.

    ``base_goals`` may be a list of goals, a ``Box`` region, or ``None`` for
    the whole goal space.
    """

    capability = RecognizerCapability(True, True, True, True)

    def _learn_domain(self, base_goals, train_config):
        if base_goals is None:
            region = self.env.goal_space
        elif isinstance(base_goals, Box):
            region = base_goals
        else:
            region = [tuple(g) for g in base_goals]
            if not region:
                raise ValueError("base goal list is empty")
        steps = DEFAULT_GC_TIMESTEPS if train_config is None else int(train_config[1])
        self.gc_policy = obtain_gc_policy(self.env_name, region, steps, self.seed, self.cache_root)
        self.training_cells = tuple(tuple(c) for c in self.gc_policy.info["training_cells"])

    def goals_adaptation_phase(self, dynamic_goals, dynamic_train_configs=None, example_sequences=None):
        if not self.domain_learned:
            raise ODGRError(f"{self.name} needs domain learning before goal adaptation")
        super().goals_adaptation_phase(dynamic_goals, dynamic_train_configs, example_sequences)


class GCDraco(_GoalConditioned):
    """Likelihood scoring with one goal-conditioned policy; adaptation is free."""

    name = "GCDraco"

    def _adapt(self, goal, train_config, example_sequences):
        self.env._check_point(goal, "goal")
        return GoalLibraryEntry(goal, ZERO_SHOT, self.gc_policy)


class GCAura(_GoalConditioned):
    """Goal-conditioned likelihood scoring with recall and few-shot fine-tuning.

    Per goal: a goal adapted before is recalled (memory first, then the disk
    cache); a goal within ``coverage_radius`` of a training goal is used
    zero-shot; any other goal gets ``fine_tune_episodes`` of fine-tuning.
    """

    name = "GCAura"

    def __init__(self, *args, coverage_radius: float = COVERAGE_RADIUS,
                 fine_tune_episodes: int = FINE_TUNE_EPISODES, **kwargs):
        super().__init__(*args, **kwargs)
        self.coverage_radius = float(coverage_radius)
        self.fine_tune_episodes = int(fine_tune_episodes)
        self._recall: dict = {}

    def covered(self, goal) -> bool:
        centres = np.array([cell_centre(c) for c in self.training_cells])
        d = np.hypot(centres[:, 0] - goal[0], centres[:, 1] - goal[1])
        return bool(d.min() <= self.coverage_radius)

    def _fine_tune_tag(self) -> str:
        return f"{self.gc_policy.algorithm}-ft{self.fine_tune_episodes}"

    def _adapt(self, goal, train_config, example_sequences):
        self.env._check_point(goal, "goal")
        if goal in self._recall:
            return GoalLibraryEntry(goal, RECALLED, self._recall[goal])
        cached = self._load_fine_tuned(goal)
        if cached is not None:
            self._recall[goal] = cached
            return GoalLibraryEntry(goal, RECALLED, cached)
        if self.covered(goal):
            self._recall[goal] = self.gc_policy
            return GoalLibraryEntry(goal, ZERO_SHOT, self.gc_policy)
        tuned = fine_tune(self.gc_policy, goal, self.fine_tune_episodes, seed=self.seed)
        steps = int(tuned.info["fine_tuned"][-1][1])
        if self.cache_root is not None:
            save_artifact(tuned, self.cache_root, goal=goal, algorithm=self._fine_tune_tag())
        self._recall[goal] = tuned
        return GoalLibraryEntry(goal, FINE_TUNED, tuned, training_steps=steps)

    def _load_fine_tuned(self, goal):
        if self.cache_root is None:
            return None
        try:
            return load_artifact(self.cache_root, self.env_name, goal, self._fine_tune_tag(), self.gc_policy.timesteps)
        except ArtifactNotFound:
            return None


__all__ = ["COVERAGE_RADIUS", "Draco", "GCAura", "GCDraco", "Graql", "KL", "LOGLIK", "UTILITY", "ZSCORE"]
