"""Policy training and the on-disk policy cache."""

from __future__ import annotations

import hashlib

from ..core import Box, CapabilityError, as_goal
from ..envs import env_info, make_env
from .artifact import (GC, GC_TILE_CODED, KINDS, TABULAR, TILE_CODED, CorruptArtifact,
                       PolicyArtifact)
from .cache import ArtifactNotFound, artifact_path, load_artifact, load_or_train, save_artifact
from .policy import DEFAULT_TEMPERATURE, softmax, softmax_policy
from .rollout import (GREEDY, STOCHASTIC_AMPLIFIED, env_for, greedy_success, rollout,
                      success_rate)
from .tabular import QTable, q_learning, train_q
from .tiles import (TileCodedQ, TileCoder, action_bins, bin_of, cell_centre, cell_key,
                    fine_tune_tile_q, train_gc_tile_q, train_tile_q)

QLEARNING = "QLEARNING"
TILEQ = "TILEQ"
GCQ = "GCQ"

FINE_TUNE_EPISODES = 200


def train_tile(env_name: str, goal, timesteps: int, seed: int = 0, *, algorithm: str = TILEQ,
               env_kwargs: dict | None = None) -> PolicyArtifact:
    """Goal-directed tile-coded policy for a continuous maze."""
    env = make_env(env_name, goal=as_goal(goal), **(env_kwargs or {}))
    q = train_tile_q(env, int(timesteps), seed)
    artifact = PolicyArtifact(TILE_CODED, env.name, env.goal, algorithm, int(timesteps), q, seed=seed,
                              env_kwargs=tuple(sorted((env_kwargs or {}).items())))
    if timesteps > 0:
        artifact = artifact.with_meta(greedy_success=greedy_success(artifact))
    return artifact


def train_goal_policy(env_name: str, goal, timesteps: int, seed: int = 0, algorithm: str | None = None,
                      env_kwargs: dict | None = None) -> PolicyArtifact:
    """Tabular Q-learning on grids, tile-coded Q-learning on mazes."""
    if env_info(env_name).continuous:
        return train_tile(env_name, goal, timesteps, seed, algorithm=algorithm or TILEQ, env_kwargs=env_kwargs)
    return train_q(env_name, goal, timesteps, seed, algorithm=algorithm or QLEARNING, env_kwargs=env_kwargs)


def seeded_tag(algorithm: str, seed: int) -> str:
    """Cache tag carrying the training seed, so runs with different seeds never collide."""
    return f"{algorithm}-s{int(seed)}"


def obtain_policy(env_name: str, goal, train_config, seed: int = 0, cache_root=None) -> PolicyArtifact:
    """Per-goal policy for ``train_config=(algorithm, timesteps)``, cached when ``cache_root`` is set.

    ``QLEARNING`` only runs on discrete environments and ``TILEQ`` only on
    continuous ones.
    """
    algorithm, timesteps = train_config
    info = env_info(env_name)
    if algorithm not in (QLEARNING, TILEQ):
        raise ValueError(f"unknown training algorithm {algorithm!r}")
    if (algorithm == TILEQ) != info.continuous:
        raise CapabilityError(f"{algorithm} cannot train on {info.name}", env_name=info.name)
    goal = as_goal(goal)
    tag = seeded_tag(algorithm, seed)
    return load_or_train(cache_root, info.name, goal, tag, int(timesteps),
                         lambda: train_goal_policy(info.name, goal, int(timesteps), seed, algorithm=tag))


def goal_cells(env, goal_set_or_space) -> list:
    """Training goal cells: the cells of listed goals, or every free cell centred in a region."""
    if isinstance(goal_set_or_space, Box):
        region = goal_set_or_space
        cells = []
        for y in range(env.height):
            for x in range(env.width):
                c = cell_centre((x, y))
                if not env.cell_map[y, x] and region.contains(c):
                    cells.append((x, y))
        if not cells:
            raise ValueError(f"region {region} holds no free cell centre")
        return cells
    return sorted({cell_key(env._check_point(g, "goal")) for g in goal_set_or_space})


def gc_algorithm_tag(cells, seed: int = 0) -> str:
    digest = hashlib.sha1(repr(sorted(cells)).encode()).hexdigest()[:8]
    return f"{GCQ}-{digest}-s{seed}"


def train_gc_q(env_name: str, goal_set_or_space, timesteps: int, seed: int = 0,
               env_kwargs: dict | None = None) -> PolicyArtifact:
    """One goal-conditioned policy over a goal set (list) or region (``Box``).

    Each episode targets a training cell; every transition is also replayed
    for all other training cells. Only goal-conditioned adaptable
    environments qualify.
    """
    info = env_info(env_name)
    if not info.gc_adaptable:
        raise CapabilityError(f"{info.name} is not goal-conditioned adaptable", env_name=info.name)
    probe = make_env(env_name, **(env_kwargs or {}))
    cells = goal_cells(probe, goal_set_or_space)
    env = make_env(env_name, goal_set=[cell_centre(c) for c in cells], seed=seed, **(env_kwargs or {}))
    q = train_gc_tile_q(env, cells, int(timesteps), seed)
    return PolicyArtifact(GC_TILE_CODED, info.name, GC, gc_algorithm_tag(cells, seed), int(timesteps), q,
                          seed=seed, env_kwargs=tuple(sorted((env_kwargs or {}).items())),
                          meta=(("training_cells", tuple(cells)),))


def obtain_gc_policy(env_name: str, goal_set_or_space, timesteps: int, seed: int = 0,
                     cache_root=None) -> PolicyArtifact:
    """Cached :func:`train_gc_q`; the cache tag hashes the training cells and the seed."""
    info = env_info(env_name)
    if not info.gc_adaptable:
        raise CapabilityError(f"{info.name} is not goal-conditioned adaptable", env_name=info.name)
    cells = goal_cells(make_env(info.name), goal_set_or_space)
    return load_or_train(cache_root, info.name, GC, gc_algorithm_tag(cells, seed), int(timesteps),
                         lambda: train_gc_q(info.name, goal_set_or_space, int(timesteps), seed))


def fine_tune(artifact: PolicyArtifact, goal, episodes: int = FINE_TUNE_EPISODES, seed: int = 0) -> PolicyArtifact:
    """Copy of a goal-conditioned artifact further trained on one fixed goal.

    The input artifact is left untouched.
    """
    if not artifact.goal_conditioned:
        raise ValueError("only goal-conditioned artifacts can be fine-tuned")
    goal = as_goal(goal)
    if episodes <= 0:
        return artifact
    env = make_env(artifact.env_name, goal=goal, **dict(artifact.env_kwargs))
    q, steps = fine_tune_tile_q(artifact.payload, env, goal, int(episodes), seed)
    tuned = PolicyArtifact(artifact.kind, artifact.env_name, GC, artifact.algorithm, artifact.timesteps, q,
                           seed=artifact.seed, env_kwargs=artifact.env_kwargs, meta=artifact.meta)
    history = tuple(artifact.info.get("fine_tuned", ())) + ((goal, int(steps)),)
    return tuned.with_meta(fine_tuned=history)


__all__ = [
    "ArtifactNotFound", "CorruptArtifact", "DEFAULT_TEMPERATURE", "FINE_TUNE_EPISODES", "GC", "GCQ",
    "GC_TILE_CODED", "GREEDY", "KINDS", "PolicyArtifact", "QLEARNING", "QTable", "STOCHASTIC_AMPLIFIED",
    "TABULAR", "TILEQ", "TILE_CODED", "TileCodedQ", "TileCoder", "action_bins", "artifact_path",
    "bin_of", "cell_centre", "cell_key", "env_for", "fine_tune", "gc_algorithm_tag", "goal_cells",
    "greedy_success", "load_artifact", "load_or_train", "obtain_gc_policy", "obtain_policy", "q_learning", "rollout", "save_artifact",
    "seeded_tag", "softmax", "softmax_policy", "success_rate", "train_gc_q", "train_goal_policy", "train_q",
    "train_tile",
]
