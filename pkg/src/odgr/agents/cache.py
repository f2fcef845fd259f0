"""On-disk policy cache: ``<root>/agents/<domain>/<env>/<goal|gc>/<algo>_<timesteps>.bin``."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from ..core import format_goal
from ..envs import env_info
from .artifact import GC, PolicyArtifact


class ArtifactNotFound(LookupError):
    """No cached artifact under the requested key."""


def artifact_path(cache_root, env_name: str, goal, algorithm: str, timesteps: int) -> Path:
    info = env_info(env_name)
    label = GC if goal == GC else format_goal(goal)
    return Path(cache_root) / "agents" / info.domain / info.name / label / f"{algorithm}_{int(timesteps)}.bin"


def save_artifact(artifact: PolicyArtifact, cache_root, *, goal=None, algorithm: str | None = None) -> Path:
    """Write atomically (temp file + rename); an existing entry is replaced.

    ``goal`` and ``algorithm`` override the artifact's own key, which lets a
    goal-conditioned policy fine-tuned for one goal sit under that goal.
    """
    path = artifact_path(cache_root, artifact.env_name, artifact.goal if goal is None else goal,
                         algorithm or artifact.algorithm, artifact.timesteps)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".bin")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(artifact.to_bytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_artifact(cache_root, env_name: str, goal, algorithm: str, timesteps: int) -> PolicyArtifact:
    path = artifact_path(cache_root, env_name, goal, algorithm, timesteps)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise ArtifactNotFound(str(path)) from None
    return PolicyArtifact.from_bytes(data)


def load_or_train(cache_root, env_name: str, goal, algorithm: str, timesteps: int, train):
    """Return the cached artifact or call ``train()`` and cache its result.

    With ``cache_root=None`` caching is skipped.
    """
    if cache_root is None:
        return train()
    try:
        return load_artifact(cache_root, env_name, goal, algorithm, timesteps)
    except ArtifactNotFound:
        artifact = train()
        save_artifact(artifact, cache_root)
        return artifact
