"""Boltzmann policies extracted from action values."""

from __future__ import annotations

import numpy as np

DEFAULT_TEMPERATURE = 0.1


def softmax(q, temperature: float = DEFAULT_TEMPERATURE) -> np.ndarray:
    """``exp(q/T) / sum exp(q/T)`` with max-subtraction."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(q, dtype=float) / temperature
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_policy(artifact, state, goal=None, temperature: float = DEFAULT_TEMPERATURE) -> np.ndarray:
    """Action distribution of ``artifact`` at ``state``.

    States the policy never visited get the uniform distribution. ``goal`` is
    required for goal-conditioned artifacts and ignored otherwise.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if artifact.goal_conditioned and goal is None:
        raise ValueError("a goal-conditioned policy needs a goal")
    q = artifact.q_values(state, goal if artifact.goal_conditioned else None)
    if q is None:
        return np.full(artifact.n_actions, 1.0 / artifact.n_actions)
    return softmax(q, temperature)
