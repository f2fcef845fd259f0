"""Tabular Q-learning for the discrete grid worlds."""

from __future__ import annotations

import random

import numpy as np

from ..core import CapabilityError, as_goal
from ..envs import make_env


class QTable:
    """Frozen state-key -> action-value table.

    ``keys`` are hashable state keys (``(x, y, direction)`` for grids) and
    ``values`` holds one row of ``n_actions`` values per key.
    """

    def __init__(self, keys, values, n_actions: int, gamma: float, trained_steps: int = 0):
        self.keys = tuple(tuple(k) for k in keys)
        arr = np.array(values, dtype=np.float64).reshape(len(self.keys), n_actions)
        if not np.all(np.isfinite(arr)):
            raise ValueError("Q values must be finite")
        arr.setflags(write=False)
        self.values = arr
        self.n_actions = int(n_actions)
        self.gamma = float(gamma)
        self.trained_steps = int(trained_steps)
        self._index = {k: i for i, k in enumerate(self.keys)}

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key) -> bool:
        return tuple(key) in self._index

    def get(self, key):
        i = self._index.get(tuple(key))
        return None if i is None else self.values[i]

    def as_dict(self) -> dict:
        return {k: self.values[i].copy() for i, k in enumerate(self.keys)}

    def scaled(self, factor: float) -> "QTable":
        return QTable(self.keys, self.values * factor, self.n_actions, self.gamma, self.trained_steps)

    def __eq__(self, other) -> bool:
        return (isinstance(other, QTable) and self.keys == other.keys
                and self.gamma == other.gamma and self.trained_steps == other.trained_steps
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"QTable({len(self.keys)} states, {self.n_actions} actions, steps={self.trained_steps})"


def epsilon_at(t: int, total: int, start: float = 1.0, end: float = 0.05, fraction: float = 0.5) -> float:
    """Linear exploration schedule reaching ``end`` after ``fraction`` of training."""
    horizon = max(1, int(total * fraction))
    if t >= horizon:
        return end
    return start + (end - start) * t / horizon


def q_learning(env, timesteps: int, seed: int = 0, gamma: float = 0.95, alpha: float = 0.1,
               eps_start: float = 1.0, eps_end: float = 0.05, eps_fraction: float = 0.5,
               q_init: float = 0.1, replay_sweeps: int = 2,
               replay_per_step: int = 1) -> QTable:
    """Epsilon-greedy Q-learning on a discrete environment for ``timesteps`` steps.

    The step size for a state-action pair visited ``n`` times is
    ``max(alpha, 1/sqrt(n))``. Episodes that hit ``max_steps`` bootstrap from
    the next state (truncation is not termination).

    Values start at ``q_init``: optimistic enough to drive a systematic sweep,
    but below the discounted goal reward so leftover optimism never outbids a
    found path. Actions never tried are reset to 0 in the returned table.

    Two replay mechanisms speed up propagation without changing the fixed
    point. Every step also backs up ``replay_per_step`` transitions drawn
    uniformly from the memory of distinct ``(state, action)`` pairs seen so
    far; this keeps states off the greedy path converging after exploration
    decays. Each finished episode is replayed backwards ``replay_sweeps``
    times, carrying the goal reward down long corridors.
    """
    rng = random.Random(seed)
    n_actions = env.action_space.n
    actions = range(n_actions)
    Q: dict = {}
    N: dict = {}
    start = (*env.start, env.start_dir)
    state, ep_steps = start, 0
    env.reset(seed=seed)
    horizon = max(1, int(timesteps * eps_fraction))
    episode: list = []
    memory: dict = {}
    memory_keys: list = []

    def backup(s, a, r, nxt, done, lr):
        q = Q[s]
        if done:
            target = r
        else:
            qn = Q.get(nxt)
            target = r + gamma * (max(qn) if qn is not None else 0.0)
        q[a] += lr * (target - q[a])

    for t in range(timesteps):
        eps = eps_start + (eps_end - eps_start) * t / horizon if t < horizon else eps_end
        q = Q.get(state)
        if q is None:
            q = Q[state] = [q_init] * n_actions
            N[state] = [0] * n_actions
        if rng.random() < eps:
            a = rng.randrange(n_actions)
        else:
            m = max(q)
            best = [i for i in actions if q[i] == m]
            a = best[0] if len(best) == 1 else rng.choice(best)
        ep_steps += 1
        nxt, r, done = env.transition(state, a, ep_steps)
        counts = N[state]
        counts[a] += 1
        backup(state, a, r, nxt, done, max(alpha, counts[a] ** -0.5))
        episode.append((state, a, r, nxt, done))
        if (state, a) not in memory:
            memory_keys.append((state, a))
        memory[state, a] = (r, nxt, done)
        for _ in range(replay_per_step):
            ms, ma = memory_keys[rng.randrange(len(memory_keys))]
            backup(ms, ma, *memory[ms, ma], alpha)
        if done or ep_steps >= env.max_steps or t == timesteps - 1:
            for _ in range(replay_sweeps):
                for tr in reversed(episode):
                    backup(*tr, alpha)
            episode.clear()
            state, ep_steps = start, 0
            if not env.fixed_goal:
                env.reset()
        else:
            state = nxt
    keys = sorted(Q)
    rows = [[v if n else 0.0 for v, n in zip(Q[k], N[k])] for k in keys]
    return QTable(keys, rows, n_actions, gamma, timesteps)


def train_q(env_name: str, goal, timesteps: int, seed: int = 0, *, gamma: float = 0.95,
            alpha: float = 0.1, algorithm: str = "QLEARNING", env_kwargs: dict | None = None):
    """Train a goal-directed tabular policy and wrap it as an artifact."""
    from .artifact import TABULAR, PolicyArtifact
    from .rollout import greedy_success

    env = make_env(env_name, goal=as_goal(goal), **(env_kwargs or {}))
    if env.continuous:
        raise CapabilityError(f"tabular Q-learning needs a discrete environment, {env_name} is continuous",
                              env_name=env_name)
    table = q_learning(env, int(timesteps), seed=seed, gamma=gamma, alpha=alpha)
    artifact = PolicyArtifact(TABULAR, env.name, env.goal, algorithm, int(timesteps), table, seed=seed,
                              env_kwargs=tuple(sorted((env_kwargs or {}).items())))
    if timesteps > 0:
        artifact = artifact.with_meta(greedy_success=greedy_success(artifact))
    return artifact
