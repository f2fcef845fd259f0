"""Policy rollouts: greedy and amplified-Boltzmann action selection."""

from __future__ import annotations

import numpy as np

from ..envs import make_env
from .policy import DEFAULT_TEMPERATURE, softmax
from .tiles import action_bins

GREEDY = "greedy"
STOCHASTIC_AMPLIFIED = "stochastic_amplified"
SELECTIONS = (GREEDY, STOCHASTIC_AMPLIFIED)

AMPLIFICATION = 5.0
RANDOM_ACTION_PROB = 0.1


def env_for(artifact, goal=None):
    """Fresh environment matching an artifact, pinned to its (or the given) goal."""
    if goal is None:
        if artifact.goal_conditioned:
            raise ValueError("a goal-conditioned artifact needs an explicit goal")
        goal = artifact.goal
    return make_env(artifact.env_name, goal=goal, **dict(artifact.env_kwargs))


def select_action(artifact, state, goal, selection: str, rng: np.random.Generator,
                  beta: float = AMPLIFICATION, temperature: float = DEFAULT_TEMPERATURE) -> int:
    """Index of the chosen action (a force-bin index for continuous policies)."""
    q = artifact.q_values(state, goal if artifact.goal_conditioned else None)
    n = artifact.n_actions
    if q is None:
        return int(rng.integers(n))
    if selection == GREEDY:
        return int(np.argmax(q))
    if selection == STOCHASTIC_AMPLIFIED:
        p = softmax(q, temperature / beta)
        return int(rng.choice(n, p=p))
    raise ValueError(f"unknown action selection {selection!r}")


def rollout(artifact, env, selection: str = GREEDY, random_optimalism: bool = False,
            rng: np.random.Generator | None = None, beta: float = AMPLIFICATION,
            temperature: float = DEFAULT_TEMPERATURE, max_steps: int | None = None) -> tuple:
    """Run one episode; returns ``(states, actions, reached_goal)``.

    ``states[i]`` is the state in which ``actions[i]`` was taken. The policy
    chooses afresh every ``artifact.decision_interval`` steps and holds its
    choice in between. With ``random_optimalism`` each step's action is
    replaced by a uniform random one with probability ``RANDOM_ACTION_PROB``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    goal = env.goal
    obs = env.reset()
    bins = action_bins(env.max_force) if env.continuous else None
    states, actions = [], []
    limit = max_steps or env.max_steps
    reached = False
    interval = artifact.decision_interval
    chosen = 0
    for t in range(limit):
        state = obs.observation
        if t % interval == 0:
            chosen = select_action(artifact, state, goal, selection, rng, beta, temperature)
        a = chosen
        if random_optimalism and rng.random() < RANDOM_ACTION_PROB:
            a = int(rng.integers(artifact.n_actions))
        action = tuple(float(v) for v in bins[a]) if bins is not None else a
        states.append(state)
        actions.append(action)
        obs, _, terminated, truncated = env.step(action)
        if terminated:
            reached = env.continuous or obs.achieved_goal == tuple(goal)
            break
        if truncated:
            break
    return states, actions, reached


def greedy_success(artifact, goal=None) -> bool:
    """Whether the greedy policy reaches its goal from the start state."""
    if artifact.untrained:
        return False
    env = env_for(artifact, goal)
    return rollout(artifact, env, GREEDY)[2]


def success_rate(artifact, goal=None, n: int = 20, seed: int = 0, selection: str = STOCHASTIC_AMPLIFIED) -> float:
    """Fraction of ``n`` seeded rollouts that reach the goal."""
    env = env_for(artifact, goal)
    wins = 0
    for i in range(n):
        wins += rollout(artifact, env, selection, rng=np.random.default_rng([seed, i]))[2]
    return wins / n
