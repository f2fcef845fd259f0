"""Tile-coded linear Q-learning for the continuous point mazes.

Position is covered by ``n_tilings`` offset grids of ``tiles x tiles`` tiles;
velocity only enters through its quadrant (4 coarse bins). Actions are a 3x3
grid of force bins over the action box.
"""

from __future__ import annotations

import random

import numpy as np

from ..core import CapabilityError

ACTION_LEVELS = (-1.0, 0.0, 1.0)
ACTION_REPEAT = 10
REPLAY = 32


class TileCoder:
    def __init__(self, low, high, n_tilings: int = 8, tiles: int = 8, velocity_bins: int = 4):
        self.low = np.asarray(low, dtype=float)[:2]
        self.high = np.asarray(high, dtype=float)[:2]
        self.n_tilings = int(n_tilings)
        self.tiles = int(tiles)
        self.velocity_bins = int(velocity_bins)
        if self.velocity_bins not in (1, 4):
            raise ValueError("velocity is folded into 1 or 4 bins")
        self.width = (self.high - self.low) / self.tiles
        # asymmetric (1, 3) displacement keeps tilings from lining up on the diagonal
        k = np.arange(self.n_tilings)[:, None]
        self.offsets = (k * np.array([1.0, 3.0]) / self.n_tilings) % 1.0
        self.per_dim = self.tiles + 1
        self.per_tiling = self.per_dim * self.per_dim * self.velocity_bins
        self.n_features = self.n_tilings * self.per_tiling
        self._base = np.arange(self.n_tilings) * self.per_tiling

    def params(self) -> dict:
        return {"low": self.low.tolist(), "high": self.high.tolist(), "n_tilings": self.n_tilings,
                "tiles": self.tiles, "velocity_bins": self.velocity_bins}

    def active(self, state) -> np.ndarray:
        """Indices of the ``n_tilings`` active tiles for ``(x, y, vx, vy)``."""
        s = np.asarray(state, dtype=float)
        scaled = (np.clip(s[:2], self.low, self.high) - self.low) / self.width
        idx = np.floor(scaled + self.offsets).astype(np.int64)
        np.clip(idx, 0, self.tiles, out=idx)
        vbin = 0
        if self.velocity_bins == 4 and s.size >= 4:
            vbin = (2 if s[2] < 0 else 0) + (1 if s[3] < 0 else 0)
        return self._base + (idx[:, 0] * self.per_dim + idx[:, 1]) * self.velocity_bins + vbin

    def __eq__(self, other) -> bool:
        return isinstance(other, TileCoder) and self.params() == other.params()


def action_bins(max_force: float = 1.0) -> np.ndarray:
    """Centres of the 3x3 force bins, row ``i`` is bin ``i``."""
    return np.array([(ax * max_force, ay * max_force) for ax in ACTION_LEVELS for ay in ACTION_LEVELS])


def bin_of(action, max_force: float = 1.0) -> int:
    """Nearest force bin of a continuous action."""
    a = np.clip(np.rint(np.asarray(action, dtype=float).ravel()[:2] / max_force), -1, 1).astype(int)
    return int((a[0] + 1) * 3 + (a[1] + 1))


def cell_key(point) -> tuple:
    return (int(np.floor(point[0])), int(np.floor(point[1])))


def cell_centre(key) -> tuple:
    return (key[0] + 0.5, key[1] + 0.5)


class TileCodedQ:
    """Linear action values over tile features, one weight block per goal key.

    Actions are committed for ``repeat`` physics steps at a time, both in
    training and in rollouts. A goal-directed policy has a single goal key. A goal-conditioned policy
    holds one block per training goal cell; querying an untrained goal falls
    back to the block of the nearest trained cell.
    """

    def __init__(self, coder: TileCoder, goal_keys, weights, gamma: float, max_force: float = 1.0,
                 trained_steps: int = 0, repeat: int = ACTION_REPEAT):
        self.coder = coder
        self.goal_keys = tuple(tuple(int(v) for v in k) for k in goal_keys)
        w = np.array(weights, dtype=np.float64).reshape(len(self.goal_keys), coder.n_features, 9)
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        self.weights = w
        self.gamma = float(gamma)
        self.max_force = float(max_force)
        self.trained_steps = int(trained_steps)
        self.repeat = int(repeat)
        if self.repeat < 1:
            raise ValueError("repeat must be at least 1")
        self.n_actions = 9
        self._index = {k: i for i, k in enumerate(self.goal_keys)}

    def nearest_key(self, goal) -> tuple:
        key = cell_key(goal)
        if key in self._index:
            return key
        centres = np.array([cell_centre(k) for k in self.goal_keys])
        d = np.hypot(centres[:, 0] - (key[0] + 0.5), centres[:, 1] - (key[1] + 0.5))
        return self.goal_keys[int(np.argmin(d))]

    def block(self, goal=None) -> np.ndarray:
        if goal is None:
            if len(self.goal_keys) != 1:
                raise ValueError("a goal-conditioned Q needs a goal")
            return self.weights[0]
        return self.weights[self._index[self.nearest_key(goal)]]

    def q(self, state, goal=None) -> np.ndarray:
        return self.block(goal)[self.coder.active(state)].sum(axis=0)

    @property
    def actions(self) -> np.ndarray:
        return action_bins(self.max_force)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TileCodedQ) and self.coder == other.coder
                and self.goal_keys == other.goal_keys and self.gamma == other.gamma
                and self.trained_steps == other.trained_steps and self.repeat == other.repeat
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"TileCodedQ({len(self.goal_keys)} goal blocks, steps={self.trained_steps})"


def _linear_q_learning(env, coder: TileCoder, weights: np.ndarray, keys: list, timesteps: int, rng: random.Random,
                       gamma: float, alpha: float, eps: tuple, sample_goal, relabel: bool,
                       max_episodes: int | None = None, repeat: int = ACTION_REPEAT,
                       exploring_starts: float = 1.0, replay: int = REPLAY) -> int:
    """Q-learning on ``weights[len(keys), F, 9]`` in place; returns env steps taken.

    Each decision commits to one force bin for up to ``repeat`` physics steps
    and backs up the discounted return of that stretch (an SMDP update).
    A single step moves the velocity by only ``dt * force``, so per-step action
    gaps are too small to learn reliably with coarse features.

    ``sample_goal`` picks each episode's goal cell key. With ``relabel`` every
    stretch also updates all other goal blocks, treating the cell centre of
    each key as that block's goal.

    With probability ``exploring_starts`` an episode begins at rest at a
    uniformly drawn free point instead of the env's start, so every region of
    the maze gets visited regardless of how far the goal is. After each
    decision, ``replay`` earlier decisions drawn uniformly from memory are
    backed up again, since each weight otherwise sees only a handful of
    updates per hundred thousand steps.
    """
    bins = action_bins(env.max_force)
    n_actions = len(bins)
    lr = alpha / coder.n_tilings
    key_index = {k: i for i, k in enumerate(keys)}
    centres = np.array([cell_centre(k) for k in keys])
    eps_start, eps_end, eps_fraction = eps
    horizon = max(1, int(timesteps * eps_fraction))
    discounts = gamma ** np.arange(repeat + 1)
    start_rng = np.random.default_rng(rng.getrandbits(63))
    rows = np.arange(len(keys))[:, None]
    memory: list = []

    def backup(feats, a, ret, stop, disc, nfeats, g):
        # stop: terminal flag(s); relabelled updates carry one entry per goal block
        if relabel:
            q_next = weights[:, nfeats, :].sum(axis=1).max(axis=1)
            target = ret + np.where(stop, 0.0, disc * q_next)
            delta = target - weights[:, feats, a].sum(axis=1)
            weights[rows, feats[None, :], a] += lr * delta[:, None]
        else:
            target = ret if stop else ret + disc * weights[g][nfeats].sum(axis=0).max()
            weights[g, feats, a] += lr * (target - weights[g, feats, a].sum())
    t = episode = 0
    while t < timesteps and (max_episodes is None or episode < max_episodes):
        episode += 1
        g = key_index[sample_goal()]
        env.set_goal(cell_centre(keys[g]))
        start = env.sample_goal(start_rng) if rng.random() < exploring_starts else None
        env.reset(start=start)
        feats = coder.active(env.state)
        steps_left = env.max_steps
        done = False
        while not done and steps_left > 0 and t < timesteps:
            eps_t = eps_start + (eps_end - eps_start) * t / horizon if t < horizon else eps_end
            if rng.random() < eps_t:
                a = rng.randrange(n_actions)
            else:
                q = weights[g][feats].sum(axis=0)
                best = np.flatnonzero(q == q.max())
                a = int(best[0]) if len(best) == 1 else int(best[rng.randrange(len(best))])
            positions = []
            for _ in range(min(repeat, steps_left, timesteps - t)):
                _, r, done, _ = env.step(bins[a])
                t += 1
                steps_left -= 1
                positions.append(env.position.copy())
                if done:
                    break
            n = len(positions)
            nfeats = coder.active(env.state)
            if relabel:
                pos = np.array(positions)
                hit = np.hypot(centres[:, None, 0] - pos[None, :, 0], centres[:, None, 1] - pos[None, :, 1]) < 0.5
                stop = hit.any(axis=1)
                first = np.where(stop, hit.argmax(axis=1), n)
                ret = -np.cumsum(np.concatenate([[0.0], discounts[:n]]))[first]
            else:
                stop = done
                ret = -discounts[:n - 1].sum() if done else -discounts[:n].sum()
            item = (feats, a, ret, stop, discounts[n], nfeats, g)
            backup(*item)
            memory.append(item)
            for _ in range(replay):
                backup(*memory[rng.randrange(len(memory))])
            feats = nfeats
    return t


def train_tile_q(env, timesteps: int, seed: int = 0, *, gamma: float = 0.99, alpha: float = 0.5,
                 eps: tuple = (1.0, 0.05, 0.5), n_tilings: int = 8, tiles: int = 8,
                 repeat: int = ACTION_REPEAT, replay: int = REPLAY) -> TileCodedQ:
    """Goal-directed tile-coded Q for ``env``'s fixed goal."""
    if not env.continuous:
        raise CapabilityError("tile coding is only used for continuous environments", env_name=env.name)
    coder = TileCoder(env.position_space.low, env.position_space.high, n_tilings, tiles)
    key = cell_key(env.goal)
    weights = np.zeros((1, coder.n_features, 9))
    goal = env.goal
    rng = random.Random(seed)
    # the goal stays exact (not snapped) for goal-directed training
    env = _PinnedGoal(env, goal)
    steps = _linear_q_learning(env, coder, weights, [key], int(timesteps), rng, gamma, alpha, eps,
                               lambda: key, relabel=False, repeat=repeat, replay=replay)
    return TileCodedQ(coder, [key], weights, gamma, env.max_force, steps, repeat)


class _PinnedGoal:
    """Environment proxy whose ``set_goal`` is a no-op (keeps an exact goal)."""

    def __init__(self, env, goal):
        self._env = env
        env.set_goal(goal)

    def set_goal(self, goal) -> None:
        pass

    def __getattr__(self, name):
        return getattr(self._env, name)


def train_gc_tile_q(env, goal_keys, timesteps: int, seed: int = 0, *, gamma: float = 0.99,
                    alpha: float = 0.5, eps: tuple = (1.0, 0.05, 0.5), n_tilings: int = 8,
                    tiles: int = 8, repeat: int = ACTION_REPEAT, replay: int = REPLAY) -> TileCodedQ:
    """Goal-conditioned tile-coded Q over the cells in ``goal_keys``."""
    if not env.gc_adaptable:
        raise CapabilityError(f"{env.name} is not goal-conditioned adaptable", env_name=env.name)
    keys = sorted(set(tuple(k) for k in goal_keys))
    if not keys:
        raise ValueError("need at least one training goal")
    coder = TileCoder(env.position_space.low, env.position_space.high, n_tilings, tiles)
    weights = np.zeros((len(keys), coder.n_features, 9))
    rng = random.Random(seed)
    steps = _linear_q_learning(env, coder, weights, keys, int(timesteps), rng, gamma, alpha, eps,
                               lambda: keys[rng.randrange(len(keys))], relabel=True, repeat=repeat,
                               replay=replay)
    return TileCodedQ(coder, keys, weights, gamma, env.max_force, steps, repeat)


def fine_tune_tile_q(q: TileCodedQ, env, goal, episodes: int, seed: int = 0, *, alpha: float = 0.5,
                     eps: tuple = (0.3, 0.05, 0.5)) -> tuple:
    """Copy of ``q`` with the goal's block trained for ``episodes`` more episodes.

    A goal cell without a block starts from the nearest trained block.
    Returns ``(new_q, steps_taken)``.
    """
    key = cell_key(goal)
    keys = list(q.goal_keys)
    weights = np.array(q.weights)
    if key not in keys:
        seed_block = weights[keys.index(q.nearest_key(goal))]
        keys.append(key)
        weights = np.concatenate([weights, seed_block[None]], axis=0)
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    keys = [keys[i] for i in order]
    weights = weights[order]
    if episodes <= 0:
        return TileCodedQ(q.coder, keys, weights, q.gamma, q.max_force, q.trained_steps, q.repeat), 0
    rng = random.Random(seed)
    g = keys.index(key)
    block = weights[g:g + 1].copy()
    pinned = _PinnedGoal(env, goal)
    steps = _linear_q_learning(pinned, q.coder, block, [key], episodes * env.max_steps, rng, q.gamma,
                               alpha, eps, lambda: key, relabel=False, max_episodes=episodes, repeat=q.repeat)
    weights[g] = block[0]
    return TileCodedQ(q.coder, keys, weights, q.gamma, q.max_force, q.trained_steps + steps, q.repeat), steps
