"""Metric-learning recognizers: goals are compared in a learned embedding space.

Sequences are embedded by a fixed random Fourier feature map of each
``(state, action)`` step, pooled into a recency-weighted mean concatenated
with the last step's features, then passed through a linear projection fitted
with a contrastive margin loss on pairs of prototype-goal traces. A goal is
represented by the centroid of a few example sequences degraded the same way
as the observation being scored.
"""

from __future__ import annotations

import numpy as np

from ..agents import QLEARNING, STOCHASTIC_AMPLIFIED, TILEQ, cell_centre, env_for, obtain_policy
from ..core import (CONSECUTIVE, DEFAULT_OBSERVABILITY, NON_CONSECUTIVE, Box, ODGRError, ObservationSequence,
                    as_goal)
from ..traces import DEFAULT_NOISE, generate_observation, truncate_by_observability
from .base import PROVIDED, TRAINED, ZERO_SHOT, GoalLibraryEntry, Recognizer, RecognizerCapability
from .policy import _GoalConditioned, default_config

FEATURES = 32
RECENCY = 0.9
MARGIN = 1.0
LEARNING_RATE = 0.01
PAIR_UPDATES = 2000
CENTROID_SEQUENCES = 5
TRAIN_SEQUENCES = 8
PROTOTYPES = 3
BANDWIDTH = 3.0
MOTION_BANDWIDTH = 0.5


class SequenceEmbedder:
    """Random-feature sequence embedder with a trainable linear projection.

    Inputs are the normalized position followed by motion terms (heading and
    action on grids; velocity and force on mazes). Motion gets the narrower
    ``motion_bandwidth`` since sampled actions and recording noise make it far
    less informative about the goal than where the actor is.
    """

    def __init__(self, env, seed: int = 0, features: int = FEATURES, recency: float = RECENCY,
                 bandwidth: float = BANDWIDTH, motion_bandwidth: float = MOTION_BANDWIDTH,
                 out_dim: int | None = None):
        self.continuous = env.continuous
        if self.continuous:
            s_hi = np.array(env.state_space.high)
            self._scale = np.concatenate([1.0 / s_hi, np.full(2, 1.0 / env.max_force)])
            dim_in = 6
        else:
            self._size = (env.width, env.height)
            self._n_actions = env.action_space.n
            dim_in = 2 + 4 + self._n_actions
        rng = np.random.default_rng(seed)
        self.W = rng.normal(0.0, 1.0, (features, dim_in))
        self.W[:, :2] *= bandwidth
        self.W[:, 2:] *= motion_bandwidth
        self.b = rng.uniform(0.0, 2 * np.pi, features)
        self.recency = float(recency)
        out_dim = out_dim or 2 * features
        self.P = rng.normal(0.0, 1.0 / np.sqrt(2 * features), (out_dim, 2 * features))
        self.losses: list = []

    def _inputs(self, seq: ObservationSequence) -> np.ndarray:
        if self.continuous:
            raw = np.array([(*st.state, *st.action) for st in seq], dtype=float)
            return raw * self._scale
        rows = []
        for st in seq:
            x, y, d = st.state
            v = np.zeros(2 + 4 + self._n_actions)
            v[0], v[1] = x / self._size[0], y / self._size[1]
            v[2 + int(round(d)) % 4] = 1.0
            v[6 + int(st.action)] = 1.0
            rows.append(v)
        return np.array(rows)

    def features(self, seq: ObservationSequence) -> np.ndarray:
        """Per-step random Fourier features, shape ``(len(seq), features)``."""
        z = self._inputs(seq) @ self.W.T + self.b
        return np.sqrt(2.0 / len(self.b)) * np.cos(z)

    def pool(self, seq: ObservationSequence) -> np.ndarray:
        phi = self.features(seq)
        w = self.recency ** np.arange(len(phi) - 1, -1, -1, dtype=float)
        mean = (w[:, None] * phi).sum(axis=0) / w.sum()
        return np.concatenate([mean, phi[-1]])

    def embed(self, seq: ObservationSequence) -> np.ndarray:
        return self.P @ self.pool(seq)

    def fit(self, pooled: np.ndarray, labels, updates: int = PAIR_UPDATES, lr: float = LEARNING_RATE,
            margin: float = MARGIN, seed: int = 0) -> None:
        """Contrastive SGD on random pairs of pooled vectors.

        Same-label pairs are pulled together (``d**2``); different-label pairs
        are pushed to at least ``margin`` apart (``max(0, margin - d)**2``).
        Pairs are drawn half same-label, half different-label.
        """
        labels = np.asarray(labels)
        rng = np.random.default_rng(seed)
        by_label = {lab: np.flatnonzero(labels == lab) for lab in np.unique(labels)}
        if len(by_label) < 2:
            raise ValueError("contrastive training needs at least two goals")
        for _ in range(int(updates)):
            i = int(rng.integers(len(labels)))
            same = rng.random() < 0.5
            if same:
                j = int(rng.choice(by_label[labels[i]]))
            else:
                j = int(rng.choice(np.flatnonzero(labels != labels[i])))
            delta = pooled[i] - pooled[j]
            diff = self.P @ delta
            d = float(np.linalg.norm(diff))
            if same:
                loss, coef = d * d, 2.0
            elif d < margin:
                loss, coef = (margin - d) ** 2, -2.0 * (margin - d) / max(d, 1e-12)
            else:
                self.losses.append(0.0)
                continue
            self.P -= lr * coef * np.outer(diff, delta)
            self.losses.append(loss)


def degraded_variants(seq: ObservationSequence, levels=DEFAULT_OBSERVABILITY, seed: int = 0) -> list:
    """``seq`` truncated at every level under both trace types."""
    return [truncate_by_observability(seq, lv, tt, seed=seed + k)
            for k, (lv, tt) in enumerate((lv, tt) for lv in levels for tt in (CONSECUTIVE, NON_CONSECUTIVE))]


def pair_auc(distances_same, distances_diff) -> float:
    """Probability that a random same-goal pair is closer than a random different-goal pair."""
    same = np.asarray(distances_same, dtype=float)
    diff = np.asarray(distances_diff, dtype=float)
    if not len(same) or not len(diff):
        raise ValueError("need both same-goal and different-goal pairs")
    less = (same[:, None] < diff[None, :]).sum()
    ties = (same[:, None] == diff[None, :]).sum()
    return float((less + 0.5 * ties) / (len(same) * len(diff)))


class _Graml(Recognizer):
    def __init__(self, *args, pair_updates: int = PAIR_UPDATES, train_sequences: int = TRAIN_SEQUENCES,
                 centroid_sequences: int = CENTROID_SEQUENCES, noise=DEFAULT_NOISE, **kwargs):
        super().__init__(*args, **kwargs)
        self.pair_updates = int(pair_updates)
        self.train_sequences = int(train_sequences)
        self.centroid_sequences = int(centroid_sequences)
        self.noise = noise
        self.embedder = None
        self.prototypes: dict = {}

    # -- sequence generation --------------------------------------------------

    def _generate(self, artifact, goal, n: int, seed: int) -> list:
        env = env_for(artifact, goal if artifact.goal_conditioned else None)
        return [generate_observation(artifact, env, STOCHASTIC_AMPLIFIED, True, self.noise, seed=seed + i)
                for i in range(n)]

    def _prototype_policy(self, goal):
        raise NotImplementedError

    def _train_metric(self, prototype_goals) -> None:
        """Fit the embedder on degraded traces toward the prototype goals."""
        if len(prototype_goals) < 2:
            raise ValueError(f"{self.name} needs at least two prototype goals")
        self.embedder = SequenceEmbedder(self.env, seed=self.seed)
        pooled, labels = [], []
        for k, goal in enumerate(prototype_goals):
            artifact = self._prototype_policy(goal)
            self.prototypes[goal] = artifact
            for i, seq in enumerate(self._generate(artifact, goal, self.train_sequences, 1000 * self.seed + 100 * k)):
                for variant in degraded_variants(seq, seed=i):
                    pooled.append(self.embedder.pool(variant))
                    labels.append(k)
        self.embedder.fit(np.array(pooled), labels, self.pair_updates, seed=self.seed)

    def held_out_auc(self, sequences: int = 6, seed: int = 10_000) -> float:
        """Ranking AUC of embedding distances on fresh degraded prototype traces."""
        emb, labels = [], []
        for k, (goal, artifact) in enumerate(self.prototypes.items()):
            for i, seq in enumerate(self._generate(artifact, goal, sequences, seed + 100 * k)):
                for variant in degraded_variants(seq, seed=seed + i):
                    emb.append(self.embedder.embed(variant))
                    labels.append(k)
        emb = np.array(emb)
        labels = np.array(labels)
        dist = np.linalg.norm(emb[:, None, :] - emb[None, :, :], axis=-1)
        iu = np.triu_indices(len(emb), k=1)
        same = labels[iu[0]] == labels[iu[1]]
        return pair_auc(dist[iu][same], dist[iu][~same])

    # -- adaptation and scoring -----------------------------------------------

    def _entry(self, goal, provenance, sequences, steps=0) -> GoalLibraryEntry:
        return GoalLibraryEntry(goal, provenance, sequences=tuple(sequences), training_steps=steps,
                                extra={"centroids": {}})

    def centroid(self, entry: GoalLibraryEntry, observability: float, consecutive: bool) -> np.ndarray:
        """Mean embedding of the goal's sequences degraded to the observation's conditions."""
        key = (round(float(observability), 9), bool(consecutive))
        cache = entry.extra["centroids"]
        if key not in cache:
            trace_type = CONSECUTIVE if consecutive else NON_CONSECUTIVE
            vecs = [self.embedder.embed(truncate_by_observability(s, observability, trace_type, seed=i))
                    for i, s in enumerate(entry.sequences)]
            cache[key] = np.mean(vecs, axis=0)
        return cache[key]

    def score(self, entry, observation):
        c = self.centroid(entry, observation.observability, observation.is_consecutive)
        return -float(np.linalg.norm(self.embedder.embed(observation) - c))


class ExpertBasedGraml(_Graml):
    """Metric learning over per-goal expert policies toward prototype goals.

    New goals need example sequences, or a training budget from which a
    per-goal policy generates them.
    """

    name = "ExpertBasedGraml"
    capability = RecognizerCapability(True, True, True, False)

    def _prototype_policy(self, goal):
        config = self._train_config
        if config is None or config[0] not in (QLEARNING, TILEQ):
            # a goal-conditioned budget says nothing about per-goal experts
            config = default_config(self.env)
        return obtain_policy(self.env_name, goal, config, self.seed, self.cache_root)

    def _learn_domain(self, base_goals, train_config):
        if base_goals is None:
            raise ValueError(f"{self.name} needs prototype goals for domain learning")
        self._train_config = train_config
        self._train_metric([as_goal(g) for g in base_goals])

    def goals_adaptation_phase(self, dynamic_goals, dynamic_train_configs=None, example_sequences=None):
        if not self.domain_learned:
            raise ODGRError(f"{self.name} needs domain learning before goal adaptation")
        super().goals_adaptation_phase(dynamic_goals, dynamic_train_configs, example_sequences)

    def _adapt(self, goal, train_config, example_sequences):
        if example_sequences and example_sequences.get(goal):
            return self._entry(goal, PROVIDED, example_sequences[goal])
        if train_config is None:
            raise ODGRError(f"{self.name} needs example sequences or a training budget for goal {goal}")
        artifact = obtain_policy(self.env_name, goal, train_config, self.seed, self.cache_root)
        seqs = self._generate(artifact, goal, self.centroid_sequences, 7919 * (self.seed + 1))
        return self._entry(goal, TRAINED, seqs, artifact.timesteps)


class GCGraml(_Graml, _GoalConditioned):
    """Metric learning over a goal-conditioned policy, which also generates every goal's examples."""

    name = "GCGraml"
    capability = RecognizerCapability(True, True, True, True)

    def __init__(self, *args, prototypes: int = PROTOTYPES, **kwargs):
        super().__init__(*args, **kwargs)
        self.n_prototypes = int(prototypes)

    def _prototype_policy(self, goal):
        return self.gc_policy

    def _learn_domain(self, base_goals, train_config):
        _GoalConditioned._learn_domain(self, base_goals, train_config)
        if base_goals is not None and not isinstance(base_goals, Box):
            protos = [as_goal(g) for g in base_goals]
        else:
            rng = np.random.default_rng(self.seed)
            picked = rng.choice(len(self.training_cells), size=min(self.n_prototypes, len(self.training_cells)),
                                replace=False)
            protos = [as_goal(cell_centre(self.training_cells[i])) for i in sorted(picked)]
        self._train_metric(protos)

    def _adapt(self, goal, train_config, example_sequences):
        self.env._check_point(goal, "goal")
        seqs = self._generate(self.gc_policy, goal, self.centroid_sequences, 7919 * (self.seed + 1))
        return self._entry(goal, ZERO_SHOT, seqs)


__all__ = ["ExpertBasedGraml", "GCGraml", "SequenceEmbedder", "degraded_variants", "pair_auc"]
