"""Shared recognizer machinery: capabilities, goal library and policy scoring."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..agents import DEFAULT_TEMPERATURE, bin_of, softmax
from ..core import (CapabilityError, ODGRError, ObservationSequence, RecognitionResult, argmax_with_tiebreak,
                    as_goal, rank_of)
from ..envs import env_info, make_env

# provenance tags
TRAINED = "trained"
ZERO_SHOT = "zero-shot"
RECALLED = "recalled"
FINE_TUNED = "fine-tuned"
PROVIDED = "provided-sequences"
PROVENANCES = (TRAINED, ZERO_SHOT, RECALLED, FINE_TUNED, PROVIDED)

KL_SMOOTHING = 0.01
# share of uniform behaviour assumed in the actor; matches the random-action rate used to make traces
LIKELIHOOD_FLOOR = 0.1


@dataclass(frozen=True)
class RecognizerCapability:
    supports_discrete: bool
    supports_continuous: bool
    adapts_to_new_goals: bool
    requires_gc_env: bool

    def check(self, name: str, env_name: str) -> None:
        """Raise :class:`CapabilityError` unless the environment qualifies."""
        info = env_info(env_name)
        if info.continuous and not self.supports_continuous:
            raise CapabilityError(f"{name} needs discrete state and action spaces; {info.name} is continuous",
                                  recognizer=name, env_name=info.name)
        if not info.continuous and not self.supports_discrete:
            raise CapabilityError(f"{name} needs continuous spaces; {info.name} is discrete",
                                  recognizer=name, env_name=info.name)
        if self.requires_gc_env and not info.gc_adaptable:
            raise CapabilityError(f"{name} needs a goal-conditioned adaptable environment; {info.name} is not",
                                  recognizer=name, env_name=info.name)


@dataclass
class GoalLibraryEntry:
    """What a recognizer knows about one active goal."""

    goal: tuple
    provenance: str
    artifact: object = None
    sequences: tuple = ()
    training_steps: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


class Recognizer:
    """Base class for the phased recognition contract.

    Subclasses set ``name`` and ``capability`` and implement ``_learn_domain``,
    ``_adapt`` and ``score``. After adaptation the recognizer is read-only, so
    inference can run in parallel workers.
    """

    name = "Recognizer"
    capability = RecognizerCapability(True, True, False, False)

    def __init__(self, domain_name: str | None = None, env_name: str | None = None, *, seed: int = 0,
                 cache_root=None, temperature: float = DEFAULT_TEMPERATURE, **options):
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        self.seed = int(seed)
        self.cache_root = cache_root
        self.temperature = float(temperature)
        self.options = options
        self.domain_name = domain_name
        self.env_name = None
        self.library: dict = {}
        self.goal_order: list = []
        self.domain_learned = False
        if env_name is not None:
            self._bind(domain_name, env_name)

    def _bind(self, domain_name, env_name) -> None:
        self.capability.check(self.name, env_name)
        info = env_info(env_name)
        if domain_name is not None and domain_name != info.domain:
            raise ValueError(f"{info.name} belongs to domain {info.domain!r}, not {domain_name!r}")
        self.domain_name = info.domain
        self.env_name = info.name
        self.env = make_env(info.name)

    # -- phases ----------------------------------------------------------------

    def domain_learning_phase(self, domain_name: str | None = None, env_name: str | None = None,
                              base_goals=None, train_config=None) -> None:
        if env_name is not None:
            self._bind(domain_name, env_name)
        if self.env_name is None:
            raise ValueError("no environment given")
        self._learn_domain(base_goals, train_config)
        self.domain_learned = True

    def goals_adaptation_phase(self, dynamic_goals, dynamic_train_configs=None, example_sequences=None) -> None:
        if self.env_name is None:
            raise ValueError("bind an environment before goal adaptation")
        if not self.domain_learned:
            # phases with nothing to learn run implicitly
            self.domain_learning_phase()
        goals = [as_goal(g) for g in dynamic_goals]
        if not goals:
            raise ValueError("need at least one goal")
        if len(set(goals)) != len(goals):
            raise ValueError("dynamic goals must be distinct")
        if dynamic_train_configs is not None:
            configs = list(dynamic_train_configs)
            if len(configs) == 1 and len(goals) > 1:
                configs = configs * len(goals)
            if len(configs) != len(goals):
                raise ValueError("need one train config per dynamic goal")
        else:
            configs = [None] * len(goals)
        if example_sequences is not None:
            example_sequences = {as_goal(g): list(v) for g, v in dict(example_sequences).items()}
        self.library = {}
        for goal, config in zip(goals, configs):
            self.library[goal] = self._adapt(goal, config, example_sequences)
        self.goal_order = goals

    def inference_phase(self, observation: ObservationSequence, true_goal=None,
                        observability: float | None = None) -> RecognitionResult:
        if not self.library:
            raise ODGRError("goal library is empty; run goals_adaptation_phase first")
        if not isinstance(observation, ObservationSequence):
            observation = ObservationSequence(tuple(observation))
        self._check_dims(observation)
        start = time.perf_counter()
        scores = {g: float(self.score(self.library[g], observation)) for g in self.goal_order}
        predicted = argmax_with_tiebreak(scores, self.goal_order)
        elapsed = time.perf_counter() - start
        rank = None
        if true_goal is not None:
            true_goal = as_goal(true_goal)
            rank = rank_of(scores, true_goal, self.goal_order)
        return RecognitionResult(predicted, scores, tuple(self.goal_order), rank, elapsed)

    def _check_dims(self, observation: ObservationSequence) -> None:
        want = self.env.state_space.ndim
        for step in observation:
            if len(step.state) != want:
                raise ValueError(f"state {step.state} has {len(step.state)} dimensions, {self.env_name} uses {want}")

    # -- hooks -----------------------------------------------------------------

    def _learn_domain(self, base_goals, train_config) -> None:
        pass

    def _adapt(self, goal, train_config, example_sequences) -> GoalLibraryEntry:
        raise NotImplementedError

    def score(self, entry: GoalLibraryEntry, observation: ObservationSequence) -> float:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{self.name}(env={self.env_name!r}, goals={self.goal_order})"


# ---------------------------------------------------------------------------
# policy-based scores
# ---------------------------------------------------------------------------


def action_index(artifact, action) -> int:
    """Discrete action index, or the force bin of a continuous action."""
    if artifact.kind == "tabular":
        return int(action)
    return bin_of(action, artifact.payload.max_force)


def step_distributions(artifact, observation, goal=None, temperature: float = DEFAULT_TEMPERATURE):
    """Per-step ``(policy probabilities, observed action index, q or None)``."""
    n = artifact.n_actions
    uniform = np.full(n, 1.0 / n)
    for step in observation:
        q = artifact.q_values(step.state, goal)
        probs = uniform if q is None else softmax(q, temperature)
        yield probs, action_index(artifact, step.action), q


def kl_score(artifact, observation, goal=None, temperature: float = DEFAULT_TEMPERATURE,
             smoothing: float = KL_SMOOTHING) -> float:
    """Negated mean KL divergence from the smoothed observed action to the policy.

    The observed action becomes ``(1 - smoothing) * onehot + smoothing / |A|``.
    """
    total = 0.0
    for probs, a, _ in step_distributions(artifact, observation, goal, temperature):
        p_hat = np.full(len(probs), smoothing / len(probs))
        p_hat[a] += 1.0 - smoothing
        total += float(np.sum(p_hat * (np.log(p_hat) - np.log(np.maximum(probs, 1e-300)))))
    return -total / len(observation)


def utility_score(artifact, observation, goal=None) -> float:
    """Summed action value of the observed steps (unseen states contribute 0)."""
    total = 0.0
    for step in observation:
        q = artifact.q_values(step.state, goal)
        if q is not None:
            total += float(q[action_index(artifact, step.action)])
    return total


def log_likelihoods(artifact, observation, goal=None, temperature: float = DEFAULT_TEMPERATURE,
                    floor: float = LIKELIHOOD_FLOOR) -> np.ndarray:
    """Per-step log-probability of the observed action under ``(1 - floor) * policy + floor * uniform``.

    The floor keeps one off-policy step from outweighing a whole trace of
    on-policy ones when the softmax is sharp.
    """
    if not 0.0 <= floor < 1.0:
        raise ValueError("floor must lie in [0, 1)")
    out = []
    for p, a, _ in step_distributions(artifact, observation, goal, temperature):
        out.append(math.log(max((1.0 - floor) * float(p[a]) + floor / len(p), 1e-300)))
    return np.array(out)


def mean_loglik_score(artifact, observation, goal=None, temperature: float = DEFAULT_TEMPERATURE,
                      floor: float = LIKELIHOOD_FLOOR) -> float:
    return float(log_likelihoods(artifact, observation, goal, temperature, floor).mean())


def zscore_score(artifact, observation, goal=None, temperature: float = DEFAULT_TEMPERATURE,
                 floor: float = LIKELIHOOD_FLOOR) -> float:
    """Excess log-likelihood over the uniform policy, divided by ``sqrt(|O|)``."""
    ll = log_likelihoods(artifact, observation, goal, temperature, floor)
    baseline = len(ll) * math.log(1.0 / artifact.n_actions)
    return float((ll.sum() - baseline) / math.sqrt(len(ll)))
