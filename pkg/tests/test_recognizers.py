import numpy as np
import pytest

from odgr.agents import GCQ, QLEARNING, TABULAR, PolicyArtifact, QTable
from odgr.core import CapabilityError, ODGRError, ObservationSequence, ObservationStep
from odgr.recognizers import (CAPABILITIES, FINE_TUNED, PROVIDED, RECALLED, TRAINED, ZERO_SHOT, Draco,
                              ExpertBasedGraml, GCAura, GCDraco, GCGraml, Graql, eligible, kl_score, make_recognizer,
                              mean_loglik_score, pair_auc, resolve_recognizer, utility_score, zscore_score)
from odgr.traces import generate_observation, truncate_by_observability

from conftest import CROSSING, CROSSING_GOALS, FOUR_ROOMS, ROOM_CORNERS

ENVS = ["MiniGrid-SimpleCrossingS13N4", "MiniGrid-LavaCrossingS9N2", "PointMaze-FourRooms", "PointMaze-Obstacle"]
EXPECTED = {
    "Graql": [True, True, False, False],
    "Draco": [True, True, True, True],
    "GCDraco": [False, False, True, True],
    "GCAura": [False, False, True, True],
    "ExpertBasedGraml": [True, True, True, True],
    "GCGraml": [False, False, True, True],
}


def toy_artifact():
    # one state, action 0 clearly preferred
    table = QTable([(1, 1, 0)], [[1.0, 0.0, 0.0, 0.0]], 4, 0.95)
    return PolicyArtifact(TABULAR, "GridWorld-Empty-3x3", (3, 3), "VI", 1, table)


def obs(*actions):
    return ObservationSequence(tuple(ObservationStep((1, 1, 0), a) for a in actions))


def test_capability_flags():
    assert tuple(CAPABILITIES["Graql"].__dict__.values()) == (True, False, False, False)
    assert tuple(CAPABILITIES["Draco"].__dict__.values()) == (True, True, False, False)
    assert tuple(CAPABILITIES["ExpertBasedGraml"].__dict__.values()) == (True, True, True, False)
    for name in ("GCDraco", "GCAura", "GCGraml"):
        assert tuple(CAPABILITIES[name].__dict__.values()) == (True, True, True, True)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_eligibility_matrix(name):
    assert [eligible(name, env) for env in ENVS] == EXPECTED[name]


def test_registry_lookup():
    assert resolve_recognizer("graql") is Graql
    assert resolve_recognizer("BG-GRAML") is ExpertBasedGraml
    assert resolve_recognizer("gc-aura") is GCAura
    with pytest.raises(KeyError):
        resolve_recognizer("oracle")
    with pytest.raises(KeyError):
        eligible("Graql", "NoSuchEnv")


def test_capability_error_on_construction():
    with pytest.raises(CapabilityError) as info:
        make_recognizer("Graql", FOUR_ROOMS)
    assert info.value.recognizer == "Graql"
    with pytest.raises(CapabilityError):
        GCDraco(env_name=CROSSING)
    with pytest.raises(ValueError):
        Graql("maze", CROSSING)


def test_bad_options():
    with pytest.raises(ValueError):
        Graql(env_name=CROSSING, metric="loglik")
    with pytest.raises(ValueError):
        Draco(env_name=CROSSING, metric="kl")
    with pytest.raises(ValueError):
        Graql(env_name=CROSSING, temperature=0)


def test_score_functions_on_toy_policy():
    art = toy_artifact()
    good, bad = obs(0, 0), obs(2, 2)
    assert kl_score(art, good) > kl_score(art, bad)
    assert utility_score(art, good) == pytest.approx(2.0) and utility_score(art, bad) == 0.0
    assert mean_loglik_score(art, good) > mean_loglik_score(art, bad)
    assert zscore_score(art, good) > 0 > zscore_score(art, bad)
    unseen = ObservationSequence((ObservationStep((2, 2, 0), 0),))
    assert zscore_score(art, unseen) == pytest.approx(0.0)


def test_likelihood_floor_bounds_off_policy_steps():
    import math
    from odgr.recognizers.base import log_likelihoods
    art = toy_artifact()
    ll = log_likelihoods(art, obs(2))
    assert ll[0] >= math.log(0.1 / 4) - 1e-12
    assert log_likelihoods(art, obs(2), floor=0.0)[0] < -9
    with pytest.raises(ValueError):
        log_likelihoods(art, obs(0), floor=1.0)


def test_pair_auc():
    assert pair_auc([0.1, 0.2], [0.5, 0.6]) == 1.0
    assert pair_auc([0.5, 0.6], [0.1, 0.2]) == 0.0
    assert pair_auc([0.3], [0.3]) == 0.5


def test_inference_before_adaptation_fails():
    with pytest.raises(ODGRError):
        Graql(env_name=CROSSING).inference_phase(obs(0))


def test_adaptation_input_checks(cache_dir):
    rec = Graql(env_name=CROSSING, cache_root=cache_dir)
    with pytest.raises(ValueError):
        rec.goals_adaptation_phase([])
    with pytest.raises(ValueError):
        rec.goals_adaptation_phase([(11, 1), (11, 1)])
    with pytest.raises(ValueError):
        rec.goals_adaptation_phase(CROSSING_GOALS, [(QLEARNING, 10)] * 2)


@pytest.fixture(scope="module")
def graql(cache_dir, crossing_policies):
    rec = Graql(env_name=CROSSING, cache_root=cache_dir)
    rec.goals_adaptation_phase(CROSSING_GOALS, [(QLEARNING, 100_000)])
    return rec


def test_graql_recognizes_full_traces(graql, crossing_policies):
    assert all(e.provenance == TRAINED for e in graql.library.values())
    for goal, art in crossing_policies.items():
        seq = generate_observation(art, seed=5)
        res = graql.inference_phase(seq, goal, 1.0)
        assert res.predicted_goal == goal and res.rank_of_true == 1
        assert set(res.scores) == set(CROSSING_GOALS)


def test_graql_rejects_wrong_state_shape(graql):
    with pytest.raises(ValueError):
        graql.inference_phase(ObservationSequence((ObservationStep((1.0, 1.0, 0.0, 0.0), (0.0, 0.0)),)))


def test_readaptation_replaces_goal_set(graql):
    graql.goals_adaptation_phase(CROSSING_GOALS[:2], [(QLEARNING, 100_000)])
    assert graql.goal_order == CROSSING_GOALS[:2]
    graql.goals_adaptation_phase(CROSSING_GOALS, [(QLEARNING, 100_000)])


def test_draco_on_grid(cache_dir, crossing_policies):
    rec = Draco(env_name=CROSSING, cache_root=cache_dir, metric="zscore")
    rec.goals_adaptation_phase(CROSSING_GOALS, [(QLEARNING, 100_000)])
    seq = generate_observation(crossing_policies[(1, 11)], seed=2)
    assert rec.inference_phase(seq, (1, 11)).predicted_goal == (1, 11)


@pytest.fixture(scope="module")
def gc_draco(cache_dir, room_gc_policy):
    rec = GCDraco(env_name=FOUR_ROOMS, cache_root=cache_dir)
    rec.domain_learning_phase(base_goals=ROOM_CORNERS, train_config=(GCQ, 100_000))
    return rec


def test_gc_needs_domain_learning():
    with pytest.raises(ODGRError):
        GCDraco(env_name=FOUR_ROOMS).goals_adaptation_phase(ROOM_CORNERS)


def test_gc_draco_zero_shot(gc_draco, room_gc_policy):
    assert gc_draco.gc_policy == room_gc_policy
    gc_draco.goals_adaptation_phase(ROOM_CORNERS)
    assert {e.provenance for e in gc_draco.library.values()} == {ZERO_SHOT}
    hits = 0
    for i, goal in enumerate(ROOM_CORNERS):
        seq = generate_observation(room_gc_policy, goal=goal, seed=i, noise=(0.1, 0.05))
        hits += gc_draco.inference_phase(seq, goal).predicted_goal == goal
    assert hits >= 2


def test_gc_aura_provenance(cache_dir, room_gc_policy, tmp_path):
    rec = GCAura(env_name=FOUR_ROOMS, cache_root=cache_dir, fine_tune_episodes=20)
    rec.domain_learning_phase(base_goals=ROOM_CORNERS, train_config=(GCQ, 100_000))
    assert rec.covered((8.5, 2.5)) and not rec.covered((4.5, 4.5))
    rec.goals_adaptation_phase([(8.5, 2.5), (4.5, 4.5)])
    assert rec.library[(8.5, 2.5)].provenance == ZERO_SHOT
    tuned = rec.library[(4.5, 4.5)]
    assert tuned.provenance == FINE_TUNED and tuned.training_steps > 0
    rec.goals_adaptation_phase([(4.5, 4.5)])
    assert rec.library[(4.5, 4.5)].provenance == RECALLED
    fresh = GCAura(env_name=FOUR_ROOMS, cache_root=cache_dir, fine_tune_episodes=20)
    fresh.domain_learning_phase(base_goals=ROOM_CORNERS, train_config=(GCQ, 100_000))
    fresh.goals_adaptation_phase([(4.5, 4.5)])
    entry = fresh.library[(4.5, 4.5)]
    assert entry.provenance == RECALLED and entry.artifact == tuned.artifact


def test_expert_graml_needs_base_goals():
    with pytest.raises(ValueError):
        ExpertBasedGraml(env_name=CROSSING).domain_learning_phase()
    with pytest.raises(ODGRError):
        ExpertBasedGraml(env_name=CROSSING).goals_adaptation_phase(CROSSING_GOALS)


@pytest.fixture(scope="module")
def expert_graml(cache_dir, crossing_policies):
    rec = ExpertBasedGraml(env_name=CROSSING, cache_root=cache_dir, pair_updates=300, train_sequences=3)
    rec.domain_learning_phase(base_goals=CROSSING_GOALS, train_config=(QLEARNING, 100_000))
    return rec


def test_expert_graml_adaptation_sources(expert_graml, crossing_policies):
    examples = {(1, 11): [generate_observation(crossing_policies[(1, 11)], seed=s) for s in range(3)]}
    expert_graml.goals_adaptation_phase([(11, 1), (1, 11)], [(QLEARNING, 100_000)] * 2, examples)
    assert expert_graml.library[(1, 11)].provenance == PROVIDED
    assert expert_graml.library[(11, 1)].provenance == TRAINED
    with pytest.raises(ODGRError):
        expert_graml.goals_adaptation_phase([(11, 11)])


def test_graml_centroids_cached_per_condition(expert_graml, crossing_policies):
    expert_graml.goals_adaptation_phase(CROSSING_GOALS, [(QLEARNING, 100_000)])
    seq = generate_observation(crossing_policies[(11, 11)], seed=8)
    part = truncate_by_observability(seq, 0.5, "non_consecutive", seed=1)
    res = expert_graml.inference_phase(part, (11, 11), 0.5)
    assert res.rank_of_true is not None
    keys = set(expert_graml.library[(11, 11)].extra["centroids"])
    assert keys == {(0.5, False)}
    assert all(np.isfinite(list(res.scores.values())))


def test_embedder_training_reduces_loss(expert_graml):
    losses = expert_graml.embedder.losses
    assert np.mean(losses[-50:]) < np.mean(losses[:50])


def test_gc_graml_prototypes_from_region(monkeypatch):
    from odgr.core import Box
    from odgr.recognizers.policy import _GoalConditioned

    def fake_domain(self, base_goals, train_config):
        self.training_cells = ((1, 1), (2, 2), (8, 8), (8, 1))

    monkeypatch.setattr(_GoalConditioned, "_learn_domain", fake_domain)
    rec = GCGraml(env_name=FOUR_ROOMS)
    monkeypatch.setattr(rec, "_train_metric", lambda protos: setattr(rec, "picked", protos))
    rec.domain_learning_phase(base_goals=Box((1, 1), (10, 10)))
    assert len(rec.picked) == 3 and len(set(rec.picked)) == 3
