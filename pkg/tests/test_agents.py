import numpy as np
import pytest

from odgr.agents import (GC, GCQ, QLEARNING, STOCHASTIC_AMPLIFIED, TABULAR, TILEQ, ArtifactNotFound,
                         CorruptArtifact, PolicyArtifact, QTable, TileCoder, action_bins, artifact_path, bin_of,
                         fine_tune, load_artifact, obtain_policy, save_artifact, softmax, softmax_policy,
                         success_rate, train_q)
from odgr.agents.rollout import rollout
from odgr.core import CapabilityError
from odgr.envs import make_env

from conftest import CROSSING


def test_softmax_reference_values():
    assert softmax([1.0, 0.0], 1.0) == pytest.approx([0.7311, 0.2689], abs=1e-4)
    assert softmax([0.0, 0.0, 0.0]) == pytest.approx([1 / 3] * 3)


def test_softmax_is_stable_for_large_values():
    p = softmax([1000.0, 999.0], 0.1)
    assert np.isfinite(p).all() and p.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        softmax([1.0], 0.0)


def test_softmax_policy_uniform_for_unseen_state():
    table = QTable([(1, 1, 0)], [[1.0, 0.0, 0.0, 0.0]], 4, 0.95)
    art = PolicyArtifact(TABULAR, "GridWorld-Empty-3x3", (3, 3), "VI", 1, table)
    assert softmax_policy(art, (2, 2, 0)) == pytest.approx([0.25] * 4)
    assert softmax_policy(art, (1, 1, 0))[0] > 0.99


def test_untrained_artifact_has_zero_steps():
    art = train_q("GridWorld-Empty-3x3", (3, 3), 0)
    assert art.untrained and art.timesteps == 0


def test_obtain_policy_validates_algorithm():
    with pytest.raises(ValueError):
        obtain_policy(CROSSING, (11, 1), ("PPO", 10))
    with pytest.raises(CapabilityError):
        obtain_policy(CROSSING, (11, 1), (TILEQ, 10))
    with pytest.raises(CapabilityError):
        obtain_policy("PointMaze-FourRooms", (8.5, 8.5), (QLEARNING, 10))


def test_training_is_deterministic():
    a = train_q("GridWorld-Empty-4x4", (4, 4), 3000, seed=2)
    b = train_q("GridWorld-Empty-4x4", (4, 4), 3000, seed=2)
    assert a == b and a.digest() == b.digest()


def test_artifact_roundtrip_and_corruption(tmp_path):
    art = train_q("GridWorld-Empty-3x3", (3, 3), 2000)
    path = save_artifact(art, tmp_path)
    assert path == artifact_path(tmp_path, art.env_name, (3, 3), art.algorithm, 2000)
    loaded = load_artifact(tmp_path, art.env_name, (3, 3), art.algorithm, 2000)
    assert loaded == art
    data = bytearray(path.read_bytes())
    data[-1] ^= 0xFF
    with pytest.raises(CorruptArtifact):
        PolicyArtifact.from_bytes(bytes(data))
    with pytest.raises(CorruptArtifact):
        PolicyArtifact.from_bytes(b"junk")
    with pytest.raises(ArtifactNotFound):
        load_artifact(tmp_path, art.env_name, (2, 2), art.algorithm, 2000)


def test_cache_layout(tmp_path):
    p = artifact_path(tmp_path, CROSSING, (11, 1), "QLEARNING", 100)
    assert p.relative_to(tmp_path).as_posix() == f"agents/minigrid/{CROSSING}/11x1/QLEARNING_100.bin"
    assert artifact_path(tmp_path, "PointMaze-FourRooms", GC, "GCQ", 5).parent.name == "gc"


def test_obtain_policy_hits_cache(tmp_path):
    first = obtain_policy("GridWorld-Empty-3x3", (3, 3), (QLEARNING, 1500), 0, tmp_path)
    files = list(tmp_path.rglob("*.bin"))
    assert len(files) == 1
    again = obtain_policy("GridWorld-Empty-3x3", (3, 3), (QLEARNING, 1500), 0, tmp_path)
    assert again == first
    other_seed = obtain_policy("GridWorld-Empty-3x3", (3, 3), (QLEARNING, 1500), 1, tmp_path)
    assert len(list(tmp_path.rglob("*.bin"))) == 2 and other_seed.seed == 1


def test_crossing_policies_reach_their_goals(crossing_policies):
    for goal, art in crossing_policies.items():
        assert art.info["greedy_success"], goal
        assert success_rate(art, n=10, selection=STOCHASTIC_AMPLIFIED) >= 0.8


def test_rollout_states_precede_actions(crossing_policies):
    art = crossing_policies[(11, 1)]
    env = make_env(CROSSING, goal=(11, 1))
    states, actions, reached = rollout(art, env)
    assert reached and len(states) == len(actions)
    replay = make_env(CROSSING, goal=(11, 1))
    obs = replay.reset()
    for s, a in zip(states, actions):
        assert obs.observation == s
        obs = replay.step(a)[0]


def test_tile_coder_active_features():
    coder = TileCoder((0, 0, -1, -1), (10, 10, 1, 1))
    idx = coder.active((5.0, 5.0, 0.0, 0.0))
    assert len(idx) == coder.n_tilings
    assert len(set(idx)) == coder.n_tilings
    assert all(0 <= i < coder.n_features for i in idx)


def test_force_bins_roundtrip():
    bins = action_bins(1.0)
    for i, b in enumerate(bins):
        assert bin_of(b, 1.0) == i


def test_room_gc_policy_is_shared_across_goals(room_gc_policy):
    assert room_gc_policy.goal == GC and room_gc_policy.algorithm.startswith(GCQ)
    assert len(room_gc_policy.info["training_cells"]) == 3
    for goal in [(8.5, 1.5), (1.5, 8.5), (8.5, 8.5)]:
        assert success_rate(room_gc_policy, goal, n=5) >= 0.6


def test_fine_tune_leaves_input_untouched(room_gc_policy):
    before = room_gc_policy.digest()
    tuned = fine_tune(room_gc_policy, (4.5, 4.5), episodes=5, seed=0)
    assert room_gc_policy.digest() == before
    assert tuned.info["fine_tuned"][-1][0] == (4.5, 4.5)
    assert fine_tune(room_gc_policy, (4.5, 4.5), episodes=0) is room_gc_policy
    with pytest.raises(ValueError):
        fine_tune(train_q("GridWorld-Empty-3x3", (3, 3), 10), (3, 3))
