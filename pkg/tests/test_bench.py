import json

import pytest

from odgr.agents import QLEARNING
from odgr.bench import (ExperimentReport, GRTaskResult, aggregate_results, enumerate_instances, format_text,
                        level_key, list_problems, parse_text, problem_spec, report_dir, run_odgr, write_report)
from odgr.bench.report import round_time
from odgr.core import CONSECUTIVE, NON_CONSECUTIVE, CapabilityError, ODGRProblemSpec

EMPTY = "GridWorld-Empty-5x5"
FIVE_GOALS = [(5, 1), (1, 5), (5, 5), (3, 3), (2, 4)]
REPORT_KEYS = ["0.3", "0.5", "0.7", "1", "total"]
TOTAL_KEYS = ["total_correct", "total_tasks", "total_accuracy", "total_average_inference_time",
              "goals_adaptation_time", "domain_learning_time"]


def small_spec(goals, **kw):
    return ODGRProblemSpec("minigrid", EMPTY, (), goals, [(QLEARNING, 4000)], **kw)


def synthetic_report(correct_flags, levels=(0.3, 0.5, 0.7, 1.0)):
    results = []
    flags = iter(correct_flags)
    for level in levels:
        for tt in (CONSECUTIVE, NON_CONSECUTIVE):
            ok = next(flags)
            results.append(GRTaskResult((1, 1), level, tt, ok, 1 if ok else 2, 0.0004))
    return ExperimentReport(results, levels, domain_learning_time=0.0, goals_adaptation_time=1.23456)


def test_instance_counts(tmp_path):
    assert len(enumerate_instances(small_spec(FIVE_GOALS), cache_root=tmp_path)) == 40
    assert len(enumerate_instances(small_spec(FIVE_GOALS[:3]), cache_root=tmp_path)) == 24
    spec = small_spec(FIVE_GOALS[:3], observability_levels=(0.5,), trace_types=(CONSECUTIVE,))
    assert len(enumerate_instances(spec, traces_per_condition=10, cache_root=tmp_path)) == 30


def test_instance_order_and_determinism(tmp_path):
    spec = small_spec(FIVE_GOALS[:3])
    a = enumerate_instances(spec, 2, seed=1, cache_root=tmp_path)
    b = enumerate_instances(spec, 2, seed=1, cache_root=tmp_path)
    assert a == b
    assert [i.true_goal for i in a[:16]] == [(5, 1)] * 16
    assert [(i.observability, i.trace_type) for i in a[:2]] == [(0.3, CONSECUTIVE), (0.3, NON_CONSECUTIVE)]
    with pytest.raises(ValueError):
        enumerate_instances(spec, 0)


def test_actor_failure_names_goal(monkeypatch):
    import odgr.bench.runner as runner

    def boom(*args, **kwargs):
        raise OSError("disk full")
    monkeypatch.setattr(runner, "obtain_policy", boom)
    with pytest.raises(RuntimeError, match=r"\(5, 1\)"):
        enumerate_instances(small_spec(FIVE_GOALS[:3]))


def test_level_keys():
    assert [level_key(v) for v in (0.3, 0.5, 0.7, 1.0)] == ["0.3", "0.5", "0.7", "1"]


def test_round_time():
    assert round_time(0.0) == 0.0
    assert round_time(0.0001) == 0.001
    assert round_time(1.23456) == 1.235


def test_report_structure_and_totals():
    rep = synthetic_report([True, False] * 4)
    data = rep.to_dict()
    assert list(data) == REPORT_KEYS
    assert list(data["0.3"]) == [CONSECUTIVE, NON_CONSECUTIVE]
    assert data["0.3"][CONSECUTIVE] == {"accuracy": 1.0}
    assert list(data["total"]) == TOTAL_KEYS
    assert data["total"]["total_accuracy"] == 0.5
    assert data["total"]["domain_learning_time"] == 0.0
    assert data["total"]["total_average_inference_time"] == 0.001
    assert list(rep.to_dict(timing=False)["total"]) == TOTAL_KEYS[:3]


def test_total_accuracy_reference():
    results = [GRTaskResult((1, 1), 0.5, CONSECUTIVE, i < 27, 1 if i < 27 else 2, 0.01) for i in range(30)]
    rep = ExperimentReport(results, (0.5,), (CONSECUTIVE,))
    assert (rep.total_correct, rep.total_tasks, rep.total_accuracy) == (27, 30, 0.9)


def test_report_rejects_unknown_level():
    with pytest.raises(ValueError):
        ExperimentReport([GRTaskResult((1, 1), 0.4, CONSECUTIVE, True, 1, 0.0)], (0.3,))


def test_text_format_roundtrip():
    rep = synthetic_report([True] * 8)
    text = rep.to_text()
    assert text.splitlines()[1].startswith(" '0.3': {'consecutive': {'accuracy': 1.0}")
    assert " '1': {" in text and "'1.0'" not in text
    assert parse_text(text) == json.loads(rep.to_json())
    assert format_text(rep.to_dict()) == text


def test_write_report_layout(tmp_path):
    rep = synthetic_report([True] * 8)
    path = write_report(rep, tmp_path, "Graql", "minigrid", "MiniGrid-SimpleCrossingS13N4", "L1", 0)
    assert path.relative_to(tmp_path).as_posix() == \
        "Graql/minigrid/MiniGrid-SimpleCrossingS13N4/L1/experiment_results/res_0.txt"
    assert path.with_suffix(".json").exists()
    rep2 = synthetic_report([False] * 8)
    write_report(rep2, tmp_path, "Graql", "minigrid", "MiniGrid-SimpleCrossingS13N4", "L1", 0)
    assert parse_text(path.read_text())["total"]["total_correct"] == 0
    assert not list(path.parent.glob(".tmp-*"))


def _store(root, rec, task, flags):
    write_report(synthetic_report(flags), root, rec, "minigrid", "MiniGrid-SimpleCrossingS13N4", task, 0)


def test_aggregate_shapes_and_averages(tmp_path):
    _store(tmp_path, "Graql", "L1", [True] * 8)
    _store(tmp_path, "Draco", "L1", [False, True] * 4)
    agg = aggregate_results(tmp_path, "MiniGrid-SimpleCrossingS13N4", ["Graql", "Draco"], ["L1"])
    assert len(agg.rows) == 2 * 4 * 2 and not agg.warnings
    assert agg.series("Draco", NON_CONSECUTIVE) == [("0.3", 1.0), ("0.5", 1.0), ("0.7", 1.0), ("1", 1.0)]
    assert agg.to_csv().splitlines()[0] == "env_name,recognizer,observability,trace_type,accuracy,tasks"


def test_aggregate_missing_task_warns(tmp_path):
    _store(tmp_path, "Graql", "L1", [True] * 8)
    _store(tmp_path, "Graql", "L2", [False] * 8)
    agg = aggregate_results(tmp_path, "MiniGrid-SimpleCrossingS13N4", ["Graql"], ["L1", "L2", "L3"])
    assert len(agg.warnings) == 1 and "L3" in agg.warnings[0]
    assert {r["accuracy"] for r in agg.rows} == {0.5}
    assert {r["tasks"] for r in agg.rows} == {2}


def test_registry():
    spec = problem_spec("minigrid", "MiniGrid-SimpleCrossingS13N4", "L1")
    assert spec.dynamic_goals == ((11, 1), (11, 11), (1, 11))
    assert spec.train_configs[0] == (QLEARNING, 100_000)
    assert len(problem_spec("minigrid", "MiniGrid-SimpleCrossingS13N4", "L2").dynamic_goals) == 5
    maze = problem_spec("point_maze", "PointMaze-FourRooms", "L2")
    assert maze.base_region is not None
    assert {e for _, e, _ in list_problems()} == {"MiniGrid-SimpleCrossingS13N4", "MiniGrid-LavaCrossingS9N2",
                                                   "PointMaze-FourRooms", "PointMaze-Obstacle"}
    with pytest.raises(KeyError):
        problem_spec("minigrid", "MiniGrid-SimpleCrossingS13N4", "L9")


def test_run_odgr_capability_check_comes_first(tmp_path):
    spec = problem_spec("point_maze", "PointMaze-FourRooms", "L1")
    with pytest.raises(CapabilityError):
        run_odgr(spec, "Graql", cache_root=tmp_path)
    assert not any(tmp_path.iterdir())


def test_run_odgr_small_problem(tmp_path):
    spec = small_spec(FIVE_GOALS[:3])
    rep = run_odgr(spec, "Graql", cache_root=tmp_path, collect_stats=True, debug_dir=tmp_path / "debug")
    assert rep.total_tasks == 24
    assert 0.0 <= rep.total_accuracy <= 1.0
    assert rep.domain_learning_time < 0.1
    assert rep.goals_adaptation_time > 0
    weighted = sum(rep.accuracy(l, t) * len(rep.bucket(l, t)) for l in spec.observability_levels
                   for t in spec.trace_types)
    assert weighted == pytest.approx(rep.total_correct)
    debug = tmp_path / "debug"
    assert len(list(debug.glob("*.ppm"))) == 24
    assert (debug / "instances.tsv").read_text().count("\n") == 25
    again = run_odgr(spec, "Graql", cache_root=tmp_path)
    assert again.to_text(timing=False) == rep.to_text(timing=False)


def test_run_odgr_parallel_matches_serial(tmp_path):
    spec = small_spec(FIVE_GOALS[:3])
    serial = run_odgr(spec, "Graql", 1, cache_root=tmp_path, traces_per_condition=2)
    parallel = run_odgr(spec, "Graql", 3, cache_root=tmp_path, traces_per_condition=2)
    assert serial.to_text(timing=False) == parallel.to_text(timing=False)
    assert [r.rank for r in serial.results] == [r.rank for r in parallel.results]


def test_report_dir():
    assert report_dir("o", "GCAura", "point_maze", "PointMaze-FourRooms", "L2").as_posix() == \
        "o/GCAura/point_maze/PointMaze-FourRooms/L2/experiment_results"
