import io
import shutil
import subprocess
import sys

import pytest

from odgr.bench import parse_text
from odgr.cli import (EXIT_CAPABILITY, EXIT_OK, EXIT_USAGE, aggregate_main, all_main, executor_main,
                      graql_minigrid_tutorial, main)

CROSSING = "MiniGrid-SimpleCrossingS13N4"


@pytest.fixture
def roots(tmp_path, cache_dir, monkeypatch):
    out = tmp_path / "outputs"
    monkeypatch.setenv("ODGR_OUTPUTS", str(out))
    monkeypatch.setenv("ODGR_CACHE", str(cache_dir))
    return out


def run_executor(*extra):
    return executor_main(["--domain", "minigrid", "--env_name", CROSSING, "--recognizer", "Graql", "--task", "L1",
                          "--experiment_num", "0", *extra])


def test_executor_writes_report(roots, capsys, crossing_policies):
    assert run_executor() == EXIT_OK
    path = roots / "Graql/minigrid" / CROSSING / "L1/experiment_results/res_0.txt"
    data = parse_text(path.read_text())
    assert data["total"]["total_tasks"] == 24
    printed = capsys.readouterr().out
    assert parse_text(printed.split("\n", 1)[1]) == data
    assert run_executor() == EXIT_OK
    assert sorted(p.name for p in path.parent.iterdir()) == ["res_0.json", "res_0.txt"]


def test_executor_collect_stats(roots):
    assert run_executor("--collect_stats") == EXIT_OK
    debug = roots / "Graql/minigrid" / CROSSING / "L1/debug/res_0"
    assert (debug / "instances.tsv").exists()


def test_executor_capability_exit(roots, capsys):
    code = executor_main(["--domain", "point_maze", "--env_name", "PointMaze-FourRooms", "--recognizer", "Graql",
                          "--task", "L1"])
    assert code == EXIT_CAPABILITY
    assert "capability" in capsys.readouterr().err
    assert not roots.exists()


@pytest.mark.parametrize("argv", [
    [],
    ["--domain", "minigrid", "--env_name", CROSSING, "--recognizer", "Oracle", "--task", "L1"],
    ["--domain", "minigrid", "--env_name", CROSSING, "--recognizer", "Graql", "--task", "L7"],
    ["--domain", "minigrid", "--env_name", CROSSING, "--recognizer", "Graql", "--task", "L1", "--bogus"],
    ["--domain", "minigrid", "--env_name", CROSSING, "--recognizer", "Graql", "--task", "L1", "--workers", "0"],
])
def test_executor_usage_errors(argv, roots):
    with pytest.raises(SystemExit) as info:
        code = executor_main(argv)
        raise SystemExit(code)
    assert info.value.code == EXIT_USAGE


def test_all_experiments_skips_ineligible(roots, capsys, crossing_policies):
    code = all_main(["--envs", CROSSING, "--recognizers", "Graql,GCDraco", "--tasks", "L1"])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert "skip GCDraco" in captured.err
    csv = (roots / "compiled_results.csv").read_text().splitlines()
    assert len(csv) == 1 + 4 * 2


def test_all_experiments_empty_list(roots):
    assert all_main(["--envs", CROSSING, "--recognizers", ","]) == EXIT_USAGE


def test_aggregate_results_cli(roots, capsys, crossing_policies):
    run_executor()
    capsys.readouterr()
    code = aggregate_main(["--env_name", CROSSING, "--recognizers", "Graql", "--tasks", "L1,L2"])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 9
    assert "missing report" in captured.err


def test_tutorial_output(cache_dir):
    buf = io.StringIO()
    pred, actual = graql_minigrid_tutorial(0, cache_dir, buf)
    lines = buf.getvalue().splitlines()
    assert lines == [f"closest_goal returned by Graql: {pred}", "actual goal actor aimed towards: (11, 1)"]
    again = io.StringIO()
    graql_minigrid_tutorial(0, cache_dir, again)
    assert again.getvalue() == buf.getvalue()


def test_tutorial_subcommand(cache_dir, capsys):
    assert main(["tutorial", "graql-minigrid", "--cache", str(cache_dir)]) == EXIT_OK
    assert "closest_goal returned by Graql" in capsys.readouterr().out


@pytest.mark.slow
def test_tutorial_repetitions(cache_dir):
    hits = sum(p == a for p, a in (graql_minigrid_tutorial(s, cache_dir, io.StringIO()) for s in range(30)))
    assert hits >= 27


@pytest.mark.skipif(shutil.which("odgr-executor") is None, reason="console scripts not installed")
def test_console_scripts_exist():
    for script in ("odgr", "odgr-executor", "all-experiments", "aggregate-results"):
        proc = subprocess.run([script, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0, script
        assert "usage" in proc.stdout


def test_module_entry_usage_exit():
    proc = subprocess.run([sys.executable, "-m", "odgr.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
