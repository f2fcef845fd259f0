"""A miniature benchmark: several recognizers, one registered problem, one CSV.

This is what the ``odgr-executor`` and ``aggregate-results`` commands do,
driven from Python instead of the shell.

Run:  python demos/04_benchmark_run.py
"""

# %%
import os
from pathlib import Path

from odgr.bench import aggregate_results, problem_spec, run_odgr, write_report
from odgr.recognizers import eligible

CACHE = os.environ.get("ODGR_CACHE", "cache")
OUT = Path(os.environ.get("ODGR_OUTPUTS", "outputs"))
ENV = "PointMaze-FourRooms"

# %% [markdown]
# Level-1 task: three goals near the corners, one trace per condition, so
# 3 goals x 4 observability levels x 2 trace types = 24 recognition problems.

# %%
spec = problem_spec("point_maze", ENV, "L1")
print(spec.dynamic_goals, spec.observability_levels, spec.trace_types)

# %%
names = [n for n in ("Graql", "Draco", "GCDraco", "GCGraml") if eligible(n, ENV)]
print("eligible here:", names)
for name in names:
    report = run_odgr(spec, name, seed=0, cache_root=CACHE)
    path = write_report(report, OUT, name, spec.domain_name, ENV, spec.task_id, 0)
    print(f"{name:<8} accuracy {report.total_accuracy:.3f}  -> {path}")

# %% [markdown]
# The stored text report mirrors a nested mapping keyed by observability.

# %%
print(path.read_text())

# %% [markdown]
# Aggregation averages each (observability, trace type) cell over tasks.

# %%
agg = aggregate_results(OUT, ENV, names, ["L1"])
print(agg.to_csv())
for name in names:
    print(name, agg.series(name, "consecutive"))
