"""Average stored reports across tasks into one comparison table."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..envs import env_info
from .report import report_dir

CSV_FIELDS = ("env_name", "recognizer", "observability", "trace_type", "accuracy", "tasks")


@dataclass
class Aggregate:
    rows: list
    warnings: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return buf.getvalue()

    def series(self, recognizer: str, trace_type: str) -> list:
        """``(observability, accuracy)`` points for one curve."""
        return [(r["observability"], r["accuracy"]) for r in self.rows
                if r["recognizer"] == recognizer and r["trace_type"] == trace_type]


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def aggregate_results(outputs_root, env_name: str, recognizers, tasks, experiment_num: int = 0,
                      envs=None) -> Aggregate:
    """One row per (environment, recognizer, observability, trace type), averaged over tasks.

    Missing report files go into ``warnings`` and the rest are still averaged.
    ``envs`` widens the table to several environments.
    """
    names = list(envs) if envs else [env_name]
    rows, warnings = [], []
    for env in names:
        info = env_info(env)
        for rec in recognizers:
            buckets: dict = {}
            for task in tasks:
                path = report_dir(outputs_root, rec, info.domain, info.name, task) / f"res_{experiment_num}.json"
                if not path.exists():
                    warnings.append(f"missing report: {path}")
                    continue
                data = load_report(path)
                for level, by_type in data.items():
                    if level == "total":
                        continue
                    for tt, cell in by_type.items():
                        if cell["accuracy"] is not None:
                            buckets.setdefault((level, tt), []).append(cell["accuracy"])
            for (level, tt), accs in buckets.items():
                rows.append({"env_name": info.name, "recognizer": rec, "observability": level, "trace_type": tt,
                             "accuracy": round(sum(accs) / len(accs), 6), "tasks": len(accs)})
    return Aggregate(rows, warnings)
