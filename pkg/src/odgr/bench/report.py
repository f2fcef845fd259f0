"""Experiment reports: per-condition accuracy plus a totals block, as text and JSON."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ..core import TRACE_TYPES

TIMING_FIELDS = ("total_average_inference_time", "goals_adaptation_time", "domain_learning_time")
TOTAL_FIELDS = ("total_correct", "total_tasks", "total_accuracy") + TIMING_FIELDS


def level_key(level: float) -> str:
    """``"0.3"`` for 0.3 but ``"1"`` for full observability."""
    level = float(level)
    return "1" if level == 1.0 else repr(level)


def round_time(seconds: float) -> float:
    """Millisecond resolution; any measured work shows as at least 1 ms."""
    if seconds <= 0:
        return 0.0
    return max(0.001, round(seconds, 3))


@dataclass(frozen=True)
class GRTaskResult:
    goal: tuple
    observability: float
    trace_type: str
    correct: bool
    rank: int
    inference_seconds: float


@dataclass
class ExperimentReport:
    """Accuracy per ``(observability, trace type)`` bucket and run totals."""

    results: list
    observability_levels: tuple
    trace_types: tuple = TRACE_TYPES
    domain_learning_time: float = 0.0
    goals_adaptation_time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.results:
            if r.observability not in self.observability_levels:
                raise ValueError(f"result observability {r.observability} is not a configured level")
            if r.trace_type not in self.trace_types:
                raise ValueError(f"result trace type {r.trace_type!r} is not configured")

    def bucket(self, level: float, trace_type: str) -> list:
        return [r for r in self.results if r.observability == level and r.trace_type == trace_type]

    def accuracy(self, level: float, trace_type: str) -> float | None:
        rows = self.bucket(level, trace_type)
        return sum(r.correct for r in rows) / len(rows) if rows else None

    @property
    def total_correct(self) -> int:
        return sum(bool(r.correct) for r in self.results)

    @property
    def total_tasks(self) -> int:
        return len(self.results)

    @property
    def total_accuracy(self) -> float:
        return self.total_correct / self.total_tasks if self.results else 0.0

    @property
    def average_inference_time(self) -> float:
        if not self.results:
            return 0.0
        return sum(r.inference_seconds for r in self.results) / len(self.results)

    def to_dict(self, timing: bool = True) -> dict:
        """Nested mapping keyed ``"0.3" .. "1"`` then trace type, plus ``"total"``.

        ``timing=False`` drops the wall-clock fields, leaving only what is a
        pure function of the seed.
        """
        out = {}
        for level in self.observability_levels:
            out[level_key(level)] = {tt: {"accuracy": self.accuracy(level, tt)} for tt in self.trace_types}
        total = {"total_correct": self.total_correct, "total_tasks": self.total_tasks,
                 "total_accuracy": self.total_accuracy}
        if timing:
            total["total_average_inference_time"] = round_time(self.average_inference_time)
            total["goals_adaptation_time"] = round_time(self.goals_adaptation_time)
            total["domain_learning_time"] = round_time(self.domain_learning_time)
        out["total"] = total
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=1) + "\n"

    def to_text(self, timing: bool = True) -> str:
        return format_text(self.to_dict(timing))


def _num(v) -> str:
    if v is None:
        return "None"
    if isinstance(v, float):
        return repr(round(v, 3))
    return repr(v)


def format_text(data: dict) -> str:
    """Human-readable form: one line per observability level, then the totals block."""
    lines = ["{"]
    keys = [k for k in data if k != "total"]
    for k in keys:
        inner = ", ".join(f"'{tt}': {{'accuracy': {_num(v['accuracy'])}}}" for tt, v in data[k].items())
        lines.append(f" '{k}': {{{inner}}},")
    lines.append(" 'total': {")
    total = data["total"]
    items = list(total.items())
    for i, (name, v) in enumerate(items):
        lines.append(f"   '{name}': {_num(v)}" + ("," if i < len(items) - 1 else ""))
    lines.append(" }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> dict:
    """Inverse of :func:`format_text`."""
    import ast
    return ast.literal_eval(text)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_dir(outputs_root, recognizer: str, domain: str, env_name: str, task: str) -> Path:
    return Path(outputs_root) / recognizer / domain / env_name / task / "experiment_results"


def write_report(report: ExperimentReport, outputs_root, recognizer: str, domain: str, env_name: str, task: str,
                 experiment_num: int) -> Path:
    """Write ``res_<n>.txt`` and ``res_<n>.json`` atomically; returns the text path."""
    folder = report_dir(outputs_root, recognizer, domain, env_name, task)
    txt = folder / f"res_{int(experiment_num)}.txt"
    _atomic_write(txt, report.to_text())
    _atomic_write(folder / f"res_{int(experiment_num)}.json", report.to_json())
    return txt
