"""Benchmark engine: the problem registry plus a parallel runner that writes reports."""

from .aggregate import Aggregate, aggregate_results
from .problems import domain_of, list_problems, load_registry, problem_spec
from .report import ExperimentReport, GRTaskResult, format_text, level_key, parse_text, report_dir, write_report
from .runner import enumerate_instances, run_instances, run_odgr

__all__ = [
    "Aggregate", "ExperimentReport", "GRTaskResult", "aggregate_results", "domain_of", "enumerate_instances",
    "format_text", "level_key", "list_problems", "load_registry", "parse_text", "problem_spec", "report_dir",
    "run_instances", "run_odgr", "write_report",
]
