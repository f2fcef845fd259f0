"""Command-line entry points.

Console scripts: ``odgr-executor``, ``all-experiments``, ``aggregate-results``
and ``odgr`` (which also carries ``odgr tutorial graql-minigrid``).

Exit codes: 0 success, 1 runtime failure, 2 capability error, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .core import CapabilityError, format_goal

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CAPABILITY = 2
EXIT_USAGE = 64

log = logging.getLogger("odgr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def outputs_root(arg=None) -> Path:
    return Path(arg or os.environ.get("ODGR_OUTPUTS") or "outputs")


def cache_root(arg=None) -> Path:
    return Path(arg or os.environ.get("ODGR_CACHE") or "cache")


def _split(text: str) -> list:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s",
                        stream=sys.stderr)


def _run_guarded(fn, args) -> int:
    try:
        return fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except Exception as exc:  # noqa: BLE001 - the CLI reports every failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


# ---------------------------------------------------------------------------
# odgr-executor
# ---------------------------------------------------------------------------


def _add_common(p) -> None:
    p.add_argument("--workers", type=int, default=1, help="parallel inference workers")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache", default=None, help="policy cache root (default $ODGR_CACHE or ./cache)")
    p.add_argument("--outputs", default=None, help="outputs root (default $ODGR_OUTPUTS or ./outputs)")
    p.add_argument("--traces", type=int, default=1, help="traces per (goal, observability, trace type)")
    p.add_argument("-v", "--verbose", action="store_true")


def executor_parser(prog: str = "odgr-executor") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, description="Run one registered ODGR problem with one recognizer.")
    p.add_argument("--domain", required=True)
    p.add_argument("--env_name", required=True)
    p.add_argument("--recognizer", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--experiment_num", type=int, default=0)
    p.add_argument("--collect_stats", action="store_true", help="dump per-instance traces and renders")
    _add_common(p)
    return p


def _resolve_problem(domain, env_name, recognizer, task):
    from .bench import problem_spec
    from .recognizers import resolve_recognizer
    try:
        cls = resolve_recognizer(recognizer)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    try:
        spec = problem_spec(domain, env_name, task)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    return cls, spec


def run_executor(args) -> int:
    from .bench import report_dir, run_odgr, write_report
    if args.workers < 1 or args.traces < 1:
        raise UsageError("--workers and --traces must be at least 1")
    cls, spec = _resolve_problem(args.domain, args.env_name, args.recognizer, args.task)
    out = outputs_root(args.outputs)
    folder = report_dir(out, cls.name, spec.domain_name, spec.env_name, spec.task_id)
    debug = folder.parent / "debug" / f"res_{args.experiment_num}" if args.collect_stats else None
    report = run_odgr(spec, cls.name, args.workers, args.collect_stats, seed=args.seed,
                      traces_per_condition=args.traces, cache_root=cache_root(args.cache), debug_dir=debug)
    path = write_report(report, out, cls.name, spec.domain_name, spec.env_name, spec.task_id, args.experiment_num)
    print(f"report: {path}")
    print(report.to_text(), end="")
    return EXIT_OK


def executor_main(argv=None) -> int:
    args = executor_parser().parse_args(argv)
    _setup_logging(args.verbose)
    return _run_guarded(run_executor, args)


# ---------------------------------------------------------------------------
# all-experiments
# ---------------------------------------------------------------------------


def all_parser(prog: str = "all-experiments") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, description="Run every eligible (env, recognizer, task) combination.")
    p.add_argument("--envs", required=True, help="comma-separated environment names")
    p.add_argument("--recognizers", required=True, help="comma-separated recognizer names")
    p.add_argument("--tasks", default=None, help="comma-separated tasks (default: all registered)")
    p.add_argument("--experiment_num", type=int, default=0)
    p.add_argument("--csv", default=None, help="compiled CSV path (default <outputs>/compiled_results.csv)")
    _add_common(p)
    return p


def run_all(args) -> int:
    from .bench import aggregate_results, list_problems, problem_spec, run_odgr, write_report
    from .envs import env_info
    from .recognizers import eligible, resolve_recognizer
    envs, recs = _split(args.envs), _split(args.recognizers)
    if not envs or not recs:
        raise UsageError("need at least one environment and one recognizer")
    try:
        envs = [env_info(e).name for e in envs]
        recs = [resolve_recognizer(r).name for r in recs]
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    wanted = set(_split(args.tasks)) if args.tasks else None
    out, cache = outputs_root(args.outputs), cache_root(args.cache)
    all_tasks = set()
    for env in envs:
        tasks = [t for d, e, t in list_problems() if e == env and (wanted is None or t in wanted)]
        if not tasks:
            print(f"skip {env}: no registered tasks", file=sys.stderr)
        for rec in recs:
            if not eligible(rec, env):
                print(f"skip {rec} on {env}: not eligible", file=sys.stderr)
                continue
            for task in tasks:
                spec = problem_spec(env_info(env).domain, env, task)
                report = run_odgr(spec, rec, args.workers, seed=args.seed, traces_per_condition=args.traces,
                                  cache_root=cache)
                path = write_report(report, out, rec, spec.domain_name, env, task, args.experiment_num)
                all_tasks.add(task)
                print(f"{rec} {env} {task}: accuracy {report.total_accuracy:.3f} -> {path}")
    agg = aggregate_results(out, envs[0], recs, sorted(all_tasks), args.experiment_num, envs=envs)
    csv_path = Path(args.csv) if args.csv else out / "compiled_results.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(agg.to_csv())
    print(f"compiled: {csv_path}")
    return EXIT_OK


def all_main(argv=None) -> int:
    args = all_parser().parse_args(argv)
    _setup_logging(args.verbose)
    return _run_guarded(run_all, args)


# ---------------------------------------------------------------------------
# aggregate-results
# ---------------------------------------------------------------------------


def aggregate_parser(prog: str = "aggregate-results") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, description="Average stored reports over tasks into a CSV table.")
    p.add_argument("--env_name", required=True)
    p.add_argument("--recognizers", required=True)
    p.add_argument("--tasks", required=True)
    p.add_argument("--experiment_num", type=int, default=0)
    p.add_argument("--outputs", default=None)
    p.add_argument("--csv", default=None, help="write here instead of standard output")
    return p


def run_aggregate(args) -> int:
    from .bench import aggregate_results
    from .envs import env_info
    recs, tasks = _split(args.recognizers), _split(args.tasks)
    if not recs or not tasks:
        raise UsageError("need at least one recognizer and one task")
    try:
        env_info(args.env_name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    agg = aggregate_results(outputs_root(args.outputs), args.env_name, recs, tasks, args.experiment_num)
    for w in agg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        Path(args.csv).write_text(agg.to_csv())
    else:
        print(agg.to_csv(), end="")
    return EXIT_OK


def aggregate_main(argv=None) -> int:
    args = aggregate_parser().parse_args(argv)
    _setup_logging(False)
    return _run_guarded(run_aggregate, args)


# ---------------------------------------------------------------------------
# tutorial
# ---------------------------------------------------------------------------

TUTORIAL_ENV = "MiniGrid-SimpleCrossingS13N4"
TUTORIAL_GOALS = ((11, 1), (11, 11), (1, 11))


def graql_minigrid_tutorial(seed: int = 0, cache=None, out=None) -> tuple:
    """Adapt Graql to three goals, watch half of a noisy actor run toward (11, 1), and guess.

    Returns ``(predicted_goal, actual_goal)``.
    """
    from .agents import QLEARNING, obtain_policy
    from .bench.runner import ACTOR_SEED_OFFSET
    from .recognizers import Graql
    from .traces import generate_observation, random_subset_with_order

    out = out or sys.stdout
    recognizer = Graql(domain_name="minigrid", env_name=TUTORIAL_ENV, seed=seed, cache_root=cache)
    recognizer.goals_adaptation_phase(dynamic_goals=list(TUTORIAL_GOALS),
                                      dynamic_train_configs=[(QLEARNING, 100000) for _ in TUTORIAL_GOALS])
    actual = TUTORIAL_GOALS[0]
    actor = obtain_policy(f"{TUTORIAL_ENV}-DynamicGoal-{format_goal(actual)}-v0", actual, (QLEARNING, 100000),
                          seed + ACTOR_SEED_OFFSET, cache)
    full = generate_observation(actor, random_optimalism=True, seed=seed)
    partial = random_subset_with_order(full, int(0.5 * len(full)), is_consecutive=False, seed=seed,
                                       observability=0.5)
    result = recognizer.inference_phase(partial, actual, 0.5)
    print(f"closest_goal returned by Graql: {result.predicted_goal}", file=out)
    print(f"actual goal actor aimed towards: {actual}", file=out)
    return result.predicted_goal, actual


def odgr_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="odgr", description="Online dynamic goal recognition benchmark.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, builder in (("executor", executor_parser), ("all-experiments", all_parser),
                          ("aggregate-results", aggregate_parser)):
        child = builder(f"odgr {name}")
        sub.add_parser(name, parents=[child], add_help=False, description=child.description)
    tut = sub.add_parser("tutorial", description="Walk through a small recognition episode.")
    tut.add_argument("name", choices=["graql-minigrid"])
    tut.add_argument("--seed", type=int, default=0)
    tut.add_argument("--cache", default=None)
    return p


def run_tutorial(args) -> int:
    graql_minigrid_tutorial(args.seed, cache_root(args.cache))
    return EXIT_OK


def main(argv=None) -> int:
    args = odgr_parser().parse_args(argv)
    _setup_logging(getattr(args, "verbose", False))
    handler = {"executor": run_executor, "all-experiments": run_all, "aggregate-results": run_aggregate,
               "tutorial": run_tutorial}[args.command]
    return _run_guarded(handler, args)


if __name__ == "__main__":
    sys.exit(main())
