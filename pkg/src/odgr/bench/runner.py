"""The ODGR execution engine: phases 1 and 2 in-process, inference fanned out to workers."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..agents import obtain_policy
from ..core import CapabilityError, GRInstance
from ..envs import make_env, render_ascii, render_image
from ..recognizers import eligible, make_recognizer, resolve_recognizer
from ..traces import dumps_text, generate_observation, truncate_by_observability
from .report import ExperimentReport, GRTaskResult

log = logging.getLogger(__name__)

# actors train under their own seeds so they never share a policy with the recognizer
ACTOR_SEED_OFFSET = 1000


def _trace_seed(seed: int, goal_index: int, trace_index: int) -> int:
    return 1_000_003 * int(seed) + 1009 * goal_index + trace_index


def enumerate_instances(spec, traces_per_condition: int = 1, seed: int = 0, cache_root=None) -> list:
    """One instance per goal x trace x observability level x trace type, in that nesting order.

    Each ``(goal, trace index)`` pair gets one full actor trace, which every
    condition then truncates.
    """
    if traces_per_condition < 1:
        raise ValueError("traces_per_condition must be at least 1")
    instances = []
    for gi, (goal, config) in enumerate(zip(spec.dynamic_goals, spec.train_configs)):
        try:
            actor = obtain_policy(spec.env_name, goal, config, seed + ACTOR_SEED_OFFSET, cache_root)
        except Exception as exc:
            raise RuntimeError(f"actor training failed for goal {goal}: {exc}") from exc
        for ti in range(traces_per_condition):
            tseed = _trace_seed(seed, gi, ti)
            full = generate_observation(actor, noise=spec.noise_profile, seed=tseed)
            for li, level in enumerate(spec.observability_levels):
                for ki, trace_type in enumerate(spec.trace_types):
                    obs = truncate_by_observability(full, level, trace_type, seed=tseed * 31 + li * 2 + ki)
                    instances.append(GRInstance(spec.dynamic_goals, obs, goal, trace_type, ti,
                                                require_multiple=True))
    return instances


_WORKER_RECOGNIZER = None


def _init_worker(recognizer) -> None:
    global _WORKER_RECOGNIZER
    _WORKER_RECOGNIZER = recognizer


def _evaluate(recognizer, instance: GRInstance) -> tuple:
    res = recognizer.inference_phase(instance.observation, instance.true_goal, instance.observability)
    return res.predicted_goal, res.rank_of_true, res.inference_seconds, dict(res.scores)


def _evaluate_in_worker(instance: GRInstance) -> tuple:
    return _evaluate(_WORKER_RECOGNIZER, instance)


def run_instances(recognizer, instances, parallel_workers: int = 1) -> list:
    """Inference over all instances; results come back in instance order whatever the worker count."""
    if parallel_workers <= 1 or len(instances) <= 1:
        return [_evaluate(recognizer, inst) for inst in instances]
    chunk = max(1, len(instances) // (4 * parallel_workers))
    with ProcessPoolExecutor(parallel_workers, initializer=_init_worker, initargs=(recognizer,)) as pool:
        return list(pool.map(_evaluate_in_worker, instances, chunksize=chunk))


def run_odgr(spec, recognizer_name: str, parallel_workers: int = 1, collect_stats: bool = False, *,
             seed: int = 0, traces_per_condition: int = 1, cache_root=None, debug_dir=None,
             recognizer_options: dict | None = None) -> ExperimentReport:
    """Run every recognizer phase for one registry problem and collect the report."""
    cls = resolve_recognizer(recognizer_name)
    if not eligible(cls.name, spec.env_name):
        # raises the structured error with the reason
        cls.capability.check(cls.name, spec.env_name)
        raise CapabilityError(f"{cls.name} cannot run on {spec.env_name}", recognizer=cls.name,
                              env_name=spec.env_name)
    recognizer = make_recognizer(cls.name, spec.env_name, seed=seed, cache_root=cache_root,
                                 **(recognizer_options or {}))

    base = spec.base_goals or None
    if spec.base_region is not None and cls.capability.requires_gc_env:
        # goal-conditioned learners train over the whole region; prototype-based ones keep the goal list
        base = spec.base_region
    start = time.perf_counter()
    recognizer.domain_learning_phase(base_goals=base, train_config=spec.base_train_config)
    domain_time = time.perf_counter() - start

    start = time.perf_counter()
    recognizer.goals_adaptation_phase(spec.dynamic_goals, spec.train_configs)
    adapt_time = time.perf_counter() - start
    log.info("%s on %s/%s: domain learning %.2fs, adaptation %.2fs", cls.name, spec.env_name, spec.task_id,
             domain_time, adapt_time)

    instances = enumerate_instances(spec, traces_per_condition, seed, cache_root)
    outcomes = run_instances(recognizer, instances, parallel_workers)

    results = [GRTaskResult(inst.true_goal, inst.observability, inst.trace_type, rank == 1, rank, secs)
               for inst, (pred, rank, secs, _) in zip(instances, outcomes)]
    meta = {"recognizer": cls.name, "env_name": spec.env_name, "task": spec.task_id, "seed": seed,
            "provenance": {str(g): e.provenance for g, e in recognizer.library.items()}}
    report = ExperimentReport(results, spec.observability_levels, spec.trace_types, domain_time, adapt_time, meta)
    if collect_stats:
        if debug_dir is None:
            raise ValueError("collect_stats needs a debug directory")
        dump_debug(Path(debug_dir), spec, instances, outcomes)
    return report


def dump_debug(folder: Path, spec, instances, outcomes) -> None:
    """Per-instance trace text, ASCII render and PPM image, plus a summary table."""
    folder.mkdir(parents=True, exist_ok=True)
    rows = ["index\ttrue_goal\tobservability\ttrace_type\tpredicted\trank\tscores"]
    envs = {}
    for i, (inst, (pred, rank, _, scores)) in enumerate(zip(instances, outcomes)):
        stem = folder / f"instance_{i:04d}"
        stem.with_suffix(".trace.txt").write_text(dumps_text(inst.observation))
        env = envs.get(inst.true_goal)
        if env is None:
            env = envs[inst.true_goal] = make_env(spec.env_name, goal=inst.true_goal)
        stem.with_suffix(".ascii.txt").write_text(render_ascii(env, inst.observation) + "\n")
        stem.with_suffix(".ppm").write_bytes(render_image(env, inst.observation))
        score_txt = ";".join(f"{g}={v:.6g}" for g, v in scores.items())
        rows.append(f"{i}\t{inst.true_goal}\t{inst.observability}\t{inst.trace_type}\t{pred}\t{rank}\t{score_txt}")
    (folder / "instances.tsv").write_text("\n".join(rows) + "\n")
