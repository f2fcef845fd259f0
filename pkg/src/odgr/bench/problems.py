"""Registry of benchmark problems, keyed domain -> environment -> task."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..core import ODGRProblemSpec
from ..envs import env_info

REGISTRY_FILE = "problems.json"


@lru_cache(maxsize=None)
def _raw() -> dict:
    return json.loads(resources.files(__package__).joinpath(REGISTRY_FILE).read_text())


def load_registry(path=None) -> dict:
    """Raw registry mapping; ``path`` reads an alternative JSON file with the same layout."""
    if path is None:
        return json.loads(json.dumps(_raw()))
    with open(path) as fh:
        return json.load(fh)


def problem_spec(domain: str, env_name: str, task: str, registry: dict | None = None) -> ODGRProblemSpec:
    reg = _raw() if registry is None else registry
    env_name = env_info(env_name).name
    try:
        fields = reg[domain][env_name][task]
    except KeyError:
        raise KeyError(f"no registered problem for domain={domain!r} env={env_name!r} task={task!r}") from None
    return ODGRProblemSpec(
        domain_name=domain, env_name=env_name, task_id=task,
        base_goals=fields.get("base_goals", ()), dynamic_goals=fields["dynamic_goals"],
        train_configs=fields["train_configs"],
        observability_levels=fields.get("observability_levels", (0.3, 0.5, 0.7, 1.0)),
        trace_types=fields.get("trace_types", ("consecutive", "non_consecutive")),
        noise_profile=fields.get("noise_profile"), base_train_config=fields.get("base_train_config"),
        base_region=fields.get("base_region"),
    )


def list_problems(registry: dict | None = None) -> list:
    """All ``(domain, env_name, task)`` triples in registry order."""
    reg = _raw() if registry is None else registry
    return [(d, e, t) for d, envs in reg.items() for e, tasks in envs.items() for t in tasks]


def domain_of(env_name: str) -> str:
    return env_info(env_name).domain
