"""Actor observation sequences and their degradation.

How much of a trace is seen is set by the observability level, and whether
it is a prefix or an ordered random subset by the trace type. Suboptimal
behaviour comes from sampling and random actions at generation time, with
optional Gaussian noise on the recorded values.
"""

from __future__ import annotations

import io
import json
import math
import re
import struct

import numpy as np

from .agents import GREEDY, STOCHASTIC_AMPLIFIED, env_for, rollout
from .agents.rollout import AMPLIFICATION
from .core import CONSECUTIVE, NON_CONSECUTIVE, TRACE_TYPES, ObservationSequence, ObservationStep

DEFAULT_NOISE = (0.1, 0.05)

_MAGIC = b"ODGRSEQ1"


def generate_observation(artifact, env=None, selection: str = STOCHASTIC_AMPLIFIED,
                         random_optimalism: bool = True, noise=None, seed: int = 0, *, goal=None,
                         beta: float = AMPLIFICATION, temperature: float | None = None) -> ObservationSequence:
    """Roll ``artifact`` toward its goal and record the full trajectory.

    ``env`` defaults to a fresh environment pinned to the artifact's goal (or
    ``goal`` for a goal-conditioned policy). ``noise=(sigma_s, sigma_a)`` adds
    zero-mean Gaussian noise to the *recorded* values only; the simulation runs
    on the true state. Grid traces get noise on ``x, y`` alone: the facing
    direction and the discrete action stay exact.
    """
    if artifact.untrained:
        raise ValueError("cannot generate observations from an untrained policy")
    if selection not in (GREEDY, STOCHASTIC_AMPLIFIED):
        raise ValueError(f"unknown action selection {selection!r}")
    if env is None:
        env = env_for(artifact, goal)
    rng = np.random.default_rng(seed)
    kwargs = {"beta": beta} if temperature is None else {"beta": beta, "temperature": temperature}
    states, actions, _ = rollout(artifact, env, selection, random_optimalism, rng, **kwargs)
    if noise is not None:
        states, actions = _add_noise(env, states, actions, noise, rng)
    return ObservationSequence.from_arrays(states, actions)


def _add_noise(env, states, actions, noise, rng):
    sigma_s, sigma_a = (float(v) for v in noise)
    if sigma_s < 0 or sigma_a < 0:
        raise ValueError("noise scales must be non-negative")
    if sigma_s == 0 and sigma_a == 0:
        return states, actions
    s = np.array(states, dtype=float)
    if env.continuous:
        s += rng.normal(0.0, sigma_s, s.shape) if sigma_s else 0.0
        a = np.array(actions, dtype=float)
        if sigma_a:
            a = np.clip(a + rng.normal(0.0, sigma_a, a.shape), env.action_space.low, env.action_space.high)
        return [tuple(row) for row in s], [tuple(row) for row in a]
    if sigma_s:
        s[:, :2] += rng.normal(0.0, sigma_s, (len(s), 2))
    noisy = [(float(x), float(y), int(d)) for x, y, d in s]
    return noisy, list(actions)


def random_subset_with_order(seq: ObservationSequence, k: int, is_consecutive: bool, seed: int = 0,
                             observability: float | None = None) -> ObservationSequence:
    """``k`` steps of ``seq``: its prefix, or ``k`` random steps kept in order.

    Source indices always refer to the original full trajectory.
    """
    n = len(seq)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    if is_consecutive:
        picked = np.arange(k)
    else:
        picked = np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    level = observability if observability is not None else k / n
    steps = tuple(seq.steps[i] for i in picked)
    indices = tuple(seq.source_indices[i] for i in picked)
    # a prefix stays consecutive only if the input was
    return ObservationSequence(steps, indices, is_consecutive and seq.is_consecutive, level)


def observed_length(n: int, level: float) -> int:
    if not 0.0 < level <= 1.0:
        raise ValueError(f"observability {level} must lie in (0, 1]")
    # small epsilon keeps e.g. 0.7 * 10 from flooring to 6
    return max(1, int(math.floor(level * n + 1e-9)))


def truncate_by_observability(seq: ObservationSequence, level: float, trace_type: str = CONSECUTIVE,
                              seed: int = 0) -> ObservationSequence:
    """Keep ``max(1, floor(level * len))`` steps as a prefix or an ordered subset."""
    if trace_type not in TRACE_TYPES:
        raise ValueError(f"trace type must be one of {TRACE_TYPES}, got {trace_type!r}")
    k = observed_length(len(seq), level)
    if k == len(seq):
        # full observability keeps the original sequence whatever the trace type
        return ObservationSequence(seq.steps, seq.source_indices, seq.is_consecutive, level)
    return random_subset_with_order(seq, k, trace_type == CONSECUTIVE, seed, observability=level)


# ---------------------------------------------------------------------------
# dump formats
# ---------------------------------------------------------------------------


def _fmt(values) -> str:
    if isinstance(values, tuple):
        return "(" + ",".join(_fmt(v) for v in values) + ")"
    return repr(values)


def dumps_text(seq: ObservationSequence) -> str:
    """One ``t=<idx> s=<state> a=<action>`` line per step."""
    return "".join(f"t={i} s={_fmt(st.state)} a={_fmt(st.action)}\n"
                   for i, st in zip(seq.source_indices, seq.steps))


_LINE = re.compile(r"^t=(\d+) s=\(([^)]*)\) a=(\(([^)]*)\)|\S+)$")


def _num(tok: str):
    tok = tok.strip()
    return float(tok) if any(c in tok for c in ".eEn") else int(tok)


def loads_text(text: str, observability: float = 1.0, is_consecutive: bool | None = None) -> ObservationSequence:
    """Parse :func:`dumps_text` output (trace flags are not part of the text)."""
    steps, indices = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _LINE.match(line.strip())
        if m is None:
            raise ValueError(f"malformed trace line: {line!r}")
        indices.append(int(m.group(1)))
        state = tuple(_num(v) for v in m.group(2).split(","))
        action = tuple(_num(v) for v in m.group(4).split(",")) if m.group(4) is not None else _num(m.group(3))
        steps.append(ObservationStep(state, action))
    if is_consecutive is None:
        is_consecutive = indices == list(range(len(indices)))
    return ObservationSequence(tuple(steps), tuple(indices), is_consecutive, observability)


def to_bytes(seq: ObservationSequence) -> bytes:
    """Lossless binary form: JSON header followed by little-endian float64 arrays."""
    states = np.array([st.state for st in seq.steps], dtype=float)
    acts = [st.action for st in seq.steps]
    vector_actions = isinstance(acts[0], tuple)
    actions = np.array([a if vector_actions else (a,) for a in acts], dtype=float)
    head = {
        "indices": list(seq.source_indices), "is_consecutive": seq.is_consecutive,
        "observability": seq.observability, "state_shape": list(states.shape),
        "action_shape": list(actions.shape), "vector_actions": vector_actions,
        "int_states": [all(isinstance(st.state[j], int) for st in seq.steps) for j in range(states.shape[1])],
        "int_actions": all(isinstance(v, int) for a in acts for v in (a if vector_actions else (a,))),
    }
    blob = json.dumps(head, sort_keys=True, separators=(",", ":")).encode()
    buf = io.BytesIO()
    buf.write(_MAGIC + struct.pack("<I", len(blob)) + blob)
    buf.write(states.astype("<f8").tobytes())
    buf.write(actions.astype("<f8").tobytes())
    return buf.getvalue()


def from_bytes(data: bytes) -> ObservationSequence:
    if not data.startswith(_MAGIC):
        raise ValueError("not a serialized observation sequence")
    (hlen,) = struct.unpack_from("<I", data, len(_MAGIC))
    off = len(_MAGIC) + 4
    head = json.loads(data[off:off + hlen])
    off += hlen
    n_s = int(np.prod(head["state_shape"]))
    states = np.frombuffer(data, "<f8", n_s, off).reshape(head["state_shape"])
    off += 8 * n_s
    n_a = int(np.prod(head["action_shape"]))
    actions = np.frombuffer(data, "<f8", n_a, off).reshape(head["action_shape"])
    int_cols = head["int_states"]
    steps = []
    for s, a in zip(states, actions):
        state = tuple(int(v) if is_int else float(v) for v, is_int in zip(s, int_cols))
        conv = int if head["int_actions"] else float
        action = tuple(conv(v) for v in a) if head["vector_actions"] else conv(a[0])
        steps.append(ObservationStep(state, action))
    return ObservationSequence(tuple(steps), tuple(head["indices"]), head["is_consecutive"],
                               head["observability"])


__all__ = [
    "CONSECUTIVE", "DEFAULT_NOISE", "NON_CONSECUTIVE", "dumps_text", "from_bytes", "generate_observation",
    "loads_text", "observed_length", "random_subset_with_order", "to_bytes", "truncate_by_observability",
]
