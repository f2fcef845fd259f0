"""Trained-policy artifacts and their binary serialization."""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import ODGRError, as_goal
from .tabular import QTable
from .tiles import TileCodedQ, TileCoder

TABULAR = "tabular"
TILE_CODED = "tile-coded"
GC_TILE_CODED = "gc-tile-coded"
KINDS = (TABULAR, TILE_CODED, GC_TILE_CODED)

GC = "gc"

MAGIC = b"ODGRPOL1"
FORMAT_VERSION = 1


class CorruptArtifact(ODGRError):
    """Stored artifact bytes fail validation (bad header or checksum mismatch)."""


@dataclass(frozen=True)
class PolicyArtifact:
    """An immutable trained policy plus the provenance needed to cache it."""

    kind: str
    env_name: str
    goal: object
    algorithm: str
    timesteps: int
    payload: object
    seed: int = 0
    env_kwargs: tuple = ()
    meta: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown artifact kind {self.kind!r}")
        if self.goal != GC:
            object.__setattr__(self, "goal", as_goal(self.goal))

    @property
    def goal_conditioned(self) -> bool:
        return self.kind == GC_TILE_CODED

    @property
    def untrained(self) -> bool:
        return self.payload.trained_steps == 0

    @property
    def n_actions(self) -> int:
        return self.payload.n_actions

    @property
    def decision_interval(self) -> int:
        """Physics steps each chosen action is held for (1 for grid policies)."""
        return 1 if self.kind == TABULAR else self.payload.repeat

    @property
    def info(self) -> dict:
        return dict(self.meta)

    def with_meta(self, **items) -> "PolicyArtifact":
        merged = dict(self.meta)
        merged.update(items)
        return replace(self, meta=tuple(sorted(merged.items())))

    def q_values(self, state, goal=None):
        """Action values at ``state`` or ``None`` for a state the table never saw."""
        if self.kind == TABULAR:
            key = tuple(int(round(v)) for v in state)
            return self.payload.get(key)
        if self.goal_conditioned:
            if goal is None:
                raise ValueError("a goal-conditioned policy needs a goal")
            return self.payload.q(state, goal)
        return self.payload.q(state)

    # -- serialization ------------------------------------------------------

    def payload_bytes(self) -> bytes:
        p = self.payload
        if self.kind == TABULAR:
            head = {"keys": [list(k) for k in p.keys], "n_actions": p.n_actions, "gamma": p.gamma,
                    "trained_steps": p.trained_steps, "shape": list(p.values.shape)}
            arrays = [p.values]
        else:
            head = {"coder": p.coder.params(), "goal_keys": [list(k) for k in p.goal_keys], "gamma": p.gamma,
                    "max_force": p.max_force, "trained_steps": p.trained_steps, "repeat": p.repeat,
                    "shape": list(p.weights.shape)}
            arrays = [p.weights]
        head["meta"] = [list(kv) for kv in self.meta]
        head["env_kwargs"] = [list(kv) for kv in self.env_kwargs]
        head["seed"] = self.seed
        buf = io.BytesIO()
        blob = json.dumps(head, sort_keys=True, separators=(",", ":")).encode()
        buf.write(struct.pack("<I", len(blob)))
        buf.write(blob)
        for arr in arrays:
            buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return buf.getvalue()

    def to_bytes(self) -> bytes:
        payload = self.payload_bytes()
        header = {"kind": self.kind, "env": self.env_name,
                  "goal": self.goal if self.goal == GC else list(self.goal),
                  "algo": self.algorithm, "timesteps": self.timesteps,
                  "checksum": hashlib.sha256(payload).hexdigest(), "payload_len": len(payload)}
        blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
        return MAGIC + struct.pack("<HI", FORMAT_VERSION, len(blob)) + blob + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "PolicyArtifact":
        if not data.startswith(MAGIC):
            raise CorruptArtifact("bad magic")
        try:
            version, hlen = struct.unpack_from("<HI", data, len(MAGIC))
            offset = len(MAGIC) + 6
            header = json.loads(data[offset:offset + hlen])
            payload = data[offset + hlen:]
        except (struct.error, ValueError) as exc:
            raise CorruptArtifact(f"unreadable header: {exc}") from exc
        if version != FORMAT_VERSION:
            raise CorruptArtifact(f"unsupported format version {version}")
        if len(payload) != header["payload_len"] or hashlib.sha256(payload).hexdigest() != header["checksum"]:
            raise CorruptArtifact("checksum mismatch")
        (plen,) = struct.unpack_from("<I", payload, 0)
        head = json.loads(payload[4:4 + plen])
        arr = np.frombuffer(payload[4 + plen:], dtype="<f8").astype(np.float64).reshape(head["shape"])
        if header["kind"] == TABULAR:
            body = QTable([tuple(k) for k in head["keys"]], arr, head["n_actions"], head["gamma"],
                          head["trained_steps"])
        else:
            coder = TileCoder(**head["coder"])
            body = TileCodedQ(coder, head["goal_keys"], arr, head["gamma"], head["max_force"],
                              head["trained_steps"], head["repeat"])
        goal = header["goal"]
        return cls(header["kind"], header["env"], GC if goal == GC else as_goal(goal), header["algo"],
                   header["timesteps"], body, seed=head["seed"],
                   env_kwargs=tuple(tuple(kv) for kv in head["env_kwargs"]),
                   meta=tuple(tuple(kv) for kv in head["meta"]))

    def digest(self) -> str:
        return hashlib.sha256(self.payload_bytes()).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, PolicyArtifact) and self.to_bytes() == other.to_bytes()

    def __hash__(self) -> int:
        return hash(self.digest())
