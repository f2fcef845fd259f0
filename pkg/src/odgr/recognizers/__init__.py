"""Goal recognizers and the registry that maps CLI names to them."""

from __future__ import annotations

from ..core import CapabilityError
from ..envs import env_info
from .base import (FINE_TUNED, PROVENANCES, PROVIDED, RECALLED, TRAINED, ZERO_SHOT, GoalLibraryEntry, Recognizer,
                   RecognizerCapability, kl_score, mean_loglik_score, utility_score, zscore_score)
from .graml import ExpertBasedGraml, GCGraml, SequenceEmbedder, pair_auc
from .policy import KL, LOGLIK, UTILITY, ZSCORE, Draco, GCAura, GCDraco, Graql

RECOGNIZERS = {cls.name: cls for cls in (Graql, Draco, GCDraco, GCAura, ExpertBasedGraml, GCGraml)}
_ALIASES = {
    "bggraml": "ExpertBasedGraml", "bg-graml": "ExpertBasedGraml", "gc-draco": "GCDraco",
    "gc-aura": "GCAura", "gc-graml": "GCGraml",
}
CAPABILITIES = {name: cls.capability for name, cls in RECOGNIZERS.items()}


def resolve_recognizer(name: str) -> type:
    """Recognizer class for a registered name or alias (case-insensitive)."""
    key = str(name).strip().lower()
    for registered, cls in RECOGNIZERS.items():
        if registered.lower() == key:
            return cls
    if key in _ALIASES:
        return RECOGNIZERS[_ALIASES[key]]
    raise KeyError(f"unknown recognizer {name!r}; choose from {sorted(RECOGNIZERS)}")


def eligible(recognizer_name: str, env_name: str) -> bool:
    """Whether the recognizer's space and goal-conditioning needs fit the environment."""
    cls = resolve_recognizer(recognizer_name)
    env_info(env_name)
    try:
        cls.capability.check(cls.name, env_name)
    except CapabilityError:
        return False
    return True


def make_recognizer(name: str, env_name: str | None = None, domain_name: str | None = None, **kwargs) -> Recognizer:
    return resolve_recognizer(name)(domain_name, env_name, **kwargs)


__all__ = [
    "CAPABILITIES", "Draco", "ExpertBasedGraml", "FINE_TUNED", "GCAura", "GCDraco", "GCGraml", "GoalLibraryEntry",
    "Graql", "KL", "LOGLIK", "PROVENANCES", "PROVIDED", "RECALLED", "RECOGNIZERS", "Recognizer",
    "RecognizerCapability", "SequenceEmbedder", "TRAINED", "UTILITY", "ZERO_SHOT", "ZSCORE", "eligible",
    "kl_score", "make_recognizer", "mean_loglik_score", "pair_auc", "resolve_recognizer", "utility_score",
    "zscore_score",
]
