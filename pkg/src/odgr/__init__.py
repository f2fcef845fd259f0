"""Online dynamic goal recognition, with simulated environments and a benchmark executor."""

from .core import (CONSECUTIVE, DEFAULT_OBSERVABILITY, NON_CONSECUTIVE, TRACE_TYPES, CapabilityError,
                   GRInstance, ObservationSequence, ObservationStep, ODGRError, ODGRProblemSpec,
                   RecognitionResult, argmax_with_tiebreak, rank_of)

__version__ = "0.1.0"
