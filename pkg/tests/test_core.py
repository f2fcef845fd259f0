import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from odgr.core import (Box, Discrete, GRInstance, MultiDiscrete, ObservationSequence, ObservationStep,
                       ODGRProblemSpec, RecognitionResult, argmax_with_tiebreak, as_goal, contains, format_goal,
                       rank_of)


def test_discrete_membership():
    assert contains(Discrete(4), 2)
    assert not contains(Discrete(4), 4)


def test_box_bounds_are_closed():
    box = Box((0, 0), (1, 1))
    assert contains(box, (0, 0))
    assert contains(box, (1, 1))
    assert not contains(box, (0.5, 1.5))


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        contains(Box((0, 0), (1, 1)), (0.5,))
    with pytest.raises(ValueError):
        MultiDiscrete((3, 3)).contains((1, 1, 1))


def test_box_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Box((1, 0), (0, 1))


def test_goal_normalisation():
    assert as_goal([11, 1]) == (11, 1)
    assert as_goal("11x1") == (11, 1)
    assert as_goal(np.array([7.5, 2.5])) == (7.5, 2.5)
    assert format_goal((11, 1)) == "11x1"
    assert format_goal((7.5, 7.5)) == "7.5x7.5"


def test_argmax_picks_largest():
    assert argmax_with_tiebreak({"g1": 0.2, "g2": 0.9}) == "g2"
    assert argmax_with_tiebreak({"g1": -3.7}) == "g1"


def test_argmax_tie_goes_to_goal_order():
    assert argmax_with_tiebreak({"g1": 0.5, "g2": 0.5}, ["g1", "g2"]) == "g1"
    assert argmax_with_tiebreak({"g1": 0.5, "g2": 0.5}, ["g2", "g1"]) == "g2"


def test_argmax_empty_raises():
    with pytest.raises(ValueError):
        argmax_with_tiebreak({})


def test_rank_examples():
    scores = {"g1": 0.9, "g2": 0.1}
    assert rank_of(scores, "g2") == 2
    assert rank_of(scores, "g1") == 1
    equal = {"a": 1.0, "b": 1.0, "c": 1.0}
    assert rank_of(equal, "b", ["a", "b", "c"]) == 2
    with pytest.raises(KeyError):
        rank_of(scores, "g3")


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=8))
def test_rank_is_a_bijection(values):
    goals = [f"g{i}" for i in range(len(values))]
    scores = dict(zip(goals, map(float, values)))
    ranks = sorted(rank_of(scores, g, goals) for g in goals)
    assert ranks == list(range(1, len(goals) + 1))
    best = argmax_with_tiebreak(scores, goals)
    assert rank_of(scores, best, goals) == 1


def test_sequence_validation():
    step = ObservationStep((1, 1, 0), 2)
    with pytest.raises(ValueError):
        ObservationSequence(())
    with pytest.raises(ValueError):
        ObservationSequence((step, step), (1, 0), is_consecutive=False)
    with pytest.raises(ValueError):
        ObservationSequence((step, step), (0, 2), is_consecutive=True)
    with pytest.raises(ValueError):
        ObservationSequence((step,), observability=0.0)
    seq = ObservationSequence((step, step), (0, 5), is_consecutive=False, observability=0.5)
    assert len(seq) == 2 and seq.source_indices == (0, 5)


def test_step_coerces_numpy_values():
    step = ObservationStep(np.array([1, 2, 0]), np.int64(3))
    assert step.state == (1, 2, 0) and isinstance(step.state[0], int)
    assert step.action == 3 and isinstance(step.action, int)


def test_instance_requires_true_goal_in_set():
    seq = ObservationSequence((ObservationStep((1, 1, 0), 2),))
    with pytest.raises(ValueError):
        GRInstance(((1, 1), (2, 2)), seq, (3, 3))
    with pytest.raises(ValueError):
        GRInstance(((1, 1),), seq, (1, 1), require_multiple=True)
    assert GRInstance(((1, 1),), seq, (1, 1)).observability == 1.0


def test_problem_spec_invariants():
    spec = ODGRProblemSpec("minigrid", "MiniGrid-SimpleCrossingS13N4", (), [(11, 1), (11, 11), (1, 11)],
                           [("QLEARNING", 1000)])
    assert spec.train_configs == (("QLEARNING", 1000),) * 3
    assert spec.observability_levels == (0.3, 0.5, 0.7, 1.0)
    with pytest.raises(ValueError):
        ODGRProblemSpec("minigrid", "x", (), [(1, 1), (2, 2)], [("QLEARNING", 1)])
    with pytest.raises(ValueError):
        ODGRProblemSpec("minigrid", "x", (), [(1, 1), (2, 2), (3, 3)], [("QLEARNING", 1)],
                        observability_levels=(0.0, 1.0))
    with pytest.raises(ValueError):
        ODGRProblemSpec("minigrid", "x", (), [(1, 1), (2, 2), (3, 3)], [("QLEARNING", 1)],
                        trace_types=("sideways",))


def test_recognition_result_correctness_flag():
    assert RecognitionResult((1, 1), {(1, 1): 0.0}, ((1, 1),), 1).correct
    assert RecognitionResult((1, 1), {(1, 1): 0.0}, ((1, 1),)).correct is None
    assert not math.isnan(RecognitionResult((1, 1), {}, ()).inference_seconds)
