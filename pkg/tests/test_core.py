import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hintolo.core import (
    InvalidCostError,
    InvalidInputError,
    InvalidParameterError,
    PrefixState,
    ball_objective,
    ball_regularized_argmin,
    best_fixed_comparator,
    check_costs,
    log_ratio_sum,
    norm,
    project_to_ball,
    query_cost_of_trace,
    regret_of_trace,
)

from conftest import make_record

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize(
    "v, expected",
    [((0.3, 0.4), (0.3, 0.4)), ((3.0, 4.0), (0.6, 0.8)), ((0.0, 0.0), (0.0, 0.0))],
)
def test_project_to_ball_examples(v, expected):
    np.testing.assert_allclose(project_to_ball(v), expected, atol=1e-15)


def test_project_to_ball_rejects_nan():
    with pytest.raises(InvalidInputError):
        project_to_ball([np.nan, 0.0])


@given(arrays(float, st.integers(1, 6), elements=finite))
def test_projection_lands_in_ball_and_is_idempotent(v):
    p = project_to_ball(v)
    assert norm(p) <= 1 + 1e-12
    np.testing.assert_allclose(project_to_ball(p), p, atol=1e-14)


@pytest.mark.parametrize(
    "g, r, expected",
    [((0.0, 0.0), 1.0, (0.0, 0.0)), ((3.0, 4.0), 1.0, (-0.6, -0.8)), ((0.5, 0.0), 2.0, (-0.25, 0.0))],
)
def test_argmin_examples(g, r, expected):
    np.testing.assert_allclose(ball_regularized_argmin(g, r), expected, atol=1e-15)


@pytest.mark.parametrize("r", [0.0, -1.0, np.nan])
def test_argmin_rejects_bad_radius(r):
    with pytest.raises(InvalidParameterError):
        ball_regularized_argmin((1.0, 0.0), r)


@given(arrays(float, 3, elements=st.floats(-5, 5)), st.floats(0.05, 5), st.integers(0, 2**31))
def test_argmin_beats_random_ball_points(g, r, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((2000, 3))
    pts = pts / norm(pts)[:, None] * rng.uniform(size=(2000, 1)) ** (1 / 3)
    x = ball_regularized_argmin(g, r)
    assert norm(x) <= 1 + 1e-12
    assert ball_objective(x, g, r) <= ball_objective(pts, g, r).min() + 1e-12


@pytest.mark.parametrize(
    "costs, u, v",
    [
        ([(1, 0), (0, 1)], (-1 / math.sqrt(2), -1 / math.sqrt(2)), -math.sqrt(2)),
        ([(1, 0), (-1, 0)], (0, 0), 0.0),
        ([(1, 0), (1, 0), (1, 0)], (-1, 0), -3.0),
    ],
)
def test_best_fixed_comparator_examples(costs, u, v):
    got_u, got_v = best_fixed_comparator(costs)
    np.testing.assert_allclose(got_u, u, atol=1e-15)
    assert got_v == pytest.approx(v, abs=1e-15)


def test_best_fixed_comparator_rejects_empty():
    with pytest.raises(InvalidInputError):
        best_fixed_comparator(np.zeros((0, 2)))


def test_check_costs_rejects_long_vector():
    with pytest.raises(InvalidCostError):
        check_costs([1.0, 1.0])


def test_regret_zero_plays():
    recs = [make_record(t + 1, (1, 0), (0, 0)) for t in range(2)]
    assert regret_of_trace(recs) == pytest.approx(2.0)


def test_regret_negated_orthogonal_costs():
    recs = [make_record(1, (1, 0), (-1, 0)), make_record(2, (0, 1), (0, -1))]
    assert regret_of_trace(recs) == pytest.approx(-2 + math.sqrt(2), abs=1e-15)


def test_regret_empty_trace():
    assert regret_of_trace([]) == 0.0


def test_query_cost_example():
    recs = [
        make_record(1, (1, 0), (0, 0), queried=True),
        make_record(2, (0, 1), (0, 0)),
        make_record(3, (0.5, 0), (0, 0), queried=True),
    ]
    assert query_cost_of_trace(recs, 0.5) == pytest.approx(0.625)


def test_query_cost_counts_abstentions():
    recs = [make_record(t + 1, (1, 0), (0, 0), abstained=True) for t in range(5)]
    assert query_cost_of_trace(recs, 1.0) == pytest.approx(5.0)
    assert query_cost_of_trace(recs[:0], 1.0) == 0.0


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_query_cost_rejects_alpha(alpha):
    with pytest.raises(InvalidParameterError):
        query_cost_of_trace([], alpha)


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=200))
def test_log_ratio_sum_below_log(a):
    a = np.array(a)
    assert log_ratio_sum(a) <= math.log1p(a.sum()) + 1e-12


def test_prefix_state_advance():
    s = PrefixState.zero(2).advance((0.6, 0.8)).advance((0.0, -0.5))
    assert s.t == 2
    np.testing.assert_allclose(s.cost_sum, (0.6, 0.3))
    assert s.sigma_sum == pytest.approx(1.25)
    assert s.cost_norm == pytest.approx(math.hypot(0.6, 0.3))
