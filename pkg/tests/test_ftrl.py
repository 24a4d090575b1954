import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hintolo.adversaries import random_unit_vectors
from hintolo.core import InvalidCostError, inner, norm
from hintolo.ftrl import (
    ftl_telescoping_gap,
    ftrl_init,
    ftrl_update,
    largest_small_prefix,
    part1_rhs,
    part2_rhs,
    prefix_regrets,
    run_ftrl,
    stability_violations,
)


def random_costs(seed, T, d, n=None):
    rng = np.random.default_rng(seed)
    shape = (T,) if n is None else (T, n)
    return random_unit_vectors(d, rng, shape) * rng.uniform(size=shape + (1,))


def test_first_update():
    s = ftrl_update(ftrl_init(2), (1.0, 0.0))
    np.testing.assert_allclose(s.x_next, (-1 / math.sqrt(2), 0.0), atol=1e-15)


def test_second_update_hits_boundary():
    s = ftrl_update(ftrl_update(ftrl_init(2), (1.0, 0.0)), (1.0, 0.0))
    np.testing.assert_allclose(s.x_next, (-1.0, 0.0), atol=1e-15)


def test_zero_costs_stay_at_origin():
    s = ftrl_init(3)
    for _ in range(7):
        s = ftrl_update(s, np.zeros(3))
    np.testing.assert_array_equal(s.x_next, np.zeros(3))


def test_update_rejects_long_cost():
    with pytest.raises(InvalidCostError):
        ftrl_update(ftrl_init(2), (2.0, 0.0))


def test_run_ftrl_matches_stepwise():
    C = random_costs(1, 40, 3)
    xs = run_ftrl(C)
    s = ftrl_init(3)
    for t in range(40):
        np.testing.assert_allclose(xs[t], s.x_next, atol=1e-15)
        s = ftrl_update(s, C[t])
    np.testing.assert_allclose(xs[40], s.x_next, atol=1e-15)


def test_run_ftrl_batch_matches_single():
    C = random_costs(2, 30, 2, n=5)
    xs = run_ftrl(C)
    for j in range(5):
        np.testing.assert_allclose(xs[:, j], run_ftrl(C[:, j]), atol=1e-15)


def test_largest_small_prefix_collinear():
    assert largest_small_prefix(np.tile([1.0, 0.0], (10, 1)), 1.0) == 0


def test_largest_small_prefix_cancelling():
    assert largest_small_prefix(np.array([[1.0, 0.0], [-1.0, 0.0]]), 1.0) == 2


def test_largest_small_prefix_empty():
    assert largest_small_prefix(np.zeros((0, 2)), 0.5) == 0


@given(st.integers(0, 2**31), st.integers(1, 300), st.sampled_from([1, 2, 4, 8]))
def test_part1_every_prefix(seed, T, d):
    C = random_costs(seed, T, d)
    xs = run_ftrl(C)
    assert np.all(prefix_regrets(C, xs[:-1]) <= part1_rhs(np.cumsum(inner(C, C))) + 1e-9)


@given(st.integers(0, 2**31), st.integers(1, 300), st.sampled_from([0.25, 0.5, 1.0]))
def test_part2_full_horizon(seed, T, alpha):
    C = random_costs(seed, T, 2)
    xs = run_ftrl(C)
    assert prefix_regrets(C, xs[:-1])[-1] <= part2_rhs(C, xs[:-1], alpha) + 1e-9


@given(st.integers(0, 2**31), st.integers(1, 200), st.sampled_from([0.1, 0.5, 1.0]))
def test_stability_never_violated(seed, T, alpha):
    C = random_costs(seed, T, 3)
    counts = stability_violations(C, run_ftrl(C), alpha)
    assert all(int(np.sum(v)) == 0 for v in counts.values())


@given(st.integers(0, 2**31), st.integers(1, 100))
def test_telescoping_gap_nonnegative(seed, T):
    C = random_costs(seed, T, 2)
    xs = run_ftrl(C)
    u = random_unit_vectors(2, np.random.default_rng(seed + 1), ())
    for m in (0, T // 2, T):
        assert ftl_telescoping_gap(C, xs, m, u) >= -1e-9


def test_part1_rhs_value():
    assert part1_rhs(3.0) == pytest.approx(9.0)


def test_plays_stay_in_ball():
    xs = run_ftrl(random_costs(5, 500, 4, n=3))
    assert np.all(norm(xs) <= 1 + 1e-12)
