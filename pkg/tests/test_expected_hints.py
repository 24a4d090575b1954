import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hintolo.adversaries import expected_hint_block, random_unit_vectors
from hintolo.core import inner, norm
from hintolo.expected_hints import (
    eh_init,
    eh_play,
    eh_regret_rhs,
    eh_round,
    eh_surrogate_eval,
    eh_surrogate_grad,
    run_eh_batch,
    surrogate_regret,
)


def test_origin_play():
    h = np.array([0.6, 0.8])
    raw, played, projected = eh_play(np.zeros(2), h)
    np.testing.assert_allclose(played, -h / 4)
    assert not projected


def test_unit_iterate_ignores_hint():
    x = np.array([0.0, 1.0])
    _, played, _ = eh_play(x, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(played, x)


def test_surrogate_examples():
    c, h = np.array([1.0, 0.0]), np.array([1.0, 0.0])
    assert eh_surrogate_eval(np.array([0.5, 0.0]), c, h) == pytest.approx(0.3125)
    assert eh_surrogate_eval(np.zeros(2), c, h) == pytest.approx(-0.25)
    assert eh_surrogate_eval(np.array([0.0, 1.0]), c, h) == pytest.approx(0.0)


def test_gradient_matches_finite_difference():
    rng = np.random.default_rng(0)
    x, c, h = rng.uniform(-0.5, 0.5, size=(3, 3))
    g = eh_surrogate_grad(x, c, h)
    eps = 1e-6
    fd = [(eh_surrogate_eval(x + eps * e, c, h) - eh_surrogate_eval(x - eps * e, c, h)) / (2 * eps) for e in np.eye(3)]
    np.testing.assert_allclose(g, fd, atol=1e-8)


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0.1, 1.0))
def test_surrogate_identity_along_trajectory(seed, d, alpha):
    rng = np.random.default_rng(seed)
    state = eh_init(alpha, d)
    for _ in range(40):
        c = random_unit_vectors(d, rng, ()) * rng.uniform()
        h = random_unit_vectors(d, rng, ()) * rng.uniform()
        raw, _, _ = eh_play(state.x_bar, h)
        assert abs(inner(c, raw) - eh_surrogate_eval(state.x_bar, c, h)) <= 1e-12
        assert norm(raw) <= 1 + 1e-12
        _, _, state = eh_round(state, h, c)


def test_batch_matches_scalar():
    rng = np.random.default_rng(5)
    C = random_unit_vectors(2, rng, (60, 3))
    H = expected_hint_block(C, 0.5, 2.0, rng)
    batch = run_eh_batch(C, H, 0.5)
    for j in range(3):
        state = eh_init(0.5, 2)
        for t in range(60):
            played, loss, state = eh_round(state, H[t, j], C[t, j])
            np.testing.assert_allclose(played, batch.played[t, j], atol=1e-14)
            assert loss == pytest.approx(batch.loss[t, j], abs=1e-14)


def test_surrogate_regret_against_self_is_zero():
    rng = np.random.default_rng(6)
    C = random_unit_vectors(2, rng, (30,))
    H = C.copy()
    xs = run_eh_batch(C[:, None], H[:, None], 1.0).x_bar[:, 0]
    fixed = np.broadcast_to(xs[0], xs.shape)
    assert surrogate_regret(C, H, fixed, xs[0]) == pytest.approx(0.0, abs=1e-12)


def test_regret_rhs_value():
    assert eh_regret_rhs(0, 1.0) == pytest.approx(0.5)
    assert eh_regret_rhs(int(np.e**2 - 1), 0.5) == pytest.approx(0.5 + 16 * np.log(int(np.e**2 - 1) + 1))
