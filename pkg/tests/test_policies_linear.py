import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hdcb.errors import ContractViolation
from hdcb.policies import (LinearActionModel, LinEps, LinUCB, gauss_jordan_inverse, linear_payoff, linear_update,
                           linucb_potential, sherman_morrison_update)


def test_gauss_jordan_matches_numpy(rng):
    m = rng.standard_normal((7, 7)) + 7 * np.eye(7)
    assert np.allclose(gauss_jordan_inverse(m), np.linalg.inv(m), atol=1e-12)
    stack = rng.standard_normal((4, 5, 5))
    assert np.allclose(gauss_jordan_inverse(stack), np.linalg.inv(stack), atol=1e-9)


def test_gauss_jordan_needs_pivoting():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(gauss_jordan_inverse(m), m)


def test_gauss_jordan_singular():
    with pytest.raises(np.linalg.LinAlgError):
        gauss_jordan_inverse(np.ones((3, 3)))


def test_payoff_examples(rng):
    m = LinearActionModel.fresh(4)
    assert linear_payoff(m, rng.random(4)) == 0.0
    one = LinearActionModel.fresh(1)
    linear_update(one, [1.0], 1.0)
    assert one.A[0, 0] == 2.0 and one.b[0] == 1.0
    assert linear_payoff(one, [1.0]) == pytest.approx(0.5)
    m = LinearActionModel.fresh(3)
    for _ in range(5):
        linear_update(m, rng.random(3), float(rng.random()))
    x = rng.random(3)
    assert linear_payoff(m, 2 * x) == pytest.approx(2 * linear_payoff(m, x))


def test_potential_examples(rng):
    m = LinearActionModel.fresh(3)
    for _ in range(4):
        linear_update(m, rng.random(3), 0.7)
    x = rng.random(3)
    assert linucb_potential(m, x, 0.0) == pytest.approx(linear_payoff(m, x))
    e = np.zeros(5)
    e[2] = 1.0
    assert linucb_potential(LinearActionModel.fresh(5), e, 0.8) == pytest.approx(0.8)
    one = LinearActionModel.fresh(1)
    linear_update(one, [1.0], 1.0)
    assert linucb_potential(one, [1.0], 1.0) == pytest.approx(0.5 + math.sqrt(0.5))
    assert linucb_potential(one, [1.0], 1.0) == pytest.approx(1.2071, abs=1e-4)
    with pytest.raises(ContractViolation):
        linucb_potential(one, [1.0], -0.1)


def test_update_examples(rng):
    x = rng.random(4)
    m = LinearActionModel.fresh(4)
    linear_update(m, x, 0.0)
    assert np.array_equal(m.b, np.zeros(4))
    assert np.allclose(m.A, np.eye(4) + np.outer(x, x))
    m = LinearActionModel.fresh(4)
    for _ in range(6):
        linear_update(m, x, 0.2)
    assert np.allclose(m.A, np.eye(4) + 6 * np.outer(x, x))
    with pytest.raises(ContractViolation):
        linear_update(m, np.ones(3), 1.0)


def test_sherman_morrison_tracks_naive_inverse():
    rng = np.random.default_rng(1)
    m = LinearActionModel.fresh(10)
    for _ in range(1000):
        linear_update(m, rng.random(10), float(rng.random()))
    assert np.max(np.abs(m.A_inv - gauss_jordan_inverse(m.A))) < 1e-8
    assert np.max(np.abs(m.A @ m.A_inv - np.eye(10))) < 1e-6


@given(arrays(np.float64, (12, 4), elements=st.floats(-3, 3)))
def test_spd_preserved(xs):
    m = LinearActionModel.fresh(4)
    for x in xs:
        linear_update(m, x, 1.0)
    np.linalg.cholesky(m.A)
    assert np.linalg.eigvalsh(m.A).min() >= 1.0 - 1e-9


@given(arrays(np.float64, 5, elements=st.floats(-2, 2)))
def test_sherman_morrison_single_step(x):
    a_inv = np.eye(5)
    sherman_morrison_update(a_inv, x)
    assert np.allclose(a_inv, np.linalg.inv(np.eye(5) + np.outer(x, x)), atol=1e-10)


def test_select_examples(rng):
    p = LinEps(3, 2, epsilon=0.0)
    assert p.select(rng.random((3, 2)), rng).action == 0
    u = LinUCB(3, 2, alpha=0.0)
    g = LinEps(3, 2, epsilon=0.0)
    for _ in range(20):
        x = rng.random((3, 2))
        a = int(rng.integers(3))
        r = float(rng.random())
        u.update(a, x[a], r)
        g.update(a, x[a], r)
    x = rng.random((3, 2))
    assert u.select(x).action == g.select(x, rng).action
    with pytest.raises(ContractViolation):
        u.select(np.zeros((0, 2)))


def test_linucb_scalar_oracle():
    # action 1 trained ten times on x=[1], r=1: A=11, b=10
    p = LinUCB(2, 1, alpha=0.1)
    for _ in range(10):
        p.update(1, [1.0], 1.0)
    x = np.ones((2, 1))
    d = p.select(x)
    assert d.scores[0] == pytest.approx(0.1)
    assert d.scores[1] == pytest.approx(10 / 11 + 0.1 * math.sqrt(1 / 11))
    assert d.action == 1


@pytest.mark.parametrize("cls,kw", [(LinEps, dict(epsilon=0.2)), (LinUCB, dict(alpha=0.7))])
def test_mode_equivalence(cls, kw):
    data = np.random.default_rng(5)
    naive = cls(5, 10, mode="naive", **kw)
    fast = cls(5, 10, mode="sherman_morrison", **kw)
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    for _ in range(300):
        x = data.random((5, 10))
        d1, d2 = naive.select(x, r1), fast.select(x, r2)
        assert d1.action == d2.action
        assert np.max(np.abs(d1.scores - d2.scores)) < 1e-8
        r = float(data.random())
        naive.update(d1.action, x[d1.action], r)
        fast.update(d2.action, x[d2.action], r)


def test_inversion_instrumentation(rng):
    naive = LinUCB(4, 3, mode="naive")
    fast = LinUCB(4, 3)
    for _ in range(10):
        x = rng.random((4, 3))
        for p in (naive, fast):
            d = p.select(x)
            p.update(d.action, x[d.action], 0.5)
    assert naive.inversions == 40
    assert fast.inversions == 0


def test_model_views_share_storage():
    p = LinEps(2, 3)
    p.update(1, [1.0, 0.0, 0.0], 2.0)
    assert p.models[1].b[0] == 2.0
    assert p._b[1, 0] == 2.0


def test_validation():
    with pytest.raises(ContractViolation):
        LinEps(2, 2, epsilon=2.0)
    with pytest.raises(ContractViolation):
        LinUCB(2, 2, alpha=-1.0)
    with pytest.raises(ContractViolation):
        LinUCB(2, 2, mode="fast")
    with pytest.raises(ContractViolation):
        LinUCB(2, 2).update(5, [0.0, 0.0], 1.0)
