"""SmoothMap expression trees: pointwise evaluation, jets through the tree,
bump profiles, affine pullbacks, and support metadata."""

import numpy as np
import pytest

from vertstar import smoothfn as sf
from vertstar.smoothfn import eval_jet, evaluate


def fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros(len(x), dtype=complex)
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        g[i] = (evaluate(f, x + e) - evaluate(f, x - e)) / (2 * h)
    return g


def test_polynomial_eval_and_jet():
    f = sf.polynomial({(2, 1): 1.0, (0, 1): 1.0}, 2)
    assert evaluate(f, (1.0, 2.0)) == pytest.approx(4.0)
    j = eval_jet(f, (1.0, 2.0), 3)
    assert j.partial((1, 0)) == pytest.approx(4.0)
    assert j.partial((2, 1)) == pytest.approx(2.0)


def test_arithmetic_overloads_match_pointwise():
    rng = np.random.default_rng(0)
    f = sf.polynomial({(1, 0): 2.0, (0, 2): -1.0}, 2)
    g = sf.coordinate(1, 2)
    for _ in range(5):
        x = rng.uniform(-2, 2, 2)
        assert evaluate(f * g + 3.0, x) == pytest.approx(
            evaluate(f, x) * evaluate(g, x) + 3.0)
        assert evaluate(f - g, x) == pytest.approx(evaluate(f, x) - evaluate(g, x))


def test_quadratic_form():
    A = np.array([[1.0, 0.5], [0.5, -2.0]])
    f = sf.quadratic_form(A)
    x = np.array([0.3, -1.1])
    assert evaluate(f, x) == pytest.approx(x @ A @ x)
    j = eval_jet(f, x, 2)
    assert j.partial((2, 0)) == pytest.approx(2 * A[0, 0])
    assert j.partial((1, 1)) == pytest.approx(2 * A[0, 1])


def test_pullback_affine_chain_rule():
    rng = np.random.default_rng(1)
    f = sf.polynomial({(3, 0): 1.0, (1, 1): -2.0, (0, 2): 0.5}, 2)
    A = rng.uniform(-1, 1, (2, 3))
    b = rng.uniform(-1, 1, 2)
    g = sf.pullback_affine(f, A, b)
    x = rng.uniform(-1, 1, 3)
    assert evaluate(g, x) == pytest.approx(evaluate(f, A @ x + b))
    j = eval_jet(g, x, 2)
    grad_f = fd_gradient(f, A @ x + b)
    for i in range(3):
        e = tuple(int(k == i) for k in range(3))
        assert j.partial(e) == pytest.approx((A.T @ grad_f)[i], rel=1e-6, abs=1e-8)


def test_exp_of_jet():
    f = sf.exp_of(sf.polynomial({(2,): 1.0}, 1))  # exp(x^2)
    x = 0.7
    j = eval_jet(f, (x,), 2)
    assert j.value == pytest.approx(np.exp(x ** 2))
    assert j.partial((1,)) == pytest.approx(2 * x * np.exp(x ** 2))
    assert j.partial((2,)) == pytest.approx((2 + 4 * x ** 2) * np.exp(x ** 2))


def test_bump_plateau_and_support():
    chi = sf.bump_of(sf.coordinate(0, 1), 1.0, 0.5)
    assert evaluate(chi, (0.3,)) == 1.0
    assert evaluate(chi, (-0.99,)) == 1.0
    assert evaluate(chi, (1.51,)) == 0.0
    assert evaluate(chi, (-2.0,)) == 0.0
    mid = evaluate(chi, (1.2,))
    assert 0.0 < np.real(mid) < 1.0
    # even in its argument
    assert evaluate(chi, (1.2,)) == pytest.approx(evaluate(chi, (-1.2,)))


def test_bump_derivatives_match_finite_differences():
    chi = sf.bump_of(sf.coordinate(0, 1), 1.0, 0.5)
    for t in (1.1, 1.25, 1.4):
        j = eval_jet(chi, (t,), 2)
        h = 1e-5
        fd1 = (evaluate(chi, (t + h,)) - evaluate(chi, (t - h,))) / (2 * h)
        fd2 = (evaluate(chi, (t + h,)) - 2 * evaluate(chi, (t,))
               + evaluate(chi, (t - h,))) / h ** 2
        assert abs(j.partial((1,)) - fd1) <= 1e-5 * max(1.0, abs(fd1))
        assert abs(j.partial((2,)) - fd2) <= 1e-4 * max(1.0, abs(fd2))


def test_bump_is_flat_at_plateau_edge():
    chi = sf.bump_of(sf.coordinate(0, 1), 1.0, 0.5)
    j = eval_jet(chi, (1.0,), 4)
    assert np.allclose(j.c[1:], 0.0, atol=1e-12)
    j = eval_jet(chi, (1.5,), 4)
    assert np.allclose(j.c, 0.0, atol=1e-12)


def test_radial_bump_in_two_axes():
    f = sf.radial_bump(3, (1, 2), 1.0, 0.5)
    assert evaluate(f, (9.0, 0.5, 0.5)) == 1.0      # axis 0 irrelevant
    assert evaluate(f, (0.0, 1.2, 1.2)) == 0.0      # norm ~1.7 > 1.5
    inside = evaluate(f, (0.0, 0.9, 0.0))
    assert inside == 1.0
    assert f.support == ((1, 2), 1.5)


def test_derivative_node_matches_fd():
    f = sf.radial_bump(2, (0, 1), 1.0, 0.5)
    df = sf.derivative(f, 0)
    x = np.array([0.8, 0.75])  # in the annulus
    h = 1e-5
    fd = (evaluate(f, x + [h, 0]) - evaluate(f, x - [h, 0])) / (2 * h)
    assert np.real(evaluate(df, x)) == pytest.approx(np.real(fd), rel=1e-5)


def test_conjugate():
    f = sf.polynomial({(1, 0): 1.0 + 2.0j, (0, 1): -1.0j}, 2)
    fc = sf.conjugate(f)
    x = (0.4, -0.3)
    assert evaluate(fc, x) == pytest.approx(np.conj(evaluate(f, x)))


def test_support_propagation():
    chi = sf.radial_bump(2, (0, 1), 1.0, 0.5)
    f = sf.coordinate(0, 2)
    assert (chi * f).support == ((0, 1), 1.5)
    assert (chi + chi).support == ((0, 1), 1.5)
    assert (chi + f).support is None


def test_ball_ramp_vanishes_off_annulus():
    m = sf.ball_ramp(2, (0, 1), 1.0, 0.25)
    assert evaluate(m, (0.5, 0.5)) == 0.0
    assert evaluate(m, (1.0, 1.0)) == 0.0
    mid = evaluate(m, (1.1, 0.0))
    assert mid != 0.0


def test_eval_jet_wrong_dim_raises():
    f = sf.coordinate(0, 2)
    with pytest.raises(ValueError):
        eval_jet(f, (1.0,), 2)
