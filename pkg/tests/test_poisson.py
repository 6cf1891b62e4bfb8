"""Vertical multivector fields: Schouten bracket laws, the Jacobi identity for
the shipped constructors, the HKR map, and the structural checks."""

import numpy as np
import pytest

from vertstar import poisson, smoothfn as sf
from vertstar.poisson import (
    VerticalMultivector,
    build_ball_compact_theta,
    build_commuting_compact_theta,
    check_flip_even,
    check_rotation_invariance,
    check_support,
    constant_theta,
    fiber_samples,
    hkr,
    jacobi_defect,
    lie_linear_theta,
    naive_scaled_theta,
    poisson_bracket,
    restrict_to_fiber,
    schouten,
    wedge,
)
from vertstar.smoothfn import evaluate

STD2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
STD4 = np.zeros((4, 4))
STD4[0, 1] = STD4[2, 3] = 1.0
STD4[1, 0] = STD4[3, 2] = -1.0


def vector_field(n, comps):
    """Degree-1 vertical multivector from {axis: SmoothMap} on (p, v)."""
    return VerticalMultivector(n, 1, {(i,): f for i, f in comps.items()})


def components_close(X, Y, samples, atol=1e-9):
    keys = set(X.components) | set(Y.components)
    for x in samples:
        for k in keys:
            a = evaluate(X.components[k], x) if k in X.components else 0.0
            b = evaluate(Y.components[k], x) if k in Y.components else 0.0
            if abs(a - b) > atol:
                return False
    return True


def test_component_antisymmetry_lookup():
    th = constant_theta(2, STD2)
    assert evaluate(th.component((0, 1)), np.zeros(4)) == pytest.approx(1.0)
    assert evaluate(th.component((1, 0)), np.zeros(4)) == pytest.approx(-1.0)
    assert th.component((0, 0)) is None


def test_poisson_bracket_constant_theta():
    th = constant_theta(2, STD2)
    f = sf.coordinate(2, 4)  # v^0
    g = sf.coordinate(3, 4)  # v^1
    x = np.array([0.1, -0.2, 0.5, 0.7])
    # {v^0, v^1} = Theta^{01}, matching the commutator [v^0, v^1] = i lambda Theta^{01}
    assert poisson_bracket(th, f, g, x) == pytest.approx(1.0)
    assert poisson_bracket(th, g, f, x) == pytest.approx(-1.0)


def test_schouten_of_commuting_coordinate_fields_vanishes():
    n = 2
    X = vector_field(n, {0: sf.constant(1.0, 2 * n)})
    Y = vector_field(n, {1: sf.constant(1.0, 2 * n)})
    B = schouten(X, Y)
    assert all(
        evaluate(f, np.zeros(2 * n)) == 0 for f in B.components.values()) or not B.components


def test_schouten_antisymmetry_degree_one():
    n = 2
    rng = np.random.default_rng(0)
    v0, v1 = sf.coordinate(2, 4), sf.coordinate(3, 4)
    X = vector_field(n, {0: v0 * v1, 1: v1})
    Y = vector_field(n, {0: v1 * v1, 1: v0})
    samples = rng.uniform(-1, 1, (10, 4))
    lhs = schouten(X, Y)
    rhs = schouten(Y, X)
    for x in samples:
        for k in set(lhs.components) | set(rhs.components):
            a = evaluate(lhs.components[k], x) if k in lhs.components else 0.0
            b = evaluate(rhs.components[k], x) if k in rhs.components else 0.0
            assert abs(a + b) < 1e-9


def test_schouten_leibniz_vector_on_wedge():
    # [[X, Y ^ Z]] = [[X, Y]] ^ Z + Y ^ [[X, Z]] for vector fields
    n = 3
    rng = np.random.default_rng(1)
    dim = 2 * n
    v = [sf.coordinate(n + i, dim) for i in range(n)]
    X = vector_field(n, {0: v[1] * v[2], 2: v[0]})
    Y = vector_field(n, {1: v[0] * v[0], 2: v[1]})
    Z = vector_field(n, {0: v[2], 1: v[1] * v[2]})
    lhs = schouten(X, wedge(Y, Z))
    r1 = wedge(schouten(X, Y), Z)
    r2 = wedge(Y, schouten(X, Z))
    samples = rng.uniform(-1, 1, (8, dim))
    for x in samples:
        keys = set(lhs.components) | set(r1.components) | set(r2.components)
        for k in keys:
            a = evaluate(lhs.components[k], x) if k in lhs.components else 0.0
            b = evaluate(r1.components[k], x) if k in r1.components else 0.0
            c = evaluate(r2.components[k], x) if k in r2.components else 0.0
            assert abs(a - b - c) < 1e-9


def test_jacobi_constant_and_linear():
    rng = np.random.default_rng(2)
    samples = rng.uniform(-1, 1, (50, 8))
    assert jacobi_defect(constant_theta(4, STD4), samples) < 1e-12
    # so(3) structure constants: c^{ij}_k = epsilon_{ijk}
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                         ((1, 0, 2), -1), ((2, 1, 0), -1), ((0, 2, 1), -1)):
        eps[i, j, k] = s
    th = lie_linear_theta(3, eps)
    assert jacobi_defect(th, rng.uniform(-1, 1, (50, 6))) < 1e-12


def test_jacobi_commuting_compact():
    th = build_commuting_compact_theta(4, STD4, 1.0, 0.25)
    samples = fiber_samples(th, 200, seed=0, radius=1.3)
    assert jacobi_defect(th, samples) < 1e-9


def test_jacobi_ball_compact():
    th = build_ball_compact_theta(4, STD4, 1.0, 0.25)
    samples = fiber_samples(th, 60, seed=0)
    assert jacobi_defect(th, samples) < 1e-9


def test_naive_scaled_theta_fails_jacobi():
    th = naive_scaled_theta(4, STD4, 1.0, 0.25)
    samples = fiber_samples(th, 200, seed=0)
    assert jacobi_defect(th, samples) > 1e-3


def test_naive_scaled_theta_is_poisson_for_two_dim_fibers():
    # top-degree bracket vanishes identically in 2-dim fibers
    th = naive_scaled_theta(2, STD2, 1.0, 0.25)
    samples = fiber_samples(th, 100, seed=1)
    assert jacobi_defect(th, samples) < 1e-12


def test_restriction_is_wedge_homomorphism():
    n = 2
    dim = 2 * n
    v = [sf.coordinate(n + i, dim) for i in range(n)]
    p0 = sf.coordinate(0, dim)
    X = vector_field(n, {0: v[1] + p0, 1: v[0] * v[1]})
    Y = vector_field(n, {0: v[0], 1: p0 * v[1]})
    p = np.array([0.4, -0.7])
    rng = np.random.default_rng(3)
    fiber_pts = rng.uniform(-1, 1, (10, n))
    lhs = restrict_to_fiber(wedge(X, Y), p)
    rhs = wedge(restrict_to_fiber(X, p), restrict_to_fiber(Y, p))
    assert components_close(lhs, rhs, fiber_pts)
    lhs = restrict_to_fiber(schouten(X, Y), p)
    rhs = schouten(restrict_to_fiber(X, p), restrict_to_fiber(Y, p))
    assert components_close(lhs, rhs, fiber_pts)


def test_hkr_degree_one_is_directional_derivative():
    n = 2
    dim = 2 * n
    v0, v1 = sf.coordinate(n, dim), sf.coordinate(n + 1, dim)
    X = vector_field(n, {0: v1, 1: sf.constant(2.0, dim)})
    f = v0 * v0 + v1
    op = hkr(X)
    x = np.array([0.0, 0.0, 0.5, -0.3])
    # X f = v1 * 2 v0 + 2 * 1
    assert op([f], x) == pytest.approx(-0.3 * 1.0 + 2.0)


def test_hkr_antisymmetrization_is_poisson_bracket():
    th = build_commuting_compact_theta(2, STD2, 1.0, 0.25)
    op = hkr(th)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = np.concatenate([rng.uniform(-1, 1, 2), rng.uniform(-1.3, 1.3, 2)])
        f = sf.polynomial({(0, 0, 2, 0): rng.uniform(-1, 1),
                           (0, 0, 1, 1): rng.uniform(-1, 1)}, 4)
        g = sf.polynomial({(0, 0, 0, 2): rng.uniform(-1, 1),
                           (0, 0, 1, 0): rng.uniform(-1, 1)}, 4)
        lhs = op([f, g], x) - op([g, f], x)
        assert abs(lhs - poisson_bracket(th, f, g, x)) < 1e-9


def test_hkr_kills_base_only_slots():
    th = constant_theta(2, STD2)
    op = hkr(th)
    f = sf.coordinate(2, 4)
    u = sf.coordinate(0, 4)  # base coordinate: no fiber derivative
    assert op([f, u], (0.3, 0.1, 0.2, 0.4)) == 0.0


def test_flip_support_rotation_checks():
    th = build_ball_compact_theta(2, STD2, 1.0, 0.25)
    samples = fiber_samples(th, 100, seed=5)
    assert check_flip_even(th, samples) < 1e-12
    assert check_support(th, samples) == 0.0
    angles = np.linspace(0.3, 2.8, 4)
    rots = [np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
            for a in angles]
    assert check_rotation_invariance(th, samples, rots) < 1e-9


def test_wrong_degree_raises():
    X = vector_field(2, {0: sf.constant(1.0, 4)})
    with pytest.raises(ValueError):
        jacobi_defect(X, [np.zeros(4)])
