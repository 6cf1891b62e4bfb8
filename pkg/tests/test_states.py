"""Deformed states: expectations, variances, uncertainty, positivity, and the
light-cone observables."""

import numpy as np
import pytest

from vertstar import poisson, smoothfn as sf
from vertstar.formal import FormalSeries, is_formally_positive
from vertstar.starprod import general_vertical, moyal_constant
from vertstar.states import (
    CoherentState,
    MixtureState,
    QuadraticObservable,
    bare_delta,
    causal_class,
    expectation_root,
    lightcone_profile,
    lightcone_v0,
    lorentz_square,
    minkowski_metric,
    trust_report,
)

from conftest import random_poly, standard_symplectic

STD4 = standard_symplectic(4)


@pytest.fixture
def sp4():
    return moyal_constant(4, STD4, 2, picture="fiber")


def test_normalization_and_classical_coefficient(sp4):
    st = CoherentState((0.2, -0.4, 0.1, 0.9), 4, 2)
    one = sf.constant(1.0, 4)
    assert st.expect(one).coeffs == (1.0 + 0j, 0j, 0j)
    f = random_poly(np.random.default_rng(0), 4)
    assert st.expect(f).coeffs[0] == pytest.approx(sf.evaluate(f, st.base))


def test_expect_is_linear(sp4):
    rng = np.random.default_rng(1)
    st = CoherentState((0.1, 0.2, 0.3, 0.4), 4, 2)
    f, g = random_poly(rng, 4), random_poly(rng, 4)
    a, b = 1.7, -0.3
    lhs = st.expect(a * f + b * g)
    rhs = st.expect(f) * a + st.expect(g) * b
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_lorentz_square_offset(sp4):
    st = CoherentState((1.0, 0.0, 0.0, 0.0), 4, 2)
    s = st.expect(lorentz_square(4))
    assert s.coeffs == pytest.approx((1.0, -1.0, 0.0), abs=1e-12)
    # at the origin the square is shifted to -lambda
    st0 = CoherentState((0.0, 0.0, 0.0, 0.0), 4, 2)
    assert st0.expect(lorentz_square(4)).coeffs == pytest.approx((0.0, -1.0, 0.0),
                                                                 abs=1e-12)


def test_quadratic_expectation_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = rng.uniform(-1, 1, (4, 4))
        q = QuadraticObservable(A)
        v = rng.uniform(-1, 1, 4)
        st = CoherentState(v, 4, 2)
        got = st.expect(q.fn(4))
        want = q.expect_closed_form(st)
        assert np.allclose(got.coeffs, want.coeffs, atol=1e-10)


def test_variance_pipeline_matches_quadratic_closed_forms(sp4):
    st = CoherentState((1.0, 0.0, 0.0, 0.0), 4, 2)
    q = QuadraticObservable(minkowski_metric(4))
    var = st.variance(sp4, lorentz_square(4))
    closed = q.variance_closed_form(st, STD4)
    assert np.allclose(var.coeffs, closed.coeffs, atol=1e-10)
    sq = st.star_expect(sp4, lorentz_square(4), lorentz_square(4))
    closed_sq = q.star_square_expect_closed_form(st, STD4)
    assert np.allclose(sq.coeffs, closed_sq.coeffs, atol=1e-10)


def test_variance_simple_oracles(sp4):
    st0 = CoherentState((0.0,) * 4, 4, 2)
    # constant observable: no spread
    assert np.allclose(st0.variance(sp4, sf.constant(2.0, 4)).coeffs, 0.0,
                       atol=1e-12)
    # coordinate observable at the origin: lambda/2
    var = st0.variance(sp4, sf.coordinate(0, 4))
    assert var.coeffs == pytest.approx((0.0, 0.5, 0.0), abs=1e-12)


def test_variance_formally_nonnegative(sp4, rng):
    st = CoherentState((0.3, -0.2, 0.5, 0.1), 4, 2)
    for _ in range(10):
        f = random_poly(rng, 4)
        verdict = is_formally_positive(st.variance(sp4, f).real())
        assert verdict in ("positive", "zero")


def test_uncertainty_saturation(sp4):
    st0 = CoherentState((0.0,) * 4, 4, 2)
    rep = st0.uncertainty_check(sp4, sf.coordinate(0, 4), sf.coordinate(1, 4))
    assert np.allclose(rep["lhs"].coeffs, (0, 0, 1.0), atol=1e-10)
    assert np.allclose(rep["rhs"].coeffs, (0, 0, 1.0), atol=1e-10)
    assert rep["holds"]


def test_uncertainty_trivial_cases(sp4, rng):
    st = CoherentState((0.2, 0.1, -0.3, 0.4), 4, 2)
    f = random_poly(rng, 4)
    rep = st.uncertainty_check(sp4, f, f)
    assert np.allclose(rep["rhs"].coeffs, 0.0, atol=1e-10)
    assert rep["holds"]


def test_cauchy_schwarz(sp4, rng):
    st = CoherentState((0.1, 0.4, -0.2, 0.0), 4, 2)
    for _ in range(10):
        f = random_poly(rng, 4, complex_coeffs=True)
        g = random_poly(rng, 4, complex_coeffs=True)
        cross = st.star_expect(sp4, sf.conjugate(f), g)
        lhs = cross * cross.conjugate()
        rhs = (st.star_expect(sp4, sf.conjugate(f), f)
               * st.star_expect(sp4, sf.conjugate(g), g))
        verdict = is_formally_positive((rhs - lhs).real(), tol=1e-8)
        assert verdict in ("positive", "zero")


def test_positivity_coherent_passes_bare_fails(sp4):
    st = CoherentState((0.5, 0.0, 0.0, 0.0), 4, 2)
    assert st.positivity_scan(sp4, np.random.default_rng(3), count=60)["ok"]
    bd = bare_delta((0.5, 0.0, 0.0, 0.0), 4, 2)
    scan = bd.positivity_scan(sp4, np.random.default_rng(4), count=500)
    assert not scan["ok"]
    assert scan["witness"] is not None
    assert is_formally_positive(scan["witness_series"].real()) == "negative"


def test_known_bare_delta_witness(sp4):
    # f = (v0 - b0) + i (v1 - b1) makes the first-order coefficient -Theta^{01}
    b = (0.3, -0.2, 0.0, 0.0)
    bd = bare_delta(b, 4, 2)
    f = sf.polynomial({(1, 0, 0, 0): 1.0, (0, 1, 0, 0): 1.0j,
                       (0, 0, 0, 0): -b[0] - 1j * b[1]}, 4)
    s = bd.star_expect(sp4, sf.conjugate(f), f)
    assert s.coeffs[0] == pytest.approx(0.0, abs=1e-14)
    assert np.real(s.coeffs[1]) == pytest.approx(-1.0)


def test_classicality_outside_support():
    th = poisson.restrict_to_fiber(
        poisson.build_ball_compact_theta(2, standard_symplectic(2), 1.0, 0.25),
        np.zeros(2))
    sp = general_vertical(th, 2, rng=np.random.default_rng(5))
    rng = np.random.default_rng(6)
    for _ in range(10):
        base = rng.uniform(1.4, 2.5, 2) * rng.choice([-1.0, 1.0], 2)
        st = CoherentState(base, 2, 2)
        f, g = random_poly(rng, 2), random_poly(rng, 2)
        lhs = st.star_expect(sp, f, g)
        rhs = st.expect(f * g)
        assert lhs.coeffs == rhs.coeffs  # exact, not approximate


def test_mixture_state_convexity(sp4, rng):
    s1 = CoherentState((0.1, 0.0, 0.0, 0.0), 4, 2)
    s2 = CoherentState((0.0, 0.4, 0.0, 0.0), 4, 2)
    mix = MixtureState((s1, s2), (0.25, 0.75))
    f = random_poly(rng, 4)
    lhs = mix.expect(f)
    rhs = s1.expect(f) * 0.25 + s2.expect(f) * 0.75
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-14)
    # mixing never decreases the variance below the blend of variances
    gap = mix.variance(sp4, f) - (s1.variance(sp4, f) * 0.25
                                  + s2.variance(sp4, f) * 0.75)
    assert is_formally_positive(gap.real(), tol=1e-10) in ("positive", "zero")
    with pytest.raises(ValueError):
        MixtureState((s1, s2), (0.5, 0.2))


def test_classical_limit_order_zero():
    st = CoherentState((0.7, 0.1, 0.0, 0.0), 4, 0)
    f = lorentz_square(4)
    assert st.expect(f).coeffs == (pytest.approx(0.48),)


def test_lightcone_closed_form_and_root():
    assert lightcone_v0(0.01, 0.0) == pytest.approx(0.1)
    assert lightcone_v0(0.04, 0.3) == pytest.approx(np.sqrt(0.13))
    assert lightcone_v0(0.0, 0.7) == pytest.approx(0.7)
    root = expectation_root(0.01, 0.1)
    assert abs(root - np.sqrt(0.02)) < 1e-12
    with pytest.raises(ValueError):
        lightcone_v0(-0.1, 0.0)


def test_lightcone_profile_monotone_approach():
    rows = lightcone_profile(0.04, np.linspace(0.0, 3.0, 12))
    gaps = [d - c for _s, c, d in rows]
    assert all(g > 0 for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))  # strictly shrinking


def test_causal_class():
    assert causal_class((1.0, 0.0, 0.0, 0.0), 0.5) == "timelike"
    assert causal_class((1.0, 1.0, 0.0, 0.0), 0.01) == "spacelike"
    assert causal_class((0.0, 0.0, 0.0, 0.0), 0.0) == "lightlike"
    assert causal_class((np.sqrt(1.04), 1.0, 0.0, 0.0), 0.04) == "lightlike"


def test_trust_report(sp4):
    st = CoherentState((0.0,) * 4, 4, 2)
    rep = trust_report(st, sp4)
    assert rep["guaranteed"] and not rep["scan_required"]
    skew = moyal_constant(4, 2 * STD4, 2, picture="fiber")
    rep = trust_report(st, skew)
    assert not rep["guaranteed"] and rep["scan_required"]
    th = poisson.restrict_to_fiber(
        poisson.build_ball_compact_theta(2, standard_symplectic(2), 1.0, 0.25),
        np.zeros(2))
    spv = general_vertical(th, 2, rng=np.random.default_rng(7))
    inner = CoherentState((0.1, 0.0), 2, 2)
    outer = CoherentState((3.0, 0.0), 2, 2)
    assert trust_report(inner, spv)["annulus"]
    assert trust_report(outer, spv)["guaranteed"]


def test_metric_validation():
    with pytest.raises(ValueError):
        CoherentState((0.0, 0.0), 2, 2, metric_inv=[[1.0, 0.0], [0.0, -1.0]])
