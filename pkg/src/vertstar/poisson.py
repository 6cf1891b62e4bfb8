"""Vertical multivector fields, the Schouten-Nijenhuis bracket, the HKR map,
and constructors for compactly supported vertical Poisson structures.

A vertical multivector on the tangent bundle of flat n-space has components
indexed by strictly increasing fiber-index tuples; each component is a
SmoothMap in the 2n variables (p, v).  Restriction to a fiber freezes p and
yields components in the n fiber variables alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import qmc

from . import smoothfn as sf
from .smoothfn import SmoothMap, eval_jet, evaluate


@dataclass(eq=False)
class VerticalMultivector:
    """Antisymmetric contravariant tensor field differentiating only fiber
    directions; stored over sorted fiber-index tuples."""

    base_dim: int
    degree: int
    components: dict  # sorted fiber-index tuple -> SmoothMap
    support_radius: float | None = None
    fiber_offset: int = field(default=-1)  # -1: defaults to base_dim (TM picture)

    def __post_init__(self):
        if self.fiber_offset < 0:
            self.fiber_offset = self.base_dim
        for key in self.components:
            if list(key) != sorted(key) or len(set(key)) != len(key):
                raise ValueError(f"component key {key} is not strictly increasing")
            if len(key) != self.degree:
                raise ValueError("component key length does not match degree")

    @property
    def ambient_dim(self) -> int:
        return self.fiber_offset + self.base_dim

    def component(self, key) -> SmoothMap | None:
        """Component for an arbitrary index tuple, with antisymmetry sign;
        None when zero."""
        key = tuple(key)
        if len(set(key)) != len(key):
            return None
        order = tuple(sorted(key))
        f = self.components.get(order)
        if f is None:
            return None
        sign = _perm_sign(key)
        return f if sign == 1 else f * (-1.0)

    def matrix_at(self, x, order: int = 0):
        """Dense antisymmetric component array evaluated at a point (degree 2);
        with order > 0, entries are jets."""
        n = self.base_dim
        out = np.zeros((n, n), dtype=object if order > 0 else complex)
        for (i, j), f in self.components.items():
            v = eval_jet(f, x, order) if order > 0 else evaluate(f, x)
            out[i, j] = v
            out[j, i] = -v
        return out


def _perm_sign(key) -> int:
    sign = 1
    key = list(key)
    for i in range(len(key)):
        for j in range(i + 1, len(key)):
            if key[i] > key[j]:
                sign = -sign
    return sign


def _add_term(comps: dict, indices, coef: SmoothMap):
    """Accumulate coef * d_{i1} ^ ... ^ d_{ik} into a component dict."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        return
    sign = _perm_sign(indices)
    key = tuple(sorted(indices))
    term = coef if sign == 1 else coef * (-1.0)
    comps[key] = term if key not in comps else comps[key] + term


def wedge(X: VerticalMultivector, Y: VerticalMultivector) -> VerticalMultivector:
    if X.base_dim != Y.base_dim or X.fiber_offset != Y.fiber_offset:
        raise ValueError("multivector shape mismatch")
    comps: dict = {}
    for I, f in X.components.items():
        for J, g in Y.components.items():
            _add_term(comps, I + J, f * g)
    rad = _combine_radius(X.support_radius, Y.support_radius, "min")
    return VerticalMultivector(X.base_dim, X.degree + Y.degree, comps, rad, X.fiber_offset)


def _combine_radius(a, b, how):
    vals = [r for r in (a, b) if r is not None]
    if not vals:
        return None
    if how == "min":
        return min(vals)
    return max(vals) if len(vals) == 2 else None


def schouten(X: VerticalMultivector, Y: VerticalMultivector) -> VerticalMultivector:
    """Schouten-Nijenhuis bracket of two vertical multivectors (degrees >= 1).

    Each component term f d_I is treated as the decomposable wedge
    (f d_{i1}) ^ d_{i2} ^ ... and the bracket of decomposables is expanded
    through pairwise Lie brackets of the factors.  Verticality is preserved:
    all derivatives are fiber derivatives.
    """
    if X.base_dim != Y.base_dim or X.fiber_offset != Y.fiber_offset:
        raise ValueError("multivector shape mismatch")
    if X.degree < 1 or Y.degree < 1:
        raise ValueError("schouten bracket implemented for degrees >= 1")
    off = X.fiber_offset
    comps: dict = {}
    one = None  # marker for unit coefficient

    def d(fn, i):
        return sf.derivative(fn, off + i)

    for I, fI in X.components.items():
        for J, gJ in Y.components.items():
            u = [(fI, I[0])] + [(one, i) for i in I[1:]]
            v = [(gJ, J[0])] + [(one, j) for j in J[1:]]
            for a, (fa, ia) in enumerate(u):
                for b, (gb, jb) in enumerate(v):
                    rest = u[:a] + u[a + 1:] + v[:b] + v[b + 1:]
                    rest_coef = None
                    for (cf, _i) in rest:
                        if cf is not None:
                            rest_coef = cf if rest_coef is None else rest_coef * cf
                    rest_idx = [t[1] for t in rest]
                    sign = (-1.0) ** (a + b)
                    # [fa d_ia, gb d_jb] = fa (d_ia gb) d_jb - gb (d_jb fa) d_ia
                    pieces = []
                    if gb is not None:
                        lead = d(gb, ia) if fa is None else fa * d(gb, ia)
                        pieces.append((lead, jb))
                    if fa is not None:
                        lead = d(fa, jb) if gb is None else gb * d(fa, jb)
                        pieces.append((lead * (-1.0), ia))
                    for coef, idx in pieces:
                        total = coef if rest_coef is None else coef * rest_coef
                        _add_term(comps, [idx] + rest_idx, total * sign)
    rad = _combine_radius(X.support_radius, Y.support_radius, "min")
    return VerticalMultivector(X.base_dim, X.degree + Y.degree - 1, comps, rad, X.fiber_offset)


def jacobi_defect(theta: VerticalMultivector, samples) -> float:
    """Max pointwise magnitude of [[theta, theta]] over the sample points."""
    if theta.degree != 2:
        raise ValueError("jacobi_defect requires a bivector")
    bracket = schouten(theta, theta)
    worst = 0.0
    for x in samples:
        for f in bracket.components.values():
            worst = max(worst, abs(evaluate(f, x)))
    return worst


def restrict_to_fiber(X: VerticalMultivector, p) -> VerticalMultivector:
    """Freeze the base point: components become functions of the fiber
    variables alone."""
    p = np.asarray(p, dtype=float)
    n = X.base_dim
    if X.fiber_offset == 0:
        return X
    A = np.vstack([np.zeros((n, n)), np.eye(n)])
    b = np.concatenate([p, np.zeros(n)])
    comps = {k: sf.pullback_affine(f, A, b) for k, f in X.components.items()}
    return VerticalMultivector(n, X.degree, comps, X.support_radius, fiber_offset=0)


def hkr(X: VerticalMultivector):
    """HKR map: the multivector as the antisymmetric k-differential operator
    (f_1, ..., f_k) -> (1/k!) <X, df_1 x ... x df_k>, fiber derivatives only.

    Returns a callable (functions, point) -> value.
    """
    k = X.degree
    if k < 1:
        raise ValueError("hkr requires degree >= 1")
    off = X.fiber_offset
    from itertools import permutations

    def apply(fns, x):
        if len(fns) != k:
            raise ValueError(f"expected {k} functions")
        grads = [eval_jet(f, x, 1) for f in fns]
        total = 0.0
        for key, comp in X.components.items():
            cval = evaluate(comp, x)
            for perm in permutations(range(k)):
                sign = _perm_sign([key[q] for q in perm])
                prod = cval * sign
                for slot, q in enumerate(perm):
                    prod *= grads[slot].deriv(off + key[q]).value
                total += prod
        return total / math.factorial(k)

    return apply


def poisson_bracket(theta: VerticalMultivector, f, g, x):
    """{f, g} = <theta, df x dg> evaluated at a point."""
    off = theta.fiber_offset
    jf = eval_jet(f, x, 1)
    jg = eval_jet(g, x, 1)
    total = 0.0
    for (i, j), comp in theta.components.items():
        c = evaluate(comp, x)
        total += c * (jf.deriv(off + i).value * jg.deriv(off + j).value
                      - jf.deriv(off + j).value * jg.deriv(off + i).value)
    return total


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _check_antisymmetric(Theta):
    Theta = np.asarray(Theta, dtype=float)
    if Theta.ndim != 2 or Theta.shape[0] != Theta.shape[1]:
        raise ValueError("Theta must be a square matrix")
    if not np.allclose(Theta, -Theta.T, atol=1e-14):
        raise ValueError("Theta must be antisymmetric")
    return Theta


def constant_theta(n: int, Theta) -> VerticalMultivector:
    """Vertical lift of a constant bivector (fiberwise-constant model)."""
    Theta = _check_antisymmetric(Theta)
    comps = {}
    for i in range(n):
        for j in range(i + 1, n):
            if Theta[i, j] != 0.0:
                comps[(i, j)] = sf.constant(Theta[i, j], 2 * n)
    return VerticalMultivector(n, 2, comps)


def lie_linear_theta(n: int, structure_constants) -> VerticalMultivector:
    """Fiberwise-linear bivector theta^{ij} = c^{ij}_k v^k from structure
    constants of a Lie algebra on the fiber."""
    c = np.asarray(structure_constants, dtype=float)
    comps = {}
    for i in range(n):
        for j in range(i + 1, n):
            terms = {}
            for k in range(n):
                if c[i, j, k] != 0.0:
                    m = [0] * (2 * n)
                    m[n + k] = 1
                    terms[tuple(m)] = c[i, j, k]
            if terms:
                comps[(i, j)] = sf.polynomial(terms, 2 * n)
    return VerticalMultivector(n, 2, comps)


def build_commuting_compact_theta(n: int, Theta, r: float, eps: float) -> VerticalMultivector:
    """theta = (1/2) Theta^{ab} X_a ^ X_b with the separated-bump frame
    X_a = chi(v^a) d/dv^a.  The fields commute exactly, so the Jacobi identity
    holds; each component has compact support in its own pair of fiber
    directions (a full fiber ball only for n = 2)."""
    Theta = _check_antisymmetric(Theta)
    comps = {}
    chis = [sf.bump_of(sf.coordinate(n + a, 2 * n), r, eps) for a in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if Theta[a, b] != 0.0:
                comps[(a, b)] = (chis[a] * chis[b]) * Theta[a, b]
    radius = math.sqrt(2.0) * (r + eps) if n == 2 else None
    return VerticalMultivector(n, 2, comps, support_radius=radius)


def ball_frame_fields(n: int, r: float, eps: float) -> list:
    """Pairwise commuting vector-field components supported in the closed
    fiber ball of radius r + eps, equal to the coordinate frame at v = 0.

    Returns X[a][i]: SmoothMap on (p, v) for the i-th component of X_a.
    """
    dim = 2 * n
    axes = tuple(range(n, dim))
    B = sf.radial_bump(dim, axes, r, eps)
    M = sf.ball_ramp(dim, axes, r, eps)
    vs = [sf.coordinate(n + i, dim) for i in range(n)]
    fields = []
    for a in range(n):
        row = []
        for i in range(n):
            comp = M * (vs[a] * vs[i])
            if i == a:
                comp = comp + B
            row.append(comp)
        fields.append(row)
    return fields


def build_ball_compact_theta(n: int, Theta, r: float, eps: float) -> VerticalMultivector:
    """theta = (1/2) Theta^{ab} X_a ^ X_b with a commuting frame supported in
    the fiber ball of radius r + eps (pushforward of the coordinate frame
    along a radial diffeomorphism onto the open ball, extended by zero)."""
    Theta = _check_antisymmetric(Theta)
    X = ball_frame_fields(n, r, eps)
    comps = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc = None
            for a in range(n):
                for b in range(a + 1, n):
                    if Theta[a, b] == 0.0:
                        continue
                    term = (X[a][i] * X[b][j] - X[a][j] * X[b][i]) * Theta[a, b]
                    acc = term if acc is None else acc + term
            if acc is not None:
                comps[(i, j)] = acc
    return VerticalMultivector(n, 2, comps, support_radius=r + eps)


def naive_scaled_theta(n: int, Theta, r: float, eps: float) -> VerticalMultivector:
    """A radially bump-scaled constant bivector.  NOT Poisson for n >= 3 in
    general; kept as the counterexample that the Jacobi check must reject."""
    Theta = _check_antisymmetric(Theta)
    dim = 2 * n
    chi = sf.radial_bump(dim, tuple(range(n, dim)), r, eps)
    comps = {}
    for i in range(n):
        for j in range(i + 1, n):
            if Theta[i, j] != 0.0:
                comps[(i, j)] = chi * Theta[i, j]
    return VerticalMultivector(n, 2, comps, support_radius=r + eps)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def fiber_samples(theta: VerticalMultivector, count: int, seed: int = 0,
                  radius: float | None = None, base_box: float = 1.0):
    """Low-discrepancy sample points in the ambient space of theta, with the
    fiber part inside the given ball plus a band straddling its boundary."""
    n = theta.base_dim
    dim = theta.ambient_dim
    R = radius if radius is not None else (theta.support_radius or 1.0)
    eng = qmc.Halton(d=dim, seed=seed)
    pts = eng.random(count)
    out = []
    n_boundary = max(count // 10, 1)
    for k, row in enumerate(pts):
        x = np.zeros(dim)
        if theta.fiber_offset > 0:
            x[:n] = (2 * row[:n] - 1) * base_box
        v = 2 * row[theta.fiber_offset:] - 1
        if k < count - n_boundary:
            scale = R
        else:
            nv = np.linalg.norm(v) or 1.0
            v = v / nv * (1.0 + 0.1 * (2 * row[0] - 1))
            scale = R
        x[theta.fiber_offset:] = v * scale
        out.append(x)
    return out


def check_flip_even(theta: VerticalMultivector, samples) -> float:
    """Max violation of theta(p, -v) = theta(p, v) over the samples."""
    off = theta.fiber_offset
    worst = 0.0
    for x in samples:
        y = np.array(x, dtype=float)
        y[off:] = -y[off:]
        for f in theta.components.values():
            worst = max(worst, abs(evaluate(f, x) - evaluate(f, y)))
    return worst


def check_support(theta: VerticalMultivector, samples) -> float:
    """Max component magnitude at samples outside the declared radius."""
    if theta.support_radius is None:
        raise ValueError("theta declares no support radius")
    off = theta.fiber_offset
    worst = 0.0
    for x in samples:
        v = np.asarray(x, dtype=float)[off:]
        if np.linalg.norm(v) < theta.support_radius:
            continue
        for f in theta.components.values():
            worst = max(worst, abs(evaluate(f, x)))
    return worst


def check_rotation_invariance(theta: VerticalMultivector, samples, rotations) -> float:
    """Max violation of R^* theta = theta, i.e. R^T theta(p, R v) R = theta(p, v)."""
    off = theta.fiber_offset
    n = theta.base_dim
    worst = 0.0
    for R in rotations:
        R = np.asarray(R, dtype=float)
        for x in samples:
            x = np.asarray(x, dtype=float)
            y = x.copy()
            y[off:] = R @ x[off:]
            m_x = theta.matrix_at(x).real
            m_Ry = theta.matrix_at(y).real
            worst = max(worst, float(np.max(np.abs(R.T @ m_Ry @ R - m_x))))
    return worst
