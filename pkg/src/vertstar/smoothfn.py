"""Smooth functions as expression trees, evaluable on points and on jets.

A SmoothMap is an immutable tree; evaluation on a point and jet evaluation at
a point share the same recursion.  Declared support metadata (vanishing beyond
a ball in designated axes) is set by constructors and propagated, never
inferred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, jet_compose_univariate, jet_constant, jet_variable


# ---------------------------------------------------------------------------
# univariate elementaries
# ---------------------------------------------------------------------------


class ExpElem:
    """exp(t)."""

    name = "exp"

    def value(self, t):
        return np.exp(t)

    def taylor(self, t, order):
        v = np.exp(t)
        return np.array([v / math.factorial(k) for k in range(order + 1)], dtype=complex)


def _u_jet(t0: float, order: int) -> Jet:
    return jet_variable(0, (t0,), 1, order)


def _recip_jet(j: Jet) -> Jet:
    u0 = j.value
    if u0 == 0:
        raise ZeroDivisionError("reciprocal of a jet with zero value")
    outer = np.array([(-1.0) ** k / u0 ** (k + 1) for k in range(j.order + 1)], dtype=complex)
    return jet_compose_univariate(outer, j)


def _exp_jet(j: Jet) -> Jet:
    return jet_compose_univariate(ExpElem().taylor(j.value, j.order), j)


def _sqrt_jet(j: Jet) -> Jet:
    u0 = j.value.real
    outer = np.empty(j.order + 1, dtype=complex)
    coef = math.sqrt(u0)
    outer[0] = coef
    for k in range(1, j.order + 1):
        coef *= (0.5 - (k - 1)) / (k * u0)
        outer[k] = coef
    return jet_compose_univariate(outer, j)


def _smoothstep_jet(s_jet: Jet) -> Jet:
    """Jet of h(s) = sigma(s) / (sigma(s) + sigma(1-s)), sigma(s) = exp(-1/s).

    h is the canonical smooth step: 0 below s=0, 1 above s=1, flat at both
    glue points.  Valid for s strictly inside (0, 1).
    """
    sig_s = _exp_jet(-_recip_jet(s_jet))
    sig_1ms = _exp_jet(-_recip_jet(1.0 - s_jet))
    return sig_s * _recip_jet(sig_s + sig_1ms)


def _ramp_taylor(s0: float, order: int) -> np.ndarray:
    """Taylor coefficients of 1 - h(s) at s0 in (0, 1)."""
    return (1.0 - _smoothstep_jet(_u_jet(s0, order))).c


class BumpElem:
    """Even bump in t: 1 on [-r, r], smooth monotone ramp, 0 beyond r + eps."""

    name = "bump"

    def __init__(self, r: float, eps: float):
        if r <= 0 or eps <= 0:
            raise ValueError("bump requires r > 0 and eps > 0")
        self.r = r
        self.eps = eps

    def value(self, t):
        a = abs(float(np.real(t)))
        if a <= self.r:
            return 1.0
        if a >= self.r + self.eps:
            return 0.0
        return _ramp_taylor((a - self.r) / self.eps, 0)[0].real

    def taylor(self, t, order):
        out = np.zeros(order + 1, dtype=complex)
        t = float(np.real(t))
        a = abs(t)
        if a >= self.r + self.eps:
            return out
        if a <= self.r:
            out[0] = 1.0
            return out
        sgn = 1.0 if t > 0 else -1.0
        ramp = _ramp_taylor((a - self.r) / self.eps, order)
        scale = sgn / self.eps
        return np.array([ramp[k] * scale ** k for k in range(order + 1)], dtype=complex)


class BumpSqElem:
    """Radial bump profile in u = |v|^2: value chi(sqrt(u)) of an even bump."""

    name = "bump_sq"

    def __init__(self, r: float, eps: float):
        if r <= 0 or eps <= 0:
            raise ValueError("bump requires r > 0 and eps > 0")
        self.r = r
        self.eps = eps

    def value(self, u):
        u = float(np.real(u))
        if u <= self.r ** 2:
            return 1.0
        if u >= (self.r + self.eps) ** 2:
            return 0.0
        return _ramp_taylor((math.sqrt(u) - self.r) / self.eps, 0)[0].real

    def taylor(self, u, order):
        out = np.zeros(order + 1, dtype=complex)
        u = float(np.real(u))
        if u >= (self.r + self.eps) ** 2:
            return out
        if u <= self.r ** 2:
            out[0] = 1.0
            return out
        s_jet = (_sqrt_jet(_u_jet(u, order)) - self.r) * (1.0 / self.eps)
        return jet_compose_univariate(_ramp_taylor(s_jet.value.real, order), s_jet).c


class BallRampElem:
    """Radial correction profile m(u) of a ball-supported pushforward frame.

    The frame fields are X_alpha(w) = chi(s) e_alpha + m(s^2) (w . e_alpha) w
    with s = |w|, the pushforward of the coordinate frame along the inverse of
    the radial map w -> (s/chi(s)) w/s onto all of R^n.  Here chi is the even
    bump with plateau radius r and ramp width eps, and
    m(u) = (1/sigma'(sqrt(u)) - chi(sqrt(u))) / u, sigma(s) = s / chi(s).
    m vanishes flatly at both ends of the annulus r < sqrt(u) < r + eps.
    """

    name = "ball_ramp"

    # below this plateau value the exact profile is far under any tolerance
    _TINY = 1e-60

    def __init__(self, r: float, eps: float):
        self.r = r
        self.eps = eps

    def _jet(self, u: float, order: int) -> Jet:
        s_jet = _sqrt_jet(_u_jet(u, order + 1))
        ramp_arg = (s_jet - self.r) * (1.0 / self.eps)
        chi = jet_compose_univariate(
            _ramp_taylor(ramp_arg.value.real, order + 1), ramp_arg
        )
        if abs(chi.value) < self._TINY:
            return jet_constant(0.0, (u,), 1, order)
        dchi_du = chi.deriv(0)  # chi is a jet in u = s^2, so this is dchi/du
        chi = chi.truncate(order)
        # 1/sigma' = chi^2 / (chi - s chi'(s)) and chi'(s) = 2s dchi/du, so the
        # denominator is chi - 2u dchi/du; it stays >= chi > 0 on the ramp
        denom = chi - (_u_jet(u, order) * 2.0) * dchi_du
        inv_sigma_prime = chi * chi * _recip_jet(denom)
        return (inv_sigma_prime - chi) * _recip_jet(_u_jet(u, order))

    def value(self, u):
        u = float(np.real(u))
        if u <= self.r ** 2 or u >= (self.r + self.eps) ** 2:
            return 0.0
        return self._jet(u, 0).value.real

    def taylor(self, u, order):
        u = float(np.real(u))
        if u <= self.r ** 2 or u >= (self.r + self.eps) ** 2:
            return np.zeros(order + 1, dtype=complex)
        return self._jet(u, order).c


# ---------------------------------------------------------------------------
# expression trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """Expression tree for a smooth function on R^dim.

    support: optional (axes, radius) meaning the function vanishes identically
    whenever the Euclidean norm of the listed coordinates is >= radius.
    """

    dim: int
    kind: str
    children: tuple = ()
    payload: object = None
    support: tuple | None = None

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        other = _as_map(other, self.dim)
        sup = _sum_support(self.support, other.support)
        return SmoothMap(self.dim, "sum", (self, other), support=sup)

    __radd__ = __add__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        return self + (-_as_map(other, self.dim))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, SmoothMap):
            return SmoothMap(self.dim, "scale", (self,), payload=other, support=self.support)
        sup = _product_support(self.support, other.support)
        return SmoothMap(self.dim, "prod", (self, other), support=sup)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return SmoothMap(self.dim, "power", (self,), payload=int(k), support=self.support if k > 0 else None)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)


def _as_map(v, dim):
    if isinstance(v, SmoothMap):
        return v
    return constant(v, dim)


def _sum_support(a, b):
    if a is None or b is None:
        return None
    if a[0] == b[0]:
        return (a[0], max(a[1], b[1]))
    return None


def _product_support(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] == b[0]:
        return (a[0], min(a[1], b[1]))
    if not set(a[0]) & set(b[0]):
        return (tuple(sorted(a[0] + b[0])), math.hypot(a[1], b[1]))
    return a if a[1] <= b[1] else b


# -- constructors -----------------------------------------------------------


def coordinate(i: int, dim: int) -> SmoothMap:
    if not 0 <= i < dim:
        raise ValueError(f"coordinate index {i} out of range for dim {dim}")
    return SmoothMap(dim, "coord", payload=i)


def constant(c, dim: int) -> SmoothMap:
    return SmoothMap(dim, "const", payload=complex(c))


def quadratic_form(A) -> SmoothMap:
    """x -> x^T A x for a square matrix A."""
    A = np.asarray(A, dtype=float)
    return SmoothMap(A.shape[0], "quad", payload=A)


def polynomial(coeffs: dict, dim: int) -> SmoothMap:
    """Sum of monomials; coeffs maps exponent tuples to scalars."""
    clean = {tuple(k): complex(v) for k, v in coeffs.items()}
    return SmoothMap(dim, "poly", payload=clean)


def pullback_affine(f: SmoothMap, A, b) -> SmoothMap:
    """x -> f(A x + b); A maps the new variable space into f's."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != f.dim or b.shape[0] != f.dim:
        raise ValueError("affine pullback shape mismatch")
    return SmoothMap(A.shape[1], "affine", (f,), payload=(A, b))


def exp_of(f: SmoothMap) -> SmoothMap:
    return SmoothMap(f.dim, "uni", (f,), payload=ExpElem())


def bump_of(f: SmoothMap, r: float, eps: float) -> SmoothMap:
    """chi(f(x)) with chi the even flat bump (1 on [-r, r], 0 beyond r+eps)."""
    sup = None
    if f.kind == "coord":
        sup = ((f.payload,), r + eps)
    return SmoothMap(f.dim, "uni", (f,), payload=BumpElem(r, eps), support=sup)


def radial_bump(dim: int, axes, r: float, eps: float) -> SmoothMap:
    """Bump in the Euclidean norm over the listed axes: 1 inside radius r,
    0 outside radius r + eps."""
    axes = tuple(axes)
    A = np.zeros((dim, dim))
    for i in axes:
        A[i, i] = 1.0
    return SmoothMap(
        dim, "uni", (quadratic_form(A),), payload=BumpSqElem(r, eps), support=(axes, r + eps)
    )


def ball_ramp(dim: int, axes, r: float, eps: float) -> SmoothMap:
    axes = tuple(axes)
    A = np.zeros((dim, dim))
    for i in axes:
        A[i, i] = 1.0
    return SmoothMap(
        dim, "uni", (quadratic_form(A),), payload=BallRampElem(r, eps), support=(axes, r + eps)
    )


def derivative(f: SmoothMap, i: int) -> SmoothMap:
    """Lazy partial derivative node; evaluated through jets."""
    if not 0 <= i < f.dim:
        raise ValueError("derivative index out of range")
    return SmoothMap(f.dim, "deriv", (f,), payload=i, support=f.support)


def conjugate(f: SmoothMap) -> SmoothMap:
    if f.kind == "const":
        return SmoothMap(f.dim, "const", payload=np.conj(f.payload))
    if f.kind == "poly":
        return SmoothMap(f.dim, "poly", payload={k: np.conj(v) for k, v in f.payload.items()})
    if f.kind == "scale":
        return SmoothMap(f.dim, "scale", (conjugate(f.children[0]),),
                         payload=np.conj(f.payload), support=f.support)
    if not f.children:
        return f
    return SmoothMap(f.dim, f.kind, tuple(conjugate(c) for c in f.children),
                     payload=f.payload, support=f.support)


# -- evaluation -------------------------------------------------------------


def evaluate(f: SmoothMap, x, _memo=None):
    """Pointwise value of f at x."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != f.dim:
        raise ValueError("point dimension mismatch")
    if _memo is None:
        _memo = {}
    key = id(f)
    if key in _memo:
        return _memo[key]
    k = f.kind
    if k == "coord":
        val = x[f.payload]
    elif k == "const":
        val = f.payload
    elif k == "sum":
        val = sum(evaluate(c, x, _memo) for c in f.children)
    elif k == "prod":
        val = evaluate(f.children[0], x, _memo) * evaluate(f.children[1], x, _memo)
    elif k == "scale":
        val = f.payload * evaluate(f.children[0], x, _memo)
    elif k == "power":
        val = evaluate(f.children[0], x, _memo) ** f.payload
    elif k == "quad":
        val = x @ f.payload @ x
    elif k == "poly":
        val = 0.0
        for m, c in f.payload.items():
            val += c * np.prod([x[i] ** e for i, e in enumerate(m) if e], initial=1.0)
    elif k == "affine":
        A, b = f.payload
        val = evaluate(f.children[0], A @ x + b)
    elif k == "uni":
        val = f.payload.value(evaluate(f.children[0], x, _memo))
    elif k == "deriv":
        val = eval_jet(f, x, 0).value
    else:
        raise ValueError(f"unknown node kind {k!r}")
    _memo[key] = val
    return val


def eval_jet(f: SmoothMap, x, order: int) -> Jet:
    """Jet of f at x to the given order."""
    x = tuple(float(v) for v in np.asarray(x, dtype=float))
    if len(x) != f.dim:
        raise ValueError("point dimension mismatch")
    env = tuple(jet_variable(i, x, f.dim, order) for i in range(f.dim))
    return _eval_jet(f, env, {})


def _eval_jet(f: SmoothMap, env: tuple, memo: dict) -> Jet:
    key = (id(f), id(env))
    if key in memo:
        return memo[key]
    k = f.kind
    ref = env[0]
    if k == "coord":
        out = env[f.payload]
    elif k == "const":
        out = jet_constant(f.payload, ref.base, ref.dim, ref.order)
    elif k == "sum":
        out = _eval_jet(f.children[0], env, memo) + _eval_jet(f.children[1], env, memo)
    elif k == "prod":
        out = _eval_jet(f.children[0], env, memo) * _eval_jet(f.children[1], env, memo)
    elif k == "scale":
        out = _eval_jet(f.children[0], env, memo) * f.payload
    elif k == "power":
        out = _eval_jet(f.children[0], env, memo) ** f.payload
    elif k == "quad":
        A = f.payload
        n = A.shape[0]
        out = None
        for i in range(n):
            for j in range(i, n):
                a = A[i, j] + (A[j, i] if j > i else 0.0)
                if a == 0:
                    continue
                term = (env[i] * env[j]) * a
                out = term if out is None else out + term
        if out is None:
            out = jet_constant(0.0, ref.base, ref.dim, ref.order)
    elif k == "poly":
        out = _poly_jet(f.payload, env, ref)
    elif k == "affine":
        A, b = f.payload
        inner_env = tuple(
            sum((env[i] * A[j, i] for i in range(len(env)) if A[j, i] != 0.0),
                jet_constant(b[j], ref.base, ref.dim, ref.order))
            for j in range(A.shape[0])
        )
        out = _eval_jet(f.children[0], inner_env, memo)
    elif k == "uni":
        inner = _eval_jet(f.children[0], env, memo)
        out = jet_compose_univariate(f.payload.taylor(inner.value, inner.order), inner)
    elif k == "deriv":
        if not _env_is_identity(env):
            raise NotImplementedError("derivative nodes require direct coordinates")
        hi_key = ("_hi", id(env))
        if hi_key not in memo:
            memo[hi_key] = tuple(
                jet_variable(i, ref.base, ref.dim, ref.order + 1) for i in range(ref.dim)
            )
        out = _eval_jet(f.children[0], memo[hi_key], memo).deriv(f.payload)
    else:
        raise ValueError(f"unknown node kind {k!r}")
    memo[key] = out
    return out


def _env_is_identity(env) -> bool:
    if any(j.dim != len(env) for j in env):
        return False
    for i, j in enumerate(env):
        ref = jet_variable(i, j.base, j.dim, j.order)
        if not np.array_equal(j.c, ref.c):
            return False
    return True


def _poly_jet(coeffs: dict, env: tuple, ref: Jet) -> Jet:
    """Exact jet of a polynomial when the environment is plain coordinates;
    falls back to jet arithmetic otherwise."""
    if _env_is_identity(env):
        x0 = np.asarray(ref.base, dtype=float)
        dim, order = ref.dim, ref.order
        from .jets import index_lookup, n_coeffs

        lut = index_lookup(dim, order)
        c = np.zeros(n_coeffs(dim, order), dtype=complex)
        for m, cm in coeffs.items():
            deg = sum(m)
            # shift the monomial to x0: coefficient at alpha <= m
            for alpha, pos in lut.items():
                if sum(alpha) > deg:
                    break
                w = cm
                ok = True
                for i in range(dim):
                    if alpha[i] > m[i]:
                        ok = False
                        break
                    w *= math.comb(m[i], alpha[i]) * x0[i] ** (m[i] - alpha[i])
                if ok:
                    c[pos] += w
        return Jet(dim, order, ref.base, c)
    out = jet_constant(0.0, ref.base, ref.dim, ref.order)
    for m, cm in coeffs.items():
        term = jet_constant(cm, ref.base, ref.dim, ref.order)
        for i, e in enumerate(m):
            for _ in range(e):
                term = term * env[i]
        out = out + term
    return out
