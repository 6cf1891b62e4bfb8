"""Vertical star products at finite order in the deformation parameter.

Three modes:
  * moyal_constant   - exact Weyl-Moyal product for a constant bivector,
  * moyal_fiberwise  - Weyl-Moyal with a base-point-dependent constant-in-v
                       bivector,
  * general_vertical - order-<=2 product for a general vertical Poisson
                       bivector, with the second-order operator solved from
                       the associativity identity.

All products differentiate only fiber directions and are computed on jets, so
the same code path yields point values and derivative information for states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import smoothfn as sf
from .formal import FormalSeries
from .jets import Jet, jet_constant, multi_indices, n_coeffs
from .poisson import VerticalMultivector, jacobi_defect, restrict_to_fiber
from .smoothfn import SmoothMap, eval_jet, evaluate

# ---------------------------------------------------------------------------
# doubled-jet machinery for Moyal modes
#
# The tensor product f x g of two jets in d variables is a "pair jet" indexed
# by pairs (alpha, beta) with |alpha| + |beta| <= D.  The Moyal bidifferential
# operator P = Theta^{ij} d_{v_i} (x) d_{w_j} is a sparse reindexing on pair
# jets, and the product C_r(f, g) is the restriction of P^r (f x g) to the
# diagonal w = v.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _pair_enum(dim: int, D: int):
    mi = multi_indices(dim, D)
    pairs = []
    for i, a in enumerate(mi):
        rem = D - sum(a)
        for j in range(n_coeffs(dim, rem)):
            pairs.append((i, j))
    lookup = {p: k for k, p in enumerate(pairs)}
    return tuple(pairs), lookup


@lru_cache(maxsize=None)
def _pair_fill(dim: int, D: int, ord_a: int, ord_b: int):
    pairs, _ = _pair_enum(dim, D)
    mi = multi_indices(dim, D)
    ks, ia, ib = [], [], []
    for k, (i, j) in enumerate(pairs):
        if sum(mi[i]) <= ord_a and sum(mi[j]) <= ord_b:
            ks.append(k)
            ia.append(i)
            ib.append(j)
    return np.asarray(ks), np.asarray(ia), np.asarray(ib)


@lru_cache(maxsize=None)
def _pair_step(dim: int, D: int, i: int, j: int):
    """Index arrays realizing d_{v_i} d_{w_j} on pair jets."""
    pairs, lookup = _pair_enum(dim, D)
    mi = multi_indices(dim, D)
    lut = {a: k for k, a in enumerate(mi)}
    dst, src, fac = [], [], []
    for k, (ai, bi) in enumerate(pairs):
        a, b = mi[ai], mi[bi]
        if sum(a) + sum(b) + 2 > D:
            continue
        a2 = a[:i] + (a[i] + 1,) + a[i + 1:]
        b2 = b[:j] + (b[j] + 1,) + b[j + 1:]
        dst.append(k)
        src.append(lookup[(lut[a2], lut[b2])])
        fac.append((a[i] + 1) * (b[j] + 1))
    return np.asarray(dst), np.asarray(src), np.asarray(fac, dtype=float)


@lru_cache(maxsize=None)
def _pair_diag(dim: int, D: int, K: int):
    """Restriction of a pair jet to the diagonal, as an order-K jet."""
    pairs, _ = _pair_enum(dim, D)
    mi = multi_indices(dim, D)
    lut = {a: k for k, a in enumerate(multi_indices(dim, K))}
    dst, src = [], []
    for k, (ai, bi) in enumerate(pairs):
        a, b = mi[ai], mi[bi]
        if sum(a) + sum(b) > K:
            continue
        dst.append(lut[tuple(x + y for x, y in zip(a, b))])
        src.append(k)
    return np.asarray(dst), np.asarray(src)


def _moyal_apply_P(c: np.ndarray, Theta, axes, dim: int, D: int) -> np.ndarray:
    out = np.zeros_like(c)
    n = len(axes)
    for i in range(n):
        for j in range(n):
            t = Theta[i, j]
            if t == 0.0:
                continue
            dst, src, fac = _pair_step(dim, D, axes[i], axes[j])
            out[dst] += t * fac * c[src]
    return out


def _moyal_star_jets(Theta, F, G, axes, dim, base, out_orders):
    """Series of jets of f * g for the Weyl-Moyal product with a (locally)
    constant bivector; out_orders[t] is the jet order of the t-th coefficient."""
    N = len(out_orders) - 1
    out = [None] * (N + 1)
    for a in range(len(F)):
        for b in range(len(G)):
            if a + b > N:
                continue
            ka, kb = F[a].order, G[b].order
            rs = list(range(N - a - b + 1))
            for r in rs:
                if out_orders[a + b + r] + r > min(ka, kb):
                    raise ValueError("input jets of insufficient order")
            D = max(out_orders[a + b + r] + 2 * r for r in rs)
            ks, ia, ib = _pair_fill(dim, D, ka, kb)
            c = np.zeros(len(_pair_enum(dim, D)[0]), dtype=complex)
            c[ks] = F[a].c[ia] * G[b].c[ib]
            for r in rs:
                t = a + b + r
                K = out_orders[t]
                dst, src = _pair_diag(dim, D, K)
                coeff = np.zeros(n_coeffs(dim, K), dtype=complex)
                np.add.at(coeff, dst, c[src])
                coeff *= (0.5j) ** r / math.factorial(r)
                jet = Jet(dim, K, base, coeff)
                out[t] = jet if out[t] is None else out[t] + jet
                if r < rs[-1]:
                    c = _moyal_apply_P(c, Theta, axes, dim, D)
    for t in range(N + 1):
        if out[t] is None:
            out[t] = jet_constant(0.0, base, dim, out_orders[t])
    return out


# ---------------------------------------------------------------------------
# general vertical mode (order <= 2)
# ---------------------------------------------------------------------------


def _theta_matrix_jets(theta: VerticalMultivector, x, order: int):
    """Full antisymmetric matrix of component jets at x (None where zero)."""
    n = theta.base_dim
    m = [[None] * n for _ in range(n)]
    for (i, j), f in theta.components.items():
        jet = eval_jet(f, x, order)
        m[i][j] = jet
        m[j][i] = -jet
    return m


def _c1_jet(theta_jets, fjet: Jet, gjet: Jet, off: int, K: int) -> Jet:
    n = len(theta_jets)
    out = jet_constant(0.0, fjet.base, fjet.dim, K)
    for i in range(n):
        for j in range(n):
            th = theta_jets[i][j]
            if th is None:
                continue
            out = out + th.truncate(K) * fjet.deriv(off + i).truncate(K) * gjet.deriv(off + j).truncate(K)
    return out * 0.5j


def _c2_term_jets(theta_jets, dtheta_jets, fjet: Jet, gjet: Jet, off: int, K: int):
    """The three second-order ansatz terms as jets of order K.

    Returns (T_a, T_b, T_c):
      T_a = th^{ij} th^{kl} d_i d_k f  d_j d_l g
      T_b = (d_l th^{ij}) th^{kl} (d_i d_k f d_j g - d_i f d_j d_k g)
      T_c = (d_l th^{ij}) (d_j th^{kl}) d_i f d_k g
    """
    n = len(theta_jets)
    base, dim = fjet.base, fjet.dim
    zero = jet_constant(0.0, base, dim, K)
    Ta = Tb = Tc = zero

    df = [fjet.deriv(off + i) for i in range(n)]
    dg = [gjet.deriv(off + i) for i in range(n)]
    d2f = [[df[i].deriv(off + k).truncate(K) for k in range(n)] for i in range(n)]
    d2g = [[dg[i].deriv(off + k).truncate(K) for k in range(n)] for i in range(n)]
    df = [j.truncate(K) for j in df]
    dg = [j.truncate(K) for j in dg]

    for i in range(n):
        for j in range(n):
            th_ij = theta_jets[i][j]
            dth_ij = dtheta_jets[i][j]
            if th_ij is None and dth_ij is None:
                continue
            for k in range(n):
                for l in range(n):
                    th_kl = theta_jets[k][l]
                    if th_ij is not None and th_kl is not None:
                        Ta = Ta + th_ij.truncate(K) * th_kl.truncate(K) * d2f[i][k] * d2g[j][l]
                    if dth_ij is not None and th_kl is not None:
                        w = dth_ij[l].truncate(K) * th_kl.truncate(K)
                        Tb = Tb + w * (d2f[i][k] * dg[j] - df[i] * d2g[j][k])
                    dth_kl = dtheta_jets[k][l]
                    if dth_ij is not None and dth_kl is not None:
                        Tc = Tc + dth_ij[l].truncate(K) * dth_kl[j].truncate(K) * df[i] * dg[k]
    return Ta, Tb, Tc


def _dtheta_matrix_jets(theta: VerticalMultivector, x, order: int):
    """dtheta[i][j][l] = jet of d_{v_l} theta^{ij}; None where zero."""
    n = theta.base_dim
    off = theta.fiber_offset
    out = [[None] * n for _ in range(n)]
    for (i, j), f in theta.components.items():
        jet = eval_jet(f, x, order + 1)
        row = [jet.deriv(off + l) for l in range(n)]
        out[i][j] = row
        out[j][i] = [-r for r in row]
    return out


def _vertical_star_jets(theta, weights, F, G, x, out_orders):
    N = len(out_orders) - 1
    if N > 2:
        raise ValueError("general vertical star products support order <= 2 only")
    n = theta.base_dim
    off = theta.fiber_offset
    base, dim = F[0].base, F[0].dim
    max_ord = max(out_orders)
    theta_jets = _theta_matrix_jets(theta, x, max_ord + 1)
    dtheta_jets = _dtheta_matrix_jets(theta, x, max_ord) if N >= 2 else None
    out = [jet_constant(0.0, base, dim, K) for K in out_orders]
    for a in range(len(F)):
        for b in range(len(G)):
            if a + b > N:
                continue
            for r in range(N - a - b + 1):
                t = a + b + r
                K = out_orders[t]
                if K + r > min(F[a].order, G[b].order):
                    raise ValueError("input jets of insufficient order")
                fj, gj = F[a], G[b]
                if r == 0:
                    term = fj.truncate(K) * gj.truncate(K)
                elif r == 1:
                    tj = [[None if e is None else e.truncate(K + 1) for e in row]
                          for row in theta_jets]
                    term = _c1_jet(tj, fj.truncate(K + 1), gj.truncate(K + 1), off, K)
                else:
                    tj = [[None if e is None else e.truncate(K) for e in row]
                          for row in theta_jets]
                    dj = [[None if e is None else [d.truncate(K) for d in e] for e in row]
                          for row in dtheta_jets]
                    Ta, Tb, Tc = _c2_term_jets(tj, dj, fj.truncate(K + 2), gj.truncate(K + 2), off, K)
                    term = Ta * weights[0] + Tb * weights[1] + Tc * weights[2]
                out[t] = out[t] + term
    return out


# ---------------------------------------------------------------------------
# solving the order-2 operator
# ---------------------------------------------------------------------------


def solve_C2(theta: VerticalMultivector, rng=None, n_rows: int = 80,
             jacobi_samples=None, tol: float = 1e-9):
    """Weights (a, b, c) of the second-order bidifferential ansatz making the
    order-2 associativity defect vanish.

    The associativity identity at second order is linear in the weights; it is
    sampled on random monomial triples at random points and solved by least
    squares.  Requires theta to be Poisson (small Jacobi defect).
    """
    rng = rng or np.random.default_rng(0)
    if jacobi_samples is not None:
        defect = jacobi_defect(theta, jacobi_samples)
        if defect >= tol:
            raise ValueError(f"theta is not Poisson: Jacobi defect {defect:.2e}")
    n = theta.base_dim
    off = theta.fiber_offset
    dim = theta.ambient_dim
    R = theta.support_radius or 1.0

    rows, rhs = [], []
    for _ in range(n_rows):
        x = np.zeros(dim)
        if off > 0:
            x[:off] = rng.uniform(-1, 1, off)
        x[off:] = rng.uniform(-1, 1, n) * R
        fgh = []
        for _k in range(3):
            m = [0] * dim
            for _d in range(rng.integers(1, 4)):
                m[off + rng.integers(0, n)] += 1
            fgh.append(sf.polynomial({tuple(m): 1.0}, dim))
        f, g, h = fgh

        tj = _theta_matrix_jets(theta, x, 2)
        dj = _dtheta_matrix_jets(theta, x, 1)
        jets = {obj: eval_jet(obj, x, 3) for obj in (f, g, h, f * g, g * h)}

        # contribution of each ansatz term to the order-2 associator
        contrib = np.zeros(3, dtype=complex)
        for m_i in range(3):
            w = [0.0, 0.0, 0.0]
            w[m_i] = 1.0

            def c2val(u, v):
                uj, vj = jets.setdefault(u, eval_jet(u, x, 3)), jets.setdefault(v, eval_jet(v, x, 3))
                Ta, Tb, Tc = _c2_term_jets(tj, dj, uj.truncate(2), vj.truncate(2), off, 0)
                return (Ta * w[0] + Tb * w[1] + Tc * w[2]).value

            contrib[m_i] = (c2val(f * g, h) + c2val(f, g) * jets[h].value
                            - c2val(f, g * h) - jets[f].value * c2val(g, h))
        c1_fg = _c1_jet([[None if e is None else e.truncate(2) for e in row] for row in tj],
                        jets[f].truncate(2), jets[g].truncate(2), off, 1)
        c1_gh = _c1_jet([[None if e is None else e.truncate(2) for e in row] for row in tj],
                        jets[g].truncate(2), jets[h].truncate(2), off, 1)
        tj0 = [[None if e is None else e.truncate(1) for e in row] for row in tj]
        r0 = (_c1_jet(tj0, c1_fg, eval_jet(h, x, 1), off, 0).value
              - _c1_jet(tj0, eval_jet(f, x, 1), c1_gh, off, 0).value)
        rows.append(contrib)
        rhs.append(-r0)

    A = np.asarray(rows)
    b = np.asarray(rhs)
    # real f, g, h and real theta make every ansatz value real and every C1
    # composition real, so the system is real
    M = np.vstack([A.real, A.imag])
    y = np.concatenate([b.real, b.imag])
    w, *_ = np.linalg.lstsq(M, y, rcond=None)
    residual = float(np.max(np.abs(M @ w - y))) if len(y) else 0.0
    return tuple(w), residual


# ---------------------------------------------------------------------------
# the star product object
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class StarProduct:
    mode: str
    n: int
    lambda_order: int
    picture: str = "tm"  # 'tm': functions of (p, v); 'fiber': functions of v
    Theta: np.ndarray | None = None
    Theta_fn: object = None
    theta: VerticalMultivector | None = None
    weights: tuple | None = None

    @property
    def total_dim(self) -> int:
        return 2 * self.n if self.picture == "tm" else self.n

    @property
    def fiber_offset(self) -> int:
        return self.n if self.picture == "tm" else 0

    def _theta_at(self, x):
        if self.mode == "moyal_constant":
            return self.Theta
        p = np.asarray(x, dtype=float)[: self.n]
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                entry = self.Theta_fn[i][j]
                if entry is None:
                    continue
                out[i, j] = np.real(evaluate(entry, p))
        return out

    def star_jets(self, F, G, x, out_orders):
        """Series of jets of F * G at x; F, G are lists of jets per order in
        the deformation parameter."""
        if len(out_orders) != self.lambda_order + 1:
            raise ValueError("out_orders must have lambda_order + 1 entries")
        if self.mode in ("moyal_constant", "moyal_fiberwise"):
            Theta = self._theta_at(x)
            axes = tuple(range(self.fiber_offset, self.fiber_offset + self.n))
            return _moyal_star_jets(Theta, F, G, axes, self.total_dim,
                                    F[0].base, out_orders)
        if self.mode == "general_vertical":
            return _vertical_star_jets(self.theta, self.weights, F, G, x, out_orders)
        raise ValueError(f"unknown mode {self.mode!r}")

    def star_at(self, f: SmoothMap, g: SmoothMap, x) -> FormalSeries:
        """Pointwise star product as a formal series of complex values."""
        N = self.lambda_order
        F = [eval_jet(f, x, N)]
        G = [eval_jet(g, x, N)]
        jets = self.star_jets(F, G, x, [0] * (N + 1))
        return FormalSeries(N, tuple(j.value for j in jets))

    def restrict(self, p) -> "StarProduct":
        """The induced star product on the fiber over p."""
        if self.picture == "fiber":
            return self
        if self.mode == "moyal_constant":
            return StarProduct("moyal_constant", self.n, self.lambda_order,
                               picture="fiber", Theta=self.Theta)
        if self.mode == "moyal_fiberwise":
            Theta = self._theta_at(np.concatenate([np.asarray(p, dtype=float),
                                                   np.zeros(self.n)]))
            return StarProduct("moyal_constant", self.n, self.lambda_order,
                               picture="fiber", Theta=Theta)
        return StarProduct("general_vertical", self.n, self.lambda_order,
                           picture="fiber", theta=restrict_to_fiber(self.theta, p),
                           weights=self.weights)


def moyal_constant(n: int, Theta, lambda_order: int, picture: str = "fiber") -> StarProduct:
    Theta = np.asarray(Theta, dtype=float)
    if not np.allclose(Theta, -Theta.T, atol=1e-14):
        raise ValueError("Theta must be antisymmetric")
    return StarProduct("moyal_constant", n, lambda_order, picture=picture, Theta=Theta)


def moyal_fiberwise(n: int, Theta_fn, lambda_order: int) -> StarProduct:
    """Theta_fn[i][j]: SmoothMap in the base point p (None for zero), with
    Theta_fn[j][i] implied by antisymmetry if given both must match."""
    return StarProduct("moyal_fiberwise", n, lambda_order, picture="tm", Theta_fn=Theta_fn)


def general_vertical(theta: VerticalMultivector, lambda_order: int,
                     rng=None, jacobi_samples=None) -> StarProduct:
    if lambda_order > 2:
        raise ValueError("general vertical star products support order <= 2 only")
    picture = "tm" if theta.fiber_offset > 0 else "fiber"
    weights = (0.0, 0.0, 0.0)
    if lambda_order >= 2:
        weights, _res = solve_C2(theta, rng=rng, jacobi_samples=jacobi_samples)
    return StarProduct("general_vertical", theta.base_dim, lambda_order,
                       picture=picture, theta=theta, weights=weights)


# ---------------------------------------------------------------------------
# derived operations and structural checks
# ---------------------------------------------------------------------------


def associativity_defect(sp: StarProduct, f, g, h, samples) -> np.ndarray:
    """Per-order max |(f*g)*h - f*(g*h)| over the samples."""
    N = sp.lambda_order
    worst = np.zeros(N + 1)
    inner_orders = [N - t for t in range(N + 1)]
    value_orders = [0] * (N + 1)
    for x in samples:
        F = [eval_jet(f, x, 2 * N)]
        G = [eval_jet(g, x, 2 * N)]
        H = [eval_jet(h, x, 2 * N)]
        fg = sp.star_jets(F, G, x, inner_orders)
        left = sp.star_jets(fg, [H[0]], x, value_orders)
        gh = sp.star_jets(G, H, x, inner_orders)
        right = sp.star_jets([F[0]], gh, x, value_orders)
        for t in range(N + 1):
            worst[t] = max(worst[t], abs(left[t].value - right[t].value))
    return worst


def midpoint_chart(qq) -> tuple:
    """(p, v) coordinates of a pair of points: p = (q + q')/2, v = (q' - q)/2."""
    qq = np.asarray(qq, dtype=float)
    n = qq.shape[0] // 2
    q, qp = qq[:n], qq[n:]
    return np.concatenate([(q + qp) / 2, (qp - q) / 2])


def midpoint_pullback(f: SmoothMap, n: int) -> SmoothMap:
    """Pull a function of (q, q') back to midpoint coordinates (p, v):
    (p, v) -> f(p - v, p + v)."""
    eye = np.eye(n)
    A = np.block([[eye, -eye], [eye, eye]])
    return sf.pullback_affine(f, A, np.zeros(2 * n))


def pair_picture_star(sp: StarProduct, f: SmoothMap, g: SmoothMap, qq) -> FormalSeries:
    """Star product of two-point observables evaluated at (q, q'), computed by
    transport through midpoint coordinates."""
    if sp.picture != "tm":
        raise ValueError("pair picture requires a tangent-bundle star product")
    pv = midpoint_chart(qq)
    return sp.star_at(midpoint_pullback(f, sp.n), midpoint_pullback(g, sp.n), pv)


def check_verticality(sp: StarProduct, pairs, samples) -> float:
    """Max per-order |f * pi^*u - f u| for (f, u) pairs; u depends only on the
    base point (or is constant, in the fiber picture)."""
    worst = 0.0
    for f, u in pairs:
        for x in samples:
            s = sp.star_at(f, u, x)
            s2 = sp.star_at(u, f, x)
            prod = evaluate(f, x) * evaluate(u, x)
            worst = max(worst, abs(s.coeffs[0] - prod), abs(s2.coeffs[0] - prod))
            for c in list(s.coeffs[1:]) + list(s2.coeffs[1:]):
                worst = max(worst, abs(c))
    return worst


def check_hermitean(sp: StarProduct, pairs, samples) -> float:
    """Max per-order |conj(f * g) - conj(g) * conj(f)|."""
    worst = 0.0
    for f, g in pairs:
        fc, gc = sf.conjugate(f), sf.conjugate(g)
        for x in samples:
            lhs = sp.star_at(f, g, x).conjugate()
            rhs = sp.star_at(gc, fc, x)
            for a, b in zip(lhs.coeffs, rhs.coeffs):
                worst = max(worst, abs(a - b))
    return worst


def check_flip_symmetry(sp: StarProduct, pairs, samples) -> float:
    """Max per-order violation of tau^*(f * g) = tau^*f * tau^*g with
    tau(p, v) = (p, -v)."""
    d = sp.total_dim
    off = sp.fiber_offset
    A = np.eye(d)
    for i in range(off, d):
        A[i, i] = -1.0
    b = np.zeros(d)
    worst = 0.0
    for f, g in pairs:
        ft = sf.pullback_affine(f, A, b)
        gt = sf.pullback_affine(g, A, b)
        for x in samples:
            x = np.asarray(x, dtype=float)
            tx = A @ x
            lhs = sp.star_at(f, g, tx)  # tau^*(f*g) at x
            rhs = sp.star_at(ft, gt, x)
            for a2, b2 in zip(lhs.coeffs, rhs.coeffs):
                worst = max(worst, abs(a2 - b2))
    return worst
