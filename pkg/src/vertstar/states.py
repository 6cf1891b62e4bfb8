"""Deformed states: coherent-state corrections of point evaluations,
expectation values, variances, uncertainty relations, and the distance and
light-cone observables on noncommutative Minkowski space.

The canonical state over a point is the heat-smeared evaluation
omega = delta_v o exp(lambda Delta_g / 4), truncated at the working order in
lambda; the bare delta (no smearing) is kept around as the standard
non-positive counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import smoothfn as sf
from .formal import ZERO_TOL, FormalSeries, is_formally_positive
from .jets import Jet, jet_constant, jet_laplacian, multi_indices
from .smoothfn import SmoothMap, eval_jet
from .starprod import StarProduct


@dataclass(eq=False)
class CoherentState:
    """Evaluation at `base` composed with the truncated heat semigroup
    exp(lambda Delta_g / 4) acting on the fiber variables."""

    base: tuple
    n: int
    order: int
    metric_inv: np.ndarray = None
    fiber_offset: int = 0
    smearing: bool = True  # False: the bare (non-positive) delta functional
    _metric_full: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.base = tuple(float(x) for x in self.base)
        if self.metric_inv is None:
            self.metric_inv = np.eye(self.n)
        self.metric_inv = np.asarray(self.metric_inv, dtype=float)
        g = self.metric_inv
        if not np.allclose(g, g.T) or np.any(np.linalg.eigvalsh(g) <= 0):
            raise ValueError("metric_inv must be symmetric positive definite")
        dim = len(self.base)
        full = np.zeros((dim, dim))
        off = self.fiber_offset
        full[off:off + self.n, off:off + self.n] = g
        self._metric_full = full

    # -- expectation ---------------------------------------------------------

    def expect_jets(self, H) -> FormalSeries:
        """Expectation of a series of jets at `base`; coefficient r collects
        (1/k! 4^k) Delta_g^k applied to H_{r-k}."""
        N = self.order
        out = [0j] * (N + 1)
        for s, jet in enumerate(H):
            if s > N or jet is None:
                continue
            cur = jet
            k = 0
            fact = 1.0
            while True:
                out[s + k] += cur.value / fact
                k += 1
                if s + k > N or not self.smearing:
                    break
                if cur.order < 2:
                    raise ValueError("jet order insufficient for the smearing order")
                fact *= 4.0 * k
                cur = jet_laplacian(cur, self._metric_full)
        return FormalSeries(N, tuple(out))

    def expect(self, f: SmoothMap) -> FormalSeries:
        return self.expect_jets([eval_jet(f, self.base, 2 * self.order)])

    def star_expect(self, sp: StarProduct, f: SmoothMap, g: SmoothMap) -> FormalSeries:
        """omega(f * g) through the star product's jet pipeline."""
        N = self.order
        F = [eval_jet(f, self.base, 2 * N)]
        G = [eval_jet(g, self.base, 2 * N)]
        jets = sp.star_jets(F, G, self.base, [2 * (N - t) for t in range(N + 1)])
        return self.expect_jets(jets)

    # -- variance and uncertainty --------------------------------------------

    def variance(self, sp: StarProduct, f: SmoothMap) -> FormalSeries:
        """omega(conj(f - omega(f)) * (f - omega(f)))."""
        return self.central_second_moment(sp, f, self.expect(f))

    def central_second_moment(self, sp: StarProduct, f: SmoothMap,
                              m: FormalSeries) -> FormalSeries:
        """omega(conj(f - m) * (f - m)) for a given centering series m (equals
        the variance when m = omega(f))."""
        N = self.order
        fj = eval_jet(f, self.base, 2 * N)
        fjc = eval_jet(sf.conjugate(f), self.base, 2 * N)

        def centered(jet, coeffs):
            out = [jet - coeffs[0]]
            for t in range(1, N + 1):
                out.append(jet_constant(-coeffs[t], jet.base, jet.dim, 2 * N))
            return out

        G = centered(fj, m.coeffs)
        Gbar = centered(fjc, tuple(np.conj(c) for c in m.coeffs))
        jets = sp.star_jets(Gbar, G, self.base, [2 * (N - t) for t in range(N + 1)])
        return self.expect_jets(jets)

    def uncertainty_check(self, sp: StarProduct, f: SmoothMap, g: SmoothMap) -> dict:
        """4 Var(f) Var(g) >= |omega([f, g]_*)|^2 for Hermitean f, g."""
        lhs = 4.0 * (self.variance(sp, f) * self.variance(sp, g))
        comm = self.star_expect(sp, f, g) - self.star_expect(sp, g, f)
        rhs = comm * comm.conjugate()
        verdict = is_formally_positive((lhs - rhs).real())
        return {"lhs": lhs, "rhs": rhs, "holds": verdict in ("positive", "zero"),
                "verdict": verdict}

    # -- positivity ----------------------------------------------------------

    def positivity_scan(self, sp: StarProduct, rng, count: int = 100,
                        degree: int = 3, tol: float = ZERO_TOL) -> dict:
        """omega(conj(f) * f) must not be formally negative for random complex
        polynomials f in the fiber variables."""
        dim = len(self.base)
        off = self.fiber_offset
        monos = [m for m in multi_indices(dim, degree)
                 if all(m[i] == 0 for i in range(off))]
        checked = 0
        for _ in range(count):
            coeffs = rng.uniform(-1, 1, len(monos)) + 1j * rng.uniform(-1, 1, len(monos))
            f = sf.polynomial({m: c for m, c in zip(monos, coeffs)}, dim)
            # also probe the centered function: subtracting the value at the
            # base kills the dominant order-0 coefficient |f(base)|^2, which
            # otherwise masks sign defects at higher orders
            fc = f - complex(sf.evaluate(f, self.base))
            for probe in (f, fc):
                s = self.star_expect(sp, sf.conjugate(probe), probe)
                verdict = is_formally_positive(s.real(), tol=tol)
                checked += 1
                if verdict == "negative":
                    return {"ok": False, "witness": probe, "witness_series": s,
                            "checked": checked}
        return {"ok": True, "witness": None, "witness_series": None,
                "checked": checked}


def bare_delta(base, n: int, order: int, metric_inv=None, fiber_offset: int = 0) -> CoherentState:
    """The undeformed point evaluation (not positive for the deformed product)."""
    return CoherentState(base, n, order, metric_inv=metric_inv,
                         fiber_offset=fiber_offset, smearing=False)


@dataclass(eq=False)
class MixtureState:
    """Finite convex combination of point states (a discrete base measure)."""

    states: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.states) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a convex combination")
        orders = {s.order for s in self.states}
        if len(orders) != 1:
            raise ValueError("component states must share the truncation order")
        self.weights = tuple(float(x) for x in w)

    @property
    def order(self) -> int:
        return self.states[0].order

    def expect(self, f: SmoothMap) -> FormalSeries:
        out = None
        for w, s in zip(self.weights, self.states):
            term = s.expect(f) * w
            out = term if out is None else out + term
        return out

    def star_expect(self, sp: StarProduct, f: SmoothMap, g: SmoothMap) -> FormalSeries:
        out = None
        for w, s in zip(self.weights, self.states):
            term = s.star_expect(sp, f, g) * w
            out = term if out is None else out + term
        return out

    def variance(self, sp: StarProduct, f: SmoothMap) -> FormalSeries:
        m = self.expect(f)
        out = None
        for w, s in zip(self.weights, self.states):
            term = s.central_second_moment(sp, f, m) * w
            out = term if out is None else out + term
        return out


def trust_report(state: CoherentState, sp: StarProduct) -> dict:
    """Whether positivity of the coherent state is backed by theory or only by
    scanning.

    Guaranteed for the constant-bivector product when (Theta, g) is the
    standard compatible pair; for compactly supported structures the guarantee
    only covers bases inside the inner (constant-coefficient) ball, and bases
    in the transition annulus are flagged for a mandatory scan.
    """
    report = {"guaranteed": False, "annulus": False, "scan_required": True}
    if not state.smearing:
        report["reason"] = "bare delta functionals are not positive"
        return report
    if sp.mode in ("moyal_constant", "moyal_fiberwise") and sp.Theta is not None:
        n = sp.n
        std = np.zeros((n, n))
        for k in range(n // 2):
            std[2 * k, 2 * k + 1] = 1.0
            std[2 * k + 1, 2 * k] = -1.0
        if np.array_equal(sp.Theta, std) and np.array_equal(state.metric_inv, np.eye(n)):
            report.update(guaranteed=True, scan_required=False,
                          reason="standard compatible (Theta, g) pair")
            return report
        report["reason"] = "nonstandard (Theta, g) pair; positivity is scan-verified only"
        return report
    theta = sp.theta
    if theta is not None and theta.support_radius is not None:
        v = np.asarray(state.base)[state.fiber_offset:]
        if np.linalg.norm(v) > theta.support_radius:
            report.update(guaranteed=True, scan_required=False,
                          reason="base outside the support: classical state")
        else:
            report.update(annulus=True,
                          reason="base inside the support of a non-constant "
                                 "structure: unverified by theory")
        return report
    report["reason"] = "general structure; positivity is scan-verified only"
    return report


# ---------------------------------------------------------------------------
# quadratic observables and their closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticObservable:
    """f_A(v) = v^t A v on the fiber, with the heat-smearing identities for
    quadratic forms available in closed form."""

    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", (A + A.T) / 2)

    def fn(self, dim: int, fiber_offset: int = 0) -> SmoothMap:
        n = self.A.shape[0]
        M = np.zeros((dim, dim))
        M[fiber_offset:fiber_offset + n, fiber_offset:fiber_offset + n] = self.A
        return sf.quadratic_form(M)

    def expect_closed_form(self, state: CoherentState) -> FormalSeries:
        """f_A(v) + (lambda/2) tr(g A), exact at every order."""
        v = np.asarray(state.base)[state.fiber_offset:]
        g = state.metric_inv
        coeffs = [complex(v @ self.A @ v)] + [0j] * state.order
        if state.order >= 1:
            coeffs[1] = complex(np.trace(g @ self.A) / 2)
        return FormalSeries(state.order, tuple(coeffs))

    def star_square_expect_closed_form(self, state: CoherentState, Theta) -> FormalSeries:
        """omega(f_A * f_A) for the constant-bivector product:
        f_A^2 + lambda (f_A tr(gA) + 2 f_{AgA})
        + (lambda^2/4) (2 tr(A_t A_t) + (tr gA)^2 + 2 tr(gAgA)),
        with (A_t)^r_j = Theta^{rs} A_{sj}."""
        if state.order < 2:
            raise ValueError("closed form needs order >= 2")
        A = self.A
        g = state.metric_inv
        Th = np.asarray(Theta, dtype=float)
        v = np.asarray(state.base)[state.fiber_offset:]
        fA = float(v @ A @ v)
        fAgA = float(v @ (A @ g @ A) @ v)
        trgA = float(np.trace(g @ A))
        At = Th @ A
        c0 = fA ** 2
        c1 = fA * trgA + 2 * fAgA
        c2 = 0.25 * (2 * np.trace(At @ At) + trgA ** 2 + 2 * np.trace(g @ A @ g @ A))
        coeffs = [complex(c0), complex(c1), complex(c2)] + [0j] * (state.order - 2)
        return FormalSeries(state.order, tuple(coeffs))

    def variance_closed_form(self, state: CoherentState, Theta) -> FormalSeries:
        """2 lambda f_{AgA}(v) + (lambda^2/2)(tr(A_t A_t) + tr(gAgA)); follows
        from the two closed forms above by subtracting omega(f_A)^2."""
        sq = self.star_square_expect_closed_form(state, Theta)
        m = self.expect_closed_form(state)
        return sq - m * m


def minkowski_metric(n: int = 4) -> np.ndarray:
    eta = -np.eye(n)
    eta[0, 0] = 1.0
    return eta


def lorentz_square(n: int = 4, dim: int = None, fiber_offset: int = 0) -> SmoothMap:
    """The Lorentz distance square f_eta, eta = diag(+, -, ..., -)."""
    return QuadraticObservable(minkowski_metric(n)).fn(dim or n, fiber_offset)


# ---------------------------------------------------------------------------
# light cone and causal structure
# ---------------------------------------------------------------------------


def lightcone_v0(lam: float, spatial_norm: float) -> float:
    """Positive root of the deformed Lorentz square: v0 = sqrt(lam + |s|^2)."""
    if lam < 0:
        raise ValueError("the deformation parameter must be nonnegative")
    return float(np.sqrt(lam + spatial_norm ** 2))


def expectation_root(lam: float, spatial_norm: float, n: int = 4,
                     order: int = 2, metric_inv=None) -> float:
    """v0 at which the numeric expectation of the Lorentz square vanishes,
    found by bracketing and bisection on the generic expectation pipeline."""
    f_eta = lorentz_square(n)

    def h(v0):
        base = np.zeros(n)
        base[0] = v0
        base[1] = spatial_norm
        state = CoherentState(base, n, order, metric_inv=metric_inv)
        return float(np.real(state.expect(f_eta).substitute(lam)))

    hi = np.sqrt(lam + spatial_norm ** 2) + 1.0
    return float(optimize.brentq(h, 0.0, hi, xtol=1e-14, rtol=8.9e-16))


def causal_class(v, lam: float, tol: float = 1e-12) -> str:
    """Causal type of a fiber vector against the deformed cone
    v0^2 = lam + |s|^2."""
    v = np.asarray(v, dtype=float)
    q = v[0] ** 2 - float(v[1:] @ v[1:]) - lam
    if q > tol:
        return "timelike"
    if q < -tol:
        return "spacelike"
    return "lightlike"


def lightcone_profile(lam: float, spatial_norms, n: int = 4, order: int = 2,
                      verify: bool = False) -> list:
    """Rows (spatial_norm, v0_classical, v0_deformed) of the deformed light
    cone; with verify=True the closed form is checked against the root of the
    numeric expectation."""
    rows = []
    for s in spatial_norms:
        s = float(s)
        v0 = lightcone_v0(lam, s)
        if verify:
            root = expectation_root(lam, s, n=n, order=order)
            if abs(root - v0) > 1e-10:
                raise ArithmeticError(
                    f"light-cone root {root!r} deviates from closed form {v0!r}")
        rows.append((s, abs(s), v0))
    return rows
