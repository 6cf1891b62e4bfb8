"""Truncated multivariate Taylor (jet) arithmetic.

Coefficients are stored normalized, c[alpha] = (d^alpha f)(x0) / alpha!, so the
truncated product is a plain Cauchy product.  Multi-indices are enumerated in
graded order, which makes truncation to a lower order a prefix slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple:
    """All multi-indices alpha with |alpha| <= order, graded ordering."""

    def comps(total, k):
        if k == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in comps(total - first, k - 1):
                yield (first,) + rest

    out = []
    for total in range(order + 1):
        out.extend(comps(total, dim))
    return tuple(out)


@lru_cache(maxsize=None)
def index_lookup(dim: int, order: int) -> dict:
    return {a: i for i, a in enumerate(multi_indices(dim, order))}


def n_coeffs(dim: int, order: int) -> int:
    return len(multi_indices(dim, order))


@lru_cache(maxsize=None)
def _mul_table(dim: int, order: int):
    """Index triples (ia, ib, iout) with |alpha_ia| + |alpha_ib| <= order."""
    mi = multi_indices(dim, order)
    idx = index_lookup(dim, order)
    ia, ib, iout = [], [], []
    for i, a in enumerate(mi):
        rem = order - sum(a)
        for j in range(n_coeffs(dim, rem)):
            b = mi[j]
            ia.append(i)
            ib.append(j)
            iout.append(idx[tuple(x + y for x, y in zip(a, b))])
    return (np.asarray(ia), np.asarray(ib), np.asarray(iout))


@lru_cache(maxsize=None)
def _deriv_table(dim: int, order: int, i: int):
    """Maps an order-`order` jet to the jet of its i-th partial (order-1)."""
    if order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    idx = index_lookup(dim, order)
    tgt = multi_indices(dim, order - 1)
    src = np.asarray([idx[a[:i] + (a[i] + 1,) + a[i + 1:]] for a in tgt])
    fac = np.asarray([a[i] + 1 for a in tgt], dtype=float)
    return src, fac


@dataclass(frozen=True, eq=False)
class Jet:
    """Truncated Taylor expansion of a smooth function at a point."""

    dim: int
    order: int
    base: tuple
    c: np.ndarray  # complex128, length n_coeffs(dim, order)

    @property
    def value(self):
        return self.c[0]

    def partial(self, alpha) -> complex:
        """The raw partial derivative d^alpha f(base) = alpha! * c[alpha]."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"|alpha|={sum(alpha)} exceeds jet order {self.order}")
        fact = 1.0
        for a in alpha:
            fact *= math.factorial(a)
        return fact * self.c[index_lookup(self.dim, self.order)[alpha]]

    def coeff(self, alpha) -> complex:
        return self.c[index_lookup(self.dim, self.order)[tuple(alpha)]]

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot extend a jet by truncation")
        return Jet(self.dim, order, self.base, self.c[: n_coeffs(self.dim, order)].copy())

    def deriv(self, i: int) -> "Jet":
        """Jet of the i-th partial derivative, one order lower."""
        src, fac = _deriv_table(self.dim, self.order, i)
        return Jet(self.dim, self.order - 1, self.base, fac * self.c[src])

    def _check(self, other: "Jet"):
        if (self.dim, self.order) != (other.dim, other.order) or self.base != other.base:
            raise ValueError("jet shape mismatch")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.dim, self.order, self.base, self.c + other.c)
        out = self.c.copy()
        out[0] += other
        return Jet(self.dim, self.order, self.base, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.order, self.base, -self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.base, self.c * other)
        self._check(other)
        ia, ib, iout = _mul_table(self.dim, self.order)
        out = np.zeros_like(self.c)
        np.add.at(out, iout, self.c[ia] * other.c[ib])
        return Jet(self.dim, self.order, self.base, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not supported on jets")
        out = jet_constant(1.0, self.base, self.dim, self.order)
        for _ in range(k):
            out = out * self
        return out


def jet_constant(value, base, dim: int, order: int) -> Jet:
    c = np.zeros(n_coeffs(dim, order), dtype=complex)
    c[0] = value
    return Jet(dim, order, tuple(base), c)


def jet_variable(i: int, x0, dim: int, order: int) -> Jet:
    """Jet of the coordinate function v -> v^i expanded at x0."""
    if not 0 <= i < dim:
        raise ValueError(f"coordinate index {i} out of range for dim {dim}")
    x0 = tuple(x0)
    c = np.zeros(n_coeffs(dim, order), dtype=complex)
    c[0] = x0[i]
    if order >= 1:
        e_i = tuple(1 if j == i else 0 for j in range(dim))
        c[index_lookup(dim, order)[e_i]] = 1.0
    return Jet(dim, order, x0, c)


def jet_compose_univariate(outer_taylor, inner: Jet) -> Jet:
    """Compose Taylor coefficients of a univariate function with a jet.

    `outer_taylor` are the normalized Taylor coefficients of the outer function
    at the point inner.value; evaluation is Horner in the nilpotent part.
    """
    outer = np.asarray(outer_taylor, dtype=complex)
    if len(outer) != inner.order + 1:
        raise ValueError("outer Taylor length must be inner.order + 1")
    h = inner + (-inner.value)  # nilpotent part
    out = jet_constant(outer[-1], inner.base, inner.dim, inner.order)
    for k in range(len(outer) - 2, -1, -1):
        out = out * h + outer[k]
    return out


def jet_laplacian(j: Jet, metric_inv) -> Jet:
    """g^{ik} d_i d_k applied to a jet; result is two orders lower."""
    g = np.asarray(metric_inv)
    n = g.shape[0]
    out = None
    for i in range(n):
        for k in range(n):
            if g[i, k] == 0:
                continue
            term = j.deriv(i).deriv(k) * g[i, k]
            out = term if out is None else out + term
    if out is None:
        out = jet_constant(0.0, j.base, j.dim, j.order - 2)
    return out
