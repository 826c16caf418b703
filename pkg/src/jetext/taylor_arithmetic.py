"""Truncated multivariate Taylor arithmetic (forward-mode derivatives).

A :class:`TaylorScalar` carries the value and all partial-derivative
coefficients of a quantity up to a fixed total order.  Arithmetic on
these objects propagates derivatives exactly (to rounding), which is how
the package differentiates kernel averages without closed-form formulas:
one mechanism serves the Euclidean kernel and the disk kernel alike.

Coefficients may be scalars or numpy arrays; array coefficients batch a
whole family of series (one per atom) through a single arithmetic chain.
Complex coefficients are supported, with principal-branch powers.
"""

from __future__ import annotations

import math

import numpy as np

from jetext.multiindex import indices_up_to, mi_abs, mi_add, mi_factorial

__all__ = ["TaylorScalar"]


def _is_zero(c) -> bool:
    return np.ndim(c) == 0 and c == 0


class TaylorScalar:
    """Taylor coefficients {c_j : |j| <= order} of a quantity in ``nvars``
    variables; c_j multiplied by j! gives the partial derivative D^j."""

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs if coeffs is not None else {}

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "TaylorScalar":
        return cls(nvars, order, {(0,) * nvars: value})

    @classmethod
    def variable(cls, i: int, value, nvars: int, order: int) -> "TaylorScalar":
        """The i-th coordinate seeded at ``value``."""
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for {nvars} variables")
        unit = tuple(1 if k == i else 0 for k in range(nvars))
        out = {(0,) * nvars: value}
        if order >= 1:
            out[unit] = 1.0
        return cls(nvars, order, out)

    @classmethod
    def variables(cls, point, order: int) -> list["TaylorScalar"]:
        point = np.asarray(point).ravel()
        return [cls.variable(i, point[i], len(point), order) for i in range(len(point))]

    # -- accessors -----------------------------------------------------

    @property
    def constant_term(self):
        return self.coeffs.get((0,) * self.nvars, 0.0)

    def coefficient(self, j):
        return self.coeffs.get(tuple(j), 0.0)

    def derivative(self, j) -> float:
        """Partial derivative D^j of the represented quantity."""
        j = tuple(j)
        if mi_abs(j) > self.order:
            raise ValueError(f"derivative order {j} exceeds truncation order {self.order}")
        return self.coefficient(j) * mi_factorial(j)

    def weighted_sum(self, weights) -> "TaylorScalar":
        """Collapse array coefficients: sum_i w_i * series_i."""
        w = np.asarray(weights)
        out = {}
        for j, c in self.coeffs.items():
            if np.ndim(c) == 0:
                out[j] = c * w.sum()
            else:
                out[j] = complex(np.dot(w, c)) if np.iscomplexobj(c) else float(np.dot(w, c))
        return TaylorScalar(self.nvars, self.order, out)

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "TaylorScalar"):
        if self.nvars != other.nvars or self.order != other.order:
            raise ValueError("mismatched series shapes")

    def __add__(self, other):
        if not isinstance(other, TaylorScalar):
            out = dict(self.coeffs)
            key = (0,) * self.nvars
            out[key] = out.get(key, 0.0) + other
            return TaylorScalar(self.nvars, self.order, out)
        self._check(other)
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out.get(j, 0.0) + c
        return TaylorScalar(self.nvars, self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return TaylorScalar(self.nvars, self.order, {j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, TaylorScalar) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TaylorScalar):
            return TaylorScalar(
                self.nvars, self.order, {j: c * other for j, c in self.coeffs.items()}
            )
        self._check(other)
        out = {}
        for ja, ca in self.coeffs.items():
            if _is_zero(ca):
                continue
            na = mi_abs(ja)
            for jb, cb in other.coeffs.items():
                if na + mi_abs(jb) > self.order or _is_zero(cb):
                    continue
                key = mi_add(ja, jb)
                prod = ca * cb
                out[key] = out.get(key, 0.0) + prod
        return TaylorScalar(self.nvars, self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TaylorScalar):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- composition ----------------------------------------------------

    def _nonconstant(self) -> "TaylorScalar":
        key = (0,) * self.nvars
        out = {j: c for j, c in self.coeffs.items() if j != key}
        return TaylorScalar(self.nvars, self.order, out)

    def compose(self, derivs) -> "TaylorScalar":
        """Series of g(self) from the derivatives g^(i) at the constant term.

        ``derivs[i]`` must be g^(i)(c0) for i = 0..order.  Valid because
        the nonconstant part is nilpotent at the truncation order.
        """
        delta = self._nonconstant()
        out = TaylorScalar.constant(derivs[self.order] / math.factorial(self.order), self.nvars, self.order)
        for i in range(self.order - 1, -1, -1):
            out = out * delta + derivs[i] / math.factorial(i)
        return out

    def power(self, r) -> "TaylorScalar":
        """self**r, principal branch for complex or fractional exponents."""
        c0 = self.constant_term
        derivs = []
        fac = 1.0
        for i in range(self.order + 1):
            derivs.append(fac * np.power(c0, r - i))
            fac = fac * (r - i)
        return self.compose(derivs)

    def reciprocal(self) -> "TaylorScalar":
        c0 = self.constant_term
        derivs = []
        sign = 1.0
        for i in range(self.order + 1):
            derivs.append(sign * math.factorial(i) / c0 ** (i + 1))
            sign = -sign
        return self.compose(derivs)

    def sqrt(self) -> "TaylorScalar":
        return self.power(0.5)

    def exp(self) -> "TaylorScalar":
        e0 = np.exp(self.constant_term)
        return self.compose([e0] * (self.order + 1))

    def __repr__(self):  # pragma: no cover - debug aid
        items = ", ".join(f"{j}: {c}" for j, c in sorted(self.coeffs.items(), key=lambda kv: (mi_abs(kv[0]), kv[0])))
        return f"TaylorScalar(order={self.order}, {{{items}}})"


def monomial_powers(diffs: list[TaylorScalar], order: int) -> dict:
    """Series of (x - t)^j for all |j| <= order, built incrementally.

    ``diffs`` are the coordinate difference series; returns a dict keyed
    by multi-index.
    """
    n = len(diffs)
    nvars = diffs[0].nvars
    series_order = diffs[0].order
    out = {(0,) * n: TaylorScalar.constant(1.0, nvars, series_order)}
    for j in indices_up_to(n, order):
        if j in out:
            continue
        i = next(k for k, v in enumerate(j) if v > 0)
        prev = tuple(v - 1 if k == i else v for k, v in enumerate(j))
        out[j] = out[prev] * diffs[i]
    return out
