"""Jets on compact-set samples: Taylor polynomials, remainders, the
derivation operator, and the Hoelder / Besov-type norms.

A jet of order alpha is a family {f_j : |j| <= alpha} of component
vectors sampled on the atoms of a set, standing in for a function and
its derivatives restricted to the set.  Component values are induced
from supplied closed-form derivatives, never from numerical
differentiation of samples, so test oracles stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from jetext.geometry import CompactSetSample
from jetext.measure import DoublingMeasure
from jetext.multiindex import (
    as_index,
    indices_up_to,
    mi_abs,
    mi_add,
    mi_factorial,
    mi_sub,
)

__all__ = [
    "Jet",
    "BesovParams",
    "NormReport",
    "ReexpandResult",
    "taylor",
    "taylor_all",
    "delta",
    "derive",
    "induce_jet",
    "poly_jet",
    "lip_norm",
    "besov_norm",
    "reexpand_check",
    "save_jet",
    "load_jet",
]


class Jet:
    """Multi-indexed component family {f_j} over the atoms of a set.

    Every multi-index with |j| <= floor(order) is present (for integer
    order this includes |j| = order, matching the convention that the
    index sum runs over |j| <= alpha).
    """

    def __init__(self, domain: CompactSetSample, order: float, components: Mapping):
        if not order >= 0:
            raise ValueError("jet order must be >= 0")
        self.domain = domain
        self.order = float(order)
        n = domain.n
        comps = {}
        for j, vals in components.items():
            arr = np.asarray(vals)
            if arr.shape != (len(domain),):
                raise ValueError(f"component {j} has shape {arr.shape}, expected ({len(domain)},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"component {j} has non-finite values")
            comps[as_index(j, n)] = arr
        for j in indices_up_to(n, self.max_index_order):
            if j not in comps:
                raise ValueError(f"missing component for multi-index {j}")
        self.components = comps

    @property
    def max_index_order(self) -> int:
        return int(math.floor(self.order))

    @property
    def indices(self) -> tuple:
        return indices_up_to(self.domain.n, self.max_index_order)

    def scaled(self, factor: float) -> "Jet":
        return Jet(self.domain, self.order, {j: factor * v for j, v in self.components.items()})

    def __add__(self, other: "Jet") -> "Jet":
        if other.domain is not self.domain or other.order != self.order:
            raise ValueError("jets must share a domain and order")
        return Jet(
            self.domain,
            self.order,
            {j: self.components[j] + other.components[j] for j in self.components},
        )


def taylor(jet: Jet, y_index: int, x) -> float:
    """Taylor polynomial of the jet based at atom ``y_index``:
    sum_{|j|<=alpha} f_j(y) (x - y)^j / j!."""
    x = np.asarray(x, dtype=float).ravel()
    y = jet.domain.atoms[y_index]
    w = x - y
    total = 0.0
    for j in jet.indices:
        total += jet.components[j][y_index] * np.prod(w**np.array(j)) / mi_factorial(j)
    return float(total)


def taylor_all(jet: Jet, x) -> np.ndarray:
    """Vector of Taylor polynomials T_y f(x) over all base atoms y."""
    x = np.asarray(x, dtype=float).ravel()
    w = x - jet.domain.atoms  # (m, n)
    out = np.zeros(len(jet.domain))
    for j in jet.indices:
        mono = np.prod(w ** np.array(j), axis=1)
        out += jet.components[j] * mono / mi_factorial(j)
    return out


def derive(jet: Jet, j) -> Jet:
    """Derivation operator: component k of the output is component k+j of
    the input; for |j| > alpha the result is the zero jet of order 0."""
    j = as_index(j, jet.domain.n)
    if mi_abs(j) > jet.order:
        zero = np.zeros(len(jet.domain))
        return Jet(jet.domain, 0.0, {(0,) * jet.domain.n: zero})
    new_order = jet.order - mi_abs(j)
    comps = {}
    for k in indices_up_to(jet.domain.n, int(math.floor(new_order))):
        comps[k] = jet.components[mi_add(k, j)]
    return Jet(jet.domain, new_order, comps)


def delta(jet: Jet, y_index: int, x_index: int, j) -> float:
    """Remainder Delta_j(y, x) = f_j(x) - D^j_x T_y f(x), evaluated through
    the closed form D^j_x T_y f(x) = T^{alpha-|j|}_y (derive(f, j))(x)."""
    j = as_index(j, jet.domain.n)
    if mi_abs(j) > jet.order:
        raise ValueError(f"|j| = {mi_abs(j)} exceeds jet order {jet.order}")
    derived = derive(jet, j)
    return float(jet.components[j][x_index] - taylor(derived, y_index, jet.domain.atoms[x_index]))


def induce_jet(domain: CompactSetSample, order: float, derivs: Mapping) -> Jet:
    """Jet induced from a function with supplied derivative callables:
    f_j(t) = derivs[j](t) at every atom, required for all |j| <= order."""
    n = domain.n
    supplied = {as_index(j, n): fn for j, fn in derivs.items()}
    comps = {}
    for j in indices_up_to(n, int(math.floor(order))):
        if j not in supplied:
            raise ValueError(f"missing derivative of order {j}")
        fn = supplied[j]
        vals = np.array([float(fn(*pt) if n > 1 else fn(pt[0])) for pt in domain.atoms])
        comps[j] = vals
    return Jet(domain, order, comps)


def _poly_diff(coeffs: dict, j: tuple) -> dict:
    out = coeffs
    for axis, times in enumerate(j):
        for _ in range(times):
            nxt = {}
            for mono, c in out.items():
                if mono[axis] == 0:
                    continue
                key = tuple(v - 1 if a == axis else v for a, v in enumerate(mono))
                nxt[key] = nxt.get(key, 0.0) + c * mono[axis]
            out = nxt
    return out


def poly_eval(coeffs: Mapping, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    return float(sum(c * np.prod(x ** np.array(mono)) for mono, c in coeffs.items()))


def poly_jet(domain: CompactSetSample, order: float, coeffs: Mapping) -> Jet:
    """Jet induced from a polynomial given as {multi-index: coefficient};
    derivatives are computed symbolically so the jet is exact."""
    n = domain.n
    poly = {as_index(mono, n): float(c) for mono, c in coeffs.items()}
    comps = {}
    for j in indices_up_to(n, int(math.floor(order))):
        dcoeffs = _poly_diff(poly, j)
        comps[j] = np.array([poly_eval(dcoeffs, pt) for pt in domain.atoms])
    return Jet(domain, order, comps)


@dataclass(frozen=True)
class BesovParams:
    """Integrability p, smoothness alpha, and the measure lower exponent
    lambda entering the pair kernel.

    ``lambda_sign=+1`` places lambda with the sign used by the pair
    kernel d(s,t)^(-p(alpha-|j|)+lambda); -1 selects the conventional
    variant with the opposite sign.  The embedding target smoothness is
    beta = alpha + (n - lambda)/p.
    """

    p: float
    alpha: float
    lam: float
    lambda_sign: int = 1

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.lambda_sign not in (-1, 1):
            raise ValueError("lambda_sign must be +1 or -1")

    def beta(self, n: int) -> float:
        return self.alpha + (n - self.lam) / self.p

    def require_noninteger_alpha(self):
        if abs(self.alpha - round(self.alpha)) < 1e-12:
            raise ValueError(f"alpha = {self.alpha} must not be an integer here")


@dataclass(frozen=True)
class NormReport:
    """Per-multi-index norm contributions.  ``total`` is the sum of all
    parts; sup and seminorm parts are 1-homogeneous in the jet."""

    sup_parts: dict
    semi_parts: dict
    total: float
    excluded_pairs: int = 0


def taylor_all_from(jet: Jet, y_index: int) -> np.ndarray:
    """T_y f(x) for fixed base atom y over all atoms x."""
    y = jet.domain.atoms[y_index]
    w = jet.domain.atoms - y  # (m, n)
    out = np.zeros(len(jet.domain))
    for j in jet.indices:
        out += jet.components[j][y_index] * np.prod(w ** np.array(j), axis=1) / mi_factorial(j)
    return out


def lip_norm(jet: Jet) -> NormReport:
    """Hoelder jet norm: per index, sup |f_j| plus the sup over atom pairs
    of |Delta_j(y, x)| / d(x, y)^(alpha - |j|)."""
    atoms = jet.domain.atoms
    m = len(jet.domain)
    derived = {j: derive(jet, j) for j in jet.indices}
    sup_parts = {}
    semi_parts = {}
    for j in jet.indices:
        sup_parts[j] = float(np.abs(jet.components[j]).max())
        expo = jet.order - mi_abs(j)
        best = 0.0
        for y in range(m):
            d = np.sqrt(np.sum((atoms - atoms[y]) ** 2, axis=1))
            row = np.abs(jet.components[j] - taylor_all_from(derived[j], y))
            mask = d > 0
            if mask.any():
                best = max(best, float((row[mask] / d[mask] ** expo).max()))
        semi_parts[j] = best
    total = float(sum(sup_parts.values()) + sum(semi_parts.values()))
    return NormReport(sup_parts, semi_parts, total)


def besov_norm(jet: Jet, mu: DoublingMeasure, params: BesovParams) -> NormReport:
    """Besov jet norm against a measure.

    Per index: the L^p(mu) norm of f_j, plus the p-th root of the weighted
    pair sum  sum_{t != s} |Delta_j(t,s)|^p d(s,t)^(-p(alpha-|j|)+lambda)
    w_t w_s / mu[t,s]^2,  where mu[t,s] = mu(B(t, d(t,s))).  Diagonal
    pairs are excluded (the kernel is singular there) and counted.
    """
    if mu.sample is not jet.domain and len(mu.sample) != len(jet.domain):
        raise ValueError("measure and jet must share an atom list")
    alpha = params.alpha
    sup = mu.support_indices
    atoms = jet.domain.atoms[sup]
    w = mu.weights[sup]
    derived = {j: derive(jet, j) for j in jet.indices}

    sup_parts = {}
    acc = {}
    for j in jet.indices:
        sup_parts[j] = float(np.dot(w, np.abs(jet.components[j][sup]) ** params.p) ** (1.0 / params.p))
        acc[j] = 0.0

    for ti, t in enumerate(sup):
        d = np.sqrt(np.sum((atoms - atoms[ti]) ** 2, axis=1))
        # mu[t, s] for all s at once: cumulative weight below each pair distance
        order = np.argsort(d, kind="stable")
        cumw = np.cumsum(w[order])
        mus = cumw[np.searchsorted(d[order], d, side="right") - 1]
        mask = d > 0
        for j in jet.indices:
            expo = -params.p * (alpha - mi_abs(j)) + params.lambda_sign * params.lam
            row = np.abs(jet.components[j][sup] - taylor_all_from(derived[j], t)[sup])
            acc[j] += float(
                np.sum(row[mask] ** params.p * d[mask] ** expo * w[ti] * w[mask] / mus[mask] ** 2)
            )

    semi_parts = {j: acc[j] ** (1.0 / params.p) for j in jet.indices}
    total = float(sum(sup_parts.values()) + sum(semi_parts.values()))
    return NormReport(sup_parts, semi_parts, total, excluded_pairs=len(sup))


class ReexpandResult(NamedTuple):
    residual: float
    scale: float


def reexpand_check(jet: Jet, t_index: int, y, x) -> ReexpandResult:
    """Exact re-expansion identity of the Taylor polynomial through an
    intermediate point y:

        T_t f(x) = sum_{|l| <= alpha} (x-y)^l / l! * T^{alpha-|l|}_t(derive(f, l))(y)

    Returns the absolute residual and the magnitude scale of the terms;
    the identity is algebraic, so residual <= 1e-12 * scale always.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    lhs = taylor(jet, t_index, x)
    rhs = 0.0
    scale = abs(lhs)
    for l in jet.indices:
        term = (
            np.prod((x - y) ** np.array(l))
            / mi_factorial(l)
            * taylor(derive(jet, l), t_index, y)
        )
        rhs += term
        scale += abs(term)
    return ReexpandResult(residual=abs(lhs - rhs), scale=max(scale, 1e-300))


def save_jet(jet: Jet, path) -> None:
    """Header (n, alpha, atom count, index list) plus one row of component
    values per atom; 17 significant digits."""
    n = jet.domain.n
    idx = jet.indices
    lines = [
        f"{n} {'%.17g' % jet.order} {len(jet.domain)} {len(idx)}",
        " ".join(",".join(str(v) for v in j) for j in idx),
    ]
    for i in range(len(jet.domain)):
        coords = " ".join("%.17g" % c for c in jet.domain.atoms[i])
        vals = " ".join("%.17g" % jet.components[j][i] for j in idx)
        lines.append(f"{coords} {vals}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_jet(path) -> Jet:
    text = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(text) < 3:
        raise ValueError(f"{path}: malformed jet file")
    head = text[0].split()
    n, order, count, n_idx = int(head[0]), float(head[1]), int(head[2]), int(head[3])
    idx = [tuple(int(v) for v in tok.split(",")) for tok in text[1].split()]
    if len(idx) != n_idx:
        raise ValueError(f"{path}: expected {n_idx} indices, got {len(idx)}")
    rows = text[2:]
    if len(rows) != count:
        raise ValueError(f"{path}: expected {count} atom rows, got {len(rows)}")
    atoms = np.empty((count, n))
    comps = {j: np.empty(count) for j in idx}
    for i, ln in enumerate(rows):
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != n + n_idx:
            raise ValueError(f"{path}: row {i + 1} has {len(vals)} fields, expected {n + n_idx}")
        atoms[i] = vals[:n]
        for k, j in enumerate(idx):
            comps[j][i] = vals[n + k]
    sample = CompactSetSample(atoms, resolution=1.0)
    return Jet(sample, order, comps)
