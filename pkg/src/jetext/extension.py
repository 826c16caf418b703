"""The kernel-averaged extension operator and the classical Whitney baseline.

The operator is a normalised average of jet Taylor polynomials against
the kernel d(x, t)^-q and a doubling measure:

    E(f)(x) = (1 / h(x)) * sum_i w_i T_{t_i} f(x) d(x, t_i)^-q,
    h(x)    = sum_i w_i d(x, t_i)^-q.

Derivatives are computed exactly through truncated Taylor arithmetic
(one mechanism for every kernel); finite differences are kept as an
independent oracle in the tests, never as the implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from jetext.geometry import EUCLIDEAN, CompactSetSample, Metric
from jetext.jets import Jet, taylor, taylor_all
from jetext.measure import DoublingMeasure
from jetext.multiindex import as_index, mi_abs, mi_factorial
from jetext.taylor_arithmetic import TaylorScalar, monomial_powers

__all__ = [
    "SingularKernelError",
    "ExtensionParams",
    "GridSpec",
    "FieldGrid",
    "kernel_mass",
    "kernel_mass_series",
    "extend",
    "extend_series",
    "extend_derivative",
    "windowed_extension",
    "windowed_extension_series",
    "whitney_baseline",
    "whitney_cubes_at",
    "assemble_g",
    "moment_ratio",
    "save_field",
    "load_field",
]


class SingularKernelError(ValueError):
    """Evaluation point coincides with an atom, where the kernel blows up."""


@dataclass(frozen=True)
class ExtensionParams:
    """Kernel exponent q, jet order alpha, and the metric selector.

    The remainder bounds need q > upsilon + alpha with upsilon a certified
    upper volume exponent; a practical default is q = upsilon + alpha + 1.
    """

    q: float
    alpha: float
    metric: Metric = EUCLIDEAN

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be > 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")

    @classmethod
    def with_default_q(cls, alpha: float, upsilon: float, metric: Metric = EUCLIDEAN) -> "ExtensionParams":
        return cls(q=upsilon + alpha + 1.0, alpha=alpha, metric=metric)


def _kernel_distances(mu: DoublingMeasure, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    d = np.sqrt(np.sum((mu.support_points - x) ** 2, axis=1))
    if np.any(d == 0.0):
        raise SingularKernelError(f"evaluation point {x.tolist()} coincides with an atom")
    return d


def kernel_mass(mu: DoublingMeasure, params: ExtensionParams, x) -> float:
    """h(x) = sum_i w_i d(x, t_i)^-q  (> 0 for x off the set)."""
    d = _kernel_distances(mu, x)
    return float(np.dot(mu.support_weights, d ** -params.q))


def extend(jet: Jet, mu: DoublingMeasure, params: ExtensionParams, x) -> float:
    """Normalised kernel average of the jet's Taylor polynomials at x.

    Computed with the kernel rescaled by the nearest-atom distance so the
    ratio stays finite arbitrarily close to the set.
    """
    d = _kernel_distances(mu, x)
    s = (d / d.min()) ** -params.q  # in (0, 1], no overflow near the set
    t_vals = taylor_all(jet, x)[mu.support_indices]
    wker = mu.support_weights * s
    return float(np.dot(wker, t_vals) / wker.sum())


def kernel_mass_series(mu: DoublingMeasure, params: ExtensionParams, x, order: int) -> TaylorScalar:
    """Taylor series of h at x, rescaled by min_i d(x, t_i)^q.

    The rescale cancels in any h-normalised ratio and keeps coefficients
    in floating range close to the set.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = _kernel_distances(mu, x)
    ker = _kernel_series_batch(mu, params, x, order, d)
    return ker.weighted_sum(mu.support_weights)


def _kernel_series_batch(
    mu: DoublingMeasure, params: ExtensionParams, x, order: int, d: np.ndarray
) -> TaylorScalar:
    """Batched series of (d(x, t_i) / d_min)^-q over the support atoms."""
    pts = mu.support_points
    xs = TaylorScalar.variables(x, order)
    diffs = [xs[i] - pts[:, i] for i in range(len(xs))]
    sq = diffs[0] * diffs[0]
    for dd in diffs[1:]:
        sq = sq + dd * dd
    ker = sq.power(-params.q / 2.0)
    return ker * (d.min() ** params.q)


def _taylor_series_batch(jet: Jet, mu: DoublingMeasure, x, order: int) -> TaylorScalar:
    """Batched series of T_{t_i} f(x) over the support atoms."""
    pts = mu.support_points
    xs = TaylorScalar.variables(x, order)
    diffs = [xs[i] - pts[:, i] for i in range(len(xs))]
    powers = monomial_powers(diffs, jet.max_index_order)
    total = None
    for j in jet.indices:
        term = powers[j] * (jet.components[j][mu.support_indices] / mi_factorial(j))
        total = term if total is None else total + term
    return total


def extend_series(jet: Jet, mu: DoublingMeasure, params: ExtensionParams, x, order: int) -> TaylorScalar:
    """Taylor series of E(f) at x up to total order ``order``; coefficient
    of j times j! is the exact partial derivative D^j E(f)(x)."""
    x = np.asarray(x, dtype=float).ravel()
    d = _kernel_distances(mu, x)
    ker = _kernel_series_batch(mu, params, x, order, d)
    tay = _taylor_series_batch(jet, mu, x, order)
    num = (tay * ker).weighted_sum(mu.support_weights)
    den = ker.weighted_sum(mu.support_weights)
    return num / den


def extend_derivative(jet: Jet, mu: DoublingMeasure, params: ExtensionParams, x, a) -> float:
    """D^a E(f)(x), computed exactly via series truncation at order |a|."""
    a = as_index(a, jet.domain.n)
    max_order = jet.max_index_order + 1
    if mi_abs(a) > max_order:
        raise ValueError(f"truncation order exceeded: |a| = {mi_abs(a)} > floor(alpha) + 1 = {max_order}")
    series = extend_series(jet, mu, params, x, mi_abs(a))
    return float(series.derivative(a))


# -- smooth radial window ------------------------------------------------


def _sigma(t: float) -> float:
    return math.exp(-1.0 / t) if t > 0.0 else 0.0


def smooth_step(t: float) -> float:
    """C-infinity transition: 1 for t <= 0, 0 for t >= 1."""
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    a = _sigma(1.0 - t)
    return a / (a + _sigma(t))


def window_value(x, radius: float) -> float:
    """Radial bump equal to 1 on B(0, R) and 0 outside B(0, 2R), glued
    from exp(-1/t)."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    return smooth_step(r / radius - 1.0)


def _window_series(x, radius: float, order: int) -> TaylorScalar:
    x = np.asarray(x, dtype=float).ravel()
    r = float(np.linalg.norm(x))
    n = len(x)
    if r <= radius:
        return TaylorScalar.constant(1.0, n, order)  # flat region, all derivatives 0
    if r >= 2.0 * radius:
        return TaylorScalar.constant(0.0, n, order)
    xs = TaylorScalar.variables(x, order)
    sq = xs[0] * xs[0]
    for s in xs[1:]:
        sq = sq + s * s
    t = sq.sqrt() * (1.0 / radius) - 1.0
    u = 1.0 - t
    sig_u = (-u.reciprocal()).exp()
    sig_t = (-t.reciprocal()).exp()
    return sig_u / (sig_u + sig_t)


def _require_window_fits(sample: CompactSetSample, radius: float):
    extent = float(np.sqrt(np.max(np.sum(sample.atoms**2, axis=1))))
    if extent > radius / 2.0:
        raise ValueError(f"set extends to |x| = {extent:.6g}, outside B(0, R/2) with R = {radius:.6g}")


def windowed_extension(jet: Jet, mu: DoublingMeasure, params: ExtensionParams, radius: float, x) -> float:
    """window(x) * E(f)(x): equals the extension on B(0, R) and vanishes
    outside B(0, 2R).  Requires the set inside B(0, R/2)."""
    _require_window_fits(jet.domain, radius)
    phi = window_value(x, radius)
    if phi == 0.0:
        return 0.0
    return phi * extend(jet, mu, params, x)


def windowed_extension_series(
    jet: Jet, mu: DoublingMeasure, params: ExtensionParams, radius: float, x, order: int
) -> TaylorScalar:
    _require_window_fits(jet.domain, radius)
    phi = _window_series(x, radius, order)
    if np.ndim(phi.constant_term) == 0 and phi.constant_term == 0.0 and len(phi.coeffs) <= 1:
        return phi
    return phi * extend_series(jet, mu, params, x, order)


# -- classical Whitney baseline -------------------------------------------

_CUBE_DILATION = 9.0 / 8.0  # fixed dilation of the partition cubes


def _cube_dist(sample: CompactSetSample, corner: np.ndarray, side: float) -> float:
    """Distance from the cube [corner, corner + side]^n to the atom set."""
    clamped = np.clip(sample.atoms, corner, corner + side)
    return float(np.sqrt(np.min(np.sum((sample.atoms - clamped) ** 2, axis=1))))


def _selected(sample: CompactSetSample, level: int, cell: tuple) -> bool:
    """Whitney selection: the maximal dyadic cube with diam <= dist to E."""
    side = 2.0**-level
    diam = side * math.sqrt(sample.n)
    corner = np.array(cell, dtype=float) * side
    if _cube_dist(sample, corner, side) < diam:
        return False
    parent = tuple(v >> 1 for v in cell)
    pside = side * 2.0
    pcorner = np.array(parent, dtype=float) * pside
    return _cube_dist(sample, pcorner, pside) < pside * math.sqrt(sample.n)


def whitney_cubes_at(sample: CompactSetSample, x) -> list[tuple[int, tuple]]:
    """Selected Whitney cubes whose 9/8-dilation contains x.

    Cubes are dyadic cells over the infinite lattice; the selection rule
    gives diam(Q) <= d(Q, E) <= 4 diam(Q).  Only the bounded level range
    compatible with d(x, E) needs scanning.
    """
    x = np.asarray(x, dtype=float).ravel()
    dist = sample.nearest(x).dist
    if dist == 0.0:
        raise SingularKernelError("Whitney cubes are defined off the set only")
    rootn = math.sqrt(sample.n)
    lo_side = dist / (6.0 * rootn)
    hi_side = 2.0 * dist / rootn
    lev_lo = int(math.floor(-math.log2(hi_side))) - 1
    lev_hi = int(math.ceil(-math.log2(lo_side))) + 1
    found = []
    for level in range(lev_lo, lev_hi + 1):
        side = 2.0**-level
        half_support = (_CUBE_DILATION / 2.0) * side
        ranges = []
        for c in x:
            lo = int(math.floor((c - half_support) / side))
            hi = int(math.floor((c + half_support) / side))
            ranges.append(range(lo, hi + 1))
        cells = [()]
        for rng in ranges:
            cells = [cell + (v,) for cell in cells for v in rng]
        for cell in cells:
            center = (np.array(cell, dtype=float) + 0.5) * side
            if np.max(np.abs(x - center)) > half_support:
                continue
            if _selected(sample, level, cell):
                found.append((level, cell))
    return found


def _cube_bump(x: np.ndarray, level: int, cell: tuple) -> float:
    """Tensor bump supported on the 9/8-dilated cube."""
    side = 2.0**-level
    center = (np.array(cell, dtype=float) + 0.5) * side
    t = np.abs(x - center) / ((_CUBE_DILATION / 2.0) * side)
    if np.any(t >= 1.0):
        return 0.0
    return float(np.prod(np.exp(-1.0 / (1.0 - t**2))))


def whitney_baseline(jet: Jet, x, partition_tol: float = 1e-12) -> float:
    """Classical cover-and-glue extension: sum_i phi_i(x) T_{x_i} f(x) with
    phi a partition of unity on Whitney cubes and x_i the atom nearest
    each cube centre.  The partition weights are checked to sum to 1."""
    x = np.asarray(x, dtype=float).ravel()
    sample = jet.domain
    cubes = whitney_cubes_at(sample, x)
    if not cubes:
        raise RuntimeError(f"no Whitney cube found at {x.tolist()}; level scan failed")
    bumps = []
    values = []
    for level, cell in cubes:
        b = _cube_bump(x, level, cell)
        if b == 0.0:
            continue
        side = 2.0**-level
        center = (np.array(cell, dtype=float) + 0.5) * side
        base = sample.nearest(center).index
        bumps.append(b)
        values.append(taylor(jet, base, x))
    total = sum(bumps)
    if total <= 0.0:
        raise RuntimeError(f"empty partition of unity at {x.tolist()}")
    weights = [b / total for b in bumps]
    if abs(sum(weights) - 1.0) > partition_tol:
        raise RuntimeError(f"partition weights sum to {sum(weights)!r} at {x.tolist()}")
    return float(sum(wgt * val for wgt, val in zip(weights, values)))


# -- grid assembly ----------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    origin: tuple
    spacing: tuple
    counts: tuple

    def __post_init__(self):
        if not (len(self.origin) == len(self.spacing) == len(self.counts)):
            raise ValueError("origin, spacing and counts must share a length")
        if any(c < 1 for c in self.counts):
            raise ValueError("counts must be >= 1")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be > 0")

    @property
    def n(self) -> int:
        return len(self.origin)

    def nodes(self) -> np.ndarray:
        axes = [o + s * np.arange(c) for o, s, c in zip(self.origin, self.spacing, self.counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass
class FieldGrid:
    """Sampled field: the jet value on atoms, the extension elsewhere,
    plus any requested derivative components."""

    spec: GridSpec
    values: np.ndarray
    derivs: dict = field(default_factory=dict)
    on_set: np.ndarray | None = None


def assemble_g(
    jet: Jet,
    mu: DoublingMeasure,
    params: ExtensionParams,
    spec: GridSpec,
    derivs: tuple = (),
) -> FieldGrid:
    """Evaluate the glued function g (jet on E, extension off E) on a grid."""
    nodes = spec.nodes()
    n = jet.domain.n
    deriv_idx = [as_index(a, n) for a in derivs]
    order = max([mi_abs(a) for a in deriv_idx], default=0)
    values = np.empty(len(nodes))
    on_set = np.zeros(len(nodes), dtype=bool)
    dout = {a: np.empty(len(nodes)) for a in deriv_idx}
    for i, node in enumerate(nodes):
        near = jet.domain.nearest(node)
        if near.dist == 0.0:
            on_set[i] = True
            values[i] = float(jet.components[(0,) * n][near.index])
            for a in deriv_idx:
                comp = jet.components.get(a)
                dout[a][i] = float(comp[near.index]) if comp is not None else np.nan
            continue
        if order:
            series = extend_series(jet, mu, params, node, order)
            values[i] = float(series.constant_term)
            for a in deriv_idx:
                dout[a][i] = float(series.derivative(a))
        else:
            values[i] = extend(jet, mu, params, node)
    shape = tuple(spec.counts)
    return FieldGrid(
        spec=spec,
        values=values.reshape(shape),
        derivs={a: v.reshape(shape) for a, v in dout.items()},
        on_set=on_set.reshape(shape),
    )


def moment_ratio(mu: DoublingMeasure, params: ExtensionParams, x, t_index: int, a: float) -> float:
    """Sampled ratio for the kernel moment bound

        sum_i w_i d(t, t_i)^a d(x, t_i)^-q
            <= C d(t, x)^a d(x, E)^-q mu(B(x0, 3 d(x, E))).

    Returns lhs / rhs-without-C; a refinement-stable supremum of this over
    samples estimates C.
    """
    from jetext.measure import ball_mass  # local import to avoid cycle noise

    x = np.asarray(x, dtype=float).ravel()
    t = mu.support_points[t_index]
    d = _kernel_distances(mu, x)
    dt = np.sqrt(np.sum((mu.support_points - t) ** 2, axis=1))
    lhs = float(np.dot(mu.support_weights, dt**a * d ** -params.q))
    near = mu.sample.nearest(x)
    mass = ball_mass(mu, near.point, 3.0 * near.dist)
    rhs = float(np.linalg.norm(t - x) ** a * near.dist ** -params.q * mass)
    return lhs / rhs


# -- field grid files -------------------------------------------------------


def save_field(grid: FieldGrid, path) -> None:
    """Header (origin, spacing, counts, derivative list) then row-major
    node lines: value, on-set flag, derivative components."""
    spec = grid.spec
    didx = sorted(grid.derivs)
    lines = [
        "origin " + " ".join("%.17g" % v for v in spec.origin),
        "spacing " + " ".join("%.17g" % v for v in spec.spacing),
        "counts " + " ".join(str(c) for c in spec.counts),
        "derivs " + (" ".join(",".join(str(v) for v in a) for a in didx) if didx else "-"),
    ]
    vals = grid.values.ravel()
    flags = grid.on_set.ravel() if grid.on_set is not None else np.zeros(vals.shape, dtype=bool)
    dcols = [grid.derivs[a].ravel() for a in didx]
    for i in range(len(vals)):
        row = ["%.17g" % vals[i], "1" if flags[i] else "0"]
        row.extend("%.17g" % col[i] for col in dcols)
        lines.append(" ".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_field(path) -> FieldGrid:
    text = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    head = {}
    for ln in text[:4]:
        key, _, rest = ln.partition(" ")
        head[key] = rest.split()
    spec = GridSpec(
        origin=tuple(float(v) for v in head["origin"]),
        spacing=tuple(float(v) for v in head["spacing"]),
        counts=tuple(int(v) for v in head["counts"]),
    )
    didx = [] if head["derivs"] == ["-"] else [tuple(int(v) for v in tok.split(",")) for tok in head["derivs"]]
    rows = text[4:]
    total = int(np.prod(spec.counts))
    if len(rows) != total:
        raise ValueError(f"{path}: expected {total} node lines, got {len(rows)}")
    vals = np.empty(total)
    flags = np.empty(total, dtype=bool)
    dcols = {a: np.empty(total) for a in didx}
    for i, ln in enumerate(rows):
        toks = ln.split()
        vals[i] = float(toks[0])
        flags[i] = toks[1] == "1"
        for k, a in enumerate(didx):
            dcols[a][i] = float(toks[2 + k])
    shape = tuple(spec.counts)
    return FieldGrid(
        spec=spec,
        values=vals.reshape(shape),
        derivs={a: v.reshape(shape) for a, v in dcols.items()},
        on_set=flags.reshape(shape),
    )
