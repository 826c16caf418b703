"""Doubling-measure construction on compact-set samples.

A dyadic mass tree over the atoms carries mass 1 at the root and splits
it equally among occupied children down to a requested depth; leaf mass
is assigned to the atom nearest the leaf centre.  The tree masses are
exact rationals so conservation holds exactly at every level even when
an occupied-children count is not a power of two.

The construction is a stand-in: nothing guarantees the result is
doubling, so :func:`certify` samples the volume-growth conditions and
fails loudly when they are violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from jetext.geometry import CompactSetSample, distance

__all__ = [
    "MeasureBuildError",
    "DyadicNode",
    "DyadicTree",
    "DoublingMeasure",
    "MeasureCertificate",
    "build_measure",
    "ball_mass",
    "pair_mass",
    "certify",
    "save_measure",
    "load_measure",
]


class MeasureBuildError(RuntimeError):
    """Raised when the dyadic construction cannot produce a valid measure."""


@dataclass
class DyadicNode:
    center: np.ndarray
    half: float
    mass: Fraction
    level: int
    children: dict = field(default_factory=dict)  # child bit-index -> DyadicNode

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class DyadicTree:
    root: DyadicNode
    depth: int
    n: int


class DoublingMeasure:
    """Probability measure supported on (a subset of) the atoms of E.

    ``weights`` is aligned with ``sample.atoms`` and may contain zeros
    when several leaves aggregate onto one atom; the support accessors
    expose only the positive-weight atoms.  Immutable after construction
    and safe for concurrent reads.
    """

    def __init__(self, sample: CompactSetSample, weights, tree: DyadicTree | None, depth: int):
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(sample),):
            raise ValueError("weights must align with the atom list")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {total!r})")
        w.setflags(write=False)
        self.sample = sample
        self.weights = w
        self.tree = tree
        self.depth = depth
        sup = np.flatnonzero(w > 0)
        self.support_indices = sup
        self.support_points = sample.atoms[sup]
        self.support_weights = w[sup]

    @property
    def atoms(self) -> list[tuple[np.ndarray, float]]:
        """Positive-weight (point, weight) pairs."""
        return [(p, float(w)) for p, w in zip(self.support_points, self.support_weights)]

    @property
    def diameter(self) -> float:
        return self.sample.diameter

    @property
    def resolution(self) -> float:
        """Smallest scale at which the measure has structure: the sample
        resolution or the largest nearest-neighbour gap of the support,
        whichever is coarser.  Leaf aggregation can thin the support, so
        this may exceed the sample resolution."""
        if len(self.support_points) == 1:
            return self.sample.resolution
        pts = self.support_points
        worst = 0.0
        for lo in range(0, len(pts), 256):
            block = pts[lo : lo + 256]
            d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
            d2[d2 == 0.0] = np.inf
            worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
        return max(self.sample.resolution, worst)


def _split_indices(atoms: np.ndarray, idx: np.ndarray, center: np.ndarray) -> dict[int, np.ndarray]:
    """Partition atom indices among the 2^n children of a cube.

    Membership is by coordinate comparison against the centre (>= goes to
    the high child), so every atom lands in exactly one child.
    """
    bits = (atoms[idx] >= center).astype(int)
    keys = bits @ (1 << np.arange(atoms.shape[1]))
    return {int(k): idx[keys == k] for k in np.unique(keys)}


def build_measure(sample: CompactSetSample, depth: int, weighting: str = "equal-split") -> DoublingMeasure:
    """Equal-split dyadic measure on the atoms of ``sample``.

    Mass 1 at the root is divided equally among occupied children,
    recursively to ``depth``; each leaf's mass goes to the atom nearest
    the leaf centre (lowest index on ties), aggregating when several
    leaves map to one atom.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > 52:
        raise MeasureBuildError("depth exceeds float cell resolution (max 52)")
    if weighting != "equal-split":
        raise ValueError(f"unknown weighting: {weighting!r}")

    atoms = sample.atoms
    n = sample.n
    lo = atoms.min(axis=0)
    hi = atoms.max(axis=0)
    center = (lo + hi) / 2.0
    half = float((hi - lo).max()) / 2.0
    if half == 0.0:
        half = 0.5  # single atom: any positive root cube works

    weights = [Fraction(0)] * len(sample)
    offsets = np.array([[(k >> i) & 1 for i in range(n)] for k in range(2**n)], dtype=float)
    offsets = offsets * 2.0 - 1.0  # child centre offsets in units of half/2

    def build(idx: np.ndarray, ctr: np.ndarray, h: float, level: int, mass: Fraction) -> DyadicNode:
        node = DyadicNode(center=ctr.copy(), half=h, mass=mass, level=level)
        if level == depth:
            if idx.size == 0:
                raise MeasureBuildError(
                    "occupied leaf contains no atom: tree depth exceeds the sample resolution"
                )
            weights[sample.nearest(ctr).index] += mass
            return node
        parts = _split_indices(atoms, idx, ctr)
        share = mass / len(parts)
        for key, sub in sorted(parts.items()):
            child_ctr = ctr + offsets[key] * (h / 2.0)
            node.children[key] = build(sub, child_ctr, h / 2.0, level + 1, share)
        return node

    root = build(np.arange(len(sample)), center, half, 0, Fraction(1))
    total = sum(weights, Fraction(0))
    if total != 1:
        raise MeasureBuildError(f"mass leak during construction: total {total}")
    tree = DyadicTree(root=root, depth=depth, n=n)
    return DoublingMeasure(sample, np.array([float(w) for w in weights]), tree, depth)


def ball_mass(mu: DoublingMeasure, x, r: float) -> float:
    """Mass of the closed ball B(x, r)."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    x = np.asarray(x, dtype=float).ravel()
    d = np.sqrt(np.sum((mu.support_points - x) ** 2, axis=1))
    return float(mu.support_weights[d <= r].sum())


def pair_mass(mu: DoublingMeasure, t, s) -> float:
    """mu(B(t, d(t, s))).  One-sided: pair_mass(t, s) != pair_mass(s, t) in general."""
    return ball_mass(mu, t, distance(t, s))


@dataclass(frozen=True)
class MeasureCertificate:
    """Sampled volume-growth certificate.

    ``c_up`` is the worst observed ratio mu(B(x,kR)) / (k^gamma mu(B(x,R)))
    and ``c_low`` the smallest observed mu(B(x,kR)) / (k^lambda mu(B(x,R))).
    """

    gamma_up: float
    lambda_low: float
    c_up: float
    c_low: float
    samples: int
    passed: bool
    c_max: float
    witness_up: tuple
    witness_low: tuple

    @property
    def pass_(self) -> bool:
        return self.passed


def certify(
    mu: DoublingMeasure,
    gamma: float,
    lam: float,
    trials: int,
    seed: int,
    c_max: float = 16.0,
    min_scale_factor: float = 4.0,
    k_range: tuple[float, float] | None = None,
) -> MeasureCertificate:
    """Sample (x, R, k) with 0 < R < kR <= diam and record the extremal
    volume-growth ratios against k^gamma (above) and k^lambda (below).

    Scales below ``min_scale_factor`` times the atom resolution are
    excluded: the discrete measure cannot be doubling below its
    resolution.  Deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if gamma < lam:
        raise ValueError("gamma must be >= lambda")
    rng = np.random.default_rng(seed)
    diam = mu.diameter
    if diam == 0.0:
        raise ValueError("cannot certify a single-atom measure")
    r_lo = min_scale_factor * mu.resolution
    r_hi = diam / 2.0
    if r_lo >= r_hi:
        raise ValueError("no admissible scales above the measure resolution")

    pts = mu.support_points
    c_up = -np.inf
    c_low = np.inf
    wit_up = wit_low = ()
    for _ in range(trials):
        i = int(rng.integers(len(pts)))
        x = pts[i]
        r = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_hi))))
        if k_range is None:
            k_hi = diam / r
            k = float(np.exp(rng.uniform(0.0, np.log(k_hi))))
            k = max(k, 1.0 + 1e-12)
        else:
            k = float(np.exp(rng.uniform(np.log(k_range[0]), np.log(k_range[1]))))
        inner = ball_mass(mu, x, r)
        outer = ball_mass(mu, x, min(k * r, diam * (1 + 1e-12)))
        assert inner > 0.0, "x lies in the support, so B(x, r) has positive mass"
        up = outer / (k**gamma * inner)
        low = outer / (k**lam * inner)
        if up > c_up:
            c_up, wit_up = up, (i, r, k)
        if low < c_low:
            c_low, wit_low = low, (i, r, k)

    passed = bool(c_up <= c_max and c_low >= 1.0 / c_max)
    return MeasureCertificate(
        gamma_up=gamma,
        lambda_low=lam,
        c_up=float(c_up),
        c_low=float(c_low),
        samples=trials,
        passed=passed,
        c_max=c_max,
        witness_up=wit_up,
        witness_low=wit_low,
    )


def save_measure(mu: DoublingMeasure, path) -> None:
    """Write ``n depth count`` header plus one ``x1 .. xn weight`` line per
    atom, 17 significant digits so weights round-trip bit-exactly."""
    lines = [f"{mu.sample.n} {mu.depth} {len(mu.sample)}"]
    for point, w in zip(mu.sample.atoms, mu.weights):
        coords = " ".join("%.17g" % c for c in point)
        lines.append(f"{coords} {'%.17g' % w}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_measure(path) -> DoublingMeasure:
    """Inverse of :func:`save_measure`.  The tree is not serialised; ball
    queries need only the weighted atoms.  ``#`` comment lines are skipped."""
    text = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not text:
        raise ValueError(f"{path}: empty measure file")
    try:
        n, depth, count = (int(tok) for tok in text[0].split())
    except ValueError as exc:
        raise ValueError(f"{path}: malformed measure header") from exc
    rows = text[1:]
    if len(rows) != count:
        raise ValueError(f"{path}: expected {count} atom lines, got {len(rows)}")
    atoms = np.empty((count, n))
    weights = np.empty(count)
    for i, ln in enumerate(rows):
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != n + 1:
            raise ValueError(f"{path}: atom line {i + 1} has {len(vals)} fields, expected {n + 1}")
        atoms[i] = vals[:n]
        weights[i] = vals[n]
    # resolution is not stored; use half the smallest positive pairwise gap
    sample = CompactSetSample(atoms, resolution=1.0)
    d, _ = sample._index.query(atoms, k=2)
    res = max(float(np.min(d[:, 1])) / 2.0, 1e-300)
    sample = CompactSetSample(atoms, resolution=res)
    return DoublingMeasure(sample, weights, tree=None, depth=depth)
