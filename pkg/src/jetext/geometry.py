"""Points, metrics, compact-set samples, and nearest-point queries.

Compact sets are represented as finite atom clouds at a declared
resolution; every integral elsewhere in the package becomes a finite
weighted sum over the atoms.  All objects here are immutable after
construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "Metric",
    "EUCLIDEAN",
    "DISK_FORM",
    "Generator",
    "CompactSetSample",
    "Nearest",
    "distance",
    "nearest_point",
    "generate_set",
    "read_point_file",
    "write_point_file",
]


@dataclass(frozen=True)
class Metric:
    """Distance selector.

    ``isotropic`` is the Euclidean metric on R^n.  ``non-isotropic-disk``
    is the pairing form |1 - z*conj(w)| on the closed unit disk (points
    are (re, im) pairs); it satisfies the triangle inequality only up to
    a constant.
    """

    kind: str = "isotropic"

    def __post_init__(self):
        if self.kind not in ("isotropic", "non-isotropic-disk"):
            raise ValueError(f"unknown metric kind: {self.kind!r}")


EUCLIDEAN = Metric("isotropic")
DISK_FORM = Metric("non-isotropic-disk")


def distance(x, y, metric: Metric = EUCLIDEAN) -> float:
    """Distance between two points under the chosen metric."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if metric.kind == "isotropic":
        return float(np.linalg.norm(x - y))
    if x.shape[0] != 2:
        raise ValueError("the disk form is defined for 2-d points (re, im)")
    z = complex(x[0], x[1])
    w = complex(y[0], y[1])
    return abs(1.0 - z * w.conjugate())


@dataclass(frozen=True)
class Generator:
    """Self-similar description: contracting affine maps applied to a base
    point set, iterated ``depth`` times."""

    maps: tuple
    base: tuple
    depth: int


class Nearest(NamedTuple):
    index: int
    point: np.ndarray
    dist: float


class CompactSetSample:
    """Finite stand-in for a compact set E.

    ``atoms`` is an (m, n) array of pairwise-distinct points.  When a
    generator is present, the atoms are exactly the depth-k images of the
    base set under the map semigroup and ``resolution`` bounds the
    distance from any point of the ideal set to its nearest atom.
    """

    def __init__(self, atoms, resolution: float, generator: Generator | None = None):
        pts = np.array(atoms, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("atom list must be a nonempty (m, n) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atoms must have finite coordinates")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("atoms must be pairwise distinct")
        if not resolution > 0:
            raise ValueError("resolution must be positive")
        pts.setflags(write=False)
        self.atoms = pts
        self.resolution = float(resolution)
        self.generator = generator

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    @cached_property
    def diameter(self) -> float:
        pts = self.atoms
        best = 0.0
        # chunked exact scan; sets stay small enough for this to be cheap
        for lo in range(0, len(pts), 256):
            block = pts[lo : lo + 256]
            d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
            best = max(best, float(np.sqrt(d2.max())))
        return best

    @cached_property
    def _index(self) -> cKDTree:
        return cKDTree(self.atoms)

    def distances_to(self, x) -> np.ndarray:
        """Euclidean distance from ``x`` to every atom, in atom order."""
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: {x.shape[0]} vs {self.n}")
        return np.sqrt(np.sum((self.atoms - x) ** 2, axis=1))

    def nearest(self, x) -> Nearest:
        """Nearest atom to ``x``; ties broken by lowest atom index.

        Uses the KD-tree index for the candidate radius and an exact
        rescan among candidates so the tie rule is deterministic.
        """
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: {x.shape[0]} vs {self.n}")
        d0, _ = self._index.query(x)
        radius = d0 * (1.0 + 1e-12) + 5e-324
        cand = sorted(self._index.query_ball_point(x, radius))
        if not cand:  # pragma: no cover - query() guarantees a candidate
            cand = list(range(len(self)))
        dists = np.sqrt(np.sum((self.atoms[cand] - x) ** 2, axis=1))
        dmin = float(dists.min())
        idx = cand[int(np.flatnonzero(dists == dmin)[0])]
        return Nearest(idx, self.atoms[idx], dmin)


def nearest_point(x, sample: CompactSetSample) -> Nearest:
    """Nearest atom of ``sample`` to ``x`` (index, point, distance)."""
    return sample.nearest(x)


def _cantor_numerators(depth: int) -> list[int]:
    nums = [0]
    for level in range(1, depth + 1):
        shift = 2 * 3 ** (level - 1)
        nums = nums + [n + shift for n in nums]
    return sorted(nums)


_SIERPINSKI_VERTICES = (
    np.array([0.0, 0.0]),
    np.array([1.0, 0.0]),
    np.array([0.5, math.sqrt(3.0) / 2.0]),
)


def generate_set(kind: str, depth: int, **params) -> CompactSetSample:
    """Deterministic test-set factory.

    Kinds: ``interval`` (2^k + 1 equispaced atoms on [0, 1]), ``cantor``
    (left endpoints of the surviving middle-thirds intervals), ``sierpinski``
    (3^k gasket atoms), ``circle-arc`` (atoms on an arc of the unit circle),
    ``file`` (point-cloud file, see :func:`read_point_file`).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")

    if kind == "interval":
        count = 2**depth + 1
        atoms = np.linspace(0.0, 1.0, count)
        gen = Generator(maps=("x/2", "x/2 + 1/2"), base=(0.0, 1.0), depth=depth)
        return CompactSetSample(atoms, resolution=0.5 ** (depth + 1), generator=gen)

    if kind == "cantor":
        scale = 3.0**depth
        atoms = np.array(_cantor_numerators(depth), dtype=float) / scale
        gen = Generator(maps=("x/3", "x/3 + 2/3"), base=(0.0,), depth=depth)
        return CompactSetSample(atoms, resolution=3.0 ** (-depth), generator=gen)

    if kind == "sierpinski":
        pts = [np.zeros(2)]
        for _ in range(depth):
            pts = [(p + v) / 2.0 for v in _SIERPINSKI_VERTICES for p in pts]
        gen = Generator(maps=("(x+v)/2 for gasket vertices v",), base=((0.0, 0.0),), depth=depth)
        return CompactSetSample(np.array(pts), resolution=0.5**depth, generator=gen)

    if kind == "circle-arc":
        theta0 = float(params.get("theta0", 0.0))
        theta1 = float(params.get("theta1", 2.0 * math.pi))
        span = theta1 - theta0
        if span <= 0:
            raise ValueError("circle-arc needs theta1 > theta0")
        full = abs(span - 2.0 * math.pi) < 1e-12
        count = 2**depth if full else 2**depth + 1
        angles = theta0 + span * np.arange(count) / (count if full else count - 1)
        atoms = np.column_stack([np.cos(angles), np.sin(angles)])
        gap = span / count if full else span / max(count - 1, 1)
        resolution = max(2.0 * math.sin(min(gap, math.pi) / 4.0), 1e-300)
        return CompactSetSample(atoms, resolution=resolution)

    if kind == "file":
        path = params.get("path")
        if path is None:
            raise ValueError("kind 'file' needs a path parameter")
        atoms = read_point_file(path)
        res = params.get("resolution")
        if res is None:
            # fall back to half the median nearest-neighbour spacing
            sample = CompactSetSample(atoms, resolution=1.0)
            d, _ = sample._index.query(atoms, k=2)
            res = max(float(np.median(d[:, 1])) / 2.0, 1e-300)
        return CompactSetSample(atoms, resolution=float(res))

    raise ValueError(f"unknown set kind: {kind!r}")


def read_point_file(path) -> np.ndarray:
    """Read a point cloud: one point per line, whitespace-separated decimal
    coordinates, ``#`` comments; dimension inferred from the first line."""
    rows: list[list[float]] = []
    dim = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed coordinate line") from exc
        if dim is None:
            dim = len(vals)
        elif len(vals) != dim:
            raise ValueError(f"{path}:{lineno}: expected {dim} coordinates, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no points found")
    return np.array(rows, dtype=float)


def write_point_file(path, atoms: Sequence | np.ndarray, header: str | None = None) -> None:
    pts = np.atleast_2d(np.asarray(atoms, dtype=float))
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for row in pts:
        lines.append(" ".join("%.17g" % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
