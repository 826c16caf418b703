"""Bundled fixtures backing the default verification suites and the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from jetext.extension import ExtensionParams
from jetext.geometry import CompactSetSample, generate_set
from jetext.holo import DiskJet, circle_sample, disk_jet
from jetext.jets import Jet, induce_jet, poly_jet
from jetext.measure import DoublingMeasure, build_measure

__all__ = [
    "Fixture",
    "cantor_sin_fixture",
    "cantor_poly_fixture",
    "interval_fixture",
    "circle_fixture",
    "disk_identity_jet",
    "disk_holder_jet",
]


@dataclass(frozen=True)
class Fixture:
    sample: CompactSetSample
    mu: DoublingMeasure
    jet: Jet | DiskJet | None
    params: ExtensionParams | None


@lru_cache(maxsize=None)
def cantor_sin_fixture(depth: int, alpha: float = 1.5, q: float = 3.5) -> Fixture:
    """Sine jet on middle-thirds atoms: the standard non-polynomial fixture.

    The dyadic tree depth matches the set depth (aligned ternary-to-dyadic
    covering); deeper trees compound split imbalances and degrade the
    doubling constants.
    """
    sample = generate_set("cantor", depth)
    mu = build_measure(sample, depth)
    jet = induce_jet(sample, alpha, {0: math.sin, 1: math.cos})
    return Fixture(sample, mu, jet, ExtensionParams(q=q, alpha=alpha))


@lru_cache(maxsize=None)
def cantor_poly_fixture(depth: int, alpha: float = 2.0, q: float = 3.5) -> Fixture:
    """Jet of 1 + 2x - x^2; degree <= alpha, so every remainder vanishes."""
    sample = generate_set("cantor", depth)
    mu = build_measure(sample, depth)
    jet = poly_jet(sample, alpha, {(0,): 1.0, (1,): 2.0, (2,): -1.0})
    return Fixture(sample, mu, jet, ExtensionParams(q=q, alpha=alpha))


@lru_cache(maxsize=None)
def interval_fixture(depth: int, alpha: float = 1.5, q: float = 3.5) -> Fixture:
    sample = generate_set("interval", depth)
    mu = build_measure(sample, depth)
    jet = induce_jet(sample, alpha, {0: math.sin, 1: math.cos})
    return Fixture(sample, mu, jet, ExtensionParams(q=q, alpha=alpha))


@lru_cache(maxsize=None)
def circle_fixture(depth: int) -> Fixture:
    """Full circle with 2^depth equispaced atoms and a near-uniform measure."""
    angles = 2.0 * math.pi * np.arange(2**depth) / 2**depth
    sample = circle_sample(angles)
    mu = build_measure(sample, depth + 3)
    return Fixture(sample, mu, None, None)


def disk_identity_jet(sample: CompactSetSample) -> DiskJet:
    """Boundary jet of F(z) = z (order 1): reproduced exactly by the
    holomorphic extension."""
    return disk_jet(sample, 1.0, {0: lambda z: z, 1: lambda z: 1.0})


def disk_holder_jet(sample: CompactSetSample, alpha: float = 1.6) -> DiskJet:
    """Boundary jet of F(z) = (1 - z)^alpha, a genuinely Hoelder-alpha
    holomorphic profile (principal branch)."""

    def deriv(k: int):
        fac = 1.0
        for i in range(k):
            fac *= alpha - i
        sign = (-1.0) ** k
        return lambda z: sign * fac * (1.0 - z) ** (alpha - k)

    return disk_jet(sample, alpha, {k: deriv(k) for k in range(int(math.floor(alpha)) + 1)})
