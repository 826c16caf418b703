"""Holomorphic kernel variant on the unit disk (n = 1).

The pairing form tau(z, w) = 1 - z*conj(w) replaces the Euclidean
kernel distance; on the circle its modulus equals the chordal distance.
With principal-branch powers (safe because Re tau > 0 on the open disk)
the kernel mass and the extension are holomorphic in z wherever the
mass is nonzero, and jets on closed subsets of the circle extend
holomorphically into the disk.

The lower bound |h(z)| >= C d(z, E)^-q mu(B_z) is never assumed: every
extension call path first consults a cached zero-free-region scan for
the requested evaluation radius, and a failing bound is a valid report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping
from weakref import WeakKeyDictionary

import numpy as np

from jetext.geometry import CompactSetSample
from jetext.measure import DoublingMeasure, ball_mass
from jetext.report import VerificationReport, stability_pass
from jetext.taylor_arithmetic import TaylorScalar

__all__ = [
    "CirclePoint",
    "DiskKernelParams",
    "DiskJet",
    "ZeroDenominatorError",
    "circle_sample",
    "disk_form",
    "disk_kernel_mass",
    "disk_extend",
    "disk_extend_series",
    "disk_extend_derivative",
    "zero_free_scan",
    "check_kernel_lower_bound",
    "check_derivative_growth",
    "radial_derivative_scan",
    "disk_jet",
    "read_angle_file",
    "write_angle_file",
    "write_polar_grid",
]


@dataclass(frozen=True)
class CirclePoint:
    """Point of the unit circle by its angle in [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    @property
    def coordinate(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))


@dataclass(frozen=True)
class DiskKernelParams:
    q: float
    alpha: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be > 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")

    @property
    def small_q_regime(self) -> bool:
        """q < 1: the regime where the kernel lower bound is automatic for
        upsilon < q."""
        return self.q < 1.0


class ZeroDenominatorError(ArithmeticError):
    """The kernel mass vanishes (or nearly so) at the requested point."""

    def __init__(self, z: complex, value: complex):
        self.z = z
        self.value = value
        super().__init__(f"kernel mass ~ {value!r} at z = {z!r}")


def circle_sample(angles) -> CompactSetSample:
    """Embed circle angles into R^2 as a compact-set sample."""
    angles = np.asarray(angles, dtype=float).ravel()
    if angles.size == 0:
        raise ValueError("need at least one angle")
    srt = np.sort(angles % (2.0 * math.pi))
    gaps = np.diff(np.concatenate([srt, [srt[0] + 2.0 * math.pi]]))
    res = max(2.0 * math.sin(min(float(gaps.max()), math.pi) / 4.0), 1e-300)
    atoms = np.column_stack([np.cos(angles), np.sin(angles)])
    return CompactSetSample(atoms, resolution=res)


class DiskJet:
    """Jet on a closed subset of the circle: integer-order complex
    components over the atoms (all derivative weights are 1 for n = 1)."""

    def __init__(self, sample: CompactSetSample, order: float, components: Mapping[int, np.ndarray]):
        if sample.n != 2:
            raise ValueError("disk jets live on circle samples embedded in R^2")
        if not order > 0:
            raise ValueError("jet order must be > 0")
        self.sample = sample
        self.order = float(order)
        comps = {}
        for k, vals in components.items():
            arr = np.asarray(vals, dtype=complex)
            if arr.shape != (len(sample),):
                raise ValueError(f"component {k} has shape {arr.shape}")
            comps[int(k)] = arr
        for k in range(self.max_index_order + 1):
            if k not in comps:
                raise ValueError(f"missing component of order {k}")
        self.components = comps

    @property
    def max_index_order(self) -> int:
        return int(math.floor(self.order))

    @property
    def boundary_points(self) -> np.ndarray:
        return self.sample.atoms[:, 0] + 1j * self.sample.atoms[:, 1]


def disk_jet(sample: CompactSetSample, order: float, derivs: Mapping[int, Callable]) -> DiskJet:
    """Induce a disk jet from complex derivative callables d^k F."""
    zs = sample.atoms[:, 0] + 1j * sample.atoms[:, 1]
    comps = {}
    for k in range(int(math.floor(order)) + 1):
        if k not in derivs:
            raise ValueError(f"missing derivative of order {k}")
        comps[k] = np.array([complex(derivs[k](z)) for z in zs])
    return DiskJet(sample, order, comps)


def disk_form(z: complex, w: complex) -> complex:
    """tau(z, w) = 1 - z * conj(w); |tau| equals |z - w| when |z| = |w| = 1."""
    return 1.0 - complex(z) * complex(w).conjugate()


def _support_circle(mu: DoublingMeasure) -> tuple[np.ndarray, np.ndarray]:
    pts = mu.support_points
    if pts.shape[1] != 2:
        raise ValueError("disk kernels need a measure on a circle sample in R^2")
    return pts[:, 0] + 1j * pts[:, 1], mu.support_weights


def disk_kernel_mass(mu: DoublingMeasure, q: float, z: complex) -> complex:
    """h(z) = sum_i w_i (1 - z conj(w_i))^-q  with the principal branch.

    Well defined on the closed disk away from the atoms: Re(1 - z conj(w))
    vanishes on the circle only at w itself.
    """
    ws, weights = _support_circle(mu)
    tau = 1.0 - z * np.conj(ws)
    if np.any(tau == 0.0):
        raise ZeroDenominatorError(z, 0.0)
    return complex(np.dot(weights, np.power(tau, -q)))


def disk_distance(mu: DoublingMeasure, z: complex) -> tuple[float, complex]:
    """min_i |1 - z conj(w_i)| and the nearest boundary atom."""
    ws, _ = _support_circle(mu)
    vals = np.abs(1.0 - z * np.conj(ws))
    i = int(np.argmin(vals))
    return float(vals[i]), complex(ws[i])


@dataclass(frozen=True)
class ZeroFreeCertificate:
    radius: float
    q: float
    min_scaled_mass: float
    argmin: complex
    zero_free: bool


_CERT_CACHE: "WeakKeyDictionary[DoublingMeasure, dict]" = WeakKeyDictionary()


def zero_free_scan(
    mu: DoublingMeasure, q: float, radius: float, radii: int = 24, rays: int = 96, tol: float = 1e-9
) -> ZeroFreeCertificate:
    """Polar-grid scan of |h(z)| / sum_i w_i |tau|^-q over |z| <= radius.

    The scaled mass lies in (0, 1] and vanishes exactly where cancellation
    kills the kernel mass; the certificate records the grid minimum and
    its location.  Cached per measure and (q, radius, grid) key.
    """
    radius = min(float(radius), 1.0 - 1e-9)
    key = (float(q), round(radius, 6), radii, rays)
    cache = _CERT_CACHE.setdefault(mu, {})
    if key in cache:
        return cache[key]
    ws, weights = _support_circle(mu)
    best = math.inf
    argmin = 0.0 + 0.0j
    for r in np.linspace(0.0, radius, radii):
        for theta in np.arange(rays) * (2.0 * math.pi / rays) + math.pi / (2 * rays):
            z = r * complex(math.cos(theta), math.sin(theta))
            tau = 1.0 - z * np.conj(ws)
            mags = np.abs(tau)
            if np.any(mags == 0.0):
                continue
            scale = float(np.dot(weights, mags**-q))
            ratio = abs(complex(np.dot(weights, np.power(tau, -q)))) / scale
            if ratio < best:
                best = ratio
                argmin = z
    cert = ZeroFreeCertificate(
        radius=radius, q=q, min_scaled_mass=best, argmin=argmin, zero_free=best > tol
    )
    cache[key] = cert
    return cert


def _require_zero_free(mu: DoublingMeasure, q: float, z: complex):
    r = min(abs(z), 1.0 - 1e-9)
    bucket = math.ceil(max(r, 1.0 / 16.0) * 16.0) / 16.0
    cert = zero_free_scan(mu, q, bucket)
    if not cert.zero_free:
        raise ZeroDenominatorError(cert.argmin, cert.min_scaled_mass)


def disk_extend(jet: DiskJet, mu: DoublingMeasure, params: DiskKernelParams, z: complex) -> complex:
    """Holomorphic kernel average of the jet's Taylor polynomials at z.

    Taylor polynomials are taken in the coordinate z - zeta with integer
    weights; the value is holomorphic wherever the kernel mass is nonzero.
    """
    _require_zero_free(mu, params.q, z)
    ws, weights = _support_circle(mu)
    tau = 1.0 - z * np.conj(ws)
    mags = np.abs(tau)
    if np.any(mags == 0.0):
        raise ZeroDenominatorError(z, 0.0)
    ker = weights * np.power(tau, -params.q) * (mags.min() ** params.q)
    tpoly = np.zeros(len(ws), dtype=complex)
    fac = 1.0
    for k in range(jet.max_index_order + 1):
        fac = math.factorial(k)
        tpoly += jet.components[k] * (z - ws) ** k / fac
    den = complex(ker.sum())
    if abs(den) <= 1e-12 * float(np.dot(weights, (mags / mags.min()) ** -params.q)):
        raise ZeroDenominatorError(z, den)
    return complex(np.dot(ker, tpoly) / den)


def disk_extend_series(
    jet: DiskJet, mu: DoublingMeasure, params: DiskKernelParams, z: complex, order: int
) -> TaylorScalar:
    """Complex Taylor series of the extension in z (one complex variable)."""
    _require_zero_free(mu, params.q, z)
    ws, weights = _support_circle(mu)
    mags = np.abs(1.0 - z * np.conj(ws))
    if np.any(mags == 0.0):
        raise ZeroDenominatorError(z, 0.0)
    zs = TaylorScalar.variable(0, complex(z), 1, order)
    tau = 1.0 - zs * np.conj(ws)
    ker = tau.power(-params.q) * (mags.min() ** params.q)
    tpoly = TaylorScalar.constant(np.zeros(len(ws), dtype=complex), 1, order)
    diff = zs - ws
    mono = TaylorScalar.constant(np.ones(len(ws), dtype=complex), 1, order)
    for k in range(jet.max_index_order + 1):
        if k > 0:
            mono = mono * diff
        tpoly = tpoly + mono * (jet.components[k] / math.factorial(k))
    num = (tpoly * ker).weighted_sum(weights)
    den = ker.weighted_sum(weights)
    if abs(den.constant_term) == 0.0:
        raise ZeroDenominatorError(z, den.constant_term)
    return num / den


def disk_extend_derivative(
    jet: DiskJet, mu: DoublingMeasure, params: DiskKernelParams, z: complex, m: int
) -> complex:
    series = disk_extend_series(jet, mu, params, z, m)
    return complex(series.derivative((m,)))


def check_kernel_lower_bound(
    mu: DoublingMeasure,
    q: float,
    samples: int = 24,
    rays: int = 64,
    refinements: int = 2,
    seed: int = 0,
) -> VerificationReport:
    """Sampled infimum of |h(z)| d(z, E)^q / mu(B_z) over disk points, with
    a zero-set scan; a failing bound is a valid report, not an error."""
    ws, _ = _support_circle(mu)
    inf_ratio = math.inf
    argmin = 0j
    total = 0
    series = []
    for level in range(refinements):
        nr = samples * (level + 1)
        nt = rays * (level + 1)
        level_inf = math.inf
        for r in np.linspace(0.05, 1.0 - 1e-6, nr):
            for theta in np.arange(nt) * (2.0 * math.pi / nt) + math.pi / (3 * nt):
                z = r * complex(math.cos(theta), math.sin(theta))
                dist, w0 = disk_distance(mu, z)
                if dist == 0.0:
                    continue
                h = disk_kernel_mass(mu, q, z)
                mass = ball_mass(mu, [w0.real, w0.imag], 3.0 * dist)
                ratio = abs(h) * dist**q / mass
                total += 1
                if ratio < level_inf:
                    level_inf = ratio
                    if ratio < inf_ratio:
                        inf_ratio = ratio
                        argmin = z
        series.append((f"grid{level}", level_inf))
    scan = zero_free_scan(mu, q, 1.0 - 1e-6)
    # stability of an infimum: it must not collapse toward zero on refinement
    stable = len(series) >= 2 and all(
        nxt >= prev * 0.5 for (_, prev), (_, nxt) in zip(series, series[1:])
    )
    passed = bool(inf_ratio > 0 and scan.zero_free and stable)
    return VerificationReport(
        name="disk-kernel-lower-bound",
        parameters={"q": q, "zero_free": scan.zero_free},
        samples=total,
        sup_ratio=float(inf_ratio),
        witness=f"z={argmin.real:.6g}+{argmin.imag:.6g}i",
        refinement=series,
        passed=passed,
        criterion="inf ratio > 0, zero-free scan, no collapse under grid refinement",
    )


def check_derivative_growth(
    jet: DiskJet,
    mu: DoublingMeasure,
    params: DiskKernelParams,
    m: int,
    samples: int = 12,
    ladder: tuple[int, int] = (2, 9),
    seed: int = 0,
) -> VerificationReport:
    """Sampled sup of |d^m E(f)(z)| d(z, E)^(m - alpha) along radial
    approaches to the boundary set, for m > alpha; requires 2*alpha not an
    integer."""
    if m <= params.alpha:
        raise ValueError("derivative order must exceed alpha")
    if abs(2.0 * params.alpha - round(2.0 * params.alpha)) < 1e-12:
        raise ValueError("2*alpha must not be an integer")
    rng = np.random.default_rng(seed)
    ws, _ = _support_circle(mu)
    targets = rng.choice(len(ws), size=min(samples, len(ws)), replace=False)
    sup = 0.0
    witness = ""
    series = []
    for j_hi in range(ladder[0] + 1, ladder[1] + 1):
        level_sup = 0.0
        for i in targets:
            zeta = ws[i]
            for j in range(ladder[0], j_hi + 1):
                z = (1.0 - 2.0**-j) * zeta
                dist, _ = disk_distance(mu, z)
                if dist == 0.0:
                    continue
                dm = disk_extend_derivative(jet, mu, params, z, m)
                ratio = abs(dm) * dist ** (m - params.alpha)
                level_sup = max(level_sup, ratio)
                if ratio > sup:
                    sup = ratio
                    witness = f"z={z.real:.6g}+{z.imag:.6g}i"
        series.append((f"2^-{j_hi}", level_sup))
    passed = stability_pass(series)
    return VerificationReport(
        name="disk-derivative-growth",
        parameters={"q": params.q, "alpha": params.alpha, "m": m},
        samples=len(targets) * (ladder[1] - ladder[0] + 1),
        sup_ratio=sup,
        witness=witness,
        refinement=series,
        passed=passed,
        criterion="sup |d^m E| d^(m-alpha) stable along the approach ladder",
    )


def radial_derivative_scan(
    jet: DiskJet,
    mu: DoublingMeasure,
    params: DiskKernelParams,
    beta: float,
    inner_exponent: float = 1.0,
    rays: int = 16,
    steps: int = 64,
) -> dict:
    """Diagnostic scan of the radial-derivative integrals

        int_0^1 (1 - t^2)^((l - beta) * qi - 1) |R^l E(f)(t z)|^qi dt,

    with l = floor(beta) + 1 and R = I + N, N f = z f'.  Reports the
    per-ray integrals and whether they stay bounded; the full norm is out
    of scope.
    """
    ell = int(math.floor(beta)) + 1
    qi = inner_exponent
    ws, _ = _support_circle(mu)
    ray_angles = np.arange(rays) * (2.0 * math.pi / rays) + math.pi / (2 * rays)
    integrals = []
    for theta in ray_angles:
        zdir = complex(math.cos(theta), math.sin(theta))
        ts = (np.arange(steps) + 0.5) / steps
        vals = np.empty(steps)
        for i, t in enumerate(ts):
            z = t * zdir
            series = disk_extend_series(jet, mu, params, z, ell)
            # R^l = (I + N)^l expanded over N^k, N^k f = sum Stirling-free
            # iterated z d/dz applications evaluated from the series
            total = 0.0j
            for k in range(ell + 1):
                total += math.comb(ell, k) * _iterated_radial(series, z, k)
            w = (1.0 - t * t) ** ((ell - beta) * qi - 1.0)
            vals[i] = w * abs(total) ** qi
        integrals.append(float(vals.mean()))
    bound = max(integrals)
    return {
        "ell": ell,
        "per_ray": integrals,
        "max_integral": bound,
        "finite": bool(np.isfinite(bound)),
    }


def _iterated_radial(series: TaylorScalar, z: complex, k: int) -> complex:
    """(z d/dz)^k of the function represented by a 1-variable series at z.

    Uses the identity (z d/dz)^k f = sum_j S(k, j) z^j f^(j) with Stirling
    numbers of the second kind.
    """
    if k == 0:
        return complex(series.constant_term)
    stirling = _stirling_row(k)
    total = 0.0j
    for j in range(1, k + 1):
        total += stirling[j] * z**j * complex(series.derivative((j,)))
    return total


def _stirling_row(k: int) -> list[float]:
    row = [0.0] * (k + 1)
    row[0] = 1.0
    for _ in range(k):
        new = [0.0] * (k + 1)
        for j in range(k + 1):
            if row[j] == 0.0:
                continue
            if j + 1 <= k:
                new[j + 1] += row[j]
            new[j] += j * row[j]
        row = new
    return row


def read_angle_file(path) -> np.ndarray:
    """One angle (radians) per line; ``#`` comments allowed."""
    vals = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed angle line") from exc
    if not vals:
        raise ValueError(f"{path}: no angles found")
    return np.array(vals)


def write_angle_file(path, angles) -> None:
    Path(path).write_text("\n".join("%.17g" % a for a in np.asarray(angles).ravel()) + "\n")


def write_polar_grid(path, radii, angles, values: np.ndarray) -> None:
    """Row-major (r, theta) grid of complex values: ``r theta re im`` lines."""
    lines = []
    for i, r in enumerate(radii):
        for j, th in enumerate(angles):
            v = values[i, j]
            lines.append("%.17g %.17g %.17g %.17g" % (r, th, v.real, v.imag))
    Path(path).write_text("\n".join(lines) + "\n")
