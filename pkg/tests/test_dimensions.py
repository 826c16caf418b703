import itertools
import math

import numpy as np
import pytest

from jetext.dimensions import InsufficientScaleRange, estimate_dimensions, packing_count
from jetext.geometry import CompactSetSample, generate_set

CANTOR_DIM = math.log(2) / math.log(3)


def exact_packing(atoms: np.ndarray, x, R: float, k: float) -> int:
    """Exhaustive maximum R-separated subset of atoms in B(x, kR)."""
    d = np.sqrt(np.sum((atoms - np.asarray(x)) ** 2, axis=1))
    cand = atoms[d <= k * R]
    best = 0
    for size in range(len(cand), 0, -1):
        for combo in itertools.combinations(range(len(cand)), size):
            pts = cand[list(combo)]
            ok = True
            for i in range(size):
                for j in range(i + 1, size):
                    if np.linalg.norm(pts[i] - pts[j]) < R:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return size
    return best


def test_packing_interval_bounds():
    E = generate_set("interval", 4)
    count = packing_count(E, [0.5], 0.1, 5.0)
    assert 5 <= count <= 11


def test_packing_greedy_leq_exhaustive():
    E = generate_set("interval", 3)  # 9 atoms keeps enumeration cheap
    for R, k in [(0.3, 2.0), (0.22, 3.0), (0.45, 1.5)]:
        greedy = packing_count(E, [0.4], R, k)
        exact = exact_packing(E.atoms, [0.4], R, k)
        assert greedy <= exact
        assert greedy >= 1


def test_packing_single_atom():
    E = CompactSetSample([[0.3, 0.3]], resolution=1.0)
    assert packing_count(E, [0.3, 0.3], 0.5, 2.0) == 1


def test_packing_cantor_aligned():
    E = generate_set("cantor", 8)
    for j in range(1, 6):
        assert packing_count(E, [0.0], 3.0**-j, 3.0**j) == 2**j


def test_packing_rejects_small_k():
    E = generate_set("interval", 3)
    with pytest.raises(ValueError, match="k must be > 1"):
        packing_count(E, [0.5], 0.1, 1.0)


def test_packing_nonincreasing_in_R():
    E = generate_set("cantor", 7)
    rng = np.random.default_rng(2)
    for _ in range(40):
        x = E.atoms[rng.integers(len(E))]
        ball = 0.9  # fixed outer radius, so k = ball / R
        r1 = float(rng.uniform(0.01, 0.2))
        r2 = 2.0 * r1
        n1 = packing_count(E, x, r1, ball / r1)
        n2 = packing_count(E, x, r2, ball / r2)
        assert n2 <= n1


def test_packing_volume_bound():
    E = generate_set("sierpinski", 5)
    rng = np.random.default_rng(4)
    for _ in range(30):
        x = E.atoms[rng.integers(len(E))]
        R = float(rng.uniform(0.02, 0.2))
        k = float(rng.uniform(1.5, 6.0))
        assert packing_count(E, x, R, k) <= (3.0 * k) ** E.n


def test_estimate_interval():
    est = estimate_dimensions(generate_set("interval", 12), trials=12, seed=1)
    assert abs(est.upper - 1.0) <= 0.05
    assert abs(est.lower - 1.0) <= 0.05


def test_estimate_cantor():
    est = estimate_dimensions(generate_set("cantor", 10), trials=12, seed=1)
    assert abs(est.upper - CANTOR_DIM) <= 0.05
    assert abs(est.lower - CANTOR_DIM) <= 0.05
    assert est.lower <= est.upper + 1e-9
    assert est.lower >= 0.0


def test_estimate_single_point():
    E = CompactSetSample([[1.0, 2.0]], resolution=1.0)
    est = estimate_dimensions(E)
    assert est.upper == 0.0 and est.lower == 0.0


def test_estimate_insufficient_scales():
    with pytest.raises(InsufficientScaleRange):
        estimate_dimensions(generate_set("interval", 2), trials=4, seed=0)


def test_estimate_deterministic():
    E = generate_set("cantor", 8)
    a = estimate_dimensions(E, trials=8, seed=5)
    b = estimate_dimensions(E, trials=8, seed=5)
    assert a == b
