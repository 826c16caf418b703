import math

import numpy as np
import pytest

from jetext.geometry import (
    EUCLIDEAN,
    CompactSetSample,
    Metric,
    distance,
    generate_set,
    nearest_point,
    read_point_file,
    write_point_file,
)


def test_distance_pythagorean():
    assert distance([0, 0], [3, 4]) == 5.0


def test_distance_identity():
    x = [0.3, -1.2, 7.0]
    assert distance(x, x) == 0.0


def test_distance_one_dimensional():
    assert distance([0.0], [0.7]) == pytest.approx(0.7, abs=0)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        distance([0.0], [1.0, 2.0])


def test_unknown_metric_kind_rejected():
    with pytest.raises(ValueError):
        Metric("hyperbolic")


def test_triangle_inequality_sampled():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-5, 5, size=(60, 3))
    for _ in range(500):
        a, b, c = pts[rng.integers(60, size=3)]
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12


def test_nearest_point_basic():
    E = CompactSetSample([[0.0, 0.0], [1.0, 0.0]], resolution=0.5)
    near = nearest_point([2.0, 0.0], E)
    assert near.index == 1
    assert near.dist == 1.0


def test_nearest_point_membership():
    E = generate_set("cantor", 4)
    for i in (0, 5, len(E) - 1):
        near = E.nearest(E.atoms[i])
        assert near.index == i and near.dist == 0.0


def test_nearest_point_tie_lowest_index():
    E = CompactSetSample([[0.0], [1.0]], resolution=0.5)
    assert E.nearest([0.5]).index == 0


def test_nearest_point_matches_bruteforce():
    E = generate_set("cantor", 6)
    rng = np.random.default_rng(1)
    for _ in range(300):
        x = rng.uniform(-0.5, 1.5, size=1)
        near = E.nearest(x)
        d = np.sqrt(np.sum((E.atoms - x) ** 2, axis=1))
        assert near.dist == d.min()
        assert near.index == int(np.argmin(d))
        assert near.dist <= d.max()


def test_cantor_depth2_left_endpoints():
    E = generate_set("cantor", 2)
    assert np.array_equal(E.atoms.ravel(), np.array([0.0, 2 / 9, 2 / 3, 8 / 9]))


def test_cantor_base_case():
    assert generate_set("cantor", 0).atoms.tolist() == [[0.0]]


def test_cantor_atom_count():
    assert len(generate_set("cantor", 7)) == 2**7


def test_interval_equispaced():
    E = generate_set("interval", 5)
    assert len(E) == 2**5 + 1
    assert np.allclose(np.diff(E.atoms.ravel()), 2.0**-5)


def test_sierpinski_count_and_distinct():
    E = generate_set("sierpinski", 4)
    assert len(E) == 3**4  # constructor enforces distinctness


def test_circle_arc_full_and_partial():
    full = generate_set("circle-arc", 4)
    assert len(full) == 16
    assert np.allclose(np.sum(full.atoms**2, axis=1), 1.0)
    arc = generate_set("circle-arc", 3, theta0=0.0, theta1=math.pi / 2)
    assert len(arc) == 9


def test_generate_set_is_pure():
    a = generate_set("cantor", 6).atoms
    b = generate_set("cantor", 6).atoms
    assert np.array_equal(a, b)
    s1 = generate_set("sierpinski", 5).atoms
    s2 = generate_set("sierpinski", 5).atoms
    assert np.array_equal(s1, s2)


def test_unknown_kind():
    with pytest.raises(ValueError, match="unknown set kind"):
        generate_set("menger", 2)


def test_point_file_roundtrip(tmp_path):
    path = tmp_path / "pts.txt"
    atoms = np.array([[0.125, -3.0], [2.0 / 3.0, 1e-17]])
    write_point_file(path, atoms, header="two points")
    back = read_point_file(path)
    assert np.array_equal(back, atoms)


def test_point_file_comments_and_errors(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("# comment\n0.5 0.5\n\n1.0 2.0  # trailing\n")
    assert read_point_file(path).shape == (2, 2)
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5 0.5\n1.0\n")
    with pytest.raises(ValueError, match="expected 2 coordinates"):
        read_point_file(bad)
    nan = tmp_path / "nan.txt"
    nan.write_text("abc def\n")
    with pytest.raises(ValueError, match="malformed"):
        read_point_file(nan)


def test_atoms_must_be_distinct_and_finite():
    with pytest.raises(ValueError, match="distinct"):
        CompactSetSample([[0.0], [0.0]], resolution=1.0)
    with pytest.raises(ValueError, match="finite"):
        CompactSetSample([[np.inf]], resolution=1.0)
