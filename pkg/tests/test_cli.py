import math

import numpy as np
import pytest

from jetext.cli import main


def run(args):
    return main(args)


def test_gen_cantor_atom_count(tmp_path):
    out = tmp_path / "E.pts"
    assert run(["gen", "--kind", "cantor", "--depth", "10", "-o", str(out)]) == 0
    data_lines = [ln for ln in out.read_text().splitlines() if ln and not ln.startswith("#")]
    assert len(data_lines) == 1024
    header = [ln for ln in out.read_text().splitlines() if ln.startswith("#")]
    assert any("command gen" in ln for ln in header)  # effective config in the header


def test_measure_then_extend_constant(tmp_path):
    pts = tmp_path / "E.pts"
    msr = tmp_path / "mu.msr"
    field = tmp_path / "field.txt"
    assert run(["gen", "--kind", "cantor", "--depth", "6", "-o", str(pts)]) == 0
    assert run(["measure", str(pts), "--depth", "6", "-o", str(msr)]) == 0
    assert (
        run(
            [
                "extend",
                "--measure", str(msr),
                "--jet", "const1",
                "--q", "3.5",
                "--alpha", "1.5",
                "--grid", "1.25:2.0:6",
                "-o", str(field),
            ]
        )
        == 0
    )
    rows = [ln for ln in field.read_text().splitlines() if ln and not ln.startswith(("#", "origin", "spacing", "counts", "derivs"))]
    vals = np.array([float(r.split()[0]) for r in rows])
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_dims_table(tmp_path):
    pts = tmp_path / "E.pts"
    table = tmp_path / "dims.tsv"
    run(["gen", "--kind", "cantor", "--depth", "8", "-o", str(pts)])
    assert run(["dims", str(pts), "--seed", "3", "-o", str(table)]) == 0
    text = table.read_text()
    assert "log k" in text
    upper = float(next(ln for ln in text.splitlines() if "# upper" in ln).split()[2])
    assert abs(upper - math.log(2) / math.log(3)) < 0.05


def test_verify_determinism_and_threads(tmp_path):
    args = ["verify", "--checks", "two-center-integral,radial-kernel-integral", "--seed", "7"]
    outs = []
    for name, threads in (("a.txt", "1"), ("b.txt", "1"), ("c.txt", "8")):
        out = tmp_path / name
        assert run(args + ["--threads", threads, "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] == outs[2]


def test_verify_exit_one_on_check_failure(tmp_path):
    # a single refinement stage can never certify stability
    out = tmp_path / "single.txt"
    code = run(["verify", "--checks", "extension-remainder", "--depths", "7",
                "--seed", "1", "--samples", "40", "-o", str(out)])
    assert code == 1
    assert "pass=false" in out.read_text()


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["gen", "--kind", "menger", "--depth", "2", "-o", str(tmp_path / "x")])
    assert exc.value.code == 2  # argparse rejects the choice
    assert run(["measure", str(tmp_path / "missing.pts"), "--depth", "3", "-o", str(tmp_path / "m")]) == 2
    assert run(["extend", "--measure", str(tmp_path / "missing.msr"), "--q", "3.5",
                "--alpha", "1.5", "--grid", "0:1:4", "-o", str(tmp_path / "f")]) == 2
    assert run(["verify", "--checks", "bogus-check", "--seed", "1", "-o", str(tmp_path / "r")]) == 2
    bad_grid = run(["extend", "--measure", str(tmp_path / "missing.msr"), "--q", "3.5",
                    "--alpha", "1.5", "--grid", "0:1", "-o", str(tmp_path / "f")])
    assert bad_grid == 2


def test_holo_assumption_and_grid(tmp_path):
    rep = tmp_path / "assumption.txt"
    assert run(["holo", "--op", "assumption", "--full-circle", "6", "--q", "0.5", "-o", str(rep)]) == 0
    assert "disk-kernel-lower-bound" in rep.read_text()
    grid = tmp_path / "disk.txt"
    assert run(["holo", "--op", "grid", "--full-circle", "5", "--jet", "z",
                "--q", "0.5", "--alpha", "1.0", "--grid-r", "4", "--grid-theta", "6",
                "-o", str(grid)]) == 0
    rows = [ln for ln in grid.read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == 24  # r theta re im, row-major


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("JETEXT_OUTDIR", str(tmp_path))
    assert run(["gen", "--kind", "interval", "--depth", "3", "-o", "env.pts"]) == 0
    assert (tmp_path / "env.pts").exists()


def test_figures_written(tmp_path):
    pts = tmp_path / "E.pts"
    table = tmp_path / "dims.tsv"
    figs = tmp_path / "figs"
    run(["gen", "--kind", "cantor", "--depth", "7", "-o", str(pts)])
    assert run(["dims", str(pts), "--seed", "3", "-o", str(table), "--figures", str(figs)]) == 0
    assert list(figs.glob("*.png"))
