"""Command-line front end: reproducible set/measure/jet pipelines.

Commands print their effective configuration (defaults resolved) at the
top of every output file, write outputs atomically (temp file + rename),
and are byte-identical for identical inputs, flags, and seed.  Exit
codes: 0 success, 1 check failure, 2 usage error.  The environment
variable ``JETEXT_OUTDIR`` supplies a default output directory for
relative paths; it has no other effect.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

__all__ = ["main"]


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("JETEXT_OUTDIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _config_header(cmd: str, args: argparse.Namespace, skip=("func",)) -> list[str]:
    lines = [f"command {cmd}"]
    for key in sorted(vars(args)):
        if key in skip or key == "command":
            continue
        lines.append(f"cfg {key}={getattr(args, key)!r}")
    return lines


def _load_sample(path: str):
    from jetext.geometry import generate_set

    return generate_set("file", 0, path=path)


def _jet_from_flag(flag: str, sample, alpha: float):
    from jetext.jets import induce_jet, load_jet, poly_jet

    if flag == "const1":
        return poly_jet(sample, alpha, {(0,) * sample.n: 1.0})
    if flag == "sin":
        if sample.n != 1:
            raise ValueError("the sin jet is one-dimensional")
        derivs = {0: math.sin, 1: math.cos, 2: lambda x: -math.sin(x), 3: lambda x: -math.cos(x)}
        return induce_jet(sample, alpha, {k: derivs[k] for k in range(int(math.floor(alpha)) + 1)})
    if flag.startswith("poly:"):
        coeffs = [float(tok) for tok in flag[5:].split(",")]
        if sample.n != 1:
            raise ValueError("poly: jets are one-dimensional")
        return poly_jet(sample, alpha, {(k,): c for k, c in enumerate(coeffs)})
    if flag.startswith("file:"):
        return load_jet(flag[5:])
    raise ValueError(f"unknown jet spec: {flag!r} (use const1, sin, poly:c0,c1,..., file:PATH)")


def _parse_grid(spec: str):
    from jetext.extension import GridSpec

    axes = []
    for part in spec.split(";"):
        toks = part.split(":")
        if len(toks) != 3:
            raise ValueError(f"grid axis must be lo:hi:count, got {part!r}")
        lo, hi, count = float(toks[0]), float(toks[1]), int(toks[2])
        if count < 2 or hi <= lo:
            raise ValueError(f"grid axis needs hi > lo and count >= 2: {part!r}")
        axes.append((lo, (hi - lo) / (count - 1), count))
    return GridSpec(
        origin=tuple(a[0] for a in axes),
        spacing=tuple(a[1] for a in axes),
        counts=tuple(a[2] for a in axes),
    )


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    from jetext.geometry import generate_set

    params = {}
    if args.kind == "circle-arc":
        params = {"theta0": args.theta0, "theta1": args.theta1}
    if args.kind == "file":
        params = {"path": args.input}
    sample = generate_set(args.kind, args.depth, **params)
    header = _config_header("gen", args) + [f"atoms {len(sample)} resolution {sample.resolution!r}"]
    out = _resolve_out(args.output)
    body = [" ".join("%.17g" % v for v in row) for row in sample.atoms]
    _atomic_write(out, "\n".join(f"# {h}" for h in header) + "\n" + "\n".join(body) + "\n")
    print(f"wrote {len(sample)} atoms to {out}")
    return 0


def cmd_measure(args) -> int:
    from jetext.measure import build_measure

    sample = _load_sample(args.set)
    mu = build_measure(sample, args.depth, args.weighting)
    out = _resolve_out(args.output)
    lines = [f"# {h}" for h in _config_header("measure", args)]
    lines.append(f"{mu.sample.n} {mu.depth} {len(mu.sample)}")
    for point, w in zip(mu.sample.atoms, mu.weights):
        coords = " ".join("%.17g" % c for c in point)
        lines.append(f"{coords} {'%.17g' % w}")
    _atomic_write(out, "\n".join(lines) + "\n")
    print(f"wrote measure ({len(mu.support_indices)} weighted atoms) to {out}")
    return 0


def cmd_dims(args) -> int:
    from jetext.dimensions import estimate_dimensions

    sample = _load_sample(args.set)
    est = estimate_dimensions(
        sample,
        trials=args.trials,
        seed=args.seed,
        ladder_base=args.base,
        max_levels=args.max_levels,
    )
    lines = [f"# {h}" for h in _config_header("dims", args)]
    lines.append(f"# upper {est.upper!r} lower {est.lower!r} fit_residual {est.fit_residual!r}")
    lines.append("# log k\tlog N (max over sampled x)")
    for lk, lmax, _ in est.log_table():
        lines.append("%.17g\t%.17g" % (lk, lmax))
    lines.append("# log k\tlog N (min over sampled x)")
    for lk, _, lmin in est.log_table():
        lines.append("%.17g\t%.17g" % (lk, lmin))
    out = _resolve_out(args.output)
    _atomic_write(out, "\n".join(lines) + "\n")
    print(f"upper={est.upper:.5f} lower={est.lower:.5f} -> {out}")
    if args.figures:
        from jetext.figures import save_dimension_figure

        fig_dir = _resolve_out(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        save_dimension_figure(est, fig_dir / (out.stem + "_dims.png"))
        print(f"figure in {fig_dir}")
    return 0


def cmd_extend(args) -> int:
    from jetext.extension import ExtensionParams, assemble_g
    from jetext.measure import load_measure

    mu = load_measure(args.measure)
    sample = mu.sample
    jet = _jet_from_flag(args.jet, sample, args.alpha)
    params = ExtensionParams(q=args.q, alpha=args.alpha)
    spec = _parse_grid(args.grid)
    derivs = ()
    if args.derivs:
        derivs = tuple(tuple(int(v) for v in tok.split(",")) for tok in args.derivs.split("|"))
    grid = assemble_g(jet, mu, params, spec, derivs=derivs)
    if args.window is not None:
        from jetext.extension import window_value

        nodes = spec.nodes()
        phi = np.array([window_value(p, args.window) for p in nodes]).reshape(grid.values.shape)
        grid.values = grid.values * phi

    header = _config_header("extend", args)
    out = _resolve_out(args.output)
    from io import StringIO

    buf = StringIO()
    buf.write("\n".join(f"# {h}" for h in header) + "\n")
    spec_lines = [
        "origin " + " ".join("%.17g" % v for v in spec.origin),
        "spacing " + " ".join("%.17g" % v for v in spec.spacing),
        "counts " + " ".join(str(c) for c in spec.counts),
        "derivs " + (" ".join(",".join(str(v) for v in a) for a in sorted(grid.derivs)) if grid.derivs else "-"),
    ]
    buf.write("\n".join(spec_lines) + "\n")
    vals = grid.values.ravel()
    flags = grid.on_set.ravel()
    dcols = [grid.derivs[a].ravel() for a in sorted(grid.derivs)]
    for i in range(len(vals)):
        row = ["%.17g" % vals[i], "1" if flags[i] else "0"]
        row.extend("%.17g" % col[i] for col in dcols)
        buf.write(" ".join(row) + "\n")
    _atomic_write(out, buf.getvalue())
    print(f"wrote field grid {spec.counts} to {out}")
    if args.figures:
        from jetext.figures import save_field_figure

        fig_dir = _resolve_out(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        save_field_figure(grid, fig_dir / (out.stem + "_field.png"))
        print(f"figure in {fig_dir}")
    return 0


def cmd_holo(args) -> int:
    from jetext.fixtures import circle_fixture, disk_holder_jet, disk_identity_jet
    from jetext.holo import (
        DiskKernelParams,
        check_kernel_lower_bound,
        disk_extend,
        read_angle_file,
        circle_sample,
    )
    from jetext.measure import build_measure
    from jetext.report import format_reports

    if args.set:
        angles = read_angle_file(args.set)
        sample = circle_sample(angles)
        mu = build_measure(sample, args.measure_depth)
    else:
        fx = circle_fixture(args.full_circle)
        sample, mu = fx.sample, fx.mu

    out = _resolve_out(args.output)
    header = _config_header("holo", args)

    if args.op == "assumption":
        rep = check_kernel_lower_bound(mu, q=args.q, seed=args.seed)
        _atomic_write(out, format_reports([rep], header=header))
        print(f"inf ratio {rep.sup_ratio:.6g} pass={rep.passed} -> {out}")
        return 0 if rep.passed else 1

    params = DiskKernelParams(q=args.q, alpha=args.alpha)
    jet = disk_identity_jet(sample) if args.jet == "z" else disk_holder_jet(sample, args.alpha)
    radii = np.linspace(0.0, 0.95, args.grid_r)
    thetas = 2.0 * math.pi * np.arange(args.grid_theta) / args.grid_theta
    lines = [f"# {h}" for h in header]
    values = np.empty((len(radii), len(thetas)), dtype=complex)
    for i, r in enumerate(radii):
        for j, th in enumerate(thetas):
            z = r * complex(math.cos(th), math.sin(th))
            values[i, j] = disk_extend(jet, mu, params, z)
            lines.append("%.17g %.17g %.17g %.17g" % (r, th, values[i, j].real, values[i, j].imag))
    _atomic_write(out, "\n".join(lines) + "\n")
    print(f"wrote polar grid {values.shape} to {out}")
    if args.figures:
        from jetext.figures import save_disk_figure

        fig_dir = _resolve_out(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        save_disk_figure(radii, thetas, values, fig_dir / (out.stem + "_disk.png"))
        print(f"figure in {fig_dir}")
    return 0


def cmd_verify(args) -> int:
    from jetext.report import format_reports
    from jetext.verify import SuiteConfig, run_suite

    checks = tuple(tok for tok in args.checks.split(",") if tok) if args.checks else None
    config = SuiteConfig(
        suite=args.suite,
        checks=checks,
        seed=args.seed,
        samples=args.samples,
        depths=tuple(int(v) for v in args.depths.split(",")),
        threads=args.threads,
    )
    reports = run_suite(config)
    out = _resolve_out(args.output)
    # threads change scheduling only, and destinations are not semantics:
    # keep both out of the header so reports are byte-identical across
    # thread counts and output locations
    header = _config_header("verify", args, skip=("func", "threads", "output", "figures"))
    _atomic_write(out, format_reports(reports, header=header))
    for rep in reports:
        print(f"{rep.name}: C={rep.sup_ratio:.6g} pass={rep.passed}")
    print(f"wrote {len(reports)} reports to {out}")
    if args.figures:
        from jetext.figures import save_refinement_figure

        fig_dir = _resolve_out(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        save_refinement_figure(reports, fig_dir / (out.stem + "_refinement.png"))
        print(f"figure in {fig_dir}")
    return 0 if all(rep.passed for rep in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetext", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a compact-set sample file")
    p.add_argument("--kind", required=True, choices=["interval", "cantor", "sierpinski", "circle-arc", "file"])
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--theta1", type=float, default=2.0 * math.pi)
    p.add_argument("--input", help="source point file for kind=file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("measure", help="build an equal-split dyadic measure")
    p.add_argument("set", help="point file of atoms")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--weighting", default="equal-split", choices=["equal-split"])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("dims", help="estimate upper/lower metric dimensions")
    p.add_argument("set")
    p.add_argument("--trials", type=int, default=16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--base", type=float, default=3.0)
    p.add_argument("--max-levels", type=int, default=9)
    p.add_argument("--figures", help="directory for rendered figures")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("extend", help="evaluate the glued extension on a grid")
    p.add_argument("--measure", required=True, help="measure file from 'measure'")
    p.add_argument("--jet", default="const1", help="const1 | sin | poly:c0,c1,... | file:PATH")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:count per axis, ';'-separated")
    p.add_argument("--derivs", help="derivative multi-indices, e.g. '1|2' or '1,0|0,1'")
    p.add_argument("--window", type=float, help="window radius R (support function on B(0,2R))")
    p.add_argument("--figures", help="directory for rendered figures")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("holo", help="holomorphic disk extension and checks")
    p.add_argument("--set", help="angle file (radians, one per line)")
    p.add_argument("--full-circle", type=int, default=7, help="2^k atoms when no angle file is given")
    p.add_argument("--measure-depth", type=int, default=10)
    p.add_argument("--op", default="grid", choices=["grid", "assumption"])
    p.add_argument("--jet", default="z", choices=["z", "holder"])
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.6)
    p.add_argument("--grid-r", type=int, default=12)
    p.add_argument("--grid-theta", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figures", help="directory for rendered figures")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_holo)

    p = sub.add_parser("verify", help="run an empirical verification suite")
    p.add_argument("--suite", default="core", help="core | disk | full")
    p.add_argument("--checks", help="comma-separated explicit check names (overrides --suite)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=160)
    p.add_argument("--depths", default="7,9", help="refinement stage depths, comma-separated")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="parallelism cap; results are independent of it")
    p.add_argument("--figures", help="directory for rendered figures")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
