import pytest

from jetext.fixtures import cantor_poly_fixture, cantor_sin_fixture
from jetext.report import VerificationReport, format_reports, stability_pass
from jetext.verify import (
    Stage,
    SuiteConfig,
    check_derivative_commutation,
    check_extension_remainder,
    check_interpolation,
    check_offset_pair_remainder,
    check_radial_kernel_integral,
    check_restriction,
    check_two_center_integral,
    run_suite,
    two_center_sweep,
)


def sin_stages(depths=(7, 9)):
    return [Stage(f"depth{d}", cantor_sin_fixture(d).jet, cantor_sin_fixture(d).mu) for d in depths]


def poly_stages(depths=(7, 9)):
    return [Stage(f"depth{d}", cantor_poly_fixture(d).jet, cantor_poly_fixture(d).mu) for d in depths]


STAGE_CHECKS = (
    check_extension_remainder,
    check_interpolation,
    check_offset_pair_remainder,
    check_derivative_commutation,
)


@pytest.mark.parametrize("check", STAGE_CHECKS)
def test_polynomial_jets_give_zero_ratios(check):
    rep = check(poly_stages(), cantor_poly_fixture(7).params, samples=80, seed=3, max_level=5)
    assert rep.sup_ratio <= 1e-9


@pytest.mark.parametrize("check", STAGE_CHECKS)
def test_sin_fixture_stable(check):
    rep = check(sin_stages(), cantor_sin_fixture(7).params, samples=120, seed=3)
    assert rep.passed
    assert len(rep.refinement) == 2
    assert rep.sup_ratio > 0


def test_reports_deterministic():
    a = check_extension_remainder(sin_stages(), cantor_sin_fixture(7).params, samples=80, seed=11)
    b = check_extension_remainder(sin_stages(), cantor_sin_fixture(7).params, samples=80, seed=11)
    assert format_reports([a]) == format_reports([b])


def test_ratio_scale_covariance():
    stages = sin_stages((7,))
    params = cantor_sin_fixture(7).params
    base = check_extension_remainder(stages, params, samples=60, seed=5)
    doubled_jet = stages[0].jet.scaled(2.0)
    doubled = check_extension_remainder(
        [Stage("depth7", doubled_jet, stages[0].mu)], params, samples=60, seed=5
    )
    assert doubled.sup_ratio == pytest.approx(2.0 * base.sup_ratio, rel=1e-9)


def test_single_stage_never_passes():
    rep = check_extension_remainder(sin_stages((7,)), cantor_sin_fixture(7).params, samples=60, seed=5)
    assert not rep.passed
    assert len(rep.refinement) == 1


def test_restriction_slopes():
    fx = cantor_sin_fixture(9)
    rep = check_restriction(Stage("d9", fx.jet, fx.mu), fx.params, xi_samples=6, seed=5)
    assert rep.passed
    assert rep.parameters["slope_min"] >= 0.5
    assert rep.parameters["skipped_balls"] == 0


def test_restriction_constant_jet_zero_error():
    from jetext.jets import poly_jet

    fx = cantor_sin_fixture(7)
    one = poly_jet(fx.sample, fx.params.alpha, {(0,): 1.0})
    rep = check_restriction(
        Stage("d7", one, fx.mu), fx.params, xi_samples=4, deltas=(0.125, 0.0625), seed=1
    )
    # exact reproduction: every ball mean equals 1 up to rounding
    assert all(v <= 1e-12 for _, v in rep.refinement)


def test_restriction_requires_low_order():
    fx = cantor_sin_fixture(7)
    with pytest.raises(ValueError, match="restriction check needs"):
        check_restriction(Stage("d7", fx.jet, fx.mu), fx.params, a=(2,))


def test_two_center_integral_preconditions():
    with pytest.raises(ValueError, match="c - a - b"):
        check_two_center_integral(a=0.2, b=0.2, c=0.5, t=-0.1, s=0.1, radius=1.0)
    with pytest.raises(ValueError, match="c - b"):
        check_two_center_integral(a=3.0, b=2.0, c=0.5, t=-0.1, s=0.1, radius=1.0)


def test_two_center_integral_symmetry():
    # centers symmetric about 0: swapping t and s reflects the region, so
    # the integral is unchanged
    r1 = check_two_center_integral(a=1.0, b=0.8, c=0.5, t=-0.05, s=0.05, radius=1.5)
    r2 = check_two_center_integral(a=1.0, b=0.8, c=0.5, t=0.05, s=-0.05, radius=1.5)
    assert r1.sup_ratio == pytest.approx(r2.sup_ratio, rel=1e-9)


def test_two_center_sweep_stable():
    rep = two_center_sweep(a=1.0, b=1.0, c=0.5, radius=2.0)
    vals = [v for _, v in rep.refinement]
    assert rep.passed
    assert max(vals) <= 2.0 * min(vals)


def test_two_center_integral_matches_grid_oracle():
    # independent midpoint-grid quadrature of the same region
    import numpy as np

    a, b, c, t, s, radius = 1.0, 1.0, 0.5, -0.05, 0.05, 1.5
    rep = check_two_center_integral(a=a, b=b, c=c, t=t, s=s, radius=radius)
    lo, hi = 0.5 * (t + s), radius
    n_cells = 200001
    h = (hi - lo) / n_cells
    xs = lo + h * (np.arange(n_cells) + 0.5)
    dt = np.abs(xs - t)
    ds = np.abs(xs - s)
    grid_val = float(np.sum(np.minimum(dt, ds) ** c * dt**-a * ds**-b) * h)
    grid_ratio = grid_val / abs(t - s) ** (c - a - b + 1)
    assert rep.sup_ratio == pytest.approx(grid_ratio, rel=0.02)


def test_radial_kernel_integral_exact_at_zero():
    for b in (0.5, 1.0, 2.5):
        rep = check_radial_kernel_integral(a=b + 1.0, b=b, zs=[0j, 0.0])
        for _, v in rep.refinement:
            # at z = 0 the integral is exactly 1/b, so the ratio is 1/b
            assert v == pytest.approx(1.0 / b, rel=1e-9)


def test_radial_kernel_integral_sweep_and_bounded_regime():
    zs = [1.0 - 10.0**-k for k in range(1, 7)]
    rep = check_radial_kernel_integral(a=2.0, b=1.0, zs=zs)
    vals = [v for _, v in rep.refinement]
    assert rep.passed and max(vals) <= 2.0 * min(vals)
    bounded = check_radial_kernel_integral(a=2.0, b=3.0, zs=[0.0, 0.9, 1 - 1e-5])
    assert bounded.passed


def test_radial_kernel_integral_validation():
    with pytest.raises(ValueError, match="need a, b > 0"):
        check_radial_kernel_integral(a=-1.0, b=0.5, zs=[0.0])
    with pytest.raises(ValueError, match="need \\|z\\| < 1"):
        check_radial_kernel_integral(a=2.0, b=1.0, zs=[1.0])


def test_report_invariants():
    with pytest.raises(ValueError, match="refinement series"):
        VerificationReport(name="x", passed=True, refinement=[("a", 1.0)])
    with pytest.raises(ValueError, match="sup-ratio"):
        VerificationReport(name="x", sup_ratio=-1.0)
    assert stability_pass([("a", 1.0), ("b", 1.2)]) is True
    assert stability_pass([("a", 1.0), ("b", 1.3)]) is False
    assert stability_pass([("a", 1.0)]) is False
    assert stability_pass([("a", 0.0), ("b", 1e-12)]) is True


def test_run_suite_empty_and_unknown():
    assert run_suite(SuiteConfig(checks=())) == []
    with pytest.raises(ValueError, match="unknown check name"):
        run_suite(SuiteConfig(checks=("no-such-check",)))
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite(SuiteConfig(suite="nope"))


def test_run_suite_subset_and_thread_determinism():
    cfg = SuiteConfig(checks=("two-center-integral", "radial-kernel-integral"), seed=1)
    seq = run_suite(cfg)
    par = run_suite(SuiteConfig(checks=cfg.checks, seed=1, threads=4))
    assert format_reports(seq) == format_reports(par)
    assert [r.name for r in seq] == ["two-center-integral", "radial-kernel-integral"]
