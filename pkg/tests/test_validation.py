import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirac_pathint.action import ActionContext
from dirac_pathint.algebra import PhysicalParams, make_custom_algebra
from dirac_pathint.divisions import TimeDivision, make_uniform_division, make_zigzag_division
from dirac_pathint.fields import constant_B, constant_E, harmonic_V, make_gauge, time_ramped_A, zero_potential
from dirac_pathint.grid import Grid, SpinorField, gaussian_bump
from dirac_pathint.validation import (PropagationReport, adjoint_report, causality_report, convergence_report,
                                      gauge_report, local_order_report, psi_identity_report,
                                      required_half_width, support_estimate, unitarity_report)

from conftest import make_ctx


def names(rep):
    return {c.name: c for c in rep.checks}


def test_support_estimate_point_masses():
    g = Grid(1, 16, 4.0)                 # nodes -4, -3.5, ..., 3.5
    vals = np.zeros((16, 2), dtype=complex)
    vals[8] = [1, 0]                     # x = 0
    vals[12] = [1e-3, 0]                 # x = 2, mass fraction ~1e-6
    f = SpinorField(g, vals)
    assert support_estimate(f, [0.0], 1e-8).radius == 2.0
    assert support_estimate(f, [0.0], 1e-5).radius == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-12, 1e-2), st.floats(1e-12, 1e-2), st.floats(-1, 1))
def test_support_radius_monotone_and_bounded(e1, e2, c):
    g = Grid(2, 16, 2.0)
    f = gaussian_bump(g, [c, -c / 2], 0.4)
    lo, hi = sorted((e1, e2))
    r_lo = support_estimate(f, [c, -c / 2], lo).radius
    r_hi = support_estimate(f, [c, -c / 2], hi).radius
    assert r_hi <= r_lo
    assert r_lo <= np.sqrt(2) * 2 * (g.L)


def test_unitarity_free_exact_for_uniform_and_zigzag():
    g = Grid(1, 128, 6.0)
    ctx = make_ctx(zero_potential(1))
    f = gaussian_bump(g, [0.0], 0.5)
    divs = [make_uniform_division(0, 0.5, 8), make_zigzag_division(0.0, 0.5, 0.5, 2)]
    rep = unitarity_report(ctx, g, divs[:1], f)
    assert rep.passed and "exact_unitarity" in names(rep)
    rep = unitarity_report(ctx, g, [make_zigzag_division(0.0, 0.3, 0.5, 2)], f)
    assert rep.records["max_abs_log_r"] <= 1e-12


def test_unitarity_coincident_division():
    g = Grid(1, 64, 4.0)
    rep = unitarity_report(make_ctx(constant_E([0.5])), g, [TimeDivision([0.2, 0.2])], gaussian_bump(g, [0.0], 0.5))
    assert rep.records["max_abs_log_r"] <= 1e-15 and rep.passed


def test_unitarity_refuses_large_sigma():
    g = Grid(1, 16, 2.0)
    with pytest.raises(ValueError, match="sigma = 2 > 1"):
        unitarity_report(make_ctx(zero_potential(1)), g, [make_uniform_division(0, 2, 2)], gaussian_bump(g, [0], 0.3))


def test_unitarity_constant_E_is_exact():
    # a linear scalar potential makes every step a product of unitary factors
    g = Grid(1, 128, 8.0)
    f = gaussian_bump(g, [0.0], 0.7)
    rep = unitarity_report(make_ctx(constant_E([0.5])), g, [make_uniform_division(0, 1, nu) for nu in (4, 8, 16)], f)
    assert rep.records["max_abs_log_r"] <= 1e-12


def test_unitarity_harmonic_1d_defect_shrinks_faster_than_sigma():
    g = Grid(1, 128, 8.0)
    f = gaussian_bump(g, [0.0], 0.7)
    rep = unitarity_report(make_ctx(harmonic_V(1.0, 1)), g, [make_uniform_division(0, 1, nu) for nu in (4, 8, 16)], f)
    c = names(rep)
    assert c["norm_upper_bound"].passed and c["norm_lower_bound"].passed and c["shrinks_to_one"].passed
    assert all(7 < r < 9 for r in rep.records["ladder_ratios"])


def test_adjoint_examples():
    g = Grid(1, 16, 2.0)
    assert adjoint_report(make_ctx(zero_potential(1)), g, [(0.3, 0.3), (0.7, -0.2)]).checks[0].value <= 1e-12
    rep = adjoint_report(make_ctx(constant_E([0.5])), g, [(0.3, 0.1)], TimeDivision([0.0, 0.4, -0.3, 0.2]))
    assert rep.passed
    assert adjoint_report(make_ctx(constant_E([0.5])), g, [(0.2, 0.2)]).checks[0].value <= 1e-15


def test_adjoint_refuses_large_or_2d_grids():
    with pytest.raises(ValueError, match="n <= 32"):
        adjoint_report(make_ctx(zero_potential(1)), Grid(1, 64, 1.0), [(0.1, 0.0)])
    with pytest.raises(ValueError, match="d=1"):
        adjoint_report(make_ctx(zero_potential(2)), Grid(2, 8, 1.0), [(0.1, 0.0)])


@pytest.mark.parametrize("gname,tol", [("zero", 0.0), ("linear", 1e-10), ("bilinear", 1e-9), ("time", 1e-10),
                                       ("quadratic", 1e-9)])
def test_gauge_polynomial(gname, tol):
    g = Grid(1, 64, 4.0)
    f = gaussian_bump(g, [0.0], 0.5)
    rep = gauge_report(make_ctx(constant_E([0.5])), g, make_uniform_division(0, 0.5, 4), f, make_gauge(gname, 1))
    assert rep.checks[0].value <= max(tol, 1e-14)
    assert rep.records["quadrature_exact"]


def test_gauge_smooth_uses_quadrature_tolerance():
    g = Grid(1, 64, 4.0)
    f = gaussian_bump(g, [0.0], 0.5)
    rep = gauge_report(make_ctx(time_ramped_A(1)), g, make_uniform_division(0, 0.5, 4), f, make_gauge("smooth", 1))
    assert not rep.records["quadrature_exact"]
    assert rep.checks[0].bound == 1e-6 and rep.passed


def test_convergence_free_exact():
    g = Grid(1, 64, 4.0)
    f = gaussian_bump(g, [0.0], 0.5)
    ladder = [make_uniform_division(0, 0.5, nu) for nu in (2, 4)]
    zig = [make_zigzag_division(0.0, 0.5, 0.5, 1)]
    rep = convergence_report(make_ctx(zero_potential(1)), g, 0.0, 0.5, f, ladder, zig)
    c = names(rep)
    assert c["uniform_exact"].passed and c["zigzag_exact"].passed and rep.passed


def test_convergence_rejects_bad_inputs():
    g = Grid(1, 32, 4.0)
    f = gaussian_bump(g, [0.0], 0.5)
    ctx = make_ctx(constant_E([0.5]))
    with pytest.raises(ValueError, match="10x"):
        convergence_report(ctx, g, 0.0, 0.5, f, [make_uniform_division(0, 0.5, 8)], substeps=50)
    with pytest.raises(ValueError, match="t_i to t_f"):
        convergence_report(ctx, g, 0.0, 0.5, f, [make_uniform_division(0, 0.4, 8)])


def test_convergence_constant_E_small_ladder():
    g = Grid(1, 128, 8.0)
    f = gaussian_bump(g, [0.0], 0.7)
    ladder = [make_uniform_division(0, 0.5, nu) for nu in (4, 8, 16)]
    rep = convergence_report(make_ctx(constant_E([0.5])), g, 0.0, 0.5, f, ladder)
    assert rep.records["uniform_order"] >= 0.9 and rep.passed


def test_local_order_constant_B_is_second_order():
    # with a magnetic field the step error is O(rho^2)
    g = Grid(2, 32, 6.0)
    f = gaussian_bump(g, [0.0, 0.0], 0.8)
    rep = local_order_report(make_ctx(constant_B([0.5], 2)), g, f, 0.0, [0.1, 0.05, 0.025], substeps=100)
    assert 1.8 <= rep.records["local_order"] <= 2.2


def test_causality_static_and_refusals():
    g = Grid(1, 256, 4.0)
    ctx = make_ctx(zero_potential(1))
    f = gaussian_bump(g, [0.0], 0.1, cutoff=0.5)
    rep = causality_report(ctx, g, TimeDivision([0.4, 0.4]), f, [0.0], 0.5)
    assert rep.records["radius"] == rep.records["initial_radius"]
    with pytest.raises(ValueError, match=r"need L >= 4\.59375"):
        causality_report(ctx, g, make_uniform_division(0, 4, 4), f, [0.0], 0.5)
    with pytest.raises(ValueError, match="exceeds R"):
        causality_report(ctx, g, make_uniform_division(0, 1, 4), f, [0.0], 0.2)
    need = required_half_width(ctx, g, make_uniform_division(0, 1, 4), [0.5], 0.5)
    assert abs(need - (0.5 + 0.5 + 1.0 + 3 * g.h)) <= 1e-15


def test_causality_zigzag_records_both_cones():
    g = Grid(1, 256, 4.0)
    ctx = make_ctx(zero_potential(1))
    f = gaussian_bump(g, [0.0], 0.1, cutoff=0.5)
    D = make_zigzag_division(0.0, 0.4, 0.6, 1)
    rep = causality_report(ctx, g, D, f, [0.0], 0.5)
    assert rep.records["slice_sum_cone_radius"] > rep.records["cone_radius"]
    assert rep.passed


def test_psi_identity_report_cases():
    assert psi_identity_report(zero_potential(2), samples=20).passed
    assert psi_identity_report(time_ramped_A(1), samples=50).passed
    rep = psi_identity_report(constant_B([0.5], 2), samples=50)
    c = names(rep)
    # the plain identity needs (x - z).B(s)(y - z) = 0, which a nonzero B violates
    assert not c["psi_identity"].passed
    assert c["psi_identity_flux_corrected"].passed


def test_report_merge_and_verdicts():
    a = PropagationReport("a")
    a.check("x", 1.0, 2.0)
    b = PropagationReport("b", records={"k": 1})
    b.check("y", 3.0, 2.0)
    a.merge(b)
    assert not a.passed and a.records["b.k"] == 1
    assert [c.verdict for c in a.checks] == ["PASS", "FAIL"]
