"""
Measurable reports for the structural properties of the time-sliced propagator.

Every report function returns a :class:`PropagationReport` holding scalar
records, per-check verdicts and optional tabular series (for plotting).
Verdicts are pure functions of the recorded numbers and the tolerances
passed in; random sampling always goes through an explicit seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .action import ActionContext
from .divisions import TimeDivision, make_uniform_division
from .fields import (GaugeFunction, PotentialSpec, base_flux_vector, gauge_transform,
                     psi_prime_vector, psi_vector)
from .grid import Grid, SpinorField
from .propagator import compose, composed_matrix, short_time_step, step_matrix
from .reference import default_substeps, reference_solve

DEFAULT_EPS_TAIL = 1e-8
EXACT_TOL = 1e-12
RATIO_BAND = (1.6, 2.4)
GLOBAL_MIN_ORDER = 0.9
LOCAL_ORDER_BAND = (1.8, 2.2)
ADJOINT_TOL = 1e-10
ADJOINT_MAX_N = 32
PSI_TOL = 1e-8
GAUGE_TOL_EXACT = 1e-9
GAUGE_TOL_QUAD = 1e-6


@dataclass(frozen=True)
class Check:
    """One verdict: ``passed`` is decided by ``value <= bound`` unless stated otherwise."""

    scenario: str
    name: str
    value: float
    bound: float
    passed: bool
    tolerance: float = 0.0

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class PropagationReport:
    """Records, checks and plot series of one scenario run."""

    scenario: str
    run_id: str = ""
    records: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, value, bound, passed=None, tolerance=0.0) -> Check:
        value = float(value)
        bound = float(bound)
        ok = value <= bound if passed is None else bool(passed)
        c = Check(self.scenario, name, value, bound, ok, float(tolerance))
        self.checks.append(c)
        return c

    def merge(self, other: "PropagationReport") -> "PropagationReport":
        self.records.update({f"{other.scenario}.{k}": v for k, v in other.records.items()})
        self.checks.extend(other.checks)
        self.series.update(other.series)
        return self


@dataclass(frozen=True)
class SupportEstimate:
    """Smallest ball about ``center`` holding all but ``eps_tail`` of the mass."""

    center: tuple
    eps_tail: float
    radius: float


def support_estimate(f: SpinorField, center, eps_tail: float = DEFAULT_EPS_TAIL) -> SupportEstimate:
    """Radius R' = min{ r : mass outside B(center; r) <= eps_tail ||f||^2 }, over node distances."""
    if eps_tail < 0:
        raise ValueError(f"eps_tail must be nonnegative, got {eps_tail}")
    a = np.atleast_1d(np.asarray(center, dtype=float))
    dist = np.linalg.norm(f.grid.points - a, axis=-1).ravel()
    mass = f.density().ravel()
    order = np.argsort(dist, kind="stable")
    dist, mass = dist[order], mass[order]
    total = mass.sum()
    if total == 0:
        return SupportEstimate(tuple(a.tolist()), eps_tail, 0.0)
    # mass strictly outside radius dist[i]; a tie group only counts once it is fully inside
    outside = total - np.cumsum(mass)
    last_of_group = np.append(dist[1:] != dist[:-1], True)
    ok = np.flatnonzero((outside <= eps_tail * total) & last_of_group)
    return SupportEstimate(tuple(a.tolist()), eps_tail, float(dist[ok[0]]))


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# -- unitarity ---------------------------------------------------------------

def unitarity_report(ctx: ActionContext, grid: Grid, divisions: Sequence[TimeDivision], f: SpinorField,
                     tol_disc: float = 1e-10, exact_tol: float = EXACT_TOL,
                     ratio_band=RATIO_BAND, scenario: str = "unitarity") -> PropagationReport:
    """Norm ratio r = ||K f|| / ||f|| over a ladder of divisions.

    K0_hat is the least-squares slope through the origin of |log r| against
    sigma.  Each rung is checked against -2 K0_hat sigma - tol <= log r <=
    K0_hat sigma + tol.  If every |log r| is below ``exact_tol`` the ladder is
    exactly unitary and a single exactness check is emitted instead of the
    shrink-ratio checks.
    """
    divisions = list(divisions)
    if not divisions:
        raise ValueError("unitarity needs at least one division")
    for D in divisions:
        if D.sigma > 1:
            raise ValueError(f"sigma = {D.sigma:.6g} > 1 is outside the regime of the norm bounds")
    rep = PropagationReport(scenario)
    f0 = f.norm()
    sig = np.array([D.sigma for D in divisions])
    logr = np.array([np.log(compose(ctx, grid, D, f).norm() / f0) for D in divisions])
    rows = [[D.nu, D.sigma, D.mesh, D.turns, lr] for D, lr in zip(divisions, logr)]
    rep.series[f"{scenario}_ladder".replace("-", "_")] = (["nu", "sigma", "mesh", "turns", "log_r"], rows)
    rep.records.update({"max_abs_log_r": float(np.max(np.abs(logr))), "rungs": len(divisions)})
    if np.all(np.abs(logr) <= exact_tol):
        rep.check("exact_unitarity", np.max(np.abs(logr)), exact_tol, tolerance=exact_tol)
        rep.records["K0_hat"] = 0.0
        return rep
    pos = sig > 0
    K0 = float(np.sum(sig[pos] * np.abs(logr[pos])) / np.sum(sig[pos] ** 2)) if pos.any() else 0.0
    rep.records["K0_hat"] = K0
    upper = np.max(logr - K0 * sig)
    lower = np.max(-2 * K0 * sig - logr)
    rep.check("norm_upper_bound", upper, tol_disc, tolerance=tol_disc)
    rep.check("norm_lower_bound", lower, tol_disc, tolerance=tol_disc)
    if len(divisions) >= 2:
        order = np.argsort(-sig)
        a = np.abs(logr[order])
        ratios = a[:-1] / a[1:]
        rep.records["ladder_ratios"] = ratios.tolist()
        rep.check("shrinks_to_one", a[-1], a[0], passed=a[-1] < a[0])
        rep.check("ladder_ratio_min", ratios.min(), ratio_band[0], passed=ratios.min() >= ratio_band[0])
        rep.check("ladder_ratio_max", ratios.max(), ratio_band[1])
    return rep


# -- adjoint -----------------------------------------------------------------

def adjoint_report(ctx: ActionContext, grid: Grid, pairs: Sequence[tuple],
                   division: Optional[TimeDivision] = None, tol: float = ADJOINT_TOL) -> PropagationReport:
    """Dense check that the step (s -> t) is the adjoint of the step (t -> s)."""
    if grid.d != 1 or grid.n > ADJOINT_MAX_N:
        raise ValueError(f"adjoint checks need a d=1 grid with n <= {ADJOINT_MAX_N}, "
                         f"got d={grid.d}, n={grid.n}")
    rep = PropagationReport("adjoint")
    rows = []
    for t, s in pairs:
        dev = np.max(np.abs(step_matrix(ctx, grid, t, s).conj().T - step_matrix(ctx, grid, s, t)))
        rows.append([t, s, dev])
    worst = max(r[2] for r in rows) if rows else 0.0
    rep.series["adjoint_pairs"] = (["t", "s", "deviation"], rows)
    rep.check("step_adjoint", worst, tol, tolerance=tol)
    if division is not None:
        M = composed_matrix(ctx, grid, division)
        Mr = composed_matrix(ctx, grid, division.reversed())
        rep.check("division_adjoint", np.max(np.abs(M.conj().T - Mr)), tol, tolerance=tol)
        rep.records["division_unitarity_defect"] = float(np.max(np.abs(M.conj().T @ M - np.eye(M.shape[0]))))
    return rep


# -- gauge covariance --------------------------------------------------------

def gauge_report(ctx: ActionContext, grid: Grid, division: TimeDivision, f: SpinorField,
                 psi: GaugeFunction, tol: Optional[float] = None) -> PropagationReport:
    """Compare K' f (transformed potential) with e^{i psi(t_f)} K (e^{-i psi(t_i)} f)."""
    rep = PropagationReport("gauge")
    exact = psi.degree is not None and psi.degree <= 2 * ctx.order - 1
    tol = (GAUGE_TOL_EXACT if exact else GAUGE_TOL_QUAD) if tol is None else tol
    ctx2 = ActionContext(ctx.algebra, ctx.params, gauge_transform(ctx.pot, psi), ctx.order)
    pts = grid.points
    lhs = compose(ctx2, grid, division, f)
    g = f.with_values(np.exp(-1j * psi.psi(division.t_i, pts))[..., None] * f.values)
    g = compose(ctx, grid, division, g)
    rhs = g.with_values(np.exp(1j * psi.psi(division.t_f, pts))[..., None] * g.values)
    disc = lhs.distance(rhs) / f.norm()
    rep.records.update({"psi": psi.name, "quadrature_exact": exact})
    rep.check(f"gauge_{psi.name}", disc, tol, tolerance=tol)
    return rep


# -- convergence -------------------------------------------------------------

def convergence_report(ctx: ActionContext, grid: Grid, t_i: float, t_f: float, f: SpinorField,
                       ladder: Sequence[TimeDivision], zigzag: Sequence[TimeDivision] = (),
                       substeps: Optional[int] = None, exact_tol: float = 1e-11,
                       min_order: float = GLOBAL_MIN_ORDER, limit_factor: float = 5.0) -> PropagationReport:
    """Errors ||K f - U f|| against the Strang reference over division ladders.

    ``ladder`` should be refining uniform divisions; ``zigzag`` optional
    zig-zag divisions ordered by refinement.  The reference uses at least 10x
    the finest ladder nu substeps.
    """
    rep = PropagationReport("converge")
    ladder = list(ladder)
    zigzag = list(zigzag)
    for D in ladder + zigzag:
        if abs(D.t_i - t_i) > 1e-14 or abs(D.t_f - t_f) > 1e-14:
            raise ValueError("every division must run from t_i to t_f")
    need = 10 * max((D.nu for D in ladder), default=1)
    substeps = max(need, default_substeps(t_i, t_f)) if substeps is None else substeps
    if substeps < need:
        raise ValueError(f"reference needs >= {need} substeps (10x the finest nu), got {substeps}")
    U = reference_solve(ctx, grid, t_i, t_f, f, substeps)
    f0 = f.norm()
    rep.records["reference_substeps"] = substeps
    rows = []
    out = {}
    for kind, divs in (("uniform", ladder), ("zigzag", zigzag)):
        errs = []
        for D in divs:
            K = compose(ctx, grid, D, f)
            e = K.distance(U) / f0
            errs.append(e)
            out[(kind, D.nu)] = K
            rows.append([kind, D.nu, D.sigma, D.turns, e])
        out[kind] = errs
    rep.series["convergence_ladder"] = (["kind", "nu", "sigma", "turns", "error"], rows)
    ue = np.array(out["uniform"])
    if len(ue):
        if np.all(ue <= exact_tol):
            rep.check("uniform_exact", ue.max(), exact_tol, tolerance=exact_tol)
        elif len(ue) >= 2:
            sl = _slope([D.sigma for D in ladder], ue)
            rep.records["uniform_order"] = sl
            rep.check("uniform_order", sl, min_order, passed=sl >= min_order)
    ze = np.array(out["zigzag"])
    if len(ze):
        if np.all(ze <= exact_tol):
            rep.check("zigzag_exact", ze.max(), exact_tol, tolerance=exact_tol)
        else:
            steps = np.diff(ze)
            rep.check("zigzag_monotone", steps.max() if len(steps) else -1.0, 0.0, passed=np.all(steps < 0))
        if len(ue):
            Ku = out[("uniform", ladder[-1].nu)]
            Kz = out[("zigzag", zigzag[-1].nu)]
            gap = Ku.distance(Kz) / f0
            bound = limit_factor * max(ue[-1], ze[-1], exact_tol)
            rep.records["uniform_zigzag_gap"] = gap
            rep.check("zigzag_same_limit", gap, bound)
    return rep


def local_order_report(ctx: ActionContext, grid: Grid, f: SpinorField, s: float, rhos: Sequence[float],
                       substeps: int = 200, band=LOCAL_ORDER_BAND) -> PropagationReport:
    """Log-log slope of the single-step error ||G(s + rho, s) f - U(s + rho, s) f|| in rho."""
    rep = PropagationReport("local_order")
    rows = []
    for rho in rhos:
        G = short_time_step(ctx, grid, s + rho, s, f)
        U = reference_solve(ctx, grid, s, s + rho, f, substeps)
        rows.append([rho, G.distance(U) / f.norm()])
    rep.series["local_order"] = (["rho", "error"], rows)
    errs = np.array([r[1] for r in rows])
    if np.all(errs <= 1e-13):
        rep.check("local_exact", errs.max(), 1e-13)
        return rep
    sl = _slope(list(rhos), errs)
    rep.records["local_order"] = sl
    rep.check("local_order_min", sl, band[0], passed=sl >= band[0])
    rep.check("local_order_max", sl, band[1])
    return rep


# -- causality ---------------------------------------------------------------

def required_half_width(ctx: ActionContext, grid: Grid, division: TimeDivision, center, R: float) -> float:
    """Smallest L for which the cone around the initial ball never wraps the torus."""
    a = np.atleast_1d(np.asarray(center, dtype=float))
    reach = np.max(np.abs(division.times - division.t_i))
    return float(np.max(np.abs(a)) + R + ctx.params.c * ctx.algebra.lambda_max * reach + 3 * grid.h)


def causality_report(ctx: ActionContext, grid: Grid, division: TimeDivision, f: SpinorField, center,
                     R: float, eps_tail: float = DEFAULT_EPS_TAIL,
                     expect_unit_cone_escape: bool = False) -> PropagationReport:
    """Support radius of K f against the cone c lambda_max |t_f - t_i| + R + 3h.

    Also records the per-slice-sum cone c lambda_max variation + R, the
    radius after every slice, and, when requested, checks that mass leaves
    the unit-speed cone (for algebras with lambda_max > 1).
    """
    need = required_half_width(ctx, grid, division, center, R)
    if need > grid.L:
        raise ValueError(f"cone would wrap the periodic domain: need L >= {need:.6g}, have L = {grid.L}")
    r0 = support_estimate(f, center, eps_tail).radius
    if r0 > R + 1e-12:
        raise ValueError(f"initial support radius {r0:.6g} exceeds R = {R}")
    rep = PropagationReport("causality")
    lam = ctx.algebra.lambda_max
    c = ctx.params.c
    delta = 3 * grid.h
    rows = [[0, division.t_i, r0]]

    def watch(j, tau, g):
        rows.append([j, tau, support_estimate(g, center, eps_tail).radius])

    compose(ctx, grid, division, f, observer=watch)
    radius = rows[-1][2]
    cone = c * lam * abs(division.t_f - division.t_i) + R
    rep.series["support_radius"] = (["step", "tau", "radius"], rows)
    rep.records.update({"lambda_max": lam, "initial_radius": r0, "radius": radius, "cone_radius": cone,
                        "slice_sum_cone_radius": c * lam * division.variation + R, "margin": delta,
                        "eps_tail": eps_tail})
    rep.check("cone", radius, cone + delta, tolerance=delta)
    if expect_unit_cone_escape:
        unit = c * abs(division.t_f - division.t_i) + R + delta
        rep.check("unit_cone_escape", radius, unit, passed=radius > unit)
    return rep


# -- Psi identity ------------------------------------------------------------

def psi_identity_report(pot: PotentialSpec, samples: int = 500, seed: int = 0, order: int = 8,
                        T: float = 1.0, box: float = 2.0, tol: float = PSI_TOL) -> PropagationReport:
    """Residual of (x - z).Psi = (x - z).Psi' over random (t, s, x, y, z).

    Also checks the flux-corrected form (x - z).(Psi - Psi' - F_s), where F_s
    is the magnetic term frozen at time s; it holds for every field, while
    the uncorrected form needs (x - z).F_s = 0.
    """
    if pot.d2A_dtdx is None:
        raise ValueError(f"potential family {pot.family!r} provides no d2A/dtdx evaluator")
    rng = np.random.default_rng(seed)
    d = pot.d
    t = rng.uniform(-T, T, samples)
    s = rng.uniform(-T, T, samples)
    x, y, z = (rng.uniform(-box, box, (samples, d)) for _ in range(3))
    P = psi_vector(pot, t, s, x, y, z, order)
    Pp = psi_prime_vector(pot, t, s, x, y, z, order)
    Fs = base_flux_vector(pot, t, s, x, y, z, order)
    dxz = x - z
    res = np.abs(np.sum(dxz * (P - Pp), axis=-1))
    res_flux = np.abs(np.sum(dxz * (P - Pp - Fs), axis=-1))
    rep = PropagationReport("psi-identity")
    rep.records.update({"family": pot.family, "samples": samples, "seed": seed})
    rep.check("psi_identity", res.max(), tol, tolerance=tol)
    rep.check("psi_identity_flux_corrected", res_flux.max(), tol, tolerance=tol)
    return rep
