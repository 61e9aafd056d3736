"""
Batch driver: ``dirac-pathint <config> [--out DIR] [--seed INT] [--threads INT]``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
configuration or runtime error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .action import ActionContext
from .config import ConfigError, RunConfig, division_times, parse_config
from .divisions import TimeDivision, make_uniform_division, make_zigzag_division
from .fields import make_gauge, make_potential
from .grid import Grid, gaussian_bump, plane_wave
from .io import REPORT_HEADER, fmt, write_csv, write_field, write_meta
from .propagator import THREADS_ENV, compose
from .reference import reference_solve
from .validation import (PropagationReport, adjoint_report, causality_report, convergence_report,
                         gauge_report, local_order_report, psi_identity_report, support_estimate,
                         unitarity_report)


def build_context(cfg: RunConfig) -> ActionContext:
    pot = make_potential(cfg.family, cfg.d, **cfg.potential_params)
    return ActionContext(cfg.algebra, cfg.params, pot, cfg.order)


def build_state(cfg: RunConfig, grid: Grid):
    st = cfg.state
    if st["kind"] == "plane_wave":
        return plane_wave(grid, st["mode"], st["spinor"])
    return gaussian_bump(grid, st["center"], st["width"], N=cfg.algebra.N, spinor=st["spinor"],
                         cutoff=st["cutoff"], momentum=st["momentum"])


def primary_division(cfg: RunConfig) -> TimeDivision:
    return TimeDivision(division_times(cfg), cfg.T)


def _uniform_ladder(cfg):
    return [make_uniform_division(cfg.t_i, cfg.t_f, nu, cfg.T) for nu in sorted(cfg.division["ladder_nu"])]


def _zigzag_ladder(cfg):
    return [make_zigzag_division(cfg.t_i, cfg.t_f, cfg.T, k) for k in sorted(cfg.division["zigzag_ladder"])]


def scenario_propagate(cfg, ctx, grid, f, out, meta):
    rep = PropagationReport("propagate")
    D = primary_division(cfg)
    K = compose(ctx, grid, D, f)
    U = reference_solve(ctx, grid, D.t_i, D.t_f, f, cfg.division["substeps"])
    rep.records.update(D.summary())
    rep.records.update({"norm_ratio": K.norm() / f.norm(), "reference_error": K.distance(U) / f.norm(),
                        "support_radius": support_estimate(K, cfg.state["center"] if cfg.state["kind"] == "gaussian"
                                                           else [0.0] * cfg.d, cfg.tolerances["eps_tail"]).radius})
    rep.check("finite_output", 0.0 if np.all(np.isfinite(K.values)) else 1.0, 0.0)
    write_field(out / "initial_field.csv", f, meta)
    write_field(out / "final_field.csv", K, meta)
    return [rep]


def scenario_unitarity(cfg, ctx, grid, f, out, meta):
    tol = cfg.tolerances
    kw = dict(tol_disc=tol["tol_disc"], exact_tol=tol["exact_tol"], ratio_band=(tol["ratio_min"], tol["ratio_max"]))
    if cfg.division["kind"] != "ladder":
        return [unitarity_report(ctx, grid, [primary_division(cfg)], f, **kw)]
    reps = [unitarity_report(ctx, grid, _uniform_ladder(cfg), f, **kw)]
    if cfg.division["zigzag_ladder"]:
        reps.append(unitarity_report(ctx, grid, _zigzag_ladder(cfg), f, scenario="unitarity-zigzag", **kw))
    return reps


def scenario_adjoint(cfg, ctx, grid, f, out, meta):
    if cfg.d != 1:
        raise ConfigError("grid.d: adjoint checks run on d=1 grids")
    small = Grid(1, min(cfg.n, 32), cfg.L)
    rng = np.random.default_rng(cfg.seed)
    T = cfg.T if cfg.T > 0 else 1.0
    pairs = [tuple(rng.uniform(-T, T, 2).tolist()) for _ in range(5)]
    mid = np.sort(rng.uniform(-T, T, 2))
    D = TimeDivision([cfg.t_i, *mid.tolist(), cfg.t_f], T) if cfg.t_i != cfg.t_f else None
    return [adjoint_report(ctx, small, pairs, D, tol=cfg.tolerances["adjoint_tol"])]


def scenario_gauge(cfg, ctx, grid, f, out, meta):
    D = primary_division(cfg)
    reps = []
    for name in cfg.gauges:
        psi = make_gauge(name, cfg.d, cfg.gauge_amplitude)
        reps.append(gauge_report(ctx, grid, D, f, psi, tol=cfg.tolerances["gauge_tol"]))
    return reps


def scenario_converge(cfg, ctx, grid, f, out, meta):
    tol = cfg.tolerances
    ladder = _uniform_ladder(cfg)
    reps = [convergence_report(ctx, grid, cfg.t_i, cfg.t_f, f, ladder, _zigzag_ladder(cfg),
                               substeps=cfg.division["substeps"], exact_tol=max(tol["exact_tol"], 1e-11),
                               min_order=tol["min_order"])]
    if cfg.division["local_rhos"]:
        reps.append(local_order_report(ctx, grid, f, cfg.t_i, cfg.division["local_rhos"]))
    return reps


def scenario_causality(cfg, ctx, grid, f, out, meta):
    st = cfg.state
    return [causality_report(ctx, grid, primary_division(cfg), f, st["center"], st["cutoff"],
                             eps_tail=cfg.tolerances["eps_tail"],
                             expect_unit_cone_escape=cfg.tolerances["expect_unit_cone_escape"])]


def scenario_psi(cfg, ctx, grid, f, out, meta):
    T = cfg.T if cfg.T > 0 else 1.0
    return [psi_identity_report(ctx.pot, samples=cfg.tolerances["psi_samples"], seed=cfg.seed,
                                order=cfg.order, T=T, box=cfg.L / 2, tol=cfg.tolerances["psi_tol"])]


SCENARIO_RUNNERS = {
    "propagate": scenario_propagate,
    "unitarity": scenario_unitarity,
    "adjoint": scenario_adjoint,
    "gauge": scenario_gauge,
    "converge": scenario_converge,
    "causality": scenario_causality,
    "psi-identity": scenario_psi,
}


def metadata(cfg: RunConfig) -> dict:
    echo = {sec: {k: v for k, v in keys.items() if not (sec == "run" and k == "output_dir")}
            for sec, keys in cfg.raw.items()}
    return {"config": echo, "seed": cfg.seed, "version": __version__, "scenario": cfg.scenario}


def write_outputs(reports, out: Path, meta: dict):
    rows = [[c.scenario, c.name, c.value, c.bound, c.verdict, c.tolerance] for r in reports for c in r.checks]
    write_meta(write_csv(out / "report.csv", REPORT_HEADER, rows), meta)
    rec = [[r.scenario, k, v if not isinstance(v, (list, tuple, dict)) else json.dumps(v)]
           for r in reports for k, v in sorted(r.records.items())]
    write_meta(write_csv(out / "records.csv", ["scenario", "key", "value"], rec), meta)
    for r in reports:
        for name, (header, srows) in r.series.items():
            write_meta(write_csv(out / f"{name}.csv", header, srows), meta)


def run(cfg: RunConfig, out=None, stream=None) -> int:
    """Execute the configured scenario; returns the exit code."""
    stream = sys.stdout if stream is None else stream
    out = Path(out if out is not None else cfg.output_dir)
    grid = Grid(cfg.d, cfg.n, cfg.L)
    ctx = build_context(cfg)
    f = build_state(cfg, grid)
    meta = metadata(cfg)
    names = list(SCENARIO_RUNNERS) if cfg.scenario == "all" else [cfg.scenario]
    if cfg.scenario == "all" and cfg.d != 1:
        names.remove("adjoint")
    reports = []
    for name in names:
        reports.extend(SCENARIO_RUNNERS[name](cfg, ctx, grid, f, out, meta))
    for r in reports:
        r.run_id = f"{r.scenario}-seed{cfg.seed}"
    write_outputs(reports, out, meta)
    for r in reports:
        for c in r.checks:
            print(f"{c.verdict} {c.scenario}.{c.name} value={fmt(c.value)} bound={fmt(c.bound)}", file=stream)
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dirac-pathint", description=__doc__.strip().splitlines()[0])
    p.add_argument("config", help="scenario configuration file (INI)")
    p.add_argument("--out", help="output directory (overrides run.output_dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides run.seed)")
    p.add_argument("--threads", type=int, help=f"worker threads for dense steps (overrides ${THREADS_ENV})")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        os.environ[THREADS_ENV] = str(args.threads)
    try:
        cfg = parse_config(args.config, seed=args.seed, output_dir=args.out)
        return run(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
