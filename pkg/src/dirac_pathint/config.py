"""
Run configuration: an INI file (``[section]`` headers, ``key = value`` lines).

Unknown sections and keys are errors; missing keys take the defaults in
:data:`SCHEMA`.  List values are comma separated.  Every validation error
names the offending ``section.key``.
"""
from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .algebra import DiracAlgebra, PhysicalParams, make_custom_algebra, make_standard_algebra
from .fields import FAMILIES, GAUGES

SCENARIOS = ("propagate", "unitarity", "adjoint", "gauge", "converge", "causality", "psi-identity", "all")
DIVISION_KINDS = ("uniform", "zigzag", "explicit", "ladder")
STATE_KINDS = ("gaussian", "plane_wave")


class ConfigError(ValueError):
    """A configuration value violates the schema or an invariant."""


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _complexes(text):
    return [complex(v.replace(" ", "")) for v in text.split(",") if v.strip()]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text.strip()


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


# section -> key -> (parser, default); None means "derived" or "absent"
SCHEMA = {
    "run": {
        "scenario": (_str, "propagate"),
        "seed": (int, 0),
        "output_dir": (_str, "out"),
        "quadrature_order": (int, 8),
    },
    "algebra": {
        "kind": (_str, "standard"),
        "matrix_file": (_str, None),
        "sphere_samples": (int, None),
    },
    "params": {
        "c": (float, 1.0),
        "m": (float, 1.0),
    },
    "potential": {
        "family": (_str, "zero"),
        "e_field": (_floats, None),
        "b_field": (_floats, None),
        "k": (float, None),
        "center": (_floats, None),
        "a": (float, None),
    },
    "gauge": {
        "psi": (_names, ["linear", "time", "bilinear"]),
        "amplitude": (float, 1.0),
    },
    "grid": {
        "d": (int, 1),
        "n": (int, None),
        "half_width": (float, 8.0),
    },
    "time": {
        "t_i": (float, 0.0),
        "t_f": (float, 1.0),
        "t_max": (float, None),
    },
    "division": {
        "kind": (_str, "uniform"),
        "nu": (int, 16),
        "zigzag_n": (int, 2),
        "times": (_floats, None),
        "ladder_nu": (_ints, [4, 8, 16, 32, 64]),
        "zigzag_ladder": (_ints, []),
        "substeps": (int, None),
        "local_rhos": (_floats, []),
    },
    "state": {
        "kind": (_str, "gaussian"),
        "center": (_floats, None),
        "width": (float, 0.5),
        "spinor": (_complexes, None),
        "cutoff": (float, None),
        "momentum": (_floats, None),
        "mode": (_ints, None),
    },
    "tolerances": {
        "eps_tail": (float, 1e-8),
        "exact_tol": (float, 1e-12),
        "tol_disc": (float, 1e-10),
        "ratio_min": (float, 1.6),
        "ratio_max": (float, 2.4),
        "min_order": (float, 0.9),
        "adjoint_tol": (float, 1e-10),
        "psi_tol": (float, 1e-8),
        "psi_samples": (int, 500),
        "gauge_tol": (float, None),
        "expect_unit_cone_escape": (_bool, False),
    },
}


@dataclass
class RunConfig:
    """A fully parsed and validated configuration.

    ``raw`` keeps the resolved key/value pairs (defaults included) for the
    metadata echo.
    """

    scenario: str
    seed: int
    output_dir: str
    order: int
    algebra: DiracAlgebra
    params: PhysicalParams
    family: str
    potential_params: dict
    gauges: list
    gauge_amplitude: float
    d: int
    n: int
    L: float
    T: float
    t_i: float
    t_f: float
    division: dict
    state: dict
    tolerances: dict
    raw: dict = field(default_factory=dict)
    source: Optional[str] = None


def _load_matrices(path: Path):
    """JSON with ``alphas`` (list of matrices) and optional ``beta``; entries are numbers or [re, im]."""
    data = json.loads(path.read_text())

    def conv(m):
        try:
            return np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in m])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: matrix entries must be numbers or [re, im] pairs ({exc})") from None

    if "alphas" not in data:
        raise ConfigError(f"{path}: matrix file needs an 'alphas' entry")
    return [conv(a) for a in data["alphas"]], (conv(data["beta"]) if "beta" in data else None)


def _resolve(cp: configparser.ConfigParser) -> dict:
    raw = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]; allowed: {', '.join(SCHEMA)}")
    for sec, keys in SCHEMA.items():
        given = dict(cp[sec]) if cp.has_section(sec) else {}
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {sec}.{key}; allowed: {', '.join(keys)}")
        raw[sec] = {}
        for key, (parse, default) in keys.items():
            if key in given:
                try:
                    raw[sec][key] = parse(given[key])
                except ValueError as exc:
                    raise ConfigError(f"{sec}.{key}: cannot parse {given[key]!r} ({exc})") from None
            else:
                raw[sec][key] = default
    return raw


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def parse_config(path, seed: Optional[int] = None, output_dir: Optional[str] = None) -> RunConfig:
    """Read and validate a configuration file; ``seed``/``output_dir`` override the file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raw = _resolve(cp)
    if seed is not None:
        raw["run"]["seed"] = seed
    if output_dir is not None:
        raw["run"]["output_dir"] = output_dir
    return build_config(raw, base=path.parent, source=str(path))


def build_config(raw: dict, base: Path = Path("."), source: Optional[str] = None) -> RunConfig:
    run, alg, par, pot, gau, grd, tim, div, st, tol = (
        raw[k] for k in ("run", "algebra", "params", "potential", "gauge", "grid", "time",
                         "division", "state", "tolerances"))
    _require(run["scenario"] in SCENARIOS, "run.scenario", f"must be one of {', '.join(SCENARIOS)}")
    _require(run["quadrature_order"] >= 1, "run.quadrature_order", "must be >= 1")

    d = grd["d"]
    _require(d in (1, 2), "grid.d", f"propagation supports d in {{1, 2}}, got {d}")
    n = grd["n"] if grd["n"] is not None else {1: 256, 2: 64}[d]
    _require(n >= 2 and n & (n - 1) == 0, "grid.n", f"must be a power of two, got {n}")
    grd["n"] = n
    L = grd["half_width"]
    _require(L > 0, "grid.half_width", "must be positive")

    try:
        params = PhysicalParams(par["c"], par["m"])
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None

    if alg["kind"] == "standard":
        algebra = make_standard_algebra(d)
    elif alg["kind"] == "custom":
        _require(alg["matrix_file"], "algebra.matrix_file", "required for a custom algebra")
        mpath = Path(alg["matrix_file"])
        mpath = mpath if mpath.is_absolute() else base / mpath
        _require(mpath.is_file(), "algebra.matrix_file", f"file not found: {mpath}")
        alphas, beta = _load_matrices(mpath)
        try:
            algebra = make_custom_algebra(alphas, beta, sphere_samples=alg["sphere_samples"])
        except ValueError as exc:
            raise ConfigError(f"algebra.matrix_file: {exc}") from None
        _require(algebra.d == d, "algebra.matrix_file", f"has d={algebra.d} but grid.d={d}")
    else:
        raise ConfigError("algebra.kind: must be 'standard' or 'custom'")

    _require(pot["family"] in FAMILIES and pot["family"] != "custom", "potential.family",
             f"must be one of {', '.join(FAMILIES[:-1])}")
    _require(not (pot["family"] == "constant_B" and d < 2), "potential.family", "constant_B needs d >= 2")
    pparams = {k: v for k, v in pot.items() if k != "family" and v is not None}

    for g in gau["psi"]:
        _require(g in GAUGES, "gauge.psi", f"unknown gauge {g!r}; choose from {', '.join(GAUGES)}")

    t_i, t_f = tim["t_i"], tim["t_f"]
    T = tim["t_max"] if tim["t_max"] is not None else max(abs(t_i), abs(t_f))
    _require(T >= max(abs(t_i), abs(t_f)), "time.t_max", f"must be >= max(|t_i|, |t_f|) = {max(abs(t_i), abs(t_f))}")

    _require(div["kind"] in DIVISION_KINDS, "division.kind", f"must be one of {', '.join(DIVISION_KINDS)}")
    _require(div["nu"] >= 1, "division.nu", "must be >= 1")
    _require(div["zigzag_n"] >= 1, "division.zigzag_n", "must be >= 1")
    _require(all(v >= 1 for v in div["ladder_nu"]), "division.ladder_nu", "entries must be >= 1")
    _require(all(v >= 1 for v in div["zigzag_ladder"]), "division.zigzag_ladder", "entries must be >= 1")
    if div["kind"] == "explicit":
        _require(div["times"] and len(div["times"]) >= 2, "division.times", "needs at least two times")
        _require(div["times"][0] == t_i and div["times"][-1] == t_f, "division.times",
                 "must start at time.t_i and end at time.t_f")
        _require(max(abs(v) for v in div["times"]) <= T, "division.times", f"must stay in [-{T}, {T}]")
    if div["kind"] == "zigzag" or div["zigzag_ladder"]:
        _require(t_i < T and t_f > -T, "time.t_max", "zig-zag divisions need t_i < T and t_f > -T")

    _require(st["kind"] in STATE_KINDS, "state.kind", f"must be one of {', '.join(STATE_KINDS)}")
    if st["center"] is None:
        st["center"] = [0.0] * d
    _require(len(st["center"]) == d, "state.center", f"needs {d} components")
    _require(st["width"] > 0, "state.width", "must be positive")
    if st["spinor"] is not None:
        _require(len(st["spinor"]) == algebra.N, "state.spinor", f"needs {algebra.N} components")
    if st["kind"] == "plane_wave":
        _require(st["mode"] is not None and len(st["mode"]) == d, "state.mode", f"needs {d} integers")
        _require(st["spinor"] is not None, "state.spinor", "required for a plane wave")

    _require(tol["eps_tail"] >= 0, "tolerances.eps_tail", "must be nonnegative")
    _require(tol["psi_samples"] >= 1, "tolerances.psi_samples", "must be >= 1")

    cfg = RunConfig(scenario=run["scenario"], seed=run["seed"], output_dir=run["output_dir"],
                    order=run["quadrature_order"], algebra=algebra, params=params,
                    family=pot["family"], potential_params=pparams, gauges=list(gau["psi"]),
                    gauge_amplitude=gau["amplitude"], d=d, n=n, L=L, T=T, t_i=t_i, t_f=t_f,
                    division=div, state=st, tolerances=tol, raw=raw, source=source)
    if cfg.scenario in ("causality", "all"):
        _check_no_wrap(cfg)
    return cfg


def _check_no_wrap(cfg: RunConfig):
    if cfg.state["kind"] != "gaussian":
        raise ConfigError("state.kind: causality needs a compactly supported gaussian state")
    R = cfg.state["cutoff"]
    _require(R is not None and R > 0, "state.cutoff", "causality needs the support radius R (cutoff) > 0")
    reach = max(abs(t - cfg.t_i) for t in division_times(cfg))
    need = (max(abs(a) for a in cfg.state["center"]) + R
            + cfg.params.c * cfg.algebra.lambda_max * reach + 3 * (2 * cfg.L / cfg.n))
    _require(need <= cfg.L, "grid.half_width", f"the propagation cone would wrap the domain; need L >= {need:.6g}")


def division_times(cfg: RunConfig):
    """Times of the primary division (the finest uniform rung for ladders)."""
    from .divisions import make_uniform_division, make_zigzag_division

    div = cfg.division
    kind = div["kind"]
    if kind == "explicit":
        return list(div["times"])
    if kind == "zigzag":
        return make_zigzag_division(cfg.t_i, cfg.t_f, cfg.T, div["zigzag_n"]).times.tolist()
    nu = max(div["ladder_nu"]) if kind == "ladder" else div["nu"]
    if cfg.t_i == cfg.t_f:
        nu = 1
    return make_uniform_division(cfg.t_i, cfg.t_f, nu).times.tolist()
