"""
Electromagnetic potentials (V, A), their field strengths and gauge transforms.

Every evaluator is vectorized: positions have shape (..., d) and times are
scalars or arrays broadcastable against the leading axes.  Derivative
evaluators are analytic; :func:`check_derivatives` compares them with
central differences.

Array conventions
-----------------
``dA_dx(t, x)[..., j, k]``      is dA_k / dx_j
``d2A_dtdx(t, x)[..., j, k]``   is d^2 A_k / dt dx_j
``magnetic_matrix(...)[..., j, k]`` is B_jk = dA_k/dx_j - dA_j/dx_k
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

FAMILIES = ("zero", "constant_E", "constant_B", "harmonic_V", "time_ramped_A", "custom")


def _scalar_zero(t, x):
    return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x)[:-1]))


def _vector_zero(t, x):
    return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x)[:-1]) + np.shape(x)[-1:])


def _matrix_zero(t, x):
    d = np.shape(x)[-1]
    return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x)[:-1]) + (d, d))


def _bcast(t, x):
    """Broadcast a time array against the position batch shape."""
    return np.broadcast_to(np.asarray(t, dtype=float), np.broadcast_shapes(np.shape(t), np.shape(x)[:-1]))


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """An electromagnetic potential with analytic derivative evaluators.

    ``d2A_dtdx`` is only needed for the time derivative of the magnetic
    tensor (the primed vector field); families that cannot provide it leave
    it as None.
    """

    d: int
    V: Callable = _scalar_zero
    A: Callable = _vector_zero
    dV_dx: Callable = _vector_zero
    dA_dt: Callable = _vector_zero
    dA_dx: Callable = _matrix_zero
    d2A_dtdx: Optional[Callable] = _matrix_zero
    M: int = 1
    family: str = "custom"
    params: dict = field(default_factory=dict)
    # statically known structure, used to pick fast paths
    vanishes: bool = False
    has_vector_potential: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.M < 1:
            raise ValueError(f"growth exponent M must be >= 1, got {self.M}")

    @property
    def is_free(self) -> bool:
        return self.vanishes

    @property
    def unverified(self) -> bool:
        """Custom potentials carry no guarantee of the growth assumptions."""
        return self.family == "custom"


@dataclass(frozen=True, eq=False)
class GaugeFunction:
    """A real gauge function psi(t, x) with the derivatives a transform needs.

    ``degree`` is the total polynomial degree in (t, x), or None when psi is
    not polynomial; it decides whether fixed-order quadrature is exact.
    """

    d: int
    psi: Callable
    dpsi_dt: Callable
    dpsi_dx: Callable
    d2psi_dtdx: Callable
    d2psi_dx2: Callable
    d3psi_dtdx2: Callable
    name: str = "custom"
    degree: Optional[int] = None


# -- field strengths ---------------------------------------------------------

def electric_field(pot: PotentialSpec, t, x) -> np.ndarray:
    """E = -dA/dt - grad V."""
    return -pot.dA_dt(t, x) - pot.dV_dx(t, x)


def magnetic_matrix(pot: PotentialSpec, t, x) -> np.ndarray:
    """Full antisymmetric tensor B_jk, shape (..., d, d)."""
    g = pot.dA_dx(t, x)
    return g - np.swapaxes(g, -1, -2)


def magnetic_rate_matrix(pot: PotentialSpec, t, x) -> np.ndarray:
    """dB_jk/dt, shape (..., d, d)."""
    if pot.d2A_dtdx is None:
        raise ValueError(f"potential family {pot.family!r} provides no d2A/dtdx evaluator")
    g = pot.d2A_dtdx(t, x)
    return g - np.swapaxes(g, -1, -2)


def magnetic_tensor(pot: PotentialSpec, t, x) -> np.ndarray:
    """Independent components B_jk for j < k, ordered (1,2), (1,3), (2,3).

    Empty along the last axis when d = 1.
    """
    B = magnetic_matrix(pot, t, x)
    j, k = np.triu_indices(pot.d, 1)
    return B[..., j, k]


# -- built-in families -------------------------------------------------------

def _as_vector(v, d, what):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (d,):
        raise ValueError(f"{what} needs {d} components, got {v.shape[0]}")
    return v


def _antisym_from_components(b, d):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    npairs = d * (d - 1) // 2
    if b.shape != (npairs,):
        raise ValueError(f"magnetic field in d={d} needs {npairs} components, got {b.shape[0]}")
    F = np.zeros((d, d))
    j, k = np.triu_indices(d, 1)
    F[j, k] = b
    F[k, j] = -b
    return F


def zero_potential(d: int) -> PotentialSpec:
    return PotentialSpec(d=d, family="zero", vanishes=True, has_vector_potential=False)


def constant_E(E) -> PotentialSpec:
    """Uniform electric field in the scalar gauge: V = -E.x, A = 0."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    d = E.shape[0]

    def V(t, x):
        return -(np.asarray(x) @ E) + 0.0 * np.asarray(t)

    def dV(t, x):
        return np.broadcast_to(-E, _vector_zero(t, x).shape).copy()

    return PotentialSpec(d=d, V=V, dV_dx=dV, family="constant_E",
                         params={"e_field": E.tolist()}, has_vector_potential=False)


def constant_B(b_field, d: int = 2) -> PotentialSpec:
    """Uniform magnetic field in the symmetric gauge A_k = 1/2 sum_j x_j B_jk."""
    if d < 2:
        raise ValueError("a magnetic field needs d >= 2")
    F = _antisym_from_components(b_field, d)

    def A(t, x):
        return 0.5 * (np.asarray(x) @ F) + 0.0 * _vector_zero(t, x)

    def dA_dx(t, x):
        return np.broadcast_to(0.5 * F, _matrix_zero(t, x).shape).copy()

    return PotentialSpec(d=d, A=A, dA_dx=dA_dx, family="constant_B",
                         params={"b_field": np.atleast_1d(b_field).astype(float).tolist()})


def harmonic_V(k: float, d: int = 1, center=None) -> PotentialSpec:
    """V = k/2 |x - center|^2."""
    c0 = np.zeros(d) if center is None else _as_vector(center, d, "center")

    def V(t, x):
        r = np.asarray(x) - c0
        return 0.5 * k * np.sum(r * r, axis=-1) + 0.0 * np.asarray(t)

    def dV(t, x):
        return k * (np.asarray(x) - c0) + 0.0 * _vector_zero(t, x)

    return PotentialSpec(d=d, V=V, dV_dx=dV, family="harmonic_V",
                         params={"k": float(k), "center": c0.tolist()}, has_vector_potential=False)


def time_ramped_A(d: int = 1, a: float = 0.3, b_field=None) -> PotentialSpec:
    """A(t, x) = t (a x + 1/2 F^T x), a field switched on linearly in time.

    E = -(a x + 1/2 F^T x) has constant gradient and B = t F is uniform in
    space, so every x-derivative of dB/dt vanishes.  ``b_field`` lists the
    j < k components of F (default 0.5 each; must be absent for d = 1).
    """
    if d == 1:
        if b_field is not None and np.any(np.asarray(b_field)):
            raise ValueError("d=1 has no magnetic components")
        F = np.zeros((1, 1))
    else:
        F = _antisym_from_components(np.full(d * (d - 1) // 2, 0.5) if b_field is None else b_field, d)
    G = a * np.eye(d) + 0.5 * F           # A = t * x @ G
    params = {"a": float(a), "b_field": F[np.triu_indices(d, 1)].tolist()}

    def A(t, x):
        return _bcast(t, x)[..., None] * (np.asarray(x) @ G)

    def dA_dt(t, x):
        return np.asarray(x) @ G + 0.0 * _vector_zero(t, x)

    def dA_dx(t, x):
        return _bcast(t, x)[..., None, None] * G

    def d2A(t, x):
        return np.broadcast_to(G, _matrix_zero(t, x).shape).copy()

    return PotentialSpec(d=d, A=A, dA_dt=dA_dt, dA_dx=dA_dx, d2A_dtdx=d2A,
                         family="time_ramped_A", params=params)


def make_potential(family: str, d: int, **params) -> PotentialSpec:
    """Build a built-in family by name (the CLI entry point)."""
    if family == "zero":
        return zero_potential(d)
    if family == "constant_E":
        return constant_E(params.get("e_field", [0.5] + [0.0] * (d - 1)))
    if family == "constant_B":
        return constant_B(params.get("b_field", [0.5] * (d * (d - 1) // 2)), d=d)
    if family == "harmonic_V":
        return harmonic_V(params.get("k", 1.0), d=d, center=params.get("center"))
    if family == "time_ramped_A":
        return time_ramped_A(d, a=params.get("a", 0.3), b_field=params.get("b_field"))
    raise ValueError(f"unknown potential family {family!r}; choose from {FAMILIES[:-1]}")


def custom_potential(d: int, *, check_box=(1.0, 4.0), **evaluators) -> PotentialSpec:
    """Wrap user evaluators; derivatives are checked against finite differences.

    Custom potentials are accepted with a warning, since the growth
    assumptions behind the convergence theory are not verified.
    """
    pot = PotentialSpec(d=d, family="custom", **evaluators)
    T, L = check_box
    check_derivatives(pot, T=T, L=L)
    warnings.warn("custom potential: growth assumptions are not verified", stacklevel=2)
    return pot


# -- finite-difference self-check --------------------------------------------

def _fd_mismatch(f, df, t, x, axis, step):
    """Worst relative mismatch between df and a central difference of f."""
    if axis == "t":
        fd = (f(t + step, x) - f(t - step, x)) / (2 * step)
        an = df(t, x)
        return np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an)))
    worst = 0.0
    for j in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[j] = step
        fd = (f(t, x + e) - f(t, x - e)) / (2 * step)
        an = df(t, x)[..., j]
        worst = max(worst, np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an))))
    return worst


def check_derivatives(pot: PotentialSpec, T: float = 1.0, L: float = 4.0, samples: int = 100,
                      seed: int = 0, rtol: float = 1e-6, step: float = 1e-5) -> float:
    """Compare every analytic derivative with central differences.

    Raises ValueError naming the evaluator when the relative mismatch exceeds
    ``rtol``; returns the worst mismatch otherwise.
    """
    rng = np.random.default_rng(seed)
    d = pot.d
    worst = 0.0
    for _ in range(samples):
        t = rng.uniform(-T, T)
        x = rng.uniform(-L, L, size=d)
        checks = {
            "dV_dx": _fd_mismatch(pot.V, pot.dV_dx, t, x, "x", step),
            "dA_dt": _fd_mismatch(pot.A, pot.dA_dt, t, x, "t", step),
        }
        # dA_dx[j, k] = dA_k/dx_j: difference along x_j gives row j
        fd_rows = []
        for j in range(d):
            e = np.zeros(d)
            e[j] = step
            fd_rows.append((pot.A(t, x + e) - pot.A(t, x - e)) / (2 * step))
        an = pot.dA_dx(t, x)
        checks["dA_dx"] = np.max(np.abs(np.array(fd_rows) - an) / np.maximum(1.0, np.abs(an)))
        if pot.d2A_dtdx is not None:
            fd = (pot.dA_dx(t + step, x) - pot.dA_dx(t - step, x)) / (2 * step)
            an = pot.d2A_dtdx(t, x)
            checks["d2A_dtdx"] = np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an)))
        for name, err in checks.items():
            if not np.isfinite(err) or err > rtol:
                raise ValueError(f"{name} disagrees with finite differences "
                                 f"(relative error {err:.3e} at t={t:.3f}, x={x})")
            worst = max(worst, float(err))
    return worst


# -- gauge transformations ----------------------------------------------------

def gauge_transform(pot: PotentialSpec, psi: GaugeFunction) -> PotentialSpec:
    """V' = V - dpsi/dt,  A'_j = A_j + dpsi/dx_j, with consistent derivatives."""
    if psi.d != pot.d:
        raise ValueError(f"gauge function has d={psi.d}, potential has d={pot.d}")

    def V(t, x):
        return pot.V(t, x) - psi.dpsi_dt(t, x)

    def A(t, x):
        return pot.A(t, x) + psi.dpsi_dx(t, x)

    def dV_dx(t, x):
        return pot.dV_dx(t, x) - psi.d2psi_dtdx(t, x)

    def dA_dt(t, x):
        return pot.dA_dt(t, x) + psi.d2psi_dtdx(t, x)

    def dA_dx(t, x):
        return pot.dA_dx(t, x) + psi.d2psi_dx2(t, x)

    d2 = None
    if pot.d2A_dtdx is not None:
        def d2(t, x):
            return pot.d2A_dtdx(t, x) + psi.d3psi_dtdx2(t, x)

    trivial = psi.name == "zero"
    return replace(pot, V=V, A=A, dV_dx=dV_dx, dA_dt=dA_dt, dA_dx=dA_dx, d2A_dtdx=d2,
                   params={**pot.params, "gauge": psi.name},
                   vanishes=pot.vanishes and trivial,
                   has_vector_potential=pot.has_vector_potential or not trivial)


GAUGES = ("zero", "linear", "time", "bilinear", "quadratic", "smooth")


def make_gauge(name: str, d: int, amplitude: float = 1.0) -> GaugeFunction:
    """Named gauge functions (``amplitude`` scales psi).

    zero       psi = 0
    linear     psi = a x_1
    time       psi = a t
    bilinear   psi = a t x_1
    quadratic  psi = a (|x|^2 / 2 + t x_1)
    smooth     psi = a sin(x_1) cos(t)
    """
    a = float(amplitude)
    e1 = np.zeros(d)
    e1[0] = 1.0
    zs, zv, zm = _scalar_zero, _vector_zero, _matrix_zero

    def const_vec(v):
        return lambda t, x: np.asarray(v) + zv(t, x)

    def const_mat(m):
        return lambda t, x: np.asarray(m) + zm(t, x)

    if name == "zero":
        return GaugeFunction(d, zs, zs, zv, zv, zm, zm, name, 0)
    if name == "linear":
        return GaugeFunction(d, lambda t, x: a * np.asarray(x)[..., 0] + zs(t, x), zs,
                             const_vec(a * e1), zv, zm, zm, name, 1)
    if name == "time":
        return GaugeFunction(d, lambda t, x: a * _bcast(t, x), lambda t, x: a + zs(t, x),
                             zv, zv, zm, zm, name, 1)
    if name == "bilinear":
        return GaugeFunction(d, lambda t, x: a * _bcast(t, x) * np.asarray(x)[..., 0],
                             lambda t, x: a * np.asarray(x)[..., 0] + zs(t, x),
                             lambda t, x: a * _bcast(t, x)[..., None] * e1,
                             const_vec(a * e1), zm, zm, name, 2)
    if name == "quadratic":
        return GaugeFunction(
            d,
            lambda t, x: a * (0.5 * np.sum(np.asarray(x) ** 2, -1) + _bcast(t, x) * np.asarray(x)[..., 0]),
            lambda t, x: a * np.asarray(x)[..., 0] + zs(t, x),
            lambda t, x: a * (np.asarray(x) + _bcast(t, x)[..., None] * e1),
            const_vec(a * e1), const_mat(a * np.eye(d)), zm, name, 2)
    if name == "smooth":
        def parts(t, x):
            x1 = np.asarray(x)[..., 0]
            tb = _bcast(t, x)
            return np.sin(x1), np.cos(x1), np.sin(tb), np.cos(tb)

        def psi(t, x):
            sx, _, _, ct = parts(t, x)
            return a * sx * ct

        def psi_t(t, x):
            sx, _, st, _ = parts(t, x)
            return -a * sx * st

        def grad(t, x):
            _, cx, _, ct = parts(t, x)
            return (a * cx * ct)[..., None] * e1

        def grad_t(t, x):
            _, cx, st, _ = parts(t, x)
            return (-a * cx * st)[..., None] * e1

        def hess(t, x):
            sx, _, _, ct = parts(t, x)
            out = zm(t, x)
            out[..., 0, 0] = -a * sx * ct
            return out

        def hess_t(t, x):
            sx, _, st, _ = parts(t, x)
            out = zm(t, x)
            out[..., 0, 0] = a * sx * st
            return out

        return GaugeFunction(d, psi, psi_t, grad, grad_t, hess, hess_t, name, None)
    raise ValueError(f"unknown gauge function {name!r}; choose from {GAUGES}")


# -- the vector fields Psi and Psi' ------------------------------------------

def gauss_legendre01(order: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _prep(x, y, z, d):
    arrs = [np.asarray(v, dtype=float) for v in (x, y, z)]
    for v in arrs:
        if v.shape[-1] != d:
            raise ValueError(f"points must have {d} components, got shape {v.shape}")
    return arrs


def _endpoint_term(pot, s, x, z, order):
    th, wt = gauss_legendre01(order)
    acc = 0.0
    for q, wq in zip(th, wt):
        acc = acc + wq * pot.A(s, z + q * (x - z))
    return -acc


def _triangle_points(t, s, x, y, z, s1, s2):
    rho = t - s
    point = y + s1 * (z - y) + s1 * s2 * (x - z)
    return t - s1 * rho, point


def _electric_term(pot, t, s, x, y, z, order):
    nodes, wts = gauss_legendre01(order)
    acc = 0.0
    for s1, w1 in zip(nodes, wts):
        for s2, w2 in zip(nodes, wts):
            tt, p = _triangle_points(t, s, x, y, z, s1, s2)
            acc = acc + w1 * w2 * s1 * electric_field(pot, tt, p)
    return np.asarray(t - s)[..., None] * acc


def _contract_yz(Bint, y, z):
    return np.einsum("...jk,...k->...j", Bint, y - z)


def psi_vector(pot: PotentialSpec, t, s, x, y, z, order: int = 8) -> np.ndarray:
    """The vector field Psi(t, s; x, y, z), by nested Gauss-Legendre quadrature."""
    x, y, z = _prep(x, y, z, pot.d)
    nodes, wts = gauss_legendre01(order)
    Bint = 0.0
    for s1, w1 in zip(nodes, wts):
        for s2, w2 in zip(nodes, wts):
            tt, p = _triangle_points(t, s, x, y, z, s1, s2)
            Bint = Bint + w1 * w2 * s1 * magnetic_matrix(pot, tt, p)
    return (_endpoint_term(pot, s, x, z, order) + _electric_term(pot, t, s, x, y, z, order)
            + _contract_yz(Bint, y, z))


def psi_prime_vector(pot: PotentialSpec, t, s, x, y, z, order: int = 8) -> np.ndarray:
    """The companion field Psi', whose magnetic term carries dB/dt instead of B."""
    x, y, z = _prep(x, y, z, pot.d)
    if pot.d2A_dtdx is None:
        raise ValueError(f"potential family {pot.family!r} provides no d2A/dtdx evaluator")
    nodes, wts = gauss_legendre01(order)
    rho = t - s
    Bint = 0.0
    for s1, w1 in zip(nodes, wts):
        for s2, w2 in zip(nodes, wts):
            _, p = _triangle_points(t, s, x, y, z, s1, s2)
            for th, w3 in zip(nodes, wts):
                tt = s + th * rho * (1 - s1)
                Bint = Bint + w1 * w2 * w3 * s1 * (1 - s1) * magnetic_rate_matrix(pot, tt, p)
    return (_endpoint_term(pot, s, x, z, order) + _electric_term(pot, t, s, x, y, z, order)
            + np.asarray(rho)[..., None] * _contract_yz(Bint, y, z))


def base_flux_vector(pot: PotentialSpec, t, s, x, y, z, order: int = 8) -> np.ndarray:
    """Magnetic term of Psi frozen at the base time s.

    ``Psi - Psi'`` equals this vector exactly (B at the slice time minus B at
    time s is the time integral of dB/dt), so
    ``(x - z).Psi = (x - z).Psi' + (x - z).base_flux`` and the identity
    without the last term holds only where its contraction vanishes.
    """
    x, y, z = _prep(x, y, z, pot.d)
    nodes, wts = gauss_legendre01(order)
    Bint = 0.0
    for s1, w1 in zip(nodes, wts):
        for s2, w2 in zip(nodes, wts):
            _, p = _triangle_points(t, s, x, y, z, s1, s2)
            Bint = Bint + w1 * w2 * s1 * magnetic_matrix(pot, s, p)
    return _contract_yz(Bint, y, z)
