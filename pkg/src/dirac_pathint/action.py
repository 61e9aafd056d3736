"""
Straight-line paths, the matrix-valued classical action and its scalar phase.

The action along the straight path from (s, y) to (t, x) splits into a
scalar electromagnetic part, which commutes with everything, and the free
matrix part -rho (c alpha.xi + beta m c^2).  The propagator only ever needs
the scalar part, through :func:`potential_phase`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DiracAlgebra, PhysicalParams, symbol
from .fields import PotentialSpec, gauss_legendre01

# below this |t - s| the coincident-time convention is used
COINCIDENT_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class ActionContext:
    """Everything a short-time step needs besides the grid."""

    algebra: DiracAlgebra
    params: PhysicalParams
    pot: PotentialSpec
    order: int = 8

    def __post_init__(self):
        if self.algebra.d != self.pot.d:
            raise ValueError(f"algebra has d={self.algebra.d} but potential has d={self.pot.d}")
        if self.order < 1:
            raise ValueError(f"quadrature order must be >= 1, got {self.order}")

    @property
    def d(self) -> int:
        return self.algebra.d


def straight_path(t: float, s: float, x, y, theta) -> np.ndarray:
    """q(theta) = y + (theta - s)/(t - s) (x - y)."""
    if t == s:
        raise ValueError("straight path is undefined for t == s; use the coincident-time action")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = (np.asarray(theta, dtype=float) - s) / (t - s)
    return y + lam[..., None] * (x - y)


def line_integrals(ctx: ActionContext, t: float, s: float, x, y):
    """Path averages of A and V along the straight line.

    Returns ``(intA, intV)`` with
    ``intA = int_0^1 A(t - theta rho, x - theta (x - y)) dtheta`` (shape (..., d)) and the
    matching scalar average of V.  At coincident times both are taken at
    time s, and the V average is irrelevant because it is multiplied by rho = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho = t - s
    coincident = abs(rho) < COINCIDENT_TOL
    nodes, wts = gauss_legendre01(ctx.order)
    dx = x - y
    intA = 0.0
    intV = 0.0
    pot = ctx.pot
    for th, w in zip(nodes, wts):
        tt = s if coincident else t - th * rho
        p = x - th * dx
        if pot.has_vector_potential:
            intA = intA + w * pot.A(tt, p)
        if not coincident:
            intV = intV + w * pot.V(tt, p)
    shape = np.broadcast_shapes(x.shape, y.shape)
    intA = np.broadcast_to(intA, shape) if np.ndim(intA) == 0 else intA
    intV = np.broadcast_to(intV, shape[:-1]) if np.ndim(intV) == 0 else intV
    return intA, intV


def scalar_action(ctx: ActionContext, t: float, s: float, x, y) -> np.ndarray:
    """The electromagnetic part (x - y).intA - rho intV of the action."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    intA, intV = line_integrals(ctx, t, s, x, y)
    rho = 0.0 if abs(t - s) < COINCIDENT_TOL else t - s
    return np.sum((x - y) * intA, axis=-1) - rho * intV


def action_matrix(ctx: ActionContext, t: float, s: float, x, y, xi) -> np.ndarray:
    """The Hermitian N x N action S(t, s; x, xi, y).

    For |t - s| below :data:`COINCIDENT_TOL` the free matrix term is dropped
    and A is averaged at time s, which is the coincident-time convention.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    N = ctx.algebra.N
    phase = np.dot(x - y, xi) + float(scalar_action(ctx, t, s, x, y))
    S = phase * np.eye(N, dtype=complex)
    if abs(t - s) >= COINCIDENT_TOL:
        S = S - (t - s) * symbol(ctx.algebra, ctx.params, xi)
    return S


def potential_phase(ctx: ActionContext, t: float, s: float, x, y) -> np.ndarray:
    """Unit-modulus scalar factor w(t, s; x, y); broadcasts over point batches.

    ``x`` and ``y`` are actual (unwrapped) positions: on a periodic grid the
    caller passes the lattice points themselves, never offsets reduced mod
    the period.
    """
    if ctx.pot.vanishes:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.ones(np.broadcast_shapes(x.shape, y.shape)[:-1], dtype=complex)
    return np.exp(1j * scalar_action(ctx, t, s, x, y))
