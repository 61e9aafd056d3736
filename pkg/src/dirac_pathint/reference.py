"""
Independent reference propagator by Strang splitting.

Each sub-interval of length delta applies a half step of the pointwise
potential generator V I - c alpha.A at the sub-interval midpoint, a full
spectral free step, and a second half potential step.  Every factor is
unitary, so the norm is preserved to roundoff.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .action import ActionContext
from .algebra import unitary_exp
from .grid import Grid, SpinorField
from .propagator import free_multiplier

DEFAULT_SUBSTEP = 1e-3


def default_substeps(t_i: float, t_f: float) -> int:
    return max(1, math.ceil(abs(t_f - t_i) / DEFAULT_SUBSTEP - 1e-9))


def _potential_factor(ctx: ActionContext, grid: Grid, t: float, theta: float):
    """exp(-i theta (V(t, x) I - c alpha.A(t, x))) per node, or the scalar phase when A = 0."""
    pts = grid.points
    V = ctx.pot.V(t, pts)
    if not ctx.pot.has_vector_potential:
        return np.exp(-1j * theta * V)[..., None], True
    A = ctx.pot.A(t, pts)
    N = ctx.algebra.N
    gen = V[..., None, None] * np.eye(N) - ctx.params.c * np.tensordot(A, ctx.algebra.alpha_stack, axes=([-1], [0]))
    return unitary_exp(gen, theta), False


def _apply(factor, scalar, vals):
    if scalar:
        return factor * vals
    return np.einsum("...ab,...b->...a", factor, vals)


def reference_solve(ctx: ActionContext, grid: Grid, t_i: float, t_f: float, f: SpinorField,
                    substeps: Optional[int] = None) -> SpinorField:
    """Approximate U(t_f, t_i) f with ``substeps`` Strang sub-intervals (either time direction)."""
    if ctx.d != grid.d:
        raise ValueError(f"context has d={ctx.d}, grid has d={grid.d}")
    if f.grid != grid:
        raise ValueError("field lives on a different grid")
    substeps = default_substeps(t_i, t_f) if substeps is None else int(substeps)
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if t_i == t_f:
        return f
    delta = (t_f - t_i) / substeps
    axes = tuple(range(grid.d))
    M = free_multiplier(grid, ctx.algebra, ctx.params, delta)
    vals = f.values
    free = ctx.pot.vanishes
    for j in range(substeps):
        tm = t_i + (j + 0.5) * delta
        if not free:
            P, scalar = _potential_factor(ctx, grid, tm, 0.5 * delta)
            vals = _apply(P, scalar, vals)
        vals = np.fft.ifftn(np.einsum("...ab,...b->...a", M, np.fft.fftn(vals, axes=axes)), axes=axes)
        if not free:
            vals = _apply(P, scalar, vals)
    return SpinorField(grid, vals)
