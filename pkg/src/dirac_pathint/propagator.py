"""
Short-time path-integral steps on a periodic grid and their composition.

One step from time s to time t acts as

    (G f)(x_k) = h^d sum_l K0[k - l] w(t, s; x_k, y_l) f(y_l),

where K0 is the free kernel (the inverse DFT of the unitary multiplier
exp(-i rho (c alpha.xi + beta m c^2))) indexed by the lattice offset mod n,
and w is the scalar potential phase evaluated at the actual node positions.
For a vanishing potential w = 1 and the step collapses to a Fourier
multiplier, which is applied by FFT.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .action import ActionContext, potential_phase
from .algebra import DiracAlgebra, PhysicalParams, symbol, unitary_exp
from .divisions import TimeDivision
from .grid import Grid, SpinorField

THREADS_ENV = "DIRAC_PATHINT_THREADS"
# kernel entries gathered per worker chunk (bounds peak memory)
CHUNK_ENTRIES = 1 << 18


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if k < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {k}")
        return k
    return 1


def _spatial_axes(grid: Grid):
    return tuple(range(grid.d))


@lru_cache(maxsize=64)
def _multiplier(grid: Grid, algebra: DiracAlgebra, params: PhysicalParams, rho: float) -> np.ndarray:
    M = unitary_exp(symbol(algebra, params, grid.momenta), rho)
    M.setflags(write=False)
    return M


def free_multiplier(grid: Grid, algebra: DiracAlgebra, params: PhysicalParams, rho: float) -> np.ndarray:
    """exp(-i rho (c alpha.xi + beta m c^2)) at every momentum node, shape (n,)*d + (N, N)."""
    if algebra.d != grid.d:
        raise ValueError(f"algebra has d={algebra.d}, grid has d={grid.d}")
    return _multiplier(grid, algebra, params, float(rho))


@lru_cache(maxsize=64)
def _kernel(grid: Grid, algebra: DiracAlgebra, params: PhysicalParams, rho: float) -> np.ndarray:
    M = free_multiplier(grid, algebra, params, rho)
    K = np.fft.ifftn(M, axes=_spatial_axes(grid)) / grid.cell
    K.setflags(write=False)
    return K


def free_kernel(grid: Grid, algebra: DiracAlgebra, params: PhysicalParams, rho: float) -> np.ndarray:
    """Offset-indexed free kernel K0[m], shape (n,)*d + (N, N).

    Entry m is the kernel at lattice offset m h (mod the period), so that
    ``h^d sum_l K0[k - l] f_l`` is the free step.
    """
    if algebra.d != grid.d:
        raise ValueError(f"algebra has d={algebra.d}, grid has d={grid.d}")
    return _kernel(grid, algebra, params, float(rho))


def free_step(grid: Grid, algebra: DiracAlgebra, params: PhysicalParams, rho: float,
              f: SpinorField) -> SpinorField:
    """Spectral free propagation by rho: IFFT(multiplier . FFT(f))."""
    M = free_multiplier(grid, algebra, params, rho)
    axes = _spatial_axes(grid)
    fh = np.fft.fftn(f.values, axes=axes)
    return SpinorField(grid, np.fft.ifftn(np.einsum("...ab,...b->...a", M, fh), axes=axes))


def _check(ctx: ActionContext, grid: Grid, f: Optional[SpinorField] = None):
    if ctx.d != grid.d:
        raise ValueError(f"context has d={ctx.d}, grid has d={grid.d}")
    if f is not None:
        if f.grid != grid:
            raise ValueError("field lives on a different grid")
        if f.N != ctx.algebra.N:
            raise ValueError(f"field has N={f.N}, algebra has N={ctx.algebra.N}")


def _offset_index(grid: Grid, rows: np.ndarray) -> np.ndarray:
    """Flat kernel index of (k - l) mod n for output rows k and all inputs l."""
    n, d = grid.n, grid.d
    k_multi = np.stack(np.unravel_index(rows, grid.shape), axis=-1)        # (c, d)
    l_multi = np.stack(np.unravel_index(np.arange(grid.size), grid.shape), axis=-1)
    off = (k_multi[:, None, :] - l_multi[None, :, :]) % n                  # (c, P, d)
    return np.ravel_multi_index(tuple(off[..., j] for j in range(d)), grid.shape)


def _row_blocks(grid: Grid, N: int, threads: int):
    per = max(1, CHUNK_ENTRIES // (grid.size * N))
    per = min(per, -(-grid.size // max(1, threads)))
    return [np.arange(a, min(a + per, grid.size)) for a in range(0, grid.size, per)]


def _dense_rows(ctx, grid, t, s, K, fflat, rows):
    pts = grid.flat_points()
    w = potential_phase(ctx, t, s, pts[rows][:, None, :], pts[None, :, :])   # (c, P)
    Kg = K[_offset_index(grid, rows)]                                        # (c, P, N, N)
    return grid.cell * np.einsum("cpab,cp,pb->ca", Kg, w, fflat, optimize=True)


def _run_blocks(fn, blocks, threads):
    if threads <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    # each block owns a disjoint set of output rows
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, blocks))


def short_time_step(ctx: ActionContext, grid: Grid, t: float, s: float, f: SpinorField,
                    method: str = "auto", threads: Optional[int] = None) -> SpinorField:
    """One path-integral step from time s to time t.

    Parameters
    ----------
    method : {"auto", "dense", "spectral"}
        ``dense`` applies the offset kernel with the potential phase,
        O(n^{2d} N^2).  ``spectral`` is only valid for a vanishing potential.
        ``auto`` picks spectral exactly when the potential vanishes.
    threads : int, optional
        Workers for the dense path; defaults to the environment override or 1.
    """
    _check(ctx, grid, f)
    if method == "auto":
        method = "spectral" if ctx.pot.vanishes else "dense"
    if method == "spectral":
        if not ctx.pot.vanishes:
            raise ValueError("the spectral path is exact only for a vanishing potential")
        return free_step(grid, ctx.algebra, ctx.params, t - s, f)
    if method != "dense":
        raise ValueError(f"unknown step method {method!r}")
    threads = default_threads() if threads is None else threads
    K = free_kernel(grid, ctx.algebra, ctx.params, t - s).reshape(grid.size, f.N, f.N)
    fflat = f.values.reshape(grid.size, f.N)
    blocks = _row_blocks(grid, f.N, threads)
    parts = _run_blocks(lambda rows: _dense_rows(ctx, grid, t, s, K, fflat, rows), blocks, threads)
    return SpinorField(grid, np.concatenate(parts).reshape(f.values.shape))


def step_matrix(ctx: ActionContext, grid: Grid, t: float, s: float) -> np.ndarray:
    """Dense matrix of one step; rows and columns ordered (node, spinor)."""
    _check(ctx, grid)
    N = ctx.algebra.N
    P = grid.size
    if P * N > 4096:
        raise ValueError(f"dense step matrix of size {P * N} is too large; use n^d N <= 4096")
    K = free_kernel(grid, ctx.algebra, ctx.params, t - s).reshape(P, N, N)
    pts = grid.flat_points()
    w = potential_phase(ctx, t, s, pts[:, None, :], pts[None, :, :])
    G = grid.cell * K[_offset_index(grid, np.arange(P))] * w[..., None, None]   # (k, l, a, b)
    return G.transpose(0, 2, 1, 3).reshape(P * N, P * N)


def composed_matrix(ctx: ActionContext, grid: Grid, division: TimeDivision) -> np.ndarray:
    """Dense matrix of the composed operator over a division."""
    out = None
    for t, s in division.slices():
        M = step_matrix(ctx, grid, t, s)
        out = M if out is None else M @ out
    return out


def compose(ctx: ActionContext, grid: Grid, division: TimeDivision, f: SpinorField,
            method: str = "auto", threads: Optional[int] = None,
            observer: Optional[Callable[[int, float, SpinorField], None]] = None) -> SpinorField:
    """Apply the steps of ``division`` in order, starting from f at tau_0.

    ``observer(j, tau_j, field)`` is called after every step.
    """
    _check(ctx, grid, f)
    g = f
    for j, (t, s) in enumerate(division.slices(), start=1):
        g = short_time_step(ctx, grid, t, s, g, method=method, threads=threads)
        if observer is not None:
            observer(j, t, g)
    return g
