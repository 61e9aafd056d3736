"""
Uniform periodic grids and spinor fields sampled on them.

Field values are stored with the spinor index last: shape (n,)*d + (N,).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_N = {1: 256, 2: 64}


@dataclass(frozen=True)
class Grid:
    """The lattice x_k = -L + k h on [-L, L)^d with h = 2L/n."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"propagation grids support d in {{1, 2}}, got d={self.d}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got n={self.n}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half-width L must be positive, got L={self.L}")

    @classmethod
    def default(cls, d: int, L: float) -> "Grid":
        return cls(d, DEFAULT_N[d], L)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def cell(self) -> float:
        """Quadrature weight h^d."""
        return self.h**self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def freqs(self) -> np.ndarray:
        """Angular momentum nodes along one axis, in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, self.h)

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates, shape (n,)*d + (d,)."""
        return np.stack(np.meshgrid(*([self.axis] * self.d), indexing="ij"), axis=-1)

    @cached_property
    def momenta(self) -> np.ndarray:
        """Momentum nodes in FFT order, shape (n,)*d + (d,)."""
        return np.stack(np.meshgrid(*([self.freqs] * self.d), indexing="ij"), axis=-1)

    def flat_points(self) -> np.ndarray:
        return self.points.reshape(-1, self.d)


class SpinorField:
    """An N-component spinor sampled on a grid.  Values are copied and read-only."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=complex)
        if values.shape[:-1] != grid.shape or values.ndim != grid.d + 1:
            raise ValueError(f"field values must have shape {grid.shape} + (N,), got {values.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @property
    def N(self) -> int:
        return self.values.shape[-1]

    def norm(self) -> float:
        """L2 norm with the lattice quadrature h^d sum |f|^2."""
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(self.values) ** 2)))

    def density(self) -> np.ndarray:
        """Pointwise |f(x_k)|^2 summed over spinor components."""
        return np.sum(np.abs(self.values) ** 2, axis=-1)

    def with_values(self, values) -> "SpinorField":
        return SpinorField(self.grid, values)

    def distance(self, other: "SpinorField") -> float:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        diff = self.values - other.values
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(diff) ** 2)))

    def __repr__(self):
        return f"SpinorField(grid={self.grid}, N={self.N}, norm={self.norm():.6g})"


def _unit_spinor(spinor, N):
    u = np.zeros(N, dtype=complex) if spinor is None else np.asarray(spinor, dtype=complex)
    if spinor is None:
        u[0] = 1.0
    if u.shape != (N,):
        raise ValueError(f"spinor direction needs {N} components, got {u.shape}")
    nrm = np.linalg.norm(u)
    if nrm == 0:
        raise ValueError("spinor direction must be nonzero")
    return u / nrm


def gaussian_bump(grid: Grid, center, width: float, N: int = 2, spinor=None,
                  cutoff: float | None = None, momentum=None) -> SpinorField:
    """Gaussian exp(-|x - a|^2 / (2 width^2)) u, optionally truncated to |x - a| <= cutoff.

    The result is normalized to unit L2 norm.  ``momentum`` adds a carrier
    e^{i k.x}.
    """
    a = np.atleast_1d(np.asarray(center, dtype=float))
    if a.shape != (grid.d,):
        raise ValueError(f"center needs {grid.d} components, got {a.shape}")
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    u = _unit_spinor(spinor, N)
    r2 = np.sum((grid.points - a) ** 2, axis=-1)
    prof = np.exp(-r2 / (2 * width**2)).astype(complex)
    if cutoff is not None:
        prof[r2 > cutoff**2] = 0.0
    if momentum is not None:
        k = np.atleast_1d(np.asarray(momentum, dtype=float))
        prof = prof * np.exp(1j * grid.points @ k)
    f = SpinorField(grid, prof[..., None] * u)
    nrm = f.norm()
    if nrm == 0:
        raise ValueError("bump has no mass on the grid")
    return SpinorField(grid, f.values / nrm)


def plane_wave(grid: Grid, mode, spinor) -> SpinorField:
    """e^{i xi_m . x} u at integer mode index m (xi_m = pi m / L)."""
    m = np.atleast_1d(np.asarray(mode, dtype=int))
    if m.shape != (grid.d,):
        raise ValueError(f"mode index needs {grid.d} components, got {m.shape}")
    if np.any(m < -grid.n // 2) or np.any(m >= grid.n // 2):
        raise ValueError(f"mode index must lie in [-n/2, n/2), got {m.tolist()}")
    u = np.asarray(spinor, dtype=complex)
    xi = np.pi * m / grid.L
    return SpinorField(grid, np.exp(1j * grid.points @ xi)[..., None] * u)


def random_field(grid: Grid, N: int, rng: np.random.Generator) -> SpinorField:
    """Complex Gaussian noise, for operator-level tests."""
    shape = grid.shape + (N,)
    return SpinorField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))
