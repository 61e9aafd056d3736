"""
Time divisions tau_0, ..., tau_nu of [-T, T], monotone or not.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TimeDivision:
    """Ordered slice times; consecutive entries must differ.

    The single exception is the one-slice division {t, t}, which represents
    the identity.  ``T`` is the half-length of the admissible window, taken
    as max |tau_j| when not given.
    """

    times: np.ndarray
    T: float

    def __init__(self, times, T: float | None = None):
        tau = np.array(times, dtype=float).ravel()
        if tau.size < 2:
            raise ValueError("a division needs at least two times (nu >= 1)")
        if not np.all(np.isfinite(tau)):
            raise ValueError("division times must be finite")
        gaps = np.diff(tau)
        if tau.size > 2 and np.any(gaps == 0):
            j = int(np.flatnonzero(gaps == 0)[0])
            raise ValueError(f"consecutive division times must differ (tau_{j} = tau_{j + 1} = {tau[j]})")
        T = float(np.max(np.abs(tau))) if T is None else float(T)
        if np.any(np.abs(tau) > T * (1 + 1e-14)):
            raise ValueError(f"division leaves the window [-{T}, {T}]")
        tau.setflags(write=False)
        object.__setattr__(self, "times", tau)
        object.__setattr__(self, "T", T)

    @property
    def nu(self) -> int:
        return self.times.size - 1

    @property
    def t_i(self) -> float:
        return float(self.times[0])

    @property
    def t_f(self) -> float:
        return float(self.times[-1])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def sigma(self) -> float:
        """Sum of squared gaps."""
        return float(np.sum(self.gaps**2))

    @property
    def mesh(self) -> float:
        return float(np.max(np.abs(self.gaps)))

    @property
    def variation(self) -> float:
        return float(np.sum(np.abs(self.gaps)))

    @property
    def turns(self) -> int:
        """Number of direction reversals."""
        sgn = np.sign(self.gaps)
        return int(np.sum(sgn[1:] != sgn[:-1]))

    def slices(self):
        """Pairs (t, s) = (tau_{j+1}, tau_j) in application order."""
        return list(zip(self.times[1:].tolist(), self.times[:-1].tolist()))

    def reversed(self) -> "TimeDivision":
        """The division run backwards, from t_f to t_i."""
        return TimeDivision(self.times[::-1], self.T)

    def summary(self) -> dict:
        return {"nu": self.nu, "sigma": self.sigma, "mesh": self.mesh,
                "variation": self.variation, "turns": self.turns}

    def __repr__(self):
        return f"TimeDivision(nu={self.nu}, t_i={self.t_i}, t_f={self.t_f}, sigma={self.sigma:.6g})"


def make_uniform_division(t_i: float, t_f: float, nu: int, T: float | None = None) -> TimeDivision:
    """nu equal slices from t_i to t_f (either direction)."""
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    if t_i == t_f and nu > 1:
        raise ValueError("a coincident window admits only nu = 1")
    return TimeDivision(np.linspace(t_i, t_f, nu + 1), T)


def make_zigzag_division(t_i: float, t_f: float, T: float, n: int) -> TimeDivision:
    """Division that sweeps t_i -> T, then T <-> -T alternately, then -T -> t_f.

    Each of the 2n + 1 legs has n^2 equal slices, so nu = (2n + 1) n^2, every
    gap is at most 2T/n^2, and the division touches +T and -T exactly n times
    each (at slice indices (2k - 1) n^2 and 2k n^2).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if not (-T <= t_i <= T and -T <= t_f <= T):
        raise ValueError(f"t_i and t_f must lie in [-{T}, {T}]")
    if t_i == T:
        raise ValueError("t_i = T makes the first leg empty")
    if t_f == -T:
        raise ValueError("t_f = -T makes the last leg empty")
    m = n * n
    ends = [t_i] + [T if k % 2 == 0 else -T for k in range(2 * n)] + [t_f]
    times = [t_i]
    for a, b in zip(ends[:-1], ends[1:]):
        leg = a + (b - a) * np.arange(1, m + 1) / m
        leg[-1] = b
        times.extend(leg.tolist())
    return TimeDivision(times, T)
