"""
Hermitian matrix systems (alpha^(1..d), beta) for the Dirac Hamiltonian.

The matrices only need to be Hermitian.  When they also satisfy the
anticommutation relations the system is flagged as Clifford, and the
propagation-speed constant ``lambda_max`` is exactly 1.

All exponentials of Hermitian generators go through an eigendecomposition,
so the results are unitary to roundoff.  Non-normal exponentials (complex
momenta in :func:`growth_bound_margin`) use scipy's scaling-and-squaring.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import linalg as sla

HERMITIAN_TOL = 1e-12
CLIFFORD_TOL = 1e-12

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)

# sampling density for the non-Clifford lambda_max search
SPHERE_SAMPLES = {2: 10_000, 3: 100_000}


@dataclass(frozen=True)
class PhysicalParams:
    """Speed of light and mass in simulation units (hbar = e = 1)."""

    c: float = 1.0
    m: float = 1.0

    hbar = 1.0
    e = 1.0

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0:
            raise ValueError(f"speed of light must be positive, got c={self.c}")
        if not np.isfinite(self.m) or self.m < 0:
            raise ValueError(f"mass must be nonnegative, got m={self.m}")


def _max_dev(a, b) -> float:
    return float(np.max(np.abs(a - b))) if np.size(a) else 0.0


def hermitian_deviation(M) -> float:
    """Max-entry deviation ``|M - M^dagger|_inf``."""
    M = np.asarray(M)
    return _max_dev(M, np.conj(np.swapaxes(M, -1, -2)))


def clifford_deviation(alphas: Sequence[np.ndarray], beta: np.ndarray) -> float:
    """Worst max-entry violation of ``a_j a_k + a_k a_j = 2 delta_jk I``, with a_0 = beta."""
    mats = [beta, *alphas]
    eye = np.eye(beta.shape[0])
    worst = 0.0
    for j, a in enumerate(mats):
        for k in range(j, len(mats)):
            b = mats[k]
            target = 2.0 * eye if j == k else 0.0 * eye
            worst = max(worst, _max_dev(a @ b + b @ a, target))
    return worst


@dataclass(frozen=True, eq=False)
class DiracAlgebra:
    """The matrices alpha^(1), ..., alpha^(d) and beta.

    Instances are immutable; build them with :func:`make_standard_algebra`
    or :func:`make_custom_algebra`, which validate Hermiticity and set the
    Clifford flag.
    """

    alphas: tuple
    beta: np.ndarray
    is_clifford: bool
    name: str = "custom"
    _search: dict = field(default_factory=dict, repr=False)

    @property
    def d(self) -> int:
        return len(self.alphas)

    @property
    def N(self) -> int:
        return self.beta.shape[0]

    @property
    def alpha_stack(self) -> np.ndarray:
        return np.stack(self.alphas)

    @cached_property
    def lambda_max(self) -> float:
        # cached_property writes straight into __dict__, so this is write-once
        # even on a frozen dataclass; a racing recomputation gives the same value
        return lambda_max(self, **self._search)


def make_standard_algebra(d: int) -> DiracAlgebra:
    """Standard Clifford system: Pauli matrices for d=1,2, Dirac representation for d=3."""
    if d == 1:
        alphas, beta = (SIGMA_1,), SIGMA_3
    elif d == 2:
        alphas, beta = (SIGMA_1, SIGMA_2), SIGMA_3
    elif d == 3:
        z = np.zeros((2, 2), dtype=complex)
        alphas = tuple(np.block([[z, s], [s, z]]) for s in PAULI)
        beta = np.block([[np.eye(2), z], [z, -np.eye(2)]]).astype(complex)
    else:
        raise ValueError(f"standard algebra is defined for d in {{1, 2, 3}}, got d={d}")
    alg = make_custom_algebra(alphas, beta)
    return DiracAlgebra(alg.alphas, alg.beta, alg.is_clifford, name=f"standard-{d}")


def make_custom_algebra(alphas, beta=None, *, sphere_samples: int | None = None) -> DiracAlgebra:
    """Validate user matrices and detect the Clifford relations.

    Parameters
    ----------
    alphas : sequence of (N, N) array_like
        One matrix per spatial dimension, 1 <= d <= 3.
    beta : (N, N) array_like, optional
        Mass matrix; defaults to the zero matrix.
    sphere_samples : int, optional
        Overrides the direction count of the lambda_max search.
    """
    alphas = [np.array(a, dtype=complex) for a in alphas]
    if not 1 <= len(alphas) <= 3:
        raise ValueError(f"need between 1 and 3 alpha matrices, got {len(alphas)}")
    N = alphas[0].shape[0] if alphas[0].ndim == 2 else -1
    beta = np.zeros((N, N), dtype=complex) if beta is None else np.array(beta, dtype=complex)
    named = [(f"alphas[{j}]", a) for j, a in enumerate(alphas)] + [("beta", beta)]
    for label, M in named:
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"{label} must be a square matrix, got shape {M.shape}")
        if M.shape[0] != N:
            raise ValueError(f"{label} has dimension {M.shape[0]}, expected {N}")
    for label, M in named:
        dev = hermitian_deviation(M)
        if dev > HERMITIAN_TOL:
            raise ValueError(f"{label} is not Hermitian (max deviation {dev:.3e})")
    for _, M in named:
        M.setflags(write=False)
    is_clifford = clifford_deviation(alphas, beta) <= CLIFFORD_TOL
    search = {} if sphere_samples is None else {"samples": sphere_samples}
    return DiracAlgebra(tuple(alphas), beta, is_clifford, _search=search)


def symbol(algebra: DiracAlgebra, params: PhysicalParams, zeta) -> np.ndarray:
    """Kinetic symbol ``c alpha.zeta + beta m c^2``.

    ``zeta`` has shape (..., d) and may be complex; the result has shape
    (..., N, N).
    """
    zeta = np.asarray(zeta)
    if zeta.ndim == 0 and algebra.d == 1:
        zeta = zeta[None]
    if zeta.shape[-1] != algebra.d:
        raise ValueError(f"momentum has {zeta.shape[-1]} components, algebra has d={algebra.d}")
    out = params.c * np.tensordot(zeta, algebra.alpha_stack, axes=([-1], [0]))
    return out + algebra.beta * (params.m * params.c**2)


def _unit_directions(d: int, count: int) -> np.ndarray:
    if d == 2:
        phi = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    # Fibonacci lattice: quasi-uniform on S^2
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z**2)
    phi = np.pi * (1 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _top_eig(alpha_stack, xi):
    w, v = np.linalg.eigh(np.tensordot(xi, alpha_stack, axes=([-1], [0])))
    return w[..., -1], v[..., :, -1]


def _ascend(alpha_stack, xi, iters=200):
    """Projected gradient ascent of the top eigenvalue on the unit sphere."""
    lam, vec = _top_eig(alpha_stack, xi)
    step = 0.1
    for _ in range(iters):
        # Hellmann-Feynman: d lambda / d xi_j = v^dagger alpha_j v
        grad = np.real(np.einsum("a,jab,b->j", vec.conj(), alpha_stack, vec))
        grad -= xi * (grad @ xi)
        if np.linalg.norm(grad) < 1e-14:
            break
        trial = xi + step * grad
        trial /= np.linalg.norm(trial)
        lam_t, vec_t = _top_eig(alpha_stack, trial)
        if lam_t > lam:
            xi, lam, vec = trial, lam_t, vec_t
            step *= 1.5
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return lam


def lambda_max(algebra: DiracAlgebra, samples: int | None = None, refine: int = 8) -> float:
    """Largest eigenvalue of ``alpha.xi`` over unit momenta.

    Exactly 1 for Clifford systems.  For d=1 the unit sphere is {+1, -1}, so
    the answer is enumerated.  For d >= 2 the sphere is scanned and the best
    ``refine`` directions are polished by local ascent; there is no
    optimality certificate.
    """
    if algebra.is_clifford:
        return 1.0
    a = algebra.alpha_stack
    if algebra.d == 1:
        w = np.linalg.eigvalsh(a[0])
        return float(max(0.0, w[-1], -w[0]))
    count = samples or SPHERE_SAMPLES[algebra.d]
    dirs = _unit_directions(algebra.d, count)
    tops = np.linalg.eigvalsh(np.tensordot(dirs, a, axes=([-1], [0])))[:, -1]
    best = np.argsort(tops)[-refine:]
    refined = [_ascend(a, dirs[i]) for i in best]
    return float(max(0.0, tops.max(), *refined))


def unitary_exp(H, theta: float) -> np.ndarray:
    """``exp(-i theta H)`` for Hermitian ``H`` (batched over leading axes)."""
    H = np.asarray(H, dtype=complex)
    dev = hermitian_deviation(H)
    if dev > 1e-10:
        raise ValueError(f"unitary_exp needs a Hermitian generator (deviation {dev:.3e})")
    w, v = np.linalg.eigh(H)
    return np.einsum("...ab,...b,...cb->...ac", v, np.exp(-1j * theta * w), v.conj())


def lie_product(A, B, n: int) -> np.ndarray:
    """``[exp(A/n) exp(B/n)]^n``, the Lie product approximation of exp(A+B)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need square matrices of equal shape, got {A.shape} and {B.shape}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    factor = sla.expm(A / n) @ sla.expm(B / n)
    return np.linalg.matrix_power(factor, n)


def growth_bound_margin(algebra: DiracAlgebra, params: PhysicalParams, rho: float,
                        xi, eta, u) -> float:
    """Slack in the complex-momentum growth bound.

    Returns ``exp(|rho| c |eta| lambda_max) |u| - |exp(-i rho {c alpha.(xi + i eta) + beta m c^2}) u|``,
    which is nonnegative up to roundoff.
    """
    u = np.asarray(u, dtype=complex)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    gen = -1j * rho * symbol(algebra, params, xi + 1j * eta)
    lhs = np.linalg.norm(sla.expm(gen) @ u)
    bound = np.exp(abs(rho) * params.c * np.linalg.norm(eta) * algebra.lambda_max)
    return float(bound * np.linalg.norm(u) - lhs)
