import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from dirac_pathint.algebra import (PhysicalParams, clifford_deviation, growth_bound_margin, lambda_max,
                                   lie_product, make_custom_algebra, make_standard_algebra, symbol,
                                   unitary_exp, SIGMA_1, SIGMA_3)

floats = st.floats(-3, 3, allow_nan=False)


def random_hermitian(rng, N):
    X = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return (X + X.conj().T) / 2


@pytest.mark.parametrize("d", [1, 2, 3])
def test_standard_algebra_is_clifford(d):
    alg = make_standard_algebra(d)
    assert alg.is_clifford
    assert alg.d == d
    assert alg.N == (2 if d < 3 else 4)
    assert clifford_deviation(alg.alphas, alg.beta) <= 1e-12


def test_standard_d1_matrices():
    alg = make_standard_algebra(1)
    np.testing.assert_array_equal(alg.alphas[0], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(alg.beta, [[1, 0], [0, -1]])
    np.testing.assert_array_equal(alg.alphas[0] @ alg.beta + alg.beta @ alg.alphas[0], np.zeros((2, 2)))


def test_standard_d3_anticommutators_by_direct_products():
    alg = make_standard_algebra(3)
    mats = [alg.beta, *alg.alphas]
    pairs = 0
    for j in range(4):
        np.testing.assert_allclose(mats[j] @ mats[j], np.eye(4), atol=1e-15)
        for k in range(j + 1, 4):
            np.testing.assert_allclose(mats[j] @ mats[k] + mats[k] @ mats[j], 0, atol=1e-15)
            pairs += 1
    assert pairs == 6


@pytest.mark.parametrize("d", [0, 4])
def test_standard_algebra_rejects_unsupported_d(d):
    with pytest.raises(ValueError, match="d in"):
        make_standard_algebra(d)


def test_custom_diagonal_is_not_clifford():
    alg = make_custom_algebra([np.diag([2.0, -1.0])], np.zeros((2, 2)))
    assert not alg.is_clifford


def test_custom_rejects_non_hermitian_with_name_and_deviation():
    with pytest.raises(ValueError, match=r"alphas\[0\] is not Hermitian \(max deviation 1\.000e\+00\)"):
        make_custom_algebra([[[0, 1j], [0, 0]]])


def test_custom_pauli_is_clifford():
    assert make_custom_algebra([SIGMA_1], SIGMA_3).is_clifford


def test_custom_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="beta has dimension 3"):
        make_custom_algebra([np.eye(2)], np.eye(3))
    with pytest.raises(ValueError, match="square"):
        make_custom_algebra([np.ones((2, 3))])


def test_algebra_matrices_are_read_only():
    alg = make_standard_algebra(2)
    with pytest.raises(ValueError):
        alg.alphas[0][0, 0] = 5


def test_symbol_hand_value():
    S = symbol(make_standard_algebra(1), PhysicalParams(1.0, 1.0), 2.0)
    np.testing.assert_array_equal(S, [[1, 2], [2, -1]])


def test_symbol_zero():
    S = symbol(make_standard_algebra(2), PhysicalParams(1.0, 0.0), [0.0, 0.0])
    np.testing.assert_array_equal(S, np.zeros((2, 2)))


def test_symbol_dimension_mismatch():
    with pytest.raises(ValueError, match="components"):
        symbol(make_standard_algebra(2), PhysicalParams(), [1.0, 2.0, 3.0])


def test_symbol_batched_shape():
    S = symbol(make_standard_algebra(3), PhysicalParams(), np.zeros((5, 7, 3)))
    assert S.shape == (5, 7, 4, 4)


@settings(max_examples=50, deadline=None)
@given(st.lists(floats, min_size=2, max_size=2), st.floats(0.1, 3), st.floats(0, 2))
def test_symbol_real_momentum_is_hermitian(xi, c, m):
    S = symbol(make_standard_algebra(2), PhysicalParams(c, m), xi)
    assert np.max(np.abs(S - S.conj().T)) <= 1e-14


def test_lambda_max_values():
    assert make_standard_algebra(1).lambda_max == 1.0
    assert make_standard_algebra(3).lambda_max == 1.0
    # xi = +1 gives {2, -1}, xi = -1 gives {-2, 1}
    assert make_custom_algebra([np.diag([2.0, -1.0])]).lambda_max == 2.0
    assert make_custom_algebra([np.zeros((2, 2)), np.zeros((2, 2))]).lambda_max == 0.0


def test_lambda_max_non_clifford_2d_against_dense_scan():
    # alpha_1 = diag(1, -1), alpha_2 = 2 sigma_1: top eigenvalue of a diag(1,-1) + 2b sigma_1 is sqrt(a^2 + 4 b^2)
    alg = make_custom_algebra([np.diag([1.0, -1.0]), 2 * SIGMA_1.real])
    assert not alg.is_clifford
    assert abs(alg.lambda_max - 2.0) <= 1e-9


def test_lambda_max_3d_non_clifford_sample_count_knob():
    rng = np.random.default_rng(3)
    alphas = [random_hermitian(rng, 3) for _ in range(3)]
    coarse = lambda_max(make_custom_algebra(alphas), samples=200)
    fine = lambda_max(make_custom_algebra(alphas), samples=20000)
    # a local-ascent result is never below the best sampled direction
    assert fine >= coarse - 1e-9
    assert abs(fine - coarse) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.lists(floats, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_homogeneity_of_eigenvalues(xi):
    alg = make_custom_algebra([np.diag([2.0, -1.0, 0.5]), np.eye(3), np.diag([0.0, 1.0, 3.0])])
    u = np.array(xi) / np.linalg.norm(xi)
    base = np.linalg.eigvalsh(np.tensordot(u, alg.alpha_stack, axes=1))
    for s in (-2.0, 0.5, 3.0):
        scaled = np.linalg.eigvalsh(np.tensordot(s * u, alg.alpha_stack, axes=1))
        np.testing.assert_allclose(scaled, np.sort(s * base), atol=1e-12)


def test_clifford_symbol_squares(rng):
    alg = make_standard_algebra(3)
    for _ in range(100):
        xi = rng.normal(size=3)
        A = np.tensordot(xi, alg.alpha_stack, axes=1)
        assert np.max(np.abs(A @ A - xi @ xi * np.eye(4))) <= 1e-10


def test_unitary_exp_examples():
    np.testing.assert_allclose(unitary_exp(SIGMA_1, 0.0), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(unitary_exp(SIGMA_1, np.pi / 2), -1j * SIGMA_1, atol=1e-15)


def test_unitary_exp_random_unitarity(rng):
    for _ in range(100):
        N = int(rng.integers(1, 6))
        H = random_hermitian(rng, N)
        theta = rng.uniform(-10, 10)
        U = unitary_exp(H, theta)
        assert np.max(np.abs(U.conj().T @ U - np.eye(N))) <= 1e-12
        assert abs(abs(np.linalg.det(U)) - 1) <= 1e-12
        np.testing.assert_allclose(U, expm(-1j * theta * H), atol=1e-11)


def test_unitary_exp_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        unitary_exp(np.array([[0, 1], [0, 0]]), 1.0)


def test_lie_product_commuting_is_exact():
    A = np.diag([1j, -0.5j])
    B = np.diag([0.3j, 2j])
    for n in (1, 3, 10):
        np.testing.assert_allclose(lie_product(A, B, n), expm(A + B), atol=1e-12)


def test_lie_product_n1_and_first_order():
    A, B = 1j * SIGMA_1, 1j * SIGMA_3
    np.testing.assert_allclose(lie_product(A, B, 1), expm(A) @ expm(B), atol=1e-14)
    ref = unitary_exp(-(SIGMA_1 + SIGMA_3), 1.0)       # exp(i(sigma1 + sigma3)) by eigendecomposition
    errs = [np.max(np.abs(lie_product(A, B, n) - ref)) for n in (8, 16, 32, 64)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.8) & (ratios < 2.2))


def test_lie_product_errors():
    with pytest.raises(ValueError, match="n must be"):
        lie_product(np.eye(2), np.eye(2), 0)
    with pytest.raises(ValueError, match="equal shape"):
        lie_product(np.eye(2), np.eye(3), 2)


def test_growth_margin_real_momentum_and_zero_time(rng):
    alg = make_standard_algebra(1)
    p = PhysicalParams()
    u = rng.normal(size=2) + 1j * rng.normal(size=2)
    assert abs(growth_bound_margin(alg, p, 0.7, [1.3], [0.0], u)) <= 1e-12
    assert growth_bound_margin(alg, p, 0.0, [1.3], [0.8], u) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), floats, floats, st.lists(floats, min_size=4, max_size=4))
def test_growth_margin_nonnegative_property(rho, xi, eta, u):
    u = np.array(u[:2]) + 1j * np.array(u[2:])
    if np.linalg.norm(u) < 1e-3:
        return
    for alg in (make_standard_algebra(1), make_custom_algebra([np.diag([2.0, -1.0])], np.diag([1.0, 0.5]))):
        assert growth_bound_margin(alg, PhysicalParams(), rho, [xi], [eta], u) >= -1e-10


def test_physical_params_validation():
    with pytest.raises(ValueError, match="speed of light"):
        PhysicalParams(c=0.0)
    with pytest.raises(ValueError, match="mass"):
        PhysicalParams(m=-1.0)
    assert PhysicalParams().hbar == 1.0 and PhysicalParams().e == 1.0
