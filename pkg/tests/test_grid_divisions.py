import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirac_pathint.divisions import TimeDivision, make_uniform_division, make_zigzag_division
from dirac_pathint.grid import Grid, SpinorField, gaussian_bump, plane_wave


def test_grid_nodes_and_momenta():
    g = Grid(1, 8, 2.0)
    assert g.h == 0.5
    np.testing.assert_allclose(g.axis, [-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5])
    # momenta are pi m / L for m in [-n/2, n/2)
    np.testing.assert_allclose(np.sort(g.freqs), np.pi * np.arange(-4, 4) / 2.0)
    assert g.points.shape == (8, 1)
    g2 = Grid(2, 4, 1.0)
    assert g2.points.shape == (4, 4, 2) and g2.cell == 0.25


@pytest.mark.parametrize("n", [100, 0, 3])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(ValueError, match="power of two"):
        Grid(1, n, 1.0)


def test_grid_rejects_bad_d_and_L():
    with pytest.raises(ValueError, match="d in"):
        Grid(3, 8, 1.0)
    with pytest.raises(ValueError, match="positive"):
        Grid(1, 8, -1.0)
    assert Grid.default(1, 4.0).n == 256 and Grid.default(2, 4.0).n == 64


def test_field_norm_is_lattice_quadrature():
    g = Grid(1, 16, 2.0)
    vals = np.zeros((16, 2), dtype=complex)
    vals[3] = [3, 4j]
    assert abs(SpinorField(g, vals).norm() - np.sqrt(0.25 * 25)) <= 1e-15


def test_field_validation_and_immutability():
    g = Grid(1, 8, 1.0)
    with pytest.raises(ValueError, match="shape"):
        SpinorField(g, np.zeros((4, 2)))
    f = SpinorField(g, np.zeros((8, 2)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1


def test_gaussian_bump_normalized_and_truncated():
    g = Grid(1, 256, 4.0)
    f = gaussian_bump(g, [0.3], 0.1, cutoff=0.5)
    assert abs(f.norm() - 1) <= 1e-14
    outside = np.abs(g.axis - 0.3) > 0.5
    assert np.all(f.values[outside] == 0)
    with pytest.raises(ValueError, match="center"):
        gaussian_bump(g, [0.0, 1.0], 0.1)


def test_plane_wave_mode_range():
    g = Grid(1, 8, 1.0)
    f = plane_wave(g, [1], [1, 0])
    np.testing.assert_allclose(f.values[:, 0], np.exp(1j * np.pi * g.axis))
    with pytest.raises(ValueError, match="mode index"):
        plane_wave(g, [4], [1, 0])


def test_uniform_division_examples():
    D = make_uniform_division(0, 1, 4)
    assert D.sigma == 0.25 and D.nu == 4
    D1 = make_uniform_division(0, 1, 1)
    assert D1.sigma == 1 and D1.mesh == 1
    back = make_uniform_division(1, 0, 4)
    assert back.t_i == 1 and back.t_f == 0 and back.sigma == 0.25
    with pytest.raises(ValueError, match="nu must"):
        make_uniform_division(0, 1, 0)


def test_coincident_single_slice_allowed_only_alone():
    D = TimeDivision([0.3, 0.3])
    assert D.nu == 1 and D.sigma == 0
    with pytest.raises(ValueError, match="must differ"):
        TimeDivision([0.0, 0.3, 0.3, 0.5])


def test_division_window_check():
    with pytest.raises(ValueError, match="window"):
        TimeDivision([0.0, 2.0], T=1.0)


def test_zigzag_small_example():
    D = make_zigzag_division(0.0, 0.5, 1.0, 1)
    np.testing.assert_allclose(D.times, [0.0, 1.0, -1.0, 0.5])
    assert D.nu == 3 and D.sigma <= 12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zigzag_structure(n):
    T = 0.8
    D = make_zigzag_division(-0.2, 0.3, T, n)
    assert D.nu == (2 * n + 1) * n * n
    assert np.sum(D.times == T) == n and np.sum(D.times == -T) == n
    m = n * n
    for k in range(1, n + 1):
        assert D.times[(2 * k - 1) * m] == T and D.times[2 * k * m] == -T
    assert D.mesh <= 2 * T / m + 1e-15
    assert D.sigma <= (2 * n + 1) * m * (2 * T / m) ** 2
    assert D.turns == 2 * n


def test_zigzag_sigma_shrinks():
    sig = [make_zigzag_division(0.0, 0.5, 1.0, n).sigma for n in (2, 4, 8, 16)]
    assert all(a / b >= 1.9 for a, b in zip(sig[:-1], sig[1:]))


def test_zigzag_rejects_degenerate_legs():
    with pytest.raises(ValueError, match="first leg"):
        make_zigzag_division(1.0, 0.0, 1.0, 2)
    with pytest.raises(ValueError, match="last leg"):
        make_zigzag_division(0.0, -1.0, 1.0, 2)
    with pytest.raises(ValueError, match="lie in"):
        make_zigzag_division(0.0, 2.0, 1.0, 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=12, unique=True))
def test_sigma_bounded_by_mesh_times_variation(times):
    D = TimeDivision(times, T=1.0)
    assert D.sigma <= D.mesh * D.variation * (1 + 1e-12)
    R = D.reversed()
    assert R.t_i == D.t_f and abs(R.sigma - D.sigma) <= 1e-14 * D.sigma
