import numpy as np
import pytest
from scipy.integrate import quad

from squidflux import (
    CrossSectionGrid,
    SolverParams,
    discretize_cross_section,
    kinetic_diagonal,
    partial_inductance_matrix,
    solve_current_distribution,
    surface_current_density,
)
from squidflux.constants import MU0
from squidflux.errors import ValidationError
from squidflux.noise import surface_current_profile
from squidflux.strip import filament_mutual_inductance


def neumann_mutual(d, length):
    """Oracle: double line integral of the Neumann formula, reduced to a
    single convolution integral and evaluated by adaptive quadrature."""
    integrand = lambda u: (length - u) / np.hypot(d, u)
    breaks = [x for x in (d, 10 * d, 100 * d) if x < length]
    value, _ = quad(integrand, 0.0, length, points=breaks, limit=200)
    return MU0 / (4 * np.pi) * 2 * value


def small_params(grid, factor=200.0):
    return SolverParams(strip_length=factor * max(grid.W, grid.b), lam=40e-9)


def test_discretize_standard_geometry():
    grid = discretize_cross_section(1e-6, 190e-9, 20e-9)
    assert (grid.nx, grid.ny) == (50, 10)
    assert grid.n_patches == 500


def test_discretize_tiling_exact():
    grid = discretize_cross_section(1e-6, 190e-9, 20e-9)
    assert grid.nx * grid.ny * grid.dx * grid.dy == pytest.approx(1e-6 * 190e-9, rel=1e-12)
    assert grid.dx <= 20e-9 * (1 + 1e-9)
    assert grid.dy <= 20e-9 * (1 + 1e-9)


def test_discretize_minimum_two_rows():
    grid = discretize_cross_section(1e-6, 20e-9, 20e-9)
    assert grid.ny == 2


def test_discretize_cap_preserves_aspect():
    free = discretize_cross_section(5e-6, 190e-9, 20e-9, cap=10**9)
    capped = discretize_cross_section(5e-6, 190e-9, 20e-9, cap=1000)
    assert capped.nx * capped.ny <= 1000
    assert capped.nx % 2 == 0 and capped.ny % 2 == 0
    aspect_free = free.nx / free.ny
    aspect_capped = capped.nx / capped.ny
    assert aspect_capped == pytest.approx(aspect_free, rel=0.35)


def test_discretize_cap_too_small():
    with pytest.raises(ValidationError):
        discretize_cross_section(1e-6, 190e-9, 20e-9, cap=3)


def test_grid_validation():
    with pytest.raises(ValidationError):
        CrossSectionGrid(W=1e-6, b=190e-9, nx=3, ny=2)
    with pytest.raises(ValidationError):
        CrossSectionGrid(W=1e-6, b=190e-9, nx=2, ny=0)


def test_strip_length_floor_enforced():
    grid = discretize_cross_section(1e-6, 190e-9, 100e-9)
    params = SolverParams(strip_length=50e-6, lam=40e-9)
    with pytest.raises(ValidationError):
        partial_inductance_matrix(grid, params)


def test_mutual_inductance_against_neumann_oracle():
    length = 500e-6
    for d in (50e-9, 1e-6, 5e-6):
        closed = filament_mutual_inductance(d, length)
        oracle = neumann_mutual(d, length)
        assert closed == pytest.approx(oracle, rel=1e-3)


def test_mutual_inductance_log_asymptote():
    length = 1e-3
    d = 1e-6
    asymptote = MU0 * length / (2 * np.pi) * (np.log(2 * length / d) - 1)
    assert filament_mutual_inductance(d, length) == pytest.approx(asymptote, rel=5e-3)


def test_matrix_symmetry():
    grid = discretize_cross_section(1e-6, 190e-9, 100e-9)
    L = partial_inductance_matrix(grid, small_params(grid))
    assert np.allclose(L, L.T, rtol=0, atol=0)


def test_kinetic_diagonal_value_and_scaling():
    # lam = 40 nm, patch (20 nm)^2, length 100 um: mu0 lam^2 l / area = 5.0265e-10 H
    grid = CrossSectionGrid(W=40e-9, b=40e-9, nx=2, ny=2)
    params = SolverParams(strip_length=100e-6, lam=40e-9)
    diag = kinetic_diagonal(grid, params)
    assert diag[0] == pytest.approx(5.0265482e-10, rel=1e-6)
    # doubling the patch area halves each entry
    bigger = CrossSectionGrid(W=80e-9, b=40e-9, nx=2, ny=2)
    assert kinetic_diagonal(bigger, params)[0] == pytest.approx(diag[0] / 2, rel=1e-12)


def test_kinetic_vanishes_in_perfect_conductor_limit():
    grid = CrossSectionGrid(W=40e-9, b=40e-9, nx=2, ny=2)
    params = SolverParams(strip_length=100e-6, lam=1e-15)
    assert kinetic_diagonal(grid, params)[0] < 1e-22


@pytest.fixture(scope="module")
def solved_standard():
    grid = discretize_cross_section(1e-6, 190e-9, 40e-9)
    return solve_current_distribution(grid, small_params(grid))


def test_solve_conservation_and_sign(solved_standard):
    assert solved_standard.total_current == pytest.approx(1.0, rel=1e-9)
    assert np.all(solved_standard.patch_currents > 0)


def test_solve_mirror_symmetry(solved_standard):
    cmap = solved_standard.current_map()
    peak = np.abs(cmap).max()
    assert np.abs(cmap - cmap[::-1, :]).max() / peak < 1e-6
    assert np.abs(cmap - cmap[:, ::-1]).max() / peak < 1e-6


def test_solve_edge_peaking(solved_standard):
    x, K = surface_current_density(solved_standard)
    assert K[0] > 2 * K.min()
    # monotone decay from the edge into the bulk over the first columns
    assert np.all(np.diff(K[: len(K) // 4]) <= 0)


def test_uniform_limit_for_huge_lambda():
    grid = discretize_cross_section(1e-6, 190e-9, 100e-9)
    params = SolverParams(strip_length=200e-6, lam=10e-6)
    dist = solve_current_distribution(grid, params)
    ratio = dist.patch_currents.max() / dist.patch_currents.min()
    assert ratio < 1.05


def test_strip_length_insensitivity():
    grid = discretize_cross_section(1e-6, 190e-9, 60e-9)
    base = solve_current_distribution(grid, small_params(grid, factor=200))
    longer = solve_current_distribution(grid, small_params(grid, factor=400))
    rel = np.abs(longer.patch_currents - base.patch_currents) / base.patch_currents
    assert rel.max() < 0.01


def test_thin_film_matches_analytic_profile():
    # b = 20 nm, W = 5 um: sheet density follows the piecewise profile
    # within 10% away from the joining point
    W, b, lam = 5e-6, 20e-9, 40e-9
    grid = discretize_cross_section(W, b, lam / 2)
    dist = solve_current_distribution(grid, SolverParams(strip_length=200 * W, lam=lam))
    x, K = surface_current_density(dist)
    eps = lam**2 / (b * W)
    profile = surface_current_profile(x / W - 0.5, eps)
    profile /= np.trapezoid(profile, x)
    interior = np.abs(x / W - 0.5) < 0.45
    rel = np.abs(K - profile) / profile
    assert rel[interior].max() < 0.10


def test_surface_density_normalization_and_symmetry(solved_standard):
    x, K = surface_current_density(solved_standard)
    assert np.sum(K) * solved_standard.grid.dx == pytest.approx(1.0, rel=1e-9)
    assert np.abs(K - K[::-1]).max() / K.max() < 1e-6
    # edge peaking suppresses the center relative to a uniform sheet
    assert K[len(K) // 2] * solved_standard.grid.W < 1.0


def test_uniform_distribution_constant_density():
    grid = discretize_cross_section(1e-6, 190e-9, 100e-9)
    params = SolverParams(strip_length=200e-6, lam=5e-6)
    dist = solve_current_distribution(grid, params)
    x, K = surface_current_density(dist)
    assert np.allclose(K, 1.0 / grid.W, rtol=0.02)


def test_density_csv_dump(tmp_path, solved_standard):
    path = tmp_path / "j.csv"
    solved_standard.dump_density_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x_m,y_m,J_A_per_m2"
    assert len(lines) == 1 + solved_standard.grid.n_patches
