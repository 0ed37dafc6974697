import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from nonscatter.grid import Grid2, ScalarField
from nonscatter.incident import ConstantWave, PlaneWave
from nonscatter.scatter import (DiscreteEigenvalueError, PenetrableDiskSeries, SolverNonConvergence, corner_control,
                                dirichlet_verify, disk_fraction, far_field, far_field_constant,
                                lippmann_schwinger_solve, normal_derivative, residual_check, scattered_field_at,
                                self_cell_weight, square_fraction)


def test_far_field_constant():
    lam = 2.0
    assert far_field_constant(lam) == pytest.approx(np.exp(0.25j * np.pi) / np.sqrt(16 * np.pi))


@pytest.mark.parametrize("lam,s", [(1.0, 0.01), (3.0, 0.05), (0.5, 0.2)])
def test_self_cell_weight_by_quadrature(lam, s):
    a = s / math.sqrt(math.pi)
    with mpmath.workdps(30):
        re = float(mpmath.quad(lambda r: -mpmath.bessely(0, lam * r) * mpmath.pi * r / 2, [0, a]))
    im = integrate.quad(lambda r: 0.25 * special.j0(lam * r) * 2 * np.pi * r, 0, a)[0]
    assert self_cell_weight(lam, s) == pytest.approx(re + 1j * im, rel=1e-10)


@pytest.fixture(scope="module")
def disk_solve():
    lam, c = 1.0, 0.5
    grid = Grid2.centered((0, 0), 1.2, 128)
    q = c * disk_fraction(grid, 1.0)
    u, rep = lippmann_schwinger_solve(q, lam, PlaneWave(lam), grid)
    return lam, c, grid, q, u, rep


def test_ls_against_mode_matching(disk_solve):
    lam, c, grid, q, u, rep = disk_solve
    series = PenetrableDiskSeries(lam, c)
    exact = series.total_field(grid.points())
    assert np.abs(u.values - exact).max() / np.abs(exact).max() < 1e-3
    assert rep.converged and rep.residual <= 1e-8 * 10
    ff = far_field(q, u, lam)
    ref = series.far_field(ff.angles)
    assert np.abs(ff.values - ref).max() / np.abs(ref).max() < 1e-3


def test_scattered_field_at_exterior_points(disk_solve):
    lam, c, grid, q, u, _ = disk_solve
    P = np.array([[2.0, 0.0], [0.0, -3.0], [-1.5, 1.5]])
    series = PenetrableDiskSeries(lam, c)
    us = series.total_field(P) - PlaneWave(lam)(P)
    assert np.allclose(scattered_field_at(P, q, u, lam), us, atol=5e-4 * np.abs(us).max())


def test_series_self_consistency():
    s = PenetrableDiskSeries(1.3, 0.7, R=0.8)
    t = np.linspace(0, 2 * np.pi, 40)
    n = np.stack([np.cos(t), np.sin(t)], -1)
    eps = 1e-6
    inner, outer = s.total_field((0.8 - eps) * n), s.total_field((0.8 + eps) * n)
    assert np.allclose(inner, outer, atol=1e-5)
    d_in = (s.total_field((0.8 - eps) * n) - s.total_field((0.8 - 3 * eps) * n)) / (2 * eps)
    d_out = (s.total_field((0.8 + 3 * eps) * n) - s.total_field((0.8 + eps) * n)) / (2 * eps)
    assert np.allclose(d_in, d_out, atol=1e-4)
    zero = PenetrableDiskSeries(1.3, 0.0)
    assert np.allclose(zero.total_field(n * 0.5), PlaneWave(1.3)(n * 0.5))
    assert np.abs(zero.far_field(t)).max() < 1e-14


def test_ls_trivial_and_guards():
    grid = Grid2.centered((0, 0), 1.0, 32)
    u, rep = lippmann_schwinger_solve(np.zeros((32, 32)), 1.0, PlaneWave(1.0), grid)
    assert rep.iterations == 0 and np.allclose(u.values, PlaneWave(1.0)(grid.points()))
    assert np.all(far_field(np.zeros((32, 32)), u, 1.0).values == 0)
    with pytest.raises(ValueError):
        lippmann_schwinger_solve(np.zeros((32, 32)), 0.0, PlaneWave(1.0), grid)
    with pytest.raises(ValueError):
        lippmann_schwinger_solve(np.zeros((32, 32)), 10.0, PlaneWave(10.0), grid)
    with pytest.raises(ValueError):
        lippmann_schwinger_solve(np.ones((32, 32)), 1.0, PlaneWave(1.0), grid)
    with pytest.raises(ValueError):
        lippmann_schwinger_solve(np.zeros((31, 31)), 1.0, PlaneWave(1.0), grid)
    with pytest.raises(ValueError):
        far_field(np.zeros((32, 32)), u, 1.0, K=32)


def test_ls_non_convergence_is_reported():
    grid = Grid2.centered((0, 0), 1.2, 64)
    q = 40.0 * disk_fraction(grid, 1.0)
    with pytest.raises(SolverNonConvergence) as info:
        lippmann_schwinger_solve(q, 1.0, PlaneWave(1.0), grid, restart=2, max_iter=4)
    assert len(info.value.history) > 0


def test_fractions():
    grid = Grid2.centered((0, 0), 1.0, 101)
    assert square_fraction(grid, 1.0).sum() * grid.spacing**2 == pytest.approx(1.0, abs=1e-12)
    assert disk_fraction(grid, 0.7).sum() * grid.spacing**2 == pytest.approx(np.pi * 0.49, rel=2e-4)


def test_normal_derivative_of_linear_function():
    grid = Grid2.centered((0, 0), 1.0, 21)
    P = grid.points()
    U = 2.0 * P[..., 0] - 3.0 * P[..., 1]
    d = normal_derivative(U, grid.spacing)
    m = grid.n - 2
    assert np.allclose(d[:m], -2.0) and np.allclose(d[m:2 * m], 2.0)
    assert np.allclose(d[2 * m:3 * m], 3.0) and np.allclose(d[3 * m:], -3.0)


def test_dirichlet_verify_zero_potential_and_contrast():
    grid = Grid2.centered((0, 0), 1.5, 65)
    rep = dirichlet_verify(np.zeros((65, 65)), 0.0, ConstantWave(), grid)
    assert rep.mismatch == 0.0 and rep.denominator_kind == "value/side"
    q = -0.5 * disk_fraction(grid, 1.0)
    rep = dirichlet_verify(q, 0.0, ConstantWave(), grid)
    assert rep.mismatch > 0.05
    rep = dirichlet_verify(q, 1.0, PlaneWave(1.0, real=True), grid)
    assert rep.denominator_kind == "neumann" and rep.mismatch > 0.01


def test_dirichlet_verify_detects_box_eigenvalue():
    n = 33
    grid = Grid2.centered((0, 0), 1.0, n)
    s = grid.spacing
    # smallest eigenvalue of the discrete five-point Dirichlet Laplacian on the box
    lam2 = 2 * 4 / s**2 * math.sin(math.pi / (2 * (n - 1))) ** 2
    with pytest.raises(DiscreteEigenvalueError):
        dirichlet_verify(np.zeros((n, n)), math.sqrt(lam2), PlaneWave(math.sqrt(lam2), real=True), grid)


def test_residual_check():
    lam = 2.0
    for n in (33, 65):
        grid = Grid2.centered((0, 0), 1.0, n)
        u = ScalarField(grid, PlaneWave(lam, (1, 2))(grid.points()))
        r = residual_check(u, lam=lam)
        assert r < 0.2 * lam**4 * grid.spacing**2
    assert residual_check(ScalarField(grid, np.ones((65, 65))), q=np.zeros((65, 65))) == 0.0


def test_corner_control():
    ratio, ff, rep = corner_control(1.0, 1.0, 0.0, PlaneWave(1.0), n=64)
    assert ratio == 0.0 and ff.max_abs == 0.0
    ratio, ff, rep = corner_control(1.0, 1.0, 0.5, PlaneWave(1.0), n=64)
    assert ratio > 0.05


def test_far_field_outputs(tmp_path, disk_solve):
    lam, c, grid, q, u, _ = disk_solve
    ff = far_field(q, u, lam, K=64)
    ff.to_csv(tmp_path / "ff.csv")
    ff.to_svg(tmp_path / "ff.svg")
    lines = (tmp_path / "ff.csv").read_text().splitlines()
    assert lines[0] == "theta,re,im,abs" and len(lines) == 65
    assert (tmp_path / "ff.svg").read_text().startswith("<?xml")


def test_ls_residual_refines_away_from_the_interface():
    res = []
    for n in (64, 128):
        grid = Grid2.centered((0, 0), 1.2, n)
        q = 0.5 * disk_fraction(grid, 1.0)
        u, _ = lippmann_schwinger_solve(q, 1.0, PlaneWave(1.0), grid)
        r = np.hypot(*np.moveaxis(grid.points(), -1, 0))
        band = np.abs(r - 1.0) < 4 * grid.spacing
        assert residual_check(u, q, 1.0) > 10 * residual_check(u, q, 1.0, exclude=band)
        res.append(residual_check(u, q, 1.0, exclude=band))
    assert res[1] < res[0] / 2


def _flux_balance(ff):
    """Relative defect of ``int |u_inf|^2 = -2 sqrt(2 pi / lam) Re(e^{i pi/4} u_inf(d))`` (real q)."""
    lhs = np.mean(np.abs(ff.values) ** 2) * 2 * np.pi
    rhs = -2 * np.sqrt(2 * np.pi / ff.lam) * (np.exp(0.25j * np.pi) * ff.values[0]).real
    return abs(lhs - rhs) / lhs


def test_optical_theorem_balance(disk_solve):
    lam, c, grid, q, u, _ = disk_solve
    ff = far_field(q, u, lam, K=256)
    assert ff.angles[0] == 0.0
    assert _flux_balance(ff) < 0.05
    series = PenetrableDiskSeries(lam, c)
    exact = type(ff)(lam, ff.angles, series.far_field(ff.angles))
    assert _flux_balance(exact) < 1e-6


def test_far_field_convention_at_large_radius(disk_solve):
    lam, c, grid, q, u, _ = disk_solve
    ff = far_field(q, u, lam, K=64)
    r = 40.0 / lam
    th = ff.angles[::8]
    P = r * np.stack([np.cos(th), np.sin(th)], -1)
    approx = scattered_field_at(P, q, u, lam) * np.sqrt(r) * np.exp(-1j * lam * r)
    assert np.abs(approx - ff.values[::8]).max() / ff.max_abs < 2e-2


def test_ls_is_linear_in_the_incident_wave(disk_solve):
    lam, c, grid, q, u, _ = disk_solve
    w = PlaneWave(lam)
    u2, _ = lippmann_schwinger_solve(q, lam, lambda p: 2.0 * w(p), grid)
    assert np.abs(u2.values - 2 * u.values).max() <= 1e-10 * np.abs(u.values).max()


def test_corner_control_born_scaling():
    full, _, _ = corner_control(1.0, 1.0, 0.5, PlaneWave(1.0), n=64)
    half, _, _ = corner_control(1.0, 1.0, 0.25, PlaneWave(1.0), n=64)
    assert full >= 0.1 and full / half == pytest.approx(2.0, rel=0.15)


def test_residual_of_noise_is_large(rng):
    grid = Grid2.centered((0, 0), 1.0, 65)
    assert residual_check(ScalarField(grid, rng.standard_normal((65, 65))), lam=1.0) > 1e3
