import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from nonscatter.geometry import Disk, Ellipse, square
from nonscatter.grid import Grid2
from nonscatter.incident import (ConstantWave, EigenvalueProximityError, HerglotzCoefficients, PlaneWave,
                                 RealHelmholtzExpansion, eigen_orthogonality_check, expansion_eval,
                                 expansion_gradient, helmholtz_residual, herglotz_eval, herglotz_quadrature,
                                 interior_solution, runge_fit, wave_from_dict, zero_ball_scan)
from nonscatter.specialfun import C2


def _scipy_expansion(e, P):
    r = np.hypot(P[:, 0], P[:, 1])
    th = np.arctan2(P[:, 1], P[:, 0])
    return sum((a * np.cos(m * th) + b * np.sin(m * th)) * special.jv(m, e.lam * r)
               for m, (a, b) in enumerate(zip(e.a, e.b)))


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_herglotz_closed_form_vs_quadrature(lam, rng):
    M = 10
    c = rng.standard_normal(2 * M + 1) + 1j * rng.standard_normal(2 * M + 1)
    hc = HerglotzCoefficients(lam, c)
    P = rng.uniform(-3, 3, (200, 2))
    assert np.abs(herglotz_eval(hc, P) - herglotz_quadrature(hc, P)).max() < 1e-8


def test_herglotz_of_constant_density_is_2pi_j0():
    hc = HerglotzCoefficients(2.0, np.array([1.0 + 0j]))
    P = np.array([[0.3, 0.4], [1.0, -2.0]])
    assert np.allclose(herglotz_eval(hc, P), 2 * np.pi * special.j0(2.0 * np.hypot(*P.T)))


def test_realness_flag_validation():
    with pytest.raises(ValueError):
        HerglotzCoefficients(1.0, np.array([0, 1.0, 1j]), real=True)
    with pytest.raises(ValueError):
        HerglotzCoefficients(1.0, np.ones(4))
    with pytest.raises(ValueError):
        HerglotzCoefficients(0.0, np.ones(3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.3, 4.0), M=st.integers(0, 12))
def test_real_expansion_to_herglotz_is_real_and_equal(seed, lam, M):
    e = RealHelmholtzExpansion.random(lam, M, seed)
    hc = e.to_herglotz()
    P = np.random.default_rng(seed).uniform(-2, 2, (30, 2))
    direct = e(P)
    assert np.allclose(herglotz_eval(hc, P).real, direct, atol=1e-12)
    quad = herglotz_quadrature(hc, P, 2048)
    assert np.abs(quad.imag).max() < 1e-12
    assert np.allclose(quad.real, direct, atol=1e-12)


def test_expansion_against_scipy(rng):
    e = RealHelmholtzExpansion.random(1.7, 8, 3)
    P = rng.uniform(-2, 2, (50, 2))
    assert np.allclose(expansion_eval(e, P), _scipy_expansion(e, P), atol=1e-13)
    h = 1e-6
    fd = np.stack([(e(P + [h, 0]) - e(P - [h, 0])) / (2 * h), (e(P + [0, h]) - e(P - [0, h])) / (2 * h)], -1)
    assert np.allclose(expansion_gradient(e, P), fd, atol=1e-8)
    assert helmholtz_residual(e, P[:5], 1.7) < 1e-4


def test_expansion_serialization_and_validation():
    e = RealHelmholtzExpansion(1.0, [1.0, 0.5], [9.0, -0.5])
    assert e.b[0] == 0.0
    again = wave_from_dict(e.to_dict())
    assert again == e
    assert wave_from_dict(PlaneWave(2.0, (0, 3)).to_dict()).direction == (0.0, 1.0)
    assert wave_from_dict(ConstantWave(2.0).to_dict())(np.zeros((3, 2))).tolist() == [2.0] * 3
    with pytest.raises(ValueError):
        RealHelmholtzExpansion(1.0, np.zeros(62))
    with pytest.raises(ValueError):
        RealHelmholtzExpansion(0.0, [1.0])
    with pytest.raises(ValueError):
        ConstantWave(1.0, lam=1.0)
    with pytest.raises(ValueError):
        RealHelmholtzExpansion(1.0, [1.0], center=(1.0, 0.0)).to_herglotz()


def test_plane_wave():
    w = PlaneWave(2.0, (3.0, 4.0))
    P = np.array([[0.1, 0.2]])
    assert np.allclose(w(P), np.exp(2j * (0.6 * 0.1 + 0.8 * 0.2)))
    assert helmholtz_residual(PlaneWave(2.0, (1, 1), real=True), P, 2.0) < 1e-5


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_interior_solution_disk_oracle(lam):
    grid = Grid2.centered((0, 0), 1.1, 129)
    v = interior_solution(Disk(), lam, grid)
    pts = grid.points()
    exact = special.j0(lam * np.hypot(pts[..., 0], pts[..., 1])) / special.j0(lam)
    err = np.abs(v.values - exact)[v.mask].max()
    assert err < 2e-3 * lam**2
    assert v.meta["boundary_value"] == 1.0


def test_interior_solution_detects_eigenvalue():
    grid = Grid2.centered((0, 0), 1.1, 97)
    with pytest.raises(EigenvalueProximityError):
        interior_solution(Disk(), C2, grid)


def test_interior_solution_lam_zero_is_one():
    grid = Grid2.centered((0, 0), 1.1, 33)
    v = interior_solution(Disk(), 0.0, grid)
    assert np.all(v.values[v.mask] == 1.0)


def test_runge_fit_converges_and_is_positive():
    ell = Ellipse((0, 0), 1.4, 0.9)
    v = interior_solution(ell, 1.0, Grid2.centered((0, 0), 1.5, 97))
    res = []
    for M in (2, 4, 8, 12):
        wave, rep = runge_fit(v, 1.0, M, domain=ell)
        res.append(rep.residual)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(res, res[1:]))
    assert res[-1] < 1e-4
    assert rep.positive_on_boundary and abs(rep.boundary_min - 1.0) < 1e-3


def test_runge_fit_recovers_exact_expansion():
    target = RealHelmholtzExpansion.random(1.0, 5, 7)
    wave, rep = runge_fit(target, 1.0, 5, domain=Disk())
    assert rep.residual < 1e-12
    assert np.allclose(wave.a, target.a, atol=1e-9) and np.allclose(wave.b, target.b, atol=1e-9)


def test_runge_fit_trims_underflowing_modes():
    target = RealHelmholtzExpansion(1.0, [1.0])
    wave, rep = runge_fit(target, 1.0, 60, domain=Disk(radius=0.05))
    assert rep.M_used < 60 and rep.notices
    with pytest.raises(ValueError):
        runge_fit(target, 1.0, 61, domain=Disk())
    with pytest.raises(ValueError):
        runge_fit(target, 1.0, 4)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_zero_ball_threshold(lam):
    j0 = RealHelmholtzExpansion(lam, [1.0])
    rep = zero_ball_scan(j0, (0, 0, 0, 0), lam, [0.9 * C2 / lam, 1.05 * C2 / lam], centers_per_axis=1)
    assert rep.sign_free_counts == [1, 0]
    assert rep.largest_sign_free_radius == pytest.approx(0.9 * C2 / lam)


def test_zero_ball_validation():
    j0 = RealHelmholtzExpansion(1.0, [1.0])
    with pytest.raises(ValueError):
        zero_ball_scan(j0, (0, 1, 0, 1), 0.0, [1.0])
    with pytest.raises(ValueError):
        zero_ball_scan(j0, (0, 1, 0, 1), 1.0, [-1.0])


@pytest.mark.parametrize("seed", range(5))
def test_orthogonality_at_first_dirichlet_eigenvalue(seed):
    w = RealHelmholtzExpansion.random(C2, 6, seed)
    rep = eigen_orthogonality_check(Disk(), w)
    assert abs(rep.integral) < 1e-8
    assert rep.sign_changes >= 2


def test_orthogonality_rejects_bad_input():
    with pytest.raises(ValueError):
        eigen_orthogonality_check(Disk(), ConstantWave())
    with pytest.raises(ValueError):
        eigen_orthogonality_check(square(), RealHelmholtzExpansion(C2, [1.0]))
