import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy import special

from nonscatter.contrast import (ConstructionError, CutoffProfile, GluedConstruction, PotentialCollar, WaveCollar,
                                 disk_helmholtz_construction, glue_construction, interior_cutoff_potential,
                                 quadrature_contrast, radial_cauchy_extension, smoothstep)
from nonscatter.geometry import Disk, Ellipse, cardioid, square
from nonscatter.grid import Grid2, laplacian5
from nonscatter.incident import ConstantWave, PlaneWave, RealHelmholtzExpansion
from nonscatter.qdomain import fit_quadrature_measure


def test_smoothstep_values_and_derivatives():
    s = np.linspace(0.05, 0.95, 19)
    v, d1, d2 = smoothstep(s)
    h = 1e-6
    assert np.allclose(d1, (smoothstep(s + h)[0] - smoothstep(s - h)[0]) / (2 * h), atol=1e-7)
    assert np.allclose(d2, (smoothstep(s + h)[1] - smoothstep(s - h)[1]) / (2 * h), atol=1e-6)
    ends = smoothstep(np.array([-1.0, 0.0, 1.0, 2.0]))
    assert ends[0].tolist() == [0, 0, 1, 1]
    assert np.all(ends[1] == 0) and np.all(ends[2] == 0)


@settings(max_examples=50, deadline=None)
@given(s=st.floats(-0.5, 1.5))
def test_smoothstep_is_monotone_in_unit_interval(s):
    v, d1, _ = smoothstep(s)
    assert 0.0 <= v <= 1.0 and d1 >= 0.0


def test_cutoff_profile():
    p = CutoffProfile(0.5)
    assert p.full_depth == pytest.approx(0.1) and p.support_depth == pytest.approx(0.25)
    assert p(0.0) == 1.0 and p(0.3) == 0.0
    wide = CutoffProfile(0.8, 0.0, 0.6)
    assert wide.full_depth == pytest.approx(0.2) and wide.support_depth == pytest.approx(0.8)
    for bad in [(0.0,), (1.0, 0.5, 0.4), (1.0, -0.1, 0.5), (1.0, 0.2, 1.0)]:
        with pytest.raises(ValueError):
            CutoffProfile(*bad)


@pytest.mark.parametrize("h0", [1.0, 0.3, lambda r: 0.5 + r])
def test_radial_extension_against_solve_ivp(h0):
    lam, R, d = 1.0, 1.0, 0.3
    u0 = RealHelmholtzExpansion(lam, [1.0, 0.4, -0.2], [0.0, 0.3, 0.1])
    v0 = radial_cauchy_extension(R, lam, h0, u0, d)
    prof = h0 if callable(h0) else (lambda r: h0)
    for m in range(3):
        y0 = [special.jv(m, lam * R), lam * special.jvp(m, lam * R)]
        sol = solve_ivp(lambda r, y: [y[1], -y[1] / r + (m * m / r**2 - lam**2 - prof(r)) * y[0]],
                        (R, R - d), y0, rtol=1e-11, atol=1e-13, dense_output=True)
        rr = np.linspace(R - d, R, 7)
        assert np.allclose(v0.mode_value(m, rr), sol.sol(rr)[0], atol=1e-9)
        assert np.allclose(v0.mode_derivative(m, rr), sol.sol(rr)[1], atol=1e-8)
    assert v0.matching["value_error"] < 1e-14


def test_radial_extension_matches_incident_on_circle():
    u0 = RealHelmholtzExpansion(1.0, [1.0, 0.2], [0.0, 0.1])
    v0 = radial_cauchy_extension(1.0, 1.0, 1.0, u0, 0.3)
    t = np.linspace(0, 2 * np.pi, 50)
    P = np.stack([np.cos(t), np.sin(t)], -1)
    assert np.allclose(v0.value(P), u0(P), atol=1e-13)
    assert np.allclose(v0.gradient(P), u0.gradient(P), atol=1e-10)
    # the PDE (Laplacian + lam^2 + h0) v0 = 0 by differences
    Q = 0.85 * P[:10]
    h = 1e-3
    lap = sum(v0.value(Q + e) for e in ([h, 0], [-h, 0], [0, h], [0, -h])) - 4 * v0.value(Q)
    assert np.allclose(lap / h**2, v0.laplacian(Q), atol=1e-5)
    with pytest.raises(ValueError):
        v0.value(np.array([[0.5, 0.0]]))


def test_radial_extension_validation():
    u0 = RealHelmholtzExpansion(1.0, [1.0])
    with pytest.raises(ValueError):
        radial_cauchy_extension(1.0, 1.0, 1.0, u0, 0.4)
    with pytest.raises(ValueError):
        radial_cauchy_extension(1.0, 2.0, 1.0, u0, 0.2)
    with pytest.raises(TypeError):
        radial_cauchy_extension(1.0, 1.0, 1.0, PlaneWave(1.0), 0.2)
    with pytest.raises(ValueError):
        radial_cauchy_extension(1.0, 1.0, 1.0, ConstantWave(), 0.2)


def _helmholtz_disk():
    lam = 1.0
    s = 1.0 / special.j0(0.85)
    u0 = RealHelmholtzExpansion(lam, [s, 0.1 * s], [0.0, 0.0])
    return disk_helmholtz_construction(Disk(), lam, u0, 1.0, 0.3, psi=CutoffProfile(0.3, 0.0, 0.25)), u0


def test_glued_potential_equals_h0_in_band_and_minus_lam2_in_core():
    g, u0 = _helmholtz_disk()
    band = np.array([[0.96, 0.0], [0.0, -0.97], [-0.8, 0.56]])  # depth <= 0.05
    assert np.allclose(g.h(band), 1.0, atol=1e-12)
    core = np.array([[0.0, 0.0], [0.3, 0.2]])
    assert np.allclose(g.h(core), -1.0, atol=1e-14)
    assert np.all(g.h(np.array([[1.2, 0.0]])) == 0.0)
    cf = g.contrast_field(Grid2.centered((0, 0), 1.2, 65))
    assert cf.is_contrast and cf.certificate == pytest.approx(1.0)
    assert cf.collar["max_abs_h_minus_h0_on_band"] < 1e-10


def test_glued_h_against_finite_differences():
    # dual route: h from the analytic Laplacian vs h from the five-point Laplacian of v
    g, _ = _helmholtz_disk()
    rng = np.random.default_rng(4)
    r = rng.uniform(0.05, 0.95, 40)
    t = rng.uniform(0, 2 * np.pi, 40)
    P = np.stack([r * np.cos(t), r * np.sin(t)], -1)
    h = 1e-3
    v = lambda Q: g.evaluate(Q)["v"]
    lap = (v(P + [h, 0]) + v(P - [h, 0]) + v(P + [0, h]) + v(P - [0, h]) - 4 * v(P)) / h**2
    assert np.allclose(g.h(P), -(lap + v(P)) / v(P), atol=1e-3)


def test_total_field_continuous_across_boundary():
    g, u0 = _helmholtz_disk()
    t = np.linspace(0, 2 * np.pi, 30)
    n = np.stack([np.cos(t), np.sin(t)], -1)
    eps = 1e-7
    assert np.allclose(g.total_field((1 - eps) * n), g.total_field((1 + eps) * n), atol=1e-6)


def test_construction_residual_converges():
    g, _ = _helmholtz_disk()
    r1 = g.residual(Grid2.centered((0, 0), 1.2, 97))
    r2 = g.residual(Grid2.centered((0, 0), 1.2, 193))
    assert r2 < r1


def test_quadrature_contrast_disk():
    disk = Disk()
    mu = fit_quadrature_measure(disk, (0, 0), 0)
    g = quadrature_contrast(disk, mu, ConstantWave(), 0.8, psi=CutoffProfile(0.8, 0.0, 0.6))
    assert isinstance(g.v0, PotentialCollar)
    # on dD, v0 = 1 and h0 = -1
    cf = g.contrast_field(Grid2.centered((0, 0), 1.5, 65))
    assert cf.certificate == pytest.approx(1.0 / (1.0 + 0.02), rel=0.05)
    assert g.v_min >= 1.0 - 1e-12


def test_quadrature_contrast_validation():
    disk = Disk()
    mu = fit_quadrature_measure(disk, (0, 0), 0)
    with pytest.raises(ConstructionError):
        quadrature_contrast(disk, mu, ConstantWave(-1.0), 0.8)
    with pytest.raises(ValueError):
        quadrature_contrast(disk, mu, RealHelmholtzExpansion(1.0, [1.0]), 0.8)
    with pytest.raises(ValueError):
        quadrature_contrast(disk, mu, ConstantWave(), 0.3, psi=CutoffProfile(1.0, 0.0, 0.5))


def test_interior_cutoff_is_not_a_contrast():
    ell = Ellipse((0, 0), 1.4, 0.9)
    u0 = RealHelmholtzExpansion(1.0, [1.0 / special.j0(0.8)])
    g = interior_cutoff_potential(ell, 1.0, u0, CutoffProfile(0.6, 0.0, 0.5))
    cf = g.contrast_field(Grid2.centered((0, 0), 1.6, 65))
    assert not cf.is_contrast and cf.certificate is None
    assert isinstance(g.v0, WaveCollar)
    # h = 0 next to the boundary
    assert abs(g.h(np.array([[1.39, 0.0]]))[0]) < 1e-12


def test_positivity_failure_raises():
    ell = Ellipse((0, 0), 1.4, 0.9)
    with pytest.raises(ConstructionError):
        interior_cutoff_potential(ell, 3.0, RealHelmholtzExpansion(3.0, [1.0]), CutoffProfile(0.6, 0.0, 0.5))


def test_gluing_needs_smooth_level():
    with pytest.raises(ValueError):
        glue_construction(square(), 0.0, ConstantWave(), WaveCollar(ConstantWave()), CutoffProfile(0.2))


def test_q_averaged_cache_and_mass():
    disk = Disk()
    mu = fit_quadrature_measure(disk, (0, 0), 0)
    g = quadrature_contrast(disk, mu, ConstantWave(), 0.8, psi=CutoffProfile(0.8, 0.0, 0.6))
    grid = Grid2.centered((0, 0), 1.5, 65)
    q1 = g.q_averaged(grid)
    q1[0, 0] = 99.0
    q2 = g.q_averaged(grid)
    assert q2[0, 0] == 0.0
    # the integral of q over the grid approximates the integral of h over D
    fine = Grid2.centered((0, 0), 1.5, 257)
    assert abs(q2.sum() * grid.spacing**2 - g.q_averaged(fine).sum() * fine.spacing**2) < 2e-2
