import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from nonscatter.freeboundary import (REGULAR_LOWER_BOUND, SupportIndicator, dichotomy_diagnose, fit_exponent,
                                     gradient_condition_check, kn_cusp_example, kn_field, kn_map,
                                     support_extract)
from nonscatter.geometry import CuspModel, Disk, square
from nonscatter.grid import Grid2, ScalarField
from nonscatter.incident import RealHelmholtzExpansion
from nonscatter.specialfun import C2

GRID = Grid2.centered((0, 0), 1.5, 97)


def _bump_fields(noise=1e-9, seed=0):
    P = GRID.points()
    r2 = (P**2).sum(-1)
    bump = np.where(r2 < 1, (1 - r2) ** 2, 0.0)
    u0 = np.cos(P[..., 0])
    rng = np.random.default_rng(seed)
    u_q = u0 + bump + noise * rng.standard_normal(u0.shape)
    return ScalarField(GRID, u_q), ScalarField(GRID, u0)


def test_support_of_a_disk_bump():
    u_q, u0 = _bump_fields()
    ind = support_extract(u_q, u0, domain=Disk())
    assert isinstance(ind, SupportIndicator) and not ind.empty
    assert ind.tau == pytest.approx(10 * ind.noise_floor)
    assert ind.hausdorff_to(Disk()) < 2.0
    assert ind.member(np.array([[0.0, 0.0], [1.3, 0.0], [5.0, 5.0]])).tolist() == [True, False, False]
    frame = support_extract(u_q, u0)
    assert np.array_equal(frame.mask, ind.mask) or abs(frame.mask.sum() - ind.mask.sum()) <= 8


def test_empty_support_is_noted(tmp_path):
    _, u0 = _bump_fields()
    ind = support_extract(ScalarField(GRID, u0.values.copy()), u0, tau=1e-12)
    assert ind.empty and ind.notes and ind.hausdorff_to(Disk()) == np.inf
    ind.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text() == "x,y,outer\n"


def test_support_grid_mismatch():
    u_q, _ = _bump_fields()
    other = ScalarField(Grid2.centered((0, 0), 1.5, 33), np.zeros((33, 33)))
    with pytest.raises(ValueError):
        support_extract(u_q, other)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-6, 0.5), st.floats(1e-6, 0.5))
def test_support_monotone_in_threshold(t1, t2):
    u_q, u0 = _bump_fields()
    lo, hi = sorted((t1, t2))
    a = support_extract(u_q, u0, tau=lo).mask
    b = support_extract(u_q, u0, tau=hi).mask
    assert not np.any(b & ~a)


def test_outer_boundary_ignores_holes():
    P = GRID.points()
    r = np.hypot(P[..., 0], P[..., 1])
    ring = np.where((r > 0.4) & (r < 1.0), 1.0, 0.0)
    zero = ScalarField(GRID, np.zeros_like(ring))
    ind = support_extract(ScalarField(GRID, ring), zero, tau=0.5)
    inner = np.hypot(*ind.boundary_points(outer=False).T)
    outer = np.hypot(*ind.boundary_points(outer=True).T)
    assert inner.min() < 0.5 and outer.min() > 0.9


@pytest.mark.parametrize("slope", [0.5, 1.0, 2.0])
def test_fit_exponent_recovers_power_law(slope):
    r = np.array([0.2, 0.1, 0.05, 0.025])
    assert fit_exponent(r, 3.0 * r**slope) == pytest.approx(slope)


def test_fit_exponent_needs_two_positive_values():
    assert fit_exponent([0.1, 0.05], [0.0, 0.2]) is None


@pytest.mark.parametrize("region,point,verdict", [
    (Disk(), (1.0, 0.0), "regular-like"),
    (CuspModel(2.0), (0.0, 0.0), "thin"),
    (square(), (0.5, 0.5), "regular-like"),
    (square(), (0.5, 0.0), "regular-like"),
])
def test_dichotomy_verdicts(region, point, verdict):
    rep = dichotomy_diagnose(region, point, [0.2, 0.1, 0.05, 0.025], samples=10_000)
    assert rep.verdict == verdict
    assert json.loads(rep.to_json())["thresholds"]["regular_lower_bound"] == REGULAR_LOWER_BOUND


def test_dichotomy_unresolvable_radii_are_inconclusive():
    u_q, u0 = _bump_fields()
    ind = support_extract(u_q, u0, domain=Disk())
    rep = dichotomy_diagnose(ind, (1.0, 0.0), [0.3, 0.2, 0.05])
    assert rep.resolvable == [True, True, False] and rep.verdict == "inconclusive"


def test_dichotomy_rejects_bad_region():
    with pytest.raises(TypeError):
        dichotomy_diagnose(42, (0, 0), [0.1, 0.05, 0.02])


@pytest.mark.parametrize("mu", [3, 5, 7])
def test_kn_cusp_example(mu):
    ex = kn_cusp_example(mu)
    rep = ex.report()
    assert rep["real_segment_error"] <= 1e-12
    assert rep["near_zero_relative_deviation"] <= 0.1
    assert abs(rep["fitted_exponent"] - mu / 2) <= 0.05 * mu / 2
    assert rep["simple_boundary"]
    # the interior of the image is the image of the interior
    z = np.array([0.1 + 0.2j, -0.2 + 0.1j, 0.3j])
    w = kn_map(z, mu)
    assert ex.inside(np.stack([w.real, w.imag], -1)).all()
    assert not ex.inside(np.array([[0.1, 0.0], [0.3, 0.3]])).any()


@pytest.mark.parametrize("mu,radius", [(4, 0.5), (2, 0.5), (9, 0.5), (3, 0.7)])
def test_kn_cusp_example_rejects(mu, radius):
    with pytest.raises(ValueError):
        kn_cusp_example(mu, radius=radius)


def test_kn_field_vanishes_to_leading_order_on_cusp_edges():
    ex = kn_cusp_example(5)
    for edge in (ex.cusp_upper, ex.cusp_lower):
        near = edge[np.hypot(*edge.T) < 1e-3]
        rho = np.hypot(*near.T)
        assert np.all(np.abs(kn_field(near, 5)) <= 0.1 * rho**2)


def test_gradient_condition_on_the_first_dirichlet_mode():
    u0 = RealHelmholtzExpansion(C2, [1.0])
    rep = gradient_condition_check(u0, Disk())
    assert rep.min_abs_u0 < 1e-14
    assert rep.min_abs_grad == pytest.approx(C2 * abs(special.j1(C2)), rel=1e-12)
    assert rep.min_abs_grad == pytest.approx(1.24846, abs=1e-5)
    assert set(rep.to_dict()) == {"min_abs_u0", "min_abs_u0_at", "min_abs_grad", "min_abs_grad_at"}
