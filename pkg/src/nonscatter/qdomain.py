"""Quadrature measures and the modified potential ``u = N * (chi_D - mu)``.

A quadrature measure is a finite sum of point masses and point
derivatives located inside ``D`` whose action on every harmonic
polynomial reproduces the area integral over ``D``.  Harmonic
polynomials are ``Re`` and ``Im`` of ``(z - c)^k``, and
``d_x^a d_y^b g(p) = i^b g^{(a+b)}(p)`` for holomorphic ``g``, so each
moment reduces to a contour integral via ``int_D g dA = (1/2i) oint g conj(z) dz``.

The potential is evaluated through Green's theorem as well: with
``W(y) = |y - x|^2 (ln|y - x| - 1) / (8 pi)`` one has ``Laplacian_y W = N(x - y)``,
so ``int_D N(x - y) dy`` is a boundary integral with a bounded integrand.
"""

import math
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from .grid import ScalarField, laplacian5

MULTI_INDICES = {0: [(0, 0)], 1: [(1, 0), (0, 1)], 2: [(2, 0), (1, 1), (0, 2)]}
MAX_TERMS = 8


class QuadratureFitError(ValueError):
    """The moment system has no point-supported solution at the requested order."""


@dataclass(frozen=True)
class QuadratureTerm:
    location: tuple
    index: tuple
    coeff: float


@dataclass(frozen=True)
class QuadratureMeasure:
    """``<mu, H> = sum_k coeff_k * (d^index_k H)(location_k)``."""

    terms: tuple
    fit_degree: int = None
    residual: float = None

    def __post_init__(self):
        if len(self.terms) > MAX_TERMS:
            raise ValueError(f"at most {MAX_TERMS} terms")
        for t in self.terms:
            if sum(t.index) > 2:
                raise ValueError("derivative order above 2")

    @classmethod
    def point_mass(cls, location, mass):
        return cls((QuadratureTerm(tuple(map(float, location)), (0, 0), float(mass)),))

    @property
    def locations(self):
        return np.array([t.location for t in self.terms])

    def coefficient(self, index):
        return sum(t.coeff for t in self.terms if t.index == tuple(index))

    def action_holomorphic(self, derivs, real_part=True):
        """Act on ``H = Re g`` (or ``Im g``) given ``derivs(n, p) = g^{(n)}(p)``."""
        total = 0.0
        for t in self.terms:
            a, b = t.index
            val = (1j**b) * derivs(a + b, complex(*t.location))
            total += t.coeff * (val.real if real_part else val.imag)
        return total

    def translated(self, shift):
        sx, sy = shift
        return QuadratureMeasure(
            tuple(QuadratureTerm((t.location[0] + sx, t.location[1] + sy), t.index, t.coeff)
                  for t in self.terms),
            self.fit_degree, self.residual,
        )

    def to_dict(self):
        return {
            "terms": [{"location": list(t.location), "index": list(t.index), "coeff": t.coeff}
                      for t in self.terms],
            "fit_degree": self.fit_degree,
            "residual": self.residual,
        }


def _power_derivs(k, c):
    """``n, p -> d^n/dz^n (z - c)^k`` at ``p``."""

    def d(n, p):
        if n > k:
            return 0j
        return math.factorial(k) / math.factorial(k - n) * (p - c) ** (k - n)

    return d


def holomorphic_moment(domain, g, m=4096):
    """``int_D g(z) dA`` for holomorphic ``g``, via ``(1/2i) oint g conj(z) dz``."""
    z, dz = domain.contour_quadrature(m)
    return complex(np.sum(g(z) * np.conj(z) * dz) / 2j)


def harmonic_basis(degree):
    """Labels ``(k, part)`` for ``1, Re (z-c)^k, Im (z-c)^k``, ``k <= degree``."""
    out = [(0, "re")]
    for k in range(1, degree + 1):
        out += [(k, "re"), (k, "im")]
    return out


def harmonic_moments(domain, center, degree, m=4096):
    c = complex(*center)
    z, dz = domain.contour_quadrature(m)
    w = np.conj(z) * dz / 2j
    moments = {}
    for k in range(degree + 1):
        val = complex(np.sum((z - c) ** k * w))
        moments[(k, "re")] = val.real
        if k:
            moments[(k, "im")] = val.imag
    return moments


def _action(measure, label, center):
    k, part = label
    return measure.action_holomorphic(_power_derivs(k, complex(*center)), part == "re")


def fit_quadrature_measure(domain, center, max_derivative_order=0, tol=1e-8, m=4096):
    """Fit point-supported ``mu`` at ``center`` with derivatives up to the given order.

    The moment system uses the harmonic basis up to degree
    ``max_derivative_order + 2``, i.e. two degrees beyond what the terms
    can absorb, and is solved by column-scaled minimum-norm least squares.
    If any fitted moment is missed by more than ``tol`` (relative), the
    domain is not a quadrature domain for this budget and
    :class:`QuadratureFitError` is raised.
    """
    if max_derivative_order not in (0, 1, 2):
        raise ValueError("max_derivative_order must be 0, 1 or 2")
    center = tuple(map(float, center))
    if not bool(domain.inside(np.array([center]))[0]):
        raise ValueError("quadrature center must lie inside the domain")
    degree = max_derivative_order + 2
    labels = harmonic_basis(degree)
    moments = harmonic_moments(domain, center, degree, m)
    indices = [ix for o in range(max_derivative_order + 1) for ix in MULTI_INDICES[o]]
    scale = max(domain.diameter, 1e-300)

    A = np.zeros((len(labels), len(indices)))
    for j, ix in enumerate(indices):
        unit = QuadratureMeasure((QuadratureTerm(center, ix, 1.0),))
        for i, lab in enumerate(labels):
            A[i, j] = _action(unit, lab, center) * scale ** sum(ix)
    rhs = np.array([moments[lab] for lab in labels])
    row = 1.0 + np.abs(rhs)
    sol, *_ = np.linalg.lstsq(A / row[:, None], rhs / row, rcond=None)
    coeffs = sol * np.array([scale ** sum(ix) for ix in indices])
    coeffs[np.abs(coeffs) < 1e-14 * np.abs(coeffs).max()] = 0.0

    terms = tuple(QuadratureTerm(center, ix, float(c)) for ix, c in zip(indices, coeffs) if c != 0.0)
    mu = QuadratureMeasure(terms)
    res = max(abs(moments[lab] - _action(mu, lab, center)) / (1.0 + abs(moments[lab]))
              for lab in labels)
    if res > tol:
        worst = max(labels, key=lambda lab: abs(moments[lab] - _action(mu, lab, center)))
        raise QuadratureFitError(
            f"moment residual {res:.3e} > {tol:g} (worst on {worst[1]} (z-c)^{worst[0]}); "
            "the domain is likely not a point quadrature domain at this order"
        )
    return QuadratureMeasure(terms, fit_degree=degree, residual=res)


def held_out_quadrature_residual(domain, mu, degree=6, center=None, m=4096):
    """``max_H |int_D H - <mu, H>| / (1 + |int_D H|)`` over harmonic polynomials.

    The basis is centered at ``center`` (default: the first term's
    location) and runs up to ``degree``.
    """
    if degree > 6:
        raise ValueError("held-out degree is limited to 6")
    if mu.fit_degree is not None and degree <= mu.fit_degree:
        raise ValueError("held-out basis must be strictly larger than the fitted one")
    if center is None:
        center = mu.terms[0].location if mu.terms else (0.0, 0.0)
    moments = harmonic_moments(domain, center, degree, m)
    return max(abs(moments[lab] - _action(mu, lab, center)) / (1.0 + abs(moments[lab]))
               for lab in harmonic_basis(degree))


# -- modified potential --------------------------------------------------------

def _log_derivative(n, zeta):
    if n == 0:
        return np.log(zeta)
    return (-1.0) ** (n - 1) * math.factorial(n - 1) / zeta**n


def _measure_newton(mu, points, grad=False):
    """``<mu, N(x - .)>`` and optionally its x-gradient (non-finite on ``supp mu``)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return _measure_newton_raw(mu, points, grad)


def _measure_newton_raw(mu, points, grad):
    zx = points[..., 0] + 1j * points[..., 1]
    val = np.zeros(zx.shape)
    gx = np.zeros(zx.shape)
    gy = np.zeros(zx.shape)
    for t in mu.terms:
        a, b = t.index
        n = a + b
        zeta = zx - complex(*t.location)
        # y-derivatives of log(x - y): each brings a factor -1 (and i for y2)
        pref = (-1.0) ** n * (1j**b)
        val += t.coeff * (pref * _log_derivative(n, zeta)).real / (2 * np.pi)
        if grad:
            d = pref * _log_derivative(n + 1, zeta)
            gx += t.coeff * d.real / (2 * np.pi)
            gy += t.coeff * (1j * d).real / (2 * np.pi)
    if grad:
        return val, np.stack([gx, gy], axis=-1)
    return val


@dataclass
class ModifiedPotential:
    """``u = N * (chi_D - mu)`` with ``N = ln|x| / (2 pi)``.

    Evaluates anywhere (``__call__``, ``gradient``); ``field`` holds the
    samples on the construction grid.  In the continuum ``u`` vanishes
    outside ``D`` and ``Laplacian u = chi_D`` away from the support of ``mu``.
    """

    domain: object
    measure: QuadratureMeasure
    n_boundary: int = 4096
    field: ScalarField = None
    collar: float = None
    _nodes: tuple = dc_field(default=None, repr=False)

    def _quad(self):
        if self._nodes is None:
            bn = self.domain.boundary_nodes(self.n_boundary)
            self._nodes = (bn.points, bn.normals, bn.weights)
        return self._nodes

    def volume_term(self, points, chunk=256):
        """``int_D N(x - y) dy`` via the boundary integral of ``dW/dn``."""
        P = np.asarray(points, dtype=float)
        shape = P.shape[:-1]
        P = P.reshape(-1, 2)
        y, n, w = self._quad()
        out = np.empty(len(P))
        for s in range(0, len(P), chunk):
            d = y[None, :, :] - P[s : s + chunk, None, :]
            r2 = (d**2).sum(-1)
            dn = (d * n[None]).sum(-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                f = dn * (np.log(r2) - 1.0)
            f[r2 == 0] = 0.0
            out[s : s + chunk] = f @ w / (8 * np.pi)
        return out.reshape(shape)

    def volume_gradient(self, points, chunk=256):
        """``grad_x int_D N(x - y) dy = -oint N(x - y) n(y) ds``."""
        P = np.asarray(points, dtype=float)
        shape = P.shape[:-1]
        P = P.reshape(-1, 2)
        y, n, w = self._quad()
        out = np.empty((len(P), 2))
        for s in range(0, len(P), chunk):
            d = y[None, :, :] - P[s : s + chunk, None, :]
            r2 = (d**2).sum(-1)
            with np.errstate(divide="ignore"):
                N = np.log(r2) / (4 * np.pi)
            N[r2 == 0] = 0.0
            out[s : s + chunk] = -np.einsum("pk,k,kc->pc", N, w, n)
        return out.reshape(shape + (2,))

    def __call__(self, points):
        P = np.asarray(points, dtype=float)
        return self.volume_term(P) - _measure_newton(self.measure, P)

    def gradient(self, points):
        P = np.asarray(points, dtype=float)
        _, g = _measure_newton(self.measure, P, grad=True)
        return self.volume_gradient(P) - g

    def laplacian(self, points):
        """Exact Laplacian away from ``supp mu``: the indicator of ``D``."""
        return self.domain.inside(points).astype(float)

    def laplacian_residual(self, band_cells=3):
        """Sup of ``|Laplacian_h u - chi_D|`` on the collar, skipping a band at ``dD``."""
        g = self.field.grid
        pts = g.points()
        lap = laplacian5(self.field.values, g.spacing)
        lev = self.domain.level(pts)
        dist = _distance_estimate(self.domain, pts, lev)
        collar = self.collar if self.collar is not None else 0.2 * self.domain.diameter
        keep = (np.abs(dist) > band_cells * g.spacing) & (dist < collar) & np.isfinite(lap)
        if self.measure.terms:
            loc = self.measure.locations
            dmu = np.min(np.hypot(pts[..., 0, None] - loc[:, 0], pts[..., 1, None] - loc[:, 1]), axis=-1)
            keep &= dmu > collar
        chi = self.domain.inside(pts).astype(float)
        return float(np.max(np.abs(lap - chi)[keep])) if keep.any() else 0.0

    def to_csv(self, path):
        self.field.to_csv(path, column="u")


def _distance_estimate(domain, pts, lev):
    if domain.has_smooth_level():
        g = domain.level_gradient(pts)
        return lev / np.maximum(np.hypot(g[..., 0], g[..., 1]), 1e-12)
    return lev


def modified_potential(domain, mu, grid, n_boundary=4096, collar=None):
    """Sample ``u = N * (chi_D - mu)`` on ``grid``.

    The grid must cover ``D`` plus a margin of ``0.2 * diam(D)``.
    """
    x0, x1, y0, y1 = domain.bbox
    margin = 0.2 * domain.diameter
    gx0, gx1, gy0, gy1 = grid.bbox
    if gx0 > x0 - margin or gx1 < x1 + margin or gy0 > y0 - margin or gy1 < y1 + margin:
        raise ValueError("grid must cover the domain plus a 0.2*diam(D) collar")
    mp = ModifiedPotential(domain, mu, n_boundary=n_boundary, collar=collar)
    pts = grid.points()
    vals = mp(pts)
    mp.field = ScalarField(grid, vals, role="modified_potential")
    return mp
