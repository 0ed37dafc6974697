"""Free-boundary diagnostics for non-scattering differences ``u = u_q - u0``.

* :func:`support_extract` - thresholded support of ``u`` on a grid and its
  boundary cells.
* :func:`dichotomy_diagnose` - thickness of the complement at a boundary
  point over a sequence of radii, with a regular-like / thin verdict.
* :func:`kn_cusp_example` - the conformal cusp ``f(z) = z^2 + i z^mu``.
* :func:`gradient_condition_check` - minima of ``|u0|`` and ``|grad u0|`` on ``dD``.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .geometry import Domain, thickness, winding_number

# Calibration constants of the verdict (chosen on the disk and gamma = 2 fixtures).
REGULAR_LOWER_BOUND = 0.2
THIN_MIN_SLOPE = 0.5


# -- support ------------------------------------------------------------------------

@dataclass
class SupportIndicator:
    """Nodes where ``|u_q - u0| > tau`` and the boundary cells of that set.

    ``outer_boundary`` lists indicator nodes adjacent to the unbounded
    component of the complement (the free boundary seen from outside).
    """

    grid: object
    mask: np.ndarray
    tau: float
    noise_floor: float
    boundary: np.ndarray
    outer_boundary: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def empty(self):
        return not self.mask.any()

    def boundary_points(self, outer=True):
        idx = self.outer_boundary if outer else self.boundary
        pts = self.grid.points()
        return pts[idx[:, 0], idx[:, 1]] if len(idx) else np.zeros((0, 2))

    def member(self, points):
        """Nearest-node membership of arbitrary points in the indicator."""
        i, j = self.grid.nearest_index(points)
        n = self.grid.n
        ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
        out = np.zeros(np.shape(i), bool)
        out[ok] = self.mask[i[ok], j[ok]]
        return out

    def hausdorff_to(self, domain, m=2048):
        """Hausdorff distance (in grid spacings) between the outer boundary cells and ``dD``."""
        bp = self.boundary_points()
        if not len(bp):
            return math.inf
        curve = domain.polyline(m)
        d1 = _nearest(bp, curve)
        d2 = _nearest(curve, bp)
        return float(max(d1.max(), d2.max()) / self.grid.spacing)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,y,outer\n")
            outer = {tuple(ix) for ix in self.outer_boundary.tolist()}
            pts = self.grid.points()
            for i, j in self.boundary.tolist():
                x, y = pts[i, j]
                fh.write(f"{x:.12g},{y:.12g},{int((i, j) in outer)}\n")


def _nearest(a, b, chunk=2048):
    out = np.empty(len(a))
    for s in range(0, len(a), chunk):
        d = a[s : s + chunk, None, :] - b[None, :, :]
        out[s : s + chunk] = np.sqrt((d**2).sum(-1)).min(axis=1)
    return out


def support_extract(u_q, u0, domain=None, tau=None, factor=10.0, dilation_cells=3):
    """Indicator of ``supp(u_q - u0)`` at threshold ``tau``.

    Without an explicit ``tau`` the threshold is ``factor`` times the
    noise floor: the median of ``|u_q - u0|`` outside ``D`` dilated by
    ``dilation_cells`` (when ``domain`` is given) or over the outer frame
    of the grid otherwise.
    """
    grid = u_q.grid
    if u0.grid != grid:
        raise ValueError("fields must live on the same grid")
    diff = np.abs(np.asarray(u_q.values) - np.asarray(u0.values))
    notes = []
    if domain is not None:
        ins = domain.inside(grid.points())
        dil = ndimage.binary_dilation(ins, iterations=dilation_cells)
        region = ~dil
    else:
        region = np.zeros(diff.shape, bool)
        region[[0, -1], :] = True
        region[:, [0, -1]] = True
    floor = float(np.median(diff[region])) if region.any() else 0.0
    if tau is None:
        tau = factor * floor
    mask = diff > tau
    if not mask.any():
        notes.append("empty indicator: u_q equals u0 to within the threshold")
    nb_out = np.zeros(mask.shape, bool)
    pad = np.pad(~mask, 1, constant_values=True)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb_out |= pad[1 + di : 1 + di + mask.shape[0], 1 + dj : 1 + dj + mask.shape[1]]
    boundary = mask & nb_out
    # unbounded component of the complement: labelled regions touching the frame
    lab, _ = ndimage.label(~mask)
    frame = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    frame = frame[frame > 0]
    outside = np.isin(lab, frame)
    pad_o = np.pad(outside, 1, constant_values=True)
    nb_outer = np.zeros(mask.shape, bool)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb_outer |= pad_o[1 + di : 1 + di + mask.shape[0], 1 + dj : 1 + dj + mask.shape[1]]
    outer = mask & nb_outer
    return SupportIndicator(grid, mask, float(tau), floor, np.argwhere(boundary), np.argwhere(outer), notes)


# -- dichotomy --------------------------------------------------------------------

@dataclass
class DichotomyReport:
    point: list
    radii: list
    deltas: list
    error_bounds: list
    resolvable: list
    verdict: str
    exponent: float = None
    thresholds: dict = field(default_factory=lambda: {
        "regular_lower_bound": REGULAR_LOWER_BOUND, "thin_min_slope": THIN_MIN_SLOPE,
        "note": "calibration constants, not derived quantities",
    })

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _complement_member(region):
    if isinstance(region, SupportIndicator):
        return lambda p: ~region.member(p)
    if isinstance(region, Domain):
        return lambda p: ~region.inside(p)
    if callable(region):
        return region
    raise TypeError("region must be a membership callable, a Domain or a SupportIndicator")


def fit_exponent(radii, deltas):
    """Least-squares slope of ``log delta`` against ``log r`` (positive deltas only)."""
    r = np.asarray(radii, dtype=float)
    d = np.asarray(deltas, dtype=float)
    ok = d > 0
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(r[ok]), np.log(d[ok]), 1)[0])


def dichotomy_diagnose(region, x0, radii, samples=10_000, min_radius=None):
    """Thickness of the complement of ``region`` at ``x0`` and the verdict.

    ``region`` is a Domain or SupportIndicator (its complement is
    measured) or a membership callable for the complement itself.
    Radii below ``min_radius`` (default: 4 grid spacings for an
    indicator, 0 otherwise) are not resolvable.  Verdict:

    * ``regular-like`` if ``min delta_r >= 0.2`` over the three smallest
      resolvable radii,
    * ``thin`` if ``delta_r`` decreases monotonically (as ``r`` decreases)
      with log-log slope ``>= 0.5``,
    * ``inconclusive`` otherwise, or with fewer than three resolvable radii.
    """
    member = _complement_member(region)
    if min_radius is None:
        min_radius = 4 * region.grid.spacing if isinstance(region, SupportIndicator) else 0.0
    radii = sorted((float(r) for r in radii), reverse=True)
    deltas, errs, res = [], [], []
    for r in radii:
        t = thickness(member, x0, r, samples=samples)
        deltas.append(t.value)
        errs.append(t.error_bound)
        res.append(bool(r >= min_radius))
    rr = [r for r, ok in zip(radii, res) if ok]
    dd = [d for d, ok in zip(deltas, res) if ok]
    exponent = fit_exponent(rr, dd) if len(rr) >= 2 else None
    verdict = "inconclusive"
    if len(rr) >= 3:
        if min(dd[-3:]) >= REGULAR_LOWER_BOUND:
            verdict = "regular-like"
        elif all(a > b for a, b in zip(dd, dd[1:])) and exponent is not None and exponent >= THIN_MIN_SLOPE:
            verdict = "thin"
    return DichotomyReport(list(map(float, x0)), radii, deltas, errs, res, verdict, exponent)


# -- conformal cusp ----------------------------------------------------------------

@dataclass
class KNExample:
    mu: int
    radius: float
    boundary: np.ndarray
    cusp_upper: np.ndarray
    cusp_lower: np.ndarray
    real_segment_error: float
    near_zero_deviation: float
    fitted_exponent: float
    simple_boundary: bool

    def f(self, z):
        return kn_map(z, self.mu)

    def inside(self, points):
        return winding_number(points, self.boundary) != 0

    def field(self, points):
        return kn_field(points, self.mu)

    def report(self):
        return {
            "mu": self.mu, "radius": self.radius,
            "real_segment_error": self.real_segment_error,
            "near_zero_relative_deviation": self.near_zero_deviation,
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.mu / 2,
            "simple_boundary": self.simple_boundary,
        }


def kn_map(z, mu):
    z = np.asarray(z, dtype=complex)
    return z**2 + 1j * z**mu


def kn_field(points, mu):
    """``x2^2 - (2 / (1 + mu/2)) rho^{1 + mu/2} sin((1 + mu/2) theta)``, ``theta`` in ``[0, 2 pi)``.

    Only the leading terms are kept; ``theta = 0`` points into the cusp.
    """
    p = np.asarray(points, dtype=float)
    rho = np.hypot(p[..., 0], p[..., 1])
    th = np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * np.pi)
    a = 1.0 + mu / 2.0
    return p[..., 1] ** 2 - (2.0 / a) * rho**a * np.sin(a * th)


def _segments_cross(poly):
    """True if two non-adjacent edges of the closed polyline intersect."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    n = len(a)
    for i in range(n):
        p, r = a[i], b[i] - a[i]
        q = a
        s = b - a
        rxs = r[0] * s[:, 1] - r[1] * s[:, 0]
        qp = q - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / rxs
            u = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / rxs
        hit = (np.abs(rxs) > 1e-300) & (t > 1e-12) & (t < 1 - 1e-12) & (u > 1e-12) & (u < 1 - 1e-12)
        hit[[i, (i - 1) % n, (i + 1) % n]] = False
        if hit.any():
            return True
    return False


def kn_cusp_example(mu, samples=2000, radius=0.5, t_max=0.05):
    """Image of the upper half disk ``{|z| < radius, Im z > 0}`` under ``z^2 + i z^mu``.

    The real segment maps onto ``x2 = +-x1^{mu/2}`` exactly, and near 0
    the image boundary is fitted against that power law.  ``radius``
    defaults to 1/2 because ``f'`` vanishes at ``|z| = (2/mu)^{1/(mu-2)}``
    (``2/3`` for ``mu = 3``) inside the unit half disk.
    """
    if int(mu) != mu or mu % 2 == 0:
        raise ValueError("mu must be an odd integer")
    if mu not in (3, 5, 7):
        raise ValueError("mu must be 3, 5 or 7")
    crit = (2.0 / mu) ** (1.0 / (mu - 2))
    if radius >= crit:
        raise ValueError(f"radius must stay below the critical point |z| = {crit:.4f}")
    n_seg = samples // 2
    n_arc = samples - n_seg
    # clustered towards 0 along the segment
    s = np.linspace(-1.0, 1.0, n_seg, endpoint=False)
    seg = radius * np.sign(s) * s**2
    arc = radius * np.exp(1j * np.linspace(0.0, np.pi, n_arc, endpoint=False))
    z = np.concatenate([seg.astype(complex), arc])
    w = kn_map(z, mu)
    boundary = np.stack([w.real, w.imag], -1)

    t = np.geomspace(1e-4, radius, 400)
    up = kn_map(t, mu)
    lo = kn_map(-t, mu)
    cusp_upper = np.stack([up.real, up.imag], -1)
    cusp_lower = np.stack([lo.real, lo.imag], -1)
    e_up = np.abs(up.imag - up.real ** (mu / 2)) / up.real ** (mu / 2)
    e_lo = np.abs(lo.imag + lo.real ** (mu / 2)) / lo.real ** (mu / 2)
    seg_err = float(max(e_up.max(), e_lo.max()))

    # boundary points of the image near 0: images of |z| <= t_max on the real segment
    near = np.abs(z) <= t_max
    near &= np.abs(z.imag) < 1e-15
    near &= z != 0
    bx, by = w.real[near], w.imag[near]
    dev = float(np.max(np.abs(np.abs(by) - bx ** (mu / 2)) / bx ** (mu / 2)))
    expo = float(np.polyfit(np.log(bx), np.log(np.abs(by)), 1)[0])
    simple = not _segments_cross(boundary[:: max(1, samples // 600)])
    return KNExample(int(mu), float(radius), boundary, cusp_upper, cusp_lower, seg_err, dev, expo, simple)


# -- gradient condition -----------------------------------------------------------

@dataclass
class GradientConditionReport:
    min_abs_u0: float
    min_abs_u0_at: list
    min_abs_grad: float
    min_abs_grad_at: list

    def to_dict(self):
        return dict(self.__dict__)


def gradient_condition_check(u0, domain, n_boundary=1024):
    """Minima of ``|u0|`` and ``|grad u0|`` over boundary nodes of ``domain``."""
    bn = domain.boundary_nodes(n_boundary)
    vals = np.abs(np.asarray(u0(bn.points)))
    if not np.any(vals > 0) and not np.any(np.asarray(u0.gradient(bn.points))):
        raise ValueError("u0 vanishes identically on the boundary sample")
    g = np.asarray(u0.gradient(bn.points))
    gn = np.hypot(np.abs(g[:, 0]), np.abs(g[:, 1]))
    i, j = int(np.argmin(vals)), int(np.argmin(gn))
    return GradientConditionReport(float(vals[i]), bn.points[i].tolist(), float(gn[j]), bn.points[j].tolist())
