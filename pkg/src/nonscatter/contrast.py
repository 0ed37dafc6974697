"""Non-scattering contrasts built by gluing a collar solution to the constant 1.

Given ``v0`` near ``dD`` with ``(Laplacian + lam^2 + h0) v0 = 0`` and Cauchy
data equal to the incident wave on ``dD``, the glued field
``v = psi v0 + (1 - psi)`` is positive on ``D`` and
``h = -(Laplacian + lam^2) v / v`` is a potential for which ``v`` (inside)
and ``u0`` (outside) form a single solution.  ``h = h0`` wherever
``psi = 1`` and ``h = -lam^2`` in the core where ``psi = 0``.

Three collar solutions are provided:

* :class:`WaveCollar` - ``v0 = u0``, ``h0 = 0`` (interior cutoff; no contrast),
* :class:`PotentialCollar` - ``v0 = u + u0`` with the modified potential
  ``u`` and ``h0 = -1/v0`` (``lam = 0`` quadrature domains),
* :class:`RadialCollarSolution` - per-mode inward ODE integration on a disk
  with a radial ``h0`` (``lam > 0``).

All of them evaluate value, gradient and Laplacian analytically, so ``h``
is available pointwise on any grid; no finite differences enter ``h``.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .grid import ScalarField
from .incident import ConstantWave, RealHelmholtzExpansion
from .specialfun import bessel_j_all

log = logging.getLogger(__name__)

V_FLOOR = 1e-8


class ConstructionError(ValueError):
    """A positivity hypothesis of the construction fails."""


# -- cutoff -------------------------------------------------------------------------

def smoothstep(s):
    """Quintic ``6s^5 - 15s^4 + 10s^3`` clipped to [0, 1], with two derivatives."""
    s = np.clip(s, 0.0, 1.0)
    val = s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
    d1 = 30.0 * s**2 * (1.0 - s) ** 2
    d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    return val, d1, d2


@dataclass(frozen=True)
class CutoffProfile:
    """``psi`` as a function of depth below ``dD``.

    With ``t = collar - depth``: ``psi = 0`` for ``t <= t0`` (core),
    ``psi = 1`` for ``t >= t1`` (next to the boundary), quintic in between.
    Defaults ``t0 = 0.5 collar``, ``t1 = 0.8 collar``, so ``psi = 1`` for
    depth ``<= 0.2 collar`` and ``psi = 0`` for depth ``>= 0.5 collar``.
    """

    collar: float
    t0: float = None
    t1: float = None

    def __post_init__(self):
        if not self.collar > 0:
            raise ValueError("collar width must be positive")
        if self.t0 is None:
            object.__setattr__(self, "t0", 0.5 * self.collar)
        if self.t1 is None:
            object.__setattr__(self, "t1", 0.8 * self.collar)
        if not 0 <= self.t0 < self.t1 < self.collar:
            raise ValueError("need 0 <= t0 < t1 < collar")

    @property
    def full_depth(self):
        """Depth below which ``psi`` stops being 1."""
        return self.collar - self.t1

    @property
    def support_depth(self):
        """Depth beyond which ``psi`` vanishes."""
        return self.collar - self.t0

    def __call__(self, depth):
        return self.derivatives(depth)[0]

    def derivatives(self, depth):
        """``psi``, ``dpsi/ddepth``, ``d2psi/ddepth2``."""
        width = self.t1 - self.t0
        s = (self.collar - np.asarray(depth, dtype=float) - self.t0) / width
        val, d1, d2 = smoothstep(s)
        return val, -d1 / width, d2 / width**2

    def to_dict(self):
        return {"collar": self.collar, "t0": self.t0, "t1": self.t1}


# -- collar solutions -----------------------------------------------------------------

class WaveCollar:
    """``v0 = u0`` and ``h0 = 0``."""

    description = "h0 = 0 (v0 = u0)"

    def __init__(self, u0):
        self.u0 = u0

    def value(self, points):
        return np.real(self.u0(points))

    def gradient(self, points):
        return np.real(self.u0.gradient(points))

    def laplacian(self, points):
        return np.real(self.u0.laplacian(points))

    def h0(self, points):
        return np.zeros(np.asarray(points).shape[:-1])


class PotentialCollar:
    """``v0 = u + u0`` with ``u`` the modified potential; ``h0 = -1/v0``.

    ``Laplacian u = 1`` in ``D`` away from the measure and ``u0`` is
    harmonic, so ``(Laplacian + h0) v0 = 1 - 1 = 0``.
    """

    description = "h0 = -1/v0 (v0 = modified potential + u0)"

    def __init__(self, potential, u0):
        self.potential = potential
        self.u0 = u0

    def value(self, points):
        return self.potential(points) + np.real(self.u0(points))

    def gradient(self, points):
        return self.potential.gradient(points) + np.real(self.u0.gradient(points))

    def laplacian(self, points):
        return np.ones(np.asarray(points).shape[:-1]) + np.real(self.u0.laplacian(points))

    def h0(self, points):
        return -1.0 / self.value(points)


def _rk4(rhs, y0, r0, r1, steps):
    """Classical RK4 from ``r0`` to ``r1``; returns nodes, states, derivatives."""
    dr = (r1 - r0) / steps
    rs = r0 + dr * np.arange(steps + 1)
    ys = np.empty((steps + 1, len(y0)))
    ys[0] = y0
    y = np.asarray(y0, dtype=float)
    for k in range(steps):
        r = rs[k]
        k1 = rhs(r, y)
        k2 = rhs(r + dr / 2, y + dr / 2 * k1)
        k3 = rhs(r + dr / 2, y + dr / 2 * k2)
        k4 = rhs(r + dr, y + dr * k3)
        y = y + dr / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[k + 1] = y
    dys = np.array([rhs(r, yy) for r, yy in zip(rs, ys)])
    return rs, ys, dys


def _as_profile(h0):
    if callable(h0):
        return h0
    c = float(h0)
    return lambda r: np.full(np.shape(r), c)


@dataclass
class ModeRecord:
    m: int
    alpha_cos: float
    alpha_sin: float
    growth: float
    flagged: bool


class RadialCollarSolution:
    """Collar field ``v0(r, theta) = sum_m (a_m cos + b_m sin)(m theta) v_m(r)``.

    ``v_m`` solves ``v'' + v'/r - (m^2/r^2) v + (lam^2 + h0(r)) v = 0`` on
    ``[R - d, R]`` with the Cauchy data of ``J_m(lam r)`` at ``r = R``.
    Values and radial derivatives are Hermite-interpolated from the RK4
    nodes; the Laplacian is ``-(lam^2 + h0) v0`` by construction.
    """

    def __init__(self, R, lam, h0_profile, modes, depth, center, nodes, description):
        self.R = R
        self.lam = lam
        self.h0_profile = h0_profile
        self.modes = modes
        self.depth = depth
        self.center = np.asarray(center, dtype=float)
        self.description = description
        self._v = {}
        self._dv = {}
        for rec in modes:
            rs, ys, dys = nodes[rec.m]
            order = np.argsort(rs)
            rs, ys, dys = rs[order], ys[order], dys[order]
            self._v[rec.m] = CubicHermiteSpline(rs, ys[:, 0], ys[:, 1])
            self._dv[rec.m] = CubicHermiteSpline(rs, ys[:, 1], dys[:, 1])
        self.matching = self._matching_report()

    def _polar(self, points):
        p = np.asarray(points, dtype=float) - self.center
        return np.hypot(p[..., 0], p[..., 1]), np.arctan2(p[..., 1], p[..., 0])

    def _check_range(self, r):
        lo = self.R - self.depth - 1e-12
        if np.any((r < lo) | (r > self.R + 1e-12)):
            raise ValueError("radial collar field evaluated outside [R - d, R]")

    def mode_value(self, m, r):
        return self._v[m](r)

    def mode_derivative(self, m, r):
        return self._dv[m](r)

    def value(self, points):
        r, th = self._polar(points)
        self._check_range(r)
        out = np.zeros(r.shape)
        for rec in self.modes:
            ang = rec.alpha_cos * np.cos(rec.m * th) + rec.alpha_sin * np.sin(rec.m * th)
            out += ang * self._v[rec.m](r)
        return out

    def gradient(self, points):
        r, th = self._polar(points)
        self._check_range(r)
        vr = np.zeros(r.shape)
        vt = np.zeros(r.shape)
        for rec in self.modes:
            m = rec.m
            ang = rec.alpha_cos * np.cos(m * th) + rec.alpha_sin * np.sin(m * th)
            dang = m * (-rec.alpha_cos * np.sin(m * th) + rec.alpha_sin * np.cos(m * th))
            vr += ang * self._dv[m](r)
            vt += dang * self._v[m](r) / r
        c, s = np.cos(th), np.sin(th)
        return np.stack([c * vr - s * vt, s * vr + c * vt], axis=-1)

    def h0(self, points):
        r, _ = self._polar(points)
        return self.h0_profile(r)

    def laplacian(self, points):
        r, _ = self._polar(points)
        return -(self.lam**2 + self.h0_profile(r)) * self.value(points)

    def _matching_report(self):
        """Compare ``v0`` and ``d_r v0`` with the incident Cauchy data at ``r = R``."""
        err_v = err_d = 0.0
        for rec in self.modes:
            target_v, target_d = _cauchy_data(rec.m, self.lam, self.R)
            err_v = max(err_v, abs(self._v[rec.m](self.R) - target_v))
            err_d = max(err_d, abs(self._dv[rec.m](self.R) - target_d))
        return {"value_error": float(err_v), "radial_derivative_error": float(err_d)}

    def report(self):
        return {
            "R": self.R, "lam": self.lam, "depth": self.depth,
            "modes": [rec.__dict__ for rec in self.modes],
            "matching": self.matching, "h0": self.description,
        }


def _cauchy_data(m, lam, R):
    if lam == 0:
        # harmonic modes r^m, normalized to 1 at r = R
        return 1.0, (m / R if m else 0.0)
    J = bessel_j_all(m + 1, np.array(lam * R))
    dJ = -J[1] if m == 0 else 0.5 * (J[m - 1] - J[m + 1])
    return float(J[m]), float(lam * dJ)


def radial_cauchy_extension(R, lam, h0_profile, u0, d, M=None, steps=400, center=(0.0, 0.0),
                            growth_limit=1e6, description=None):
    """Continue the incident Cauchy data on ``|x - center| = R`` inward as a
    solution of ``(Laplacian + lam^2 + h0) v0 = 0``.

    Parameters
    ----------
    R, lam : float
        Disk radius and wavenumber.
    h0_profile : float or callable
        Radial ``h0(r)`` on ``[R - d, R]``.
    u0 : RealHelmholtzExpansion or ConstantWave
        Incident wave; its expansion must be centered at ``center``.
    d : float
        Collar depth, at most ``0.3 R``.
    M : int, optional
        Mode cutoff; modes with ``|alpha_m J_m(lam R)|`` below ``1e-12``
        of the largest are dropped.
    steps : int
        RK4 steps on ``[R - d, R]``.

    Returns
    -------
    RadialCollarSolution
    """
    if d > 0.3 * R + 1e-15 or d <= 0:
        raise ValueError("collar depth must lie in (0, 0.3 R]")
    prof = _as_profile(h0_profile)
    if isinstance(u0, ConstantWave):
        if lam != 0:
            raise ValueError("constant incident wave requires lam = 0")
        coeffs = [(0, float(u0.value), 0.0)]
    elif isinstance(u0, RealHelmholtzExpansion):
        if abs(u0.lam - lam) > 1e-14 * max(1.0, lam):
            raise ValueError("incident wave has a different wavenumber")
        if np.any(np.abs(np.asarray(u0.center) - np.asarray(center)) > 1e-14):
            raise ValueError("incident expansion must be centered at the disk center")
        coeffs = [(m, a, b) for m, (a, b) in enumerate(zip(u0.a, u0.b))]
    else:
        raise TypeError("radial continuation needs a Fourier-Bessel incident wave")
    if M is not None:
        coeffs = [c for c in coeffs if c[0] <= M]

    sizes = [max(abs(a), abs(b)) * abs(_cauchy_data(m, lam, R)[0]) for m, a, b in coeffs]
    top = max(sizes) if sizes else 0.0
    coeffs = [c for c, s in zip(coeffs, sizes) if s > 1e-12 * top and (c[1] or c[2])]

    modes, nodes = [], {}
    for m, a, b in coeffs:
        def rhs(r, y, m=m):
            return np.array([y[1], -y[1] / r + (m * m / (r * r) - lam**2 - prof(r)) * y[0]])

        v0, dv0 = _cauchy_data(m, lam, R)
        rs, ys, dys = _rk4(rhs, np.array([v0, dv0]), R, R - d, steps)
        growth = float(np.abs(ys[:, 0]).max() / max(abs(v0), 1e-300))
        flagged = growth > growth_limit
        modes.append(ModeRecord(m, float(a), float(b), growth, bool(flagged)))
        nodes[m] = (rs, ys, dys)
    flagged = [rec.m for rec in modes if rec.flagged]
    if flagged:
        cut = min(flagged)
        log.warning("modes >= %d grow beyond %.0e inward; cutoff reduced to %d", cut, growth_limit, cut - 1)
        modes = [rec for rec in modes if rec.m < cut]
    desc = description or ("h0 = %g" % h0_profile if not callable(h0_profile) else "radial h0(r)")
    return RadialCollarSolution(R, lam, prof, modes, d, center, nodes, desc)


# -- gluing ---------------------------------------------------------------------------

@dataclass
class ContrastField:
    """Potential ``h`` on ``D`` sampled on a grid, with its certificate.

    ``certificate`` is ``inf |h|`` over the ``psi = 1`` collar (grid nodes
    and boundary nodes) when the construction produces a contrast, and
    ``None`` otherwise (``is_contrast`` False, e.g. ``h0 = 0``).
    """

    h: ScalarField
    lam: float
    collar: dict
    certificate: float = None
    is_contrast: bool = False
    construction: object = field(default=None, repr=False)

    def to_csv(self, path):
        self.h.to_csv(path, column="h")

    def metadata(self):
        return {"lam": self.lam, "collar": self.collar, "certificate": self.certificate,
                "is_contrast": self.is_contrast}

    def to_json(self):
        return json.dumps(self.metadata(), sort_keys=True)


class GluedConstruction:
    """``v = psi v0 + (1 - psi)`` in ``D``, ``u0`` outside, and its potential ``h``."""

    def __init__(self, domain, lam, u0, collar_solution, psi, n_boundary=512):
        if not domain.has_smooth_level():
            raise ValueError("gluing needs a domain with a smooth depth coordinate")
        self.domain = domain
        self.lam = float(lam)
        self.u0 = u0
        self.v0 = collar_solution
        self.psi = psi
        self._check_positivity(n_boundary)

    def _parts(self, points):
        """Return ``inside, psi, v, laplacian(v)`` with ``v`` only where inside."""
        P = np.asarray(points, dtype=float)
        shape = P.shape[:-1]
        P = P.reshape(-1, 2)
        ins = self.domain.inside(P)
        depth = self.domain.level(P)
        ps, dps, ddps = self.psi.derivatives(np.maximum(depth, 0.0))
        v = np.ones(len(P))
        lap = np.zeros(len(P))
        act = ins & (ps > 0)
        if act.any():
            Q = P[act]
            gl = self.domain.level_gradient(Q)
            ll = self.domain.level_laplacian(Q)
            v0 = self.v0.value(Q)
            lap0 = self.v0.laplacian(Q)
            p, dp, ddp = ps[act], dps[act], ddps[act]
            grad_psi = dp[:, None] * gl
            lap_psi = ddp * (gl**2).sum(-1) + dp * ll
            cross = np.zeros(len(Q))
            moving = dp != 0
            if moving.any():
                cross[moving] = (grad_psi[moving] * self.v0.gradient(Q[moving])).sum(-1)
            v[act] = p * v0 + (1.0 - p)
            lap[act] = lap_psi * (v0 - 1.0) + 2.0 * cross + p * lap0
        return ins.reshape(shape), ps.reshape(shape), v.reshape(shape), lap.reshape(shape)

    def _check_positivity(self, n_boundary):
        bn = self.domain.boundary_nodes(n_boundary)
        inward = bn.points - 1e-9 * bn.normals
        x0, x1, y0, y1 = self.domain.bbox
        X, Y = np.meshgrid(np.linspace(x0, x1, 96), np.linspace(y0, y1, 96), indexing="ij")
        probe = np.vstack([inward, np.stack([X, Y], -1).reshape(-1, 2)])
        ins, _, v, _ = self._parts(probe)
        vmin = float(v[ins].min())
        if not vmin >= V_FLOOR:
            raise ConstructionError(
                f"glued field v has minimum {vmin:.3e} on D (must stay >= {V_FLOOR:g}); "
                "the collar solution is not positive where psi > 0"
            )
        self.v_min = vmin

    def evaluate(self, points):
        """Dictionary with ``inside``, ``psi``, ``v`` and ``h`` (0 outside ``D``)."""
        ins, ps, v, lap = self._parts(points)
        if np.any(v[ins] < V_FLOOR):
            raise ConstructionError("v dropped below the positivity floor")
        h = np.where(ins, -(lap + self.lam**2 * v) / v, 0.0)
        return {"inside": ins, "psi": ps, "v": v, "h": h}

    def h(self, points):
        return self.evaluate(points)["h"]

    def q(self, points):
        return self.evaluate(points)["h"]

    def total_field(self, points):
        """``u_q``: ``v`` inside ``D`` and ``u0`` outside."""
        e = self.evaluate(points)
        out = np.asarray(self.u0(points))
        return np.where(e["inside"], e["v"], out)

    def q_averaged(self, grid, sub=16):
        """``q`` at grid nodes, averaged over the node's dual cell where it is cut by ``dD``.

        Results are cached per ``(grid, sub)``.
        """
        cache = self.__dict__.setdefault("_q_cache", {})
        key = (grid, sub)
        if key not in cache:
            cache[key] = self._q_averaged(grid, sub)
        return cache[key].copy()

    def _q_averaged(self, grid, sub):
        # Cut cells: covered fraction from sub x sub samples of the level sign,
        # times h at the centroid of the covered samples.
        pts = grid.points()
        s = grid.spacing
        q = self.q(pts)
        offs = (np.array([-0.5, 0.5]) * s)
        corners = [pts + np.array([dx, dy]) for dx in offs for dy in offs]
        ins_c = np.stack([self.domain.level(c) > 0 for c in corners] + [self.domain.level(pts) > 0])
        cut = ins_c.any(0) & ~ins_c.all(0)
        if cut.any():
            centers = pts[cut]
            t = (np.arange(sub) + 0.5) / sub - 0.5
            dx, dy = np.meshgrid(t * s, t * s, indexing="ij")
            sub_pts = centers[:, None, :] + np.stack([dx.ravel(), dy.ravel()], -1)[None]
            covered = self.domain.level(sub_pts) > 0
            frac = covered.mean(axis=1)
            cnt = np.maximum(covered.sum(axis=1), 1)
            centroid = (sub_pts * covered[..., None]).sum(axis=1) / cnt[:, None]
            # nudge the centroid inside so that the inside test agrees with the level sign
            inward = self.domain.level_gradient(centroid)
            inward /= np.maximum(np.hypot(inward[:, 0], inward[:, 1]), 1e-300)[:, None]
            centroid = centroid + 1e-9 * s * inward
            hc = self.q(centroid)
            q[cut] = np.where(frac > 0, frac * hc, 0.0)
        return q

    def contrast_field(self, grid, n_boundary=512):
        pts = grid.points()
        e = self.evaluate(pts)
        band = e["inside"] & (e["psi"] >= 1.0)
        bn = self.domain.boundary_nodes(n_boundary)
        inward = bn.points - 1e-9 * bn.normals
        eb = self.evaluate(inward)
        h_band = np.concatenate([e["h"][band], eb["h"]])
        h0_band = np.concatenate([self.v0.h0(pts[band]), self.v0.h0(inward)])
        match = float(np.abs(h_band - h0_band).max()) if len(h_band) else 0.0
        inf_abs = float(np.abs(h_band).min()) if len(h_band) else 0.0
        is_contrast = not isinstance(self.v0, WaveCollar) and inf_abs > 0
        collar = {
            "h0": self.v0.description,
            "band_depth": self.psi.full_depth,
            "support_depth": self.psi.support_depth,
            "max_abs_h_minus_h0_on_band": match,
            "band_nodes": int(band.sum()) + len(bn.points),
            "profile": self.psi.to_dict(),
        }
        hf = ScalarField(grid, np.where(e["inside"], e["h"], 0.0), mask=e["inside"], role="h")
        return ContrastField(hf, self.lam, collar, inf_abs if is_contrast else None, is_contrast, self)

    def v_field(self, grid):
        return ScalarField(grid, self.total_field(grid.points()), role="uq")

    def residual(self, grid, band_cells=3):
        """Sup of the five-point ``(Laplacian + lam^2 + h chi_D) v`` on ``D`` minus a band at ``dD``."""
        from .grid import laplacian5

        pts = grid.points()
        e = self.evaluate(pts)
        u = self.total_field(pts)
        res = laplacian5(u, grid.spacing) + (self.lam**2 + e["h"]) * u
        depth = _depth_distance(self.domain, pts)
        keep = e["inside"] & (depth > band_cells * grid.spacing) & np.isfinite(res)
        return float(np.abs(res[keep]).max()) if keep.any() else 0.0


def _depth_distance(domain, pts):
    lev = domain.level(pts)
    g = domain.level_gradient(pts)
    return lev / np.maximum(np.hypot(g[..., 0], g[..., 1]), 1e-12)


def glue_construction(domain, lam, u0, v0, psi, grid=None):
    """Glue the collar solution ``v0`` to 1 with the cutoff ``psi``.

    Returns the :class:`GluedConstruction`, or ``(ContrastField, v)`` on
    ``grid`` when one is given.  Raises :class:`ConstructionError` if
    ``v`` is not positive on ``D``.
    """
    g = GluedConstruction(domain, lam, u0, v0, psi)
    if grid is None:
        return g
    return g.contrast_field(grid), g.v_field(grid)


def quadrature_contrast(domain, mu, u0, collar, grid=None, n_boundary=4096, potential=None,
                        psi=None):
    """Contrast ``h0 = -1/v0`` near ``dD`` with ``v0 = u + u0`` (``lam = 0``).

    ``u0`` must be harmonic near ``D`` and positive on ``dD``.  The
    returned construction carries ``certificate = inf |h|`` over the
    ``psi = 1`` collar.  ``psi`` defaults to ``CutoffProfile(collar)``.
    """
    from .qdomain import ModifiedPotential

    if getattr(u0, "lam", 0.0) != 0:
        raise ValueError("quadrature contrasts are built for lam = 0")
    bn = domain.boundary_nodes(512)
    ub = np.real(u0(bn.points))
    if ub.min() <= 0:
        raise ConstructionError(f"u0 must be positive on dD (min {ub.min():.3e})")
    if potential is None:
        potential = ModifiedPotential(domain, mu, n_boundary=n_boundary, collar=collar)
    psi = CutoffProfile(collar) if psi is None else psi
    if mu.terms:
        depth_mu = domain.level(mu.locations)
        if np.any(depth_mu <= psi.support_depth):
            raise ValueError("the measure must sit in the core where psi = 0")
    return glue_construction(domain, 0.0, u0, PotentialCollar(potential, u0), psi, grid)


def interior_cutoff_potential(domain, lam, u0, psi, grid=None):
    """``v = psi u0 + (1 - psi)``: ``h = 0`` near ``dD``, ``-lam^2`` in the core.

    Non-scattering for ``u0`` but not a contrast (``h`` vanishes at ``dD``).
    """
    return glue_construction(domain, lam, u0, WaveCollar(u0), psi, grid)


def disk_helmholtz_construction(disk, lam, u0, h0, depth, steps=400, psi=None):
    """Radial-route construction on a disk with collar depth ``depth``.

    ``psi`` defaults to ``CutoffProfile(depth)``.
    """
    v0 = radial_cauchy_extension(disk.radius, lam, h0, u0, depth, steps=steps, center=disk.center)
    return glue_construction(disk, lam, u0, v0, CutoffProfile(depth) if psi is None else psi)
