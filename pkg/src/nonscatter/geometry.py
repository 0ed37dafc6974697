"""Obstacle domains, boundary quadrature, minimal diameter and thickness.

Every domain offers an inside test, a counterclockwise boundary polyline,
boundary nodes with outward normals and arc weights, and a *collar
coordinate* ``level``: a function that is positive in ``D``, vanishes on
``dD`` and behaves like the distance to ``dD`` near the boundary.  For the
smooth domains the collar coordinate is real-analytic inside ``D`` and
comes with analytic gradient and Laplacian, which is what the contrast
constructions differentiate.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def _pts(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError("points must have a trailing axis of length 2")
    return p


def winding_number(points, vertices, chunk=4096):
    """Winding number of a closed polyline around each point.

    ``vertices`` is ``(m, 2)`` with the closing edge implied.
    """
    points = _pts(points)
    shape = points.shape[:-1]
    P = points.reshape(-1, 2)
    V = np.asarray(vertices, dtype=float)
    ax, ay = V[:, 0], V[:, 1]
    bx, by = np.roll(ax, -1), np.roll(ay, -1)
    wn = np.zeros(len(P), dtype=int)
    for s in range(0, len(P), chunk):
        px = P[s : s + chunk, 0:1]
        py = P[s : s + chunk, 1:2]
        cross = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        up = (ay <= py) & (by > py) & (cross > 0)
        down = (ay > py) & (by <= py) & (cross < 0)
        wn[s : s + chunk] = up.sum(axis=1) - down.sum(axis=1)
    return wn.reshape(shape)


def _segment_distance(points, vertices, chunk=4096):
    P = _pts(points).reshape(-1, 2)
    A = np.asarray(vertices, dtype=float)
    B = np.roll(A, -1, axis=0)
    AB = B - A
    L2 = np.maximum((AB**2).sum(axis=1), 1e-300)
    out = np.empty(len(P))
    for s in range(0, len(P), chunk):
        p = P[s : s + chunk, None, :]
        t = np.clip(((p - A) * AB).sum(axis=-1) / L2, 0.0, 1.0)
        d = p - (A + t[..., None] * AB)
        out[s : s + chunk] = np.sqrt((d**2).sum(axis=-1)).min(axis=1)
    return out.reshape(np.shape(points)[:-1])


@dataclass(frozen=True)
class BoundaryNodes:
    """Quadrature nodes on ``dD``: points, outward unit normals, arc weights.

    ``corner`` flags nodes whose normal was averaged across a corner (or
    is undefined, as at a cusp); Neumann comparisons should skip them.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    corner: np.ndarray

    def __len__(self):
        return len(self.weights)

    @property
    def perimeter(self):
        return float(self.weights.sum())


class Domain:
    """Common machinery; subclasses describe a concrete bounded open set."""

    kind = "domain"

    # -- to be provided by subclasses ---------------------------------
    def polyline(self, m=1024):
        raise NotImplementedError

    def inside(self, points):
        return winding_number(points, self.polyline(self.default_polyline_size)) != 0

    default_polyline_size = 2048

    def level(self, points):
        """Signed distance to the boundary polyline (positive inside)."""
        poly = self.polyline(self.default_polyline_size)
        d = _segment_distance(points, poly)
        return np.where(self.inside(points), d, -d)

    def has_smooth_level(self):
        return False

    @property
    def bbox(self):
        poly = self.polyline(self.default_polyline_size)
        return (poly[:, 0].min(), poly[:, 0].max(), poly[:, 1].min(), poly[:, 1].max())

    @functools.cached_property
    def diameter(self):
        """Largest distance between two boundary points (over the hull)."""
        hull = convex_hull(self.polyline(self.default_polyline_size))
        best = 0.0
        for s in range(0, len(hull), 512):
            d = hull[s : s + 512, None, :] - hull[None, :, :]
            best = max(best, float(np.sqrt((d**2).sum(-1)).max()))
        return best

    def contour_quadrature(self, m=2048):
        """Nodes ``z`` and complex weights ``dz`` for contour integrals on ``dD``."""
        poly = self.polyline(m)
        z = poly[:, 0] + 1j * poly[:, 1]
        zn = np.roll(z, -1)
        # midpoint rule per segment
        return 0.5 * (z + zn), zn - z

    def boundary_nodes(self, m):
        if m < 16:
            raise ValueError("boundary_nodes needs at least 16 nodes")
        return _polyline_nodes(self.polyline(m))

    def to_dict(self):
        raise NotImplementedError


def _polyline_nodes(poly, corner_angle=np.deg2rad(20.0)):
    seg = np.roll(poly, -1, axis=0) - poly
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    seg_n = np.stack([seg[:, 1], -seg[:, 0]], axis=1) / np.maximum(seg_len, 1e-300)[:, None]
    prev_n = np.roll(seg_n, 1, axis=0)
    prev_len = np.roll(seg_len, 1)
    n = seg_n + prev_n
    nn = np.hypot(n[:, 0], n[:, 1])
    n = np.where(nn[:, None] > 1e-12, n / np.maximum(nn, 1e-300)[:, None], seg_n)
    cosang = np.clip((seg_n * prev_n).sum(axis=1), -1.0, 1.0)
    corner = np.arccos(cosang) > corner_angle
    w = 0.5 * (seg_len + prev_len)
    return BoundaryNodes(poly.copy(), n, w, corner)


class _ParametrizedDomain(Domain):
    """Domains whose boundary is a smooth periodic curve ``z(t)``, ``t in [0, 2 pi)``."""

    def boundary_point(self, t):
        raise NotImplementedError

    def boundary_tangent(self, t):
        raise NotImplementedError

    def polyline(self, m=1024):
        t = TWO_PI * np.arange(m) / m
        z = self.boundary_point(t)
        return np.stack([z.real, z.imag], axis=1)

    def contour_quadrature(self, m=2048):
        # trapezoid rule in the parameter: spectrally accurate for analytic curves
        t = TWO_PI * np.arange(m) / m
        return self.boundary_point(t), self.boundary_tangent(t) * (TWO_PI / m)

    def boundary_nodes(self, m):
        if m < 16:
            raise ValueError("boundary_nodes needs at least 16 nodes")
        t = TWO_PI * np.arange(m) / m
        z = self.boundary_point(t)
        dz = self.boundary_tangent(t)
        speed = np.abs(dz)
        degenerate = speed < 1e-12 * max(speed.max(), 1.0)
        nrm = -1j * dz / np.where(degenerate, 1.0, speed)
        if np.any(degenerate):
            # cusp: fall back to the averaged neighbour normals
            idx = np.flatnonzero(degenerate)
            avg = nrm[(idx - 1) % m] + nrm[(idx + 1) % m]
            avg = np.where(np.abs(avg) > 1e-12, avg, self._cusp_normal(t[idx]))
            nrm[idx] = avg / np.abs(avg)
        pts = np.stack([z.real, z.imag], axis=1)
        normals = np.stack([nrm.real, nrm.imag], axis=1)
        return BoundaryNodes(pts, normals, speed * (TWO_PI / m), degenerate)

    def _cusp_normal(self, t):
        return np.ones_like(t, dtype=complex)

    def has_smooth_level(self):
        return True


@dataclass(frozen=True, eq=True)
class Disk(_ParametrizedDomain):
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    kind = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def _c(self):
        return complex(*self.center)

    def boundary_point(self, t):
        return self._c + self.radius * np.exp(1j * np.asarray(t))

    def boundary_tangent(self, t):
        return 1j * self.radius * np.exp(1j * np.asarray(t))

    def inside(self, points):
        return self.level(points) > 0

    def level(self, points):
        p = _pts(points)
        return self.radius - np.hypot(p[..., 0] - self.center[0], p[..., 1] - self.center[1])

    def level_gradient(self, points):
        p = _pts(points)
        d = p - np.asarray(self.center)
        r = np.maximum(np.hypot(d[..., 0], d[..., 1]), 1e-300)
        return -d / r[..., None]

    def level_laplacian(self, points):
        p = _pts(points)
        r = np.hypot(p[..., 0] - self.center[0], p[..., 1] - self.center[1])
        return -1.0 / np.maximum(r, 1e-300)

    @property
    def bbox(self):
        cx, cy = self.center
        R = self.radius
        return (cx - R, cx + R, cy - R, cy + R)

    def exact_area(self):
        return np.pi * self.radius**2

    def to_dict(self):
        return {"kind": "disk", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True, eq=True)
class Ellipse(_ParametrizedDomain):
    """Axis-aligned ellipse with semi-axes ``a`` (x) and ``b`` (y).

    The collar coordinate is ``min(a, b) * (1 - rho)`` with ``rho`` the
    elliptic radius; it is smooth and comparable to (not equal to) the
    distance to the boundary.
    """

    center: tuple = (0.0, 0.0)
    a: float = 1.0
    b: float = 1.0
    kind = "ellipse"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")

    def boundary_point(self, t):
        t = np.asarray(t)
        return complex(*self.center) + self.a * np.cos(t) + 1j * self.b * np.sin(t)

    def boundary_tangent(self, t):
        t = np.asarray(t)
        return -self.a * np.sin(t) + 1j * self.b * np.cos(t)

    def _rho(self, points):
        p = _pts(points)
        X = (p[..., 0] - self.center[0]) / self.a
        Y = (p[..., 1] - self.center[1]) / self.b
        return np.hypot(X, Y), X / self.a, Y / self.b

    def inside(self, points):
        return self._rho(points)[0] < 1.0

    def level(self, points):
        return min(self.a, self.b) * (1.0 - self._rho(points)[0])

    def level_gradient(self, points):
        rho, gx, gy = self._rho(points)
        rho = np.maximum(rho, 1e-300)
        return -min(self.a, self.b) * np.stack([gx / rho, gy / rho], axis=-1)

    def level_laplacian(self, points):
        rho, gx, gy = self._rho(points)
        rho = np.maximum(rho, 1e-300)
        lap_rho = (1 / self.a**2 + 1 / self.b**2) / rho - (gx**2 + gy**2) / rho**3
        return -min(self.a, self.b) * lap_rho

    @property
    def bbox(self):
        cx, cy = self.center
        return (cx - self.a, cx + self.a, cy - self.b, cy + self.b)

    def exact_area(self):
        return np.pi * self.a * self.b

    def to_dict(self):
        return {"kind": "ellipse", "center": list(self.center), "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=True)
class ConformalImage(_ParametrizedDomain):
    """Image of the unit disk under ``f(w) = w + a w^2`` (shifted by ``center``).

    ``|a| <= 1/2`` keeps ``f`` univalent; ``a = 1/2`` is the cardioid with
    its inward cusp at ``f(-1) = -1/2``.  The inside test is the winding
    number of a ``n_boundary``-point boundary polyline; the collar
    coordinate is ``1 - |f^{-1}(z)|``.
    """

    a: float = 0.5
    center: tuple = (0.0, 0.0)
    n_boundary: int = 4096
    kind = "conformal"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if abs(self.a) > 0.5 + 1e-15:
            raise ValueError("|a| must be <= 1/2 for f(w) = w + a w^2 to be univalent")

    @property
    def default_polyline_size(self):
        return self.n_boundary

    def map(self, w):
        w = np.asarray(w, dtype=complex)
        return complex(*self.center) + w + self.a * w * w

    def map_derivative(self, w):
        return 1.0 + 2.0 * self.a * np.asarray(w, dtype=complex)

    def inverse(self, points):
        """Preimage in the closed unit disk when it exists (smaller-modulus root)."""
        p = _pts(points)
        z = p[..., 0] + 1j * p[..., 1] - complex(*self.center)
        if self.a == 0:
            return z
        s = np.sqrt(1.0 + 4.0 * self.a * z)
        s = np.where((1.0 + s).real >= 0, s, -s)
        w1 = 2.0 * z / (1.0 + s)
        w2 = -1.0 / self.a - w1
        return np.where(np.abs(w1) <= np.abs(w2), w1, w2)

    def boundary_point(self, t):
        return self.map(np.exp(1j * np.asarray(t)))

    def boundary_tangent(self, t):
        w = np.exp(1j * np.asarray(t))
        return self.map_derivative(w) * 1j * w

    def _cusp_normal(self, t):
        # the second derivative of z(t) points out of D at the cusp
        w = np.exp(1j * t)
        d2 = -(self.map_derivative(w) * w) - 2.0 * self.a * w * w
        return d2

    def level(self, points):
        return 1.0 - np.abs(self.inverse(points))

    def level_gradient(self, points):
        w = self.inverse(points)
        g1 = 1.0 / self.map_derivative(w)
        aw = np.maximum(np.abs(w), 1e-300)
        c = np.conj(w) * g1
        return -np.stack([c.real / aw, -c.imag / aw], axis=-1)

    def level_laplacian(self, points):
        w = self.inverse(points)
        g1 = 1.0 / self.map_derivative(w)
        return -np.abs(g1) ** 2 / np.maximum(np.abs(w), 1e-300)

    def exact_area(self):
        return np.pi * (1.0 + 2.0 * abs(self.a) ** 2)

    def to_dict(self):
        return {"kind": "conformal", "a": self.a, "center": list(self.center),
                "n_boundary": self.n_boundary}


def cardioid():
    return ConformalImage(a=0.5)


@dataclass(frozen=True)
class Polygon(Domain):
    """Simple polygon; vertices are reordered counterclockwise if needed."""

    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _shoelace(v) < 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, v)))

    @property
    def _v(self):
        return np.asarray(self.vertices)

    def polyline(self, m=None):
        return self._v.copy()

    def inside(self, points):
        return winding_number(points, self._v) != 0

    def level(self, points):
        d = _segment_distance(points, self._v)
        return np.where(self.inside(points), d, -d)

    @property
    def bbox(self):
        v = self._v
        return (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())

    def contour_quadrature(self, m=None, order=8):
        # Gauss-Legendre per edge: exact for polynomial moments up to degree 2*order-2
        xg, wg = np.polynomial.legendre.leggauss(order)
        v = self._v
        a = v[:, 0] + 1j * v[:, 1]
        b = np.roll(a, -1)
        z = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xg[None, :]
        dz = 0.5 * (b - a)[:, None] * wg[None, :]
        return z.ravel(), dz.ravel()

    def boundary_nodes(self, m):
        if m < 16:
            raise ValueError("boundary_nodes needs at least 16 nodes")
        v = self._v
        nv = len(v)
        seg = np.roll(v, -1, axis=0) - v
        L = np.hypot(seg[:, 0], seg[:, 1])
        counts = np.maximum(1, np.floor((m - nv) * L / L.sum()).astype(int) + 1)
        pts, nrm, wts, corner = [], [], [], []
        for k in range(nv):
            nk = np.array([seg[k, 1], -seg[k, 0]]) / L[k]
            h = L[k] / counts[k]
            for j in range(counts[k]):
                pts.append(v[k] + seg[k] * (j / counts[k]))
                nrm.append(nk)
                wts.append(h)
                corner.append(j == 0)
        pts, nrm, wts, corner = map(np.asarray, (pts, nrm, wts, corner))
        # corners: averaged normal, half weight from each adjacent edge
        idx = np.flatnonzero(corner)
        prev = (idx - 1) % len(pts)
        avg = nrm[idx] + nrm[prev]
        nrm[idx] = avg / np.hypot(avg[:, 0], avg[:, 1])[:, None]
        wts = 0.5 * (wts + np.roll(wts, 1))
        return BoundaryNodes(pts, nrm, wts, corner)

    def exact_area(self):
        return _shoelace(self._v)

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(p) for p in self.vertices]}


def square(side=1.0, center=(0.0, 0.0)):
    h = 0.5 * side
    cx, cy = center
    return Polygon(((cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)))


@dataclass(frozen=True)
class CuspModel(Domain):
    """``D = {x2 < |x1|^(1/gamma)} ∩ B(0, window)``: an inward cusp at the origin.

    The complement near 0 is ``{|x1| <= x2^gamma}``, whose thickness
    decays like ``r^(gamma - 1)``.
    """

    gamma: float = 2.0
    window: float = 1.0
    kind = "cusp"

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("cusp exponent gamma must exceed 1")
        if not self.window > 0:
            raise ValueError("window radius must be positive")

    def inside(self, points):
        p = _pts(points)
        x1, x2 = p[..., 0], p[..., 1]
        return (x2 < np.abs(x1) ** (1.0 / self.gamma)) & (x1 * x1 + x2 * x2 < self.window**2)

    def _corner_x(self):
        lo, hi = 0.0, self.window
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid * mid + mid ** (2.0 / self.gamma) < self.window**2:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def polyline(self, m=1024):
        X = self._corner_x()
        alpha = math.atan2(X ** (1.0 / self.gamma), X)
        n_arc = m // 2
        n_curve = m - n_arc
        th = np.linspace(np.pi - alpha, 2 * np.pi + alpha, n_arc, endpoint=False)
        arc = self.window * np.stack([np.cos(th), np.sin(th)], axis=1)
        # curve from P+ back to P-, clustered at the cusp
        s = np.linspace(1.0, -1.0, n_curve, endpoint=False)
        x1 = X * np.sign(s) * np.abs(s) ** 2
        curve = np.stack([x1, np.abs(x1) ** (1.0 / self.gamma)], axis=1)
        return np.concatenate([arc, curve])

    @property
    def bbox(self):
        return (-self.window, self.window, -self.window, self.window)

    def to_dict(self):
        return {"kind": "cusp", "gamma": self.gamma, "window": self.window}


def domain_from_dict(d):
    kind = d.get("kind")
    if kind == "disk":
        return Disk(tuple(d.get("center", (0.0, 0.0))), float(d.get("radius", 1.0)))
    if kind == "ellipse":
        return Ellipse(tuple(d.get("center", (0.0, 0.0))), float(d["a"]), float(d["b"]))
    if kind in ("conformal", "cardioid"):
        return ConformalImage(float(d.get("a", 0.5)), tuple(d.get("center", (0.0, 0.0))),
                              int(d.get("n_boundary", 4096)))
    if kind == "polygon":
        return Polygon(tuple(map(tuple, d["vertices"])))
    if kind == "square":
        return square(float(d.get("side", 1.0)), tuple(d.get("center", (0.0, 0.0))))
    if kind == "cusp":
        return CuspModel(float(d.get("gamma", 2.0)), float(d.get("window", 1.0)))
    raise ValueError(f"unknown domain kind {kind!r}")


# -- module-level API -------------------------------------------------------

def inside(domain, p):
    """Membership in the open set; points within ~1e-12 of ``dD`` may go either way."""
    return domain.inside(p)


def boundary_nodes(domain, m):
    return domain.boundary_nodes(m)


def _shoelace(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def area(domain, m=4096):
    """Shoelace area of the boundary polyline (exact for polygons)."""
    return _shoelace(np.asarray(domain.polyline(m)))


# -- minimal diameter ---------------------------------------------------------

def convex_hull(points):
    """Andrew's monotone chain; returns hull vertices counterclockwise."""
    P = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(P) <= 2:
        return P

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in P:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in P[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def _calipers(hull):
    """Minimal width of a convex polygon and the unit normal realizing it."""
    h = len(hull)
    if h < 3:
        if h == 2:
            d = hull[1] - hull[0]
            n = np.array([-d[1], d[0]]) / max(np.hypot(*d), 1e-300)
            return 0.0, n
        return 0.0, np.array([1.0, 0.0])

    def dist(i, j):
        a, b = hull[i], hull[(i + 1) % h]
        e = b - a
        return abs(e[0] * (hull[j][1] - a[1]) - e[1] * (hull[j][0] - a[0])) / np.hypot(*e)

    best, best_n = np.inf, None
    j = 1
    for i in range(h):
        # antipodal pointer only moves forward around the hull
        while dist(i, (j + 1) % h) > dist(i, j) * (1 + 1e-14):
            j = (j + 1) % h
        w = dist(i, j)
        if w < best:
            e = hull[(i + 1) % h] - hull[i]
            best, best_n = w, np.array([-e[1], e[0]]) / np.hypot(*e)
    return float(best), best_n


def minimal_diameter(cloud, return_direction=False):
    """Width of the thinnest strip containing the point cloud.

    A strip contains a set iff it contains the convex hull, so this is the
    minimal width of the hull, found by rotating calipers.
    """
    P = np.asarray(cloud, dtype=float).reshape(-1, 2)
    if len(P) == 0:
        raise ValueError("minimal_diameter needs a nonempty point cloud")
    w, n = _calipers(convex_hull(P))
    return (w, n) if return_direction else w


@dataclass(frozen=True)
class Thickness:
    """Thickness ``MD(K ∩ B(z, r)) / r`` with a sampling-resolution bound."""

    value: float
    error_bound: float
    n_points: int
    r: float

    def __float__(self):
        return self.value


def thickness(member, z, r, samples=10_000, rounds=4):
    """Estimate ``delta_r(K, z) = MD(K ∩ B(z, r)) / r`` by grid sampling.

    ``member`` maps an ``(..., 2)`` array of points to booleans.  A first
    uniform grid covers ``B(z, r)``; each later round resamples a grid of
    the same size on the oriented bounding box of the points found so far
    (aligned with the current thinnest direction and dilated by one
    previous spacing), so thin sets such as cusps are resolved far below
    the first grid's spacing.  Sampling is deterministic.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if samples < 10_000:
        raise ValueError("thickness needs at least 1e4 samples per round")
    z = np.asarray(z, dtype=float)
    n = int(math.ceil(math.sqrt(samples)))
    n += 1 - n % 2  # odd: the grid contains z's axis lines

    def in_ball_and_member(p):
        d = p - z
        ok = (d[..., 0] ** 2 + d[..., 1] ** 2) < r * r
        out = np.zeros(ok.shape, bool)
        if ok.any():
            out[ok] = np.asarray(member(p[ok]), dtype=bool)
        return out

    g = np.linspace(-r, r, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    P = np.stack([X, Y], axis=-1).reshape(-1, 2) + z
    keep = P[in_ball_and_member(P)]
    if len(keep) == 0:
        return Thickness(0.0, 2.0 * (g[1] - g[0]) / r, 0, r)
    spacing_u = spacing_v = g[1] - g[0]
    pts = keep
    for _ in range(rounds - 1):
        _, nvec = minimal_diameter(pts, return_direction=True)
        u = nvec / np.hypot(*nvec)
        v = np.array([-u[1], u[0]])
        pu = (pts - z) @ u
        pv = (pts - z) @ v
        u0, u1 = pu.min() - spacing_u, pu.max() + spacing_u
        v0, v1 = pv.min() - spacing_v, pv.max() + spacing_v
        gu = np.linspace(u0, u1, n)
        gv = np.linspace(v0, v1, n)
        U, V = np.meshgrid(gu, gv, indexing="ij")
        Q = z + U[..., None] * u + V[..., None] * v
        Q = Q.reshape(-1, 2)
        new = Q[in_ball_and_member(Q)]
        if len(new):
            pts = np.concatenate([pts, new])
        spacing_u, spacing_v = gu[1] - gu[0], gv[1] - gv[0]
    md = minimal_diameter(pts)
    return Thickness(md / r, 2.0 * spacing_u / r, len(pts), r)
