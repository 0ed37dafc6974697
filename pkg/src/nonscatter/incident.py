"""Entire Helmholtz solutions: Herglotz synthesis, Fourier-Bessel expansions,
interior solutions ``v = 1 + w``, least-squares Runge fitting, zero-ball
scans and the boundary orthogonality check at the first eigenvalue.

Every "wave" object exposes ``lam``, ``__call__(points)`` and
``gradient(points)`` with points on a trailing axis of length 2.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import ScalarField
from .specialfun import C2, bessel_j, bessel_j_all

log = logging.getLogger(__name__)


class EigenvalueProximityError(RuntimeError):
    """The discrete Dirichlet problem is (nearly) singular."""


def _polar(points):
    p = np.asarray(points, dtype=float)
    return np.hypot(p[..., 0], p[..., 1]), np.arctan2(p[..., 1], p[..., 0])


# -- Herglotz waves ----------------------------------------------------------------

@dataclass(frozen=True)
class HerglotzCoefficients:
    """Density ``f(omega) = sum_m f_m e^{i m phi}`` on the unit circle, ``|m| <= M``.

    ``coeffs[k]`` holds ``f_{k - M}``.  With ``real=True`` the coefficients
    must satisfy ``f_m = (-1)^m conj(f_{-m})``, which is exactly the
    condition for the synthesized wave to be real.
    """

    lam: float
    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coefficients must be indexed by m in [-M, M]")
        if self.real:
            m = self.orders
            mirror = (-1.0) ** m * np.conj(c[::-1])
            if not np.allclose(c, mirror, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(c).max())):
                raise ValueError("realness flag set but f_m != (-1)^m conj(f_-m)")

    @property
    def M(self):
        return (len(self.coeffs) - 1) // 2

    @property
    def orders(self):
        return np.arange(-self.M, self.M + 1)

    def density(self, phi):
        phi = np.asarray(phi, dtype=float)
        return np.exp(1j * np.multiply.outer(phi, self.orders)) @ self.coeffs


def herglotz_eval(coeffs, points):
    """``int_{S^1} e^{i lam x.omega} f(omega) d omega`` by Jacobi-Anger:
    ``sum_m f_m 2 pi i^m J_m(lam r) e^{i m theta}``."""
    r, th = _polar(points)
    M = coeffs.M
    J = bessel_j_all(M, coeffs.lam * r)
    out = np.zeros(r.shape, dtype=complex)
    for m, f in zip(coeffs.orders, coeffs.coeffs):
        if f == 0:
            continue
        jm = J[abs(m)] * (-1.0 if m < 0 and m % 2 else 1.0)
        out += f * 2 * np.pi * (1j**m) * jm * np.exp(1j * m * th)
    if coeffs.real:
        out = out.real + 0j
    return out if out.ndim else complex(out)


def herglotz_quadrature(coeffs, points, nodes=4096):
    """Direct trapezoid rule for the circle integral (reference evaluation)."""
    phi = 2 * np.pi * np.arange(nodes) / nodes
    omega = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    f = coeffs.density(phi)
    p = np.asarray(points, dtype=float)
    phase = np.exp(1j * coeffs.lam * (p @ omega.T))
    return phase @ f * (2 * np.pi / nodes)


# -- waves ----------------------------------------------------------------------

class Wave:
    """Base for incident fields; subclasses define ``lam``."""

    is_real = True

    def __call__(self, points):
        raise NotImplementedError

    def gradient(self, points):
        raise NotImplementedError

    def laplacian(self, points):
        """``Laplacian u = -lam^2 u`` for every entire Helmholtz solution."""
        return -self.lam**2 * self(points)

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantWave(Wave):
    """``u0 = value``: a harmonic (``lam = 0``) incident field."""

    value: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if self.lam != 0:
            raise ValueError("a constant solves the Helmholtz equation only for lam = 0")

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        return np.full(p.shape[:-1], float(self.value))

    def gradient(self, points):
        p = np.asarray(points, dtype=float)
        return np.zeros(p.shape)

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class PlaneWave(Wave):
    """``e^{i lam d.x}``, or its real part ``cos(lam d.x)`` with ``real=True``."""

    lam: float
    direction: tuple = (1.0, 0.0)
    real: bool = False

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", tuple(d / np.linalg.norm(d)))

    @property
    def is_real(self):
        return self.real

    def __call__(self, points):
        phase = self.lam * (np.asarray(points, dtype=float) @ np.asarray(self.direction))
        return np.cos(phase) if self.real else np.exp(1j * phase)

    def gradient(self, points):
        d = np.asarray(self.direction)
        phase = self.lam * (np.asarray(points, dtype=float) @ d)
        if self.real:
            return -self.lam * np.sin(phase)[..., None] * d
        return (1j * self.lam * np.exp(1j * phase))[..., None] * d

    def to_dict(self):
        return {"kind": "plane", "lam": self.lam, "direction": list(self.direction), "real": self.real}


@dataclass(frozen=True)
class RealHelmholtzExpansion(Wave):
    """``u(r, theta) = sum_m (a_m cos m theta + b_m sin m theta) J_m(lam r)``.

    ``a`` and ``b`` have length ``M + 1``; ``b[0]`` is ignored.
    """

    lam: float
    a: tuple
    b: tuple = None
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.zeros_like(a) if self.b is None else np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1-d of equal length")
        if len(a) - 1 > 60:
            raise ValueError("mode cutoff above 60")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        b = b.copy()
        b[0] = 0.0
        object.__setattr__(self, "a", tuple(a.tolist()))
        object.__setattr__(self, "b", tuple(b.tolist()))
        object.__setattr__(self, "center", tuple(map(float, self.center)))

    @property
    def M(self):
        return len(self.a) - 1

    @property
    def complex_coeffs(self):
        """``c_m = a_m - i b_m`` so that ``u = Re sum_m c_m J_m e^{i m theta}``."""
        return np.asarray(self.a) - 1j * np.asarray(self.b)

    def _shift(self, points):
        p = np.asarray(points, dtype=float)
        return p - np.asarray(self.center)

    def __call__(self, points):
        r, th = _polar(self._shift(points))
        J = bessel_j_all(self.M, self.lam * r)
        out = np.zeros(r.shape)
        for m, (am, bm) in enumerate(zip(self.a, self.b)):
            if am or bm:
                out += (am * np.cos(m * th) + bm * np.sin(m * th)) * J[m]
        return out if out.ndim else float(out)

    def gradient(self, points):
        # d_x [J_m e^{im th}] = (lam/2)(J_{m-1} e^{i(m-1)th} - J_{m+1} e^{i(m+1)th})
        # d_y [J_m e^{im th}] = (i lam/2)(J_{m-1} e^{i(m-1)th} + J_{m+1} e^{i(m+1)th})
        r, th = _polar(self._shift(points))
        J = bessel_j_all(self.M + 1, self.lam * r)

        def E(k):
            jk = -J[1] if k == -1 else J[k]
            return jk * np.exp(1j * k * th)

        gx = np.zeros(r.shape, dtype=complex)
        gy = np.zeros(r.shape, dtype=complex)
        for m, c in enumerate(self.complex_coeffs):
            if c == 0:
                continue
            lo, hi = E(m - 1), E(m + 1)
            gx += c * 0.5 * self.lam * (lo - hi)
            gy += c * 0.5j * self.lam * (lo + hi)
        return np.stack([gx.real, gy.real], axis=-1)

    def to_herglotz(self):
        """Equivalent density with ``u = herglotz_eval`` (real-flagged)."""
        if self.center != (0.0, 0.0):
            raise ValueError("Herglotz conversion assumes the expansion is centered at 0")
        M = self.M
        f = np.zeros(2 * M + 1, dtype=complex)
        c = self.complex_coeffs
        f[M] = c[0] / (2 * np.pi)
        for m in range(1, M + 1):
            f[M + m] = c[m] * (-1j) ** m / (4 * np.pi)
            f[M - m] = np.conj(c[m]) * (1j**m) * (-1.0) ** m / (4 * np.pi)
        return HerglotzCoefficients(self.lam, f, real=True)

    def to_dict(self):
        return {"kind": "expansion", "lam": self.lam, "a": list(self.a), "b": list(self.b),
                "center": list(self.center)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d["lam"], d["a"], d.get("b"), tuple(d.get("center", (0.0, 0.0))))

    @classmethod
    def random(cls, lam, M, seed):
        rng = np.random.default_rng(seed)
        scale = 1.0 / (1.0 + np.arange(M + 1))
        return cls(lam, rng.standard_normal(M + 1) * scale, rng.standard_normal(M + 1) * scale)


def expansion_eval(e, points):
    return e(points)


def expansion_gradient(e, points):
    return e.gradient(points)


def wave_from_dict(d):
    kind = d["kind"]
    if kind == "constant":
        return ConstantWave(d.get("value", 1.0))
    if kind == "plane":
        return PlaneWave(d["lam"], tuple(d.get("direction", (1.0, 0.0))), d.get("real", False))
    if kind == "expansion":
        return RealHelmholtzExpansion.from_dict(d)
    raise ValueError(f"unknown wave kind {kind!r}")


def helmholtz_residual(u, points, lam, h=1e-3):
    """Five-point ``(Laplacian + lam^2) u`` at ``points`` relative to ``max |u|``."""
    p = np.asarray(points, dtype=float)
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    u0 = u(p)
    lap = (u(p + ex) + u(p - ex) + u(p + ey) + u(p - ey) - 4 * u0) / h**2
    scale = max(float(np.max(np.abs(u0))), 1e-300)
    return float(np.max(np.abs(lap + lam**2 * u0))) / scale


# -- interior solution v = 1 + w ----------------------------------------------------

def _cut_fraction(domain, p_in, p_out, iters=50):
    """Fraction ``t`` in (0, 1] where the segment leaves the domain."""
    lo = np.zeros(len(p_in))
    hi = np.ones(len(p_in))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        q = p_in + mid[:, None] * (p_out - p_in)
        ins = domain.inside(q)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    return 0.5 * (lo + hi)


@dataclass
class InteriorSolveReport:
    lam: float
    n_unknowns: int
    residual: float
    smallest_eigenvalue: float
    eigen_band: float

    def to_dict(self):
        return dict(self.__dict__)


def _dirichlet_system(domain, lam, grid):
    """Shortley-Weller matrix for ``Laplacian + lam^2`` on the interior nodes.

    Returns ``(A, idx, inside)`` where ``idx[i, j]`` numbers the unknowns.
    """
    pts = grid.points()
    inside = domain.inside(pts)
    inside[[0, -1], :] = False
    inside[:, [0, -1]] = False
    n = grid.n
    h = grid.spacing
    idx = -np.ones((n, n), dtype=int)
    I, Jn = np.nonzero(inside)
    idx[I, Jn] = np.arange(len(I))
    N = len(I)

    arm = {}
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb_in = inside[I + di, Jn + dj]
        frac = np.ones(N)
        cut = ~nb_in
        if cut.any():
            frac[cut] = _cut_fraction(domain, pts[I[cut], Jn[cut]], pts[I[cut] + di, Jn[cut] + dj])
        frac = np.maximum(frac, 1e-3)
        arm[(di, dj)] = (nb_in, frac * h)

    rows, cols, vals = [], [], []
    diag = np.full(N, lam**2, dtype=float)
    for axis in ((1, 0), (0, 1)):
        neg = (-axis[0], -axis[1])
        in_p, hp = arm[axis]
        in_m, hm = arm[neg]
        cp = 2.0 / (hp * (hp + hm))
        cm = 2.0 / (hm * (hp + hm))
        diag -= cp + cm
        for (di, dj), inn, c in ((axis, in_p, cp), (neg, in_m, cm)):
            k = np.nonzero(inn)[0]
            rows.append(k)
            cols.append(idx[I[k] + di, Jn[k] + dj])
            vals.append(c[k])
        # boundary neighbours carry w = 0 and contribute nothing
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(diag)
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return A, idx, inside


def smallest_eigenvalue(lu, n):
    """Smallest-modulus eigenvalue of ``A`` from its LU factors (shift-invert)."""
    if n < 3:
        return float("nan")
    op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    mu = spla.eigs(op, k=1, which="LM", return_eigenvectors=False, v0=np.ones(n), tol=1e-8)
    return float(abs(1.0 / mu[0]))


def interior_solution(domain, lam, grid, eigen_band=0.02):
    """``v = 1 + w`` with ``(Laplacian + lam^2) w = -lam^2`` in ``D``, ``w = 0`` on ``dD``.

    Five-point finite differences with Shortley-Weller arms at boundary
    cuts.  Before returning, the smallest eigenvalue ``sigma`` of the
    discrete operator is computed by shift-invert; if
    ``|sigma| < eigen_band * lam^2`` the problem is reported as lying at
    (or next to) a Dirichlet eigenvalue and
    :class:`EigenvalueProximityError` is raised.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    pts = grid.points()
    if lam == 0:
        inside = domain.inside(pts)
        rep = InteriorSolveReport(0.0, int(inside.sum()), 0.0, float("nan"), eigen_band)
        v = ScalarField(grid, np.where(inside, 1.0, np.nan), mask=inside, role="v",
                        meta={"boundary_value": 1.0, "report": rep.to_dict()})
        return v
    A, idx, inside = _dirichlet_system(domain, lam, grid)
    N = A.shape[0]
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise EigenvalueProximityError(
            f"discrete Dirichlet operator is singular at lam={lam}: lam^2 is a Dirichlet eigenvalue"
        ) from exc
    sigma = smallest_eigenvalue(lu, N)
    if sigma < eigen_band * lam**2:
        raise EigenvalueProximityError(
            f"lam^2 = {lam**2:.6g} lies within {sigma:.3g} of a discrete Dirichlet eigenvalue "
            f"(band {eigen_band:g}*lam^2); the interior problem is not uniquely solvable"
        )
    rhs = np.full(N, -lam**2)
    w = lu.solve(rhs)
    res = float(np.abs(A @ w - rhs).max() / lam**2)
    vals = np.full((grid.n, grid.n), np.nan)
    vals[inside] = 1.0 + w[idx[inside]]
    rep = InteriorSolveReport(float(lam), int(N), res, sigma, eigen_band)
    log.info("interior solution: %d unknowns, smallest |eig| %.4g", N, sigma)
    return ScalarField(grid, vals, mask=inside, role="v",
                       meta={"boundary_value": 1.0, "report": rep.to_dict()})


# -- Runge fitting -----------------------------------------------------------------

@dataclass
class FitReport:
    lam: float
    M_requested: int
    M_used: int
    trimmed_modes: list
    ridge: float
    residual: float
    boundary_min: float
    boundary_min_location: list
    positive_on_boundary: bool
    n_interior: int
    n_boundary: int
    boundary_weight: float
    notices: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _design(points, lam, M, center):
    r, th = _polar(np.asarray(points, dtype=float) - np.asarray(center))
    J = bessel_j_all(M, lam * r)
    cols = [J[0]]
    labels = [("a", 0)]
    for m in range(1, M + 1):
        cols += [J[m] * np.cos(m * th), J[m] * np.sin(m * th)]
        labels += [("a", m), ("b", m)]
    return np.stack(cols, axis=-1), labels


def runge_fit(target, lam, M, ridge=0.0, domain=None, n_boundary=256, boundary_weight=10.0,
              center=(0.0, 0.0)):
    """Least-squares Fourier-Bessel fit of a local Helmholtz solution.

    Parameters
    ----------
    target : ScalarField or callable
        Samples on ``D`` (masked field) or a function of points.
    lam : float
    M : int
        Mode cutoff; modes whose columns are numerically zero over the
        collocation set are trimmed with a notice.
    ridge : float
        Tikhonov weight on the coefficient vector.
    domain : Domain, optional
        Supplies boundary collocation nodes (weight ``boundary_weight``)
        and the curve on which positivity is reported.  Boundary targets
        are ``target.meta["boundary_value"]`` for fields, or the callable.

    Returns
    -------
    RealHelmholtzExpansion, FitReport
    """
    if M < 0 or M > 60:
        raise ValueError("mode cutoff must lie in [0, 60]")
    pts_list, vals_list, w_list = [], [], []
    if isinstance(target, ScalarField):
        mask = target.mask if target.mask is not None else np.isfinite(target.values)
        P = target.grid.points()[mask]
        pts_list.append(P)
        vals_list.append(np.real(target.values[mask]))
        w_list.append(np.ones(len(P)))
        bval = target.meta.get("boundary_value")
    else:
        bval = None
    bn = None
    if domain is not None:
        bn = domain.boundary_nodes(n_boundary)
        if callable(target) and not isinstance(target, ScalarField):
            if not pts_list:
                X, Y = np.meshgrid(np.linspace(*domain.bbox[:2], 40), np.linspace(*domain.bbox[2:], 40),
                                   indexing="ij")
                P = np.stack([X, Y], -1).reshape(-1, 2)
                P = P[domain.inside(P)]
                pts_list.append(P)
                vals_list.append(np.real(target(P)))
                w_list.append(np.ones(len(P)))
            pts_list.append(bn.points)
            vals_list.append(np.real(target(bn.points)))
            w_list.append(np.full(len(bn.points), boundary_weight))
        elif bval is not None:
            pts_list.append(bn.points)
            vals_list.append(np.full(len(bn.points), float(bval)))
            w_list.append(np.full(len(bn.points), boundary_weight))
    if not pts_list:
        raise ValueError("callable targets need a domain for collocation")
    P = np.concatenate(pts_list)
    y = np.concatenate(vals_list)
    sw = np.sqrt(np.concatenate(w_list))

    notices = []
    A, labels = _design(P, lam, M, center)
    norms = np.linalg.norm(A, axis=0)
    keep = norms > 1e-14 * norms.max()
    trimmed = sorted({m for (k, m), kp in zip(labels, keep) if not kp})
    M_used = M
    if trimmed:
        M_used = min(trimmed) - 1
        notices.append(f"modes >= {min(trimmed)} underflow over the collocation set and were trimmed")
        log.warning(notices[-1])
        A, labels = _design(P, lam, M_used, center)
        norms = np.linalg.norm(A, axis=0)

    Aw = A * sw[:, None] / norms
    yw = y * sw
    if ridge > 0:
        Aw = np.vstack([Aw, np.sqrt(ridge) * np.diag(1.0 / norms)])
        yw = np.concatenate([yw, np.zeros(A.shape[1])])
    sol, *_ = np.linalg.lstsq(Aw, yw, rcond=1e-15)
    coef = sol / norms

    a = np.zeros(M_used + 1)
    b = np.zeros(M_used + 1)
    for (kind, m), c in zip(labels, coef):
        (a if kind == "a" else b)[m] = c
    wave = RealHelmholtzExpansion(lam, a, b, center)

    fit = A @ coef
    residual = float(np.linalg.norm(sw * (fit - y)) / max(np.linalg.norm(sw * y), 1e-300))
    if bn is not None:
        ub = wave(bn.points)
        k = int(np.argmin(ub))
        bmin, bloc = float(ub[k]), bn.points[k].tolist()
    else:
        bmin, bloc = float("nan"), []
    report = FitReport(
        lam=float(lam), M_requested=int(M), M_used=int(M_used), trimmed_modes=trimmed,
        ridge=float(ridge), residual=residual, boundary_min=bmin, boundary_min_location=bloc,
        positive_on_boundary=bool(bmin > 0), n_interior=int(len(P) - (0 if bn is None else len(pts_list[-1]))),
        n_boundary=0 if bn is None else len(bn.points), boundary_weight=float(boundary_weight),
        notices=notices,
    )
    return wave, report


# -- zero balls --------------------------------------------------------------------

@dataclass
class ZeroBallReport:
    lam: float
    radii: list
    n_centers: int
    sign_free_counts: list
    largest_sign_free_radius: float
    all_balls_change_sign: dict

    def to_dict(self):
        return dict(self.__dict__)


def _ball_samples(r, n_radial=48, n_angular=192):
    rho = r * np.sqrt((np.arange(n_radial) + 1.0) / n_radial)
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    pts = np.stack([np.outer(rho, np.cos(th)), np.outer(rho, np.sin(th))], -1).reshape(-1, 2)
    return np.vstack([[0.0, 0.0], pts])


def zero_ball_scan(u, window, lam, radii, centers_per_axis=5, n_radial=48, n_angular=192):
    """Look for balls in which the real wave ``u`` keeps one sign.

    Ball centers run over a ``centers_per_axis`` square grid of the
    window ``(xmin, xmax, ymin, ymax)``; each ball is sampled on a polar
    grid (center, ``n_radial`` rings out to the rim).  A ball "has a zero"
    when the samples change sign.

    Returns
    -------
    ZeroBallReport
        ``largest_sign_free_radius`` is the largest tested radius for
        which some ball kept a single sign (0.0 if none did).
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    radii = [float(r) for r in np.atleast_1d(radii)]
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    x0, x1, y0, y1 = window
    cx = np.linspace(x0, x1, centers_per_axis)
    cy = np.linspace(y0, y1, centers_per_axis)
    centers = np.stack(np.meshgrid(cx, cy, indexing="ij"), -1).reshape(-1, 2)
    counts, flags = [], {}
    largest = 0.0
    for r in radii:
        offs = _ball_samples(r, n_radial, n_angular)
        free = 0
        for c in centers:
            vals = np.real(u(c + offs))
            if not (vals.min() < 0 < vals.max()):
                free += 1
        counts.append(free)
        flags[f"{r:.12g}"] = free == 0
        if free:
            largest = max(largest, r)
    return ZeroBallReport(float(lam), radii, len(centers), counts, largest, flags)


# -- orthogonality at the first eigenvalue ----------------------------------------

@dataclass
class OrthogonalityReport:
    integral: float
    sign_changes: int
    lam: float
    radius: float

    def to_dict(self):
        return dict(self.__dict__)


def eigen_orthogonality_check(domain, u0, n_boundary=4096, helmholtz_tol=1e-4):
    """``oint_{dD} u0 d_nu v dS`` with ``v = J_0(lam r)`` the first Dirichlet mode.

    ``domain`` is a disk ``B(0, R)`` and ``lam = c_2 / R``; ``u0`` must
    solve ``(Laplacian + lam^2) u0 = 0`` (checked by a five-point residual
    at a few points), otherwise the input is rejected.  Also counts the
    sign changes of ``u0`` around ``dD``.
    """
    if getattr(domain, "kind", None) != "disk":
        raise ValueError("the orthogonality check is implemented for disks only")
    R = domain.radius
    lam = C2 / R
    c = np.asarray(domain.center, dtype=float)
    probe = c + R * np.array([[0.0, 0.0], [0.3, 0.1], [-0.5, 0.4], [0.2, -0.7], [0.9, 0.0]])
    res = helmholtz_residual(u0, probe, lam)
    if res > helmholtz_tol:
        raise ValueError(
            f"u0 is not a Helmholtz solution at lam = c2/R (relative residual {res:.2e})"
        )
    t = 2 * np.pi * np.arange(n_boundary) / n_boundary
    pts = c + R * np.stack([np.cos(t), np.sin(t)], -1)
    ub = np.real(u0(pts))
    dnv = -lam * bessel_j(1, C2)
    integral = float(np.sum(ub) * dnv * R * 2 * np.pi / n_boundary)
    s = np.sign(ub)
    s = s[s != 0]
    changes = int(np.sum(s != np.roll(s, 1))) if len(s) else 0
    return OrthogonalityReport(integral, changes, float(lam), float(R))
