"""Scattering solvers used to check non-scattering independently of the construction.

* :func:`lippmann_schwinger_solve` - ``u = u0 + Phi_lam * (q u)`` on a
  uniform grid, FFT convolution, GMRES.
* :func:`far_field` - ``u^inf(t) = C(lam) int e^{-i lam t.y} q u dy`` with
  ``C(lam) = e^{i pi/4} / sqrt(8 pi lam)``.
* :func:`dirichlet_verify` - five-point solve of ``(Laplacian + lam^2 + q) u = 0``
  in a box with ``u = u0`` on the box boundary, compared with the ``q = 0``
  solve through the Neumann data.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid2, ScalarField, laplacian5
from .specialfun import HELMHOLTZ_KERNEL_TAG, bessel_j_all, hankel1_all

log = logging.getLogger(__name__)

FAR_FIELD_TAG = "u_inf(t) = e^{i pi/4}/sqrt(8 pi lam) * int e^{-i lam t.y} q(y) u(y) dy"


class SolverNonConvergence(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


class DiscreteEigenvalueError(RuntimeError):
    """``lam^2 + q`` sits at a Dirichlet eigenvalue of the discrete box problem."""


def far_field_constant(lam):
    return np.exp(0.25j * np.pi) / math.sqrt(8.0 * math.pi * lam)


def self_cell_weight(lam, s):
    """``int Phi_lam`` over the disk of area ``s^2`` centered at the origin."""
    a = s / math.sqrt(math.pi)
    h1 = complex(hankel1_all(1, np.array(lam * a))[1])
    return 1j * math.pi * a / (2.0 * lam) * h1 - 1.0 / lam**2


def _as_grid_values(q, grid):
    if hasattr(q, "q_averaged"):
        return np.asarray(q.q_averaged(grid))
    if isinstance(q, ScalarField):
        if q.grid != grid:
            raise ValueError("q is sampled on a different grid")
        return np.asarray(q.values)
    q = np.asarray(q)
    if q.shape != (grid.n, grid.n):
        raise ValueError("q must match the grid")
    return q


@dataclass
class SolveReport:
    iterations: int
    residual: float
    grid: dict
    lam: float
    wall_time: float
    converged: bool
    history: list = field(default_factory=list)

    def to_dict(self, include_time=True):
        d = dict(self.__dict__)
        if not include_time:
            d.pop("wall_time")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


class LSOperator:
    """Matrix-free ``u -> u - K(q u)`` with ``K`` the discretized ``Phi_lam`` convolution."""

    def __init__(self, grid, lam, qv):
        n = grid.n
        s = grid.spacing
        self.n = n
        self.qv = qv
        k = np.arange(-(n - 1), n)
        X, Y = np.meshgrid(k * s, k * s, indexing="ij")
        r = np.hypot(X, Y)
        r[n - 1, n - 1] = 1.0
        ker = 0.25j * hankel1_all(0, lam * r)[0] * s**2
        ker[n - 1, n - 1] = self_cell_weight(lam, s)
        big = np.zeros((2 * n, 2 * n), dtype=complex)
        # offsets -(n-1)..(n-1) placed cyclically in a 2n x 2n array
        idx = np.mod(k, 2 * n)
        big[np.ix_(idx, idx)] = ker
        self.ker_hat = np.fft.fft2(big)

    def convolve(self, f):
        n = self.n
        pad = np.zeros((2 * n, 2 * n), dtype=complex)
        pad[:n, :n] = f
        return np.fft.ifft2(np.fft.fft2(pad) * self.ker_hat)[:n, :n]

    def apply(self, u):
        return u - self.convolve(self.qv * u)


def lippmann_schwinger_solve(q, lam, u0, grid, rtol=1e-8, restart=50, max_iter=500):
    """Solve ``u = u0 + Phi_lam * (q u)`` on ``grid``.

    Parameters
    ----------
    q : ScalarField, array or construction
        Potential at the grid nodes (a construction object is averaged
        over dual cells cut by its boundary).
    lam : float
        Wavenumber; ``lam * spacing <= 0.5`` is required.
    u0 : callable
        Incident wave evaluated at grid nodes.

    Returns
    -------
    (ScalarField, SolveReport)

    Raises
    ------
    SolverNonConvergence
        If GMRES does not reach ``rtol`` within ``max_iter`` inner iterations.
    """
    if not lam > 0:
        raise ValueError("the Lippmann-Schwinger solver needs lam > 0")
    s = grid.spacing
    if lam * s > 0.5:
        raise ValueError(f"grid too coarse: lam * spacing = {lam * s:.3f} > 0.5")
    qv = _as_grid_values(q, grid).astype(complex)
    if np.any(qv[[0, -1], :] != 0) or np.any(qv[:, [0, -1]] != 0):
        raise ValueError("supp q must lie strictly inside the grid box")
    t0 = time.perf_counter()
    pts = grid.points()
    u0v = np.asarray(u0(pts), dtype=complex)
    n = grid.n
    if not np.any(qv):
        rep = SolveReport(0, 0.0, grid.to_dict(), float(lam), time.perf_counter() - t0, True, [])
        return ScalarField(grid, u0v.copy(), role="uq"), rep

    op = LSOperator(grid, lam, qv)
    A = spla.LinearOperator((n * n, n * n), matvec=lambda x: op.apply(x.reshape(n, n)).ravel(),
                            dtype=complex)
    b = u0v.ravel()
    history = []
    bnorm = np.linalg.norm(b)

    def cb(pr_norm):
        history.append(float(pr_norm))

    x, info = spla.gmres(A, b, x0=b.copy(), rtol=rtol, atol=0.0, restart=restart,
                         maxiter=int(math.ceil(max_iter / restart)), callback=cb,
                         callback_type="pr_norm")
    res = float(np.linalg.norm(A.matvec(x) - b) / bnorm)
    rep = SolveReport(len(history), res, grid.to_dict(), float(lam), time.perf_counter() - t0,
                      info == 0 and res <= 10 * rtol, history)
    if not rep.converged:
        raise SolverNonConvergence(
            f"GMRES stopped after {len(history)} iterations at relative residual {res:.3e}", history
        )
    log.info("LS solve: %d iterations, residual %.2e", rep.iterations, res)
    return ScalarField(grid, x.reshape(n, n), role="uq",
                       meta={"q": qv, "kernel": HELMHOLTZ_KERNEL_TAG}), rep


def scattered_field_at(points, q, u_q, lam):
    """``Phi_lam * (q u)`` at points away from ``supp q`` (kernel representation)."""
    grid = u_q.grid
    qv = _as_grid_values(q, grid)
    pts = grid.points()
    nz = qv != 0
    Y = pts[nz]
    dens = (qv * u_q.values)[nz] * grid.spacing**2
    P = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(P), dtype=complex)
    for i, p in enumerate(P):
        r = np.hypot(p[0] - Y[:, 0], p[1] - Y[:, 1])
        out[i] = np.sum(0.25j * hankel1_all(0, lam * r)[0] * dens)
    return out


@dataclass
class FarField:
    lam: float
    angles: np.ndarray
    values: np.ndarray
    tag: str = FAR_FIELD_TAG

    def __post_init__(self):
        if len(self.angles) < 64:
            raise ValueError("far field needs at least 64 directions")

    @property
    def max_abs(self):
        return float(np.abs(self.values).max())

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,re,im,abs\n")
            for t, v in zip(self.angles, self.values):
                fh.write(f"{t:.12g},{v.real:.12g},{v.imag:.12g},{abs(v):.12g}\n")

    def to_svg(self, path, title="far field |u_inf|"):
        from .plots import polar_svg

        polar_svg(path, self.angles, np.abs(self.values), title)


def far_field(q, u_q, lam, K=256):
    """Far field pattern on ``K`` equispaced directions (grid midpoint rule)."""
    if K < 64:
        raise ValueError("K must be at least 64")
    grid = u_q.grid
    qv = _as_grid_values(q, grid)
    theta = 2 * np.pi * np.arange(K) / K
    nz = qv != 0
    if not np.any(nz):
        return FarField(float(lam), theta, np.zeros(K, dtype=complex))
    Y = grid.points()[nz]
    dens = (qv * u_q.values)[nz] * grid.spacing**2
    dirs = np.stack([np.cos(theta), np.sin(theta)], -1)
    vals = far_field_constant(lam) * (np.exp(-1j * lam * dirs @ Y.T) @ dens)
    return FarField(float(lam), theta, vals)


# -- box Dirichlet problem --------------------------------------------------------

def _box_system(grid, lam, qv):
    """Five-point ``Laplacian + lam^2 + q`` on interior nodes."""
    n = grid.n
    m = n - 2
    s = grid.spacing
    T = sp.diags([np.ones(m - 1), -2 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / s**2
    I = sp.identity(m)
    L = sp.kron(T, I) + sp.kron(I, T)
    A = L + sp.diags((lam**2 + qv[1:-1, 1:-1]).ravel())
    return sp.csc_matrix(A)


def _box_rhs(grid, bvals):
    """Right-hand side carrying the boundary values to the first interior ring."""
    s = grid.spacing
    rhs = np.zeros((grid.n - 2, grid.n - 2), dtype=bvals.dtype)
    rhs[0, :] -= bvals[0, 1:-1]
    rhs[-1, :] -= bvals[-1, 1:-1]
    rhs[:, 0] -= bvals[1:-1, 0]
    rhs[:, -1] -= bvals[1:-1, -1]
    return rhs.ravel() / s**2


def _solve_box(grid, lam, qv, bvals, check_band):
    A = _box_system(grid, lam, qv)
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise DiscreteEigenvalueError("singular box operator: eigenvalue of the discrete problem") from exc
    if check_band is not None:
        from .incident import smallest_eigenvalue

        sigma = smallest_eigenvalue(lu, A.shape[0])
        scale = max(lam**2, float(np.abs(qv).max()), 1.0 / grid.side**2)
        if sigma < check_band * scale:
            raise DiscreteEigenvalueError(
                f"lam^2 + q is within {sigma:.3g} of a discrete Dirichlet eigenvalue of the box"
            )
    U = bvals.copy()
    rhs = _box_rhs(grid, bvals)
    if np.iscomplexobj(rhs):
        sol = lu.solve(rhs.real.astype(float)) + 1j * lu.solve(rhs.imag.astype(float))
    else:
        sol = lu.solve(rhs)
    U[1:-1, 1:-1] = sol.reshape(grid.n - 2, grid.n - 2)
    return U


def normal_derivative(U, spacing):
    """Outward one-sided second-order normal derivatives on the four sides (corners excluded)."""
    s = spacing
    left = -(-3 * U[0, 1:-1] + 4 * U[1, 1:-1] - U[2, 1:-1]) / (2 * s)
    right = (3 * U[-1, 1:-1] - 4 * U[-2, 1:-1] + U[-3, 1:-1]) / (2 * s)
    bottom = -(-3 * U[1:-1, 0] + 4 * U[1:-1, 1] - U[1:-1, 2]) / (2 * s)
    top = (3 * U[1:-1, -1] - 4 * U[1:-1, -2] + U[1:-1, -3]) / (2 * s)
    return np.concatenate([left, right, bottom, top])


@dataclass
class DirichletReport:
    mismatch: float
    numerator: float
    denominator: float
    denominator_kind: str
    lam: float
    grid: dict
    exterior_max_difference: float = None

    def to_dict(self):
        return dict(self.__dict__)


def dirichlet_verify(q, lam, u0, grid, eigen_band=1e-3, domain=None, return_fields=False):
    """Relative mismatch of the Neumann data of ``u_q`` and ``u0`` on the box boundary.

    Both ``(Laplacian_h + lam^2 + q) U_q = 0`` and
    ``(Laplacian_h + lam^2) U_0 = 0`` are solved with ``U = u0`` on the
    boundary of the grid box, so ``q = 0`` reproduces ``U_0`` exactly.
    The mismatch is ``rms(d_nu U_q - d_nu U_0) / D`` where ``D`` is the rms
    of ``d_nu U_0`` or, if larger, ``rms(u0) / side`` (a constant incident
    wave has vanishing Neumann data).

    With ``domain`` given, the report also carries
    ``max |U_q - U_0|`` over nodes outside the domain.
    """
    qv = _as_grid_values(q, grid)
    if np.iscomplexobj(qv):
        qv = qv.real if not np.any(qv.imag) else qv
    pts = grid.points()
    b = np.asarray(u0(pts))
    bvals = np.zeros_like(b)
    bvals[[0, -1], :] = b[[0, -1], :]
    bvals[:, [0, -1]] = b[:, [0, -1]]
    Uq = _solve_box(grid, lam, qv, bvals, eigen_band)
    U0 = _solve_box(grid, lam, np.zeros_like(qv), bvals, eigen_band if lam > 0 else None)
    dq = normal_derivative(Uq, grid.spacing)
    d0 = normal_derivative(U0, grid.spacing)
    rms = lambda a: float(np.sqrt(np.mean(np.abs(a) ** 2)))
    num = rms(dq - d0)
    dn = rms(d0)
    dv = rms(np.concatenate([b[0, 1:-1], b[-1, 1:-1], b[1:-1, 0], b[1:-1, -1]])) / grid.side
    den, kind = (dn, "neumann") if dn >= dv else (dv, "value/side")
    ext = None
    if domain is not None:
        out = ~domain.inside(pts)
        out[[0, -1], :] = False
        out[:, [0, -1]] = False
        ext = float(np.abs(Uq - U0)[out].max())
    rep = DirichletReport(num / den, num, den, kind, float(lam), grid.to_dict(), ext)
    if return_fields:
        return rep, ScalarField(grid, Uq, role="uq"), ScalarField(grid, U0, role="u0")
    return rep


def residual_check(u, q=None, lam=0.0, exclude=None):
    """Sup over interior nodes (1-cell frame excluded) of ``|(Laplacian_h + lam^2 + q) u|``.

    ``exclude`` is an optional boolean node mask left out of the sup, e.g.
    a band around a jump of ``q`` where ``u`` is only ``C^1``.
    """
    grid = u.grid
    qv = 0.0 if q is None else _as_grid_values(q, grid)
    r = np.abs(laplacian5(u.values, grid.spacing) + (lam**2 + qv) * u.values)
    if exclude is not None:
        r = np.where(exclude, 0.0, r)
    return float(np.nanmax(r[1:-1, 1:-1]))


# -- reference solutions ----------------------------------------------------------

def square_fraction(grid, side, center=(0.0, 0.0)):
    """Area fraction of each node's dual cell covered by an axis-aligned square."""
    s = grid.spacing
    lo_x, hi_x = center[0] - side / 2, center[0] + side / 2
    lo_y, hi_y = center[1] - side / 2, center[1] + side / 2
    fx = np.clip(np.minimum(grid.x + s / 2, hi_x) - np.maximum(grid.x - s / 2, lo_x), 0, None) / s
    fy = np.clip(np.minimum(grid.y + s / 2, hi_y) - np.maximum(grid.y - s / 2, lo_y), 0, None) / s
    return np.outer(fx, fy)


def disk_fraction(grid, radius, center=(0.0, 0.0), sub=8):
    """Area fraction of dual cells covered by a disk (subsampled on cut cells)."""
    pts = grid.points() - np.asarray(center)
    s = grid.spacing
    r = np.hypot(pts[..., 0], pts[..., 1])
    frac = (r < radius).astype(float)
    cut = np.abs(r - radius) < s
    if cut.any():
        t = (np.arange(sub) + 0.5) / sub - 0.5
        dx, dy = np.meshgrid(t * s, t * s, indexing="ij")
        P = pts[cut][:, None, :] + np.stack([dx.ravel(), dy.ravel()], -1)[None]
        frac[cut] = (np.hypot(P[..., 0], P[..., 1]) < radius).mean(axis=1)
    return frac


@dataclass(frozen=True)
class PenetrableDiskSeries:
    """Plane wave ``e^{i lam x_1}`` scattered by ``q = c chi_{B(0,R)}``, by mode matching."""

    lam: float
    c: float
    R: float = 1.0
    M: int = 20

    def _coeffs(self):
        lam, R, M = self.lam, self.R, self.M
        k = math.sqrt(lam**2 + self.c)
        Jl = bessel_j_all(M + 1, np.array(lam * R))
        Jk = bessel_j_all(M + 1, np.array(k * R))
        H = hankel1_all(M + 1, np.array(lam * R))
        d = lambda F, m: -F[1] if m == 0 else 0.5 * (F[m - 1] - F[m + 1])
        a, b = {}, {}
        for m in range(0, M + 1):
            inc, dinc = (1j**m) * Jl[m], (1j**m) * lam * d(Jl, m)
            # a Jk = inc + b H ; a k Jk' = dinc + b lam H'
            A = np.array([[Jk[m], -H[m]], [k * d(Jk, m), -lam * d(H, m)]])
            am, bm = np.linalg.solve(A, np.array([inc, dinc]))
            a[m], b[m] = am, bm
            a[-m], b[-m] = am, bm  # symmetric in m for e^{i lam x_1}
        return k, a, b

    def total_field(self, points):
        k, a, b = self._coeffs()
        p = np.asarray(points, dtype=float)
        r = np.hypot(p[..., 0], p[..., 1])
        th = np.arctan2(p[..., 1], p[..., 0])
        M = self.M
        Jk = bessel_j_all(M, k * r)
        Jl = bessel_j_all(M, self.lam * r)
        H = hankel1_all(M, self.lam * np.maximum(r, 1e-300))
        inside = r < self.R
        out = np.zeros(r.shape, dtype=complex)
        for m in range(-M, M + 1):
            e = np.exp(1j * m * th)
            am = abs(m)
            out += np.where(inside, a[m] * Jk[am] * e, ((1j**am) * Jl[am] + b[m] * H[am]) * e)
        return out

    def far_field(self, theta):
        _, _, b = self._coeffs()
        th = np.asarray(theta, dtype=float)
        s = sum(b[m] * (-1j) ** abs(m) * np.exp(1j * m * th) for m in range(-self.M, self.M + 1))
        return math.sqrt(2.0 / (math.pi * self.lam)) * np.exp(-0.25j * math.pi) * s


def corner_control(lam, side, c, incident, n=128, K=256, margin=0.1):
    """``max |u^inf| / max |u0|`` for a square of constant contrast ``c``."""
    half = side / 2 + margin * side
    grid = Grid2.centered((0.0, 0.0), half, n)
    q = c * square_fraction(grid, side)
    u, rep = lippmann_schwinger_solve(q, lam, incident, grid)
    ff = far_field(q, u, lam, K)
    u0max = float(np.abs(incident(grid.points())).max())
    return ff.max_abs / u0max, ff, rep
