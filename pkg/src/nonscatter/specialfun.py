"""Bessel and Hankel functions, fundamental solutions and radial Helmholtz waves.

Everything here is built from scratch on numpy:

* ``J_m`` for integer orders comes from Miller's backward recurrence,
  normalized by ``J_0 + 2 * sum_k J_2k = 1``.  The recurrence is started
  far enough past ``max(m, x)`` that the truncation is below double
  precision, and rescaled on the way down so that tiny arguments do not
  overflow.
* ``Y_0`` and ``Y_1`` come from the Neumann series in the even/odd ``J``
  values produced by the same recurrence; higher orders use the forward
  recurrence, which is stable for ``Y``.
* ``J_{1/2}`` uses its closed form ``sqrt(2 / (pi x)) sin x``.

All array functions broadcast over ``x``.
"""

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061
MAX_ORDER = 60
HALF = 0.5

_RESCALE_ABOVE = 1e250
_RESCALE_BY = 1e-250
_SERIES_BELOW = 1e-8


def _check_x(x, strict=False):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise ValueError("Bessel argument must be finite")
    if strict and np.any(x <= 0):
        raise ValueError("argument must be > 0 (logarithmic singularity at 0)")
    if np.any(x < 0):
        raise ValueError("negative Bessel argument")
    return x


def _check_order(order, allow_half=True):
    if allow_half and order == HALF:
        return HALF
    if isinstance(order, (bool, np.bool_)):
        raise ValueError(f"unsupported Bessel order {order!r}")
    if float(order) != int(order) or not 0 <= int(order) <= MAX_ORDER:
        raise ValueError(f"unsupported Bessel order {order!r}")
    return int(order)


def _miller_start(max_order, xmax):
    n = max(max_order, xmax) + 10.0 * max(xmax, 1.0) ** (1.0 / 3.0) + 30.0
    n = int(math.ceil(n))
    return n + (n % 2)


def bessel_j_all(max_order, x):
    """Return ``J_0 .. J_{max_order}`` evaluated at ``x``.

    Parameters
    ----------
    max_order : int
        Highest order needed; orders above it are used internally only.
    x : array_like
        Nonnegative arguments.

    Returns
    -------
    ndarray, shape ``(max_order + 1,) + x.shape``
    """
    x = _check_x(x)
    jn, _ = _miller(max_order, x)
    return jn[: max_order + 1]


def _miller(max_order, x):
    """Backward recurrence; returns all orders up to the start index and
    the start index itself."""
    shape = x.shape
    xf = x.ravel()
    start = _miller_start(max_order, float(xf.max()) if xf.size else 0.0)
    out = np.zeros((start + 1, xf.size))
    # below this the two-term power series is exact in double precision and
    # a single recurrence step (factor 2n/x) would overflow
    zero = xf < _SERIES_BELOW
    xs = np.where(zero, 1.0, xf)

    nxt = np.zeros_like(xs)
    cur = np.full_like(xs, 1e-300)
    out[start] = cur
    norm = np.zeros_like(xs)
    for n in range(start, 0, -1):
        prev = (2.0 * n / xs) * cur - nxt
        out[n - 1] = prev
        if n - 1 > 0 and (n - 1) % 2 == 0:
            norm += 2.0 * prev
        nxt, cur = cur, prev
        big = np.abs(cur) > _RESCALE_ABOVE
        if np.any(big):
            out[n - 1 :, big] *= _RESCALE_BY
            norm[big] *= _RESCALE_BY
            nxt[big] *= _RESCALE_BY
            cur[big] *= _RESCALE_BY
    norm += out[0]
    out /= norm
    if np.any(zero):
        half = 0.5 * xf[zero]
        term = np.ones_like(half)
        for n in range(start + 1):
            if n:
                term = term * half / n
            out[n, zero] = term * (1.0 - half * half / (n + 1))
    return out.reshape((start + 1,) + shape), start


def bessel_j(order, x):
    """Bessel function of the first kind ``J_order(x)``.

    ``order`` is an integer in ``[0, 60]`` or the half-integer ``1/2``.
    Negative ``x`` is rejected.
    """
    order = _check_order(order)
    x = _check_x(x)
    if order == HALF:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(2.0 / (np.pi * x)) * np.sin(x)
        val = np.where(x == 0.0, 0.0, val)
        return val if val.ndim else float(val)
    val = bessel_j_all(order, x)[order]
    return val if val.ndim else float(val)


def bessel_j_derivative(order, x):
    """``J_m'(x)`` via ``(J_{m-1} - J_{m+1}) / 2`` and ``J_0' = -J_1``."""
    order = _check_order(order, allow_half=False)
    x = _check_x(x)
    j = bessel_j_all(order + 1, x)
    if order == 0:
        val = -j[1]
    else:
        val = 0.5 * (j[order - 1] - j[order + 1])
    return val if val.ndim else float(val)


def bessel_y_all(max_order, x):
    """Return ``Y_0 .. Y_{max_order}`` at ``x > 0``."""
    x = _check_x(x, strict=True)
    jn, start = _miller(max(max_order, 1), x)
    lg = np.log(0.5 * x) + EULER_GAMMA

    s0 = np.zeros_like(x)
    for k in range(1, start // 2 + 1):
        s0 += (-1) ** k * jn[2 * k] / k
    y0 = (2.0 / np.pi) * (lg * jn[0] - 2.0 * s0)

    # order-one Neumann series; psi(2) = 1 - gamma
    s1 = np.zeros_like(x)
    for k in range(1, (start - 1) // 2 + 1):
        s1 += (-1) ** k * (2 * k + 1) * jn[2 * k + 1] / (k * (k + 1.0))
    y1 = (2.0 / np.pi) * (-jn[0] / x + (lg - 1.0) * jn[1] - s1)

    ys = np.empty((max_order + 1,) + x.shape)
    ys[0] = y0
    if max_order >= 1:
        ys[1] = y1
    for m in range(1, max_order):
        ys[m + 1] = (2.0 * m / x) * ys[m] - ys[m - 1]
    return ys


def bessel_y(order, x):
    """Bessel function of the second kind ``Y_order(x)`` for ``x > 0``."""
    order = _check_order(order, allow_half=False)
    val = bessel_y_all(order, x)[order]
    return val if val.ndim else float(val)


def bessel_y_derivative(order, x):
    order = _check_order(order, allow_half=False)
    y = bessel_y_all(order + 1, x)
    val = -y[1] if order == 0 else 0.5 * (y[order - 1] - y[order + 1])
    return val if val.ndim else float(val)


def hankel1_all(max_order, x):
    """``H^{(1)}_m(x) = J_m(x) + i Y_m(x)`` for ``m = 0 .. max_order``."""
    x = _check_x(x, strict=True)
    return bessel_j_all(max_order, x) + 1j * bessel_y_all(max_order, x)


def hankel1(order, x):
    """Hankel function of the first kind; ``x`` must be positive."""
    order = _check_order(order, allow_half=False)
    val = hankel1_all(order, x)[order]
    return val if val.ndim else complex(val)


def hankel1_derivative(order, x):
    order = _check_order(order, allow_half=False)
    h = hankel1_all(order + 1, x)
    val = -h[1] if order == 0 else 0.5 * (h[order - 1] - h[order + 1])
    return val if val.ndim else complex(val)


def first_bessel_zero(order, tol=1e-15, return_widths=False):
    """First positive zero of ``J_order`` for ``order`` in ``{0, 1/2}``.

    This is the radius ``c_n`` below which a ball carries a positive
    Helmholtz solution (``c_2`` for order 0, ``c_3 = pi`` for order 1/2).
    Bisection on :func:`bessel_j`; with ``return_widths`` the sequence of
    bracket widths is returned as well.
    """
    if order not in (0, HALF):
        raise ValueError(f"first_bessel_zero supports orders 0 and 1/2, got {order!r}")
    lo, hi = (2.0, 3.0) if order == 0 else (3.0, 3.3)
    flo = bessel_j(order, lo)
    if flo * bessel_j(order, hi) >= 0:
        raise RuntimeError("bracket does not contain a sign change")
    widths = [hi - lo]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = bessel_j(order, mid)
        if fm == 0.0:
            lo = hi = mid
        elif (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        widths.append(hi - lo)
    root = 0.5 * (lo + hi)
    return (root, widths) if return_widths else root


C2 = first_bessel_zero(0)


@dataclass(frozen=True)
class FundamentalSolutionKind:
    """Which kernel to use: ``laplace`` (lam = 0) or ``helmholtz`` (outgoing)."""

    operator: str = "laplace"
    lam: float = 0.0

    def __post_init__(self):
        if self.operator not in ("laplace", "helmholtz"):
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.operator == "helmholtz" and not self.lam > 0:
            raise ValueError("outgoing Helmholtz kernel needs lam > 0")
        if self.operator == "laplace" and self.lam != 0:
            raise ValueError("laplace kernel has lam = 0")


# Convention tags echoed by outputs.
NEWTON_KERNEL_TAG = "N(x) = ln|x| / (2 pi), Laplacian N = +delta"
HELMHOLTZ_KERNEL_TAG = "Phi(x) = (i/4) H0^(1)(lam |x|), (Laplacian + lam^2) Phi = -delta"


def fundamental_solution(kind, x):
    """Evaluate the fundamental solution at 2D point(s) ``x`` (last axis = 2).

    The Laplace branch returns ``ln|x| / (2 pi)`` (so its Laplacian is
    ``+delta``); the Helmholtz branch returns ``(i/4) H_0^{(1)}(lam |x|)``
    whose ``(Laplacian + lam^2)`` is ``-delta``.
    """
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r == 0):
        raise ValueError("fundamental solution is singular at x = 0")
    if kind.operator == "laplace":
        return np.log(r) / (2.0 * np.pi) + 0j
    return 0.25j * hankel1_all(0, kind.lam * r)[0]


def radial_helmholtz(lam, r, dim=2):
    """Bounded radial solution of ``(Laplacian + lam^2) v = 0`` with ``v(0) = 1``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if dim == 2:
        return bessel_j(0, lam * np.asarray(r, dtype=float))
    if dim == 3:
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sin(lam * r) / (lam * r)
        val = np.where(r == 0, 1.0, val)
        return val if val.ndim else float(val)
    raise ValueError("only dim 2 (and the closed-form dim 3 case) are supported")
