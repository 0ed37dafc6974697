"""Minimal SVG 1.1 renderings (convenience output only)."""

from xml.sax.saxutils import escape

import numpy as np

_HEAD = ('<?xml version="1.0" encoding="UTF-8"?>\n'
         '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
         'viewBox="0 0 {w} {h}">\n<rect width="{w}" height="{h}" fill="white"/>\n')


def _path(xs, ys, close=False):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    tag = "polygon" if close else "polyline"
    return f'<{tag} points="{pts}" fill="none" stroke="{{color}}" stroke-width="1.5"/>\n'


def polar_svg(path, theta, radius, title=""):
    """Polar line plot of ``radius(theta)``."""
    size, c = 400, 200
    rmax = float(np.max(radius)) if np.max(radius) > 0 else 1.0
    scale = 170.0 / rmax
    xs = c + scale * radius * np.cos(theta)
    ys = c - scale * radius * np.sin(theta)
    out = [_HEAD.format(w=size, h=size)]
    for f in (0.5, 1.0):
        out.append(f'<circle cx="{c}" cy="{c}" r="{170 * f:.1f}" fill="none" stroke="#ccc"/>\n')
    out.append(_path(xs, ys, close=True).format(color="#1f5fa8"))
    out.append(f'<text x="10" y="20" font-size="13">{escape(title)} (max {rmax:.3e})</text>\n')
    out.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(out))


def curves_svg(path, curves, title="", equal=True):
    """Overlay of ``[(label, xy array, color), ...]`` polylines."""
    allpts = np.vstack([np.asarray(c[1]) for c in curves if len(c[1])])
    x0, y0 = allpts.min(0)
    x1, y1 = allpts.max(0)
    w, h = 420, 420
    sx = 380.0 / max(x1 - x0, 1e-300)
    sy = 380.0 / max(y1 - y0, 1e-300)
    if equal:
        sx = sy = min(sx, sy)
    out = [_HEAD.format(w=w, h=h)]
    for label, xy, color in curves:
        xy = np.asarray(xy)
        if not len(xy):
            continue
        X = 20 + sx * (xy[:, 0] - x0)
        Y = h - 20 - sy * (xy[:, 1] - y0)
        if len(xy) > 1:
            out.append(_path(X, Y).format(color=color))
        else:
            out.append(f'<circle cx="{X[0]:.2f}" cy="{Y[0]:.2f}" r="2" fill="{color}"/>\n')
    y = 18
    out.append(f'<text x="10" y="{y}" font-size="13">{escape(title)}</text>\n')
    for label, _, color in curves:
        y += 15
        out.append(f'<text x="10" y="{y}" font-size="11" fill="{color}">{escape(label)}</text>\n')
    out.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(out))


def field_svg(path, values, title="", cells=96):
    """Heat map of a real 2D array (downsampled to at most ``cells`` per side)."""
    v = np.asarray(values, dtype=float)
    step = max(1, int(np.ceil(v.shape[0] / cells)))
    v = v[::step, ::step]
    finite = np.isfinite(v)
    lo = float(v[finite].min()) if finite.any() else 0.0
    hi = float(v[finite].max()) if finite.any() else 1.0
    span = hi - lo if hi > lo else 1.0
    px = 4
    n0, n1 = v.shape
    out = [_HEAD.format(w=n0 * px, h=n1 * px + 24)]
    for i in range(n0):
        for j in range(n1):
            if not finite[i, j]:
                continue
            t = (v[i, j] - lo) / span
            r, b = int(255 * t), int(255 * (1 - t))
            out.append(f'<rect x="{i * px}" y="{(n1 - 1 - j) * px + 24}" width="{px}" height="{px}" '
                       f'fill="rgb({r},64,{b})"/>\n')
    out.append(f'<text x="4" y="16" font-size="12">{escape(title)} [{lo:.3g}, {hi:.3g}]</text>\n')
    out.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(out))
