"""Uniform square grids and fields sampled on them."""

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid2:
    """``n x n`` nodes on the square ``[xmin, xmin + side] x [ymin, ymin + side]``.

    Node ``(i, j)`` sits at ``(x[i], y[j])``; arrays on the grid are indexed
    ``values[i, j]``.
    """

    xmin: float
    ymin: float
    side: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 nodes per axis")
        if not self.side > 0:
            raise ValueError("grid side must be positive")

    @classmethod
    def centered(cls, center, half_width, n):
        return cls(center[0] - half_width, center[1] - half_width, 2.0 * half_width, n)

    @property
    def spacing(self):
        return self.side / (self.n - 1)

    @property
    def x(self):
        return self.xmin + self.spacing * np.arange(self.n)

    @property
    def y(self):
        return self.ymin + self.spacing * np.arange(self.n)

    @property
    def bbox(self):
        return (self.xmin, self.xmin + self.side, self.ymin, self.ymin + self.side)

    def points(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def refined(self):
        """Same box with the spacing halved."""
        return Grid2(self.xmin, self.ymin, self.side, 2 * self.n - 1)

    def nearest_index(self, p):
        p = np.asarray(p, dtype=float)
        i = np.rint((p[..., 0] - self.xmin) / self.spacing).astype(int)
        j = np.rint((p[..., 1] - self.ymin) / self.spacing).astype(int)
        return i, j

    def contains(self, p):
        x0, x1, y0, y1 = self.bbox
        p = np.asarray(p, dtype=float)
        return (p[..., 0] >= x0) & (p[..., 0] <= x1) & (p[..., 1] >= y0) & (p[..., 1] <= y1)

    def to_dict(self):
        return {"xmin": self.xmin, "ymin": self.ymin, "side": self.side, "n": self.n}


@dataclass
class ScalarField:
    """Samples of a real or complex function on a :class:`Grid2`.

    ``mask`` marks the nodes where the samples are meaningful (``None``
    means everywhere).  ``role`` is a free-form tag such as ``"u0"``,
    ``"uq"``, ``"h"`` or ``"q"``.
    """

    grid: Grid2
    values: np.ndarray
    mask: np.ndarray = None
    role: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.n}x{self.grid.n}"
            )
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    def to_csv(self, path, column="value"):
        """Write ``x, y, value`` rows (``re``/``im`` columns for complex data)."""
        pts = self.grid.points().reshape(-1, 2)
        vals = self.values.reshape(-1)
        keep = np.ones(vals.shape, bool) if self.mask is None else self.mask.reshape(-1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.is_complex:
                w.writerow(["x", "y", f"{column}_re", f"{column}_im"])
                for (x, y), v in zip(pts[keep], vals[keep]):
                    w.writerow([f"{x:.12g}", f"{y:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
            else:
                w.writerow(["x", "y", column])
                for (x, y), v in zip(pts[keep], vals[keep]):
                    w.writerow([f"{x:.12g}", f"{y:.12g}", f"{v:.12g}"])


def laplacian5(values, spacing):
    """Five-point Laplacian on interior nodes; the 1-node frame is NaN."""
    out = np.full(values.shape, np.nan, dtype=np.result_type(values, float))
    out[1:-1, 1:-1] = (
        values[2:, 1:-1] + values[:-2, 1:-1] + values[1:-1, 2:] + values[1:-1, :-2]
        - 4.0 * values[1:-1, 1:-1]
    ) / spacing**2
    return out
