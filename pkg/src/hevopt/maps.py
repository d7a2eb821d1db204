"""Gridded table lookups: exact piecewise-linear and C1-smoothed kernels.

Two surfaces are deliberately kept apart:

* :func:`interp1` / :func:`interp2` are exact piecewise-linear (bilinear)
  interpolants with clamped extrapolation.  They reproduce node values
  exactly and are what the dynamic-programming benchmark, the forward
  simulator and the feasibility mask evaluate.

* The ``*_c1`` kernels serve the NLP layer.  Inside a band of half-width
  ``width_frac * cell`` around each breakpoint the derivative is blended
  linearly between the adjacent cell slopes, which makes the *value* a
  quadratic there and the interpolant C1 overall.  Outside the bands the
  two surfaces agree identically.  ``width_frac = 0`` recovers the exact
  surface with one-sided derivatives at breakpoints.

Grids serialize to JSON as breakpoint lists plus row-major value lists;
floats survive the round trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid1D", "Grid2D", "interp1", "interp2", "interp1_c1", "interp2_c1"]


def _check_breaks(b, name):
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise ValueError(f"{name}: need at least two breakpoints")
    if not np.all(np.diff(b) > 0):
        raise ValueError(f"{name}: breakpoints must be strictly increasing")
    return b


@dataclass
class Grid1D:
    """Strictly increasing breakpoints with one value per breakpoint."""

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breaks = _check_breaks(self.breaks, "Grid1D")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.breaks.shape:
            raise ValueError("Grid1D: values shape must match breakpoints")

    def to_json(self) -> dict:
        return {"breaks": self.breaks.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Grid1D":
        return cls(np.asarray(obj["breaks"]), np.asarray(obj["values"]))


@dataclass
class Grid2D:
    """Rectangular grid; values[i, j] sits at (xbreaks[i], ybreaks[j])."""

    xbreaks: np.ndarray
    ybreaks: np.ndarray
    values: np.ndarray  # shape (nx, ny), row-major over x

    def __post_init__(self):
        self.xbreaks = _check_breaks(self.xbreaks, "Grid2D x")
        self.ybreaks = _check_breaks(self.ybreaks, "Grid2D y")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.xbreaks.size, self.ybreaks.size):
            raise ValueError("Grid2D: values shape must be (nx, ny)")

    def to_json(self) -> dict:
        return {
            "xbreaks": self.xbreaks.tolist(),
            "ybreaks": self.ybreaks.tolist(),
            "values": self.values.reshape(-1).tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Grid2D":
        xb = np.asarray(obj["xbreaks"], dtype=float)
        yb = np.asarray(obj["ybreaks"], dtype=float)
        vals = np.asarray(obj["values"], dtype=float).reshape(xb.size, yb.size)
        return cls(xb, yb, vals)


# ---------------------------------------------------------------------
# exact surfaces


def interp1(grid: Grid1D, x):
    """Piecewise-linear lookup with clamped extrapolation."""
    return np.interp(np.asarray(x, dtype=float), grid.breaks, grid.values)


def interp2(grid: Grid2D, x, y):
    """Bilinear lookup with clamped extrapolation on both axes."""
    xb, yb, v = grid.xbreaks, grid.ybreaks, grid.values
    x = np.clip(np.asarray(x, dtype=float), xb[0], xb[-1])
    y = np.clip(np.asarray(y, dtype=float), yb[0], yb[-1])
    i = np.clip(np.searchsorted(xb, x, side="right") - 1, 0, xb.size - 2)
    j = np.clip(np.searchsorted(yb, y, side="right") - 1, 0, yb.size - 2)
    tx = (x - xb[i]) / (xb[i + 1] - xb[i])
    ty = (y - yb[j]) / (yb[j + 1] - yb[j])
    return (
        v[i, j] * (1 - tx) * (1 - ty)
        + v[i + 1, j] * tx * (1 - ty)
        + v[i, j + 1] * (1 - tx) * ty
        + v[i + 1, j + 1] * tx * ty
    )


# ---------------------------------------------------------------------
# C1-smoothed kernels
#
# Corner blend on [xb - w, xb + w] with left/right slopes s1/s2:
#   y(t)   = v_b + (s1+s2)/2 t + (s2-s1)/(4w) t^2 + (s2-s1) w / 4
#   y'(t)  = (s1+s2)/2 + (s2-s1) t / (2w)          (linear blend)
#   y''(t) = (s2-s1) / (2w)
# matching the linear pieces in value and slope at t = +-w.


def _band_halfwidths(breaks, width_frac):
    cells = np.diff(breaks)
    w = np.empty(breaks.size)
    w[0] = cells[0]
    w[-1] = cells[-1]
    w[1:-1] = np.minimum(cells[:-1], cells[1:])
    return np.minimum(width_frac, 0.45) * w


def pwl_c1(breaks, values, q, width_frac):
    """Evaluate a C1-smoothed piecewise-linear curve.

    breaks: shared (nb,) breakpoints; values: (nb,) or per-query (S, nb).
    Returns (y, dy, d2y) arrays shaped like q.  Outside the domain the
    curve continues at the edge value (zero slope), with the edge corner
    blended like any other.
    """
    breaks = np.asarray(breaks, dtype=float)
    q = np.asarray(q, dtype=float)
    values = np.asarray(values, dtype=float)
    nb = breaks.size
    per_query = values.ndim == 2

    slopes_core = (
        (values[..., 1:] - values[..., :-1]) / np.diff(breaks)
        if not per_query
        else (values[:, 1:] - values[:, :-1]) / np.diff(breaks)
    )

    def node_val(idx):
        if per_query:
            return np.take_along_axis(values, idx[:, None], axis=1)[:, 0]
        return values[idx]

    def cell_slope(idx):
        # extended cells: -1 and nb-1 are flat (clamped extrapolation)
        inner = np.clip(idx, 0, nb - 2)
        s = (
            np.take_along_axis(slopes_core, inner[:, None], axis=1)[:, 0]
            if per_query
            else slopes_core[inner]
        )
        return np.where((idx < 0) | (idx > nb - 2), 0.0, s)

    i = np.searchsorted(breaks, q, side="right") - 1  # cell index, -1..nb-1
    i = np.clip(i, -1, nb - 1)

    # linear branch (also used as fallback outside bands)
    anchor = np.clip(i, 0, nb - 1)
    base = node_val(anchor)
    s_i = cell_slope(i)
    y = base + s_i * (q - breaks[anchor])
    dy = s_i.copy()
    d2y = np.zeros_like(y)

    if width_frac > 0.0:
        wb = _band_halfwidths(breaks, width_frac)
        # nearest breakpoint to q among {i, i+1} clipped into range
        left_b = np.clip(i, 0, nb - 1)
        right_b = np.clip(i + 1, 0, nb - 1)
        d_left = np.abs(q - breaks[left_b])
        d_right = np.abs(q - breaks[right_b])
        b = np.where(d_right < d_left, right_b, left_b)
        t = q - breaks[b]
        w = wb[b]
        in_band = np.abs(t) <= w
        if np.any(in_band):
            s1 = cell_slope(b - 1)
            s2 = cell_slope(b)
            vb = node_val(b)
            mid = 0.5 * (s1 + s2)
            half = 0.25 * (s2 - s1)
            y_b = vb + mid * t + half * t * t / w + half * w
            dy_b = mid + 2.0 * half * t / w
            d2_b = 2.0 * half / w
            y = np.where(in_band, y_b, y)
            dy = np.where(in_band, dy_b, dy)
            d2y = np.where(in_band, d2_b, d2y)
    return y, dy, d2y


def interp1_c1(grid: Grid1D, q, width_frac):
    return pwl_c1(grid.breaks, grid.values, q, width_frac)


def _local_breaks(breaks, j):
    """Four consecutive breakpoints around cell [j, j+1], padded flat."""
    nb = breaks.size
    cells = np.diff(breaks)
    xm1 = np.where(j - 1 >= 0, breaks[np.clip(j - 1, 0, nb - 1)], breaks[0] - cells[0])
    xp2 = np.where(j + 2 <= nb - 1, breaks[np.clip(j + 2, 0, nb - 1)], breaks[-1] + cells[-1])
    return xm1, breaks[j], breaks[j + 1], xp2


def interp2_c1(grid: Grid2D, qx, qy, width_frac):
    """C1-smoothed bilinear lookup.

    Smooths each axis independently (x first, then y over four local
    rows), so the surface is C1 in both coordinates.  Returns
    (f, fx, fy, fxx, fxy, fyy) shaped like the queries.
    """
    xb, yb, v = grid.xbreaks, grid.ybreaks, grid.values
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    shape = np.broadcast_shapes(qx.shape, qy.shape)
    qx = np.broadcast_to(qx, shape).reshape(-1)
    qy = np.broadcast_to(qy, shape).reshape(-1)
    ny = yb.size

    j = np.clip(np.searchsorted(yb, qy, side="right") - 1, 0, ny - 2)
    jm1 = np.clip(j - 1, 0, ny - 1)
    jp2 = np.clip(j + 2, 0, ny - 1)
    ym1, y0, y1, yp2 = _local_breaks(yb, j)

    # x-phase: smoothed 1-D curves along x for the four local rows
    g = np.empty((qx.size, 4))
    gx = np.empty_like(g)
    gxx = np.empty_like(g)
    for col, jj in enumerate((jm1, j, j + 1, jp2)):
        rows = v[:, jj].T  # (S, nx)
        g[:, col], gx[:, col], gxx[:, col] = pwl_c1(xb, rows, qx, width_frac)

    ylocal = np.stack([ym1, y0, y1, yp2], axis=1)  # (S, 4)

    f, fy, fyy = _local4(ylocal, g, qy, width_frac)
    fx, fxy, _ = _local4(ylocal, gx, qy, width_frac)
    fxx, _, _ = _local4(ylocal, gxx, qy, width_frac)
    return (
        f.reshape(shape),
        fx.reshape(shape),
        fy.reshape(shape),
        fxx.reshape(shape),
        fxy.reshape(shape),
        fyy.reshape(shape),
    )


def _local4(xloc, vloc, q, width_frac):
    """pwl_c1 over a per-query 4-point local grid; q is usually in the
    middle cell but may sit in the flat padded cells when out of domain."""
    s = (vloc[:, 1:] - vloc[:, :-1]) / (xloc[:, 1:] - xloc[:, :-1])  # (S, 3)
    cell = np.where(q < xloc[:, 1], 0, np.where(q > xloc[:, 2], 2, 1))
    anchor = np.maximum(cell, 1)
    xa = np.take_along_axis(xloc, anchor[:, None], axis=1)[:, 0]
    va = np.take_along_axis(vloc, anchor[:, None], axis=1)[:, 0]
    sc = np.take_along_axis(s, cell[:, None], axis=1)[:, 0]
    y = va + sc * (q - xa)
    dy = sc.copy()
    d2y = np.zeros_like(y)
    if width_frac <= 0.0:
        return y, dy, d2y
    wf = min(width_frac, 0.45)
    cells = xloc[:, 1:] - xloc[:, :-1]
    for corner in (1, 2):
        w = wf * np.minimum(cells[:, corner - 1], cells[:, corner])
        t = q - xloc[:, corner]
        in_band = np.abs(t) <= w
        if not np.any(in_band):
            continue
        s1 = s[:, corner - 1]
        s2 = s[:, corner]
        mid = 0.5 * (s1 + s2)
        half = 0.25 * (s2 - s1)
        y_b = vloc[:, corner] + mid * t + half * t * t / w + half * w
        dy_b = mid + 2.0 * half * t / w
        d2_b = 2.0 * half / w
        y = np.where(in_band, y_b, y)
        dy = np.where(in_band, dy_b, dy)
        d2y = np.where(in_band, d2_b, d2y)
    return y, dy, d2y
