"""Vectorized forward-mode automatic differentiation.

A :class:`Dual` carries a value array of shape ``S`` together with first
derivatives of shape ``S + (p,)`` against ``p`` seed directions, and
optionally second derivatives of shape ``S + (p, p)``.  All arithmetic is
plain numpy, so one evaluation of a model function over a batch of
collocation nodes yields the value, the local Jacobian block and (when
seeded to second order) the local Hessian blocks in a single pass.

Primitives cover what the powertrain models need: +, -, *, /, powers,
exp, sqrt, log, a smooth max/min, a C1 smoothstep, and C1-smoothed
piecewise-linear table lookups (see :mod:`hevopt.maps` for the underlying
value/derivative kernels).  Branching on the *value* part is allowed and
used for region selection; the functions built here are C1 in the
decision variables by construction.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Dual",
    "seed_block",
    "value_of",
    "exp",
    "log",
    "sqrt",
    "smooth_max",
    "smooth_min",
    "smoothstep",
    "gradient",
]


def _outer(a, b):
    # batched outer product: (..., p) x (..., p) -> (..., p, p)
    return a[..., :, None] * b[..., None, :]


class Dual:
    """Value + directional first (and optionally second) derivatives."""

    __slots__ = ("val", "dot", "hes")

    def __init__(self, val, dot, hes=None):
        self.val = np.asarray(val, dtype=float)
        self.dot = np.asarray(dot, dtype=float)
        self.hes = None if hes is None else np.asarray(hes, dtype=float)

    # ------------------------------------------------------------------
    @property
    def nseed(self) -> int:
        return self.dot.shape[-1]

    def _lift(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        val = np.asarray(other, dtype=float)
        dot = np.zeros(val.shape + (self.nseed,))
        hes = None
        if self.hes is not None:
            hes = np.zeros(val.shape + (self.nseed, self.nseed))
        return Dual(val, dot, hes)

    def __getitem__(self, idx):
        hes = None if self.hes is None else self.hes[idx]
        return Dual(self.val[idx], self.dot[idx], hes)

    def __repr__(self):
        return f"Dual(val={self.val!r}, p={self.nseed})"

    # ---- arithmetic ---------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        hes = None
        if self.hes is not None:
            hes = self.hes + o.hes
        return Dual(self.val + o.val, self.dot + o.dot, hes)

    __radd__ = __add__

    def __neg__(self):
        hes = None if self.hes is None else -self.hes
        return Dual(-self.val, -self.dot, hes)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        val = self.val * o.val
        dot = self.dot * o.val[..., None] + o.dot * self.val[..., None]
        hes = None
        if self.hes is not None:
            hes = (
                self.hes * o.val[..., None, None]
                + o.hes * self.val[..., None, None]
                + _outer(self.dot, o.dot)
                + _outer(o.dot, self.dot)
            )
        return Dual(val, dot, hes)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        inv = 1.0 / self.val
        return self._chain(inv, -inv * inv, None if self.hes is None else 2.0 * inv**3)

    def __pow__(self, k):
        if not isinstance(k, (int, float)):
            raise TypeError("only constant exponents are supported")
        v = self.val
        return self._chain(v**k, k * v ** (k - 1), None if self.hes is None else k * (k - 1) * v ** (k - 2))

    def _chain(self, f, f1, f2):
        """Unary chain rule: f(self) given f, f', f'' evaluated at self.val."""
        dot = self.dot * f1[..., None]
        hes = None
        if self.hes is not None:
            hes = self.hes * f1[..., None, None] + _outer(self.dot, self.dot) * f2[..., None, None]
        return Dual(f, dot, hes)

    # ---- comparisons act on values (branch selection only) -----------
    def __lt__(self, other):
        return self.val < _val(other)

    def __le__(self, other):
        return self.val <= _val(other)

    def __gt__(self, other):
        return self.val > _val(other)

    def __ge__(self, other):
        return self.val >= _val(other)


def _val(x):
    return x.val if isinstance(x, Dual) else np.asarray(x, dtype=float)


def value_of(x):
    """Value part of a Dual, or the argument itself for plain arrays."""
    return _val(x)


def seed_block(values, second_order: bool = False):
    """Seed a block of p independent variables for forward propagation.

    values: sequence of p arrays, all broadcast to a common shape S.
    Returns a list of p Duals with dot[..., i] = e_i (and zero Hessian).
    """
    arrs = [np.asarray(v, dtype=float) for v in values]
    shape = np.broadcast_shapes(*[a.shape for a in arrs]) if arrs else ()
    p = len(arrs)
    out = []
    for i, a in enumerate(arrs):
        dot = np.zeros(shape + (p,))
        dot[..., i] = 1.0
        hes = np.zeros(shape + (p, p)) if second_order else None
        out.append(Dual(np.broadcast_to(a, shape).copy(), dot, hes))
    return out


# ---- elementary functions -------------------------------------------


def exp(x):
    if not isinstance(x, Dual):
        return np.exp(x)
    e = np.exp(x.val)
    return x._chain(e, e, None if x.hes is None else e)


def log(x):
    if not isinstance(x, Dual):
        return np.log(x)
    inv = 1.0 / x.val
    return x._chain(np.log(x.val), inv, None if x.hes is None else -inv * inv)


def sqrt(x):
    if not isinstance(x, Dual):
        return np.sqrt(x)
    r = np.sqrt(x.val)
    f1 = 0.5 / r
    return x._chain(r, f1, None if x.hes is None else -0.25 / (r * x.val))


def smooth_max(a, b, eps: float = 1.0):
    """C-infinity max: 0.5*(a+b+sqrt((a-b)^2+eps^2)); exact as eps -> 0."""
    d = a - b
    if isinstance(d, Dual):
        root = sqrt(d * d + eps * eps)
    else:
        root = np.sqrt(d * d + eps * eps)
    return (a + b + root) * 0.5


def smooth_min(a, b, eps: float = 1.0):
    return -smooth_max(-a, -b, eps)


def smoothstep(x, lo: float, hi: float):
    """C1 ramp: 0 below lo, 1 above hi, cubic 3t^2-2t^3 in between."""
    if not isinstance(x, Dual):
        t = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)
    t = (x - lo) * (1.0 / (hi - lo))
    tv = np.clip(t.val, 0.0, 1.0)
    f = tv * tv * (3.0 - 2.0 * tv)
    f1 = np.where((t.val > 0.0) & (t.val < 1.0), 6.0 * tv * (1.0 - tv), 0.0) / (hi - lo)
    f2 = None
    if x.hes is not None:
        f2 = np.where((t.val > 0.0) & (t.val < 1.0), (6.0 - 12.0 * tv), 0.0) / (hi - lo) ** 2
    return x._chain(f, f1, f2)


def from_table(x, y, dy, d2y=None):
    """Lift tabulated (y, dy/dx [, d2y/dx2]) values through a Dual query x."""
    if not isinstance(x, Dual):
        return y
    return x._chain(np.asarray(y, float), np.asarray(dy, float), None if x.hes is None else np.asarray(d2y, float))


def from_table2(x, y, f, fx, fy, fxx=None, fxy=None, fyy=None):
    """Lift a tabulated bivariate evaluation through Dual queries (x, y)."""
    xd = isinstance(x, Dual)
    yd = isinstance(y, Dual)
    if not xd and not yd:
        return f
    ref = x if xd else y
    second = ref.hes is not None
    f = np.asarray(f, float)
    fx = np.asarray(fx, float)
    fy = np.asarray(fy, float)
    dot = 0.0
    if xd:
        dot = dot + fx[..., None] * x.dot
    if yd:
        dot = dot + fy[..., None] * y.dot
    hes = None
    if second:
        fxx = np.asarray(fxx, float)
        fxy = np.asarray(fxy, float)
        fyy = np.asarray(fyy, float)
        hes = 0.0
        if xd:
            hes = hes + fx[..., None, None] * x.hes + fxx[..., None, None] * _outer(x.dot, x.dot)
        if yd:
            hes = hes + fy[..., None, None] * y.hes + fyy[..., None, None] * _outer(y.dot, y.dot)
        if xd and yd:
            hes = hes + fxy[..., None, None] * (_outer(x.dot, y.dot) + _outer(y.dot, x.dot))
    return Dual(f, dot, hes)


def gradient(evaluator, point):
    """Gradient of a scalar evaluator by forward-mode differentiation.

    evaluator: callable taking one vector-like argument; it may index the
    argument and combine entries with the primitives of this module.
    point: 1-D array of length n.  Returns (value, gradient).
    """
    z = np.asarray(point, dtype=float)
    n = z.size
    x = Dual(z, np.eye(n))
    out = evaluator(x)
    if isinstance(out, Dual):
        return float(out.val), np.asarray(out.dot, dtype=float).reshape(n)
    return float(out), np.zeros(n)
