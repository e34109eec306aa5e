"""Finite-scale surrogates for upper Banach density and the translated-window sandwich.

Window integrals are exact for the piecewise-constant field: the cumulative
integral table ``S`` is multilinear inside every cell, so multilinear
interpolation of ``S`` at arbitrary window corners reproduces it without error.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ._validation import ConfigDensityError, check_field, check_positive
from .field import cube_integral
from .reports import BoundReport

__all__ = ["DensityEnvelope", "banach_density", "window_sandwich_check", "WindowIntegrator"]


@dataclass
class DensityEnvelope:
    t_values: list
    sup_averages: list
    estimate: float
    tail: int = 3
    argmax_centers: list = field(default_factory=list)


class WindowIntegrator:
    """Exact integrals of a field over many axis-parallel boxes at once.

    The cumulative table holds ``f - ref`` with ``ref`` the median value, and
    the ``ref`` part is added back in closed form; a constant field therefore
    averages to its value with no rounding.
    """

    def __init__(self, f):
        self.f = f
        self.periodic = f.boundary == "periodic"
        h = f.spacing
        vals = np.asarray(f.values, dtype=float)
        self.ref = float(np.median(vals))
        S = (vals - self.ref) * h ** f.dim
        for a in range(f.dim):
            S = np.cumsum(S, axis=a)
        self.S = np.pad(S, [(1, 0)] * f.dim)
        self.lower = np.asarray(f.grid.lower)
        self.period = np.asarray(f.extent)
        # edge coordinates relative to the lower corner
        self._interp = RegularGridInterpolator(
            [h * np.arange(n + 1) for n in f.shape], self.S, method="linear", bounds_error=False, fill_value=None
        )

    def _cumulative(self, pts):
        """``int_{[lower, lower + pts]} f`` for points given relative to the lower corner."""
        if not self.periodic:
            return self._interp(np.clip(pts, 0.0, self.period))
        q = np.floor(pts / self.period)
        r = pts - q * self.period
        out = np.zeros(pts.shape[0])
        # split each axis into whole periods plus a remainder
        for choice in product((0, 1), repeat=pts.shape[1]):
            mask = np.array(choice, dtype=bool)
            arg = np.where(mask, self.period, r)
            coef = np.prod(np.where(mask, q, 1.0), axis=1)
            out += coef * self._interp(arg)
        return out

    def _shifted_integrals(self, lo, hi):
        out = np.zeros(lo.shape[0])
        for choice in product((0, 1), repeat=lo.shape[1]):
            mask = np.array(choice, dtype=bool)
            sign = (-1) ** (lo.shape[1] - mask.sum())
            out += sign * self._cumulative(np.where(mask, hi, lo))
        return out

    def _covered_fraction(self, lo, hi):
        """Fraction of each box lying on the grid (always 1 for periodic fields)."""
        vol = np.prod(hi - lo, axis=1)
        if self.periodic:
            return np.ones(lo.shape[0]), vol
        inside = np.prod(np.clip(hi, 0.0, self.period) - np.clip(lo, 0.0, self.period), axis=1)
        return inside / vol, vol

    def integrals(self, lo, hi):
        lo = np.atleast_2d(lo) - self.lower
        hi = np.atleast_2d(hi) - self.lower
        frac, vol = self._covered_fraction(lo, hi)
        return self.ref * frac * vol + self._shifted_integrals(lo, hi)

    def averages(self, lo, hi):
        lo = np.atleast_2d(lo) - self.lower
        hi = np.atleast_2d(hi) - self.lower
        frac, vol = self._covered_fraction(lo, hi)
        return self.ref * frac + self._shifted_integrals(lo, hi) / vol


def _axis_centers(lo, hi, stride):
    if hi - lo <= 1e-12:
        return np.array([0.5 * (lo + hi)])
    k = int(math.floor((hi - lo) / stride + 1e-9))
    c = lo + stride * np.arange(k + 1)
    if hi - c[-1] > 1e-9 * stride:
        c = np.append(c, hi)
    return c


def banach_density(f, t_schedule, stride=None, tail=3, centers="all"):
    """Supremum of window averages over a lattice of window centres, for each side ``t``.

    ``stride`` defaults to one cell for ``t <= 16 h`` and ``t / 8`` beyond.
    For compactly supported fields windows stay inside the grid; periodic
    fields scan one period of centres.  ``centers="origin"`` fixes the
    window at the grid centre (upper density instead of upper Banach density).
    """
    check_field(f)
    ts = [check_positive(t, "t", "invalid_parameter") for t in t_schedule]
    if not ts:
        raise ConfigDensityError("invalid_parameter", "t_schedule is empty")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigDensityError("invalid_parameter", "t_schedule must be strictly increasing")
    ext = min(f.extent)
    if ts[-1] > ext * (1 + 1e-12):
        raise ConfigDensityError("window_too_large", f"window side {ts[-1]} exceeds field extent {ext}")
    if centers not in ("all", "origin"):
        raise ConfigDensityError("invalid_parameter", f"centers must be 'all' or 'origin', got {centers!r}")
    tail = int(tail)
    if tail < 1:
        raise ConfigDensityError("invalid_parameter", "tail must be >= 1")
    win = WindowIntegrator(f)
    lower, upper = np.asarray(f.grid.lower), np.asarray(f.grid.upper)
    sups, where = [], []
    for t in ts:
        step = stride if stride is not None else (f.spacing if t <= 16 * f.spacing else t / 8.0)
        step = check_positive(step, "stride", "invalid_parameter")
        if centers == "origin":
            grid_c = [np.array([0.5 * (a + b)]) for a, b in zip(lower, upper)]
        elif f.boundary == "periodic":
            grid_c = [a + step * np.arange(max(1, int(math.ceil((b - a) / step - 1e-9)))) for a, b in zip(lower, upper)]
        else:
            grid_c = [_axis_centers(a + t / 2, b - t / 2, step) for a, b in zip(lower, upper)]
        pts = np.stack(np.meshgrid(*grid_c, indexing="ij"), axis=-1).reshape(-1, f.dim)
        avg = win.averages(pts - t / 2, pts + t / 2)
        k = int(np.argmax(avg))
        sups.append(float(min(max(avg[k], 0.0), 1.0)))
        where.append(pts[k].tolist())
    est = max(sups[-tail:])
    return DensityEnvelope(ts, sups, est, tail, where)


def _unit_window_weights(lower_edge, h, n, a, L, period=None):
    """``int_cell |[a, a + L] cap [u - 1, u]| du`` for every cell (periodic images folded)."""

    def q(z):
        return 0.5 * np.maximum(z, 0.0) ** 2

    def R(z):
        return q(z) - q(z - 1.0) - q(z - L) + q(z - L - 1.0)

    if period is None:
        edges = lower_edge + h * np.arange(n + 1) - a
        return np.diff(R(edges))
    out = np.zeros(n)
    m0 = math.floor((a - lower_edge) / period) - 1
    m1 = math.ceil((a + L + 1.0 - lower_edge) / period) + 1
    for m in range(m0, m1 + 1):
        edges = lower_edge + m * period + h * np.arange(n + 1) - a
        out += np.diff(R(edges))
    return out


def window_sandwich_check(f, corner, side, n, grid_tol=1e-9):
    """Compare the translated-window average with the dilated-cube average.

    For the cube ``Q = corner + [0, side]^d``::

        A_n = m(nQ)^{-1} int_{nQ} int_{[0,1]^d} f(x + v) dx dv
        B_n = m(Q)^{-1} int_Q f(n x) dx

    Both are computed exactly.  They are trapped between the averages over
    the cubes of side ``n r + 1`` and ``n r - 1`` (``r = side``), so
    ``|A_n - B_n| <= ((nr + 1)^d - (nr - 1)^d) / (nr)^d``.
    """
    check_field(f)
    r = check_positive(side, "side", "invalid_parameter")
    corner = np.broadcast_to(np.asarray(corner, dtype=float), (f.dim,))
    n = int(n)
    n_min = int(math.ceil(1.0 / r - 1e-12))
    if n < max(n_min, 1):
        raise ConfigDensityError("n_below_threshold", f"n must be >= ceil(1/r) = {n_min}, got {n}")
    d = f.dim
    L = n * r
    lo = n * corner
    mQn = L ** d
    grid = f.grid
    periodic = f.boundary == "periodic"
    weights = [
        _unit_window_weights(le, f.spacing, m, a, L, ext if periodic else None)
        for le, m, a, ext in zip(grid.lower, f.shape, lo, f.extent)
    ]
    acc = np.asarray(f.values, dtype=float)
    for w in reversed(weights):
        acc = acc @ w
    A = float(acc) / mQn
    B = cube_integral(f, lo, lo + L) / mQn
    geometric = ((L + 1) ** d - (L - 1) ** d) / mQn
    return BoundReport.inequality(
        "window_sandwich", abs(A - B), geometric + grid_tol,
        A_n=A, B_n=B, n=n, side=r,
        geometric_gap=geometric,
        stated_gap=((L + 1) ** d - L ** d) / mQn,
        stated_bound=2 ** d * L ** (d - 1) / (n ** d * r ** d),
    )
