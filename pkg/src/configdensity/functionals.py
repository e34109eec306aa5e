"""Pair, triangle and colinear configuration functionals of a density field.

All functionals are integrals of products of the field at the vertices of a
configuration, averaged over the configuration's orientation:

* pair:      ``int g(x) (g * sigma_t)(x) dx``
* triangle:  ``D1 = int g(x) g(x + t y) g(x + t z) dnu_y(z) dsigma(y) dx``
* smoothed:  ``D4 = int g(x) g(x + t y) (g * P_lam)(x) dsigma(y) dx``
* colinear:  ``int g(x) g(x + t y) g(x + 2 t y) dsigma(y) dx``

with ``sigma`` the normalised circle (or sphere) measure and ``nu_y`` the
exponential ray measure attached to ``y``.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from ._validation import ConfigDensityError, check_field, check_positive
from .field import ShiftReader
from .measures import circle_quadrature, ray_quadrature, sphere_directions
from .parallel import ordered_map
from .reports import BoundReport
from .spectral import (
    bessel_j0,
    poisson_convolve_exact,
    poisson_smooth_values,
    smoothed_difference_l1,
    smoothed_difference_l1_exact,
)

__all__ = [
    "FunctionalResult",
    "Support",
    "pair_correlation",
    "triangle_d1",
    "triangle_d4",
    "colinear_triple",
    "smoothing_gap",
    "choose_smoothing_params",
    "d1_d4_gap_check",
    "positivity_threshold",
    "default_circle_count",
]


@dataclass
class FunctionalResult:
    name: str
    value: float
    method: str
    t: float
    grid: dict
    alpha: float | None = None
    quadrature: dict = field(default_factory=dict)
    elapsed_ns: int = 0

    def __float__(self):
        return float(self.value)


def _grid_info(f):
    return {"shape": list(f.shape), "spacing": f.spacing, "boundary": f.boundary}


def default_circle_count(t, h, minimum=64):
    """Circle nodes so that neighbouring nodes on the radius-``t`` circle sit about one cell apart."""
    n = max(minimum, int(math.ceil(2.0 * math.pi * t / h)))
    return n + (-n) % 4


class _Compact:
    """The field restricted to the bounding box of its support (plus a one-cell margin).

    Outside that box a compactly supported field is zero, so every functional
    can be evaluated on the smaller array.  Periodic fields are kept whole.
    """

    def __init__(self, f):
        self.periodic = f.boundary == "periodic"
        vals = np.asarray(f.values)
        self.start = (0,) * vals.ndim
        self.empty = not np.any(vals)
        if not self.periodic:
            nz = np.nonzero(vals)
            if self.empty:
                vals = vals[tuple(slice(0, 1) for _ in range(vals.ndim))] * 0.0
            else:
                sl = tuple(slice(max(0, int(i.min()) - 1), int(i.max()) + 2) for i in nz)
                self.start = tuple(s.start for s in sl)
                vals = vals[sl]
        self.values = vals
        self.shape = vals.shape
        self.reader = ShiftReader(vals, f.boundary)
        self.h = f.spacing
        self.dim = f.dim

    def outside(self, offset):
        """True when a shift by ``offset`` cells moves the box completely off itself."""
        if self.periodic:
            return False
        return any(abs(o) >= n + 1 for o, n in zip(offset, self.shape))


def _check_t(t, code="invalid_scale"):
    try:
        t = float(t)
    except (TypeError, ValueError):
        raise ConfigDensityError(code, f"t must be a real number, got {t!r}")
    if not math.isfinite(t) or t < 0:
        raise ConfigDensityError(code, f"t must be finite and >= 0, got {t}")
    return t


def _circle(cq, n_default):
    if cq is None:
        return circle_quadrature(n_default)
    if isinstance(cq, int):
        return circle_quadrature(cq)
    return cq


# --------------------------------------------------------------------------
# pair correlation
# --------------------------------------------------------------------------


def pair_correlation(f, t, method="spatial", n_circle=None):
    """``int g(x) (g * sigma_t)(x) dx`` for a 2-d field.

    ``spatial`` averages ``sum_x g(x) g(x - t y_j)`` over a trapezoid circle
    rule (multilinear reads).  ``spectral`` evaluates
    ``sum |g_hat(xi)|^2 J0(2 pi t |xi|) dxi^2`` on a zero-padded lattice and
    is only available for compactly supported fields.
    """
    check_field(f, dim=2, code="circle_measure_requires_2d")
    t = _check_t(t)
    start = time.perf_counter_ns()
    if method == "spatial":
        value, quad = _pair_spatial(f, t, n_circle)
    elif method == "spectral":
        if f.boundary == "periodic":
            raise ConfigDensityError("requires_compact_support", "spectral pair correlation needs zero_outside")
        value, quad = _pair_spectral(f, t)
    else:
        raise ConfigDensityError("invalid_parameter", f"unknown method {method!r}")
    return FunctionalResult("pair", value, method, t, _grid_info(f), None, quad, time.perf_counter_ns() - start)


def _pair_spatial(f, t, n_circle):
    c = _Compact(f)
    cq = _circle(n_circle, default_circle_count(t, f.spacing))
    g = c.values
    if t == 0.0:
        return float(np.sum(g * g)) * c.h ** 2, {"circle": cq.n_nodes}
    offsets = -t * cq.nodes / c.h
    terms = [0.0 if c.outside(o) else c.reader.dot(g, o) for o in offsets]
    return float(np.dot(cq.weights, terms)) * c.h ** 2, {"circle": cq.n_nodes}


def _pair_spectral(f, t):
    c = _Compact(f)
    h = c.h
    # pad so that the shifted copies never wrap onto the support
    shape = tuple(sfft.next_fast_len(max(2 * n, n + int(math.ceil(2 * t / h)) + 8), real=True) for n in c.shape)
    G = sfft.rfftn(c.values, s=shape, workers=_workers())
    k0 = sfft.fftfreq(shape[0], h)[:, None]
    k1 = sfft.rfftfreq(shape[1], h)[None, :]
    radius = np.sqrt(k0 * k0 + k1 * k1)
    power = np.abs(G) ** 2 * h ** 4
    # the half spectrum stores each conjugate pair once
    mult = np.full(G.shape[1], 2.0)
    mult[0] = 1.0
    if shape[1] % 2 == 0:
        mult[-1] = 1.0
    dxi2 = 1.0 / (shape[0] * h) / (shape[1] * h)
    value = float(np.sum(power * bessel_j0(2 * np.pi * t * radius) * mult[None, :])) * dxi2
    return value, {"lattice": list(shape)}


def _workers():
    from .parallel import thread_cap

    return thread_cap()


# --------------------------------------------------------------------------
# triangles
# --------------------------------------------------------------------------


def triangle_d1(f, alpha, t=1.0, cq=None, rq=None):
    """Triangle functional with apex ``x``, vertices ``x + t y`` and ``x + t z``, ``z ~ nu_y``.

    Every configuration in the support of the measure is a triangle of area
    ``alpha t^2``.  Circle and ray integrals use the supplied quadratures
    (defaults: 64-node circle, 64-node Gauss-Laguerre ray).
    """
    check_field(f, dim=2, code="circle_measure_requires_2d")
    alpha = check_positive(alpha, "alpha", "invalid_parameter")
    t = _check_t(t, "invalid_parameter")
    cq = _circle(cq, 64)
    rq = ray_quadrature(64) if rq is None else rq
    start = time.perf_counter_ns()
    c = _Compact(f)
    g = c.values
    y = cq.nodes
    yp = cq.perp
    # third vertex offsets: t (2 alpha y_perp + s y), per (direction, ray node)
    third = t * (2.0 * alpha * yp[:, None, :] + rq.nodes[None, :, None] * y[:, None, :])
    second = t * y
    area = 0.5 * np.abs(second[:, None, 0] * third[..., 1] - second[:, None, 1] * third[..., 0])
    if not np.allclose(area, alpha * t * t, rtol=1e-9, atol=1e-12):
        raise AssertionError("triangle quadrature nodes do not have area alpha t^2")

    def one_direction(j):
        off2 = second[j] / c.h
        if c.outside(off2):
            return 0.0
        pair = g * c.reader.shifted(off2)
        acc = 0.0
        for w, z in zip(rq.weights, third[j]):
            off3 = z / c.h
            if not c.outside(off3):
                acc += w * c.reader.dot(pair, off3)
        return acc

    terms = ordered_map(one_direction, range(cq.n_nodes))
    value = float(np.dot(cq.weights, terms)) * c.h ** 2
    quad = {"circle": cq.n_nodes, "ray": rq.m_nodes}
    return FunctionalResult("d1", value, "spatial", t, _grid_info(f), alpha, quad, time.perf_counter_ns() - start)


def _smoothed(f, lam, smoothing):
    if smoothing == "auto":
        smoothing = "kernel" if (f.dim == 2 and f.boundary == "zero_outside") else "spectral"
    if smoothing == "kernel":
        return poisson_convolve_exact(f, lam), smoothing
    if smoothing == "spectral":
        return poisson_smooth_values(f, lam), smoothing
    raise ConfigDensityError("invalid_parameter", f"unknown smoothing route {smoothing!r}")


def triangle_d4(f, lam2, t=1.0, cq=None, smoothing="auto"):
    """``int g(x) g(x + t y) (g * P_lam2)(x) dsigma(y) dx``.

    ``smoothing="kernel"`` convolves with exact cell integrals of the kernel
    (2-d, compact support; default there), ``"spectral"`` uses the Fourier
    multiplier on a zero-padded torus.
    """
    check_field(f, dim=2, code="circle_measure_requires_2d")
    lam2 = check_positive(lam2, "lambda2", "invalid_lambda", allow_zero=True)
    t = _check_t(t, "invalid_parameter")
    cq = _circle(cq, default_circle_count(t, f.spacing))
    start = time.perf_counter_ns()
    smooth, route = _smoothed(f, lam2, smoothing)
    reader = ShiftReader(f.values, f.boundary)
    prod = np.asarray(f.values) * smooth
    offsets = t * cq.nodes / f.spacing
    terms = [reader.dot(prod, o) for o in offsets]
    value = float(np.dot(cq.weights, terms)) * f.spacing ** 2
    quad = {"circle": cq.n_nodes, "smoothing": route, "lambda2": lam2}
    return FunctionalResult("d4", value, "spatial", t, _grid_info(f), None, quad, time.perf_counter_ns() - start)


def colinear_triple(f, t, n_dirs=None):
    """``int g(x) g(x + t y) g(x + 2 t y) dsigma(y) dx`` in 2 or 3 dimensions."""
    check_field(f)
    if f.dim < 2:
        raise ConfigDensityError("requires_d_ge_2", f"colinear configurations need dim >= 2, got {f.dim}")
    if f.dim > 3:
        raise ConfigDensityError("invalid_parameter", f"directions are only provided for dim 2 and 3, got {f.dim}")
    t = _check_t(t)
    start = time.perf_counter_ns()
    if f.dim == 2:
        cq = circle_quadrature(n_dirs or default_circle_count(t, f.spacing))
        dirs, weights = cq.nodes, cq.weights
    else:
        dirs = sphere_directions(n_dirs or 256)
        weights = np.full(len(dirs), 1.0 / len(dirs))
    c = _Compact(f)
    g = c.values

    def one_direction(y):
        o1 = t * y / c.h
        if c.outside(o1):
            return 0.0
        pair = g * c.reader.shifted(o1)
        return c.reader.dot(pair, 2.0 * o1)

    terms = ordered_map(one_direction, list(dirs))
    value = float(np.dot(weights, terms)) * c.h ** f.dim
    return FunctionalResult("colinear", value, "spatial", t, _grid_info(f), None, {"directions": len(dirs)},
                            time.perf_counter_ns() - start)


# --------------------------------------------------------------------------
# smoothing parameters and the D1/D4 comparison
# --------------------------------------------------------------------------


def choose_smoothing_params(delta, M):
    """``(lam1, lam2) = (0.5 (delta^3 / 14)^3, 168 M / delta^3)``."""
    try:
        delta = float(delta)
    except (TypeError, ValueError):
        raise ConfigDensityError("invalid_delta", f"delta must be a number, got {delta!r}")
    if not (0.0 < delta <= 1.0):
        raise ConfigDensityError("invalid_delta", f"delta must lie in (0, 1], got {delta}")
    M = check_positive(M, "M", "invalid_parameter")
    d3 = delta ** 3
    return 0.5 * (d3 / 14.0) ** 3, 168.0 * M / d3


def smoothing_gap(f, lam1, lam2, method="auto"):
    """``|| g * P_lam1 - g * P_lam2 ||_1``.

    ``exact`` (default for 2-d compact fields) integrates over the whole plane
    using exact kernel cell integrals; ``torus`` sums over the zero-padded
    periodic lattice, which by periodisation can only underestimate the
    whole-plane value.
    """
    check_field(f)
    lam1 = check_positive(lam1, "lambda1", "invalid_lambda", allow_zero=True)
    lam2 = check_positive(lam2, "lambda2", "invalid_lambda", allow_zero=True)
    if method == "auto":
        method = "exact" if (f.dim == 2 and f.boundary == "zero_outside") else "torus"
    if method == "exact":
        c = _Compact(f)
        if c.empty:
            return 0.0
        return smoothed_difference_l1_exact(_cropped_field(f, c), lam1, lam2)
    if method == "torus":
        return smoothed_difference_l1(f, lam1, lam2)
    raise ConfigDensityError("invalid_parameter", f"unknown method {method!r}")


def _cropped_field(f, c):
    from .field import DensityField

    origin = np.asarray(f.origin) + f.spacing * np.asarray(c.start)
    return DensityField(c.values, f.spacing, tuple(origin), f.boundary)


@dataclass(frozen=True)
class Support:
    """A declared support set: ``{"ball": {"center": [...], "radius": r}}`` or ``{"box": [[lo, hi], ...]}`` (one pair per axis)."""

    kind: str
    params: dict

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, Support):
            return d
        if not isinstance(d, dict) or len(d) != 1:
            raise ConfigDensityError("invalid_parameter", f"support must be {{'ball': ...}} or {{'box': ...}}, got {d!r}")
        (kind, params), = d.items()
        if kind == "ball":
            check_positive(params.get("radius"), "radius", "invalid_parameter")
        elif kind == "box":
            try:
                box = np.asarray(params, float).reshape(-1, 2)
            except ValueError:
                raise ConfigDensityError("invalid_parameter", f"box must be a list of [lo, hi] pairs, got {params!r}")
            if np.any(box[:, 1] <= box[:, 0]):
                raise ConfigDensityError("invalid_parameter", "box must have lo < hi on every axis")
            params = [box[:, 0].tolist(), box[:, 1].tolist()]
        else:
            raise ConfigDensityError("invalid_parameter", f"unknown support kind {kind!r}")
        return cls(kind, params)

    def measure(self, dim):
        if self.kind == "box":
            return float(np.prod(np.subtract(self.params[1], self.params[0])))
        r = float(self.params["radius"])
        return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * r ** dim

    def cell_outside(self, f):
        """Mask of cells lying entirely outside the set."""
        half = 0.5 * f.spacing
        pts = f.grid.points()
        if self.kind == "box":
            lo, hi = np.asarray(self.params[0]), np.asarray(self.params[1])
            return np.any((pts + half <= lo) | (pts - half >= hi), axis=-1)
        center = np.broadcast_to(np.asarray(self.params.get("center", 0.0), float), (f.dim,))
        # distance from the ball centre to the nearest point of each cell
        gap = np.maximum(np.abs(pts - center) - half, 0.0)
        return np.sqrt(np.sum(gap ** 2, axis=-1)) >= float(self.params["radius"])


def positivity_threshold(f, delta_nominal=None, factor=1e-6):
    """``factor * m(support) * delta^3`` with ``delta`` the mean value on the support by default."""
    sm = f.support_measure
    if sm == 0.0:
        return 0.0
    delta = f.mass / sm if delta_nominal is None else float(delta_nominal)
    return factor * sm * delta ** 3


def d1_d4_gap_check(f, alpha_list, delta, M, support, t=1.0, cq=None, rq=None, smoothing="auto"):
    """Check ``max_alpha |D1 - D4| <= delta^3 m(B) / 7 + ||g*P_lam1 - g*P_lam2||_1``.

    The smoothing parameters come from :func:`choose_smoothing_params`; at
    scale ``t`` they are used as ``lam * t``, which keeps the inequality
    scale-free.  ``support`` declares the set ``B`` containing the support of
    the field.
    """
    check_field(f, dim=2, code="circle_measure_requires_2d")
    alphas = [check_positive(a, "alpha", "invalid_parameter") for a in alpha_list]
    if not alphas:
        raise ConfigDensityError("invalid_parameter", "alpha_list is empty")
    lam1, lam2 = choose_smoothing_params(delta, M)
    if max(alphas) > M:
        raise ConfigDensityError("invalid_parameter", f"alphas must lie in (0, M] = (0, {M}]")
    t = _check_t(t)
    sup = Support.from_dict(support)
    stray = float(np.sum(np.asarray(f.values)[sup.cell_outside(f)])) * f.spacing ** f.dim
    if stray > 1e-12 * max(f.mass, 1e-300):
        raise ConfigDensityError("support_mismatch", f"field has mass {stray:.3g} outside the declared support")
    mB = sup.measure(2)
    cq = _circle(cq, 64)
    rq = ray_quadrature(64) if rq is None else rq
    d4 = triangle_d4(f, lam2 * t, t=t, cq=cq, smoothing=smoothing).value
    per_alpha = []
    for a in alphas:
        d1 = triangle_d1(f, a, t=t, cq=cq, rq=rq).value
        per_alpha.append({"alpha": a, "d1": d1, "d4": d4, "diff": abs(d1 - d4)})
    gap = smoothing_gap(f, lam1 * t, lam2 * t)
    lhs = max(p["diff"] for p in per_alpha)
    rhs = delta ** 3 * mB / 7.0 + gap
    return BoundReport.inequality(
        "d1_d4_gap", lhs, rhs, slack=1e-6 * mB,
        per_alpha=per_alpha, lambda1=lam1 * t, lambda2=lam2 * t, gap=gap, support_measure=mB,
        smoothing_gap_target=delta ** 3 * mB / 7.0,
    )
