"""Discrete approximation of the continuous Fourier transform and radial multipliers.

Convention: ``g_hat(xi) = integral g(x) exp(-2 pi i <x, xi>) dx`` with no
prefactor, approximated by ``sum_x g(x) exp(-2 pi i <x, xi>) h^d`` over the
sample points (including the phase from the grid origin).  With frequency step
``1 / (n h)`` the discrete transform satisfies Parseval exactly:
``sum |g_hat|^2 dxi^d == sum |g|^2 h^d``.
"""

import contextvars
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._validation import ConfigDensityError, check_field, check_positive
from .field import DensityField

__all__ = [
    "Spectrum",
    "forward_transform",
    "inverse_transform",
    "bessel_j0",
    "circle_multiplier",
    "poisson_multiplier",
    "poisson_smooth",
    "poisson_smooth_values",
    "poisson_kernel",
    "padded_shape",
    "poisson_cell_integrals",
    "poisson_convolve_exact",
    "smoothed_difference_l1",
    "smoothed_difference_l1_exact",
]

logger = logging.getLogger(__name__)

# test-harness fault hooks (see verify.inject_fault); a context variable so
# concurrent callers are unaffected
active_faults = contextvars.ContextVar("configdensity_faults", default=frozenset())


def _workers():
    from .parallel import thread_cap

    return thread_cap()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Centred frequency-lattice samples of ``g_hat``.

    ``values[k]`` is the transform at ``xi_k = frequencies()[axis][k]``; index
    ``n // 2`` on every axis is ``xi = 0``.
    """

    values: np.ndarray
    freq_step: tuple
    source_spacing: float
    origin: tuple
    source_shape: tuple
    boundary: str = "zero_outside"

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def frequencies(self):
        return [sfft.fftshift(sfft.fftfreq(n, self.source_spacing)) for n in self.shape]

    def radius(self):
        """``|xi|`` on the lattice."""
        axes = self.frequencies()
        r2 = np.zeros(self.shape)
        for a, f in enumerate(axes):
            r2 = r2 + (f ** 2).reshape([-1 if i == a else 1 for i in range(self.dim)])
        return np.sqrt(r2)

    def zero_index(self):
        return tuple(n // 2 for n in self.shape)

    def value_at(self, xi):
        """Coefficient at a lattice frequency ``xi`` (raises if ``xi`` is off-lattice)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        k = xi / np.asarray(self.freq_step)
        ki = np.rint(k)
        if np.any(np.abs(k - ki) > 1e-9):
            raise ConfigDensityError("off_lattice", f"{xi.tolist()} is not a lattice frequency")
        idx = tuple(int(i) + n // 2 for i, n in zip(ki, self.shape))
        return complex(self.values[idx])

    def energy(self):
        """``sum |g_hat|^2 dxi^d``."""
        return float(np.sum(np.abs(self.values) ** 2)) * float(np.prod(self.freq_step))

    def multiply(self, factor):
        return Spectrum(self.values * factor, self.freq_step, self.source_spacing, self.origin,
                        self.source_shape, self.boundary)


def padded_shape(shape, pad):
    if pad is None or pad <= 1:
        return tuple(shape)
    return tuple(sfft.next_fast_len(int(math.ceil(n * pad))) for n in shape)


def _origin_phase(shape, spacing, origin, sign):
    """Separable factor ``exp(sign * 2 pi i <origin, xi>)`` on the centred lattice."""
    out = np.ones(shape, dtype=complex)
    for a, (n, o) in enumerate(zip(shape, origin)):
        xi = sfft.fftshift(sfft.fftfreq(n, spacing))
        out = out * np.exp(sign * 2j * np.pi * o * xi).reshape([-1 if i == a else 1 for i in range(len(shape))])
    return out


def _transform_values(values, spacing, origin, boundary, pad):
    shape = padded_shape(values.shape, pad)
    raw = sfft.fftn(values, s=shape, workers=_workers())
    vals = sfft.fftshift(raw) * spacing ** values.ndim * _origin_phase(shape, spacing, origin, -1)
    step = tuple(1.0 / (n * spacing) for n in shape)
    return Spectrum(vals, step, spacing, tuple(origin), values.shape, boundary)


def forward_transform(f, pad=None):
    """Transform ``f``; ``pad`` (> 1) zero-pads each axis to ``ceil(pad * n)`` (then a fast FFT length)."""
    check_field(f)
    if pad is not None and pad > 1 and f.boundary == "periodic":
        raise ConfigDensityError("requires_compact_support", "zero-padding a periodic field changes its meaning")
    return _transform_values(f.values, f.spacing, f.origin, f.boundary, pad)


def inverse_transform(s, crop=True):
    """Real part of the inverse transform as a plain array (cropped to the source grid by default)."""
    raw = s.values * _origin_phase(s.shape, s.source_spacing, s.origin, +1)
    vals = sfft.ifftn(sfft.ifftshift(raw), workers=_workers()).real / s.source_spacing ** s.dim
    if crop:
        vals = vals[tuple(slice(0, n) for n in s.source_shape)]
    return vals


# --------------------------------------------------------------------------
# Bessel J0
# --------------------------------------------------------------------------

_SERIES_CUTOFF = 12.0
_SERIES_TERMS = 48
_ASYMPTOTIC_TERMS = 26


def _hankel_coefficients(n):
    # a_k(0) = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    a = [1.0]
    for k in range(1, n):
        a.append(a[-1] * (-(2 * k - 1) ** 2) / (k * 8.0))
    return a


_HANKEL = _hankel_coefficients(_ASYMPTOTIC_TERMS)


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Power series for ``|x| < 12``; Hankel's asymptotic expansion (truncated near
    its smallest term) beyond.  Absolute error is below 1e-10 everywhere.
    """
    x = np.abs(np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    small = x < _SERIES_CUTOFF
    if np.any(small):
        z = -(x[small] / 2.0) ** 2
        term = np.ones_like(z)
        acc = np.ones_like(z)
        for k in range(1, _SERIES_TERMS):
            term = term * z / (k * k)
            acc = acc + term
        out[small] = acc

    big = ~small
    if np.any(big):
        xb = x[big]
        inv = 1.0 / xb
        p = np.zeros_like(xb)
        q = np.zeros_like(xb)
        power = np.ones_like(xb)
        for k, a in enumerate(_HANKEL):
            # J0 ~ sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)],
            # P = sum_k (-1)^k a_2k / x^2k, Q = sum_k (-1)^k a_(2k+1) / x^(2k+1)
            if k % 2 == 0:
                p = p + (-1) ** (k // 2) * a * power
            else:
                q = q + (-1) ** (k // 2) * a * power
            power = power * inv
        c, s = np.cos(xb), np.sin(xb)
        cos_chi = (c + s) / math.sqrt(2.0)
        sin_chi = (s - c) / math.sqrt(2.0)
        out[big] = np.sqrt(2.0 / (np.pi * xb)) * (p * cos_chi - q * sin_chi)

    if "j0_sign_flip" in active_faults.get():
        out = -out
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# multipliers
# --------------------------------------------------------------------------


def circle_multiplier(s, t):
    """Multiply by ``sigma_hat(t xi) = J0(2 pi t |xi|)``: convolution with the circle of radius ``t``."""
    if s.dim != 2:
        raise ConfigDensityError("circle_measure_requires_2d", f"spectrum has dim {s.dim}")
    t = check_positive(t, "t", "invalid_scale", allow_zero=True)
    return s.multiply(bessel_j0(2.0 * np.pi * t * s.radius()))


def poisson_multiplier(s, lam):
    lam = check_positive(lam, "lambda", "invalid_lambda", allow_zero=True)
    return s.multiply(np.exp(-lam * s.radius()))


def poisson_kernel(x, lam):
    """Closed form of the 2-d kernel with transform ``exp(-lam |xi|)``.

    ``P(x) = c / (2 pi (c^2 + |x|^2)^(3/2))`` with ``c = lam / (2 pi)``.
    """
    x = np.asarray(x, dtype=float)
    c = lam / (2.0 * np.pi)
    r2 = np.sum(x ** 2, axis=-1)
    return c / (2.0 * np.pi * (c * c + r2) ** 1.5)


def poisson_smooth_values(f, lam, pad=2.0, crop=True):
    """Unclamped ``f * P_lam`` as an array.

    Periodic fields are convolved on their own torus.  Compactly supported
    fields are zero-padded by ``pad`` per axis; with ``crop=False`` the whole
    padded torus is returned, on which mass is preserved exactly.
    """
    check_field(f)
    lam = check_positive(lam, "lambda", "invalid_lambda", allow_zero=True)
    if lam == 0.0:
        return np.array(f.values)
    use_pad = None if f.boundary == "periodic" else pad
    spec = _transform_values(f.values, f.spacing, f.origin, f.boundary, use_pad)
    return inverse_transform(poisson_multiplier(spec, lam), crop=crop)


def poisson_smooth(f, lam, pad=2.0, return_clamp=False):
    """``f * P_lam`` on the grid of ``f``, clamped into [0, 1].

    Discretisation ringing can push values slightly outside [0, 1]; the
    largest correction is logged (and returned with ``return_clamp=True``).
    """
    vals = poisson_smooth_values(f, lam, pad=pad, crop=True)
    clamp = float(max(0.0, -vals.min(), vals.max() - 1.0))
    if clamp > 0.0:
        logger.debug("poisson_smooth(lam=%g): clamped by %.3e", lam, clamp)
    out = f.with_values(np.clip(vals, 0.0, 1.0))
    return (out, clamp) if return_clamp else out


def smoothed_difference_l1(f, lam1, lam2, pad=2.0):
    """``|| f*P_lam1 - f*P_lam2 ||_1`` summed over the (padded) torus."""
    check_field(f)
    use_pad = None if f.boundary == "periodic" else pad
    spec = _transform_values(f.values, f.spacing, f.origin, f.boundary, use_pad)
    r = spec.radius()
    diff = inverse_transform(spec.multiply(np.exp(-lam1 * r) - np.exp(-lam2 * r)), crop=False)
    return float(np.abs(diff).sum()) * f.spacing ** f.dim


def _rect_antiderivative(x, y, c):
    # int_0^x int_0^y P = atan(x y / (c sqrt(c^2 + x^2 + y^2))) / (2 pi), the
    # solid angle of a rectangle seen from height c
    return np.arctan2(x * y, c * np.sqrt(c * c + x * x + y * y)) / (2.0 * np.pi)


def poisson_cell_integrals(lam, spacing, radius_cells):
    """Exact integrals of the 2-d kernel over the cells at offsets ``-R..R`` (per axis)."""
    lam = check_positive(lam, "lambda", "invalid_lambda", allow_zero=True)
    k = np.arange(-radius_cells, radius_cells + 1)
    if lam == 0.0:
        out = np.zeros((k.size, k.size))
        out[radius_cells, radius_cells] = 1.0
        return out
    edges = (np.append(k, radius_cells + 1) - 0.5) * spacing
    c = lam / (2.0 * np.pi)
    F = _rect_antiderivative(edges[:, None], edges[None, :], c)
    return F[1:, 1:] - F[:-1, 1:] - F[1:, :-1] + F[:-1, :-1]


def _exact_convolution(f, K, R, extend):
    from scipy.signal import fftconvolve

    n0, n1 = f.shape
    full = fftconvolve(f.values, K, mode="full")
    # output sample i (i = -extend .. n-1+extend) sits at full index i + R
    return full[R - extend:R + n0 + extend, R - extend:R + n1 + extend]


def _check_planar_compact(f):
    check_field(f, dim=2, code="circle_measure_requires_2d")
    if f.boundary == "periodic":
        raise ConfigDensityError("requires_compact_support", "exact kernel convolution needs a compactly supported field")


def poisson_convolve_exact(f, lam, extend=0):
    """``f * P_lam`` for a 2-d compactly supported field, exact for the piecewise-constant field.

    Each cell contributes the integral of the kernel over that cell, so there is
    no periodisation and no kernel sampling error.  Values are returned at the
    sample points of the grid enlarged by ``extend`` cells on every side.
    """
    _check_planar_compact(f)
    extend = int(extend)
    R = max(f.shape) - 1 + extend
    return _exact_convolution(f, poisson_cell_integrals(lam, f.spacing, R), R, extend)


def smoothed_difference_l1_exact(f, lam1, lam2, extend=None):
    """``|| f*P_lam1 - f*P_lam2 ||_1`` over the whole plane for a 2-d compactly supported field.

    The difference is evaluated exactly on the grid enlarged by ``extend`` cells
    (default: half the grid size).  Outside that window both convolutions are
    non-negative and the difference integrates to minus the window total, so
    ``|window total|`` is added for the remainder.  That is exact whenever one
    of the two terms dominates outside the window, the usual situation when
    ``lam2 >> lam1``; otherwise it is a lower bound.
    """
    _check_planar_compact(f)
    check_positive(lam1, "lambda1", "invalid_lambda", allow_zero=True)
    check_positive(lam2, "lambda2", "invalid_lambda", allow_zero=True)
    extend = max(f.shape) // 2 if extend is None else int(extend)
    R = max(f.shape) - 1 + extend
    K = poisson_cell_integrals(lam1, f.spacing, R) - poisson_cell_integrals(lam2, f.spacing, R)
    win = _exact_convolution(f, K, R, extend)
    cell = f.spacing ** 2
    return float(np.abs(win).sum()) * cell + abs(float(win.sum())) * cell


def as_field(f, values):
    """Clamp ``values`` into [0, 1] and wrap them on the grid of ``f``."""
    return DensityField(np.clip(values, 0.0, 1.0), f.spacing, f.origin, f.boundary)
