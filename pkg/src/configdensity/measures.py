"""Quadratures for the circle measure and the exponential ray measure, and the
ray measure's Fourier transform.

For a unit vector ``y`` and ``alpha > 0`` the ray measure is
``nu(A) = int_0^inf e^{-s} 1_A(2 alpha y_perp + s y) ds``, a probability
measure on the ray leaving ``2 alpha y_perp`` in direction ``y``.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from ._validation import ConfigDensityError, check_positive
from .spectral import active_faults

__all__ = [
    "CircleQuadrature",
    "RayQuadrature",
    "circle_quadrature",
    "ray_quadrature",
    "sphere_directions",
    "perp",
    "nu_hat_closed",
    "nu_hat_numeric",
    "nu_abs_circle_average",
    "nu_abs_theta_integral",
    "default_circle_nodes",
]


def _quarter_turn_cos_sin(j, n):
    """cos/sin of 2 pi j / n, exact at multiples of a quarter turn."""
    j = np.asarray(j)
    q, r = np.divmod(4 * j, n)
    ang = 0.5 * np.pi * r / n
    c, s = np.cos(ang), np.sin(ang)
    q = q % 4
    cos = np.select([q == 0, q == 1, q == 2, q == 3], [c, -s, -c, s])
    sin = np.select([q == 0, q == 1, q == 2, q == 3], [s, c, -s, -c])
    return cos, sin


def perp(y):
    """Anticlockwise quarter-turn rotation."""
    y = np.asarray(y, dtype=float)
    return np.stack([-y[..., 1], y[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class CircleQuadrature:
    """Trapezoid rule for the normalised arc-length measure on the unit circle."""

    n_nodes: int
    nodes: np.ndarray
    weights: np.ndarray
    perp: np.ndarray


@dataclass(frozen=True, eq=False)
class RayQuadrature:
    """Gauss-Laguerre rule for ``int_0^inf e^{-s} phi(s) ds``."""

    m_nodes: int
    nodes: np.ndarray
    weights: np.ndarray


def circle_quadrature(n):
    n = int(n)
    if n < 4:
        raise ConfigDensityError("too_few_nodes", f"circle quadrature needs n >= 4, got {n}")
    c, s = _quarter_turn_cos_sin(np.arange(n), n)
    nodes = np.stack([c, s], axis=1)
    return CircleQuadrature(n, nodes, np.full(n, 1.0 / n), perp(nodes))


def ray_quadrature(m):
    m = int(m)
    if m < 2:
        raise ConfigDensityError("too_few_nodes", f"ray quadrature needs m >= 2, got {m}")
    with np.errstate(all="ignore"):
        s, w = laggauss(m)
    if not (np.all(np.isfinite(w)) and np.all(s > 0)):
        raise ConfigDensityError("too_few_nodes", f"Gauss-Laguerre rule of order {m} is numerically unavailable")
    return RayQuadrature(m, s, w)


def sphere_directions(n):
    """Deterministic near-uniform unit vectors in R^3 (golden-angle spiral), equal weights."""
    n = int(n)
    if n < 4:
        raise ConfigDensityError("too_few_nodes", f"sphere point set needs n >= 4, got {n}")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(1.0 - z * z)
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def _check_unit(y):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != 2 or not np.allclose(np.linalg.norm(y, axis=-1), 1.0, atol=1e-12):
        raise ConfigDensityError("invalid_parameter", "y must be a unit vector in R^2")
    return y


def nu_hat_closed(y, alpha, xi):
    """``exp(-4 pi i alpha <y_perp, xi>) / (1 + 2 pi i <y, xi>)``; broadcasts over leading axes."""
    y = _check_unit(y)
    xi = np.asarray(xi, dtype=float)
    yp = perp(y)
    a = np.sum(y * xi, axis=-1)
    b = np.sum(yp * xi, axis=-1)
    out = np.exp(-4j * np.pi * alpha * b) / (1.0 + 2j * np.pi * a)
    if "nu_hat_scale" in active_faults.get():
        out = 1.01 * out
    return out


# Gauss-Laguerre with m >= 16 nodes resolves e^{-i w s} to ~1e-13 for |w| <= 1
_DIRECT_OMEGA = 1.0


def nu_hat_numeric(y, alpha, xi, rq=None):
    """Quadrature of ``int_0^inf exp(-2 pi i <2 alpha y_perp + s y, xi> - s) ds``.

    The ray factor ``e^{-s} e^{-i w s}`` (``w = 2 pi <y, xi>``) goes to the
    Gauss-Laguerre rule directly when ``|w| <= 1``.  For faster oscillation
    the integral is folded onto one period ``P = 2 pi / |w|``:
    ``int_0^inf = (1 - e^{-P})^{-1} int_0^P``, and the single period is done
    with an ``m``-point Gauss-Legendre rule.
    """
    y = _check_unit(y)
    alpha = check_positive(alpha, "alpha", "invalid_parameter")
    rq = ray_quadrature(64) if rq is None else rq
    xi = np.asarray(xi, dtype=float)
    yp = perp(y)
    w = 2.0 * np.pi * float(np.dot(y, xi))
    phase = np.exp(-4j * np.pi * alpha * float(np.dot(yp, xi)))
    if abs(w) <= _DIRECT_OMEGA:
        ray = np.sum(rq.weights * np.exp(-1j * w * rq.nodes))
    else:
        period = 2.0 * np.pi / abs(w)
        u, v = leggauss(rq.m_nodes)
        s = 0.5 * period * (u + 1.0)
        one = 0.5 * period * np.sum(v * np.exp(-s) * np.exp(-1j * w * s))
        ray = one / -np.expm1(-period)
    return complex(phase * ray)


def default_circle_nodes(xi_norm):
    """Trapezoid node count for ``int |nu_hat| d sigma``: error ~1e-9 across ``|xi| <= 1e3``."""
    n = max(256, int(math.ceil(128.0 * float(xi_norm))))
    return n + (-n) % 4


def nu_abs_circle_average(xi, alpha, cq=None):
    """Circle-quadrature value of ``int |nu_hat_y(xi)| d sigma(y)`` (independent of alpha)."""
    check_positive(alpha, "alpha", "invalid_parameter")
    xi = np.asarray(xi, dtype=float)
    if cq is None:
        cq = circle_quadrature(default_circle_nodes(np.linalg.norm(xi)))
    vals = np.abs(nu_hat_closed(cq.nodes, alpha, xi))
    return float(np.sum(cq.weights * vals))


def nu_abs_theta_integral(xi_norm, n=None):
    """``int_0^1 (1 + 4 pi^2 |xi|^2 cos^2(2 pi theta))^{-1/2} d theta`` by the periodic trapezoid rule."""
    n = default_circle_nodes(xi_norm) if n is None else int(n)
    theta = np.arange(n) / n
    a2 = 4.0 * np.pi ** 2 * float(xi_norm) ** 2
    return float(np.mean(1.0 / np.sqrt(1.0 + a2 * np.cos(2.0 * np.pi * theta) ** 2)))
