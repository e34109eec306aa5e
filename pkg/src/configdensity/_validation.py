"""Error type and argument checks shared by every module."""

import math

import numpy as np


class ConfigDensityError(ValueError):
    """Raised for any contract violation.

    ``code`` is a short machine-readable tag such as ``"support_clipped"`` or
    ``"invalid_scale"``; tests and the CLI match on it rather than on the
    message text.
    """

    def __init__(self, code, message=None):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


BOUNDARIES = ("zero_outside", "periodic")


def check_positive(value, name, code, allow_zero=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigDensityError(code, f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigDensityError(code, f"{name} must be finite and {bound}, got {value}")
    return value


def check_vector(v, dim, name="vector", code="invalid_parameter"):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape == (1,) and dim > 1:
        arr = np.full(dim, arr[0])
    if arr.shape != (dim,):
        raise ConfigDensityError(code, f"{name} must have length {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigDensityError(code, f"{name} must be finite")
    return arr


def check_boundary(boundary):
    if boundary not in BOUNDARIES:
        raise ConfigDensityError("invalid_parameter", f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    return boundary


def check_field(f, dim=None, boundary=None, code=None):
    """Validate that ``f`` is a DensityField with the requested dimension/boundary."""
    from .field import DensityField

    if not isinstance(f, DensityField):
        raise TypeError(f"expected a DensityField, got {type(f).__name__}")
    if dim is not None:
        dims = (dim,) if isinstance(dim, int) else tuple(dim)
        if f.dim not in dims:
            raise ConfigDensityError(code or "invalid_dimension", f"field has dim {f.dim}, need one of {dims}")
    if boundary is not None and f.boundary != boundary:
        raise ConfigDensityError(code or "invalid_boundary", f"field boundary is {f.boundary!r}, need {boundary!r}")
    return f
