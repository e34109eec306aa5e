"""Discretized density fields: functions from R^d (d <= 3) into [0, 1].

A field stores one value per grid cell.  Sample ``i`` sits at
``origin + i * spacing`` and is the centre of the cell
``[x_i - h/2, x_i + h/2)``; integrals treat the field as piecewise constant on
those cells, while reads at off-lattice points use multilinear interpolation
between the sample points.
"""

import itertools
import json
import math
import struct
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._validation import (
    ConfigDensityError,
    check_boundary,
    check_positive,
    check_vector,
)

__all__ = [
    "Grid",
    "DensityField",
    "GeneratorSpec",
    "ShiftReader",
    "generate",
    "translate",
    "rescale",
    "sample",
    "window_average",
    "save",
    "load",
]

_SNAP = 1e-9


@dataclass(frozen=True)
class Grid:
    """Regular grid description: per-axis sizes, uniform spacing, sample-0 position."""

    shape: tuple
    spacing: float
    origin: tuple
    boundary: str = "zero_outside"

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        if not 1 <= len(shape) <= 3:
            raise ConfigDensityError("invalid_dimension", f"dimension must be 1, 2 or 3, got {len(shape)}")
        if any(n < 2 for n in shape):
            raise ConfigDensityError("invalid_grid", f"every axis needs at least 2 cells, got {shape}")
        spacing = check_positive(self.spacing, "spacing", "invalid_grid")
        origin = tuple(float(o) for o in check_vector(self.origin, len(shape), "origin", "invalid_grid"))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)
        check_boundary(self.boundary)

    @classmethod
    def centered(cls, shape, spacing, center=0.0, boundary="zero_outside"):
        """Grid whose cells exactly tile a box centred on ``center``."""
        shape = tuple(int(n) for n in np.atleast_1d(shape))
        center = check_vector(center, len(shape), "center", "invalid_grid")
        origin = center - (np.asarray(shape) - 1) * spacing / 2.0
        return cls(shape, spacing, tuple(origin), boundary)

    @classmethod
    def from_bounds(cls, lower, upper, spacing, boundary="zero_outside"):
        """Grid whose cells tile ``[lower, upper]`` (per-axis lengths must be multiples of spacing)."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        counts = (upper - lower) / spacing
        shape = np.rint(counts).astype(int)
        if np.any(np.abs(counts - shape) > 1e-6):
            raise ConfigDensityError("invalid_grid", "box lengths must be integer multiples of the spacing")
        return cls(tuple(shape), spacing, tuple(lower + spacing / 2.0), boundary)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def extent(self):
        return tuple(n * self.spacing for n in self.shape)

    @property
    def lower(self):
        """Lower cell edge per axis."""
        return tuple(o - self.spacing / 2.0 for o in self.origin)

    @property
    def upper(self):
        return tuple(lo + e for lo, e in zip(self.lower, self.extent))

    def axes(self):
        return [o + self.spacing * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def points(self):
        """Sample coordinates, shape ``shape + (dim,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def cell_volume(self):
        return self.spacing ** self.dim

    def with_boundary(self, boundary):
        return Grid(self.shape, self.spacing, self.origin, boundary)

    def to_dict(self):
        return {"shape": list(self.shape), "spacing": self.spacing, "origin": list(self.origin), "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d):
        """Accepts ``origin`` directly, or ``center`` (cells centred on it), or ``lower``."""
        boundary = d.get("boundary", "zero_outside")
        if "origin" in d:
            return cls(tuple(d["shape"]), d["spacing"], tuple(np.atleast_1d(d["origin"])), boundary)
        if "lower" in d:
            lower = np.atleast_1d(np.asarray(d["lower"], dtype=float))
            return cls(tuple(d["shape"]), d["spacing"], tuple(lower + d["spacing"] / 2.0), boundary)
        return cls.centered(d["shape"], d["spacing"], d.get("center", 0.0), boundary)


@dataclass(frozen=True, eq=False)
class DensityField:
    """A function R^d -> [0, 1] sampled on a regular grid.

    Immutable: ``values`` is stored as a read-only float64 array.
    """

    values: np.ndarray
    spacing: float
    origin: tuple
    boundary: str = "zero_outside"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        grid = Grid(values.shape, self.spacing, self.origin, self.boundary)
        if not np.all(np.isfinite(values)):
            raise ConfigDensityError("invariant_violation", "field values must be finite")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ConfigDensityError(
                "invariant_violation",
                f"field values must lie in [0, 1], got range [{values.min()}, {values.max()}]",
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "spacing", grid.spacing)
        object.__setattr__(self, "origin", grid.origin)

    @classmethod
    def on_grid(cls, grid, values):
        return cls(values, grid.spacing, grid.origin, grid.boundary)

    @classmethod
    def zeros(cls, grid):
        return cls.on_grid(grid, np.zeros(grid.shape))

    @property
    def grid(self):
        return Grid(self.values.shape, self.spacing, self.origin, self.boundary)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    @property
    def extent(self):
        return self.grid.extent

    @property
    def mass(self):
        """Integral of the piecewise-constant representative."""
        return float(self.values.sum()) * self.spacing ** self.dim

    @property
    def support_measure(self):
        return float(np.count_nonzero(self.values)) * self.spacing ** self.dim

    def with_values(self, values):
        return DensityField(values, self.spacing, self.origin, self.boundary)

    def equals(self, other):
        """Bit-exact comparison of values and metadata."""
        return (
            isinstance(other, DensityField)
            and self.shape == other.shape
            and self.spacing == other.spacing
            and self.origin == other.origin
            and self.boundary == other.boundary
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"DensityField(shape={self.shape}, spacing={self.spacing}, origin={self.origin}, "
            f"boundary={self.boundary!r}, mass={self.mass:.6g})"
        )


# --------------------------------------------------------------------------
# multilinear reads
# --------------------------------------------------------------------------


def _axis_corners(offset):
    k = math.floor(offset)
    w = offset - k
    if w < _SNAP:
        return [(k, 1.0)]
    if 1.0 - w < _SNAP:
        return [(k + 1, 1.0)]
    return [(k, 1.0 - w), (k + 1, w)]


def _overlap_slices(n, k):
    """dst/src slices so that ``out[dst] = arr[src]`` realises ``out[i] = arr[i + k]`` with zero fill."""
    lo = max(0, -k)
    hi = min(n, n - k)
    if hi <= lo:
        return None
    return slice(lo, hi), slice(lo + k, hi + k)


class ShiftReader:
    """Reads ``g(x + offset)`` at every sample point ``x`` by multilinear interpolation.

    Offsets are in cell units.  Reads outside the grid are zero for
    ``zero_outside`` and wrap for ``periodic``.  Lattice-aligned offsets are
    exact (no interpolation weights are formed).
    """

    def __init__(self, values, boundary="zero_outside"):
        self.values = np.asarray(values, dtype=np.float64)
        self.periodic = boundary == "periodic"
        self.shape = self.values.shape
        dim = self.values.ndim
        letters = "ijk"[:dim]
        self._dot_spec = f"{letters},{letters}->"

    def corners(self, offset):
        offset = np.broadcast_to(np.asarray(offset, dtype=float), (len(self.shape),))
        per_axis = [_axis_corners(o) for o in offset]
        for combo in itertools.product(*per_axis):
            ks = tuple(c[0] for c in combo)
            w = 1.0
            for c in combo:
                w *= c[1]
            yield ks, w

    def _slices(self, ks):
        dst, src = [], []
        for n, k in zip(self.shape, ks):
            s = _overlap_slices(n, k)
            if s is None:
                return None
            dst.append(s[0])
            src.append(s[1])
        return tuple(dst), tuple(src)

    def shifted(self, offset):
        out = np.zeros(self.shape)
        for ks, w in self.corners(offset):
            if self.periodic:
                out += w * np.roll(self.values, [-k for k in ks], axis=tuple(range(len(ks))))
                continue
            sl = self._slices(ks)
            if sl is not None:
                out[sl[0]] += w * self.values[sl[1]]
        return out

    def dot(self, weights, offset):
        """``sum(weights * shifted(offset))`` without materialising the shifted array."""
        acc = 0.0
        for ks, w in self.corners(offset):
            if self.periodic:
                rolled = np.roll(self.values, [-k for k in ks], axis=tuple(range(len(ks))))
                acc += w * float(np.einsum(self._dot_spec, weights, rolled))
                continue
            sl = self._slices(ks)
            if sl is not None:
                acc += w * float(np.einsum(self._dot_spec, weights[sl[0]], self.values[sl[1]]))
        return acc


def sample(f, points):
    """Multilinear interpolation of ``f`` at physical ``points`` (shape ``(..., dim)``)."""
    points = np.asarray(points, dtype=float)
    lead = points.shape[:-1]
    pts = points.reshape(-1, f.dim)
    u = (pts - np.asarray(f.origin)) / f.spacing
    k = np.floor(u)
    w = u - k
    k = k.astype(np.int64)
    out = np.zeros(len(pts))
    shape = np.asarray(f.shape)
    for corner in itertools.product((0, 1), repeat=f.dim):
        c = np.asarray(corner)
        idx = k + c
        wt = np.prod(np.where(c == 1, w, 1.0 - w), axis=1)
        if f.boundary == "periodic":
            idx = np.mod(idx, shape)
            out += wt * f.values[tuple(idx.T)]
        else:
            ok = np.all((idx >= 0) & (idx < shape), axis=1)
            vals = np.zeros(len(pts))
            vals[ok] = f.values[tuple(idx[ok].T)]
            out += wt * vals
    return out.reshape(lead)


def translate(f, v):
    """``(T_v f)(x) = f(x + v)`` on the same grid."""
    v = check_vector(v, f.dim, "v", "invalid_parameter")
    vals = ShiftReader(f.values, f.boundary).shifted(v / f.spacing)
    return f.with_values(np.clip(vals, 0.0, 1.0))


def rescale(f, t, grid=None):
    """``(Z_t f)(x) = f(t x)`` sampled on ``grid`` (default: the grid of ``f``)."""
    try:
        t = float(t)
    except (TypeError, ValueError):
        raise ConfigDensityError("invalid_scale", f"scale must be a real number, got {t!r}")
    if not math.isfinite(t) or t <= 0:
        raise ConfigDensityError("invalid_scale", f"scale must be finite and > 0, got {t}")
    grid = f.grid if grid is None else grid
    if grid.dim != f.dim:
        raise ConfigDensityError("invalid_dimension", "output grid dimension differs from field")
    if t == 1.0 and grid == f.grid:
        return f
    vals = sample(f, t * grid.points())
    return DensityField(np.clip(vals, 0.0, 1.0), grid.spacing, grid.origin, f.boundary)


# --------------------------------------------------------------------------
# cell-overlap integrals
# --------------------------------------------------------------------------


def _axis_overlap(lower_edge, h, n, a, b, periodic):
    """Overlap length of each cell with the interval [a, b]; periodic fields fold images back."""
    if periodic:
        j0 = math.floor((a - lower_edge) / h)
        j1 = math.ceil((b - lower_edge) / h)
        j = np.arange(j0, j1 + 1)
        lo = lower_edge + j * h
        ov = np.clip(np.minimum(lo + h, b) - np.maximum(lo, a), 0.0, None)
        return np.bincount(np.mod(j, n), weights=ov, minlength=n)
    lo = lower_edge + np.arange(n) * h
    return np.clip(np.minimum(lo + h, b) - np.maximum(lo, a), 0.0, None)


def cube_integral(f, lower, upper):
    """Exact integral of the piecewise-constant field over the box ``[lower, upper]``."""
    grid = f.grid
    weights = [
        _axis_overlap(le, f.spacing, n, a, b, f.boundary == "periodic")
        for le, n, a, b in zip(grid.lower, f.shape, lower, upper)
    ]
    acc = f.values
    for w in reversed(weights):
        acc = acc @ w
    return float(acc)


def window_average(f, center, side):
    """Average of ``f`` over the axis-parallel cube with given centre and side length."""
    side = check_positive(side, "side", "invalid_parameter")
    center = check_vector(center, f.dim, "center")
    val = cube_integral(f, center - side / 2.0, center + side / 2.0) / side ** f.dim
    return min(max(val, 0.0), 1.0)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

GENERATOR_KINDS = ("constant_on_box", "ball", "union_balls", "periodic_squares", "bernoulli_cells", "custom_file")


@dataclass(frozen=True)
class GeneratorSpec:
    """What to draw: ``kind`` plus kind-specific ``params`` and a seed for random kinds.

    Parameters per kind (``delta`` is the value taken inside the set unless noted):

    - ``constant_on_box``: ``delta``, ``box`` (``[[lo, hi], ...]``; omitted = whole grid)
    - ``ball``: ``delta``, ``radius``, ``center``
    - ``union_balls``: ``delta``, ``radius``, ``count``, ``box`` (balls lie inside it)
    - ``periodic_squares``: ``delta``, ``period``, ``side`` (default period/2), ``phase``, ``box``
    - ``bernoulli_cells``: ``delta`` (fill probability), ``level`` (default 1), ``cell``, ``box``
    - ``custom_file``: ``path`` of a ``.dfield`` file, resampled onto the grid
    """

    kind: str
    params: dict = dc_field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ConfigDensityError("invalid_generator", f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))
        seed = int(self.seed)
        if not 0 <= seed < 2 ** 64:
            raise ConfigDensityError("invalid_generator", "seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", seed)
        p = self.params
        for key in ("delta", "level"):
            if key in p and not 0.0 <= float(p[key]) <= 1.0:
                raise ConfigDensityError("invalid_generator", f"{key} must lie in [0, 1], got {p[key]}")
        for key in ("radius", "period", "cell", "side"):
            if key in p:
                check_positive(p[key], key, "invalid_generator")

    def to_json(self):
        return json.dumps({"kind": self.kind, "params": self.params, "seed": self.seed}, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text) if isinstance(text, str) else dict(text)
        try:
            return cls(d["kind"], d.get("params", {}), d.get("seed", 0))
        except KeyError as exc:
            raise ConfigDensityError("invalid_generator", f"missing key {exc}")


def _box_param(p, grid):
    box = p.get("box")
    if box is None:
        return np.asarray(grid.lower), np.asarray(grid.upper)
    box = np.asarray(box, dtype=float).reshape(grid.dim, 2)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ConfigDensityError("invalid_generator", f"box must have lo < hi on every axis, got {box.tolist()}")
    return box[:, 0], box[:, 1]


def _check_support(lo, hi, grid, allow_clip):
    if allow_clip or grid.boundary == "periodic":
        return
    tol = 1e-9 * grid.spacing
    if np.any(np.asarray(lo) < np.asarray(grid.lower) - tol) or np.any(np.asarray(hi) > np.asarray(grid.upper) + tol):
        raise ConfigDensityError(
            "support_clipped",
            f"support [{np.asarray(lo).tolist()}, {np.asarray(hi).tolist()}] exceeds grid "
            f"[{list(grid.lower)}, {list(grid.upper)}]",
        )


def _outer(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _periodic_axis_coverage(edges_lo, h, period, side, phase):
    """Fraction of each cell covered by the union of [phase + k*period, phase + k*period + side)."""

    def cum(x):
        u = x - phase
        q = np.floor(u / period)
        return q * side + np.clip(u - q * period, 0.0, side)

    return (cum(edges_lo + h) - cum(edges_lo)) / h


def tile_coverage(grid, tile_values, tile, anchor, wrap=False):
    """Coverage of grid cells by a lattice of constant tiles.

    ``tile_values`` has one entry per tile; tile ``j`` spans
    ``[anchor + j*tile, anchor + (j+1)*tile)``.  With ``wrap`` the tile lattice is
    periodic (tile index taken modulo the tile count).
    """
    h = grid.spacing
    mats = []
    for a, (le, n) in enumerate(zip(grid.lower, grid.shape)):
        nt = tile_values.shape[a]
        edges = le + h * np.arange(n)
        j0 = math.floor((edges[0] - anchor[a]) / tile)
        j1 = math.floor((edges[-1] + h - anchor[a]) / tile)
        j = np.arange(j0, j1 + 1)
        t_lo = anchor[a] + j * tile
        ov = np.clip(np.minimum(edges[:, None] + h, t_lo[None, :] + tile) - np.maximum(edges[:, None], t_lo[None, :]), 0, None) / h
        if wrap:
            idx = np.mod(j, nt)
        else:
            keep = (j >= 0) & (j < nt)
            ov, idx = ov[:, keep], j[keep]
        m = np.zeros((n, nt))
        np.add.at(m.T, idx, ov.T)
        mats.append(m)
    out = tile_values
    for a, m in enumerate(mats):
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [a])), 0, a)
    return out


def ball_coverage(grid, centers, radius, supersample=8):
    """Fraction of every cell covered by the union of balls (periodic grids wrap balls).

    Cells wholly inside or outside a ball are classified from the centre
    distance; only cells cut by a sphere are supersampled.
    """
    h, dim = grid.spacing, grid.dim
    shape = np.asarray(grid.shape)
    origin = np.asarray(grid.origin)
    periodic = grid.boundary == "periodic"
    half_diag = h * math.sqrt(dim) / 2.0
    full = np.zeros(grid.shape, dtype=bool)
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    sub_pts = np.stack(np.meshgrid(*([sub] * dim), indexing="ij"), axis=-1).reshape(-1, dim) * h
    b_idx, b_mask = [], []
    for c in np.atleast_2d(centers):
        lo = np.floor((c - radius - origin) / h).astype(int) - 1
        hi = np.ceil((c + radius - origin) / h).astype(int) + 1
        if not periodic:
            lo = np.maximum(lo, 0)
            hi = np.minimum(hi, shape - 1)
            if np.any(hi < lo):
                continue
        rng = [np.arange(l, u + 1) for l, u in zip(lo, hi)]
        idx = np.stack(np.meshgrid(*rng, indexing="ij"), axis=-1).reshape(-1, dim)
        pos = origin + idx * h
        d = np.linalg.norm(pos - c, axis=1)
        if periodic:
            idx = np.mod(idx, shape)
        flat = np.ravel_multi_index(tuple(idx.T), grid.shape)
        inner = d + half_diag <= radius
        full.flat[flat[inner]] = True
        edge = (~inner) & (d - half_diag < radius)
        if np.any(edge):
            pts = pos[edge][:, None, :] + sub_pts[None, :, :]
            b_mask.append(np.linalg.norm(pts - c, axis=2) <= radius)
            b_idx.append(flat[edge])
    cov = full.astype(float)
    if b_idx:
        idx = np.concatenate(b_idx)
        masks = np.concatenate(b_mask).astype(np.uint8)
        order = np.argsort(idx, kind="stable")
        idx, masks = idx[order], masks[order]
        starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
        merged = np.maximum.reduceat(masks, starts, axis=0)
        cells = idx[starts]
        frac = merged.mean(axis=1)
        partial = ~full.flat[cells]
        cov.flat[cells[partial]] = frac[partial]
    return cov


def generate(spec, grid, allow_clip=False):
    """Build the field described by ``spec`` on ``grid``; a pure function of both."""
    if isinstance(spec, dict):
        spec = GeneratorSpec.from_json(spec)
    p = spec.params
    kind = spec.kind
    dim = grid.dim
    rng = np.random.default_rng(spec.seed)
    delta = float(p.get("delta", 1.0))

    if kind == "constant_on_box":
        lo, hi = _box_param(p, grid)
        _check_support(lo, hi, grid, allow_clip)
        ws = [_axis_overlap(le, grid.spacing, n, a, b, grid.boundary == "periodic") / grid.spacing
              for le, n, a, b in zip(grid.lower, grid.shape, lo, hi)]
        vals = delta * _outer(ws)
    elif kind == "ball":
        radius = float(p["radius"])
        center = check_vector(p.get("center", 0.0), dim, "center", "invalid_generator")
        _check_support(center - radius, center + radius, grid, allow_clip)
        vals = delta * ball_coverage(grid, center[None, :], radius, int(p.get("supersample", 8)))
    elif kind == "union_balls":
        radius = float(p["radius"])
        count = int(p["count"])
        lo, hi = _box_param(p, grid)
        _check_support(lo, hi, grid, allow_clip)
        if np.any(hi - lo < 2 * radius):
            raise ConfigDensityError("invalid_generator", "box is too small to contain a ball of this radius")
        centers = lo + radius + rng.random((count, dim)) * (hi - lo - 2 * radius)
        vals = delta * ball_coverage(grid, centers, radius, int(p.get("supersample", 8)))
    elif kind == "periodic_squares":
        period = float(p["period"])
        side = float(p.get("side", period / 2.0))
        if side > period:
            raise ConfigDensityError("invalid_generator", "side must not exceed period")
        phase = check_vector(p.get("phase", 0.0), dim, "phase", "invalid_generator")
        ws = [_periodic_axis_coverage(le + grid.spacing * np.arange(n), grid.spacing, period, side, ph)
              for le, n, ph in zip(grid.lower, grid.shape, phase)]
        vals = _outer(ws)
        if "box" in p:
            lo, hi = _box_param(p, grid)
            _check_support(lo, hi, grid, allow_clip)
            vals = vals * _outer([_axis_overlap(le, grid.spacing, n, a, b, False) / grid.spacing
                                  for le, n, a, b in zip(grid.lower, grid.shape, lo, hi)])
        vals = delta * vals
    elif kind == "bernoulli_cells":
        cell = float(p.get("cell", 1.0))
        level = float(p.get("level", 1.0))
        lo, hi = _box_param(p, grid)
        _check_support(lo, hi, grid, allow_clip)
        counts = np.maximum(np.ceil((hi - lo) / cell - 1e-9).astype(int), 1)
        filled = (rng.random(tuple(counts)) < delta).astype(float)
        vals = level * tile_coverage(grid, filled, cell, lo)
        if np.any(np.abs(counts * cell - (hi - lo)) > 1e-9):
            vals = vals * _outer([_axis_overlap(le, grid.spacing, n, a, b, False) / grid.spacing
                                  for le, n, a, b in zip(grid.lower, grid.shape, lo, hi)])
    else:  # custom_file
        src = load(p["path"])
        if src.dim != dim:
            raise ConfigDensityError("invalid_generator", "custom field dimension differs from grid")
        if src.grid.with_boundary(grid.boundary) == grid:
            vals = src.values
        else:
            _check_support(src.grid.lower, src.grid.upper, grid, allow_clip)
            vals = sample(src, grid.points())
    return DensityField.on_grid(grid, np.clip(vals, 0.0, 1.0))


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

MAGIC = b"DFIELD\x00\x01"
_BOUNDARY_CODES = {"zero_outside": 0, "periodic": 1}


def _header(f):
    head = struct.pack("<8sII", MAGIC, f.dim, _BOUNDARY_CODES[f.boundary])
    head += struct.pack(f"<{f.dim}Q", *f.shape)
    head += struct.pack("<d", f.spacing)
    head += struct.pack(f"<{f.dim}d", *f.origin)
    return head


def save(f, path):
    """Write ``f`` as a ``.dfield`` file: little-endian header then row-major float64 values."""
    with open(path, "wb") as fh:
        fh.write(_header(f))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigDensityError("bad_field_file", f"cannot read {path}: {exc.strerror}")
    try:
        magic, dim, bcode = struct.unpack_from("<8sII", raw, 0)
        if magic != MAGIC or dim not in (1, 2, 3) or bcode not in (0, 1):
            raise ConfigDensityError("bad_field_file", "unrecognised header")
        off = 16
        shape = struct.unpack_from(f"<{dim}Q", raw, off)
        off += 8 * dim
        (spacing,) = struct.unpack_from("<d", raw, off)
        off += 8
        origin = struct.unpack_from(f"<{dim}d", raw, off)
        off += 8 * dim
    except struct.error:
        raise ConfigDensityError("bad_field_file", "truncated header")
    count = int(np.prod(shape))
    if len(raw) - off != 8 * count:
        raise ConfigDensityError("bad_field_file", f"expected {8 * count} data bytes, found {len(raw) - off}")
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
    boundary = {v: k for k, v in _BOUNDARY_CODES.items()}[bcode]
    try:
        return DensityField(values, spacing, origin, boundary)
    except ConfigDensityError as exc:
        if exc.code == "invariant_violation":
            raise
        raise ConfigDensityError("bad_field_file", str(exc))
