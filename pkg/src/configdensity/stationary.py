"""Translation-invariant random fields and the large-window ergodic experiment."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConfigDensityError, check_positive
from .field import DensityField, Grid, ball_coverage, tile_coverage, window_average
from .parallel import ordered_map

__all__ = ["StationaryModel", "sample_stationary", "ergodic_average_experiment", "ErgodicTable"]

MODEL_KINDS = ("bernoulli_tiling", "poisson_balls")


@dataclass(frozen=True)
class StationaryModel:
    """A random field whose law is invariant under all translations.

    ``bernoulli_tiling``: params ``cell``, ``delta`` (fill probability),
    ``level`` (value of a filled cell, default 1).
    ``poisson_balls``: params ``intensity``, ``radius``, ``level``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigDensityError("invalid_parameter", f"unknown model kind {self.kind!r}")
        p = dict(self.params)
        object.__setattr__(self, "params", p)
        level = float(p.get("level", 1.0))
        if not 0.0 <= level <= 1.0:
            raise ConfigDensityError("invalid_parameter", f"level must lie in [0, 1], got {level}")
        if self.kind == "bernoulli_tiling":
            check_positive(p.get("cell", 1.0), "cell", "invalid_parameter")
            delta = float(p.get("delta", 0.5))
            if not 0.0 <= delta <= 1.0:
                raise ConfigDensityError("invalid_parameter", f"delta must lie in [0, 1], got {delta}")
        else:
            check_positive(p.get("intensity"), "intensity", "invalid_parameter", allow_zero=True)
            check_positive(p.get("radius"), "radius", "invalid_parameter")

    def with_seed(self, seed):
        return StationaryModel(self.kind, self.params, int(seed))

    def mean(self, dim=2):
        """Expected value of the field at any point."""
        p = self.params
        level = float(p.get("level", 1.0))
        if self.kind == "bernoulli_tiling":
            return level * float(p.get("delta", 0.5))
        r = float(p["radius"])
        ball = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * r ** dim
        return level * -math.expm1(-float(p["intensity"]) * ball)


def sample_stationary(model, grid):
    """Draw one realisation on a periodic grid; a pure function of ``(model, grid)``."""
    if grid.boundary != "periodic":
        raise ConfigDensityError("invalid_parameter", "stationary samples need a periodic grid")
    rng = np.random.default_rng(model.seed)
    p = model.params
    level = float(p.get("level", 1.0))
    ext = np.asarray(grid.extent)
    if model.kind == "bernoulli_tiling":
        cell = float(p.get("cell", 1.0))
        counts = ext / cell
        if np.any(np.abs(counts - np.rint(counts)) > 1e-9):
            raise ConfigDensityError("extent_not_multiple", f"grid extent {ext.tolist()} is not a multiple of cell {cell}")
        counts = np.rint(counts).astype(int)
        filled = (rng.random(tuple(counts)) < float(p.get("delta", 0.5))).astype(float)
        # a uniform phase inside one cell turns the lattice-periodic law into
        # a translation-invariant one
        phase = rng.uniform(0.0, cell, grid.dim)
        vals = level * tile_coverage(grid, filled, cell, np.asarray(grid.lower) + phase, wrap=True)
    else:
        volume = float(np.prod(ext))
        count = rng.poisson(float(p["intensity"]) * volume)
        centers = np.asarray(grid.lower) + rng.random((count, grid.dim)) * ext
        vals = level * ball_coverage(grid, centers, float(p["radius"]))
    return DensityField.on_grid(grid, np.clip(vals, 0.0, 1.0))


@dataclass
class ErgodicTable:
    t: list
    mean_abs_dev: list
    std_dev: list
    n_seeds: int
    deviations: np.ndarray
    model_mean: float

    def paired_decrease(self, i=0, j=-1):
        """Fraction of seeds whose deviation at ``t[j]`` is below the deviation at ``t[i]``."""
        return float(np.mean(self.deviations[:, j] < self.deviations[:, i]))

    def rows(self):
        return [
            {"t": t, "mean_abs_dev": m, "std_dev": s, "n_seeds": self.n_seeds}
            for t, m, s in zip(self.t, self.mean_abs_dev, self.std_dev)
        ]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "mean_abs_dev", "std_dev", "n_seeds"])
            for r in self.rows():
                w.writerow([repr(float(r["t"])), repr(float(r["mean_abs_dev"])), repr(float(r["std_dev"])), r["n_seeds"]])


def _seed_stream(base, n):
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(base).spawn(n)]


def ergodic_average_experiment(model, t_list, n_seeds, spacing=None, min_seeds=30):
    """Deviation of the centred window average from the model mean, across seeds and window sides.

    Each seed draws one periodic field large enough for the biggest window
    (side ``max(t)`` plus one cell), then averages over the cube of side
    ``t`` centred at the origin for every ``t``.
    """
    ts = [check_positive(t, "t", "invalid_parameter") for t in t_list]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigDensityError("invalid_parameter", "t_list must be strictly increasing")
    n_seeds = int(n_seeds)
    if n_seeds < min_seeds:
        raise ConfigDensityError("invalid_parameter", f"n_seeds must be >= {min_seeds}, got {n_seeds}")
    p = model.params
    unit = float(p.get("cell", 1.0)) if model.kind == "bernoulli_tiling" else float(p["radius"])
    h = float(spacing) if spacing is not None else unit / 2.0
    side = unit * math.ceil((ts[-1] + unit) / unit)
    n = int(round(side / h))
    grid = Grid.centered((n, n), h, 0.0, "periodic")
    mean = model.mean(2)

    def one(seed):
        f = sample_stationary(model.with_seed(seed), grid)
        return [abs(window_average(f, [0.0, 0.0], t) - mean) for t in ts]

    devs = np.asarray(ordered_map(one, _seed_stream(model.seed, n_seeds)))
    return ErgodicTable(ts, devs.mean(axis=0).tolist(), devs.std(axis=0, ddof=1).tolist(), n_seeds, devs, mean)
