"""Scale and area sweeps of configuration functionals, onset search, CSV and SVG output."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from ._validation import ConfigDensityError
from .field import GeneratorSpec, Grid, generate
from .functionals import colinear_triple, pair_correlation, positivity_threshold, triangle_d1
from .measures import circle_quadrature, ray_quadrature
from .parallel import ordered_map

__all__ = ["SweepConfig", "SweepRow", "run_sweep", "find_onset", "write_csv", "read_csv", "svg_plot", "CSV_COLUMNS"]

CSV_COLUMNS = ("t", "alpha", "value", "method", "positive", "elapsed_ns")
FUNCTIONALS = ("pair", "d1", "colinear")


def _config_error(name, message):
    return ConfigDensityError("config_error", f"{name}: {message}")


def _number(d, name, default=None, positive=False, integer=False):
    if name not in d:
        if default is None:
            raise _config_error(name, "is required")
        return default
    v = d[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _config_error(name, f"must be a number, got {v!r}")
    if integer and int(v) != v:
        raise _config_error(name, f"must be an integer, got {v!r}")
    if not math.isfinite(v) or (positive and v <= 0):
        raise _config_error(name, f"must be a finite{' positive' if positive else ''} number, got {v!r}")
    return int(v) if integer else float(v)


@dataclass
class SweepConfig:
    generator: GeneratorSpec
    grid: Grid
    functional: str = "pair"
    t_min: float = 1.0
    t_max: float = 16.0
    t_steps: int = 16
    t_spacing: str = "geometric"
    alpha_list: list = field(default_factory=lambda: [0.5])
    M: float | None = None
    method: str = "spatial"
    quadrature: dict = field(default_factory=dict)
    eps_num: float | None = None
    delta_nominal: float | None = None
    record_timing: bool = False
    output: str | None = None

    _KEYS = ("generator", "grid", "functional", "t_min", "t_max", "t_steps", "t_spacing", "alpha_list", "M",
             "method", "quadrature", "eps_num", "delta_nominal", "record_timing", "output")

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise _config_error("functional", f"must be one of {FUNCTIONALS}, got {self.functional!r}")
        if not (self.t_min > 0):
            raise _config_error("t_min", f"must be > 0, got {self.t_min}")
        if self.t_max < self.t_min:
            raise _config_error("t_max", f"must be >= t_min, got {self.t_max}")
        if self.t_steps < 2:
            raise _config_error("t_steps", f"must be >= 2, got {self.t_steps}")
        if self.t_spacing not in ("geometric", "linear"):
            raise _config_error("t_spacing", f"must be 'geometric' or 'linear', got {self.t_spacing!r}")
        if self.method not in ("spatial", "spectral"):
            raise _config_error("method", f"must be 'spatial' or 'spectral', got {self.method!r}")
        if self.method == "spectral" and self.functional != "pair":
            raise _config_error("method", "the spectral route exists only for the pair functional")
        if not self.alpha_list or any(not (a > 0) for a in self.alpha_list):
            raise _config_error("alpha_list", "must be a non-empty list of positive numbers")
        M = max(self.alpha_list) if self.M is None else self.M
        if any(a > M for a in self.alpha_list):
            raise _config_error("alpha_list", f"entries must lie in (0, M] with M = {M}")
        self.M = M

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise _config_error("config", "must be a JSON object")
        unknown = sorted(set(d) - set(cls._KEYS))
        if unknown:
            raise _config_error(unknown[0], "is not a recognised field")
        for key in ("generator", "grid"):
            if key not in d:
                raise _config_error(key, "is required")
        try:
            gen = GeneratorSpec.from_json(d["generator"])
        except (ConfigDensityError, TypeError, ValueError) as exc:
            raise _config_error("generator", str(exc))
        try:
            grid = Grid.from_dict(d["grid"])
        except (ConfigDensityError, TypeError, ValueError, KeyError) as exc:
            raise _config_error("grid", str(exc))
        alphas = d.get("alpha_list", [0.5])
        if not isinstance(alphas, list) or any(isinstance(a, bool) or not isinstance(a, (int, float)) for a in alphas):
            raise _config_error("alpha_list", f"must be a list of numbers, got {alphas!r}")
        quad = d.get("quadrature", {})
        if not isinstance(quad, dict) or any(k not in ("circle", "ray", "n_dirs") for k in quad):
            raise _config_error("quadrature", "must be an object with optional keys circle, ray, n_dirs")
        for k, v in quad.items():
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                raise _config_error(f"quadrature.{k}", f"must be an integer >= 2, got {v!r}")
        timing = d.get("record_timing", False)
        if not isinstance(timing, bool):
            raise _config_error("record_timing", "must be true or false")
        output = d.get("output")
        if output is not None and not isinstance(output, str):
            raise _config_error("output", "must be a path string")
        for key in ("functional", "t_spacing", "method"):
            if key in d and not isinstance(d[key], str):
                raise _config_error(key, "must be a string")
        return cls(
            generator=gen,
            grid=grid,
            functional=d.get("functional", "pair"),
            t_min=_number(d, "t_min", positive=True),
            t_max=_number(d, "t_max", positive=True),
            t_steps=_number(d, "t_steps", 16, integer=True),
            t_spacing=d.get("t_spacing", "geometric"),
            alpha_list=[float(a) for a in alphas],
            M=None if d.get("M") is None else _number(d, "M", positive=True),
            method=d.get("method", "spatial"),
            quadrature=dict(quad),
            eps_num=None if d.get("eps_num") is None else _number(d, "eps_num"),
            delta_nominal=None if d.get("delta_nominal") is None else _number(d, "delta_nominal", positive=True),
            record_timing=timing,
            output=output,
        )

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise _config_error("config", f"invalid JSON ({exc})")
        return cls.from_dict(d)

    def to_dict(self):
        return {
            "generator": json.loads(self.generator.to_json()),
            "grid": self.grid.to_dict(),
            "functional": self.functional,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "t_steps": self.t_steps,
            "t_spacing": self.t_spacing,
            "alpha_list": list(self.alpha_list),
            "M": self.M,
            "method": self.method,
            "quadrature": dict(self.quadrature),
            "eps_num": self.eps_num,
            "delta_nominal": self.delta_nominal,
            "record_timing": self.record_timing,
            "output": self.output,
        }

    def scales(self):
        if self.t_spacing == "geometric":
            return np.geomspace(self.t_min, self.t_max, self.t_steps).tolist()
        return np.linspace(self.t_min, self.t_max, self.t_steps).tolist()


@dataclass(frozen=True)
class SweepRow:
    t: float
    alpha: float | None
    value: float
    method: str
    positive: bool
    elapsed_ns: int | None = None


def _threshold(config, f):
    if config.eps_num is not None:
        return config.eps_num
    delta = config.delta_nominal
    if delta is None:
        delta = float(config.generator.params.get("delta", 1.0))
    return positivity_threshold(f, delta_nominal=delta)


def run_sweep(config, field_=None):
    """Evaluate the configured functional at every ``(t, alpha)``; rows ordered by ``(t, alpha)``.

    Returns ``(rows, eps_num)``.  Writes the CSV when ``config.output`` is set.
    """
    if isinstance(config, dict):
        config = SweepConfig.from_dict(config)
    f = field_ if field_ is not None else generate(config.generator, config.grid)
    eps = _threshold(config, f)
    q = config.quadrature
    if config.functional == "d1":
        cq = circle_quadrature(q.get("circle", 64))
        rq = ray_quadrature(q.get("ray", 64))
        jobs = [(t, a) for t in config.scales() for a in config.alpha_list]

        def evaluate(job):
            return triangle_d1(f, job[1], t=job[0], cq=cq, rq=rq)
    elif config.functional == "pair":
        jobs = [(t, None) for t in config.scales()]

        def evaluate(job):
            return pair_correlation(f, job[0], method=config.method, n_circle=q.get("circle"))
    else:
        jobs = [(t, None) for t in config.scales()]

        def evaluate(job):
            return colinear_triple(f, job[0], n_dirs=q.get("n_dirs") or q.get("circle"))

    results = ordered_map(evaluate, jobs)
    rows = [
        SweepRow(t, a, float(r.value), r.method, bool(r.value > eps), r.elapsed_ns if config.record_timing else None)
        for (t, a), r in zip(jobs, results)
    ]
    if config.output:
        write_csv(rows, config.output)
    return rows, eps


def find_onset(rows, eps_num=None):
    """Least swept ``t`` from which every row onwards is positive, or ``"none"``.

    Rows sharing a scale (several alphas) count as positive only if all are.
    """
    rows = list(rows)
    if not rows:
        raise ConfigDensityError("empty_sweep", "no rows to search")
    ts = [r.t for r in rows]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ConfigDensityError("invalid_parameter", "rows must be sorted by t")
    by_t = {}
    for r in rows:
        ok = r.positive if eps_num is None else r.value > eps_num
        by_t[r.t] = by_t.get(r.t, True) and ok
    onset = "none"
    for t in sorted(by_t, reverse=True):
        if not by_t[t]:
            break
        onset = t
    return onset


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_csv(rows, path_or_buffer):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.t), _fmt(r.alpha), _fmt(r.value), r.method, "true" if r.positive else "false",
                    "" if r.elapsed_ns is None else str(int(r.elapsed_ns))])
    text = buf.getvalue()
    if hasattr(path_or_buffer, "write"):
        path_or_buffer.write(text)
    else:
        with open(path_or_buffer, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigDensityError("config_error", f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        return [
            SweepRow(float(r["t"]), float(r["alpha"]) if r["alpha"] else None, float(r["value"]), r["method"],
                     r["positive"] == "true", int(r["elapsed_ns"]) if r["elapsed_ns"] else None)
            for r in reader
        ]


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def svg_plot(rows, eps_num=None, title="", width=640, height=400):
    """Value against ``t`` on a log-x axis, one polyline per alpha, as an SVG string."""
    rows = list(rows)
    if not rows:
        raise ConfigDensityError("empty_sweep", "no rows to plot")
    pad = 50
    ts = np.array([r.t for r in rows])
    vs = np.array([r.value for r in rows])
    lx = np.log10(ts)
    x0, x1 = lx.min(), lx.max()
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0, y1 = min(vs.min(), 0.0), max(vs.max(), eps_num or 0.0)
    if y1 - y0 < 1e-300:
        y1 = y0 + 1.0

    def X(v):
        return pad + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">t (log scale)</text>',
        f'<text x="{pad}" y="{pad - 18}" font-size="12">{escape(title)}</text>',
        f'<text x="{pad - 4}" y="{Y(y1):.1f}" text-anchor="end" font-size="10">{y1:.3g}</text>',
        f'<text x="{pad - 4}" y="{Y(y0):.1f}" text-anchor="end" font-size="10">{y0:.3g}</text>',
        f'<text x="{X(ts.min()):.1f}" y="{height - pad + 14}" text-anchor="middle" font-size="10">{ts.min():.3g}</text>',
        f'<text x="{X(ts.max()):.1f}" y="{height - pad + 14}" text-anchor="middle" font-size="10">{ts.max():.3g}</text>',
    ]
    if eps_num is not None:
        out.append(f'<line x1="{pad}" y1="{Y(eps_num):.2f}" x2="{width - pad}" y2="{Y(eps_num):.2f}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
    alphas = sorted({r.alpha for r in rows}, key=lambda a: -1.0 if a is None else a)
    for i, a in enumerate(alphas):
        pts = " ".join(f"{X(r.t):.2f},{Y(r.value):.2f}" for r in rows if r.alpha == a)
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if a is not None:
            out.append(f'<text x="{width - pad + 4}" y="{pad + 14 * i}" font-size="10" fill="{color}">alpha={a:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
