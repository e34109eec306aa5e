import io
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from configdensity import ConfigDensityError, SweepConfig, SweepRow, find_onset, run_sweep
from configdensity.sweep import read_csv, svg_plot, write_csv

BASE = {
    "generator": {"kind": "ball", "params": {"radius": 1.0}},
    "grid": {"shape": [48, 48], "spacing": 0.0625},
    "functional": "pair",
    "t_min": 0.5,
    "t_max": 2.5,
    "t_steps": 5,
    "t_spacing": "linear",
}


def cfg(**over):
    d = dict(BASE)
    d.update(over)
    return d


@pytest.mark.parametrize("key, value", [
    ("t_min", -1.0), ("t_max", 0.1), ("t_steps", 1), ("t_spacing", "cubic"), ("functional", "quad"),
    ("method", "fft"), ("alpha_list", [0.5, "a"]), ("quadrature", {"circle": 1}), ("record_timing", "yes"),
    ("bogus", 1),
])
def test_config_errors_name_the_field(key, value):
    with pytest.raises(ConfigDensityError) as e:
        SweepConfig.from_dict(cfg(**{key: value}))
    assert e.value.code == "config_error"
    assert key in str(e.value)


def test_missing_required_fields():
    for key in ("generator", "grid", "t_min", "t_max"):
        d = cfg()
        del d[key]
        with pytest.raises(ConfigDensityError) as e:
            SweepConfig.from_dict(d)
        assert key in str(e.value)


def test_alpha_above_m():
    with pytest.raises(ConfigDensityError) as e:
        SweepConfig.from_dict(cfg(functional="d1", alpha_list=[0.5, 2.0], M=1.0))
    assert "alpha_list" in str(e.value)


def test_config_round_trip():
    c = SweepConfig.from_dict(cfg(eps_num=1e-9))
    assert SweepConfig.from_dict(c.to_dict()).to_dict() == c.to_dict()
    assert c.scales() == pytest.approx([0.5, 1.0, 1.5, 2.0, 2.5])


def rows_from(values, ts=None):
    ts = ts or [float(i + 1) for i in range(len(values))]
    return [SweepRow(t, None, v, "spatial", v > 0.0) for t, v in zip(ts, values)]


def test_find_onset_examples():
    assert find_onset(rows_from([0.0, 0.0, 1.0, 1.0])) == 3.0
    assert find_onset(rows_from([1.0, 0.0, 1.0, 1.0])) == 3.0
    assert find_onset(rows_from([1.0, 1.0, 1.0])) == 1.0
    assert find_onset(rows_from([1.0, 1.0, 0.0])) == "none"
    assert find_onset(rows_from([1e-8, 1.0]), eps_num=1e-6) == 2.0


def test_find_onset_requires_all_alphas():
    rows = [SweepRow(1.0, 0.1, 1.0, "spatial", True), SweepRow(1.0, 0.5, 0.0, "spatial", False),
            SweepRow(2.0, 0.1, 1.0, "spatial", True), SweepRow(2.0, 0.5, 1.0, "spatial", True)]
    assert find_onset(rows) == 2.0


def test_find_onset_errors():
    with pytest.raises(ConfigDensityError) as e:
        find_onset([])
    assert e.value.code == "empty_sweep"
    with pytest.raises(ConfigDensityError):
        find_onset(rows_from([1.0, 1.0], ts=[2.0, 1.0]))


@given(st.lists(st.booleans(), min_size=1, max_size=30))
def test_onset_is_start_of_positive_tail(flags):
    rows = rows_from([1.0 if f else 0.0 for f in flags])
    onset = find_onset(rows)
    if not flags[-1]:
        assert onset == "none"
        return
    k = int(onset) - 1
    assert all(flags[k:])
    assert k == 0 or not flags[k - 1]


def test_pair_sweep_values_and_onset(tmp_path):
    out = tmp_path / "pair.csv"
    rows, eps = run_sweep(cfg(output=str(out)))
    assert [r.t for r in rows] == pytest.approx([0.5, 1.0, 1.5, 2.0, 2.5])
    assert rows[0].value > rows[1].value > rows[2].value > 0
    assert rows[-1].value <= eps
    assert find_onset(rows) == "none"
    assert read_csv(out) == rows


def test_csv_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_sweep(cfg(output=str(a)))
    run_sweep(cfg(output=str(b)))
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "t,alpha,value,method,positive,elapsed_ns"


def test_record_timing():
    rows, _ = run_sweep(cfg(record_timing=True, t_steps=2))
    assert all(isinstance(r.elapsed_ns, int) and r.elapsed_ns > 0 for r in rows)
    buf = io.StringIO()
    write_csv(run_sweep(cfg(t_steps=2))[0], buf)
    assert all(line.endswith(",") for line in buf.getvalue().splitlines()[1:])


def test_d1_sweep_on_constant_box():
    d = cfg(generator={"kind": "constant_on_box", "params": {"delta": 0.5, "box": [[-1.25, 1.25], [-1.25, 1.25]]}},
            functional="d1", alpha_list=[0.25, 0.5], t_min=0.25, t_max=0.5, t_steps=2,
            quadrature={"circle": 16, "ray": 16})
    rows, eps = run_sweep(d)
    assert [(r.t, r.alpha) for r in rows] == [(0.25, 0.25), (0.25, 0.5), (0.5, 0.25), (0.5, 0.5)]
    assert all(r.positive for r in rows)
    assert eps == pytest.approx(1e-6 * 6.25 * 0.125)


def test_colinear_sweep_runs():
    rows, _ = run_sweep(cfg(functional="colinear", t_steps=2))
    assert rows[0].method == "spatial" and rows[0].value > rows[1].value


def test_svg_parses():
    rows = rows_from([3.0, 2.0, 1.0])
    root = ET.fromstring(svg_plot(rows, eps_num=0.5, title="a < b & c"))
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("polyline") for el in root)
    with pytest.raises(ConfigDensityError):
        svg_plot([])
