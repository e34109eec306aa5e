import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from configdensity import (
    ConfigDensityError,
    DensityField,
    GeneratorSpec,
    Grid,
    choose_smoothing_params,
    circle_quadrature,
    colinear_triple,
    d1_d4_gap_check,
    generate,
    pair_correlation,
    positivity_threshold,
    ray_quadrature,
    rescale,
    sample,
    smoothing_gap,
    translate,
    triangle_d1,
    triangle_d4,
)

from conftest import ball_field, random_field

LENS = 2 * math.pi / 3 - math.sqrt(3) / 2


def lens_area(d, r=1.0):
    if d >= 2 * r:
        return 0.0
    return 2 * r * r * math.acos(d / (2 * r)) - 0.5 * d * math.sqrt(4 * r * r - d * d)


def brute_d1(f, alpha, t, cq, rq):
    """Direct evaluation through pointwise interpolation."""
    pts = f.grid.points().reshape(-1, 2)
    g = f.values.reshape(-1)
    total = 0.0
    for wy, y, yp in zip(cq.weights, cq.nodes, cq.perp):
        second = sample(f, pts + t * y)
        for ws, s in zip(rq.weights, rq.nodes):
            third = sample(f, pts + t * (2 * alpha * yp + s * y))
            total += wy * ws * float(np.sum(g * second * third))
    return total * f.spacing ** 2


def test_pair_lens_area(unit_disk):
    assert pair_correlation(unit_disk, 1.0).value == pytest.approx(LENS, rel=0.01)


@pytest.mark.parametrize("t", [0.3, 1.4, 1.9])
def test_pair_lens_area_other_scales(unit_disk, t):
    assert pair_correlation(unit_disk, t).value == pytest.approx(lens_area(t), rel=0.02)


def test_pair_at_zero_is_squared_norm(small_random):
    expect = float(np.sum(small_random.values ** 2)) * small_random.spacing ** 2
    assert pair_correlation(small_random, 0.0).value == pytest.approx(expect, rel=1e-14)


def test_pair_disjoint_supports(unit_disk):
    assert abs(pair_correlation(unit_disk, 2.5).value) < 1e-6
    assert abs(pair_correlation(unit_disk, 2.5, "spectral").value) < 1e-6


def test_pair_errors(unit_disk):
    with pytest.raises(ConfigDensityError) as e:
        pair_correlation(unit_disk, -1.0)
    assert e.value.code == "invalid_scale"
    per = random_field((16, 16), 0.5, 1, boundary="periodic")
    with pytest.raises(ConfigDensityError) as e:
        pair_correlation(per, 1.0, "spectral")
    assert e.value.code == "requires_compact_support"
    cube = DensityField.on_grid(Grid.centered((8, 8, 8), 0.5), np.zeros((8, 8, 8)))
    with pytest.raises(ConfigDensityError) as e:
        pair_correlation(cube, 1.0)
    assert e.value.code == "circle_measure_requires_2d"


def test_pair_periodic_spatial_constant():
    f = DensityField.on_grid(Grid.centered((32, 32), 0.25, boundary="periodic"), np.full((32, 32), 0.4))
    assert pair_correlation(f, 1.3).value == pytest.approx(0.16 * 64, rel=1e-12)


def test_pair_spatial_spectral_agree_on_smooth_field():
    grid = Grid.centered((256, 256), 1 / 32)
    f = generate(GeneratorSpec("bernoulli_cells", {"delta": 0.5, "box": [[-2, 2], [-2, 2]]}, seed=2), grid)
    from configdensity.spectral import as_field, poisson_smooth_values

    g = as_field(f, poisson_smooth_values(f, 0.05))
    for t in (0.5, 1.0, 2.0):
        a = pair_correlation(g, t).value
        b = pair_correlation(g, t, "spectral").value
        assert abs(a - b) / b < 1e-3


def test_pair_scale_identity():
    f = ball_field(2.0, 1 / 16)
    t0 = 2.0
    z = rescale(f, t0)
    assert pair_correlation(z, 0.5).value * t0 ** 2 == pytest.approx(pair_correlation(f, 1.0).value, rel=0.02)


def test_translation_invariance(small_random):
    g = translate(small_random, [2 * small_random.spacing, -3 * small_random.spacing])
    for fn in (lambda f: pair_correlation(f, 0.7).value,
               lambda f: triangle_d1(f, 0.4, t=0.6, cq=16, rq=ray_quadrature(16)).value,
               lambda f: colinear_triple(f, 0.5).value):
        assert fn(g) == pytest.approx(fn(small_random), abs=1e-9)


@given(st.integers(0, 10 ** 6), st.floats(0.1, 1.5))
def test_nonnegative_and_monotone(seed, t):
    f = random_field((24, 24), 0.125, seed, margin=4)
    extra = random_field((24, 24), 0.125, seed + 1, margin=4)
    g = f.with_values(np.maximum(f.values, extra.values))
    for fn in (lambda h: pair_correlation(h, t).value, lambda h: colinear_triple(h, t / 2).value):
        a, b = fn(f), fn(g)
        assert a >= -1e-12 and a <= b + 1e-12


def test_d1_matches_pointwise_brute_force():
    f = ball_field(0.8, 1 / 8, delta=0.7, margin=2)
    cq, rq = circle_quadrature(12), ray_quadrature(10)
    assert triangle_d1(f, 0.3, t=0.5, cq=cq, rq=rq).value == pytest.approx(brute_d1(f, 0.3, 0.5, cq, rq), rel=1e-10)


def test_d1_empty_and_unreachable():
    empty = DensityField.zeros(Grid.centered((16, 16), 0.25))
    assert triangle_d1(empty, 0.5).value == 0.0
    f = ball_field(1.0, 1 / 8)
    assert abs(triangle_d1(f, 1.2, t=1.0).value) < 1e-6  # 2 alpha t > 2 R


def test_d1_errors(unit_disk):
    for alpha, t in [(0.0, 1.0), (0.5, -1.0)]:
        with pytest.raises(ConfigDensityError) as e:
            triangle_d1(unit_disk, alpha, t=t)
        assert e.value.code == "invalid_parameter"


def test_d1_normalized_increases_with_radius():
    vals = []
    for r in (4.0, 8.0, 16.0):
        f = ball_field(r, 0.25, delta=0.5)
        vals.append(triangle_d1(f, 0.5).value / (math.pi * r * r))
    assert vals[0] < vals[1] < vals[2] < 0.125


def test_d4_limits():
    f = ball_field(16.0, 0.25, delta=0.5)
    mB = math.pi * 256
    assert triangle_d4(f, 0.5).value / mB == pytest.approx(0.125, rel=0.15)
    assert triangle_d4(f, 1e7).value < 1e-6 * triangle_d4(f, 0.0).value
    assert triangle_d4(DensityField.zeros(f.grid), 0.5).value == 0.0


def test_d4_routes_agree_for_moderate_lambda():
    f = ball_field(3.0, 1 / 8, delta=0.6)
    a = triangle_d4(f, 0.5, smoothing="kernel").value
    b = triangle_d4(f, 0.5, smoothing="spectral").value
    assert a == pytest.approx(b, rel=2e-3)


def test_colinear_2d_lens_oracle(unit_disk):
    # for a convex set the middle point is automatically inside
    assert colinear_triple(unit_disk, 0.5).value == pytest.approx(LENS, rel=0.01)


def test_colinear_brute_force_triple_sum():
    n, h = 128, 2.5 / 128
    f = generate(GeneratorSpec("ball", {"radius": 1.0}), Grid.centered((n, n), h))
    pts = f.grid.points().reshape(-1, 2)
    inside = f.values.reshape(-1) > 0
    cq = circle_quadrature(64)
    total = 0.0
    for y in cq.nodes:
        a = np.hypot(*(pts + 0.5 * y).T) <= 1.0
        b = np.hypot(*(pts + 1.0 * y).T) <= 1.0
        total += np.sum(inside & a & b & (np.hypot(*pts.T) <= 1.0))
    brute = total / len(cq.nodes) * h * h
    assert colinear_triple(f, 0.5).value == pytest.approx(brute, rel=0.02)


def test_colinear_3d_lens_volume():
    n, h = 72, 3.0 / 72
    f = generate(GeneratorSpec("ball", {"radius": 1.0}), Grid.centered((n, n, n), h))
    # two unit balls at distance 1 overlap in volume pi (4 + 1)(2 - 1)^2 / 12
    assert colinear_triple(f, 0.5, n_dirs=128).value == pytest.approx(5 * math.pi / 12, rel=0.02)


def test_colinear_errors_and_zero():
    line = DensityField.on_grid(Grid.centered((16,), 0.5), np.ones(16))
    with pytest.raises(ConfigDensityError) as e:
        colinear_triple(line, 1.0)
    assert e.value.code == "requires_d_ge_2"
    f = ball_field(1.0, 1 / 8)
    assert abs(colinear_triple(f, 1.2).value) < 1e-6


def test_choose_smoothing_params_examples():
    l1, l2 = choose_smoothing_params(1.0, 1.0)
    assert l1 == pytest.approx(1.8222e-4, rel=1e-4) and l2 == 168.0
    l1, l2 = choose_smoothing_params(0.5, 1.0)
    assert l1 == pytest.approx(3.559e-7, rel=1e-3) and l2 == 1344.0


@given(st.floats(1e-3, 1.0), st.floats(1e-2, 100))
def test_smoothing_params_satisfy_both_inequalities(delta, M):
    l1, l2 = choose_smoothing_params(delta, M)
    assert 2 * l1 ** (1 / 3) < delta ** 3 / 7
    assert 12 * M / l2 < delta ** 3 / 7


@pytest.mark.parametrize("delta", [0.0, -0.5, 1.5, "x"])
def test_invalid_delta(delta):
    with pytest.raises(ConfigDensityError) as e:
        choose_smoothing_params(delta, 1.0)
    assert e.value.code == "invalid_delta"


def test_smoothing_gap_examples():
    f = ball_field(2.0, 1 / 8, delta=0.5)
    assert smoothing_gap(f, 0.3, 0.3) < 1e-12
    lam2 = 0.2
    gaps = [smoothing_gap(f, lam2 * k, lam2) for k in (4, 2, 1)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert smoothing_gap(f, 0.1, 0.5, method="torus") <= smoothing_gap(f, 0.1, 0.5) * (1 + 1e-9)


def test_gap_check_passes_on_ball_and_zero():
    f = ball_field(4.0, 0.25, delta=0.5)
    support = {"ball": {"center": [0, 0], "radius": 4.0}}
    rep = d1_d4_gap_check(f, [0.1, 0.5, 1.0], 0.5, 1.0, support)
    assert rep.passed and len(rep.details["per_alpha"]) == 3
    zero = DensityField.zeros(f.grid)
    rep = d1_d4_gap_check(zero, [0.5], 0.5, 1.0, support)
    assert rep.passed and rep.lhs == 0.0


def test_gap_check_errors():
    f = ball_field(4.0, 0.25, delta=0.5)
    with pytest.raises(ConfigDensityError) as e:
        d1_d4_gap_check(f, [0.5], 0.5, 1.0, {"ball": {"center": [0, 0], "radius": 2.0}})
    assert e.value.code == "support_mismatch"
    with pytest.raises(ConfigDensityError):
        d1_d4_gap_check(f, [2.0], 0.5, 1.0, {"ball": {"center": [0, 0], "radius": 4.0}})
    rep = d1_d4_gap_check(f, [0.5], 0.5, 1.0, {"box": [[-4, 4], [-4.5, 4.5]]})
    assert rep.details["support_measure"] == 72.0


def test_positivity_threshold():
    f = ball_field(1.0, 1 / 16, delta=0.5)
    assert positivity_threshold(f, 0.5) == pytest.approx(1e-6 * f.support_measure * 0.125)
    assert positivity_threshold(DensityField.zeros(f.grid)) == 0.0
