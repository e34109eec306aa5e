import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from configdensity import (
    ConfigDensityError,
    DensityField,
    GeneratorSpec,
    Grid,
    bessel_j0,
    circle_multiplier,
    forward_transform,
    generate,
    inverse_transform,
    poisson_multiplier,
    poisson_smooth,
)
from configdensity.spectral import (
    poisson_cell_integrals,
    poisson_convolve_exact,
    poisson_kernel,
    poisson_smooth_values,
    smoothed_difference_l1,
    smoothed_difference_l1_exact,
)

from conftest import ball_field, random_field


def test_j0_against_mpmath():
    xs = np.concatenate([np.linspace(0, 30, 301), [11.999999, 12.0, 12.000001, 57.3, 250.0, 1e4, 3.3e5]])
    ref = np.array([float(mpmath.besselj(0, x)) for x in xs])
    assert np.max(np.abs(bessel_j0(xs) - ref)) < 1e-10


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_j0_even_and_bounded(x):
    assert bessel_j0(x) == bessel_j0(-x)
    assert abs(bessel_j0(x)) <= 1.0 + 1e-12


def test_j0_scalar_and_array_shapes():
    assert isinstance(bessel_j0(0.5), float)
    assert bessel_j0(np.zeros((2, 3))).shape == (2, 3)
    assert bessel_j0(0.0) == 1.0


def test_transform_of_box_matches_closed_form():
    # the discrete transform times sinc(xi h) per axis is the exact transform
    # of the piecewise-constant field
    h = 0.25
    g = Grid.centered((32, 24), h, (0.3, -0.2))
    lo, hi = np.array([-1.45, -1.45]), np.array([0.8, 0.55])
    f = generate(GeneratorSpec("constant_on_box", {"box": [[lo[0], hi[0]], [lo[1], hi[1]]]}), g)
    s = forward_transform(f, pad=2.0)
    fx, fy = s.frequencies()

    def axis(xi, a, b):
        out = np.full(xi.shape, b - a, dtype=complex)
        nz = xi != 0
        out[nz] = (np.exp(-2j * np.pi * xi[nz] * a) - np.exp(-2j * np.pi * xi[nz] * b)) / (2j * np.pi * xi[nz])
        return out

    exact = np.outer(axis(fx, lo[0], hi[0]), axis(fy, lo[1], hi[1]))
    disc = s.values * np.outer(np.sinc(fx * h), np.sinc(fy * h))
    assert np.max(np.abs(disc - exact)) < 1e-12


def test_parseval_exact():
    f = random_field((30, 50), 0.1, 1)
    for pad in (None, 2.0, 3.3):
        s = forward_transform(f, pad=pad)
        assert s.energy() == pytest.approx(float(np.sum(f.values ** 2)) * 0.01, rel=1e-12)


def test_inverse_recovers_field():
    f = random_field((20, 18), 0.2, 2)
    for pad in (None, 2.0):
        assert np.allclose(inverse_transform(forward_transform(f, pad=pad)), f.values, atol=1e-13)


def test_zero_frequency_is_mass():
    f = random_field((20, 20), 0.3, 3)
    s = forward_transform(f, pad=2.0)
    assert s.value_at([0.0, 0.0]).real == pytest.approx(f.mass, rel=1e-12)
    with pytest.raises(ConfigDensityError) as e:
        s.value_at([0.5 * s.freq_step[0], 0.0])
    assert e.value.code == "off_lattice"


def test_padding_periodic_field_is_rejected():
    f = random_field((8, 8), 1.0, 4, boundary="periodic")
    with pytest.raises(ConfigDensityError) as e:
        forward_transform(f, pad=2.0)
    assert e.value.code == "requires_compact_support"


def test_circle_multiplier_needs_2d():
    f = DensityField.on_grid(Grid.centered((16,), 0.5), np.full(16, 0.5))
    with pytest.raises(ConfigDensityError) as e:
        circle_multiplier(forward_transform(f), 1.0)
    assert e.value.code == "circle_measure_requires_2d"


def test_circle_multiplier_at_zero_is_identity():
    f = random_field((16, 16), 0.5, 5)
    s = forward_transform(f)
    assert np.allclose(circle_multiplier(s, 0.0).values, s.values)


def test_poisson_multiplier_rejects_negative_lambda():
    s = forward_transform(random_field((8, 8), 1.0, 6))
    with pytest.raises(ConfigDensityError) as e:
        poisson_multiplier(s, -1.0)
    assert e.value.code == "invalid_lambda"


def test_poisson_kernel_radial_mass():
    # mass of P_lam in the disk of radius R is 1 - c / sqrt(c^2 + R^2), c = lam / (2 pi)
    from scipy import integrate

    lam = 0.7
    c = lam / (2 * np.pi)
    for R in (0.05, 1.0, 30.0):
        val, _ = integrate.quad(lambda r: 2 * np.pi * r * poisson_kernel(np.array([r, 0.0]), lam), 0, R)
        assert val == pytest.approx(1 - c / math.hypot(c, R), rel=1e-10)


def test_poisson_cell_integrals_sum_to_disk_mass():
    # mass of P in the square of half-side R is close to 1 for R >> lam
    K = poisson_cell_integrals(0.5, 0.1, 400)
    assert K.sum() == pytest.approx(1.0, abs=2e-3)
    assert np.allclose(K, K.T) and np.allclose(K, K[::-1])
    assert poisson_cell_integrals(0.0, 0.1, 3).sum() == 1.0


def test_poisson_smooth_preserves_mass_on_padded_torus():
    f = ball_field(1.0, 1 / 16)
    vals = poisson_smooth_values(f, 0.3, crop=False)
    assert vals.sum() * f.spacing ** 2 == pytest.approx(f.mass, rel=1e-12)


def test_poisson_smooth_clamp_is_small_for_resolved_lambda():
    grid = Grid.centered((128, 128), 1 / 16)
    f = generate(GeneratorSpec("bernoulli_cells", {"delta": 0.5, "box": [[-2, 2], [-2, 2]]}, seed=1), grid)
    g, clamp = poisson_smooth(f, 1.0, return_clamp=True)
    assert clamp < 1e-6
    assert 0.0 <= g.values.min() and g.values.max() <= 1.0


def test_exact_and_spectral_smoothing_agree_for_smooth_kernel():
    f = ball_field(2.0, 1 / 16, delta=0.5)
    for lam in (1.0, 3.0):
        a = poisson_convolve_exact(f, lam)
        b = poisson_smooth_values(f, lam, pad=4.0)
        assert np.max(np.abs(a - b)) < 1e-3


def test_poisson_semigroup_periodic():
    f = random_field((32, 32), 0.2, 7, boundary="periodic")
    s = forward_transform(f)
    two = inverse_transform(poisson_multiplier(poisson_multiplier(s, 0.1), 0.25))
    one = inverse_transform(poisson_multiplier(s, 0.35))
    assert np.max(np.abs(two - one)) < 1e-13


@given(st.floats(0.01, 10), st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5))
def test_poisson_dilation_law(lam, r, x, y):
    p = np.array([x, y])
    assert poisson_kernel(r * p, lam) == pytest.approx(poisson_kernel(p, lam / r) / r ** 2, rel=1e-12)


def test_l1_gap_zero_when_lambdas_equal():
    f = ball_field(1.0, 1 / 8)
    assert smoothed_difference_l1(f, 0.4, 0.4) < 1e-12
    assert smoothed_difference_l1_exact(f, 0.4, 0.4) < 1e-12


def test_exact_gap_dominates_torus_gap():
    f = ball_field(1.5, 1 / 16, delta=0.5)
    exact = smoothed_difference_l1_exact(f, 0.05, 2.0)
    torus = smoothed_difference_l1(f, 0.05, 2.0)
    assert torus <= exact * (1 + 1e-9)
    # huge second lambda: the difference tends to 2 * mass
    assert smoothed_difference_l1_exact(f, 1e-9, 1e6) == pytest.approx(2 * f.mass, rel=1e-4)
