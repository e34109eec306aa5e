"""Regression values recorded from a reviewed run; a change here needs a reason."""

import math

import pytest

from configdensity import (
    StationaryModel,
    colinear_triple,
    ergodic_average_experiment,
    pair_correlation,
    smoothing_gap,
    triangle_d1,
    triangle_d4,
)
from configdensity.measures import nu_abs_circle_average
from configdensity.spectral import bessel_j0
from configdensity.verify import _ball

from conftest import ball_field

REL = 1e-9


@pytest.fixture(scope="module")
def disk():
    return ball_field(1.0, 1 / 32)


@pytest.fixture(scope="module")
def half_ball16():
    return _ball(0.5, 16.0, 0.25)


def test_pair(disk):
    assert pair_correlation(disk, 1.0).value == pytest.approx(1.228257909399383, rel=REL)
    assert pair_correlation(disk, 1.0, "spectral").value == pytest.approx(1.228333465334509, rel=REL)


def test_colinear(disk):
    assert colinear_triple(disk, 0.5).value == pytest.approx(1.228234198827908, rel=REL)


def test_triangle_normalized(half_ball16):
    mB = math.pi * 256
    assert triangle_d1(half_ball16, 0.5).value / mB == pytest.approx(0.11543541261262288, rel=REL)
    assert triangle_d4(half_ball16, 0.5).value / mB == pytest.approx(0.11794153985149544, rel=REL)


def test_smoothing_gap():
    assert smoothing_gap(ball_field(2.0, 1 / 8, delta=0.5), 0.05, 0.5) == pytest.approx(1.1039128625343404, rel=REL)


def test_ergodic_table():
    t = ergodic_average_experiment(StationaryModel("bernoulli_tiling", {"delta": 0.5}), [2.0, 4.0], 30)
    assert t.mean_abs_dev == pytest.approx([0.2101774030412277, 0.11193088500068775], rel=REL)


def test_special_values():
    assert float(bessel_j0(5.5)) == pytest.approx(-0.006843869417819342, rel=1e-11)
    assert float(nu_abs_circle_average([3.0, 4.0], 0.5)) == pytest.approx(0.097929736740016, rel=1e-11)
