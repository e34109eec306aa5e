import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from configdensity import DensityField, GeneratorSpec, Grid, generate

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def ball_field(radius, h, delta=1.0, margin=4, center=(0.0, 0.0)):
    n = int(math.ceil(2 * radius / h)) + 2 * margin
    n += n % 2
    grid = Grid.centered((n, n), h, center)
    return generate(GeneratorSpec("ball", {"delta": delta, "radius": radius, "center": list(center)}), grid)


def random_field(shape, spacing, seed, boundary="zero_outside", margin=0):
    rng = np.random.default_rng(seed)
    vals = rng.random(shape)
    if margin:
        inner = tuple(slice(margin, n - margin) for n in shape)
        mask = np.zeros(shape)
        mask[inner] = 1.0
        vals = vals * mask
    return DensityField.on_grid(Grid.centered(shape, spacing, boundary=boundary), vals)


@pytest.fixture
def unit_disk():
    return ball_field(1.0, 1 / 32)


@pytest.fixture
def small_random():
    return random_field((40, 40), 0.125, 7, margin=6)
