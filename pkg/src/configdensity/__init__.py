"""Configuration functionals of density fields on the plane.

Fields are functions into [0, 1] sampled on regular grids.  The package
evaluates pair, triangle and colinear configuration integrals at arbitrary
scales, checks the smoothing bounds that control them, and estimates upper
Banach density.
"""

import sys

from ._validation import ConfigDensityError
from .density import DensityEnvelope, banach_density, window_sandwich_check
from .field import (
    DensityField,
    GeneratorSpec,
    Grid,
    cube_integral,
    generate,
    load,
    rescale,
    sample,
    save,
    translate,
    window_average,
)
from .functionals import (
    FunctionalResult,
    choose_smoothing_params,
    colinear_triple,
    d1_d4_gap_check,
    pair_correlation,
    positivity_threshold,
    smoothing_gap,
    triangle_d1,
    triangle_d4,
)
from .measures import (
    circle_quadrature,
    nu_abs_circle_average,
    nu_abs_theta_integral,
    nu_hat_closed,
    nu_hat_numeric,
    ray_quadrature,
    sphere_directions,
)
from .reports import BoundReport
from .spectral import (
    Spectrum,
    bessel_j0,
    circle_multiplier,
    forward_transform,
    inverse_transform,
    poisson_multiplier,
    poisson_smooth,
)
from .stationary import StationaryModel, ergodic_average_experiment, sample_stationary
from .sweep import SweepConfig, SweepRow, find_onset, run_sweep
from .verify import inject_fault, verify_suite

__version__ = "0.1.0"

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, type(sys))]
