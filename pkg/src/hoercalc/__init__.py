"""Weighted Hörmander-type function spaces on strips and sectors and a finite-dimensional functional calculus."""

from .calculus import (
    CalculusResult,
    elementary_contour,
    gaussian_approximation_harness,
    meda_hoermander,
    regularizer_profile,
    sector_calculus,
    sobolev_integral,
    spectral_oracle,
)
from .errors import (
    ConfigurationError,
    ContourProximityError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    HoercalcError,
    InputError,
    InvalidWeightError,
    RangeError,
    SpectralCollisionError,
    SupportError,
)
from .functions import HolomorphicFunction, SectorFunction, function_from_spec, sector_function_from_spec
from .hoermander import Localizer, build_partition, calderon_residual, hoermander_norm
from .operators import DiagonalizableOperator, injective_part, matrix_p_norm
from .sampling import Grid, SampledFunction, convolve, fourier_forward, fourier_inverse, integral
from .sector_spaces import SectorFunctionRep, sector_hoermander_norm, sector_sobolev_norm
from .strip_spaces import StripFunctionRep, boundary_values, fourier_algebra_norm, hardy2_norm, sobolev_norm
from .weights import Weight, admissibility_report, smooth_equivalent, weighted_norm

__version__ = "0.1.0"

__all__ = [
    "admissibility_report",
    "boundary_values",
    "build_partition",
    "CalculusResult",
    "calderon_residual",
    "ConfigurationError",
    "ContourProximityError",
    "convolve",
    "DegenerateInputError",
    "DiagonalizableOperator",
    "DivergenceError",
    "DomainError",
    "elementary_contour",
    "fourier_algebra_norm",
    "fourier_forward",
    "fourier_inverse",
    "function_from_spec",
    "gaussian_approximation_harness",
    "Grid",
    "hardy2_norm",
    "HoercalcError",
    "hoermander_norm",
    "HolomorphicFunction",
    "injective_part",
    "InputError",
    "integral",
    "InvalidWeightError",
    "Localizer",
    "matrix_p_norm",
    "meda_hoermander",
    "RangeError",
    "regularizer_profile",
    "SampledFunction",
    "sector_calculus",
    "sector_function_from_spec",
    "sector_hoermander_norm",
    "sector_sobolev_norm",
    "SectorFunction",
    "SectorFunctionRep",
    "smooth_equivalent",
    "sobolev_integral",
    "sobolev_norm",
    "spectral_oracle",
    "SpectralCollisionError",
    "StripFunctionRep",
    "SupportError",
    "Weight",
    "weighted_norm",
]
