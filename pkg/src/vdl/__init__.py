"""Numerical experiments on vanishing geodesic distance for right-invariant H^s metrics."""

__version__ = "0.1.0"

from .errors import (CompositionError, ConfigurationError, DomainError, DomainEscapeError,
                     InversionError, NonDiffeomorphismError, StateError,
                     UnsupportedRegimeError, VDLError)
from .spectral import (Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec,
                       apply_multiplier, perp_gradient_inverse_sqrt_laplacian, sobolev_norm_1d,
                       sobolev_norm_2d)

__all__ = [
    "__version__",
    "CompositionError", "ConfigurationError", "DomainError", "DomainEscapeError",
    "InversionError", "NonDiffeomorphismError", "StateError", "UnsupportedRegimeError",
    "VDLError",
    "Grid1D", "Grid2D", "GridFunction1D", "GridFunction2D", "MultiplierSpec",
    "apply_multiplier", "perp_gradient_inverse_sqrt_laplacian", "sobolev_norm_1d",
    "sobolev_norm_2d",
]
