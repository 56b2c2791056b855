"""Moyal star products on polynomials and on sampled grids."""
from .engines import (
    BoundaryWarning,
    IntegralCheck,
    kernel_grid_extent,
    spectral_derivative,
    star_grid,
    star_grid_fourier,
    star_grid_kernel,
    stargen_residual,
    verify_integral_theorem,
)
from .grid import GridFunction, is_power_of_two
from .polynomial import PhasePolynomial
from .products import (
    StarStructure,
    coordinate_commutators,
    star_commutator,
    star_poly,
    star_poly_composite,
)

__all__ = [
    "BoundaryWarning",
    "GridFunction",
    "IntegralCheck",
    "PhasePolynomial",
    "StarStructure",
    "coordinate_commutators",
    "is_power_of_two",
    "kernel_grid_extent",
    "spectral_derivative",
    "star_commutator",
    "star_grid",
    "star_grid_fourier",
    "star_grid_kernel",
    "star_poly",
    "star_poly_composite",
    "stargen_residual",
    "verify_integral_theorem",
]
