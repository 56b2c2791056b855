"""Phase-space noncommutative quantum mechanics."""
from .deformation import (
    DeformationParams,
    SWMap,
    build_scalar_sw,
    invert_sw,
    jacobian,
    symplectic_data,
    validate_sw,
)
from .errors import ConfigError, DegeneracyError, DomainError, ProtocolError
from .gaussian import GaussianWigner, epr_resource, fidelity_gaussian, grid_fidelity
from .ncwigner import HOParams, NCWignerFunction, ho_energy, ho_params, ho_wigner, nc_from_commutative
from .protocols import (
    nc_fidelity,
    no_cloning_witness,
    no_deleting_witness,
    teleport_1d,
    teleport_finite_r,
    teleport_ideal_1d,
    teleport_nc_2d,
)
from .starcalc import GridFunction, PhasePolynomial, StarStructure, star_grid, star_poly

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DeformationParams",
    "DegeneracyError",
    "DomainError",
    "GaussianWigner",
    "GridFunction",
    "HOParams",
    "NCWignerFunction",
    "PhasePolynomial",
    "ProtocolError",
    "SWMap",
    "StarStructure",
    "build_scalar_sw",
    "epr_resource",
    "fidelity_gaussian",
    "grid_fidelity",
    "ho_energy",
    "ho_params",
    "ho_wigner",
    "invert_sw",
    "jacobian",
    "nc_fidelity",
    "nc_from_commutative",
    "no_cloning_witness",
    "no_deleting_witness",
    "star_grid",
    "star_poly",
    "symplectic_data",
    "teleport_1d",
    "teleport_finite_r",
    "teleport_ideal_1d",
    "teleport_nc_2d",
    "validate_sw",
]
