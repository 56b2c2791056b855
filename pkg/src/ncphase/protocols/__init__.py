"""Cloning witnesses, teleportation protocols and fidelity pipelines."""
from .fidelity import nc_fidelity
from .teleportation import (
    DELTA_R,
    NC_CANONICAL,
    NC_NAIVE,
    ONE_D,
    Channel,
    TeleportationRun,
    averaged_output,
    channel_sigma,
    check_observables,
    run_batch,
    CONVENTIONS,
    teleport_1d,
    teleport_finite_r,
    teleport_ideal_1d,
    teleport_nc_2d,
)
from .witnesses import CloningWitness, classify, no_cloning_witness, no_deleting_witness

__all__ = [
    "DELTA_R",
    "NC_CANONICAL",
    "NC_NAIVE",
    "ONE_D",
    "Channel",
    "CloningWitness",
    "TeleportationRun",
    "averaged_output",
    "channel_sigma",
    "check_observables",
    "classify",
    "nc_fidelity",
    "no_cloning_witness",
    "no_deleting_witness",
    "run_batch",
    "CONVENTIONS",
    "teleport_1d",
    "teleport_finite_r",
    "teleport_ideal_1d",
    "teleport_nc_2d",
]
