"""Overlap witnesses for the no-cloning and no-deleting arguments.

A unitary that clones (or deletes) both of two states forces their overlap to
satisfy ``P**2 == P``.  Any pair with ``0 < P < 1`` therefore exhibits the
contradiction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..gaussian import GaussianWigner, overlap
from ..starcalc import GridFunction

EDGE_TOL = 1e-9
NORM_TOL = 1e-3

State = Union[GaussianWigner, GridFunction]


@dataclass(frozen=True)
class CloningWitness:
    """``P`` is the normalized overlap (1 for identical pure states); ``raw_overlap`` is ``int a b``."""

    P: float
    P_squared: float
    classification: str
    raw_overlap: float
    theorem: str

    @property
    def contradiction(self) -> bool:
        return self.classification == "contradiction"


def classify(P: float) -> str:
    if P <= EDGE_TOL:
        return "orthogonal"
    if P >= 1.0 - EDGE_TOL:
        return "identical"
    return "contradiction"


def _raw_overlap(a: State, b: State) -> float:
    if isinstance(a, GaussianWigner) and isinstance(b, GaussianWigner):
        return overlap(a, b)
    if isinstance(a, GridFunction) and isinstance(b, GridFunction):
        a.require_same_grid(b)
        return float(np.real(a.with_samples(a.samples * np.conj(b.samples)).integral()))
    raise TypeError("both states must be Gaussian or both sampled on the same grid")


def _check_normalized(state: State, name: str):
    if isinstance(state, GridFunction):
        total = float(np.real(state.integral()))
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"{name} integrates to {total:.6g}, not 1")


def _witness(a: State, b: State, theorem: str) -> CloningWitness:
    _check_normalized(a, "first state")
    _check_normalized(b, "second state")
    raw = _raw_overlap(a, b)
    norm = np.sqrt(_raw_overlap(a, a) * _raw_overlap(b, b))
    P = float(raw / norm)
    return CloningWitness(P, P * P, classify(P), raw, theorem)


def no_cloning_witness(a: State, b: State) -> CloningWitness:
    return _witness(a, b, "no-cloning")


def no_deleting_witness(a: State, b: State) -> CloningWitness:
    return _witness(a, b, "no-deleting")
