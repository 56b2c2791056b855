"""Star structures and exact star products of polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from ..deformation import DeformationParams, standard_symplectic, symplectic_data
from .polynomial import (
    MAX_DIM,
    PhasePolynomial,
    _check_degree,
    apply_bidifferential,
    bopp_star,
    contract,
    tensor_product,
)

SKEW_TOL = 1e-14


@dataclass(frozen=True)
class StarStructure:
    """Skew matrix ``Lambda`` with ``[chi_r, chi_s]_star = i Lambda_rs``.

    ``coords`` lists which coordinates of the ambient phase space the matrix
    acts on; ``None`` means all of them in order.  The position-only and
    momentum-only products use a subset.
    """

    Lambda: np.ndarray
    coords: Optional[Tuple[int, ...]] = None
    label: str = ""

    def __post_init__(self):
        L = np.array(self.Lambda, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("Lambda must be square")
        if np.max(np.abs(L + L.T), initial=0.0) > SKEW_TOL * max(1.0, np.max(np.abs(L), initial=0.0)):
            raise ValueError("Lambda must be skew-symmetric")
        L.setflags(write=False)
        object.__setattr__(self, "Lambda", L)
        if self.coords is not None:
            coords = tuple(int(c) for c in self.coords)
            if len(coords) != L.shape[0] or len(set(coords)) != len(coords):
                raise ValueError("coords must list one distinct index per row of Lambda")
            object.__setattr__(self, "coords", coords)

    @property
    def size(self) -> int:
        return self.Lambda.shape[0]

    def embedded(self, dim: int) -> np.ndarray:
        """The matrix acting on a ``dim``-coordinate space (zero outside ``coords``)."""
        if self.coords is None:
            if dim != self.size:
                raise ValueError(f"star structure acts on {self.size} coordinates, not {dim}")
            return self.Lambda
        if max(self.coords) >= dim:
            raise ValueError(f"coordinate index out of range for dimension {dim}")
        out = np.zeros((dim, dim))
        idx = np.array(self.coords)
        out[np.ix_(idx, idx)] = self.Lambda
        return out

    def is_singular(self, dim: Optional[int] = None) -> bool:
        M = self.Lambda if dim is None else self.embedded(dim)
        return bool(abs(np.linalg.det(M)) < 1e-300 or np.linalg.matrix_rank(M) < M.shape[0])

    # factories -----------------------------------------------------------
    @classmethod
    def hbar_J(cls, n: int = 1, hbar: float = 1.0) -> "StarStructure":
        return cls(hbar * standard_symplectic(n), label="hbar*J")

    @classmethod
    def hbar_Omega(cls, params: DeformationParams) -> "StarStructure":
        return cls(params.hbar * symplectic_data(params).Omega, label="hbar*Omega")

    @classmethod
    def theta(cls, params: DeformationParams) -> "StarStructure":
        return cls(params.Theta, coords=tuple(range(params.n)), label="Theta")

    @classmethod
    def eta(cls, params: DeformationParams) -> "StarStructure":
        return cls(params.N, coords=tuple(range(params.n, 2 * params.n)), label="N")

    @classmethod
    def zero(cls, dim: int) -> "StarStructure":
        return cls(np.zeros((dim, dim)), label="pointwise")

    @classmethod
    def direct_sum(cls, *parts: "StarStructure") -> "StarStructure":
        """Independent subsystems, e.g. two particles sharing one algebra."""
        return cls(block_diag(*[p.Lambda for p in parts]),
                   label="+".join(p.label for p in parts))


def _lambda_for(a: PhasePolynomial, L: StarStructure) -> np.ndarray:
    return L.embedded(a.dim)


def star_poly(a: PhasePolynomial, b: PhasePolynomial, L: StarStructure) -> PhasePolynomial:
    """Exact star product ``a star_L b`` via the terminating Bopp series."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.dim > MAX_DIM:
        raise ValueError(f"dimension {a.dim} exceeds the cap of {MAX_DIM}")
    _check_degree(a)
    _check_degree(b)
    return bopp_star(a, b, _lambda_for(a, L))


def star_commutator(a: PhasePolynomial, b: PhasePolynomial, L: StarStructure) -> PhasePolynomial:
    return star_poly(a, b, L) - star_poly(b, a, L)


def star_poly_composite(a: PhasePolynomial, b: PhasePolynomial, structures: Sequence[StarStructure]) -> PhasePolynomial:
    """Apply several star structures one after another to ``a(u) b(v)`` and set ``u = v``.

    For ``(hbar J, Theta, N)`` this is the factorized form of the full product.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    tensor = tensor_product(a, b)
    for L in structures:
        tensor = apply_bidifferential(tensor, _lambda_for(a, L))
    return contract(tensor)


def coordinate_commutators(L: StarStructure, dim: Optional[int] = None) -> np.ndarray:
    """Matrix of ``[chi_r, chi_s]_star`` constants (should equal ``i Lambda``)."""
    dim = L.size if dim is None else dim
    coords = [PhasePolynomial.coordinate(dim, i) for i in range(dim)]
    out = np.zeros((dim, dim), dtype=complex)
    for r in range(dim):
        for s in range(dim):
            out[r, s] = star_commutator(coords[r], coords[s], L).coefficient((0,) * dim)
    return out
