"""Deformed Heisenberg-Weyl algebra and Seiberg-Witten maps.

Phase-space vectors are ordered positions first: ``xi = (q_1..q_n, k_1..k_n)``
for the commutative variables and ``z = (x_1..x_n, p_1..p_n)`` for the
noncommutative ones.  An SW map is the linear map ``z = S xi`` with
``S = [[A, B], [C, D]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from .errors import DegeneracyError, DomainError

SKEW_TOL = 1e-12
VALIDITY_TOL = 1e-10

EPSILON = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _is_skew(M: np.ndarray, tol: float = SKEW_TOL) -> bool:
    return bool(np.max(np.abs(M + M.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(M), initial=0.0)))


@dataclass(frozen=True)
class DeformationParams:
    """Algebra data ``[x_i, x_j] = i Theta_ij``, ``[x_i, p_j] = i hbar delta_ij``,
    ``[p_i, p_j] = i N_ij``.

    Use :meth:`scalar` for the two-dimensional case ``Theta = theta * eps``,
    ``N = eta * eps``.  ``theta`` and ``eta`` are ``None`` for general matrices.
    """

    n: int
    hbar: float
    Theta: np.ndarray
    N: np.ndarray
    theta: Optional[float] = None
    eta: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        Theta = np.array(self.Theta, dtype=float)
        N = np.array(self.N, dtype=float)
        if Theta.shape != (self.n, self.n) or N.shape != (self.n, self.n):
            raise ValueError("Theta and N must be n x n")
        if not (_is_skew(Theta) and _is_skew(N)):
            raise ValueError("Theta and N must be skew-symmetric")
        Theta.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "Theta", Theta)
        object.__setattr__(self, "N", N)
        if self.is_scalar:
            if self.theta * self.eta >= self.hbar**2:
                raise DomainError(
                    f"theta*eta = {self.theta * self.eta:g} must be below hbar^2 = {self.hbar**2:g}"
                )
        elif abs(np.linalg.det(symplectic_data(self).Omega)) < 1e-14:
            raise DomainError("deformed symplectic matrix is singular")

    @classmethod
    def scalar(cls, theta: float = 0.0, eta: float = 0.0, hbar: float = 1.0) -> "DeformationParams":
        theta, eta = float(theta), float(eta)
        return cls(2, float(hbar), theta * EPSILON, eta * EPSILON, theta, eta)

    @property
    def is_scalar(self) -> bool:
        return self.theta is not None and self.eta is not None

    @property
    def deformation_ratio(self) -> float:
        """``theta * eta / hbar**2`` for scalar parameters."""
        if not self.is_scalar:
            raise ValueError("deformation ratio is only defined for scalar parameters")
        return self.theta * self.eta / self.hbar**2


class SymplecticData(NamedTuple):
    J: np.ndarray
    Omega: np.ndarray


def standard_symplectic(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def symplectic_data(params: DeformationParams) -> SymplecticData:
    """Return ``J`` and the deformed ``Omega = [[Theta/hbar, I], [-I, N/hbar]]``."""
    n = params.n
    I = np.eye(n)
    J = standard_symplectic(n)
    Omega = np.block([[params.Theta / params.hbar, I], [-I, params.N / params.hbar]])
    return SymplecticData(J, Omega)


@dataclass(frozen=True)
class SWMap:
    """Linear map ``z = S xi`` with ``S = [[A, B], [C, D]]``.

    ``lam`` and ``mu`` are set only for maps produced by :func:`build_scalar_sw`.
    ``inverse`` marks the ``z -> xi`` direction returned by :func:`invert_sw`.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    params: Optional[DeformationParams] = None
    lam: Optional[float] = None
    mu: Optional[float] = None
    inverse: bool = False
    S: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        blocks = [np.array(M, dtype=float) for M in (self.A, self.B, self.C, self.D)]
        n = blocks[0].shape[0]
        if any(M.shape != (n, n) for M in blocks):
            raise ValueError("SW blocks must all be square with the same size")
        for name, M in zip("ABCD", blocks):
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        S = np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @classmethod
    def from_matrix(cls, S, params: Optional[DeformationParams] = None, **kw) -> "SWMap":
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError("S must be a 2n x 2n matrix")
        n = S.shape[0] // 2
        return cls(S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:], params=params, **kw)

    @classmethod
    def identity(cls, n: int = 2, params: Optional[DeformationParams] = None) -> "SWMap":
        return cls.from_matrix(np.eye(2 * n), params=params, lam=1.0, mu=1.0)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.lam is not None and self.mu is not None and self.params is not None and self.params.is_scalar

    def apply(self, xi):
        """Map commutative points ``xi`` (shape ``(..., 2n)``) to ``z``."""
        return np.asarray(xi) @ self.S.T


def solve_scalar_constraint(ratio: float) -> float:
    """Return ``s = lambda*mu`` with ``s (1 - s) = ratio / 4``, continuous to 1 at ratio 0."""
    if ratio >= 1.0:
        raise DomainError(f"theta*eta/hbar^2 = {ratio:g} must be below 1")
    return 0.5 * (1.0 + np.sqrt(1.0 - ratio))


def build_scalar_sw(params: DeformationParams, lam: Optional[float] = None) -> SWMap:
    """Scalar two-dimensional SW map.

    ``x = lam q - theta/(2 lam hbar) eps k`` and ``p = mu k + eta/(2 mu hbar) eps q``
    with ``lam * mu`` fixed by commutator preservation.  When ``lam`` is omitted
    the symmetric split ``lam = mu`` is used.
    """
    if not params.is_scalar:
        raise ValueError("build_scalar_sw needs scalar (theta, eta) parameters")
    if lam is not None and not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    s = solve_scalar_constraint(params.deformation_ratio)
    if lam is None:
        lam = np.sqrt(s)
    mu = s / lam
    hbar = params.hbar
    I = np.eye(2)
    return SWMap(
        lam * I,
        -params.theta / (2 * lam * hbar) * EPSILON,
        params.eta / (2 * mu * hbar) * EPSILON,
        mu * I,
        params=params,
        lam=float(lam),
        mu=float(mu),
    )


class SWResiduals(NamedTuple):
    identity: float
    theta: float
    eta: float

    def max(self) -> float:
        return max(self)

    def ok(self, tol: float = VALIDITY_TOL) -> bool:
        return self.max() < tol


def validate_sw(sw: SWMap, params: DeformationParams) -> SWResiduals:
    """Max-abs residuals of ``A D^T - B C^T = I``, ``A B^T - B A^T = Theta/hbar``
    and ``C D^T - D C^T = N/hbar``.  Never raises on an invalid map."""
    if sw.n != params.n:
        raise ValueError(f"map acts on n={sw.n}, parameters have n={params.n}")
    A, B, C, D = sw.A, sw.B, sw.C, sw.D
    h = params.hbar
    r1 = np.max(np.abs(A @ D.T - B @ C.T - np.eye(sw.n)))
    r2 = np.max(np.abs(A @ B.T - B @ A.T - params.Theta / h))
    r3 = np.max(np.abs(C @ D.T - D @ C.T - params.N / h))
    return SWResiduals(float(r1), float(r2), float(r3))


def invert_sw(sw: SWMap) -> SWMap:
    """Return the ``z -> xi`` map ``S^{-1}`` in the same block layout."""
    S = sw.S
    if np.linalg.cond(S) > 1e12:
        raise DegeneracyError("SW matrix is singular")
    return SWMap.from_matrix(np.linalg.inv(S), params=sw.params, lam=sw.lam, mu=sw.mu, inverse=not sw.inverse)


def jacobian(sw: SWMap) -> float:
    """``det S``; equals ``sqrt(det Omega)`` on the branch through the identity."""
    return float(np.linalg.det(sw.S))


def _check_spd(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None
    return M


def transform_covariance(sw: SWMap, shape) -> np.ndarray:
    """Push a Gaussian shape matrix through the map: ``S shape S^T``."""
    shape = _check_spd(shape, "shape")
    if shape.shape != sw.S.shape:
        raise ValueError("shape and map dimensions differ")
    out = sw.S @ shape @ sw.S.T
    return 0.5 * (out + out.T)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """Random real symplectic ``M`` (``M J M^T = J``) as ``expm(J H)`` with ``H`` symmetric."""
    H = rng.normal(scale=scale, size=(2 * n, 2 * n))
    H = 0.5 * (H + H.T)
    return expm(standard_symplectic(n) @ H)


def compose_symplectic(sw: SWMap, M: np.ndarray) -> SWMap:
    """Right-compose a valid map with a symplectic matrix; the result stays valid."""
    return SWMap.from_matrix(sw.S @ M, params=sw.params)
