"""Noncommutative Wigner functions and the two-dimensional NC harmonic oscillator.

A noncommutative Wigner function is obtained from a commutative one through
an SW map, ``f_NC(z) = f_W(S^{-1} z) / det S``.  The oscillator states are
written in the commutative variables ``(q1, q2, k1, k2)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .deformation import SWMap, invert_sw, jacobian, validate_sw
from .gaussian import GaussianWigner, evaluate
from .starcalc import GridFunction, PhasePolynomial

log = logging.getLogger(__name__)

MAX_LEVEL = 12
NORM_TOL = 1e-4
DEFAULT_POINTS = 64


def _points_from(args, dim: int) -> np.ndarray:
    """Accept either one ``(..., dim)`` array or ``dim`` broadcastable coordinate arrays."""
    if len(args) == 1:
        z = np.asarray(args[0], dtype=float)
        if z.shape[-1] != dim:
            raise ValueError(f"expected points with last axis {dim}, got shape {z.shape}")
        return z
    if len(args) != dim:
        raise ValueError(f"expected {dim} coordinate arrays, got {len(args)}")
    arrays = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    return np.stack(arrays, axis=-1)


# ---------------------------------------------------------------- NC states

@dataclass(frozen=True)
class NCWignerFunction:
    """``f_NC(z) = f_W(S^{-1} z) / det S`` for a commutative base ``f_W``.

    ``base`` may be a :class:`GaussianWigner`, an :class:`HOWignerState`, a
    :class:`GridFunction` sampled in commutative variables (cubic
    interpolation, zero outside the grid), or any callable on ``(..., 2n)``
    point arrays.
    """

    base: Any
    map: SWMap

    @property
    def dim(self) -> int:
        return self.map.S.shape[0]

    @property
    def normalization(self) -> float:
        """``1 / sqrt(det Omega)``, equal to ``1 / det S``."""
        return 1.0 / jacobian(self.map)

    def _base_callable(self) -> Callable[[np.ndarray], np.ndarray]:
        base = self.base
        if isinstance(base, GaussianWigner):
            return lambda xi: evaluate(base, xi)
        if isinstance(base, GridFunction):
            interp = RegularGridInterpolator(base.coordinates(), base.samples, method="cubic",
                                             bounds_error=False, fill_value=0.0)
            return lambda xi: interp(xi.reshape(-1, base.ndim)).reshape(xi.shape[:-1])
        if callable(base):
            return base
        raise TypeError(f"unsupported base {type(base).__name__}")

    def __call__(self, *z):
        z = _points_from(z, self.dim)
        xi = z @ invert_sw(self.map).S.T
        return self.normalization * self._base_callable()(xi)

    def gaussian(self) -> GaussianWigner:
        """Closed form for a Gaussian base: mean ``S m`` and shape ``S Sigma S^T``."""
        if not isinstance(self.base, GaussianWigner):
            raise TypeError("closed form only exists for Gaussian bases")
        S = self.map.S
        shape = S @ self.base.shape @ S.T
        return GaussianWigner(S @ self.base.mean, 0.5 * (shape + shape.T))

    def sample(self, extent: float = 6.0, points: int = 32, axes=None) -> GridFunction:
        axes = axes or [(-extent, extent, points)] * self.dim
        return GridFunction.from_callable(lambda *c: self(*c), axes)


def nc_from_commutative(base, sw: SWMap, tol: float = 1e-10) -> NCWignerFunction:
    """Push a commutative Wigner function through a valid SW map."""
    if sw.params is not None and not validate_sw(sw, sw.params).ok(tol):
        raise ValueError(f"SW map fails its validity conditions: {validate_sw(sw, sw.params)}")
    if isinstance(base, GaussianWigner) and base.dim != sw.S.shape[0]:
        raise ValueError("state and map dimensions differ")
    return NCWignerFunction(base, sw)


# ---------------------------------------------------------------- oscillator

class HOParams(NamedTuple):
    """Coefficients of ``H = A^2 |q|^2 + B^2 |k|^2 + gamma (k1 q2 - k2 q1)``."""

    A: float
    B: float
    gamma: float
    hbar: float = 1.0
    theta: float = 0.0
    eta: float = 0.0

    @classmethod
    def commutative(cls, hbar: float = 1.0) -> "HOParams":
        return cls(np.sqrt(0.5), np.sqrt(0.5), 0.0, hbar)

    @property
    def frequency(self) -> float:
        """``2AB``, the common frequency of the two circular modes."""
        return 2.0 * self.A * self.B


def ho_params(sw: SWMap) -> HOParams:
    """Oscillator coefficients for ``H = (x.x + p.p) / 2`` written in commutative variables."""
    if not sw.is_scalar:
        raise ValueError("ho_params needs a scalar two-dimensional SW map")
    p = sw.params
    lam, mu, h = sw.lam, sw.mu, p.hbar
    A = np.sqrt(lam**2 / 2 + p.eta**2 / (8 * mu**2 * h**2))
    B = np.sqrt(mu**2 / 2 + p.theta**2 / (8 * lam**2 * h**2))
    gamma = (p.theta + p.eta) / (2 * h)
    return HOParams(float(A), float(B), float(gamma), h, p.theta, p.eta)


def frequency_identity_residual(params: HOParams) -> float:
    """``4 A^2 B^2 - (1 + gamma^2 - theta eta / hbar^2)``; vanishes for every valid map."""
    return float(4 * params.A**2 * params.B**2 - (1 + params.gamma**2 - params.theta * params.eta / params.hbar**2))


def laguerre(n: int, u):
    """``L_n(u)`` by the three-term recurrence."""
    u = np.asarray(u, dtype=float)
    prev, cur = np.ones_like(u), 1.0 - u
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - u) * cur - k * prev) / (k + 1)
    return cur


def omegas(params: HOParams, q1, q2, k1, k2):
    """``Omega_pm = (A/B)|q|^2 + (B/A)|k|^2 +/- 2 (k1 q2 - k2 q1)``."""
    r = params.A / params.B
    base = r * (q1**2 + q2**2) + (k1**2 + k2**2) / r
    cross = 2.0 * (k1 * q2 - k2 * q1)
    return base + cross, base - cross


def circular_amplitudes(params: HOParams, q1, q2, k1, k2):
    """``|alpha1 + i alpha2|^2`` and ``|alpha1 - i alpha2|^2`` with
    ``alpha_j = sqrt(A/B) q_j + i sqrt(B/A) k_j``; these equal ``Omega_+`` and ``Omega_-``."""
    s = np.sqrt(params.A / params.B)
    a1 = s * np.asarray(q1) + 1j * np.asarray(k1) / s
    a2 = s * np.asarray(q2) + 1j * np.asarray(k2) / s
    return np.abs(a1 + 1j * a2) ** 2, np.abs(a1 - 1j * a2) ** 2


def _check_level(n1: int, n2: int):
    for n in (n1, n2):
        if int(n) != n or not 0 <= n <= MAX_LEVEL:
            raise ValueError(f"quantum numbers must be integers in 0..{MAX_LEVEL}, got ({n1}, {n2})")


@dataclass(frozen=True)
class HOWignerState:
    """Wigner function of the oscillator eigenstate ``(n1, n2)``.

    ``W = (-1)^(n1+n2) / (pi hbar)^2 exp(-(O+ + O-) / (2 hbar)) L_n1(O+/hbar) L_n2(O-/hbar)``
    with ``O+-`` from :func:`omegas`.
    """

    n1: int
    n2: int
    params: HOParams

    def __post_init__(self):
        _check_level(self.n1, self.n2)

    @property
    def energy(self) -> float:
        return ho_energy(self.n1, self.n2, self.params)

    def __call__(self, *coords):
        z = _points_from(coords, 4) if len(coords) == 1 else None
        q1, q2, k1, k2 = (z[..., i] for i in range(4)) if z is not None else coords
        h = self.params.hbar
        op, om = omegas(self.params, q1, q2, k1, k2)
        sign = -1.0 if (self.n1 + self.n2) % 2 else 1.0
        pref = sign / (np.pi * h) ** 2
        return pref * np.exp(-(op + om) / (2 * h)) * laguerre(self.n1, op / h) * laguerre(self.n2, om / h)

    def default_extent(self) -> float:
        p = self.params
        return 6.0 * np.sqrt(p.hbar * max(p.B / p.A, p.A / p.B))

    def grid(self, points: int = DEFAULT_POINTS, extent: Optional[float] = None,
             renormalize: bool = True) -> GridFunction:
        """Sample on the symmetric 4-D grid; rescale if the quadrature misses 1 by more than ``NORM_TOL``."""
        extent = self.default_extent() if extent is None else float(extent)
        p = self.params
        meta = {"n1": self.n1, "n2": self.n2, "A": p.A, "B": p.B, "gamma": p.gamma,
                "hbar": p.hbar, "theta": p.theta, "eta": p.eta}
        g = GridFunction.symmetric(self, 4, extent, points, meta)
        norm = float(g.integral())
        g.meta["norm"] = norm
        if renormalize and abs(norm - 1.0) > NORM_TOL:
            log.warning("state (%d, %d) integrates to %.8g on a %d^4 grid; rescaling by %.8g",
                        self.n1, self.n2, norm, points, 1.0 / norm)
            g = g.with_samples(g.samples / norm)
            g.meta["norm_factor"] = 1.0 / norm
        return g


def ho_wigner(n1: int, n2: int, params: HOParams) -> HOWignerState:
    return HOWignerState(int(n1), int(n2), params)


def ho_energy(n1: int, n2: int, params: HOParams) -> float:
    """``hbar [2AB (n1 + n2 + 1) + gamma (n1 - n2)]``."""
    if n1 < 0 or n2 < 0:
        raise ValueError("quantum numbers must be non-negative")
    return float(params.hbar * (params.frequency * (n1 + n2 + 1) + params.gamma * (n1 - n2)))


def ho_hamiltonian(params: HOParams) -> PhasePolynomial:
    """Polynomial in ``(q1, q2, k1, k2)``."""
    A2, B2, g = params.A**2, params.B**2, params.gamma
    return PhasePolynomial(4, {
        (2, 0, 0, 0): A2, (0, 2, 0, 0): A2,
        (0, 0, 2, 0): B2, (0, 0, 0, 2): B2,
        (0, 1, 1, 0): g, (1, 0, 0, 1): -g,
    })


def omega_polynomials(params: HOParams):
    """``Omega_+`` and ``Omega_-`` as polynomials in ``(q1, q2, k1, k2)``."""
    r = params.A / params.B
    base = {(2, 0, 0, 0): r, (0, 2, 0, 0): r, (0, 0, 2, 0): 1 / r, (0, 0, 0, 2): 1 / r}
    plus = {**base, (0, 1, 1, 0): 2.0, (1, 0, 0, 1): -2.0}
    minus = {**base, (0, 1, 1, 0): -2.0, (1, 0, 0, 1): 2.0}
    return PhasePolynomial(4, plus), PhasePolynomial(4, minus)
