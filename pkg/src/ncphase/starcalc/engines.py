"""Star products of sampled functions.

Two independent engines:

* :func:`star_grid_kernel` sums the integral kernel
  ``(a*b)(x) = 1/(pi^D |det L|) \\int\\int a(x+s) b(x+t) exp(-2i s^T L^{-1} t)``
  directly.  Slow, used as a reference on small grids.
* :func:`star_grid_fourier` works in Fourier space.  A polynomial factor is
  handled by the terminating Bopp series with spectral derivatives
  (``O(M log M)``); two sampled factors are combined by the discrete twisted
  convolution ``C_q = sum_k A_k B_{q-k} exp(-i/2 k^T L (q-k))``.

``D`` is the number of grid coordinates and ``M`` the number of grid points.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple, Optional, Union

import numpy as np
import scipy.fft as sfft

from ..errors import DomainError
from .grid import GridFunction, is_power_of_two
from .polynomial import PhasePolynomial, star_series
from .products import StarStructure

KERNEL_MAX_POINTS = 4096
BOUNDARY_TOL = 1e-10
_CHUNK = 1 << 22


class BoundaryWarning(UserWarning):
    """A sampled factor has not decayed at the edge of its grid."""


Operand = Union[GridFunction, PhasePolynomial]


def _check_boundary(f: GridFunction, name: str):
    peak = f.max_abs()
    if peak > 0 and f.boundary_max() > BOUNDARY_TOL * peak:
        warnings.warn(f"{name} is {f.boundary_max() / peak:.1e} of its peak on the grid boundary; "
                      "periodic wrap-around may pollute the product", BoundaryWarning, stacklevel=3)


def _wavenumbers(f: GridFunction):
    return [2 * np.pi * sfft.fftfreq(n, h) for (_, _, n), h in zip(f.axes, f.spacing)]


def spectral_derivative(f: GridFunction, orders, workers: Optional[int] = None) -> np.ndarray:
    """Partial derivative of the samples by 1-D FFTs along each differentiated axis."""
    out = f.samples
    real = not np.iscomplexobj(out)
    for axis, m in enumerate(orders):
        if m == 0:
            continue
        n = f.shape[axis]
        h = f.spacing[axis]
        shape = [1] * f.ndim
        if real:
            k = 2 * np.pi * sfft.rfftfreq(n, h)
            mult = (1j * k) ** m
            if m % 2 and n % 2 == 0:
                mult[-1] = 0.0
            shape[axis] = mult.size
            out = sfft.irfft(sfft.rfft(out, axis=axis, workers=workers) * mult.reshape(shape),
                             n=n, axis=axis, workers=workers)
        else:
            k = 2 * np.pi * sfft.fftfreq(n, h)
            mult = (1j * k) ** m
            if m % 2 and n % 2 == 0:
                mult[n // 2] = 0.0
            shape[axis] = n
            out = sfft.ifft(sfft.fft(out, axis=axis, workers=workers) * mult.reshape(shape),
                            axis=axis, workers=workers)
    return out


# ---------------------------------------------------------------- kernel engine

def kernel_grid_extent(points: int, lam: float = 1.0) -> float:
    """Half-width of the symmetric grid on which the kernel quadrature is exact for band-limited data.

    The discrete kernel sum reproduces the continuum product when the cell
    area in each conjugate pair satisfies ``h_x h_p = pi |lam| / points``.
    """
    if points < 2 or lam == 0:
        raise ValueError("need at least two points and a nonzero commutator scale")
    return 0.5 * (points - 1) * np.sqrt(np.pi * abs(lam) / points)


def star_grid_kernel(a: GridFunction, b: GridFunction, L: StarStructure) -> GridFunction:
    """Literal quadrature of the integral kernel on the grid (reference engine).

    The inner sum over the second factor depends only on the offset between
    the first factor's point and the output point, so it is tabulated once on
    the ``(2N-1)^D`` offset lattice; the remaining sum is a dense ``M x M``
    contraction.
    """
    a.require_same_grid(b)
    D = a.ndim
    Lam = L.embedded(D)
    if abs(np.linalg.det(Lam)) < 1e-14 * max(1.0, np.max(np.abs(Lam))) ** D:
        raise DomainError("the kernel representation needs an invertible Lambda")
    M = int(np.prod(a.shape))
    if M > KERNEL_MAX_POINTS:
        raise ValueError(f"kernel engine is capped at {KERNEL_MAX_POINTS} grid points, got {M}")
    _check_boundary(a, "first factor")
    _check_boundary(b, "second factor")
    Linv = np.linalg.inv(Lam)
    h = a.spacing
    pts = np.stack([m.ravel() for m in a.mesh(sparse=False)], axis=1)  # (M, D)
    idx = np.stack(np.unravel_index(np.arange(M), a.shape), axis=1)  # (M, D)

    # offsets delta = h * m with m in [-(N-1), N-1]^D
    span = [np.arange(-(n - 1), n) for n in a.shape]
    off_idx = np.stack([g.ravel() for g in np.meshgrid(*span, indexing="ij")], axis=1)
    deltas = off_idx * h
    bflat = b.samples.ravel().astype(complex)
    proj = pts @ Linv.T  # rows: L chi_k
    table = np.empty(len(deltas), dtype=complex)
    step = max(1, _CHUNK // M)
    for s in range(0, len(deltas), step):
        table[s:s + step] = np.exp(-2j * deltas[s:s + step] @ proj.T) @ bflat

    off_shape = tuple(2 * n - 1 for n in a.shape)
    aflat = a.samples.ravel().astype(complex)
    out = np.empty(M, dtype=complex)
    step = max(1, _CHUNK // M)
    for s in range(0, M, step):
        i = slice(s, s + step)
        rel = idx[None, :, :] - idx[i, None, :]  # (c, M, D): point j relative to output i
        flat = np.ravel_multi_index(tuple((rel + (np.array(a.shape) - 1)).transpose(2, 0, 1)), off_shape)
        phase = np.exp(2j * np.einsum("cmd,cd->cm", rel * h, proj[i]))
        out[i] = (phase * table[flat]) @ aflat
    pref = np.prod(h) ** 2 / (np.pi**D * abs(np.linalg.det(Lam)))
    return a.with_samples((pref * out).reshape(a.shape))


# ---------------------------------------------------------------- Fourier engine

def _require_pow2(f: GridFunction):
    if not all(is_power_of_two(n) for n in f.shape):
        raise ValueError(f"Fourier engine needs power-of-two point counts, got {f.shape}")


def _poly_grid(p: PhasePolynomial, g: GridFunction, Lam: np.ndarray, poly_left: bool,
               workers: Optional[int]) -> np.ndarray:
    """Bopp series with exact polynomial derivatives and spectral grid derivatives."""
    alpha, beta, coeffs = star_series(Lam, p.degree)
    poly_orders, grid_orders = (alpha, beta) if poly_left else (beta, alpha)
    mesh = g.mesh()
    out = np.zeros(g.shape, dtype=complex)
    groups = {}
    for pa, ga, c in zip(poly_orders, grid_orders, coeffs):
        groups.setdefault(tuple(ga), []).append((tuple(pa), c))
    for ga, items in groups.items():
        factor = PhasePolynomial(p.dim)
        for pa, c in items:
            factor = factor + c * p.derivative(pa)
        if not factor.terms:
            continue
        dg = spectral_derivative(g, ga, workers) if any(ga) else g.samples
        out += factor(*mesh) * dg
    return out


def _twisted_convolution(a: GridFunction, b: GridFunction, Lam: np.ndarray, workers: Optional[int]) -> np.ndarray:
    shape = a.shape
    M = int(np.prod(shape))
    A = sfft.fftn(a.samples, workers=workers).ravel()
    B = sfft.fftn(b.samples, workers=workers).ravel()
    if not np.any(Lam):
        # the phase is identically one: ordinary cyclic convolution
        return a.samples * b.samples
    waves = _wavenumbers(a)
    idx = np.stack(np.unravel_index(np.arange(M), shape), axis=1)
    kvec = np.stack([waves[d][idx[:, d]] for d in range(len(shape))], axis=1)  # (M, D)
    kL = kvec @ Lam  # k^T Lambda
    N = np.array(shape)
    C = np.empty(M, dtype=complex)
    step = max(1, _CHUNK // M)
    for s in range(0, M, step):
        q = idx[s:s + step]
        lidx = (q[:, None, :] - idx[None, :, :]) % N  # (c, M, D)
        lflat = np.ravel_multi_index(tuple(lidx.transpose(2, 0, 1)), shape)
        lvec = kvec[lflat]  # wrapped wavenumbers of the second factor
        phase = np.exp(-0.5j * np.einsum("md,cmd->cm", kL, lvec))
        C[s:s + step] = (phase * B[lflat]) @ A
    return sfft.ifftn((C / M).reshape(shape), workers=workers)


def star_grid_fourier(a: Operand, b: Operand, L: StarStructure, workers: Optional[int] = None) -> GridFunction:
    """Fourier-space star product; at least one operand must be a :class:`GridFunction`."""
    if isinstance(a, PhasePolynomial) and isinstance(b, PhasePolynomial):
        raise ValueError("use star_poly for two polynomials")
    grid = a if isinstance(a, GridFunction) else b
    _require_pow2(grid)
    D = grid.ndim
    Lam = L.embedded(D)
    for name, f in (("first factor", a), ("second factor", b)):
        if isinstance(f, GridFunction):
            grid.require_same_grid(f)
            _check_boundary(f, name)
        elif f.dim != D:
            raise ValueError(f"polynomial has {f.dim} variables, grid has {D}")
    if isinstance(a, PhasePolynomial):
        out = _poly_grid(a, b, Lam, True, workers)
    elif isinstance(b, PhasePolynomial):
        out = _poly_grid(b, a, Lam, False, workers)
    else:
        out = _twisted_convolution(a, b, Lam, workers)
    return grid.with_samples(out)


def star_grid(a: Operand, b: Operand, L: StarStructure, engine: str = "fourier", workers=None) -> GridFunction:
    if engine == "fourier":
        return star_grid_fourier(a, b, L, workers)
    if engine == "kernel":
        if not (isinstance(a, GridFunction) and isinstance(b, GridFunction)):
            raise ValueError("the kernel engine needs two sampled operands")
        return star_grid_kernel(a, b, L)
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------- checks

class IntegralCheck(NamedTuple):
    lhs: complex
    rhs: complex
    difference: float

    def relative(self) -> float:
        return self.difference / abs(self.rhs) if self.rhs != 0 else self.difference


def _as_samples(f: Operand, grid: GridFunction) -> np.ndarray:
    return f.samples if isinstance(f, GridFunction) else f(*grid.mesh())


def verify_integral_theorem(a: Operand, b: Operand, L: StarStructure, engine: str = "fourier",
                            workers=None) -> IntegralCheck:
    """Compare ``int a*b`` with ``int a b`` on the operands' grid."""
    grid = a if isinstance(a, GridFunction) else b
    lhs = complex(star_grid(a, b, L, engine, workers).integral())
    rhs = complex(grid.with_samples(_as_samples(a, grid) * _as_samples(b, grid)).integral())
    return IntegralCheck(lhs, rhs, abs(lhs - rhs))


def stargen_residual(H: Operand, W: GridFunction, E: float, L: StarStructure, engine: str = "fourier",
                     workers=None) -> float:
    """``max |H*W - E W| / max |W|``; zero for an identically zero ``W``."""
    peak = W.max_abs()
    if peak == 0:
        return 0.0
    HW = star_grid(H, W, L, engine, workers)
    return float(np.max(np.abs(HW.samples - E * W.samples)) / peak)
