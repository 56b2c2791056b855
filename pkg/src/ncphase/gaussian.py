"""Gaussian Wigner functions in the ``exp(-(z-m)^T Sigma^{-1} (z-m))`` convention.

With this convention a shape matrix is twice the textbook covariance: the
single-mode vacuum (coherent state) has ``Sigma = I`` and purity
``1 / sqrt(det Sigma)``; convolution adds shape matrices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import det

from .deformation import _check_spd


@dataclass(frozen=True)
class GaussianWigner:
    """Normalized Gaussian Wigner function on a ``2n``-dimensional phase space."""

    mean: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        shape = _check_spd(self.shape, "shape").copy()
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if shape.shape[0] % 2:
            raise ValueError("phase-space dimension must be even")
        if mean.shape != (shape.shape[0],):
            raise ValueError("mean length must match shape")
        mean.setflags(write=False)
        shape.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def centered(cls, shape) -> "GaussianWigner":
        shape = np.asarray(shape, dtype=float)
        return cls(np.zeros(shape.shape[0]), shape)

    @classmethod
    def coherent(cls, mean) -> "GaussianWigner":
        mean = np.asarray(mean, dtype=float)
        return cls(mean, np.eye(mean.size))

    @classmethod
    def from_covariance(cls, mean, cov) -> "GaussianWigner":
        """Build from a textbook covariance ``V`` (``exp(-z^T V^{-1} z / 2)``)."""
        return cls(mean, 2.0 * np.asarray(cov, dtype=float))

    @property
    def dim(self) -> int:
        return self.shape.shape[0]

    @property
    def modes(self) -> int:
        return self.dim // 2

    @property
    def covariance(self) -> np.ndarray:
        return 0.5 * self.shape

    @property
    def peak(self) -> float:
        return 1.0 / (np.pi**self.modes * np.sqrt(det(self.shape)))

    def __call__(self, z):
        return evaluate(self, z)

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "mean": self.mean.tolist(), "shape": self.shape.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianWigner":
        if data.get("kind") != "gaussian":
            raise ValueError("not a serialized Gaussian state")
        return cls(np.array(data["mean"]), np.array(data["shape"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def _points(state: GaussianWigner, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != state.dim:
        raise ValueError(f"expected points of dimension {state.dim}, got {z.shape[-1]}")
    return z


def evaluate(state: GaussianWigner, z):
    """Density value at ``z`` (any leading batch shape, last axis ``2n``)."""
    z = _points(state, z)
    d = z - state.mean
    q = np.einsum("...i,ij,...j->...", d, np.linalg.inv(state.shape), d)
    return state.peak * np.exp(-q)


def purity(state: GaussianWigner) -> float:
    return float(1.0 / np.sqrt(det(state.shape)))


def convolve(state: GaussianWigner, cloner_shape) -> GaussianWigner:
    """Convolve with the zero-mean Gaussian cloner ``G_Sigma``; shapes add."""
    cloner_shape = _check_spd(cloner_shape, "cloner shape")
    if cloner_shape.shape != state.shape.shape:
        raise ValueError("cloner and state dimensions differ")
    return GaussianWigner(state.mean, state.shape + cloner_shape)


def overlap(a: GaussianWigner, b: GaussianWigner) -> float:
    """``integral a(z) b(z) dz``, which is ``G_{Sa+Sb}`` evaluated at the mean offset."""
    if a.dim != b.dim:
        raise ValueError("states have different mode counts")
    return float(evaluate(GaussianWigner(a.mean, a.shape + b.shape), b.mean))


def fidelity_gaussian(input_shape, cloner_shape) -> float:
    """Entanglement fidelity ``2^n / sqrt(det(2 Gamma + Sigma))``."""
    Gamma = _check_spd(input_shape, "input shape")
    Sigma = _check_spd(cloner_shape, "cloner shape")
    if Gamma.shape != Sigma.shape:
        raise ValueError("input and cloner dimensions differ")
    n = Gamma.shape[0] // 2
    return float(2.0**n / np.sqrt(det(2.0 * Gamma + Sigma)))


# ---------------------------------------------------------------- EPR resource

def _epr_blocks(r: float):
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    return c * np.eye(2), s * np.diag([-1.0, 1.0])


@dataclass(frozen=True)
class EPRResource:
    """Two-mode squeezed resource on ``z = (x1, p1, x2, p2)``.

    ``state`` uses the shape ``[[beta, gamma], [gamma^T, beta]]`` read off from
    the ``alpha``-form exponent; its raw ``4/pi^2`` prefactor integrates to 4, so
    the applied renormalization factor is recorded in ``normalization_factor``.
    """

    r: float
    state: GaussianWigner
    normalization_factor: float

    @property
    def beta(self) -> np.ndarray:
        return self.state.shape[:2, :2]

    @property
    def gamma(self) -> np.ndarray:
        return self.state.shape[:2, 2:]

    @property
    def half_shape(self) -> np.ndarray:
        """Shape matrix with the extra 1/2 of the block covariance form."""
        return 0.5 * self.state.shape

    def half_state(self) -> GaussianWigner:
        """Normalized Gaussian for the 1/2-scaled block form (purity 4, unphysical)."""
        return GaussianWigner.centered(self.half_shape)

    def raw_alpha_form(self, alpha1, alpha2):
        """Unrenormalized ``4/pi^2 exp[-cosh 2r (|a1|^2+|a2|^2) - 2 sinh 2r Re(a1 a2)]``."""
        alpha1, alpha2 = np.asarray(alpha1, dtype=complex), np.asarray(alpha2, dtype=complex)
        c, s = np.cosh(2 * self.r), np.sinh(2 * self.r)
        expo = -c * (np.abs(alpha1) ** 2 + np.abs(alpha2) ** 2) - 2 * s * np.real(alpha1 * alpha2)
        return 4.0 / np.pi**2 * np.exp(expo)

    def __call__(self, z):
        return evaluate(self.state, z)


def epr_resource(r: float) -> EPRResource:
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing must be a finite non-negative number, got {r!r}")
    beta, gamma = _epr_blocks(r)
    shape = np.block([[beta, gamma], [gamma.T, beta]])
    # the alpha-form Gaussian integrates to 4 / pi^2 * pi^2 * sqrt(det shape) = 4
    raw_integral = 4.0 * np.sqrt(det(shape))
    return EPRResource(float(r), GaussianWigner.centered(shape), float(1.0 / raw_integral))


# ---------------------------------------------------------------- grid oracles

def grid_axes(state: GaussianWigner, points: int = 128, widths: float = 8.0, shape=None):
    """Axis-aligned grid covering ``widths`` standard deviations of the widest direction."""
    shape = state.shape if shape is None else np.asarray(shape)
    sd = np.sqrt(np.max(np.linalg.eigvalsh(shape)) / 2.0)
    return [np.linspace(m - widths * sd, m + widths * sd, points) for m in state.mean]


def trapezoid_nd(values: np.ndarray, axes) -> float:
    out = values
    for ax in reversed(axes):
        out = trapezoid(out, ax, axis=-1)
    return out


def mesh_points(axes) -> np.ndarray:
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def grid_norm(state: GaussianWigner, points: int = 128, widths: float = 8.0) -> float:
    axes = grid_axes(state, points, widths)
    return float(trapezoid_nd(evaluate(state, mesh_points(axes)), axes))


def grid_purity(state: GaussianWigner, points: int = 128, widths: float = 8.0) -> float:
    axes = grid_axes(state, points, widths)
    w = evaluate(state, mesh_points(axes))
    return float((2 * np.pi) ** state.modes * trapezoid_nd(w * w, axes))


def grid_overlap(a: GaussianWigner, b: GaussianWigner, points: int = 128, widths: float = 8.0) -> float:
    centre = GaussianWigner(0.5 * (a.mean + b.mean), a.shape + b.shape)
    sd = np.sqrt(np.max(np.linalg.eigvalsh(a.shape + b.shape)) / 2.0)
    half = widths * sd + 0.5 * np.abs(a.mean - b.mean)
    axes = [np.linspace(m - h, m + h, points) for m, h in zip(centre.mean, half)]
    pts = mesh_points(axes)
    return float(trapezoid_nd(evaluate(a, pts) * evaluate(b, pts), axes))


def grid_fidelity(input_shape, cloner_shape, points: int = 128, widths: float = 8.0,
                  mean: Optional[np.ndarray] = None) -> float:
    """Double-integral fidelity ``(2 pi)^n int W_in (W_in * G_Sigma)`` on a uniform grid.

    The inner integral is a periodic convolution done in Fourier space with
    the kernel's transform ``exp(-k^T Sigma k / 4)``; the grid spans
    ``widths`` standard deviations of ``Gamma + Sigma`` along each axis.
    """
    Gamma = _check_spd(input_shape, "input shape")
    Sigma = _check_spd(cloner_shape, "cloner shape")
    if Gamma.shape != Sigma.shape:
        raise ValueError("input and cloner dimensions differ")
    dim = Gamma.shape[0]
    mean = np.zeros(dim) if mean is None else np.asarray(mean, dtype=float)
    w_in = GaussianWigner(mean, Gamma)
    sd = np.sqrt(np.diag(Gamma + Sigma) / 2.0)
    axes = [np.linspace(m - widths * s, m + widths * s, points) for m, s in zip(mean, sd)]
    return periodic_fidelity(w_in, Sigma, axes)


def periodic_fidelity(w_in, cloner_shape, axes) -> float:
    """Fidelity of a callable ``w_in`` (on ``(..., 2n)`` points) under ``G_Sigma``, on the given axes."""
    dim = len(axes)
    Sigma = np.asarray(cloner_shape, dtype=float)
    win = np.asarray(w_in(mesh_points(axes)), dtype=float)
    h = np.array([ax[1] - ax[0] for ax in axes])
    waves = np.meshgrid(*[2 * np.pi * np.fft.fftfreq(len(ax), hh) for ax, hh in zip(axes[:-1], h[:-1])],
                        2 * np.pi * np.fft.rfftfreq(len(axes[-1]), h[-1]), indexing="ij", sparse=True)
    quad = sum(Sigma[i, j] * waves[i] * waves[j] for i in range(dim) for j in range(dim))
    wout = np.fft.irfftn(np.fft.rfftn(win) * np.exp(-quad / 4.0), s=win.shape, axes=range(dim))
    return float((2 * np.pi) ** (dim // 2) * np.sum(win * wout) * np.prod(h))
