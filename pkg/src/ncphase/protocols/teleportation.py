"""Continuous-variable teleportation at the Wigner-function level.

Each protocol runs coordinate by coordinate.  Alice holds ``a``, Bob ``b``
and the unknown input sits on ``c``.  The shared resource squeezes the
nullifier ``n = a + e b``.  Alice measures ``m = (a + f c) / sqrt 2``, which
leaves Bob with ``c = b + f sqrt2 m - f n``.  Bob undoes the displacement
``f sqrt2 m``, so in the perfectly correlated limit his state equals the
input.

Finite squeezing is simulated exactly for Gaussian inputs by integrating the
nullifiers out in precision (inverse-shape) form.  That form stays
well conditioned even at ``r = 16``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..deformation import DeformationParams
from ..errors import ProtocolError
from ..gaussian import GaussianWigner, convolve, evaluate, fidelity_gaussian, overlap
from ..ncwigner import NCWignerFunction
from ..starcalc import GridFunction, PhasePolynomial, StarStructure, star_commutator

DELTA_R = 16.0
COMMUTATOR_TOL = 1e-10
CONVENTIONS = {"physical": 2.0, "cm1": 1.0}


@dataclass(frozen=True)
class Channel:
    """Per-coordinate signs: resource nullifier ``a + e b``, measured ``a + f c``."""

    names: Tuple[str, ...]
    resource_signs: Tuple[int, ...]
    measured_signs: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.names)

    def observable_names(self) -> Tuple[str, ...]:
        return tuple(n + ("+" if f > 0 else "-") for n, f in zip(self.names, self.measured_signs))


ONE_D = Channel(("x", "p"), (1, -1), (1, -1))
NC_CANONICAL = Channel(("x", "y", "px", "py"), (1, -1, -1, 1), (1, -1, -1, 1))
NC_NAIVE = Channel(("x", "y", "px", "py"), (1, -1, -1, 1), (1, 1, 1, 1))


@dataclass
class TeleportationRun:
    protocol: str
    r: Optional[float]
    delta: bool
    input: Any
    measured: Dict[str, float]
    output: Any
    corrected_output: Any
    fidelity: float
    seed: Optional[int] = None
    run_index: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    def record(self) -> Dict[str, Any]:
        """Flat row: protocol, resource, outcomes, fidelity, seed."""
        row = {"protocol": self.protocol, "resource": "delta" if self.delta else self.r}
        row.update({f"m_{k}": v for k, v in self.measured.items()})
        row.update({"fidelity": self.fidelity, "seed": self.seed, "run": self.run_index})
        return row


# ---------------------------------------------------------------- commutator gate

def check_observables(channel: Channel, L: StarStructure):
    """Raise :class:`ProtocolError` unless the measured combinations pairwise commute.

    ``L`` is the algebra of one particle; Alice's two particles are
    independent copies.  The combinations are the unnormalized ``a + f c``.
    """
    k = channel.size
    both = StarStructure.direct_sum(L, L)
    obs = []
    for i, f in enumerate(channel.measured_signs):
        coeffs = np.zeros(2 * k)
        coeffs[i] = 1.0
        coeffs[k + i] = f
        obs.append(PhasePolynomial.linear(coeffs))
    names = channel.observable_names()
    for i, j in combinations(range(k), 2):
        value = star_commutator(obs[i], obs[j], both).coefficient((0,) * (2 * k))
        if abs(value) > COMMUTATOR_TOL:
            raise ProtocolError(
                f"observables {names[i]} and {names[j]} do not commute: "
                f"[{names[i]}, {names[j]}] = {value.imag:.6g}i; they cannot be measured simultaneously"
            )
    if any(e * f != 1 for e, f in zip(channel.resource_signs, channel.measured_signs)):
        raise ProtocolError("measured observables are not matched to the resource correlations")


# ---------------------------------------------------------------- Gaussian kernel

def _conditional(state: GaussianWigner, channel: Channel, r: float, kappa: float):
    """Bob's conditional state as an affine function of the outcome vector ``m``.

    Returns ``(shape, mean0, gain)`` with pre-correction mean ``mean0 + gain @ m``.
    """
    k = channel.size
    I = np.eye(k)
    E = np.diag(channel.resource_signs).astype(float)
    F = np.diag(channel.measured_signs).astype(float)
    Q = np.linalg.inv(state.shape)
    L1 = np.hstack([I, 0 * I])
    L2 = np.hstack([I, -2 * E])
    L3 = np.hstack([-F, I])
    P = (np.exp(2 * r) / kappa) * L1.T @ L1 + (np.exp(-2 * r) / kappa) * L2.T @ L2 + L3.T @ Q @ L3
    Pnn, Pnb, Pbb = P[:k, :k], P[:k, k:], P[k:, k:]
    prec = Pbb - Pnb.T @ np.linalg.solve(Pnn, Pnb)
    prec = 0.5 * (prec + prec.T)
    shape = np.linalg.inv(prec)
    # linear term h = L3^T Q d with d = F sqrt2 m - mu; the mean is affine in d
    G = L3.T @ Q  # h = G d
    Gb = G[k:] - Pnb.T @ np.linalg.solve(Pnn, G[:k])
    to_mean = -shape @ Gb  # mean = to_mean @ d
    mean0 = to_mean @ (-state.mean)
    gain = to_mean @ (np.sqrt(2) * F)
    return 0.5 * (shape + shape.T), mean0, gain


def sample_outcomes(state: GaussianWigner, channel: Channel, r: float, rng: np.random.Generator,
                    size: Optional[int] = None, kappa: float = 2.0) -> np.ndarray:
    """Draw ``m`` from its exact marginal by sampling the physical variables."""
    k = channel.size
    shape = (k,) if size is None else (size, k)
    e = np.array(channel.resource_signs, dtype=float)
    f = np.array(channel.measured_signs, dtype=float)
    n = rng.normal(scale=np.sqrt(kappa * np.exp(-2 * r) / 2), size=shape)
    w = rng.normal(scale=np.sqrt(kappa * np.exp(2 * r) / 2), size=shape)
    a = 0.5 * (n + w)
    c = rng.multivariate_normal(state.mean, state.covariance, size=size)
    return (a + f * c) / np.sqrt(2)


def _gaussian_run(state: GaussianWigner, channel: Channel, r: float, outcomes, rng, kappa):
    if isinstance(outcomes, str):
        if outcomes != "sample":
            raise ValueError("outcomes must be a vector or 'sample'")
        m = sample_outcomes(state, channel, r, rng, kappa=kappa)
    else:
        m = np.asarray(outcomes, dtype=float).reshape(channel.size)
    shape, mean0, gain = _conditional(state, channel, r, kappa)
    out = GaussianWigner(mean0 + gain @ m, shape)
    shift = np.sqrt(2) * np.array(channel.measured_signs) * m
    corrected = GaussianWigner(out.mean + shift, shape)
    fid = (2 * np.pi) ** state.modes * overlap(corrected, state)
    return m, out, corrected, float(fid)


# ---------------------------------------------------------------- sampled inputs

@dataclass(frozen=True)
class DisplacedWigner:
    """``W(z + shift)`` for any callable or sampled ``W``."""

    base: Any
    shift: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return _as_callable(self.base)(z + self.shift)


def _as_callable(f):
    if isinstance(f, GaussianWigner):
        return lambda z: evaluate(f, z)
    if isinstance(f, GridFunction):
        interp = RegularGridInterpolator(f.coordinates(), f.samples, method="cubic",
                                         bounds_error=False, fill_value=0.0)
        return lambda z: interp(z.reshape(-1, f.ndim)).reshape(z.shape[:-1])
    return f


def _sampled_run(grid: GridFunction, channel: Channel, outcomes, rng):
    """Delta-limit substitution rule on a sampled input."""
    if isinstance(outcomes, str):
        # outcomes are flat in the perfectly correlated limit; draw a bounded displacement
        lo = np.array([ax[0] for ax in grid.axes])
        hi = np.array([ax[1] for ax in grid.axes])
        m = rng.uniform(-0.25, 0.25, size=channel.size) * (hi - lo) / np.sqrt(2)
    else:
        m = np.asarray(outcomes, dtype=float).reshape(channel.size)
    shift = np.sqrt(2) * np.array(channel.measured_signs) * m
    out = DisplacedWigner(grid, shift)
    corrected = DisplacedWigner(out, -shift)
    pts = np.stack([c for c in grid.mesh(sparse=False)], axis=-1)
    corrected_samples = grid.with_samples(corrected(pts))
    modes = grid.ndim // 2
    fid = (2 * np.pi) ** modes * float(np.real((corrected_samples * grid.samples).integral()))
    return m, out, corrected_samples, fid


# ---------------------------------------------------------------- protocols

def _rng(seed, run_index):
    return np.random.default_rng([seed if seed is not None else 0, run_index])


def teleport_1d(state, r: float, outcomes="sample", seed: Optional[int] = None, run_index: int = 0,
                hbar: float = 1.0, convention: str = "physical") -> TeleportationRun:
    """One-mode protocol with squeezing ``r``.

    ``state`` is a one-mode :class:`GaussianWigner` (simulated exactly) or a
    two-coordinate :class:`GridFunction` (exact substitution rule of the
    perfectly correlated limit; ``r`` is then only recorded).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {sorted(CONVENTIONS)}")
    dim = state.dim if isinstance(state, GaussianWigner) else state.ndim
    if dim != 2:
        raise ValueError(f"one-mode protocol needs a two-coordinate state, got {dim}")
    check_observables(ONE_D, StarStructure.hbar_J(1, hbar))
    rng = _rng(seed, run_index)
    if isinstance(state, GaussianWigner):
        m, out, corrected, fid = _gaussian_run(state, ONE_D, r, outcomes, rng, CONVENTIONS[convention])
    else:
        m, out, corrected, fid = _sampled_run(state, ONE_D, outcomes, rng)
    names = ONE_D.observable_names()
    delta = r >= DELTA_R or not isinstance(state, GaussianWigner)
    return TeleportationRun("ideal-1d" if delta else "1d", r, delta, state, dict(zip(names, map(float, m))),
                            out, corrected, fid, seed, run_index, {"convention": convention})


def teleport_ideal_1d(state, outcomes="sample", seed: Optional[int] = None, run_index: int = 0,
                      hbar: float = 1.0) -> TeleportationRun:
    """One-mode protocol in the perfectly correlated limit (``r = DELTA_R``)."""
    return teleport_1d(state, DELTA_R, outcomes, seed, run_index, hbar)


def teleport_finite_r(state: GaussianWigner, r: float) -> TeleportationRun:
    """Convolution channel ``W_in o G_sigma`` with ``sigma = exp(-2r)``."""
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing must be finite and non-negative, got {r!r}")
    if state.dim != 2:
        raise ValueError("finite-r channel is defined for one-mode inputs")
    sigma = np.exp(-2 * r) * np.eye(2)
    out = convolve(state, sigma)
    return TeleportationRun("finite-r", float(r), False, state, {}, out, out,
                            fidelity_gaussian(state.shape, sigma))


def teleport_nc_2d(state, params: DeformationParams, outcomes="sample", observables="canonical",
                   seed: Optional[int] = None, run_index: int = 0, r: float = DELTA_R) -> TeleportationRun:
    """Two-dimensional protocol over ``(x, y, p_x, p_y)`` with the deformed algebra.

    ``observables`` is ``"canonical"``, ``"naive"`` or a :class:`Channel`.
    The measured set is gated on vanishing star-commutators before anything
    else happens.
    """
    channel = {"canonical": NC_CANONICAL, "naive": NC_NAIVE}.get(observables, observables)
    if not isinstance(channel, Channel):
        raise ValueError(f"unknown observable set {observables!r}")
    check_observables(channel, StarStructure.hbar_Omega(params))
    if isinstance(state, NCWignerFunction):
        state = state.gaussian() if isinstance(state.base, GaussianWigner) else state.sample()
    dim = state.dim if isinstance(state, GaussianWigner) else state.ndim
    if dim != 4:
        raise ValueError(f"two-dimensional protocol needs a four-coordinate state, got {dim}")
    rng = _rng(seed, run_index)
    if isinstance(state, GaussianWigner):
        m, out, corrected, fid = _gaussian_run(state, channel, r, outcomes, rng, CONVENTIONS["physical"])
    else:
        m, out, corrected, fid = _sampled_run(state, channel, outcomes, rng)
    return TeleportationRun("nc-2d", r, r >= DELTA_R, state, dict(zip(channel.observable_names(), map(float, m))),
                            out, corrected, fid, seed, run_index, {"theta": params.theta, "eta": params.eta})


def run_batch(protocol, runs: int, seed: int, **kw):
    """Independent runs with per-run generator streams derived from ``(seed, index)``."""
    return [protocol(seed=seed, run_index=i, **kw) for i in range(runs)]


def averaged_output(state: GaussianWigner, r: float, points, samples: int = 100_000, seed: int = 0,
                    convention: str = "cm1", channel: Channel = ONE_D) -> np.ndarray:
    """Monte Carlo average of corrected conditional outputs, evaluated at ``points``.

    With ``convention="cm1"`` the average converges to ``W_in o G_sigma`` with
    ``sigma = exp(-2r)``; the ``"physical"`` resource gives ``2 exp(-2r)``.
    """
    kappa = CONVENTIONS[convention]
    rng = np.random.default_rng([seed, 0])
    m = sample_outcomes(state, channel, r, rng, size=samples, kappa=kappa)
    shape, mean0, gain = _conditional(state, channel, r, kappa)
    shift = np.sqrt(2) * np.array(channel.measured_signs, dtype=float)
    means = mean0 + m @ gain.T + m * shift
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(points))
    prec = np.linalg.inv(shape)
    peak = 1.0 / (np.pi ** (len(shift) // 2) * np.sqrt(np.linalg.det(shape)))
    for i, z in enumerate(points):
        d = z - means
        out[i] = peak * np.mean(np.exp(-np.einsum("ni,ij,nj->n", d, prec, d)))
    return out


def channel_sigma(r: float, convention: str = "cm1") -> float:
    """Shape of the averaged channel's noise, ``kappa exp(-2r)``."""
    return CONVENTIONS[convention] * np.exp(-2 * r)
