"""Entanglement fidelity of noncommutative states under a Gaussian cloner."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..deformation import SWMap, _check_spd, invert_sw, jacobian
from ..gaussian import GaussianWigner, fidelity_gaussian, periodic_fidelity
from ..ncwigner import NCWignerFunction

PATHS = ("closed", "grid", "pullback")


def _axes(shape: np.ndarray, cloner: np.ndarray, points: int, widths: float, extent: Optional[float]):
    if extent is not None:
        return [np.linspace(-extent, extent, points)] * shape.shape[0]
    sd = np.sqrt(np.diag(shape + cloner) / 2.0)
    return [np.linspace(-widths * s, widths * s, points) for s in sd]


def nc_fidelity(state: NCWignerFunction, cloner_shape, sw: Optional[SWMap] = None, path: str = "closed",
                points: int = 32, widths: float = 5.0, extent: Optional[float] = None) -> float:
    """Fidelity of an NC state under the cloner ``G_Sigma`` (``Sigma`` in NC variables).

    ``path`` selects the computation:

    ``closed``
        Gaussian base only.  Pull both shapes back through the map and divide
        the commutative closed form by ``det S``.
    ``grid``
        Double integral over NC variables on a uniform grid, with the
        convolution done by FFT.
    ``pullback``
        The same double integral in commutative variables with the pulled-back
        cloner, divided by ``det S``.
    """
    if path not in PATHS:
        raise ValueError(f"path must be one of {PATHS}")
    if sw is not None and not np.allclose(sw.S, state.map.S, rtol=0, atol=1e-14):
        raise ValueError("map does not match the state's SW map")
    S = state.map.S
    Sigma = _check_spd(cloner_shape, "cloner shape")
    if Sigma.shape != S.shape:
        raise ValueError("cloner shape and map dimensions differ")
    Sinv = invert_sw(state.map).S
    Sigma_t = Sinv @ Sigma @ Sinv.T
    Sigma_t = 0.5 * (Sigma_t + Sigma_t.T)
    det = jacobian(state.map)
    gaussian_base = isinstance(state.base, GaussianWigner)

    if path == "closed":
        if not gaussian_base:
            raise TypeError("closed-form fidelity needs a Gaussian base")
        return fidelity_gaussian(state.base.shape, Sigma_t) / det

    if path == "grid":
        width_shape = state.gaussian().shape if gaussian_base else np.eye(S.shape[0])
        axes = _axes(width_shape, Sigma, points, widths, extent)
        if gaussian_base:
            axes = [ax + m for ax, m in zip(axes, state.gaussian().mean)]
        return periodic_fidelity(state, Sigma, axes)

    base_shape = state.base.shape if gaussian_base else np.eye(S.shape[0])
    axes = _axes(base_shape, Sigma_t, points, widths, extent)
    if gaussian_base:
        axes = [ax + m for ax, m in zip(axes, state.base.mean)]
    base = state._base_callable()
    return periodic_fidelity(base, Sigma_t, axes) / det
