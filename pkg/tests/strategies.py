"""Hypothesis strategies and small builders shared by the test modules."""
import numpy as np
from hypothesis import strategies as st

from ncphase import DeformationParams, GaussianWigner, GridFunction, PhasePolynomial

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def scalar_params(draw, max_ratio=0.9, hbar=None):
    """Scalar ``(theta, eta, hbar)`` with ``|theta eta| / hbar^2 < max_ratio``."""
    h = draw(st.floats(0.5, 2.0, **finite)) if hbar is None else hbar
    theta = draw(st.floats(-1.5, 1.5, **finite)) * h
    bound = max_ratio * h * h / max(abs(theta), 1e-3)
    eta = draw(st.floats(-min(1.5 * h, bound), min(1.5 * h, bound), **finite))
    return DeformationParams.scalar(theta, eta, h)


@st.composite
def positive_ratio_params(draw, lo=1e-3, hi=0.5):
    """Scalar parameters with ``theta eta / hbar^2`` in ``(lo, hi)``."""
    h = draw(st.floats(0.5, 2.0, **finite))
    ratio = draw(st.floats(lo, hi, **finite))
    theta = draw(st.floats(0.1, 2.0, **finite)) * draw(st.sampled_from([-1, 1]))
    return DeformationParams.scalar(theta * h, ratio * h * h / theta, h)


def random_spd(rng, dim, lo=0.5, hi=2.0):
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    return Q @ np.diag(rng.uniform(lo, hi, dim)) @ Q.T


def random_physical_shape(rng, n):
    """Shape of a pure Gaussian state, ``M M^T`` with ``M`` symplectic, times a mixing factor."""
    from ncphase.deformation import random_symplectic

    M = random_symplectic(n, rng, scale=0.3)
    return M @ M.T * rng.uniform(1.0, 1.5)


@st.composite
def polynomials(draw, dim, max_degree=3, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        exp = draw(st.lists(st.integers(0, max_degree), min_size=dim, max_size=dim))
        if sum(exp) > max_degree:
            continue
        re = draw(st.floats(-2, 2, **finite))
        im = draw(st.floats(-2, 2, **finite))
        terms[tuple(exp)] = complex(re, im)
    return PhasePolynomial(dim, terms)


def random_polynomial(rng, dim, degree, terms=6):
    out = {}
    for _ in range(terms):
        exp = [0] * dim
        for _ in range(int(rng.integers(0, degree + 1))):
            exp[int(rng.integers(0, dim))] += 1
        out[tuple(exp)] = out.get(tuple(exp), 0) + complex(rng.normal(), rng.normal())
    return PhasePolynomial(dim, out)


def sampled(state: GaussianWigner, axes) -> GridFunction:
    """Sample a Gaussian on ``(lo, hi, n)`` axes."""
    return GridFunction.from_callable(lambda *c: state(np.stack(np.broadcast_arrays(*c), -1)), axes)
