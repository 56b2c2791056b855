import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncphase.errors import DomainError
from ncphase.gaussian import GaussianWigner
from ncphase.starcalc import (
    BoundaryWarning,
    GridFunction,
    PhasePolynomial,
    StarStructure,
    kernel_grid_extent,
    spectral_derivative,
    star_grid,
    star_grid_fourier,
    star_grid_kernel,
    stargen_residual,
    verify_integral_theorem,
)

from strategies import random_polynomial, sampled

L1 = StarStructure.hbar_J(1, 1.0)


def vacuum_grid(points=32, extent=None, a=1.0):
    extent = kernel_grid_extent(points) if extent is None else extent
    return GridFunction.symmetric(lambda x, p: np.exp(-a * (x**2 + p**2)), 2, extent, points)


def gaussian_product(a, b, hbar=1.0):
    """Closed form of ``exp(-a r^2) * exp(-b r^2)`` in one mode."""
    d = 1 + a * b * hbar**2
    return lambda x, p: np.exp(-(a + b) * (x**2 + p**2) / d) / d


class TestGridFunction:
    def test_axes_and_spacing(self):
        g = GridFunction.from_callable(lambda x, p: x + p, [(-1, 1, 5), (0, 2, 3)])
        assert g.shape == (5, 3)
        assert np.allclose(g.spacing, [0.5, 1.0])
        assert g.samples[4, 2] == pytest.approx(3.0)

    def test_integral(self):
        g = vacuum_grid(64, 6.0)
        assert g.integral() == pytest.approx(np.pi, abs=1e-12)

    @pytest.mark.parametrize("dtype", [float, complex])
    def test_binary_round_trip(self, dtype, tmp_path):
        rng = np.random.default_rng(0)
        samples = rng.normal(size=(4, 8)).astype(dtype)
        if dtype is complex:
            samples = samples + 1j * rng.normal(size=(4, 8))
        g = GridFunction([(-1.0, 1.0, 4), (-2.0, 3.0, 8)], samples, {"label": "test", "n": 3})
        back = GridFunction.from_bytes(g.to_bytes())
        assert back.axes == g.axes and back.meta == g.meta
        assert np.array_equal(back.samples, g.samples)
        path = tmp_path / "g.grid"
        g.save(path)
        assert np.array_equal(GridFunction.load(path).samples, g.samples)

    def test_text_header(self):
        g = GridFunction([(-1.0, 1.0, 2)], np.zeros(2))
        head = g.header()
        assert head.startswith("NCPHASE-GRID 1")
        assert "axis" in head and "dtype float64" in head

    def test_rejects_corrupt_bytes(self):
        g = vacuum_grid(8, 2.0)
        data = g.to_bytes()
        with pytest.raises(ValueError):
            GridFunction.from_bytes(data[:-8])
        with pytest.raises(ValueError):
            GridFunction.from_bytes(b"garbage\n" + data)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            vacuum_grid(8, 2.0) + vacuum_grid(8, 3.0)


def test_spectral_derivative_of_gaussian():
    g = vacuum_grid(64, 7.0)
    x, p = g.mesh()
    d = spectral_derivative(g, (1, 0))
    assert np.max(np.abs(d - (-2 * x * np.exp(-(x**2 + p**2))))) < 1e-10
    d2 = spectral_derivative(g.with_samples(g.samples.astype(complex)), (2, 1))
    exact = (4 * x**2 - 2) * (-2 * p) * np.exp(-(x**2 + p**2))
    assert np.max(np.abs(d2 - exact)) < 1e-9


class TestEngines:
    def test_kernel_matches_closed_form_on_compatible_grid(self):
        g = vacuum_grid(32)
        out = star_grid_kernel(g, g, L1)
        exact = g.with_samples(gaussian_product(1, 1)(*g.mesh()))
        assert np.max(np.abs(out.samples - exact.samples)) < 1e-9

    def test_fourier_matches_closed_form(self):
        g = vacuum_grid(64, 7.0)
        out = star_grid_fourier(g, g, L1)
        exact = gaussian_product(1, 1)(*g.mesh())
        assert np.max(np.abs(out.samples - exact)) < 1e-9

    def test_unequal_widths(self):
        g1 = vacuum_grid(64, 7.0, a=0.5)
        g2 = vacuum_grid(64, 7.0, a=2.0)
        out = star_grid_fourier(g1, g2, L1)
        assert np.max(np.abs(out.samples - gaussian_product(0.5, 2.0)(*g1.mesh()))) < 1e-8

    def test_polynomial_operand_matches_bopp_shift(self):
        g = vacuum_grid(64, 7.0)
        x, p = g.mesh()
        out = star_grid_fourier(PhasePolynomial.coordinate(2, 0), g, L1)
        # x * f = (x + i/2 d_p) f
        exact = (x - 1j * p) * np.exp(-(x**2 + p**2))
        assert np.max(np.abs(out.samples - exact)) < 1e-10

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kernel_and_fourier_agree(self, seed):
        rng = np.random.default_rng(seed)
        ext = kernel_grid_extent(32)
        axes = [(-ext, ext, 32)] * 2
        a = sampled(GaussianWigner(rng.uniform(-0.3, 0.3, 2), np.eye(2)), axes)
        b = sampled(GaussianWigner(rng.uniform(-0.3, 0.3, 2), np.diag([0.8, 1.25])), axes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryWarning)
            k = star_grid(a, b, L1, "kernel")
            f = star_grid(a, b, L1, "fourier")
        assert np.max(np.abs(k.samples - f.samples)) < 1e-5 * a.max_abs() * b.max_abs()

    def test_pointwise_limit(self):
        g = vacuum_grid(16, 6.0)
        out = star_grid_fourier(g, g, StarStructure.zero(2))
        assert np.allclose(out.samples, g.samples**2)

    def test_kernel_rejects_singular_lambda(self):
        g = vacuum_grid(8, 4.0)
        with pytest.raises(DomainError):
            star_grid_kernel(g, g, StarStructure.zero(2))

    def test_kernel_point_cap(self):
        g = vacuum_grid(128, 8.0)
        with pytest.raises(ValueError):
            star_grid_kernel(g, g, L1)

    def test_fourier_requires_power_of_two(self):
        g = vacuum_grid(24, 6.0)
        with pytest.raises(ValueError):
            star_grid_fourier(g, g, L1)

    def test_boundary_warning(self):
        g = vacuum_grid(16, 1.0)
        with pytest.warns(BoundaryWarning):
            star_grid_fourier(g, g, L1)

    def test_two_polynomials_rejected(self):
        x = PhasePolynomial.coordinate(2, 0)
        with pytest.raises(ValueError):
            star_grid_fourier(x, x, L1)

    def test_unknown_engine(self):
        g = vacuum_grid(8, 4.0)
        with pytest.raises(ValueError):
            star_grid(g, g, L1, "magic")


class TestIntegralTheorem:
    @pytest.mark.parametrize("engine", ["kernel", "fourier"])
    def test_gaussian_pairs(self, engine):
        rng = np.random.default_rng(4)
        ext = kernel_grid_extent(32)
        axes = [(-ext, ext, 32)] * 2
        for _ in range(3):
            a = sampled(GaussianWigner(rng.uniform(-0.3, 0.3, 2), np.eye(2)), axes)
            b = sampled(GaussianWigner(rng.uniform(-0.3, 0.3, 2), np.eye(2)), axes)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BoundaryWarning)
                assert verify_integral_theorem(a, b, L1, engine).relative() < 1e-6

    def test_polynomial_operand(self):
        rng = np.random.default_rng(5)
        g = vacuum_grid(64, 7.0)
        p = random_polynomial(rng, 2, 3)
        check = verify_integral_theorem(p, g, L1)
        assert check.relative() < 1e-6


def test_stargen_residual_detects_wrong_energy():
    # H = (x^2 + p^2)/2, ground state W = exp(-(x^2 + p^2))/pi with E = 1/2
    H = PhasePolynomial.parse("0.5*x**2 + 0.5*p**2", ["x", "p"])
    W = vacuum_grid(64, 7.0).with_samples(vacuum_grid(64, 7.0).samples / np.pi)
    assert stargen_residual(H, W, 0.5, L1) < 1e-10
    assert stargen_residual(H, W, 1.5, L1) == pytest.approx(1.0, rel=1e-8)
    assert stargen_residual(H, W.with_samples(np.zeros(W.shape)), 1.0, L1) == 0.0
