"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``PASS``/``FAIL`` line straight to the terminal, so
``pytest tests/test_acceptance.py -v`` shows a compact report even with
output capture enabled.
"""
import time
import warnings
from contextlib import contextmanager

import numpy as np
import pytest

from ncphase.deformation import (
    DeformationParams,
    build_scalar_sw,
    invert_sw,
    jacobian,
    symplectic_data,
    validate_sw,
)
from ncphase.errors import ProtocolError
from ncphase.gaussian import GaussianWigner, fidelity_gaussian, grid_fidelity, grid_overlap
from ncphase.ncwigner import ho_energy, ho_hamiltonian, ho_params, ho_wigner, nc_from_commutative
from ncphase.protocols import (
    nc_fidelity,
    no_cloning_witness,
    teleport_1d,
    teleport_finite_r,
    teleport_nc_2d,
)
from ncphase.starcalc import (
    BoundaryWarning,
    PhasePolynomial,
    StarStructure,
    kernel_grid_extent,
    star_commutator,
    star_poly,
    stargen_residual,
    verify_integral_theorem,
)

from strategies import random_polynomial, random_spd, sampled


@pytest.fixture
def criterion(capsys):
    """Time a criterion body and report one line, failing on a blown budget."""

    @contextmanager
    def run(number, label, budget):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < budget
            status = "PASS" if ok and within else "FAIL"
            note = "" if within else f" (budget {budget:g} s exceeded)"
            with capsys.disabled():
                print(f"\n[{status}] criterion {number}: {label} in {elapsed:.2f} s{note}")
        assert within, f"criterion {number} took {elapsed:.1f} s, budget {budget:g} s"

    return run


def random_scalar_params(rng, lo=0.0, hi=0.9):
    """Scalar parameters with ``theta eta / hbar^2`` drawn from ``(lo, hi)``, either sign of theta."""
    hbar = rng.uniform(0.5, 2.0)
    ratio = rng.uniform(lo, hi)
    theta = rng.uniform(0.1, 2.0) * rng.choice([-1.0, 1.0]) * hbar
    return DeformationParams.scalar(theta, ratio * hbar**2 / theta, hbar)


def mixed_sign_params(rng):
    """Scalar parameters with ``|theta eta| / hbar^2 < 0.9``, covering negative ratios too."""
    p = random_scalar_params(rng, 1e-3, 0.9)
    if rng.random() < 0.5:
        return DeformationParams.scalar(p.theta, -p.eta, p.hbar)
    return p


def test_coherent_cloning_fidelity(criterion):
    with criterion(1, "coherent-state cloning fidelity 2/3", budget=1.0):
        closed = fidelity_gaussian(np.eye(2), np.eye(2))
        assert closed == 2 / 3
        assert abs(grid_fidelity(np.eye(2), np.eye(2)) - 2 / 3) < 1e-4


def test_sw_invariance_of_fidelity(criterion):
    rng = np.random.default_rng(20)
    with criterion(2, "SW invariance of fidelity, 50 triples", budget=30.0):
        worst_closed = worst_grid = 0.0
        for _ in range(50):
            p = random_scalar_params(rng, 1e-3, 0.5)
            assert 0 < p.deformation_ratio < 0.5
            sw = build_scalar_sw(p)
            Gamma, Sigma = random_spd(rng, 4), random_spd(rng, 4, 0.1, 1.5)
            Sinv = invert_sw(sw).S
            state = nc_from_commutative(GaussianWigner(rng.uniform(-1, 1, 4), Sinv @ Gamma @ Sinv.T), sw)
            expected = fidelity_gaussian(Gamma, Sigma)
            worst_closed = max(worst_closed, abs(nc_fidelity(state, Sigma, path="closed") - expected))
            worst_grid = max(worst_grid, abs(nc_fidelity(state, Sigma, path="grid") - expected))
        assert worst_closed < 1e-10
        assert worst_grid < 1e-4


def test_jacobian_identity(criterion):
    rng = np.random.default_rng(30)
    with criterion(3, "det S = 1 - theta eta / hbar^2, 100 maps", budget=1.0):
        for _ in range(100):
            p = mixed_sign_params(rng)
            lam = rng.uniform(0.5, 2.0)
            expected = 1 - p.theta * p.eta / p.hbar**2
            assert abs(jacobian(build_scalar_sw(p, lam)) - expected) < 1e-12 * abs(expected)
            assert abs(jacobian(build_scalar_sw(p)) - expected) < 1e-12 * abs(expected)


def test_commutator_preservation(criterion):
    rng = np.random.default_rng(40)
    with criterion(4, "commutator preservation through generated maps", budget=5.0):
        worst = 0.0
        for _ in range(60):
            p = mixed_sign_params(rng)
            for lam in (None, rng.uniform(0.5, 2.0)):
                sw = build_scalar_sw(p, lam)
                J = StarStructure.hbar_J(2, p.hbar)
                z = [PhasePolynomial.linear(row) for row in sw.S]
                target = 1j * p.hbar * symplectic_data(p).Omega
                got = np.array([[star_commutator(a, b, J).coefficient((0,) * 4) for b in z] for a in z])
                worst = max(worst, float(np.max(np.abs(got - target))), validate_sw(sw, p).max())
        assert worst < 1e-10


def _unit_gaussian(rng):
    A = np.eye(2) + rng.uniform(-0.2, 0.2, (2, 2))
    shape = A @ A.T
    return GaussianWigner(rng.uniform(-0.3, 0.3, 2), shape / np.sqrt(np.linalg.det(shape)))


def test_integral_theorem(criterion):
    rng = np.random.default_rng(50)
    L = StarStructure.hbar_J(1, 1.0)
    ext = kernel_grid_extent(32)
    axes = [(-ext, ext, 32)] * 2
    with criterion(5, "integral theorem, 40 pairs on both engines", budget=60.0):
        worst = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryWarning)
            for kind in ("gaussian", "polynomial"):
                for _ in range(20):
                    a = sampled(_unit_gaussian(rng), axes)
                    b = sampled(_unit_gaussian(rng), axes)
                    if kind == "polynomial":
                        poly = random_polynomial(rng, 2, 2)
                        a = a.with_samples(poly(*a.mesh()) * a.samples)
                    for engine in ("kernel", "fourier"):
                        worst = max(worst, verify_integral_theorem(a, b, L, engine).relative())
        assert worst < 1e-6


def test_star_associativity(criterion):
    rng = np.random.default_rng(60)
    p = DeformationParams.scalar(0.4, -0.3)
    structures = [StarStructure.hbar_J(2, 1.0), StarStructure.hbar_Omega(p), StarStructure.theta(p),
                  StarStructure.eta(p)]
    with criterion(6, "star associativity, 100 triples per structure", budget=10.0):
        for L in structures:
            for _ in range(100):
                a, b, c = (random_polynomial(rng, 4, 4) for _ in range(3))
                lhs = star_poly(star_poly(a, b, L), c, L)
                rhs = star_poly(a, star_poly(b, c, L), L)
                assert lhs.max_abs_diff(rhs) < 1e-12


def test_oscillator_stargenvalues(criterion):
    levels = [(n1, n2) for n1 in range(4) for n2 in range(4 - n1)]
    settings = [(0.2, 0.1), (0.5, -0.3), (-0.4, 0.6)]
    with criterion(7, "NC oscillator stargenvalues, n1 + n2 <= 3 on 64^4 grids", budget=300.0):
        worst_res = worst_norm = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryWarning)
            for theta, eta in settings:
                params = ho_params(build_scalar_sw(DeformationParams.scalar(theta, eta)))
                H = ho_hamiltonian(params)
                for n1, n2 in levels:
                    g = ho_wigner(n1, n2, params).grid(64, renormalize=False)
                    worst_norm = max(worst_norm, abs(g.meta["norm"] - 1.0))
                    res = stargen_residual(H, g, ho_energy(n1, n2, params), StarStructure.hbar_J(2, 1.0))
                    worst_res = max(worst_res, res)
        assert worst_res < 1e-3
        assert worst_norm < 1e-4


def test_teleportation(criterion):
    state = GaussianWigner.coherent([0.4, -0.2])
    with criterion(8, "teleportation curve, delta limit, NC canonical and naive sets", budget=120.0):
        for r in (0.0, 0.5, 1.0, 2.0, 4.0):
            assert abs(teleport_finite_r(state, r).fidelity - 2 / (2 + np.exp(-2 * r))) < 1e-6
        assert abs(teleport_finite_r(state, 16.0).fidelity - 1.0) < 1e-6
        for i in range(20):
            assert abs(teleport_1d(state, 16.0, seed=8, run_index=i, convention="cm1").fidelity - 1.0) < 1e-6

        p = DeformationParams.scalar(0.3, 0.2)
        sw = build_scalar_sw(p)
        Sinv = invert_sw(sw).S
        nc_state = nc_from_commutative(GaussianWigner([0.1, 0.2, -0.3, 0.4], Sinv @ Sinv.T), sw)
        pts = np.random.default_rng(80).normal(size=(500, 4))
        w_in = nc_state(pts)
        for i in range(5):
            run = teleport_nc_2d(nc_state, p, seed=8, run_index=i)
            assert np.max(np.abs(run.corrected_output(pts) - w_in)) < 1e-6 * np.max(w_in)

        with pytest.raises(ProtocolError, match=r"\[x\+, y\+\] = 0.6i"):
            teleport_nc_2d(nc_state, p, observables="naive", seed=8)


def test_no_cloning_witness(criterion):
    with criterion(9, "no-cloning overlap dichotomy witness", budget=5.0):
        contradictions = 0
        for d in (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0):
            a = GaussianWigner.coherent([0.0, 0.0])
            b = GaussianWigner.coherent([d / np.sqrt(2), d / np.sqrt(2)])
            w = no_cloning_witness(a, b)
            oracle = grid_overlap(a, b) / np.sqrt(grid_overlap(a, a) * grid_overlap(b, b))
            assert abs(w.P - oracle) < 1e-6
            assert abs(np.sqrt(w.P) - np.exp(-d**2 / 4)) < 1e-6
            assert abs(w.P - np.exp(-d**2 / 2)) < 1e-6
            contradictions += w.contradiction
            if w.contradiction:
                assert 0 < w.P < 1 and w.P_squared != pytest.approx(w.P)
        assert contradictions >= 1
