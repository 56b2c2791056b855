import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncphase import deformation as dm
from ncphase.deformation import (
    DeformationParams,
    SWMap,
    build_scalar_sw,
    compose_symplectic,
    invert_sw,
    jacobian,
    random_symplectic,
    standard_symplectic,
    symplectic_data,
    transform_covariance,
    validate_sw,
)
from ncphase.errors import DegeneracyError, DomainError

from strategies import scalar_params


def test_commutative_limit_is_identity():
    p = DeformationParams.scalar(0.0, 0.0)
    sw = build_scalar_sw(p)
    assert np.allclose(sw.S, np.eye(4))
    assert sw.lam == sw.mu == 1.0
    J, Omega = symplectic_data(p)
    assert np.array_equal(J, Omega)


def test_omega_layout():
    p = DeformationParams.scalar(0.3, -0.2, hbar=2.0)
    Omega = symplectic_data(p).Omega
    assert Omega[0, 1] == pytest.approx(0.15)
    assert Omega[2, 3] == pytest.approx(-0.1)
    assert np.array_equal(Omega[:2, 2:], np.eye(2))
    assert np.array_equal(Omega[2:, :2], -np.eye(2))


def test_constraint_root_is_continuous_branch():
    assert dm.solve_scalar_constraint(0.0) == 1.0
    s = dm.solve_scalar_constraint(0.36)
    assert s * (1 - s) == pytest.approx(0.09)
    assert s > 0.5
    with pytest.raises(DomainError):
        dm.solve_scalar_constraint(1.0)


@pytest.mark.parametrize("theta,eta", [(1.0, 1.0), (2.0, 0.6), (-1.0, -1.5)])
def test_domain_rejected(theta, eta):
    with pytest.raises(DomainError):
        DeformationParams.scalar(theta, eta)


def test_params_validation():
    with pytest.raises(ValueError):
        DeformationParams(2, 1.0, np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        DeformationParams.scalar(0.1, 0.1, hbar=0.0)
    with pytest.raises(ValueError):
        DeformationParams(0, 1.0, np.zeros((0, 0)), np.zeros((0, 0)))


@settings(max_examples=60, deadline=None)
@given(scalar_params())
def test_scalar_map_is_valid(p):
    sw = build_scalar_sw(p)
    assert validate_sw(sw, p).ok(1e-10)
    Omega = symplectic_data(p).Omega
    J = standard_symplectic(2)
    assert np.allclose(sw.S @ J @ sw.S.T, Omega, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(scalar_params(), st.floats(0.3, 3.0))
def test_jacobian_identity_any_split(p, lam):
    sw = build_scalar_sw(p, lam)
    assert validate_sw(sw, p).ok(1e-10)
    expected = 1 - p.deformation_ratio
    assert jacobian(sw) == pytest.approx(expected, rel=1e-12)
    assert jacobian(sw) == pytest.approx(np.sqrt(np.linalg.det(symplectic_data(p).Omega)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(scalar_params())
def test_inverse_round_trip(p):
    sw = build_scalar_sw(p)
    inv = invert_sw(sw)
    assert inv.inverse
    assert np.allclose(inv.S @ sw.S, np.eye(4), atol=1e-12)
    xi = np.array([0.3, -1.0, 0.7, 2.0])
    assert np.allclose(inv.apply(sw.apply(xi)), xi)


def test_symplectic_freedom_preserves_validity():
    rng = np.random.default_rng(3)
    p = DeformationParams.scalar(0.4, 0.3)
    sw = build_scalar_sw(p)
    M = random_symplectic(2, rng)
    J = standard_symplectic(2)
    assert np.allclose(M @ J @ M.T, J, atol=1e-12)
    assert validate_sw(compose_symplectic(sw, M), p).ok(1e-10)


def test_invalid_map_reports_residuals():
    p = DeformationParams.scalar(0.4, 0.3)
    res = validate_sw(SWMap.identity(2), p)
    assert res.theta == pytest.approx(0.4)
    assert res.eta == pytest.approx(0.3)
    assert not res.ok()


def test_singular_map_raises():
    with pytest.raises(DegeneracyError):
        invert_sw(SWMap.from_matrix(np.zeros((4, 4))))


def test_transform_covariance():
    sw = build_scalar_sw(DeformationParams.scalar(0.2, 0.1))
    out = transform_covariance(sw, np.eye(4))
    assert np.allclose(out, sw.S @ sw.S.T)
    with pytest.raises(ValueError):
        transform_covariance(sw, -np.eye(4))


def test_lambda_must_be_positive():
    with pytest.raises(ValueError):
        build_scalar_sw(DeformationParams.scalar(0.2, 0.1), lam=-1.0)


def test_general_matrices():
    Theta = np.array([[0, 0.2, 0.1], [-0.2, 0, 0.05], [-0.1, -0.05, 0]])
    p = DeformationParams(3, 1.0, Theta, np.zeros((3, 3)))
    assert not p.is_scalar
    assert symplectic_data(p).Omega.shape == (6, 6)
    with pytest.raises(ValueError):
        _ = p.deformation_ratio
