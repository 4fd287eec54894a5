import math

import numpy as np
import pytest

from spin_processor.coherent import (
    PhasePoint,
    canonical_spin_vector,
    canonical_to_sphere,
    check_on_disk,
    coherent_overlap,
    coherent_state,
    constraint_phi,
    husimi_q,
    identity_resolution_residual,
    jz2_expectation_canonical,
    measurement_disturbance,
    overlap_modulus_closed_form,
    representative_coherent,
    sphere_quadrature,
    sphere_to_canonical,
    stereographic,
)
from spin_processor.exceptions import OffDiskError, PoleError, UndefinedRepresentativeError
from spin_processor.spin_rep import (
    basis_state,
    expectation,
    expectation_vector,
    random_state,
    spin_operators,
    spin_size,
    total_fluctuation,
)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixture to provide a seeded random generator"""
    return np.random.default_rng(7)


def random_point(rng: np.random.Generator) -> PhasePoint:
    return PhasePoint(math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2.0 * math.pi))


@pytest.mark.parametrize("j", ["1/2", "1", "5", "10", "25"])
def test_coherent_state_is_top_eigenvector(j: str, rng: np.random.Generator) -> None:
    """Test (n.J)|Omega> = J|Omega>, <J> = J n and total fluctuation J"""
    spin = spin_size(j)
    ops = spin_operators(spin)
    for _ in range(10):
        point = random_point(rng)
        n = point.direction()
        psi = coherent_state(spin, point.theta, point.phi)
        projected = n[0] * ops.jx + n[1] * ops.jy + n[2] * ops.jz

        assert np.linalg.norm(psi) == pytest.approx(1.0)
        np.testing.assert_allclose(projected @ psi, spin.j * psi, atol=1e-10 * spin.j)
        np.testing.assert_allclose(expectation_vector(ops, psi), spin.j * n, atol=1e-10 * spin.j)
        assert total_fluctuation(ops, psi) == pytest.approx(spin.j, abs=1e-9 * spin.j)


def test_poles_are_extreme_basis_states() -> None:
    """Test that theta = 0 and theta = pi give |J, J> and |J, -J>"""
    spin = spin_size(4)
    np.testing.assert_allclose(coherent_state(spin, 0.0, 1.3), basis_state(spin, 4), atol=1e-15)
    np.testing.assert_allclose(
        np.abs(coherent_state(spin, math.pi, 0.0)), np.abs(basis_state(spin, -4)), atol=1e-15
    )


def test_overlap_matches_closed_form(rng: np.random.Generator) -> None:
    """Test |<Omega|Omega'>| = cos^(2J)(alpha/2) on random pairs"""
    spin = spin_size(5)
    for _ in range(1000):
        first, second = random_point(rng), random_point(rng)
        computed = abs(coherent_overlap(first, second, spin))
        assert computed == pytest.approx(
            overlap_modulus_closed_form(first, second, spin), abs=1e-10
        )


def test_overlap_at_right_angle() -> None:
    """Test the overlap of two equator points a quarter turn apart"""
    spin = spin_size(10)
    overlap = coherent_overlap(PhasePoint(math.pi / 2, 0.0), PhasePoint(math.pi / 2, math.pi / 2), spin)
    assert abs(overlap) == pytest.approx(2.0**-10, rel=1e-10)
    assert abs(coherent_overlap(PhasePoint(1.0, 2.0), PhasePoint(1.0, 2.0), spin)) == pytest.approx(1.0)


def test_canonical_chart_round_trip(rng: np.random.Generator) -> None:
    """Test that sphere -> disk -> sphere is the identity away from the poles"""
    spin = spin_size(5)
    for _ in range(100):
        point = PhasePoint(rng.uniform(0.1, math.pi - 0.1), rng.uniform(0.0, 2.0 * math.pi))
        q, p = sphere_to_canonical(point.theta, point.phi, spin)
        assert q * q + p * p <= 4.0 * spin.j * (1.0 + 1e-12)
        theta, phi = canonical_to_sphere(q, p, spin)
        assert theta == pytest.approx(point.theta, abs=1e-12)
        assert math.cos(phi) == pytest.approx(math.cos(point.phi), abs=1e-12)
        assert math.sin(phi) == pytest.approx(math.sin(point.phi), abs=1e-12)


def test_canonical_chart_poles() -> None:
    """Test that the south pole maps to the origin and the north pole to the rim"""
    spin = spin_size(5)
    q, p = sphere_to_canonical(math.pi, 0.7, spin)
    assert q == pytest.approx(0.0, abs=1e-7) and p == pytest.approx(0.0, abs=1e-7)
    q, p = sphere_to_canonical(0.0, 0.0, spin)
    assert q * q + p * p == pytest.approx(4.0 * spin.j)
    assert canonical_to_sphere(0.0, 0.0, spin) == (math.pi, 0.0)


def test_canonical_spin_vector_matches_quantum_expectations(rng: np.random.Generator) -> None:
    """Test that the chart formulas reproduce <J> and <Jz^2> of the coherent state"""
    spin = spin_size(10)
    ops = spin_operators(spin)
    for _ in range(20):
        point = random_point(rng)
        q, p = point.canonical(spin)
        psi = coherent_state(spin, point.theta, point.phi)
        np.testing.assert_allclose(
            canonical_spin_vector(q, p, spin), expectation_vector(ops, psi), atol=1e-8
        )
        assert jz2_expectation_canonical(q, p, spin) == pytest.approx(
            expectation(ops.jz @ ops.jz, psi), abs=1e-8
        )


def test_off_disk_is_rejected() -> None:
    """Test that points outside q^2 + p^2 <= 4J raise"""
    spin = spin_size(2)
    with pytest.raises(OffDiskError):
        check_on_disk(3.0, 0.0, spin)
    with pytest.raises(OffDiskError):
        canonical_to_sphere(2.1, 2.0, spin)
    assert check_on_disk(math.sqrt(8.0), 0.0, spin) == pytest.approx(8.0)


def test_stereographic_chart() -> None:
    """Test the stereographic coordinate and its pole"""
    assert stereographic(0.0, 1.0) == 0.0
    assert abs(stereographic(math.pi / 2, 0.3)) == pytest.approx(1.0)
    assert PhasePoint(math.pi / 2, 0.0).stereographic() == pytest.approx(-1.0)
    with pytest.raises(PoleError):
        stereographic(math.pi, 0.0)


def test_phase_point_validation() -> None:
    """Test theta range checking and phi normalization"""
    assert PhasePoint(1.0, -math.pi / 2).phi == pytest.approx(1.5 * math.pi)
    with pytest.raises(ValueError):
        PhasePoint(-0.1, 0.0)
    with pytest.raises(ValueError):
        PhasePoint(1.0, float("nan"))


def test_representative_of_coherent_state_is_itself() -> None:
    """Test that a coherent state represents its own class with kappa = 1"""
    spin = spin_size(6)
    psi = coherent_state(spin, 1.1, 4.0)
    point, witness = representative_coherent(psi, spin)
    assert point.theta == pytest.approx(1.1)
    assert point.phi == pytest.approx(4.0)
    assert witness.kappa == pytest.approx(1.0)


def test_representative_of_random_states(rng: np.random.Generator) -> None:
    """Test that <J> of any state is kappa J n with 0 < kappa <= 1"""
    spin = spin_size(3)
    ops = spin_operators(spin)
    for _ in range(50):
        psi = random_state(spin, rng)
        point, witness = representative_coherent(psi, spin)
        assert 0.0 < witness.kappa <= 1.0 + 1e-12
        np.testing.assert_allclose(
            expectation_vector(ops, psi), witness.kappa * spin.j * point.direction(), atol=1e-10
        )


def test_representative_undefined_for_zero_mean() -> None:
    """Test that <J> = 0 has no representative"""
    spin = spin_size(3)
    with pytest.raises(UndefinedRepresentativeError):
        representative_coherent(basis_state(spin, 0), spin)


def test_constraint_phi() -> None:
    """Test Phi = 0 on coherent states and positive elsewhere"""
    spin = spin_size(3)
    assert constraint_phi(coherent_state(spin, 0.4, 0.2), spin) == pytest.approx(0.0, abs=1e-9)
    # |3, 0>: J(J+1) - 0 - J
    assert constraint_phi(basis_state(spin, 0), spin) == pytest.approx(9.0)


def test_sphere_quadrature_weights() -> None:
    """Test that the weights integrate 1 and cos^2(theta) exactly"""
    theta, _, weight = sphere_quadrature(8, 6)
    assert weight.sum() == pytest.approx(4.0 * math.pi)
    assert float(weight @ np.cos(theta) ** 2) == pytest.approx(4.0 * math.pi / 3.0)
    with pytest.raises(ValueError):
        sphere_quadrature(1, 4)


@pytest.mark.parametrize(
    "j, n_theta, n_phi, tol",
    [("1/2", 16, 16, 1e-12), ("5", 8, 16, 1e-10), ("10", 128, 128, 1e-9)],
)
def test_identity_resolution(j: str, n_theta: int, n_phi: int, tol: float) -> None:
    """Test (2J+1)/(4 pi) * integral |Omega><Omega| = 1"""
    assert identity_resolution_residual(spin_size(j), n_theta, n_phi) <= tol


def test_identity_resolution_refinement() -> None:
    """Test that refining the grid does not increase the residual"""
    spin = spin_size(2)
    residuals = [identity_resolution_residual(spin, n, n) for n in (2, 4, 8, 16)]
    for coarse, fine in zip(residuals, residuals[1:]):
        assert fine <= coarse + 1e-12
    assert residuals[0] > 1e-3


def test_husimi_normalization() -> None:
    """Test that the Husimi function integrates to one"""
    spin = spin_size(4)
    x, w = np.polynomial.legendre.leggauss(12)
    phis = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
    psi = random_state(spin, np.random.default_rng(3))
    q = husimi_q(psi, spin, np.arccos(x), phis)
    assert q.shape == (12, 16)
    assert np.all(q >= 0.0)
    total = spin.dim / (4.0 * math.pi) * float(w @ q.sum(axis=1)) * (2.0 * math.pi / 16)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_measurement_disturbance() -> None:
    """Test that an exact quadrature leaves coherent states undisturbed"""
    spin = spin_size(5)
    assert measurement_disturbance(1.0, 0.5, spin, 8, 16) <= 1e-10
    assert measurement_disturbance(1.0, 0.5, spin, 2, 3) > 1e-6
