import math

import numpy as np
import pytest

from spin_processor.coherent import PhasePoint, coherent_state
from spin_processor.dynamics import FlowKind
from spin_processor.engines import (
    EvolutionEngine,
    ExactEngine,
    PhaseFlowEngine,
    SchrodingerFlowEngine,
)
from spin_processor.exact_engine import exact_propagate
from spin_processor.exceptions import (
    DimensionMismatchError,
    EnergyDriftError,
    NonHermitianError,
    NormalizationError,
    OffDiskError,
    OffDiskExcursionError,
)
from spin_processor.models import IntegratorConfig, IntegratorScheme
from spin_processor.schrodinger_engine import schrodinger_real_flow
from spin_processor.spin_rep import (
    HamiltonianParams,
    build_hamiltonian,
    spin_operators,
    spin_size,
)


@pytest.fixture
def integrator() -> IntegratorConfig:
    """Fixture to provide the default fixed-step integrator"""
    return IntegratorConfig(step=1e-3)


@pytest.fixture
def interacting() -> HamiltonianParams:
    """Fixture to provide the (eps, lambda, mu) = (0, 1, 1) couplings"""
    return HamiltonianParams(epsilon=0.0, **{"lambda": 1.0}, mu=1.0)


def test_engine_names(interacting: HamiltonianParams, integrator: IntegratorConfig) -> None:
    """Test that every engine implements the common interface"""
    spin = spin_size(2)
    engines = [
        ExactEngine(interacting, spin),
        SchrodingerFlowEngine(interacting, spin, integrator),
        PhaseFlowEngine(interacting, spin, integrator, FlowKind.REDUCED),
        PhaseFlowEngine(interacting, spin, integrator, FlowKind.CLASSICAL),
    ]
    assert [engine.name for engine in engines] == ["exact", "schrodinger", "reduced", "classical"]
    assert all(isinstance(engine, EvolutionEngine) for engine in engines)


def test_exact_precession() -> None:
    """Test that H = Jz rotates <J> about the z axis at unit rate"""
    spin = spin_size(5)
    engine = ExactEngine(HamiltonianParams(epsilon=1.0, **{"lambda": 0.0}, mu=0.0), spin)
    trajectory = engine.evolve(PhasePoint(math.pi / 2, 0.0), 2 * math.pi, 41)

    np.testing.assert_allclose(trajectory.jx, 5.0 * np.cos(trajectory.times), atol=1e-9)
    np.testing.assert_allclose(trajectory.jy, 5.0 * np.sin(trajectory.times), atol=1e-9)
    np.testing.assert_allclose(trajectory.jz, 0.0, atol=1e-9)
    assert trajectory.phi_constraint is not None
    assert float(np.max(trajectory.phi_constraint)) <= 1e-9


def test_exact_propagation_conserves_energy(interacting: HamiltonianParams) -> None:
    """Test that <H> is constant under the spectral propagator"""
    spin = spin_size(10)
    trajectory = ExactEngine(interacting, spin).evolve(PhasePoint(1.0, 0.3), 10.0, 201)
    assert trajectory.energy_drift <= 1e-8
    assert trajectory.states is not None
    np.testing.assert_allclose(np.linalg.norm(trajectory.states, axis=1), 1.0, atol=1e-12)


def test_exact_propagation_input_checks(interacting: HamiltonianParams) -> None:
    """Test the input checks of the spectral propagator"""
    spin = spin_size(2)
    ops = spin_operators(spin)
    psi = coherent_state(spin, 0.5, 0.5)
    with pytest.raises(NonHermitianError):
        exact_propagate(np.asarray(ops.jplus), psi, 1.0, 3, ops)
    with pytest.raises(NormalizationError):
        exact_propagate(build_hamiltonian(interacting, ops), 2.0 * psi, 1.0, 3, ops)
    with pytest.raises(DimensionMismatchError):
        exact_propagate(build_hamiltonian(interacting, ops), psi[:-1], 1.0, 3, ops)
    with pytest.raises(DimensionMismatchError):
        exact_propagate(np.eye(3, dtype=complex), psi, 1.0, 3, ops)


def test_schrodinger_flow_matches_exact(
    interacting: HamiltonianParams, integrator: IntegratorConfig
) -> None:
    """Test that Hamilton's equations on the real manifold reproduce the Schrodinger evolution"""
    spin = spin_size(3)
    ops = spin_operators(spin)
    h_matrix = build_hamiltonian(interacting, ops)
    psi0 = coherent_state(spin, 1.2, 0.7)

    flow = schrodinger_real_flow(h_matrix, psi0, integrator, 2.0, ops, n_samples=21)
    exact = exact_propagate(h_matrix, psi0, 2.0, 21, ops)

    assert flow.states is not None and exact.states is not None
    fidelity = np.abs(np.einsum("ij,ij->i", exact.states.conj(), flow.states)) ** 2
    assert float(np.min(fidelity)) >= 1.0 - 1e-9
    np.testing.assert_allclose(flow.jz, exact.jz, atol=1e-8)
    assert flow.energy_drift <= 1e-8


def test_schrodinger_flow_default_sampling(integrator: IntegratorConfig) -> None:
    """Test one sample per integrator step when no sample count is given"""
    spin = spin_size(1)
    ops = spin_operators(spin)
    h_matrix = build_hamiltonian(HamiltonianParams(), ops)
    flow = schrodinger_real_flow(h_matrix, coherent_state(spin, 0.3, 0.0), integrator, 0.1, ops)
    assert len(flow) == 101


def test_epsilon_only_flow_is_a_circle(integrator: IntegratorConfig) -> None:
    """Test that H = eps Jz rotates (q, p) rigidly"""
    spin = spin_size(5)
    params = HamiltonianParams(epsilon=1.0, **{"lambda": 0.0}, mu=0.0)
    engine = PhaseFlowEngine(params, spin, integrator, FlowKind.REDUCED)
    q0, p0 = 1.0, 0.5
    trajectory = engine.evolve_canonical(q0, p0, 10.0, 101)

    t = trajectory.times
    assert trajectory.q is not None and trajectory.p is not None
    np.testing.assert_allclose(trajectory.q, q0 * np.cos(t) + p0 * np.sin(t), atol=1e-8)
    np.testing.assert_allclose(trajectory.p, p0 * np.cos(t) - q0 * np.sin(t), atol=1e-8)


def test_midpoint_scheme_conserves_quadratic_energy() -> None:
    """Test the implicit midpoint flow on the eps-only Hamiltonian"""
    spin = spin_size(5)
    params = HamiltonianParams(epsilon=1.0, **{"lambda": 0.0}, mu=0.0)
    config = IntegratorConfig(step=1e-2, scheme=IntegratorScheme.MIDPOINT)
    trajectory = PhaseFlowEngine(params, spin, config).evolve_canonical(1.0, 0.5, 10.0, 11)
    assert trajectory.energy_drift <= 1e-10


def test_flows_agree_with_exact_without_interaction(integrator: IntegratorConfig) -> None:
    """Test that linear Hamiltonians keep coherent states coherent, through the north pole"""
    spin = spin_size(5)
    params = HamiltonianParams(epsilon=0.0, **{"lambda": 1.0}, mu=0.0)
    start = PhasePoint.from_canonical(0.0, math.sqrt(10.0), spin)

    exact = ExactEngine(params, spin).evolve(start, 50.0, 501)
    reduced = PhaseFlowEngine(params, spin, integrator, FlowKind.REDUCED).evolve(start, 50.0, 501)
    classical = PhaseFlowEngine(params, spin, integrator, FlowKind.CLASSICAL).evolve(
        start, 50.0, 501
    )

    np.testing.assert_allclose(reduced.jz, exact.jz, atol=1e-6)
    np.testing.assert_allclose(classical.jz, exact.jz, atol=1e-6)
    assert exact.phi_constraint is not None
    assert float(np.max(exact.phi_constraint)) <= 1e-9


def test_reduced_flow_agrees_with_exact_at_short_times(
    interacting: HamiltonianParams, integrator: IntegratorConfig
) -> None:
    """Test that the exact and reduced Jz separate no faster than t^2"""
    spin = spin_size(5)
    start = PhasePoint.from_canonical(0.0, math.sqrt(10.0), spin)
    exact = ExactEngine(interacting, spin).evolve(start, 0.5, 51)
    reduced = PhaseFlowEngine(interacting, spin, integrator).evolve(start, 0.5, 51)

    error = np.abs(exact.jz - reduced.jz) / spin.j
    assert np.all(error <= 5.0 * exact.times**2 + 1e-9)


@pytest.mark.parametrize("which", [FlowKind.REDUCED, FlowKind.CLASSICAL])
def test_phase_flow_energy_within_tolerance(
    which: FlowKind, interacting: HamiltonianParams, integrator: IntegratorConfig
) -> None:
    """Test that both flows keep the normalized energy within the default bound"""
    for j in (5, 10, 20, 30):
        spin = spin_size(j)
        trajectory = PhaseFlowEngine(interacting, spin, integrator, which).evolve_canonical(
            0.0, math.sqrt(2.0 * j), 10.0, 101
        )
        assert trajectory.energy_drift / j**2 <= 1e-8 * 10.0


@pytest.mark.parametrize("which", [FlowKind.REDUCED, FlowKind.CLASSICAL])
def test_phase_flow_long_run_at_large_spin(
    which: FlowKind, interacting: HamiltonianParams
) -> None:
    """Test the energy drift over t = 50 at J = 30 with the default step"""
    config = IntegratorConfig()
    assert config.step == 1e-3 and config.energy_tolerance == 1e-8
    spin = spin_size(30)
    trajectory = PhaseFlowEngine(interacting, spin, config, which).evolve_canonical(
        0.0, math.sqrt(60.0), 50.0, 501
    )
    assert trajectory.energy_drift / 30**2 <= 1e-8 * 50.0
    assert trajectory.q is not None and trajectory.p is not None
    assert float(np.max(trajectory.q**2 + trajectory.p**2)) <= 4.0 * 30
    assert float(np.max(np.abs(trajectory.jz))) <= 30


def test_phase_flow_reports_energy_drift(interacting: HamiltonianParams) -> None:
    """Test that a coarse step with a strict tolerance is rejected"""
    config = IntegratorConfig(step=0.01, energy_tolerance=1e-15)
    engine = PhaseFlowEngine(interacting, spin_size(5), config)
    with pytest.raises(EnergyDriftError):
        engine.evolve_canonical(0.0, math.sqrt(10.0), 10.0, 11)


def test_phase_flow_rejects_start_on_rim(
    interacting: HamiltonianParams, integrator: IntegratorConfig
) -> None:
    """Test that the flow cannot start on the rim of the disk"""
    engine = PhaseFlowEngine(interacting, spin_size(5), integrator, FlowKind.CLASSICAL)
    with pytest.raises(OffDiskError):
        engine.evolve_canonical(math.sqrt(20.0), 0.0, 1.0, 11)


@pytest.mark.parametrize("which", [FlowKind.REDUCED, FlowKind.CLASSICAL])
def test_phase_flow_crosses_north_pole(which: FlowKind, integrator: IntegratorConfig) -> None:
    """Test that a rotation about x passes the rim of the disk without failing"""
    params = HamiltonianParams(epsilon=0.0, **{"lambda": 1.0}, mu=0.0)
    engine = PhaseFlowEngine(params, spin_size(5), integrator, which)
    trajectory = engine.evolve_canonical(0.0, math.sqrt(10.0), 2.0 * math.pi, 101)

    t = trajectory.times
    np.testing.assert_allclose(trajectory.jx, 0.0, atol=1e-8)
    np.testing.assert_allclose(trajectory.jy, -5.0 * np.cos(t), atol=1e-8)
    np.testing.assert_allclose(trajectory.jz, 5.0 * np.sin(t), atol=1e-8)
    assert trajectory.q is not None and trajectory.p is not None
    u = trajectory.q**2 + trajectory.p**2
    assert float(np.max(u)) <= 20.0 * (1.0 + 1e-12)
    assert float(np.max(u)) == pytest.approx(20.0, abs=1e-6)
    np.testing.assert_allclose(u - 10.0, 2.0 * trajectory.jz, atol=1e-8)


def test_phase_flow_reports_excursion() -> None:
    """Test that a step leaving the sphere is reported, not clamped"""
    params = HamiltonianParams(epsilon=0.0, **{"lambda": 1.0}, mu=0.0)
    engine = PhaseFlowEngine(params, spin_size(5), IntegratorConfig(step=1.0))
    with pytest.raises(OffDiskExcursionError):
        engine.evolve_canonical(0.0, math.sqrt(10.0), 10.0, 11)
