import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .coherent import (
    PhasePoint,
    coherent_overlap,
    coherent_state,
    identity_resolution_residual,
    measurement_disturbance,
    overlap_modulus_closed_form,
    sphere_to_canonical,
)
from .config import Config
from .dynamics import FlowKind
from .engines import EvolutionEngine, ExactEngine, PhaseFlowEngine, SchrodingerFlowEngine
from .exceptions import ExperimentConfigError
from .integrators import Trajectory
from .models import ComparisonReport, ExperimentConfig, SpinReport
from .output_utils import spin_label, write_columns, write_csv, write_json, write_series_svg
from .spin_rep import RealArray, SpinSize, dispersion_ratio, expectation, spin_operators

logger = logging.getLogger(__name__)

T = TypeVar("T")


class MomentFunction(str, Enum):
    JZ_SQUARED = "jz_squared"
    JX_SQUARED = "jx_squared"
    CASIMIR = "casimir"


class EngineName(str, Enum):
    EXACT = "exact"
    SCHRODINGER = "schrodinger"
    REDUCED = "reduced"
    CLASSICAL = "classical"


def moment_error(f: MomentFunction, j: SpinSize, theta: float, phi: float = 0.0) -> float:
    """|<f(J)> - f(<J>)| / J^2 at the coherent state (theta, phi)"""
    ops = spin_operators(j)
    psi = coherent_state(j, theta, phi)
    if f is MomentFunction.JZ_SQUARED:
        components = [ops.jz]
    elif f is MomentFunction.JX_SQUARED:
        components = [ops.jx]
    else:
        components = list(ops.components)
    exact = sum(expectation(c @ c, psi) for c in components)
    factorized = sum(expectation(c, psi) ** 2 for c in components)
    return abs(exact - factorized) / (j.j * j.j)


def moment_error_closed_form(f: MomentFunction, j: SpinSize, theta: float) -> float:
    """Leading 1/J factorization error at phi = 0"""
    if f is MomentFunction.JZ_SQUARED:
        return math.sin(theta) ** 2 / (2.0 * j.j)
    if f is MomentFunction.JX_SQUARED:
        return math.cos(theta) ** 2 / (2.0 * j.j)
    return 1.0 / j.j


def fit_loglog_slope(js: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(J)"""
    slope, _ = np.polyfit(np.log(np.asarray(js)), np.log(np.asarray(errors)), 1)
    return float(slope)


class ExperimentProcessor:
    """Runs the comparison experiments and writes their CSV, SVG and JSON outputs"""

    def __init__(self, config: ExperimentConfig, workers: Optional[int] = None) -> None:
        self.config = config
        self.output_dir = Config.setup(config.output_dir)
        self.workers = workers or Config.WORKERS

    def initial_canonical(self, spin: SpinSize) -> Tuple[float, float]:
        """(q0, p0) for this J: theta/phi through the chart, explicit q0/p0, or the equator default"""
        config = self.config
        if config.theta is not None and config.phi is not None:
            return sphere_to_canonical(config.theta, config.phi, spin)
        if config.q0 is not None and config.p0 is not None:
            return config.q0, config.p0
        return 0.0, math.sqrt(2.0 * spin.j)

    def _map_spins(self, func: Callable[[SpinSize], T], label: str) -> List[T]:
        """Apply func to every J concurrently; results come back in ascending J"""
        spins = self.config.sorted_spins()

        def run(spin: SpinSize) -> T:
            try:
                return func(spin)
            except Exception as e:
                logger.error(f"Error running {label} for J={spin}: {str(e)}")
                raise

        with ThreadPoolExecutor(max_workers=max(1, min(self.workers, len(spins)))) as executor:
            return list(executor.map(run, spins))

    def _flows(self, spin: SpinSize) -> Tuple[Trajectory, Trajectory]:
        q0, p0 = self.initial_canonical(spin)
        config = self.config
        trajectories = []
        for which in (FlowKind.REDUCED, FlowKind.CLASSICAL):
            engine = PhaseFlowEngine(config.params, spin, config.integrator, which)
            trajectories.append(
                engine.evolve_canonical(q0, p0, config.t_final, config.n_samples)
            )
        return trajectories[0], trajectories[1]

    def _comparison_columns(
        self, spin: SpinSize, reduced: Trajectory, classical: Trajectory
    ) -> Dict[str, RealArray]:
        return {
            "t": reduced.times,
            "jz_reduced": reduced.jz,
            "jz_classical": classical.jz,
            "jz_reduced_norm": reduced.jz / spin.j,
            "jz_classical_norm": classical.jz / spin.j,
        }

    def _write_report(self, name: str, spins: List[SpinReport]) -> ComparisonReport:
        report = ComparisonReport(
            experiment=name,
            params=self.config.params,
            t_final=self.config.t_final,
            spins=spins,
        )
        write_json(
            self.output_dir / f"{name}_report.json", report.model_dump(mode="json", by_alias=True)
        )
        return report

    def run_fig1(self) -> ComparisonReport:
        """Reduced against classical J_z(t) for each J.

        Returns:
            Report with one entry per J in ascending order.
        """

        def run(spin: SpinSize) -> SpinReport:
            reduced, classical = self._flows(spin)
            label = spin_label(spin)
            columns = self._comparison_columns(spin, reduced, classical)
            write_columns(self.output_dir / f"fig1_{label}.csv", columns)
            if self.config.emit_svg:
                write_series_svg(
                    self.output_dir / f"fig1_{label}.svg",
                    reduced.times,
                    {"reduced": columns["jz_reduced_norm"], "classical": columns["jz_classical_norm"]},
                    f"J = {spin}",
                )
            deviation = float(np.max(np.abs(reduced.jz - classical.jz))) / spin.j
            logger.info(f"fig1 J={spin}: max |Jz_reduced - Jz_classical|/J = {deviation:.3e}")
            return SpinReport(
                j=spin.j,
                two_j=spin.two_j,
                max_abs_deviation=deviation,
                energy_drift_reduced=reduced.energy_drift,
                energy_drift_classical=classical.energy_drift,
            )

        return self._write_report("fig1", self._map_spins(run, "fig1"))

    def run_exact_comparison(self) -> ComparisonReport:
        """Adds the exact spectral evolution from the coherent initial state.

        Raises:
            ExperimentConfigError: if some J exceeds the dense-propagation guard.
        """
        too_large = [s for s in self.config.sorted_spins() if s.dim > Config.MAX_EXACT_DIM]
        if too_large:
            raise ExperimentConfigError(
                f"Exact propagation limited to dimension {Config.MAX_EXACT_DIM}; "
                f"J={', '.join(str(s) for s in too_large)} is too large"
            )

        def run(spin: SpinSize) -> SpinReport:
            config = self.config
            reduced, classical = self._flows(spin)
            q0, p0 = self.initial_canonical(spin)
            exact = ExactEngine(config.params, spin).evolve(
                PhasePoint.from_canonical(q0, p0, spin), config.t_final, config.n_samples
            )
            assert exact.phi_constraint is not None and exact.states is not None

            columns = self._comparison_columns(spin, reduced, classical)
            columns = {
                "t": columns["t"],
                "jz_reduced": columns["jz_reduced"],
                "jz_classical": columns["jz_classical"],
                "jz_exact": exact.jz,
                "jz_reduced_norm": columns["jz_reduced_norm"],
                "jz_classical_norm": columns["jz_classical_norm"],
                "phi_exact": exact.phi_constraint,
            }
            label = spin_label(spin)
            write_columns(self.output_dir / f"compare_exact_{label}.csv", columns)
            if config.emit_svg:
                write_series_svg(
                    self.output_dir / f"compare_exact_{label}.svg",
                    exact.times,
                    {
                        "reduced": columns["jz_reduced_norm"],
                        "classical": columns["jz_classical_norm"],
                        "exact": exact.jz / spin.j,
                    },
                    f"J = {spin}",
                )

            in_window = exact.times <= config.window + 1e-12
            quantum_deviation = float(
                np.max(np.abs(exact.jz[in_window] - reduced.jz[in_window]))
            ) / spin.j
            ops = spin_operators(spin)
            length = np.sqrt(exact.jx**2 + exact.jy**2 + exact.jz**2)
            ratios = [dispersion_ratio(ops, psi) for psi in exact.states[length > 1e-9 * spin.j]]
            logger.info(
                f"compare-exact J={spin}: exact vs reduced over [0, {config.window}] "
                f"= {quantum_deviation:.3e}, max Phi = {float(np.max(exact.phi_constraint)):.3e}"
            )
            return SpinReport(
                j=spin.j,
                two_j=spin.two_j,
                max_abs_deviation=float(np.max(np.abs(reduced.jz - classical.jz))) / spin.j,
                quantum_deviation=quantum_deviation,
                constraint_drift=float(np.max(exact.phi_constraint)),
                max_dispersion_ratio=max(ratios) if ratios else None,
                energy_drift_reduced=reduced.energy_drift,
                energy_drift_classical=classical.energy_drift,
            )

        return self._write_report("compare_exact", self._map_spins(run, "compare-exact"))

    def run_overlap_scan(self, alpha_grid: Sequence[float], n_random: int = 0) -> float:
        """|<Omega|Omega'>| against cos^(2J)(alpha/2).

        Grid rows use two equator points alpha apart; ``n_random`` extra pairs per J
        are drawn uniformly on the sphere with the configured seed.

        Returns:
            The largest discrepancy in the table.
        """
        alphas = [float(a) for a in alpha_grid]
        for alpha in alphas:
            if not 0.0 <= alpha <= math.pi:
                raise ExperimentConfigError(f"alpha={alpha} outside [0, pi]")
        rng = np.random.default_rng(self.config.seed)

        rows: List[List[Any]] = []
        for spin in self.config.sorted_spins():
            pairs = [(PhasePoint(math.pi / 2.0, 0.0), PhasePoint(math.pi / 2.0, a)) for a in alphas]
            for _ in range(n_random):
                thetas = np.arccos(rng.uniform(-1.0, 1.0, size=2))
                phis = rng.uniform(0.0, 2.0 * math.pi, size=2)
                pairs.append(
                    (PhasePoint(float(thetas[0]), float(phis[0])), PhasePoint(float(thetas[1]), float(phis[1])))
                )
            for first, second in pairs:
                alpha = math.acos(float(np.clip(np.dot(first.direction(), second.direction()), -1.0, 1.0)))
                computed = abs(coherent_overlap(first, second, spin))
                closed = overlap_modulus_closed_form(first, second, spin)
                rows.append([str(spin), alpha, computed, closed, abs(computed - closed)])

        write_csv(
            self.output_dir / "overlap_scan.csv",
            ["j", "alpha", "overlap", "closed_form", "discrepancy"],
            rows,
        )
        worst = max((row[4] for row in rows), default=0.0)
        logger.info(f"overlap scan: {len(rows)} rows, max discrepancy {worst:.3e}")
        return float(worst)

    def run_moment_error_scan(
        self, f: MomentFunction, theta_grid: Sequence[float]
    ) -> Dict[float, float]:
        """Normalized factorization error per (J, theta) and its log-log slope in J.

        Returns:
            Fitted slope per theta; thetas where the error vanishes identically are skipped.
        """
        f = MomentFunction(f)
        spins = self.config.sorted_spins()
        rows: List[List[Any]] = []
        errors: Dict[float, List[float]] = {}
        for theta in (float(t) for t in theta_grid):
            if not 0.0 <= theta <= math.pi:
                raise ExperimentConfigError(f"theta={theta} outside [0, pi]")
            errors[theta] = []
            for spin in spins:
                error = moment_error(f, spin, theta)
                errors[theta].append(error)
                rows.append([str(spin), theta, error, moment_error_closed_form(f, spin, theta)])

        write_csv(
            self.output_dir / f"moment_error_{f.value}.csv",
            ["j", "theta", "error", "closed_form"],
            rows,
        )

        slopes: Dict[float, float] = {}
        if len(spins) < 2:
            return slopes
        js = [s.j for s in spins]
        for theta, values in errors.items():
            if min(values) <= 1e-14:
                continue
            slopes[theta] = fit_loglog_slope(js, values)
            logger.info(f"moment error {f.value} at theta={theta:.4f}: slope {slopes[theta]:.4f}")
        return slopes

    def run_identity_check(
        self, spin: SpinSize, grids: Sequence[Tuple[int, int]]
    ) -> List[float]:
        """Residual of the coherent-state resolution of identity for each grid size"""
        rows: List[List[Any]] = []
        residuals: List[float] = []
        for n_theta, n_phi in grids:
            residual = identity_resolution_residual(spin, n_theta, n_phi)
            disturbance = measurement_disturbance(math.pi / 3.0, 0.5, spin, n_theta, n_phi)
            residuals.append(residual)
            rows.append([str(spin), n_theta, n_phi, residual, disturbance])
            logger.info(f"identity J={spin} {n_theta}x{n_phi}: residual {residual:.3e}")

        write_csv(
            self.output_dir / f"identity_check_{spin_label(spin)}.csv",
            ["j", "n_theta", "n_phi", "residual", "measurement_disturbance"],
            rows,
        )
        return residuals

    def make_engine(self, name: EngineName, spin: SpinSize) -> EvolutionEngine:
        name = EngineName(name)
        config = self.config
        if name is EngineName.EXACT:
            if spin.dim > Config.MAX_EXACT_DIM:
                raise ExperimentConfigError(
                    f"Exact propagation limited to dimension {Config.MAX_EXACT_DIM}, J={spin}"
                )
            return ExactEngine(config.params, spin)
        if name is EngineName.SCHRODINGER:
            return SchrodingerFlowEngine(config.params, spin, config.integrator)
        return PhaseFlowEngine(config.params, spin, config.integrator, FlowKind(name.value))

    def run_evolve(self, engine_name: EngineName) -> List[Trajectory]:
        """Single trajectory per J with the chosen engine"""
        engine_name = EngineName(engine_name)

        def run(spin: SpinSize) -> Trajectory:
            engine = self.make_engine(engine_name, spin)
            q0, p0 = self.initial_canonical(spin)
            if isinstance(engine, PhaseFlowEngine):
                trajectory = engine.evolve_canonical(
                    q0, p0, self.config.t_final, self.config.n_samples
                )
            else:
                trajectory = engine.evolve(
                    PhasePoint.from_canonical(q0, p0, spin),
                    self.config.t_final,
                    self.config.n_samples,
                )
            columns: Dict[str, RealArray] = {
                "t": trajectory.times,
                "jx": trajectory.jx,
                "jy": trajectory.jy,
                "jz": trajectory.jz,
                "energy": trajectory.energy,
            }
            if trajectory.phi_constraint is not None:
                columns["phi"] = trajectory.phi_constraint
            write_columns(
                self.output_dir / f"evolve_{engine_name.value}_{spin_label(spin)}.csv", columns
            )
            return trajectory

        return self._map_spins(run, f"evolve {engine_name.value}")
