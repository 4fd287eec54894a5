"""SU(2) coherent states, charts on the sphere and the coarse-graining into equivalence classes.

Charts:
    spherical  (theta, phi), n = (sin t cos f, sin t sin f, cos t)
    canonical  q = sqrt(2J(1 + cos t)) cos f,  p = -sqrt(2J(1 + cos t)) sin f
    stereographic  z = -tan(t/2) exp(-i f)

The canonical chart maps the sphere onto the disk q^2 + p^2 <= 4J with the south
pole at the origin and the north pole on the rim. In it
    <Jx> = (q/2) sqrt(4J - q^2 - p^2)
    <Jy> = -(p/2) sqrt(4J - q^2 - p^2)
    <Jz> = (q^2 + p^2 - 2J)/2
hold on coherent states, and {Jx, Jy} = Jz for the bracket dF/dq dG/dp - dF/dp dG/dq.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import comb

from .exceptions import OffDiskError, PoleError, UndefinedRepresentativeError
from .spin_rep import (
    ComplexArray,
    RealArray,
    SpinSize,
    StateVector,
    check_normalized,
    expectation_vector,
    spin_operators,
    total_fluctuation,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# relative slack on the rim q^2 + p^2 = 4J
DISK_SLACK = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """A point of the sphere, theta in [0, pi], phi in [0, 2 pi)"""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError(f"Non-finite phase point ({self.theta}, {self.phi})")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", float(self.phi % TWO_PI))

    @classmethod
    def from_canonical(cls, q: float, p: float, j: SpinSize) -> "PhasePoint":
        return cls(*canonical_to_sphere(q, p, j))

    @classmethod
    def from_direction(cls, direction: RealArray) -> "PhasePoint":
        x, y, z = (float(c) for c in direction / np.linalg.norm(direction))
        return cls(math.acos(min(1.0, max(-1.0, z))), math.atan2(y, x))

    def direction(self) -> RealArray:
        """Unit vector n"""
        s = math.sin(self.theta)
        return np.array([s * math.cos(self.phi), s * math.sin(self.phi), math.cos(self.theta)])

    def canonical(self, j: SpinSize) -> Tuple[float, float]:
        return sphere_to_canonical(self.theta, self.phi, j)

    def stereographic(self) -> complex:
        return stereographic(self.theta, self.phi)


@dataclass(frozen=True)
class EquivalenceWitness:
    """<J>_psi = kappa * J * direction"""

    direction: RealArray
    kappa: float

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        self.direction.setflags(write=False)


def _coherent_amplitudes(j: SpinSize, theta: RealArray, phi: RealArray) -> ComplexArray:
    """Rows of coherent-state amplitudes, one per (theta, phi) pair.

    c_m = sqrt(C(2J, J+m)) cos(t/2)^(J+m) (sin(t/2) e^(i f))^(J-m); with k = J - m the
    exponents are the integers 2J - k and k.
    """
    k = np.arange(j.dim)
    cos_half = np.cos(np.asarray(theta, dtype=float) / 2)[:, None]
    sin_half = np.sin(np.asarray(theta, dtype=float) / 2)[:, None]
    magnitude = np.sqrt(comb(j.two_j, k)) * cos_half ** (j.two_j - k) * sin_half**k
    phase = np.exp(1j * np.asarray(phi, dtype=float)[:, None] * k)
    return magnitude * phase


def coherent_state(j: SpinSize, theta: float, phi: float) -> StateVector:
    """|Omega(theta, phi)>, the top eigenvector of n.J with eigenvalue J.

    The m = J amplitude is real and non-negative.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta={theta} outside [0, pi]")
    psi = _coherent_amplitudes(j, np.array([theta]), np.array([phi]))[0]
    return psi / np.linalg.norm(psi)


def coherent_state_at(point: PhasePoint, j: SpinSize) -> StateVector:
    return coherent_state(j, point.theta, point.phi)


def coherent_overlap(omega1: PhasePoint, omega2: PhasePoint, j: SpinSize) -> complex:
    """<Omega1|Omega2>"""
    return complex(np.vdot(coherent_state_at(omega1, j), coherent_state_at(omega2, j)))


def overlap_modulus_closed_form(omega1: PhasePoint, omega2: PhasePoint, j: SpinSize) -> float:
    """cos(alpha/2)^(2J) with alpha the angle between the two directions"""
    cos_alpha = float(np.clip(np.dot(omega1.direction(), omega2.direction()), -1.0, 1.0))
    return math.sqrt((1.0 + cos_alpha) / 2.0) ** j.two_j


def sphere_to_canonical(theta: float, phi: float, j: SpinSize) -> Tuple[float, float]:
    radius = math.sqrt(max(0.0, 2.0 * j.j * (1.0 + math.cos(theta))))
    return radius * math.cos(phi), -radius * math.sin(phi)


def check_on_disk(q: float, p: float, j: SpinSize) -> float:
    u = q * q + p * p
    if not math.isfinite(u) or u > 4.0 * j.j * (1.0 + DISK_SLACK):
        raise OffDiskError(f"(q, p) = ({q}, {p}) is off the disk: q^2 + p^2 = {u} > 4J = {4 * j.j}")
    return min(u, 4.0 * j.j)


def canonical_to_sphere(q: float, p: float, j: SpinSize) -> Tuple[float, float]:
    u = check_on_disk(q, p, j)
    cos_theta = min(1.0, max(-1.0, u / (2.0 * j.j) - 1.0))
    phi = math.atan2(-p, q) % TWO_PI if u > 0.0 else 0.0
    return math.acos(cos_theta), phi


def canonical_spin_vector(q: float, p: float, j: SpinSize) -> Tuple[float, float, float]:
    """(<Jx>, <Jy>, <Jz>) of the coherent state at (q, p)"""
    u = check_on_disk(q, p, j)
    root = math.sqrt(4.0 * j.j - u)
    return q / 2.0 * root, -p / 2.0 * root, (u - 2.0 * j.j) / 2.0


def stereographic(theta: float, phi: float) -> complex:
    """z = -tan(theta/2) exp(-i phi); singular at theta = pi.

    Kept for reference only; the canonical chart above is the one the dynamics uses.
    """
    if math.isclose(theta, math.pi, rel_tol=0.0, abs_tol=1e-12):
        raise PoleError(f"Stereographic chart is singular at theta={theta}")
    return -math.tan(theta / 2.0) * complex(math.cos(phi), -math.sin(phi))


def jz2_expectation_canonical(q: float, p: float, j: SpinSize) -> float:
    """<Jz^2> = <Jz>^2 + (q^2 + p^2)(4J - q^2 - p^2)/(8J) on the coherent state at (q, p)"""
    u = check_on_disk(q, p, j)
    jz = (u - 2.0 * j.j) / 2.0
    return jz * jz + u * (4.0 * j.j - u) / (8.0 * j.j)


def representative_coherent(
    psi: StateVector, j: SpinSize, tol: Optional[float] = None
) -> Tuple[PhasePoint, EquivalenceWitness]:
    """The unique coherent state of psi's equivalence class.

    Two states are equivalent when their <J> vectors are positive multiples of each
    other; the representative has <J> = J * <J>_psi / |<J>_psi|.

    Raises:
        UndefinedRepresentativeError: if |<J>_psi| <= tol (default 1e-9 J).
    """
    tol = 1e-9 * j.j if tol is None else tol
    mean = expectation_vector(spin_operators(j), psi)
    length = float(np.linalg.norm(mean))
    if length <= tol:
        raise UndefinedRepresentativeError(
            f"<J> = {mean.tolist()} has length {length:.3e}; no coherent representative"
        )

    direction = mean / length
    witness = EquivalenceWitness(direction=direction, kappa=length / j.j)
    return PhasePoint.from_direction(direction), witness


def constraint_phi(psi: StateVector, j: SpinSize) -> float:
    """Total fluctuation minus J; zero exactly on coherent states"""
    check_normalized(psi)
    value = total_fluctuation(spin_operators(j), psi) - j.j
    # the minimum is J, anything below is roundoff
    return max(value, 0.0)


def sphere_quadrature(n_theta: int, n_phi: int) -> Tuple[RealArray, RealArray, RealArray]:
    """Gauss-Legendre in cos(theta) times the periodic trapezoid rule in phi.

    Returns:
        Flattened theta, phi and weights; the weights sum to 4 pi.
    """
    if n_theta < 2 or n_phi < 2:
        raise ValueError(f"Quadrature sizes must be >= 2, got {n_theta}x{n_phi}")
    x, weights = np.polynomial.legendre.leggauss(n_theta)
    phis = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    theta, phi = np.meshgrid(np.arccos(x), phis, indexing="ij")
    weight = np.repeat(weights, n_phi) * (TWO_PI / n_phi)
    return theta.ravel(), phi.ravel(), weight


def coherent_projector_integral(j: SpinSize, n_theta: int, n_phi: int) -> ComplexArray:
    """(2J+1)/(4 pi) * integral of |Omega><Omega| dOmega by quadrature"""
    theta, phi, weight = sphere_quadrature(n_theta, n_phi)
    amplitudes = _coherent_amplitudes(j, theta, phi)
    logger.debug(f"Coherent projector integral for J={j} on {n_theta}x{n_phi} nodes")
    return (j.dim / (4.0 * math.pi)) * (amplitudes.T * weight) @ amplitudes.conj()


def identity_resolution_residual(j: SpinSize, n_theta: int, n_phi: int) -> float:
    """max |(2J+1)/(4 pi) * integral |Omega><Omega| dOmega - 1|"""
    integral = coherent_projector_integral(j, n_theta, n_phi)
    return float(np.max(np.abs(integral - np.eye(j.dim))))


def husimi_q(psi: StateVector, j: SpinSize, thetas: RealArray, phis: RealArray) -> RealArray:
    """Q(theta, phi) = |<Omega(theta, phi)|psi>|^2 on the grid thetas x phis"""
    theta, phi = np.meshgrid(np.asarray(thetas), np.asarray(phis), indexing="ij")
    amplitudes = _coherent_amplitudes(j, theta.ravel(), phi.ravel())
    return np.abs(amplitudes.conj() @ psi).reshape(theta.shape) ** 2


def measurement_disturbance(
    theta: float, phi: float, j: SpinSize, n_theta: int, n_phi: int
) -> float:
    """1 - fidelity between |Omega> and its image under the coherent-state measurement.

    The measured state is (2J+1)/(4 pi) * sum_k w_k |Omega_k><Omega_k|Omega>, normalized.
    """
    omega = coherent_state(j, theta, phi)
    measured = coherent_projector_integral(j, n_theta, n_phi) @ omega
    norm_sq = float(np.vdot(measured, measured).real)
    if norm_sq == 0.0:
        return 1.0
    return max(0.0, 1.0 - abs(np.vdot(omega, measured)) ** 2 / norm_sq)
