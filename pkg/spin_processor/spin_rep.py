"""Exact spin-J representation: operators, states, expectations and the real-coordinate view.

States are complex vectors in the Jz eigenbasis ordered m = J, J-1, ..., -J, with
hbar = 1. The real view of a state uses x_i = sqrt(2) Re c_i, y_i = sqrt(2) Im c_i,
laid out as (x_1, ..., x_n, y_1, ..., y_n), so a normalized state has sum(x^2 + y^2) = 2.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from .config import Config
from .exceptions import (
    DimensionMismatchError,
    NonHermitianError,
    NormalizationError,
    UndefinedRepresentativeError,
)

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
# normalized complex d-vector, see module docstring for the basis order
StateVector = ComplexArray


@dataclass(frozen=True)
class SpinSize:
    """Spin size J, stored exactly as the integer 2J"""

    two_j: int

    def __post_init__(self) -> None:
        if isinstance(self.two_j, bool) or not isinstance(self.two_j, (int, np.integer)):
            raise ValueError(f"two_j must be an integer, got {self.two_j!r}")
        if self.two_j < 1:
            raise ValueError(f"two_j must be >= 1, got {self.two_j}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def magnetic_numbers(self) -> RealArray:
        """m = J, J-1, ..., -J"""
        return self.j - np.arange(self.dim, dtype=float)

    def __str__(self) -> str:
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


def spin_size(value: str | float | int | Fraction) -> SpinSize:
    """Parse a spin size given as ``5``, ``2.5``, ``"5/2"`` or a Fraction.

    Raises:
        ValueError: if the value is not a positive half-integer.
    """
    try:
        fraction = Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Cannot parse spin size {value!r}: {e}") from e

    doubled = 2 * fraction
    if doubled.denominator != 1:
        raise ValueError(f"Spin size {value!r} is not a half-integer")
    return SpinSize(int(doubled))


class HamiltonianParams(BaseModel):
    """Couplings of H = eps Jz - lambda Jx + mu Jz^2"""

    model_config = ConfigDict(frozen=True, populate_by_name=True, allow_inf_nan=False)

    epsilon: float = 0.0
    lambda_: float = Field(default=1.0, alias="lambda")
    mu: float = 1.0


@dataclass(frozen=True)
class SpinOperators:
    """Dense Jx, Jy, Jz and the ladder operators of one spin size"""

    spin: SpinSize
    jx: ComplexArray
    jy: ComplexArray
    jz: ComplexArray
    jplus: ComplexArray
    jminus: ComplexArray

    def __post_init__(self) -> None:
        for matrix in (self.jx, self.jy, self.jz, self.jplus, self.jminus):
            matrix.setflags(write=False)

    @property
    def components(self) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
        return self.jx, self.jy, self.jz

    def casimir(self) -> ComplexArray:
        return self.jx @ self.jx + self.jy @ self.jy + self.jz @ self.jz


def build_spin_operators(j: SpinSize) -> SpinOperators:
    """Build Jx, Jy, Jz from the ladder operators.

    <m+1|J+|m> = sqrt(J(J+1) - m(m+1)); with the descending basis J+ sits on the
    first superdiagonal.
    """
    m = j.magnetic_numbers()
    jj = j.j * (j.j + 1)
    # column k+1 holds m_{k+1}, raised into row k
    raising = np.sqrt(np.clip(jj - m[1:] * (m[1:] + 1), 0.0, None))

    jplus = np.diag(raising, 1).astype(np.complex128)
    jminus = jplus.T.copy()
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(np.complex128)

    logger.debug(f"Built spin operators for J={j} (dim {j.dim})")
    return SpinOperators(spin=j, jx=jx, jy=jy, jz=jz, jplus=jplus, jminus=jminus)


def hermiticity_residual(op: ComplexArray) -> float:
    return float(np.max(np.abs(op - op.conj().T))) if op.size else 0.0


def _check_operator(op: ComplexArray, psi: ComplexArray, hermitian_tol: float) -> None:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionMismatchError(f"Operator must be square, got shape {op.shape}")
    if psi.ndim != 1 or psi.shape[0] != op.shape[0]:
        raise DimensionMismatchError(
            f"State of shape {psi.shape} does not match operator of shape {op.shape}"
        )
    residual = hermiticity_residual(op)
    if residual > hermitian_tol:
        raise NonHermitianError(f"Operator is not Hermitian (residual {residual:.3e})")


def check_normalized(psi: ComplexArray, tol: Optional[float] = None) -> None:
    tol = Config.NORM_TOL if tol is None else tol
    norm_sq = float(np.vdot(psi, psi).real)
    if abs(norm_sq - 1.0) > tol:
        raise NormalizationError(f"State is not normalized (<psi|psi> = {norm_sq:.12g})")


def expectation(
    op: ComplexArray, psi: StateVector, hermitian_tol: Optional[float] = None
) -> float:
    """<psi|A|psi> as a real number.

    The quadratic form is evaluated as given, without renormalizing psi.
    """
    hermitian_tol = Config.HERMITIAN_TOL if hermitian_tol is None else hermitian_tol
    _check_operator(op, psi, hermitian_tol)

    image = op @ psi
    value = np.vdot(psi, image)
    scale = max(1.0, float(np.linalg.norm(image) * np.linalg.norm(psi)))
    if abs(value.imag) > 1e-12 * scale:
        raise NonHermitianError(
            f"Expectation has imaginary part {value.imag:.3e}; operator is not Hermitian"
        )
    return float(value.real)


def variance(op: ComplexArray, psi: StateVector, hermitian_tol: Optional[float] = None) -> float:
    """<A^2> - <A>^2, clamped at zero"""
    mean = expectation(op, psi, hermitian_tol)
    # <A^2> = |A psi|^2 for Hermitian A
    second = float(np.linalg.norm(op @ psi) ** 2)
    return max(second - mean * mean, 0.0)


def total_fluctuation(ops: SpinOperators, psi: StateVector) -> float:
    return sum(variance(component, psi) for component in ops.components)


def expectation_vector(ops: SpinOperators, psi: StateVector) -> RealArray:
    """(<Jx>, <Jy>, <Jz>)"""
    return np.array([expectation(component, psi) for component in ops.components])


def dispersion_ratio(ops: SpinOperators, psi: StateVector) -> float:
    """sqrt(total fluctuation) / |<J>|; equals 1/sqrt(J) on coherent states"""
    length = float(np.linalg.norm(expectation_vector(ops, psi)))
    if length <= 1e-9 * ops.spin.j:
        raise UndefinedRepresentativeError(
            f"Dispersion ratio undefined: |<J>| = {length:.3e} for J={ops.spin}"
        )
    return float(np.sqrt(total_fluctuation(ops, psi)) / length)


def build_hamiltonian(params: HamiltonianParams, ops: SpinOperators) -> ComplexArray:
    return params.epsilon * ops.jz - params.lambda_ * ops.jx + params.mu * (ops.jz @ ops.jz)


def to_real_coords(psi: StateVector) -> RealArray:
    return np.sqrt(2.0) * np.concatenate([psi.real, psi.imag])


def from_real_coords(
    v: RealArray, renormalize: bool = False, tol: Optional[float] = None
) -> StateVector:
    """Inverse of to_real_coords.

    Args:
        v: Real vector (x_1..x_n, y_1..y_n).
        renormalize: Rescale v onto sum(x^2 + y^2) = 2 instead of rejecting it.
        tol: Allowed deviation of sum(x^2 + y^2) from 2 (default Config.NORM_TOL).

    Returns:
        The complex state c = (x + iy) / sqrt(2).
    """
    tol = Config.NORM_TOL if tol is None else tol
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size % 2:
        raise DimensionMismatchError(f"Real coordinates must have even length, got {v.shape}")

    total = float(np.dot(v, v))
    if abs(total - 2.0) > tol:
        if not renormalize:
            raise NormalizationError(f"sum(x^2 + y^2) = {total:.12g}, expected 2")
        if total == 0.0:
            raise NormalizationError("Cannot renormalize the zero vector")
        v = v * np.sqrt(2.0 / total)

    n = v.size // 2
    return (v[:n] + 1j * v[n:]) / np.sqrt(2.0)


def expectation_gradient(
    op: ComplexArray, psi: StateVector, hermitian_tol: Optional[float] = None
) -> RealArray:
    """Gradient of F(x, y) = <psi|A|psi> in the real coordinates.

    dF/dx_i = sqrt(2) Re (A psi)_i,  dF/dy_i = sqrt(2) Im (A psi)_i.
    """
    hermitian_tol = Config.HERMITIAN_TOL if hermitian_tol is None else hermitian_tol
    _check_operator(op, psi, hermitian_tol)
    return to_real_coords(op @ psi)


def poisson_bracket_M(opA: ComplexArray, opB: ComplexArray, psi: StateVector) -> float:
    """{<A>, <B>} on the real manifold; equals <[A, B]>/i"""
    grad_a = expectation_gradient(opA, psi)
    grad_b = expectation_gradient(opB, psi)
    n = psi.shape[0]
    return float(np.dot(grad_a[:n], grad_b[n:]) - np.dot(grad_b[:n], grad_a[n:]))


def random_state(j: SpinSize, rng: np.random.Generator) -> StateVector:
    """Normalized complex Gaussian state"""
    psi = rng.normal(size=j.dim) + 1j * rng.normal(size=j.dim)
    return psi / np.linalg.norm(psi)


def basis_state(j: SpinSize, m: float) -> StateVector:
    """|J, m>"""
    index = round(j.j - m)
    if not 0 <= index < j.dim or abs((j.j - m) - index) > 1e-12:
        raise ValueError(f"m={m} is not a magnetic number of J={j}")
    psi = np.zeros(j.dim, dtype=np.complex128)
    psi[index] = 1.0
    return psi


@lru_cache(maxsize=64)
def spin_operators(j: SpinSize) -> SpinOperators:
    """Cached build_spin_operators; the returned matrices are read-only"""
    return build_spin_operators(j)
