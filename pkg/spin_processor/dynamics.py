"""Hamilton's functions on the canonical disk and their vector fields.

The reduced function is <Omega|H|Omega> for H = eps Jz - lambda Jx + mu Jz^2; the
classical one drops the (q^2 + p^2)(4J - q^2 - p^2)/(8J) correction of <Jz^2>.
With u = q^2 + p^2 and a = u - 2J:

    H_cl  = (eps/2) a - (lambda/2) q sqrt(4J - u) + (mu/4) a^2
    H_red = H_cl + mu u (4J - u)/(8J)

In terms of the mean spin S = (<Jx>, <Jy>, <Jz>) on the sphere |S| = J the same
functions read

    H_cl  = eps Sz - lambda Sx + mu Sz^2
    H_red = H_cl + mu (J^2 - Sz^2)/(2J)

and both flows are dS/dt = grad H x S, smooth through the north pole where the
disk chart has its rim.
"""

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .coherent import check_on_disk, representative_coherent
from .exceptions import OffDiskError
from .spin_rep import HamiltonianParams, RealArray, SpinSize, StateVector

logger = logging.getLogger(__name__)


class FlowKind(str, Enum):
    REDUCED = "reduced"
    CLASSICAL = "classical"


def effective_mu(which: FlowKind, params: HamiltonianParams, j: SpinSize) -> float:
    """Coefficient of Sz^2 in the flow; the reduced correction shifts mu by mu/(2J)"""
    if FlowKind(which) is FlowKind.REDUCED:
        return params.mu * (1.0 - 1.0 / (2.0 * j.j))
    return params.mu


def quantum_correction(q: float, p: float, params: HamiltonianParams, j: SpinSize) -> float:
    """mu (q^2 + p^2)(4J - q^2 - p^2)/(8J), in [0, mu J/2] for mu >= 0"""
    u = check_on_disk(q, p, j)
    return params.mu * u * (4.0 * j.j - u) / (8.0 * j.j)


def classical_hamiltonian(q: float, p: float, params: HamiltonianParams, j: SpinSize) -> float:
    u = check_on_disk(q, p, j)
    a = u - 2.0 * j.j
    return (
        params.epsilon / 2.0 * a
        - params.lambda_ * q / 2.0 * math.sqrt(4.0 * j.j - u)
        + params.mu / 4.0 * a * a
    )


def reduced_hamiltonian(q: float, p: float, params: HamiltonianParams, j: SpinSize) -> float:
    return classical_hamiltonian(q, p, params, j) + quantum_correction(q, p, params, j)


def flow_rhs(
    which: FlowKind,
    q: float,
    p: float,
    params: HamiltonianParams,
    j: SpinSize,
    margin: Optional[float] = None,
) -> Tuple[float, float]:
    """(dq/dt, dp/dt) = (dH/dp, -dH/dq).

    Raises:
        OffDiskError: within ``margin`` (default 1e-9 J) of the rim, where the
            square-root term has a singular derivative.
    """
    margin = 1e-9 * j.j if margin is None else margin
    u = q * q + p * p
    rim = 4.0 * j.j
    if not math.isfinite(u) or u >= rim - margin:
        raise OffDiskError(
            f"(q, p) = ({q}, {p}) is within {margin:.1e} of the rim: q^2 + p^2 = {u}, 4J = {rim}"
        )

    root = math.sqrt(rim - u)
    a = u - 2.0 * j.j
    quartic = effective_mu(which, params, j) * a

    dh_dp = params.epsilon * p + params.lambda_ * q * p / (2.0 * root) + quartic * p
    dh_dq = params.epsilon * q - params.lambda_ / 2.0 * (root - q * q / root) + quartic * q
    return dh_dp, -dh_dq


def spin_hamiltonian(
    which: FlowKind, s: RealArray, params: HamiltonianParams, j: SpinSize
) -> RealArray:
    """H_cl or H_red at mean spin vectors s of shape (3,) or (n, 3), |s| = J"""
    sx = s[..., 0]
    sz = s[..., 2]
    value = params.epsilon * sz - params.lambda_ * sx + params.mu * sz * sz
    if FlowKind(which) is FlowKind.REDUCED:
        value = value + params.mu * (j.j * j.j - sz * sz) / (2.0 * j.j)
    return np.asarray(value, dtype=float)


def spin_flow_rhs(
    which: FlowKind, s: RealArray, params: HamiltonianParams, j: SpinSize
) -> RealArray:
    """dS/dt = grad H x S; agrees with flow_rhs through the canonical chart"""
    gz = params.epsilon + 2.0 * effective_mu(which, params, j) * s[2]
    grad = np.array([-params.lambda_, 0.0, gz])
    return np.cross(grad, s)


def total_hamiltonian_value(psi: StateVector, params: HamiltonianParams, j: SpinSize) -> float:
    """H_tot(X) = H(Omega_X): the reduced Hamiltonian at psi's coherent representative"""
    point, _ = representative_coherent(psi, j)
    q, p = point.canonical(j)
    return reduced_hamiltonian(q, p, params, j)
