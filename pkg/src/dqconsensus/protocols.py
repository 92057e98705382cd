"""Consensus and formation control laws.

Every law is evaluated per agent from its own state and the outputs its
in-neighbors broadcast. Outputs are shared as 6-vectors (``vec6`` of a log),
neighbor lists are ``(a_ij, y_j)`` pairs and the gain of each term is the
edge weight.

Logs are always taken of the shortest-arc representative. When an agent's
opinion on the formation center has negative scalar part the law is applied
to ``-x_c`` and the sign is carried back, so the returned input is the
derivative of the pose actually held by the agent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    DualQuaternion,
    PureDualQuaternion,
    UnitDualQuaternion,
    dq_mul,
    hamilton_minus8,
    log_unit_coeffs,
    _dq_conj,
)
from .kinematics import SerialArm, jw_pinv, whole_body_fk, whole_body_jacobian
from .logmap import q8

PURITY_TOL = 1e-6
RANGE_TOL = 1e-8

POSE_DERIVATIVE = "pose-derivative"
TWIST = "twist"
JOINT_VELOCITY = "joint-velocity"

_IDENTITY8 = np.array([1.0, 0, 0, 0, 0, 0, 0, 0])


class ProtocolConsistencyError(ArithmeticError):
    """A twist computed from a pose derivative came out non-pure."""


class RangeDeficiencyWarning(RuntimeWarning):
    """The requested end-effector motion is not in the range of ``J_w``."""


@dataclass(frozen=True)
class ControlInput:
    kind: str
    value: np.ndarray
    residual: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.value))


Neighbors = Iterable[tuple[float, object]]


def _vec6(y) -> np.ndarray:
    if isinstance(y, PureDualQuaternion):
        return y.vec6()
    if isinstance(y, DualQuaternion):
        raise TypeError("neighbor outputs must be pure dual quaternions")
    return np.asarray(y, dtype=np.float64).reshape(6)


def _c8(x) -> np.ndarray:
    if isinstance(x, DualQuaternion):
        return x.vec8()
    return np.asarray(x, dtype=np.float64).reshape(8)


def disagreement_sum(y_i, neighbors: Neighbors) -> np.ndarray:
    """``sum_j a_ij (y_i - y_j)`` as a 6-vector."""
    yi = _vec6(y_i)
    s = np.zeros(6)
    for a, yj in neighbors:
        if a < 0:
            raise ValueError(f"negative edge weight {a}")
        s += a * (yi - _vec6(yj))
    return s


def output_consensus_input(y_i, neighbors: Neighbors) -> PureDualQuaternion:
    return PureDualQuaternion(-disagreement_sum(y_i, neighbors))


def output_consensus_inputs(lap: np.ndarray, y: np.ndarray) -> np.ndarray:
    """All agents at once: row ``i`` of ``-L Y``."""
    return -np.asarray(lap) @ np.asarray(y)


def formation_output(x_i, delta_i=None) -> np.ndarray:
    """``vec6(log(x_i delta_i*))``, the agent's opinion on the formation center."""
    xc = _c8(x_i) if delta_i is None else dq_mul(_c8(x_i), _dq_conj(_c8(delta_i)))
    return log_unit_coeffs(xc)


def _formation_derivative(x, delta, delta_dot, s) -> np.ndarray:
    xc = dq_mul(x, _dq_conj(delta))
    sign = -1.0 if xc[0] < 0.0 else 1.0
    u = -sign * hamilton_minus8(delta) @ (q8(sign * xc) @ s)
    if delta_dot is not None:
        u -= dq_mul(dq_mul(x, _dq_conj(delta_dot)), delta)
    return u


def _to_twist(u, x) -> np.ndarray:
    xi = 2.0 * dq_mul(u, _dq_conj(x))
    impurity = max(abs(xi[0]), abs(xi[4]))
    if impurity > PURITY_TOL:
        raise ProtocolConsistencyError(f"twist real parts reach {impurity:.3e}")
    xi[0] = xi[4] = 0.0
    return xi


def formation_input(x_i, delta_i, neighbors: Neighbors) -> ControlInput:
    """Pose derivative driving ``x_i delta_i*`` toward the neighbors' opinions."""
    x, d = _c8(x_i), _c8(delta_i)
    s = disagreement_sum(formation_output(x, d), neighbors)
    return ControlInput(POSE_DERIVATIVE, _formation_derivative(x, d, None, s))


def pose_consensus_input(x_i, neighbors: Neighbors) -> ControlInput:
    return formation_input(x_i, _IDENTITY8, neighbors)


def twist_formation_input(x_i, delta_i, neighbors: Neighbors) -> ControlInput:
    """Same closed loop as :func:`formation_input`, expressed as a twist ``xi = 2 u x*``."""
    x = _c8(x_i)
    u = formation_input(x, delta_i, neighbors).value
    return ControlInput(TWIST, _to_twist(u, x))


def twist_consensus_input(x_i, neighbors: Neighbors) -> ControlInput:
    return twist_formation_input(x_i, _IDENTITY8, neighbors)


def time_varying_formation_input(x_i, delta_i, delta_dot_i, neighbors: Neighbors) -> ControlInput:
    """Formation law plus the feed-forward ``-x delta_dot* delta`` for a moving offset."""
    x, d = _c8(x_i), _c8(delta_i)
    s = disagreement_sum(formation_output(x, d), neighbors)
    return ControlInput(POSE_DERIVATIVE, _formation_derivative(x, d, _c8(delta_dot_i), s))


def manipulator_formation_input(q_i: Sequence[float], model: SerialArm, delta_i,
                                neighbors: Neighbors, tol: float = RANGE_TOL,
                                delta_dot_i=None) -> ControlInput:
    """Joint velocities ``J_w^+ u_x`` realizing the formation law at the end effector.

    ``q_i`` stacks the base coordinates ``(x, y, phi)`` and the arm joints.
    The range residual ``|J J^+ u - u|`` is returned with the input and a
    :class:`RangeDeficiencyWarning` is issued when it exceeds ``tol``.
    """
    q = np.asarray(q_i, dtype=np.float64).reshape(-1)
    if q.shape[0] != 3 + model.dof:
        raise ValueError(f"expected {3 + model.dof} coordinates, got {q.shape[0]}")
    q_b, q_m = q[:3], q[3:]
    x = whole_body_fk(q_b, model, q_m).vec8()
    d = _c8(delta_i)
    s = disagreement_sum(formation_output(x, d), neighbors)
    dd = None if delta_dot_i is None else _c8(delta_dot_i)
    u = _formation_derivative(x, d, dd, s)
    j = whole_body_jacobian(q_b, model, q_m).full
    q_dot, residual = joint_rates(j, u)
    if residual > tol:
        warnings.warn(f"end-effector input outside the range of J_w, residual {residual:.3e}",
                      RangeDeficiencyWarning, stacklevel=2)
    return ControlInput(JOINT_VELOCITY, q_dot, residual)


def joint_rates(j: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, float]:
    """``J^+ u`` and the range residual ``|J J^+ u - u|``."""
    q_dot = jw_pinv(j) @ u
    return q_dot, float(np.linalg.norm(j @ q_dot - u))


def is_tangent(u, x, tol: float = 1e-9) -> bool:
    """Whether ``u`` is a valid pose derivative at ``x`` (``2 u x*`` pure)."""
    xi = 2.0 * dq_mul(_c8(u), _dq_conj(_c8(x)))
    return max(abs(xi[0]), abs(xi[4])) <= tol


__all__ = [
    "ControlInput", "ProtocolConsistencyError", "RangeDeficiencyWarning",
    "POSE_DERIVATIVE", "TWIST", "JOINT_VELOCITY",
    "disagreement_sum", "output_consensus_input", "output_consensus_inputs",
    "formation_output", "formation_input", "pose_consensus_input",
    "twist_formation_input", "twist_consensus_input",
    "time_varying_formation_input", "manipulator_formation_input",
    "joint_rates", "is_tangent",
]
