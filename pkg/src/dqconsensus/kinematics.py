"""Holonomic mobile manipulator kinematics with dual quaternions.

The end effector pose is ``x_e = x_b x_m x_a``: planar base pose, constant
mount transform from the base to the arm's first joint frame, and the arm's
own forward kinematics (optionally followed by a constant tool transform).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    UnitDualQuaternion,
    dq_mul,
    hamilton_minus8,
    hamilton_plus8,
    _dq_conj,
)

PINV_RCOND = 1e-8
_K_HAT = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0])


def base_pose(q_b) -> UnitDualQuaternion:
    """Pose of a base at ``(x, y)`` with heading ``phi`` about the vertical axis."""
    x, y, phi = (float(v) for v in q_b)
    c, s = math.cos(0.5 * phi), math.sin(0.5 * phi)
    return UnitDualQuaternion([c, 0.0, 0.0, s,
                               0.0, 0.5 * (x * c + y * s), 0.5 * (y * c - x * s), 0.0])


def base_jacobian(q_b) -> np.ndarray:
    """d vec8(base_pose) / d(x, y, phi)."""
    x, y, phi = (float(v) for v in q_b)
    c, s = math.cos(0.5 * phi), math.sin(0.5 * phi)
    j = np.zeros((8, 3))
    j[5, 0], j[6, 0] = 0.5 * c, -0.5 * s
    j[5, 1], j[6, 1] = 0.5 * s, 0.5 * c
    j[0, 2], j[3, 2] = -0.5 * s, 0.5 * c
    j[5, 2] = 0.25 * (-x * s + y * c)
    j[6, 2] = 0.25 * (-y * s - x * c)
    return j


def dh_link(theta: float, d: float, a: float, alpha: float) -> np.ndarray:
    """``Rz(theta) Tz(d) Tx(a) Rx(alpha)`` as vec8 coefficients."""
    ct, st = math.cos(0.5 * theta), math.sin(0.5 * theta)
    ca, sa = math.cos(0.5 * alpha), math.sin(0.5 * alpha)
    rz = np.array([ct, 0.0, 0.0, st, 0.0, 0.0, 0.0, 0.0])
    trans = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.5 * a, 0.0, 0.5 * d])
    rx = np.array([ca, sa, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    return dq_mul(dq_mul(rz, trans), rx)


@dataclass(frozen=True)
class SerialArm:
    """Revolute-only arm in standard DH form.

    Each row of ``dh`` is ``(theta_offset, d, a, alpha)``. ``mount`` places
    the first joint frame on the base; ``tool`` is appended after the last
    link.
    """

    dh: np.ndarray
    mount: UnitDualQuaternion = field(default_factory=UnitDualQuaternion)
    tool: UnitDualQuaternion = field(default_factory=UnitDualQuaternion)

    def __post_init__(self):
        dh = np.array(self.dh, dtype=np.float64)
        if dh.ndim != 2 or dh.shape[1] != 4 or dh.shape[0] == 0:
            raise ValueError(f"dh table must have shape (joints, 4), got {dh.shape}")
        if not np.all(np.isfinite(dh)):
            raise ValueError("dh table has non-finite entries")
        dh.setflags(write=False)
        object.__setattr__(self, "dh", dh)
        for name in ("mount", "tool"):
            value = getattr(self, name)
            if not isinstance(value, UnitDualQuaternion):
                object.__setattr__(self, name, UnitDualQuaternion(value))

    @property
    def dof(self) -> int:
        return self.dh.shape[0]

    def to_dict(self) -> dict:
        return {"dh": self.dh.tolist(), "mount": self.mount.vec8().tolist(),
                "tool": self.tool.vec8().tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SerialArm":
        if "dh" not in data:
            raise ValueError("arm model needs a 'dh' table")
        ident = UnitDualQuaternion()
        return cls(np.asarray(data["dh"], dtype=np.float64),
                   UnitDualQuaternion(data.get("mount", ident.vec8())),
                   UnitDualQuaternion(data.get("tool", ident.vec8())))


def youbot_like_model() -> SerialArm:
    """A 5-joint arm with youBot-sized links.

    Joints 2-4 pitch in a common plane, joint 1 yaws and joint 5 rolls the
    gripper. The tool frame's x axis is the approach direction. The
    all-zero configuration points the arm straight up, which is singular.
    """
    half_pi = 0.5 * math.pi
    dh = [
        [0.0, 0.147, 0.033, half_pi],
        [half_pi, 0.0, 0.155, 0.0],
        [0.0, 0.0, 0.135, 0.0],
        [half_pi, 0.0, 0.0, half_pi],
        [0.0, 0.218, 0.0, 0.0],
    ]
    mount = UnitDualQuaternion([1.0, 0.0, 0.0, 0.0, 0.0, 0.0715, 0.0, 0.023])
    # rotate -pi/2 about y so the tool x axis lies along the last joint axis
    c = math.cos(-0.25 * math.pi)
    tool = UnitDualQuaternion([c, 0.0, -c, 0.0, 0.0, 0.0, 0.0, 0.0])
    return SerialArm(np.array(dh), mount, tool)


def _arm_chain(model: SerialArm, q_m) -> list[np.ndarray]:
    """Partial products ``P_0 = 1, P_k = L_1 ... L_k`` (tool excluded)."""
    q_m = np.asarray(q_m, dtype=np.float64).reshape(-1)
    if q_m.shape != (model.dof,):
        raise ValueError(f"expected {model.dof} joint values, got {q_m.shape[0]}")
    chain = [np.array([1.0, 0, 0, 0, 0, 0, 0, 0])]
    for (off, d, a, alpha), th in zip(model.dh, q_m):
        chain.append(dq_mul(chain[-1], dh_link(th + off, d, a, alpha)))
    return chain


def arm_fk(model: SerialArm, q_m) -> UnitDualQuaternion:
    """Tool pose relative to the arm's first joint frame."""
    chain = _arm_chain(model, q_m)
    return UnitDualQuaternion(dq_mul(chain[-1], model.tool.vec8()))


def arm_jacobian(model: SerialArm, q_m) -> np.ndarray:
    """d vec8(arm_fk) / d q_m.

    Joint ``k`` rotates everything after it about its own z axis, so its
    column is ``(1/2) w_k x`` with ``w_k = P_(k-1) k P_(k-1)*``.
    """
    chain = _arm_chain(model, q_m)
    return _arm_columns(chain, dq_mul(chain[-1], model.tool.vec8()))


def _arm_columns(chain, xa) -> np.ndarray:
    j = np.empty((8, len(chain) - 1))
    for k in range(j.shape[1]):
        p = chain[k]
        w = dq_mul(dq_mul(p, _K_HAT), _dq_conj(p))
        j[:, k] = 0.5 * dq_mul(w, xa)
    return j


def whole_body_fk(q_b, model: SerialArm, q_m) -> UnitDualQuaternion:
    xb = base_pose(q_b).vec8()
    xe = dq_mul(dq_mul(xb, model.mount.vec8()), arm_fk(model, q_m).vec8())
    return UnitDualQuaternion(xe)


@dataclass(frozen=True)
class WholeBodyJacobian:
    full: np.ndarray
    base: np.ndarray
    arm: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.full if dtype is None else self.full.astype(dtype)

    @property
    def shape(self):
        return self.full.shape


def whole_body_jacobian(q_b, model: SerialArm, q_m) -> WholeBodyJacobian:
    """``[H-(x_m x_a) J_b, H+(x_b x_m) J_a]`` mapping ``(q_b_dot, q_m_dot)`` to ``vec8(x_e_dot)``."""
    return whole_body_state(q_b, model, q_m)[1]


def whole_body_state(q_b, model: SerialArm, q_m) -> tuple[np.ndarray, WholeBodyJacobian]:
    """End effector pose (vec8) and whole-body Jacobian from one pass over the chain."""
    xb = base_pose(q_b).vec8()
    xm = model.mount.vec8()
    chain = _arm_chain(model, q_m)
    xa = dq_mul(chain[-1], model.tool.vec8())
    xbm = dq_mul(xb, xm)
    jb = hamilton_minus8(dq_mul(xm, xa)) @ base_jacobian(q_b)
    ja = hamilton_plus8(xbm) @ _arm_columns(chain, xa)
    return dq_mul(xbm, xa), WholeBodyJacobian(np.hstack((jb, ja)), jb, ja)


def jw_pinv(j, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse dropping singular values below ``rcond * s_max``."""
    return np.linalg.pinv(np.asarray(j, dtype=np.float64), rcond=rcond)
