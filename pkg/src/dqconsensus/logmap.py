"""Differential of the dual quaternion logarithm.

``Q(r)`` maps the rate of the rotation log to the rate of the rotation
quaternion, ``Q8(x)`` does the same for the full pose:
``vec8(x_dot) = Q8(x) vec6(y_dot)`` with ``y = log x``.

Conditioning: ``cond(Q8^T Q8) = Theta^-2 = ((phi/2) / sin(phi/2))^2``, so it
stays below ``(pi/2)^2 ~ 2.47`` for shortest-arc logs (``phi <= pi``) and only
blows up as ``phi -> 2 pi`` (about 4e5 at ``2 pi - 0.01``).
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import (
    ArrayLike,
    Quaternion,
    UnitDualQuaternion,
    hamilton_minus4,
    hamilton_plus4,
    _qconj,
    _qmul,
)

THETA_SERIES_BELOW = 1e-6
_LEMMA_SERIES_BELOW = 1e-3
PINV_MAX_CONDITION = 1e12

Q_P = np.vstack((np.zeros((1, 3)), np.eye(3)))
Q_P.setflags(write=False)


class SingularMappingError(ArithmeticError):
    """``Q8^T Q8`` is too badly conditioned to invert."""


def theta_coefficient(phi: float) -> float:
    """``sin(phi/2)/(phi/2)``, with a series below ``1e-6`` so ``phi = 0`` gives 1."""
    h = 0.5 * phi
    if phi > THETA_SERIES_BELOW:
        return math.sin(h) / h
    return 1.0 - h * h / 6.0


def _rotation_coeffs(r) -> np.ndarray:
    c = np.asarray(r, dtype=np.float64).reshape(-1)
    if c.shape != (4,):
        raise ValueError(f"expected a quaternion, got shape {c.shape}")
    return c


def q_matrix_lemma_form(y: ArrayLike) -> np.ndarray:
    """d vec4(r) / d vec3(y) written in terms of ``y = log r``.

    ``y`` may be a pure quaternion or its three coefficients.
    """
    if isinstance(y, Quaternion):
        y = y.vec4()[1:]
    y = np.asarray(y, dtype=np.float64).reshape(3)
    ny = math.sqrt(y @ y)
    if ny == 0.0:
        return Q_P.copy()
    a = math.sin(ny) / ny
    if ny < _LEMMA_SERIES_BELOW:
        n2 = ny * ny
        b = -1.0 / 3.0 + n2 / 30.0 - n2 * n2 / 840.0
    else:
        b = math.cos(ny) / ny**2 - math.sin(ny) / ny**3
    out = np.empty((4, 3))
    out[0] = -a * y
    out[1:] = b * np.outer(y, y) + a * np.eye(3)
    return out


def angle_axis(r) -> tuple[float, np.ndarray]:
    """``phi`` in ``[0, 2pi)`` and the unit axis of a unit quaternion."""
    c = _rotation_coeffs(r)
    s = math.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    phi = 2.0 * math.atan2(s, c[0])
    if s > 1e-12:
        return phi, c[1:] / s
    return phi, np.zeros(3)


def theta_gamma(r) -> tuple[float, float]:
    """The pair ``(Theta, Gamma = r1 - Theta)`` for a unit quaternion."""
    c = _rotation_coeffs(r)
    phi, _ = angle_axis(c)
    theta = theta_coefficient(phi)
    return theta, c[0] - theta


def q_matrix_theorem_form(r) -> np.ndarray:
    """d vec4(r) / d vec3(log r) written with the coefficients of ``r`` only."""
    c = _rotation_coeffs(r)
    phi, n = angle_axis(c)
    theta = theta_coefficient(phi)
    gamma = c[0] - theta
    out = np.empty((4, 3))
    out[0] = -c[1:]
    out[1:] = gamma * np.outer(n, n) + theta * np.eye(3)
    return out


def q8(x) -> np.ndarray:
    """8x6 map from ``vec6(y_dot)`` to ``vec8(x_dot)`` at the given representative."""
    c = np.asarray(x, dtype=np.float64).reshape(8)
    r = c[:4]
    p = 2.0 * _qmul(c[4:], _qconj(r))
    p[0] = 0.0
    q = q_matrix_theorem_form(r)
    out = np.zeros((8, 6))
    out[:4, :3] = q
    out[4:, :3] = 0.5 * hamilton_plus4(p) @ q
    out[4:, 3:] = hamilton_minus4(r) @ Q_P
    return out


def q8_pinv(q: np.ndarray) -> np.ndarray:
    """Left pseudoinverse ``(Q^T Q)^-1 Q^T`` of a full column rank matrix."""
    q = np.asarray(q, dtype=np.float64)
    gram = q.T @ q
    cond = np.linalg.cond(gram)
    if not cond < PINV_MAX_CONDITION:
        raise SingularMappingError(f"Q^T Q condition number {cond:.3e}")
    return np.linalg.solve(gram, q.T)


def block_matrix(p, r) -> np.ndarray:
    """``[[I4, 0], [(1/2) H+(p), H-(r)]]`` from the rank argument for Q8."""
    out = np.zeros((8, 8))
    out[:4, :4] = np.eye(4)
    out[4:, :4] = 0.5 * hamilton_plus4(p)
    out[4:, 4:] = hamilton_minus4(r)
    return out


def block_matrix_inverse(p, r) -> np.ndarray:
    """Closed-form inverse of :func:`block_matrix` for unit ``r``."""
    rc = np.asarray(r, dtype=np.float64)
    hm_conj = hamilton_minus4(_qconj(rc))
    out = np.zeros((8, 8))
    out[:4, :4] = np.eye(4)
    out[4:, :4] = -0.5 * hm_conj @ hamilton_plus4(p)
    out[4:, 4:] = hm_conj
    return out


def log_rate(x: UnitDualQuaternion, x_dot) -> np.ndarray:
    """``vec6(y_dot)`` recovered from ``vec8(x_dot)`` at ``x``."""
    return q8_pinv(q8(x)) @ np.asarray(x_dot, dtype=np.float64)
