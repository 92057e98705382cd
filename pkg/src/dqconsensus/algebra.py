"""Quaternion and dual quaternion algebra.

Coefficients are stored as float64 arrays in the order
``(w, x, y, z | w', x', y', z')`` which is also the ``vec8`` order used
everywhere else in the package (CSV columns included).
"""

from __future__ import annotations

import math
from typing import Iterable, Union

import numpy as np

UNIT_TOL = 1e-12
UNIT_MAX_DRIFT = 1e-6
_AXIS_EPS = 1e-12

ArrayLike = Union[np.ndarray, Iterable[float]]


class NotUnitError(ValueError):
    """A value that must be unit deviates from unit norm beyond repair."""


def _as_vec(values, size: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.shape != (size,):
        raise ValueError(f"expected {size} coefficients, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Hamilton operators on raw coefficient arrays
# ---------------------------------------------------------------------------

def hamilton_plus4(h: ArrayLike) -> np.ndarray:
    """Left-multiplication matrix: ``vec4(a b) = H+(a) vec4(b)``."""
    h1, h2, h3, h4 = np.asarray(h, dtype=np.float64)
    return np.array([
        [h1, -h2, -h3, -h4],
        [h2, h1, -h4, h3],
        [h3, h4, h1, -h2],
        [h4, -h3, h2, h1],
    ])


def hamilton_minus4(h: ArrayLike) -> np.ndarray:
    """Right-multiplication matrix: ``vec4(a b) = H-(b) vec4(a)``."""
    h1, h2, h3, h4 = np.asarray(h, dtype=np.float64)
    return np.array([
        [h1, -h2, -h3, -h4],
        [h2, h1, h4, -h3],
        [h3, -h4, h1, h2],
        [h4, h3, -h2, h1],
    ])


def hamilton_plus8(h: ArrayLike) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    top = hamilton_plus4(h[:4])
    out = np.zeros((8, 8))
    out[:4, :4] = top
    out[4:, 4:] = top
    out[4:, :4] = hamilton_plus4(h[4:])
    return out


def hamilton_minus8(h: ArrayLike) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    top = hamilton_minus4(h[:4])
    out = np.zeros((8, 8))
    out[:4, :4] = top
    out[4:, 4:] = top
    out[4:, :4] = hamilton_minus4(h[4:])
    return out


def _qprod(a1, a2, a3, a4, b1, b2, b3, b4):
    return [
        a1 * b1 - a2 * b2 - a3 * b3 - a4 * b4,
        a1 * b2 + a2 * b1 + a3 * b4 - a4 * b3,
        a1 * b3 - a2 * b4 + a3 * b1 + a4 * b2,
        a1 * b4 + a2 * b3 - a3 * b2 + a4 * b1,
    ]


def _floats(a) -> list:
    # plain floats are much faster than numpy scalars for this arithmetic
    return a.tolist() if isinstance(a, np.ndarray) else [float(v) for v in a]


def _qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array(_qprod(*_floats(a), *_floats(b)))


def _qconj(a: np.ndarray) -> np.ndarray:
    return np.array([a[0], -a[1], -a[2], -a[3]])


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

class Quaternion:
    """``h1 + i h2 + j h3 + k h4`` with real coefficients."""

    __slots__ = ("_c",)
    _size = 4

    def __init__(self, coeffs: ArrayLike = (1.0, 0.0, 0.0, 0.0)):
        self._c = _as_vec(coeffs, 4)

    @classmethod
    def from_parts(cls, w: float, x: float, y: float, z: float) -> "Quaternion":
        return cls((w, x, y, z))

    @property
    def w(self) -> float:
        return float(self._c[0])

    @property
    def x(self) -> float:
        return float(self._c[1])

    @property
    def y(self) -> float:
        return float(self._c[2])

    @property
    def z(self) -> float:
        return float(self._c[3])

    def vec4(self) -> np.ndarray:
        return self._c.copy()

    def real(self) -> float:
        return float(self._c[0])

    def imag(self) -> "PureQuaternion":
        return PureQuaternion(self._c[1:])

    def conj(self) -> "Quaternion":
        return Quaternion(_qconj(self._c))

    def norm(self) -> float:
        return float(np.sqrt(self._c @ self._c))

    def hamilton_plus(self) -> np.ndarray:
        return hamilton_plus4(self._c)

    def hamilton_minus(self) -> np.ndarray:
        return hamilton_minus4(self._c)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return _promote_q(Quaternion(_qmul(self._c, other._c)), self, other)
        if isinstance(other, (int, float, np.floating)):
            return Quaternion(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Quaternion(self._c * float(other))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self._c + other._c)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self._c - other._c)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self._c)

    def __eq__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __array__(self, dtype=None, copy=None):
        return self._c.astype(dtype or np.float64, copy=True)

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def __repr__(self):
        w, x, y, z = self._c
        return f"{type(self).__name__}({w:.6g} + {x:.6g}i + {y:.6g}j + {z:.6g}k)"


class PureQuaternion(Quaternion):
    """Quaternion with zero real part, stored as its three imaginary coefficients."""

    def __init__(self, coeffs: ArrayLike = (0.0, 0.0, 0.0)):
        v = _as_vec(coeffs, 3)
        self._c = _as_vec(np.concatenate(([0.0], v)), 4)

    def vec3(self) -> np.ndarray:
        return self._c[1:].copy()

    def conj(self) -> "PureQuaternion":
        return PureQuaternion(-self._c[1:])

    def __add__(self, other):
        if isinstance(other, PureQuaternion):
            return PureQuaternion(self._c[1:] + other._c[1:])
        return super().__add__(other)

    def __sub__(self, other):
        if isinstance(other, PureQuaternion):
            return PureQuaternion(self._c[1:] - other._c[1:])
        return super().__sub__(other)

    def __neg__(self):
        return PureQuaternion(-self._c[1:])

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return PureQuaternion(self._c[1:] * float(other))
        return super().__mul__(other)

    __rmul__ = __mul__


class UnitQuaternion(Quaternion):
    """Rotation ``cos(phi/2) + n sin(phi/2)``."""

    def __init__(self, coeffs: ArrayLike = (1.0, 0.0, 0.0, 0.0)):
        c = np.array(coeffs, dtype=np.float64).reshape(-1)
        if c.shape != (4,):
            raise ValueError(f"expected 4 coefficients, got shape {c.shape}")
        dev = abs(math.sqrt(c @ c) - 1.0)
        if not dev <= UNIT_MAX_DRIFT:
            raise NotUnitError(f"quaternion norm deviates from 1 by {dev:.3e}")
        if dev > UNIT_TOL:
            c = c / math.sqrt(c @ c)
        self._c = _as_vec(c, 4)

    @classmethod
    def from_axis_angle(cls, axis: ArrayLike, angle: float) -> "UnitQuaternion":
        n = np.asarray(axis, dtype=np.float64)
        n = n / np.linalg.norm(n)
        return cls(np.concatenate(([math.cos(angle / 2)], math.sin(angle / 2) * n)))

    def conj(self) -> "UnitQuaternion":
        return UnitQuaternion(_qconj(self._c))

    def angle_axis(self) -> tuple[float, np.ndarray]:
        """Angle in ``[0, 2pi)`` and unit axis (``k`` when the angle is zero)."""
        s = float(np.linalg.norm(self._c[1:]))
        phi = 2.0 * math.atan2(s, self._c[0])
        if s > _AXIS_EPS:
            return phi, self._c[1:] / s
        return phi, np.array([0.0, 0.0, 1.0])

    def __neg__(self):
        return UnitQuaternion(-self._c)


def _promote_q(result: Quaternion, a: Quaternion, b: Quaternion) -> Quaternion:
    if isinstance(a, UnitQuaternion) and isinstance(b, UnitQuaternion):
        return UnitQuaternion(result._c)
    return result


class DualQuaternion:
    """``h + eps h'`` with ``eps**2 = 0``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: ArrayLike = (1.0, 0, 0, 0, 0, 0, 0, 0)):
        self._c = _as_vec(coeffs, 8)

    @classmethod
    def from_quaternions(cls, primary: ArrayLike, dual: ArrayLike = (0, 0, 0, 0)):
        return cls(np.concatenate((np.asarray(primary, float), np.asarray(dual, float))))

    @property
    def primary(self) -> Quaternion:
        return Quaternion(self._c[:4])

    @property
    def dual(self) -> Quaternion:
        return Quaternion(self._c[4:])

    def vec8(self) -> np.ndarray:
        return self._c.copy()

    def real(self) -> tuple[float, float]:
        return float(self._c[0]), float(self._c[4])

    def conj(self) -> "DualQuaternion":
        return type(self)._wrap(_dq_conj(self._c))

    @classmethod
    def _wrap(cls, c):
        return cls(c)

    def norm_squared(self) -> "DualQuaternion":
        return DualQuaternion(dq_mul(self._c, _dq_conj(self._c)))

    def hamilton_plus(self) -> np.ndarray:
        return hamilton_plus8(self._c)

    def hamilton_minus(self) -> np.ndarray:
        return hamilton_minus8(self._c)

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            prod = dq_mul(self._c, other._c)
            if isinstance(self, UnitDualQuaternion) and isinstance(other, UnitDualQuaternion):
                return UnitDualQuaternion(prod)
            return DualQuaternion(prod)
        if isinstance(other, (int, float, np.floating)):
            return DualQuaternion(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return DualQuaternion(self._c * float(other))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion(self._c + other._c)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion(self._c - other._c)
        return NotImplemented

    def __neg__(self):
        return DualQuaternion(-self._c)

    def __eq__(self, other):
        if not isinstance(other, DualQuaternion):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __array__(self, dtype=None, copy=None):
        return self._c.astype(dtype or np.float64, copy=True)

    def isclose(self, other: "DualQuaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def __repr__(self):
        return f"{type(self).__name__}({np.array2string(self._c, precision=6)})"


def _dq_conj(c: np.ndarray) -> np.ndarray:
    return np.array([c[0], -c[1], -c[2], -c[3], c[4], -c[5], -c[6], -c[7]])


def dq_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two dual quaternions given as 8-vectors."""
    a, b = _floats(a), _floats(b)
    p = _qprod(*a[:4], *b[:4])
    d1 = _qprod(*a[:4], *b[4:])
    d2 = _qprod(*a[4:], *b[:4])
    return np.array(p + [u + v for u, v in zip(d1, d2)])


def unit_deviation(c: np.ndarray) -> float:
    """Largest deviation of the dual norm of ``c`` from ``1 + eps 0``."""
    r, d = c[:4], c[4:]
    return max(abs(math.sqrt(r @ r) - 1.0), abs(float(r @ d)))


def normalize_unit(c: np.ndarray) -> np.ndarray:
    """Divide by the dual norm ``|r| + eps <r, d>/|r|``."""
    r, d = c[:4], c[4:]
    nr = math.sqrt(r @ r)
    rd = float(r @ d)
    return np.concatenate((r / nr, d / nr - r * (rd / nr**3)))


class UnitDualQuaternion(DualQuaternion):
    """Rigid motion ``r + eps (1/2) p r``.

    Construction renormalizes small drift (above 1e-12, below 1e-6) and
    raises :class:`NotUnitError` for anything larger.
    """

    def __init__(self, coeffs: ArrayLike = (1.0, 0, 0, 0, 0, 0, 0, 0)):
        c = np.array(coeffs, dtype=np.float64).reshape(-1)
        if c.shape != (8,):
            raise ValueError(f"expected 8 coefficients, got shape {c.shape}")
        dev = unit_deviation(c)
        if not dev <= UNIT_MAX_DRIFT:
            raise NotUnitError(f"dual quaternion norm deviates from 1 by {dev:.3e}")
        if dev > UNIT_TOL:
            c = normalize_unit(c)
        self._c = _as_vec(c, 8)

    @classmethod
    def from_rotation_translation(cls, r, p) -> "UnitDualQuaternion":
        return pose_from_rotation_translation(r, p)

    @property
    def rotation(self) -> UnitQuaternion:
        return UnitQuaternion(self._c[:4])

    @property
    def translation(self) -> PureQuaternion:
        t = 2.0 * _qmul(self._c[4:], _qconj(self._c[:4]))
        return PureQuaternion(t[1:])

    def inverse(self) -> "UnitDualQuaternion":
        return self.conj()

    def __neg__(self):
        return UnitDualQuaternion(-self._c)

    def log(self) -> "PureDualQuaternion":
        return log_unit(self)


class PureDualQuaternion(DualQuaternion):
    """Dual quaternion with both real parts zero, stored as six coefficients."""

    def __init__(self, coeffs: ArrayLike = (0.0,) * 6):
        v = _as_vec(coeffs, 6)
        self._c = _as_vec(np.array([0.0, v[0], v[1], v[2], 0.0, v[3], v[4], v[5]]), 8)

    @classmethod
    def from_parts(cls, primary: ArrayLike, dual: ArrayLike) -> "PureDualQuaternion":
        return cls(np.concatenate((np.asarray(primary, float), np.asarray(dual, float))))

    @classmethod
    def _wrap(cls, c):
        return cls(vec8_to_vec6(c))

    def vec6(self) -> np.ndarray:
        return vec8_to_vec6(self._c)

    @property
    def primary(self) -> PureQuaternion:
        return PureQuaternion(self._c[1:4])

    @property
    def dual(self) -> PureQuaternion:
        return PureQuaternion(self._c[5:8])

    def __add__(self, other):
        if isinstance(other, PureDualQuaternion):
            return PureDualQuaternion(self.vec6() + other.vec6())
        return super().__add__(other)

    def __sub__(self, other):
        if isinstance(other, PureDualQuaternion):
            return PureDualQuaternion(self.vec6() - other.vec6())
        return super().__sub__(other)

    def __neg__(self):
        return PureDualQuaternion(-self.vec6())

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return PureDualQuaternion(self.vec6() * float(other))
        return super().__mul__(other)

    __rmul__ = __mul__

    def exp(self) -> UnitDualQuaternion:
        return exp_pure(self)


# Angular velocity in the primary part, p_dot + p x w in the dual part.
Twist = PureDualQuaternion


# ---------------------------------------------------------------------------
# vec maps
# ---------------------------------------------------------------------------

def vec3(h: Quaternion) -> np.ndarray:
    if not isinstance(h, PureQuaternion):
        raise TypeError("vec3 is defined for pure quaternions only")
    return h.vec3()


def vec4(h: Quaternion) -> np.ndarray:
    return h.vec4()


def vec6(h: DualQuaternion) -> np.ndarray:
    if not isinstance(h, PureDualQuaternion):
        raise TypeError("vec6 is defined for pure dual quaternions only")
    return h.vec6()


def vec8(h: DualQuaternion) -> np.ndarray:
    return h.vec8()


def vec8_to_vec6(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c)
    return np.array([c[1], c[2], c[3], c[5], c[6], c[7]], dtype=np.float64)


def vec6_to_vec8(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.array([0.0, v[0], v[1], v[2], 0.0, v[3], v[4], v[5]])


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return a * b


def conj(h):
    return h.conj()


def cross(p: PureQuaternion, w: PureQuaternion) -> PureQuaternion:
    """``(p w - w p) / 2``, the R^3 cross product for pure quaternions."""
    c = 0.5 * (_qmul(p.vec4(), w.vec4()) - _qmul(w.vec4(), p.vec4()))
    return PureQuaternion(c[1:])


def pose_from_rotation_translation(r, p) -> UnitDualQuaternion:
    """``r + eps (1/2) p r``."""
    rc = np.asarray(r, dtype=np.float64)
    if isinstance(p, Quaternion):
        pc = p.vec4()
    else:
        pc = np.concatenate(([0.0], np.asarray(p, dtype=np.float64)))
    if pc[0] != 0.0:
        raise ValueError("translation must be a pure quaternion")
    return UnitDualQuaternion(np.concatenate((rc, 0.5 * _qmul(pc, rc))))


def canonical(x: UnitDualQuaternion) -> tuple[UnitDualQuaternion, float]:
    """Shortest-arc representative of ``x`` and the sign applied to it."""
    if x.vec8()[0] < 0.0:
        return -x, -1.0
    return x, 1.0


def log_unit_coeffs(c: np.ndarray) -> np.ndarray:
    """vec6 of the log of the canonical representative of ``c``."""
    if c[0] < 0.0:
        c = -c
    r, d = c[:4], c[4:]
    s = math.sqrt(r[1] * r[1] + r[2] * r[2] + r[3] * r[3])
    out = np.zeros(6)
    if s > _AXIS_EPS:
        half_phi = math.atan2(s, r[0])
        out[:3] = (half_phi / s) * r[1:]
    t = _qmul(d, _qconj(r))
    out[3:] = t[1:]
    return out


def log_unit(x: UnitDualQuaternion) -> PureDualQuaternion:
    """``(1/2)(phi n + eps p)`` with ``phi`` in ``[0, pi]`` after canonicalization."""
    return PureDualQuaternion(log_unit_coeffs(x.vec8()))


def exp_pure_coeffs(v: np.ndarray) -> np.ndarray:
    g = np.asarray(v[:3], dtype=np.float64)
    th = math.sqrt(g @ g)
    if th == 0.0:
        prim = np.array([1.0, 0.0, 0.0, 0.0])
    else:
        prim = np.concatenate(([math.cos(th)], (math.sin(th) / th) * g))
    dual = _qmul(np.concatenate(([0.0], v[3:6])), prim)
    return np.concatenate((prim, dual))


def exp_pure(g: PureDualQuaternion) -> UnitDualQuaternion:
    """``exp(g) + eps g' exp(g)`` for ``g + eps g'`` pure."""
    return UnitDualQuaternion(exp_pure_coeffs(g.vec6()))


def pose_derivative(x: UnitDualQuaternion, xi: PureDualQuaternion) -> DualQuaternion:
    """``(1/2) xi x``."""
    return DualQuaternion(0.5 * dq_mul(xi.vec8(), x.vec8()))


def twist_from_velocities(omega: ArrayLike, p_dot: ArrayLike, p: ArrayLike) -> Twist:
    """``omega + eps (p_dot + p x omega)`` in the inertial frame."""
    w = PureQuaternion(omega)
    dual = PureQuaternion(p_dot) + cross(PureQuaternion(p), w)
    return PureDualQuaternion.from_parts(w.vec3(), dual.vec3())


IDENTITY = UnitDualQuaternion()
