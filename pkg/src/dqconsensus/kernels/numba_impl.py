"""numba-compiled kernels; same signatures and semantics as ``numpy_impl``."""

import math

import numpy as np
from numba import njit, prange

AXIS_EPS = 1e-12
_opts = dict(cache=True, nogil=True, fastmath=False)


@njit(inline="always", **_opts)
def _qm(a0, a1, a2, a3, b0, b1, b2, b3):
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


@njit(inline="always", **_opts)
def _dqm(a, b, out):
    p = _qm(a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3])
    d1 = _qm(a[0], a[1], a[2], a[3], b[4], b[5], b[6], b[7])
    d2 = _qm(a[4], a[5], a[6], a[7], b[0], b[1], b[2], b[3])
    for k in range(4):
        out[k] = p[k]
        out[4 + k] = d1[k] + d2[k]


@njit(inline="always", **_opts)
def _conj(a, out):
    out[0] = a[0]
    out[1] = -a[1]
    out[2] = -a[2]
    out[3] = -a[3]
    out[4] = a[4]
    out[5] = -a[5]
    out[6] = -a[6]
    out[7] = -a[7]


@njit(inline="always", **_opts)
def _normalize(a, out):
    nr = math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3])
    rd = a[0] * a[4] + a[1] * a[5] + a[2] * a[6] + a[3] * a[7]
    c = rd / (nr * nr * nr)
    for k in range(4):
        out[k] = a[k] / nr
        out[4 + k] = a[4 + k] / nr - a[k] * c


@njit(inline="always", **_opts)
def _log(a, out):
    sg = -1.0 if a[0] < 0.0 else 1.0
    r0, r1, r2, r3 = sg * a[0], sg * a[1], sg * a[2], sg * a[3]
    d0, d1, d2, d3 = sg * a[4], sg * a[5], sg * a[6], sg * a[7]
    s = math.sqrt(r1 * r1 + r2 * r2 + r3 * r3)
    scale = 0.0
    if s > AXIS_EPS:
        scale = math.atan2(s, r0) / s
    out[0] = scale * r1
    out[1] = scale * r2
    out[2] = scale * r3
    t = _qm(d0, d1, d2, d3, r0, -r1, -r2, -r3)
    out[3] = t[1]
    out[4] = t[2]
    out[5] = t[3]
    return sg


@njit(inline="always", **_opts)
def _exp(v, out):
    th = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    sinc = 1.0
    if th > 0.0:
        sinc = math.sin(th) / th
    p0 = math.cos(th)
    p1, p2, p3 = sinc * v[0], sinc * v[1], sinc * v[2]
    d = _qm(0.0, v[3], v[4], v[5], p0, p1, p2, p3)
    out[0], out[1], out[2], out[3] = p0, p1, p2, p3
    out[4], out[5], out[6], out[7] = d[0], d[1], d[2], d[3]


@njit(inline="always", **_opts)
def _theta(phi):
    h = 0.5 * phi
    if phi > 1e-6:
        return math.sin(h) / h
    return 1.0 - h * h / 6.0


@njit(inline="always", **_opts)
def _qmat(r0, r1, r2, r3, q):
    s = math.sqrt(r1 * r1 + r2 * r2 + r3 * r3)
    theta = _theta(2.0 * math.atan2(s, r0))
    gamma = r0 - theta
    n0 = n1 = n2 = 0.0
    if s > AXIS_EPS:
        n0, n1, n2 = r1 / s, r2 / s, r3 / s
    q[0, 0], q[0, 1], q[0, 2] = -r1, -r2, -r3
    n = (n0, n1, n2)
    for i in range(3):
        for j in range(3):
            q[1 + i, j] = gamma * n[i] * n[j]
        q[1 + i, i] += theta


@njit(inline="always", **_opts)
def _q8_apply(x, s, out, q):
    _qmat(x[0], x[1], x[2], x[3], q)
    rd = [0.0, 0.0, 0.0, 0.0]
    for i in range(4):
        rd[i] = q[i, 0] * s[0] + q[i, 1] * s[1] + q[i, 2] * s[2]
    p = _qm(x[4], x[5], x[6], x[7], x[0], -x[1], -x[2], -x[3])
    a = _qm(0.0, 2.0 * p[1], 2.0 * p[2], 2.0 * p[3], rd[0], rd[1], rd[2], rd[3])
    b = _qm(0.0, s[3], s[4], s[5], x[0], x[1], x[2], x[3])
    for k in range(4):
        out[k] = rd[k]
        out[4 + k] = 0.5 * a[k] + b[k]


@njit(**_opts)
def qmul(a, b):
    out = np.empty_like(a)
    for i in range(a.shape[0]):
        t = _qm(a[i, 0], a[i, 1], a[i, 2], a[i, 3], b[i, 0], b[i, 1], b[i, 2], b[i, 3])
        for k in range(4):
            out[i, k] = t[k]
    return out


@njit(**_opts)
def dq_mul(a, b):
    out = np.empty((a.shape[0], 8))
    for i in range(a.shape[0]):
        _dqm(a[i], b[i], out[i])
    return out


@njit(**_opts)
def dq_conj(x):
    out = np.empty((x.shape[0], 8))
    for i in range(x.shape[0]):
        _conj(x[i], out[i])
    return out


@njit(**_opts)
def dq_normalize(x):
    out = np.empty((x.shape[0], 8))
    for i in range(x.shape[0]):
        _normalize(x[i], out[i])
    return out


@njit(**_opts)
def dq_log(x):
    out = np.empty((x.shape[0], 6))
    sign = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        sign[i] = _log(x[i], out[i])
    return out, sign


@njit(**_opts)
def dq_exp(v):
    out = np.empty((v.shape[0], 8))
    for i in range(v.shape[0]):
        _exp(v[i], out[i])
    return out


@njit(**_opts)
def q_matrix(r):
    out = np.empty((r.shape[0], 4, 3))
    for i in range(r.shape[0]):
        _qmat(r[i, 0], r[i, 1], r[i, 2], r[i, 3], out[i])
    return out


@njit(**_opts)
def q8_apply(x, s):
    out = np.empty((x.shape[0], 8))
    q = np.empty((4, 3))
    for i in range(x.shape[0]):
        _q8_apply(x[i], s[i], out[i], q)
    return out


@njit(**_opts)
def q8_batch(x):
    out = np.zeros((x.shape[0], 8, 6))
    e = np.zeros(6)
    col = np.empty(8)
    q = np.empty((4, 3))
    for i in range(x.shape[0]):
        for j in range(6):
            e[:] = 0.0
            e[j] = 1.0
            _q8_apply(x[i], e, col, q)
            out[i, :, j] = col
    return out


@njit(**_opts)
def formation_outputs(x, delta):
    n = x.shape[0]
    y = np.empty((n, 6))
    sign = np.empty(n)
    xc = np.empty((n, 8))
    dc = np.empty(8)
    for i in range(n):
        _conj(delta[i], dc)
        _dqm(x[i], dc, xc[i])
        sign[i] = _log(xc[i], y[i])
    return y, sign, xc


@njit(inline="always", **_opts)
def _agent_rate(x, d, dd, s, u, xi, buf, q):
    """Pose derivative ``u`` and twist ``xi`` of one agent; returns the log sign."""
    xc, dc, v, w, yi = buf[0], buf[1], buf[2], buf[3], buf[4]
    _conj(d, dc)
    _dqm(x, dc, xc)
    sg = _log(xc, yi)
    for k in range(8):
        xc[k] *= sg
    _q8_apply(xc, s, v, q)
    _dqm(v, d, w)
    # feed-forward - x delta_dot* delta
    _conj(dd, dc)
    _dqm(x, dc, v)
    _dqm(v, d, xc)
    for k in range(8):
        u[k] = -sg * w[k] - xc[k]
    _conj(x, dc)
    _dqm(u, dc, v)
    for k in range(8):
        xi[k] = 2.0 * v[k]
    return sg


@njit(parallel=True, **_opts)
def formation_rates(x, delta, delta_dot, s, active):
    n = x.shape[0]
    u = np.zeros((n, 8))
    xi = np.zeros((n, 8))
    for i in prange(n):
        if not active[i]:
            continue
        buf = np.empty((5, 8))
        q = np.empty((4, 3))
        _agent_rate(x[i], delta[i], delta_dot[i], s[i], u[i], xi[i], buf, q)
    return u, xi


@njit(inline="always", **_opts)
def _step_one(x, xi, h, out, v, e, t):
    v[0], v[1], v[2] = h * xi[1], h * xi[2], h * xi[3]
    v[3], v[4], v[5] = h * xi[5], h * xi[6], h * xi[7]
    _exp(v, e)
    _dqm(e, x, t)
    _normalize(t, out)


@njit(**_opts)
def run_free(x0, lap, active, const, rot, slide, offset, omega, moving, dt, steps,
             record, twist_norm):
    """Whole step loop for free-flying agents.

    Offsets are ``const`` or, when ``moving``, ``[rot, c(t) slide]`` with
    ``c(t) = offset + cos(omega t)``. Returns the logs at the steps listed
    in ``record`` and the first step with a non-finite state (-1 if none).
    """
    n = x0.shape[0]
    rows = record.shape[0]
    log_x = np.zeros((rows, n, 8))
    log_y = np.zeros((rows, n, 6))
    log_u = np.zeros((rows, n))
    log_d = np.zeros(rows)
    x = x0.copy()
    x_new = np.empty((n, 8))
    delta = const.copy()
    ddot = np.zeros((n, 8))
    y = np.empty((n, 6))
    s = np.empty((n, 6))
    u = np.zeros((n, 8))
    xi = np.zeros((n, 8))
    dc = np.empty(8)
    xc = np.empty(8)
    buf = np.empty((5, 8))
    q = np.empty((4, 3))
    v6 = np.empty(6)
    e8 = np.empty(8)
    t8 = np.empty(8)
    row = 0
    for k in range(steps + 1):
        t = k * dt
        if moving:
            c = offset + math.cos(omega * t)
            cd = -omega * math.sin(omega * t)
            for i in range(n):
                for m in range(4):
                    delta[i, m] = rot[i, m]
                    delta[i, 4 + m] = c * slide[i, m]
                    ddot[i, 4 + m] = cd * slide[i, m]
        for i in range(n):
            _conj(delta[i], dc)
            _dqm(x[i], dc, xc)
            _log(xc, y[i])
        for i in range(n):
            for m in range(6):
                acc = 0.0
                for j in range(n):
                    acc += lap[i, j] * y[j, m]
                s[i, m] = acc
        for i in range(n):
            if active[i]:
                _agent_rate(x[i], delta[i], ddot[i], s[i], u[i], xi[i], buf, q)
            else:
                u[i, :] = 0.0
                xi[i, :] = 0.0
        if row < rows and record[row] == k:
            for i in range(n):
                acc = 0.0
                for m in range(8):
                    val = xi[i, m] if twist_norm else u[i, m]
                    acc += val * val
                    log_x[row, i, m] = x[i, m]
                log_u[row, i] = math.sqrt(acc)
                for m in range(6):
                    log_y[row, i, m] = y[i, m]
            log_d[row] = disagreement(y)
            row += 1
        if k == steps:
            break
        h = 0.5 * dt
        for i in range(n):
            _step_one(x[i], xi[i], h, x_new[i], v6, e8, t8)
        for i in range(n):
            for m in range(8):
                if not math.isfinite(x_new[i, m]):
                    return log_x, log_y, log_u, log_d, k
        x, x_new = x_new, x
    return log_x, log_y, log_u, log_d, -1


@njit(**_opts)
def exp_step(x, xi, dt):
    n = x.shape[0]
    out = np.empty((n, 8))
    v = np.empty(6)
    e = np.empty(8)
    t = np.empty(8)
    for i in range(n):
        _step_one(x[i], xi[i], 0.5 * dt, out[i], v, e, t)
    return out


@njit(**_opts)
def disagreement(y):
    n = y.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(y.shape[1]):
                d = y[i, k] - y[j, k]
                acc += d * d
            if acc > best:
                best = acc
    return math.sqrt(best)
