"""Vectorized numpy kernels over batches of dual quaternions (rows of 8)."""

import numpy as np

AXIS_EPS = 1e-12


def _product_table():
    # T[4 i + j] = coefficients of e_i e_j for the basis 1, i, j, k
    t = np.zeros((4, 4, 4))
    sign = {(1, 1): -1, (2, 2): -1, (3, 3): -1, (1, 2): 1, (2, 1): -1,
            (2, 3): 1, (3, 2): -1, (3, 1): 1, (1, 3): -1}
    third = {(1, 2): 3, (2, 1): 3, (2, 3): 1, (3, 2): 1, (3, 1): 2, (1, 3): 2}
    for i in range(4):
        for j in range(4):
            if i == 0 or j == 0:
                t[i, j, i + j] = 1.0
            elif i == j:
                t[i, j, 0] = -1.0
            else:
                t[i, j, third[i, j]] = sign[i, j]
    return t.reshape(16, 4)


_TABLE = _product_table()


def qmul(a, b):
    """Row-wise Hamilton product of ``(..., 4)`` arrays."""
    outer = a[..., :, None] * b[..., None, :]
    return outer.reshape(outer.shape[:-2] + (16,)) @ _TABLE


def qconj(a):
    out = -a
    out[..., 0] = a[..., 0]
    return out


def dq_mul(a, b):
    p = qmul(a[:, :4], b[:, :4])
    d = qmul(a[:, :4], b[:, 4:]) + qmul(a[:, 4:], b[:, :4])
    return np.concatenate((p, d), axis=1)


def dq_conj(x):
    out = -x
    out[:, 0] = x[:, 0]
    out[:, 4] = x[:, 4]
    return out


def dq_normalize(x):
    r, d = x[:, :4], x[:, 4:]
    nr = np.sqrt(np.einsum("ij,ij->i", r, r))[:, None]
    rd = np.einsum("ij,ij->i", r, d)[:, None]
    return np.concatenate((r / nr, d / nr - r * (rd / nr**3)), axis=1)


def dq_log(x):
    """vec6 logs of the canonical representatives, plus the signs applied."""
    sign = np.where(x[:, 0] < 0.0, -1.0, 1.0)
    xc = x * sign[:, None]
    r, d = xc[:, :4], xc[:, 4:]
    s = np.sqrt(np.einsum("ij,ij->i", r[:, 1:], r[:, 1:]))
    big = s > AXIS_EPS
    scale = np.zeros_like(s)
    scale[big] = np.arctan2(s[big], r[big, 0]) / s[big]
    out = np.empty((x.shape[0], 6))
    out[:, :3] = scale[:, None] * r[:, 1:]
    out[:, 3:] = qmul(d, qconj(r))[:, 1:]
    return out, sign


def dq_exp(v):
    g = v[:, :3]
    th = np.sqrt(np.einsum("ij,ij->i", g, g))
    nz = th > 0.0
    sinc = np.ones_like(th)
    sinc[nz] = np.sin(th[nz]) / th[nz]
    prim = np.empty((v.shape[0], 4))
    prim[:, 0] = np.cos(th)
    prim[:, 1:] = sinc[:, None] * g
    gp = np.zeros((v.shape[0], 4))
    gp[:, 1:] = v[:, 3:]
    return np.concatenate((prim, qmul(gp, prim)), axis=1)


def _theta(phi):
    h = 0.5 * phi
    out = 1.0 - h * h / 6.0
    big = phi > 1e-6
    out[big] = np.sin(h[big]) / h[big]
    return out


def q_matrix(r):
    s = np.sqrt(np.einsum("ij,ij->i", r[:, 1:], r[:, 1:]))
    phi = 2.0 * np.arctan2(s, r[:, 0])
    theta = _theta(phi)
    gamma = r[:, 0] - theta
    n = np.zeros((r.shape[0], 3))
    big = s > AXIS_EPS
    n[big] = r[big, 1:] / s[big, None]
    out = np.empty((r.shape[0], 4, 3))
    out[:, 0, :] = -r[:, 1:]
    out[:, 1:, :] = gamma[:, None, None] * n[:, :, None] * n[:, None, :]
    out[:, 1:, :] += theta[:, None, None] * np.eye(3)
    return out


def q8_apply(x, s):
    """``Q8(x) s`` for each row, without forming the 8x6 matrices."""
    r = x[:, :4]
    q = q_matrix(r)
    r_dot = np.einsum("nij,nj->ni", q, s[:, :3])
    p = qmul(x[:, 4:], qconj(r)) * 2.0
    p[:, 0] = 0.0
    sp = np.zeros((x.shape[0], 4))
    sp[:, 1:] = s[:, 3:]
    dual = 0.5 * qmul(p, r_dot) + qmul(sp, r)
    return np.concatenate((r_dot, dual), axis=1)


def q8_batch(x):
    r = x[:, :4]
    q = q_matrix(r)
    p = qmul(x[:, 4:], qconj(r)) * 2.0
    out = np.zeros((x.shape[0], 8, 6))
    out[:, :4, :3] = q
    out[:, 4:, :3] = 0.5 * np.einsum("nij,njk->nik", _hplus(p), q)
    out[:, 4:, 3:] = _hminus(r)[:, :, 1:]
    return out


def _hplus(h):
    h1, h2, h3, h4 = h[:, 0], h[:, 1], h[:, 2], h[:, 3]
    return np.stack((
        np.stack((h1, -h2, -h3, -h4), -1),
        np.stack((h2, h1, -h4, h3), -1),
        np.stack((h3, h4, h1, -h2), -1),
        np.stack((h4, -h3, h2, h1), -1),
    ), axis=1)


def _hminus(h):
    h1, h2, h3, h4 = h[:, 0], h[:, 1], h[:, 2], h[:, 3]
    return np.stack((
        np.stack((h1, -h2, -h3, -h4), -1),
        np.stack((h2, h1, h4, -h3), -1),
        np.stack((h3, -h4, h1, h2), -1),
        np.stack((h4, h3, -h2, h1), -1),
    ), axis=1)


def formation_outputs(x, delta):
    """Logs of each agent's opinion ``x_i delta_i*`` on the formation center."""
    xc = dq_mul(x, dq_conj(delta))
    y, sign = dq_log(xc)
    return y, sign, xc


def formation_rates(x, delta, delta_dot, s, active):
    """Pose-derivative inputs and the equivalent twists for every agent.

    ``s`` holds ``sum_j a_ij (y_i - y_j)`` per row. Inactive rows (leaders)
    get zero input.
    """
    y, sign, xc = formation_outputs(x, delta)
    xc_canon = xc * sign[:, None]
    u = -sign[:, None] * dq_mul(q8_apply(xc_canon, s), delta)
    u -= dq_mul(dq_mul(x, dq_conj(delta_dot)), delta)
    u[~active] = 0.0
    xi = 2.0 * dq_mul(u, dq_conj(x))
    return u, xi


def exp_step(x, xi, dt):
    """``exp((dt/2) xi) x`` for each row; only the pure part of ``xi`` is used."""
    v = np.empty((x.shape[0], 6))
    v[:, :3] = xi[:, 1:4]
    v[:, 3:] = xi[:, 5:8]
    return dq_normalize(dq_mul(dq_exp(0.5 * dt * v), x))


def disagreement(y):
    if y.shape[0] < 2:
        return 0.0
    diff = y[:, None, :] - y[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def run_free(x0, lap, active, const, rot, slide, offset, omega, moving, dt, steps,
             record, twist_norm):
    """Step loop for free-flying agents; mirrors the compiled version."""
    n = x0.shape[0]
    rows = record.shape[0]
    log_x = np.zeros((rows, n, 8))
    log_y = np.zeros((rows, n, 6))
    log_u = np.zeros((rows, n))
    log_d = np.zeros(rows)
    x = x0.copy()
    delta = const.copy()
    ddot = np.zeros((n, 8))
    row = 0
    for k in range(steps + 1):
        t = k * dt
        if moving:
            c = offset + np.cos(omega * t)
            cd = -omega * np.sin(omega * t)
            delta[:, :4] = rot
            delta[:, 4:] = c * slide
            ddot[:, 4:] = cd * slide
        y, _, _ = formation_outputs(x, delta)
        u, xi = formation_rates(x, delta, ddot, lap @ y, active)
        if row < rows and record[row] == k:
            chan = xi if twist_norm else u
            log_x[row] = x
            log_y[row] = y
            log_u[row] = np.sqrt(np.einsum("ij,ij->i", chan, chan))
            log_d[row] = disagreement(y)
            row += 1
        if k == steps:
            break
        x = exp_step(x, xi, dt)
        if not np.all(np.isfinite(x)):
            return log_x, log_y, log_u, log_d, k
    return log_x, log_y, log_u, log_d, -1
