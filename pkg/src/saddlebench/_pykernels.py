"""Pure numpy implementations of the hot loops.

These mirror ``_kernels.pyx`` call for call. They are the fallback when the
compiled extension is unavailable and the reference the compiled kernels are
tested against.
"""
from __future__ import annotations

import numpy as np

RENORM_TOL = 1e-12
# exp() floor for OMWU weights: keeps every coordinate strictly positive
LOG_FLOOR = -700.0


def project_simplex(v):
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, d + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    p = np.maximum(v - tau, 0.0)
    s = p.sum()
    if abs(s - 1.0) > RENORM_TOL:
        p /= s
    return p


def duality_gap(A, x, y):
    return float(np.max(A.T @ x) - np.min(A @ y))


class _Recorder:
    def __init__(self, max_iters, record_every, xs, ys):
        size = max_iters // record_every + 2
        self.it = np.empty(size, dtype=np.int64)
        self.phi = np.empty(size)
        self.dist = np.full(size, np.nan)
        self.k = 0
        self.xs = xs
        self.ys = ys

    def add(self, t, phi, x, y):
        self.it[self.k] = t
        self.phi[self.k] = phi
        if self.xs is not None:
            dx = x - self.xs
            dy = y - self.ys
            self.dist[self.k] = np.sqrt(dx @ dx + dy @ dy)
        self.k += 1

    def arrays(self):
        return self.it[: self.k].copy(), self.phi[: self.k].copy(), self.dist[: self.k].copy()


def run_ogda(A, x0, y0, eta, eps, max_iters, record_every, early_stop, xs=None, ys=None):
    rec = _Recorder(max_iters, record_every, xs, ys)
    x = x0.copy()
    y = y0.copy()
    xh = x0.copy()
    yh = y0.copy()
    gx = A @ y
    gy = -(A.T @ x)
    phi = float(np.max(-gy) - np.min(gx))
    rec.add(0, phi, x, y)
    if early_stop and phi <= eps:
        return (x, y, 0, phi, *rec.arrays(), True)
    t = 0
    converged = False
    while t < max_iters:
        t += 1
        # gx, gy hold F(z^{(t-1)})
        x = project_simplex(xh - eta * gx)
        y = project_simplex(yh - eta * gy)
        gx = A @ y
        gy = -(A.T @ x)
        xh = project_simplex(xh - eta * gx)
        yh = project_simplex(yh - eta * gy)
        phi = float(np.max(-gy) - np.min(gx))
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            rec.add(t, phi, x, y)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x, y, t, phi, *rec.arrays(), converged)


def run_egda(A, x0, y0, eta, eps, max_iters, record_every, early_stop, xs=None, ys=None):
    rec = _Recorder(max_iters, record_every, xs, ys)
    x = x0.copy()
    y = y0.copy()
    gx = A @ y
    gy = -(A.T @ x)
    phi = float(np.max(-gy) - np.min(gx))
    rec.add(0, phi, x, y)
    if early_stop and phi <= eps:
        return (x, y, 0, phi, *rec.arrays(), True)
    t = 0
    converged = False
    while t < max_iters:
        t += 1
        xh = project_simplex(x - eta * gx)
        yh = project_simplex(y - eta * gy)
        hx = A @ yh
        hy = -(A.T @ xh)
        x = project_simplex(x - eta * hx)
        y = project_simplex(y - eta * hy)
        gx = A @ y
        gy = -(A.T @ x)
        phi = float(np.max(-gy) - np.min(gx))
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            rec.add(t, phi, x, y)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x, y, t, phi, *rec.arrays(), converged)


def _softmax(logits):
    w = logits - logits.max()
    np.maximum(w, LOG_FLOOR, out=w)
    p = np.exp(w)
    return p / p.sum()


def run_omwu(A, eta, eps, max_iters, record_every, early_stop, xs=None, ys=None):
    n, m = A.shape
    rec = _Recorder(max_iters, record_every, xs, ys)
    lx = np.zeros(n)
    ly = np.zeros(m)
    x = np.full(n, 1.0 / n)
    y = np.full(m, 1.0 / m)
    g = A @ y
    h = A.T @ x
    gp = g.copy()
    hp = h.copy()
    phi = float(np.max(h) - np.min(g))
    rec.add(0, phi, x, y)
    if early_stop and phi <= eps:
        return (x, y, 0, phi, *rec.arrays(), True)
    t = 0
    converged = False
    while t < max_iters:
        t += 1
        lx += -2.0 * eta * g + eta * gp
        ly += 2.0 * eta * h - eta * hp
        lx -= lx.max()
        ly -= ly.max()
        if not (np.all(np.isfinite(lx)) and np.all(np.isfinite(ly))):
            raise OverflowError(t)
        x = _softmax(lx)
        y = _softmax(ly)
        gp = g
        hp = h
        g = A @ y
        h = A.T @ x
        phi = float(np.max(h) - np.min(g))
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            rec.add(t, phi, x, y)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x, y, t, phi, *rec.arrays(), converged)


def smoothing(A, x0, y0, eps, lip, cap):
    """Inner loop of iterated smoothing; returns (x, y, iters, converged)."""
    eta = eps / 2.0
    step = eta / (lip * lip)
    n = x0.shape[0]
    z0 = np.concatenate([x0, y0])
    z = z0.copy()
    zh = z0.copy()
    acc = np.zeros_like(z0)

    def proj(w):
        return np.concatenate([project_simplex(w[:n]), project_simplex(w[n:])])

    def oper(w):
        return np.concatenate([A @ w[n:], -(A.T @ w[:n])])

    for t in range(cap):
        u = (2.0 / (t + 2.0)) * zh + (t / (t + 2.0)) * z
        zs = proj(u - oper(u) / eta)
        grad = oper(zs) - eta * (u - zs)
        z = proj(u - step * grad)
        phi = float(np.max(A.T @ z[:n]) - np.min(A @ z[n:]))
        if phi < eps:
            return z[:n].copy(), z[n:].copy(), t + 1, True
        acc += 0.5 * (t + 1.0) * grad
        zh = proj(z0 - step * acc)
    return z[:n].copy(), z[n:].copy(), cap, False
