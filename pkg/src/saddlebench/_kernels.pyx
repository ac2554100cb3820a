# cython: language_level=3
"""Compiled hot loops: simplex projection and the four solver iterations.

Same signatures and return tuples as ``_pykernels``. All arithmetic is plain
IEEE double (no fast-math) so runs are reproducible bit for bit on one build.
"""
import numpy as np

from libc.math cimport exp, sqrt, fabs, isfinite
from libc.stdlib cimport qsort

cdef double RENORM_TOL = 1e-12
cdef double LOG_FLOOR = -700.0


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*>a)[0]
    cdef double db = (<const double*>b)[0]
    if da < db:
        return 1
    if da > db:
        return -1
    return 0


cdef void _project(const double* v, double* out, Py_ssize_t d, double* buf) noexcept nogil:
    cdef Py_ssize_t k, rho = 0
    cdef double css = 0.0, tau = 0.0, s = 0.0, c
    for k in range(d):
        buf[k] = v[k]
    qsort(buf, d, sizeof(double), _cmp_desc)
    for k in range(d):
        css += buf[k]
        c = css - 1.0
        if buf[k] - c / (k + 1) > 0:
            rho = k
            tau = c / (k + 1)
    for k in range(d):
        c = v[k] - tau
        out[k] = c if c > 0.0 else 0.0
        s += out[k]
    if fabs(s - 1.0) > RENORM_TOL:
        for k in range(d):
            out[k] /= s


cdef void _matvec(const double[:, ::1] A, const double* y, double* out, double sign) noexcept nogil:
    # out = sign * A y
    cdef Py_ssize_t i, j, n = A.shape[0], m = A.shape[1]
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc += A[i, j] * y[j]
        out[i] = sign * acc


cdef void _rmatvec(const double[:, ::1] A, const double* x, double* out, double sign) noexcept nogil:
    # out = sign * A^T x
    cdef Py_ssize_t i, j, n = A.shape[0], m = A.shape[1]
    for j in range(m):
        out[j] = 0.0
    for i in range(n):
        for j in range(m):
            out[j] += A[i, j] * x[i]
    for j in range(m):
        out[j] = sign * out[j]


cdef double _vmax(const double* a, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    cdef double r = a[0]
    for k in range(1, d):
        if a[k] > r:
            r = a[k]
    return r


cdef double _vmin(const double* a, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    cdef double r = a[0]
    for k in range(1, d):
        if a[k] < r:
            r = a[k]
    return r


cdef double _dist(const double* x, const double* y, const double* xs, const double* ys,
                  Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0, d
    for k in range(n):
        d = x[k] - xs[k]
        s += d * d
    for k in range(m):
        d = y[k] - ys[k]
        s += d * d
    return sqrt(s)


cdef class _Recorder:
    cdef public object it, phi, dist
    cdef long long[::1] it_v
    cdef double[::1] phi_v, dist_v
    cdef Py_ssize_t k
    cdef bint has_eq
    cdef const double[::1] xs, ys

    def __init__(self, Py_ssize_t max_iters, Py_ssize_t record_every, xs, ys):
        cdef Py_ssize_t size = max_iters // record_every + 2
        self.it = np.empty(size, dtype=np.int64)
        self.phi = np.empty(size)
        self.dist = np.full(size, np.nan)
        self.it_v = self.it
        self.phi_v = self.phi
        self.dist_v = self.dist
        self.k = 0
        self.has_eq = xs is not None
        if self.has_eq:
            self.xs = np.ascontiguousarray(xs, dtype=np.float64)
            self.ys = np.ascontiguousarray(ys, dtype=np.float64)

    cdef void add(self, long long t, double phi, const double* x, const double* y,
                  Py_ssize_t n, Py_ssize_t m) noexcept:
        self.it_v[self.k] = t
        self.phi_v[self.k] = phi
        if self.has_eq:
            self.dist_v[self.k] = _dist(x, y, &self.xs[0], &self.ys[0], n, m)
        self.k += 1

    def arrays(self):
        return self.it[: self.k].copy(), self.phi[: self.k].copy(), self.dist[: self.k].copy()


def project_simplex(v):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t d = vv.shape[0]
    out = np.empty(d)
    cdef double[::1] ov = out
    cdef double[::1] buf = np.empty(d)
    _project(&vv[0], &ov[0], d, &buf[0])
    return out


def duality_gap(A, x, y):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = Av.shape[0], m = Av.shape[1]
    cdef double[::1] g = np.empty(n), h = np.empty(m)
    _matvec(Av, &yv[0], &g[0], 1.0)
    _rmatvec(Av, &xv[0], &h[0], 1.0)
    return _vmax(&h[0], m) - _vmin(&g[0], n)


def run_ogda(A, x0, y0, double eta, double eps, Py_ssize_t max_iters,
             Py_ssize_t record_every, bint early_stop, xs=None, ys=None):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t n = Av.shape[0], m = Av.shape[1], k
    rec = _Recorder(max_iters, record_every, xs, ys)
    cdef _Recorder r = rec
    x_arr = np.array(x0, dtype=np.float64)
    y_arr = np.array(y0, dtype=np.float64)
    cdef double[::1] x = x_arr, y = y_arr
    cdef double[::1] xh = np.array(x0, dtype=np.float64), yh = np.array(y0, dtype=np.float64)
    cdef double[::1] gx = np.empty(n), gy = np.empty(m)
    cdef double[::1] wx = np.empty(n), wy = np.empty(m)
    cdef double[::1] buf = np.empty(max(n, m))
    cdef double phi
    cdef Py_ssize_t t = 0
    cdef bint converged = False, done

    _matvec(Av, &y[0], &gx[0], 1.0)
    _rmatvec(Av, &x[0], &gy[0], -1.0)
    phi = -_vmin(&gy[0], m) - _vmin(&gx[0], n)
    r.add(0, phi, &x[0], &y[0], n, m)
    if early_stop and phi <= eps:
        return (x_arr, y_arr, 0, phi, *rec.arrays(), True)

    while t < max_iters:
        t += 1
        for k in range(n):
            wx[k] = xh[k] - eta * gx[k]
        for k in range(m):
            wy[k] = yh[k] - eta * gy[k]
        _project(&wx[0], &x[0], n, &buf[0])
        _project(&wy[0], &y[0], m, &buf[0])
        _matvec(Av, &y[0], &gx[0], 1.0)
        _rmatvec(Av, &x[0], &gy[0], -1.0)
        for k in range(n):
            wx[k] = xh[k] - eta * gx[k]
        for k in range(m):
            wy[k] = yh[k] - eta * gy[k]
        _project(&wx[0], &xh[0], n, &buf[0])
        _project(&wy[0], &yh[0], m, &buf[0])
        phi = -_vmin(&gy[0], m) - _vmin(&gx[0], n)
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            r.add(t, phi, &x[0], &y[0], n, m)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x_arr, y_arr, t, phi, *rec.arrays(), converged)


def run_egda(A, x0, y0, double eta, double eps, Py_ssize_t max_iters,
             Py_ssize_t record_every, bint early_stop, xs=None, ys=None):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t n = Av.shape[0], m = Av.shape[1], k
    rec = _Recorder(max_iters, record_every, xs, ys)
    cdef _Recorder r = rec
    x_arr = np.array(x0, dtype=np.float64)
    y_arr = np.array(y0, dtype=np.float64)
    cdef double[::1] x = x_arr, y = y_arr
    cdef double[::1] xh = np.empty(n), yh = np.empty(m)
    cdef double[::1] gx = np.empty(n), gy = np.empty(m)
    cdef double[::1] hx = np.empty(n), hy = np.empty(m)
    cdef double[::1] wx = np.empty(n), wy = np.empty(m)
    cdef double[::1] buf = np.empty(max(n, m))
    cdef double phi
    cdef Py_ssize_t t = 0
    cdef bint converged = False, done

    _matvec(Av, &y[0], &gx[0], 1.0)
    _rmatvec(Av, &x[0], &gy[0], -1.0)
    phi = -_vmin(&gy[0], m) - _vmin(&gx[0], n)
    r.add(0, phi, &x[0], &y[0], n, m)
    if early_stop and phi <= eps:
        return (x_arr, y_arr, 0, phi, *rec.arrays(), True)

    while t < max_iters:
        t += 1
        for k in range(n):
            wx[k] = x[k] - eta * gx[k]
        for k in range(m):
            wy[k] = y[k] - eta * gy[k]
        _project(&wx[0], &xh[0], n, &buf[0])
        _project(&wy[0], &yh[0], m, &buf[0])
        _matvec(Av, &yh[0], &hx[0], 1.0)
        _rmatvec(Av, &xh[0], &hy[0], -1.0)
        for k in range(n):
            wx[k] = x[k] - eta * hx[k]
        for k in range(m):
            wy[k] = y[k] - eta * hy[k]
        _project(&wx[0], &x[0], n, &buf[0])
        _project(&wy[0], &y[0], m, &buf[0])
        _matvec(Av, &y[0], &gx[0], 1.0)
        _rmatvec(Av, &x[0], &gy[0], -1.0)
        phi = -_vmin(&gy[0], m) - _vmin(&gx[0], n)
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            r.add(t, phi, &x[0], &y[0], n, m)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x_arr, y_arr, t, phi, *rec.arrays(), converged)


cdef void _softmax(const double* logits, double* out, Py_ssize_t d) noexcept nogil:
    # logits are already max-shifted (max == 0)
    cdef Py_ssize_t k
    cdef double s = 0.0, w
    for k in range(d):
        w = logits[k]
        if w < LOG_FLOOR:
            w = LOG_FLOOR
        out[k] = exp(w)
        s += out[k]
    for k in range(d):
        out[k] /= s


def run_omwu(A, double eta, double eps, Py_ssize_t max_iters,
             Py_ssize_t record_every, bint early_stop, xs=None, ys=None):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t n = Av.shape[0], m = Av.shape[1], k
    rec = _Recorder(max_iters, record_every, xs, ys)
    cdef _Recorder r = rec
    x_arr = np.full(n, 1.0 / n)
    y_arr = np.full(m, 1.0 / m)
    cdef double[::1] x = x_arr, y = y_arr
    cdef double[::1] lx = np.zeros(n), ly = np.zeros(m)
    cdef double[::1] g = np.empty(n), h = np.empty(m)
    cdef double[::1] gp = np.empty(n), hp = np.empty(m)
    cdef double phi, mx
    cdef Py_ssize_t t = 0
    cdef bint converged = False, done, finite

    _matvec(Av, &y[0], &g[0], 1.0)
    _rmatvec(Av, &x[0], &h[0], 1.0)
    for k in range(n):
        gp[k] = g[k]
    for k in range(m):
        hp[k] = h[k]
    phi = _vmax(&h[0], m) - _vmin(&g[0], n)
    r.add(0, phi, &x[0], &y[0], n, m)
    if early_stop and phi <= eps:
        return (x_arr, y_arr, 0, phi, *rec.arrays(), True)

    while t < max_iters:
        t += 1
        for k in range(n):
            lx[k] += -2.0 * eta * g[k] + eta * gp[k]
        for k in range(m):
            ly[k] += 2.0 * eta * h[k] - eta * hp[k]
        mx = _vmax(&lx[0], n)
        for k in range(n):
            lx[k] -= mx
        mx = _vmax(&ly[0], m)
        for k in range(m):
            ly[k] -= mx
        finite = True
        for k in range(n):
            finite = finite and isfinite(lx[k])
        for k in range(m):
            finite = finite and isfinite(ly[k])
        if not finite:
            raise OverflowError(t)
        _softmax(&lx[0], &x[0], n)
        _softmax(&ly[0], &y[0], m)
        for k in range(n):
            gp[k] = g[k]
        for k in range(m):
            hp[k] = h[k]
        _matvec(Av, &y[0], &g[0], 1.0)
        _rmatvec(Av, &x[0], &h[0], 1.0)
        phi = _vmax(&h[0], m) - _vmin(&g[0], n)
        done = early_stop and phi <= eps
        if done or t % record_every == 0 or t == max_iters:
            r.add(t, phi, &x[0], &y[0], n, m)
        if done:
            converged = True
            break
    if not early_stop:
        converged = phi <= eps
    return (x_arr, y_arr, t, phi, *rec.arrays(), converged)


cdef void _oper(const double[:, ::1] A, const double* w, double* out,
                Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    # out = (A w_y, -A^T w_x)
    _matvec(A, w + n, out, 1.0)
    _rmatvec(A, w, out + n, -1.0)


cdef void _proj_joint(const double* w, double* out, Py_ssize_t n, Py_ssize_t m,
                      double* buf) noexcept nogil:
    _project(w, out, n, buf)
    _project(w + n, out + n, m, buf)


def smoothing(A, x0, y0, double eps, double lip, Py_ssize_t cap):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t n = Av.shape[0], m = Av.shape[1], d = n + m, k
    cdef double eta = eps / 2.0
    cdef double step = eta / (lip * lip)
    z0_arr = np.concatenate([np.asarray(x0, dtype=np.float64), np.asarray(y0, dtype=np.float64)])
    z_arr = z0_arr.copy()
    cdef double[::1] z0 = z0_arr, z = z_arr
    cdef double[::1] zh = z0_arr.copy(), acc = np.zeros(d)
    cdef double[::1] u = np.empty(d), zs = np.empty(d), fu = np.empty(d)
    cdef double[::1] grad = np.empty(d), w = np.empty(d)
    cdef double[::1] g = np.empty(n), h = np.empty(m)
    cdef double[::1] buf = np.empty(max(n, m))
    cdef double a, b, phi
    cdef Py_ssize_t t

    for t in range(cap):
        a = 2.0 / (t + 2.0)
        b = t / (t + 2.0)
        for k in range(d):
            u[k] = a * zh[k] + b * z[k]
        _oper(Av, &u[0], &fu[0], n, m)
        for k in range(d):
            w[k] = u[k] - fu[k] / eta
        _proj_joint(&w[0], &zs[0], n, m, &buf[0])
        _oper(Av, &zs[0], &grad[0], n, m)
        for k in range(d):
            grad[k] = grad[k] - eta * (u[k] - zs[k])
        for k in range(d):
            w[k] = u[k] - step * grad[k]
        _proj_joint(&w[0], &z[0], n, m, &buf[0])
        _rmatvec(Av, &z[0], &h[0], 1.0)
        _matvec(Av, &z[n], &g[0], 1.0)
        phi = _vmax(&h[0], m) - _vmin(&g[0], n)
        if phi < eps:
            return z_arr[:n].copy(), z_arr[n:].copy(), t + 1, True
        for k in range(d):
            acc[k] += 0.5 * (t + 1.0) * grad[k]
        for k in range(d):
            w[k] = z0[k] - step * acc[k]
        _proj_joint(&w[0], &zh[0], n, m, &buf[0])
    return z_arr[:n].copy(), z_arr[n:].copy(), cap, False
