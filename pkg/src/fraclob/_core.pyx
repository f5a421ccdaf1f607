# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the per-step loops (see _fallback for reference semantics)."""
from libc.math cimport exp, floor, NAN, isnan
from scipy.linalg.cython_blas cimport dgemv

BACKEND = "compiled"


def weighted_sum(const double[:, ::1] ring, const double[::1] w, double[::1] out):
    """out = w @ ring through BLAS dgemv (ring is row-major, so it is A^T)."""
    cdef int rows = <int>ring.shape[0], n = <int>ring.shape[1], inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef char trans = b'N'
    if rows == 0 or n == 0:
        return
    dgemv(&trans, &n, &rows, &one, <double*>&ring[0, 0], &n, <double*>&w[0], &inc,
          &zero, &out[0], &inc)


def lit_source(const double[::1] x, double centre, double kappa, double mu, double[::1] out):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double y
    for i in range(n):
        y = mu * (x[i] - centre)
        out[i] = -kappa * (y * exp(-y * y))


def uniform_update(const double[::1] H, const double[::1] prev, const double[::1] src,
                   double wl, double wr, double r, double decay, double dt,
                   double gl, double gr, double[::1] out):
    cdef Py_ssize_t i, n = H.shape[0]
    cdef double left, right
    for i in range(n):
        left = H[i - 1] if i > 0 else gl
        right = H[i + 1] if i < n - 1 else gr
        out[i] = (wl * left + wr * right) - r * H[i] + decay * prev[i] + dt * src[i]


def nonuniform_update(const double[::1] HL, const double[::1] HR, const double[::1] H,
                      const double[::1] prev, const double[::1] src,
                      double wl, double wr, double r, double decay, double dt, double[::1] out):
    cdef Py_ssize_t i, n = H.shape[0]
    for i in range(n):
        out[i] = (wl * HL[i] + wr * HR[i]) - r * H[i] + decay * prev[i] + dt * src[i]


def shifted_row(const double[::1] row, double shift, double[::1] out):
    cdef Py_ssize_t n = row.shape[0], i, k
    cdef double fb = floor(shift)
    cdef Py_ssize_t base = <Py_ssize_t>fb
    cdef double f = shift - fb
    for i in range(n):
        k = i + base
        if k < 0:
            out[i] = row[0]
        elif k > n - 1:
            out[i] = row[n - 1]
        elif f == 0.0 or k == n - 1:
            out[i] = row[k]
        elif k == 0:
            out[i] = row[0] + f * (row[1] - row[0])
        else:
            out[i] = row[k] + 0.5 * f * (row[k + 1] - row[k - 1])


cdef double _root(const double[::1] phi, double x0, double dx, Py_ssize_t k):
    cdef Py_ssize_t n = phi.shape[0], m = k + 1
    while m < n and phi[m] == 0.0:
        m += 1
    if m >= n or phi[m] > 0.0:
        return NAN
    if m == k + 1:
        return x0 + dx * k + dx * phi[k] / (phi[k] - phi[m])
    return x0 + dx * 0.5 * (k + 1 + m - 1)


def crossing_root(const double[::1] phi, double x0, double dx, Py_ssize_t k):
    return _root(phi, x0, dx, k)


def nearest_crossing(const double[::1] phi, double x0, double dx, Py_ssize_t k0):
    cdef Py_ssize_t n = phi.shape[0], d, k, s
    cdef double root
    if k0 < 0:
        k0 = 0
    if k0 > n - 2:
        k0 = n - 2
    for d in range(n):
        for s in range(2):
            if d == 0 and s == 1:
                break
            k = k0 - d if s == 0 else k0 + d
            if 0 <= k < n - 1 and phi[k] > 0.0 and phi[k + 1] <= 0.0:
                root = _root(phi, x0, dx, k)
                if not isnan(root):
                    return root
    return NAN
