# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``.

Same signatures and semantics; only summation order may differ.
"""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY

NAME = "cython"


cdef void _div(const double[:, :, ::1] p, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], i, j
    cdef double v
    for i in range(h):
        for j in range(w):
            v = 0.0
            if j < w - 1:
                v += p[0, i, j]
            if j > 0:
                v -= p[0, i, j - 1]
            if i < h - 1:
                v += p[1, i, j]
            if i > 0:
                v -= p[1, i - 1, j]
            out[i, j] = v


def grad(u):
    cdef double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t h = uv.shape[0], w = uv.shape[1], i, j
    out = np.zeros((2, h, w))
    cdef double[:, :, ::1] o = out
    with nogil:
        for i in range(h):
            for j in range(w):
                if j < w - 1:
                    o[0, i, j] = uv[i, j + 1] - uv[i, j]
                if i < h - 1:
                    o[1, i, j] = uv[i + 1, j] - uv[i, j]
    return out


def div(p):
    cdef double[:, :, ::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    out = np.empty((pv.shape[1], pv.shape[2]))
    cdef double[:, ::1] o = out
    with nogil:
        _div(pv, o)
    return out


def tv_dual_prox(g, double weight, double tau, double tol, Py_ssize_t max_iters, p):
    cdef double[:, ::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[:, :, ::1] pv = p
    cdef Py_ssize_t h = gv.shape[0], w = gv.shape[1], i, j, it = 0
    v_arr = np.empty((h, w))
    cdef double[:, ::1] v = v_arr
    cdef double inv_w = 1.0 / weight
    cdef double res = INFINITY, gx, gy, nrm, nx, ny
    with nogil:
        while it < max_iters:
            it += 1
            _div(pv, v)
            for i in range(h):
                for j in range(w):
                    v[i, j] -= gv[i, j] * inv_w
            res = 0.0
            for i in range(h):
                for j in range(w):
                    gx = v[i, j + 1] - v[i, j] if j < w - 1 else 0.0
                    gy = v[i + 1, j] - v[i, j] if i < h - 1 else 0.0
                    nrm = 1.0 + tau * sqrt(gx * gx + gy * gy)
                    nx = (pv[0, i, j] + tau * gx) / nrm
                    ny = (pv[1, i, j] + tau * gy) / nrm
                    if fabs(nx - pv[0, i, j]) > res:
                        res = fabs(nx - pv[0, i, j])
                    if fabs(ny - pv[1, i, j]) > res:
                        res = fabs(ny - pv[1, i, j])
                    pv[0, i, j] = nx
                    pv[1, i, j] = ny
            if res < tol:
                break
        _div(pv, v)
        for i in range(h):
            for j in range(w):
                v[i, j] = gv[i, j] - weight * v[i, j]
    return v_arr, it, res


def nl_grad(u, indptr, indices, sw):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const long long[::1] ip = indptr
    cdef const long long[::1] ix = indices
    cdef const double[::1] s = sw
    cdef Py_ssize_t n = ip.shape[0] - 1, x, e
    cdef double ux
    out = np.empty(ix.shape[0])
    cdef double[::1] o = out
    with nogil:
        for x in range(n):
            ux = uv[x]
            for e in range(ip[x], ip[x + 1]):
                o[e] = (uv[ix[e]] - ux) * s[e]
    return out


def nl_div(q, indptr, sw, rev):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const long long[::1] ip = indptr
    cdef const double[::1] s = sw
    cdef const long long[::1] rv = rev
    cdef Py_ssize_t n = ip.shape[0] - 1, x, e
    cdef double acc
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for x in range(n):
            acc = 0.0
            for e in range(ip[x], ip[x + 1]):
                acc = acc + s[e] * (qv[e] - qv[rv[e]])
            o[x] = acc
    return out


def window_patch_distances(padded, Py_ssize_t height, Py_ssize_t width,
                           Py_ssize_t half_patch, Py_ssize_t half_window, kernel):
    cdef const double[:, ::1] pd = np.ascontiguousarray(padded, dtype=np.float64)
    cdef const double[:, ::1] kv = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t hp = half_patch, hw = half_window
    cdef Py_ssize_t side = 2 * hw + 1, ps = 2 * hp + 1
    out = np.empty((height * width, side * side))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, c, dy, dx, yi, yj, a, b
    cdef double acc, t
    with nogil:
        for i in range(height):
            for j in range(width):
                for c in range(side * side):
                    dy = c // side - hw
                    dx = c % side - hw
                    yi = i + dy
                    yj = j + dx
                    if (dy == 0 and dx == 0) or yi < 0 or yi >= height or yj < 0 or yj >= width:
                        o[i * width + j, c] = INFINITY
                        continue
                    acc = 0.0
                    for a in range(ps):
                        for b in range(ps):
                            t = pd[i + a, j + b] - pd[yi + a, yj + b]
                            acc = acc + kv[a, b] * t * t
                    o[i * width + j, c] = acc
    return out
