# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch kernel: tally a placed edge graph against a body for many motions.

Semantics are identical to :mod:`kinemetrica._kernels_py`; see that module
for the piece-counting rule.
"""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY

cdef enum:
    KIND_SHELL = 0
    KIND_BOX = 1
    KIND_POLYGON = 2

cdef double TANGENCY_TOL = 1e-12


cdef inline bint _contains(int kind, const double* x, Py_ssize_t n,
                           const double[::1] params, const double[:, ::1] poly) noexcept nogil:
    cdef Py_ssize_t k, i, j, m
    cdef double r2, xc, x0, y0, x1, y1
    cdef bint inside
    if kind == KIND_SHELL:
        r2 = 0.0
        for k in range(n):
            r2 += x[k] * x[k]
        return params[0] * params[0] <= r2 and r2 <= params[1] * params[1]
    if kind == KIND_BOX:
        for k in range(n):
            if fabs(x[k]) > params[k]:
                return False
        return True
    inside = False
    m = poly.shape[0]
    for i in range(m):
        j = i + 1 if i + 1 < m else 0
        x0 = poly[i, 0]
        y0 = poly[i, 1]
        x1 = poly[j, 0]
        y1 = poly[j, 1]
        if (y0 > x[1]) != (y1 > x[1]):
            xc = x0 + (x[1] - y0) * (x1 - x0) / (y1 - y0)
            if x[0] < xc:
                inside = not inside
    return inside


cdef inline int _sphere_roots(const double* a, const double* d, Py_ssize_t n,
                              double r, double* out, int k) noexcept nogil:
    cdef double aa = 0.0, bb = 0.0, cc = 0.0, disc, sq, t
    cdef Py_ssize_t i
    for i in range(n):
        aa += d[i] * d[i]
        bb += a[i] * d[i]
        cc += a[i] * a[i]
    cc -= r * r
    disc = bb * bb - aa * cc
    if disc <= TANGENCY_TOL * aa * r * r:
        return k
    sq = sqrt(disc)
    t = (-bb - sq) / aa
    if 0.0 < t < 1.0:
        out[k] = t
        k += 1
    t = (-bb + sq) / aa
    if 0.0 < t < 1.0:
        out[k] = t
        k += 1
    return k


cdef inline int _crossings(int kind, const double* a, const double* b, double* d, Py_ssize_t n,
                           const double[::1] params, const double[:, ::1] poly,
                           double* out) noexcept nogil:
    cdef Py_ssize_t i, j, m
    cdef int k = 0
    cdef double t_in, t_out, t1, t2, tmp, denom, ex, ey, wx, wy, t, u, dn, en
    for i in range(n):
        d[i] = b[i] - a[i]
    if kind == KIND_SHELL:
        k = _sphere_roots(a, d, n, params[1], out, k)
        if params[0] > 0.0:
            k = _sphere_roots(a, d, n, params[0], out, k)
        return k
    if kind == KIND_BOX:
        t_in = -INFINITY
        t_out = INFINITY
        for i in range(n):
            if d[i] == 0.0:
                if fabs(a[i]) > params[i]:
                    return 0
                continue
            t1 = (-params[i] - a[i]) / d[i]
            t2 = (params[i] - a[i]) / d[i]
            if t1 > t2:
                tmp = t1
                t1 = t2
                t2 = tmp
            if t1 > t_in:
                t_in = t1
            if t2 < t_out:
                t_out = t2
        if t_out - t_in <= TANGENCY_TOL:
            return 0
        if 0.0 < t_in < 1.0:
            out[k] = t_in
            k += 1
        if 0.0 < t_out < 1.0:
            out[k] = t_out
            k += 1
        return k
    m = poly.shape[0]
    dn = sqrt(d[0] * d[0] + d[1] * d[1])
    for i in range(m):
        j = i + 1 if i + 1 < m else 0
        ex = poly[j, 0] - poly[i, 0]
        ey = poly[j, 1] - poly[i, 1]
        denom = d[0] * ey - d[1] * ex
        en = sqrt(ex * ex + ey * ey)
        if fabs(denom) <= TANGENCY_TOL * dn * en:
            continue
        wx = poly[i, 0] - a[0]
        wy = poly[i, 1] - a[1]
        t = (wx * ey - wy * ex) / denom
        u = (wx * d[1] - wy * d[0]) / denom
        if 0.0 < t < 1.0 and 0.0 <= u < 1.0:
            out[k] = t
            k += 1
    return k


cdef inline void _sort(double* t, int k) noexcept nogil:
    cdef int i, j
    cdef double x
    for i in range(1, k):
        x = t[i]
        j = i - 1
        while j >= 0 and t[j] > x:
            t[j + 1] = t[j]
            j -= 1
        t[j + 1] = x


def tally_graph(const double[:, ::1] verts, const long long[:, ::1] edges,
                const double[:, :, ::1] rots, const double[:, ::1] trans,
                int kind, const double[::1] params, const double[:, ::1] poly,
                const long long[::1] block_start, const double[:, ::1] block_center,
                const double[::1] block_radius, double body_radius):
    """Per-motion (inside_length, chi, crossings, n_inside_vertices) for a placed graph."""
    cdef Py_ssize_t M = rots.shape[0]
    cdef Py_ssize_t n = verts.shape[1]
    cdef Py_ssize_t V = verts.shape[0]
    cdef Py_ssize_t NB = block_start.shape[0] - 1
    cdef Py_ssize_t m, bi, ei, i, j, v, w, side
    cdef int k, s, jj
    cdef double qq, acc, dlen, t0, cull, seglen
    cdef long long full, interior, nin, ncross, chi

    inside_len_a = np.zeros(M)
    chi_a = np.zeros(M, dtype=np.int64)
    cross_a = np.zeros(M, dtype=np.int64)
    nin_a = np.zeros(M, dtype=np.int64)
    cdef double[::1] inside_len = inside_len_a
    cdef long long[::1] chi_o = chi_a
    cdef long long[::1] cross_o = cross_a
    cdef long long[::1] nin_o = nin_a

    placed_a = np.empty((V, n))
    stamp_a = np.full(V, -1, dtype=np.int64)
    vin_a = np.zeros(V, dtype=np.int8)
    tbuf_a = np.empty(max(4, poly.shape[0]) + 1)
    dbuf_a = np.empty(n)
    cdef double[:, ::1] placed = placed_a
    cdef long long[::1] stamp = stamp_a
    cdef signed char[::1] vin = vin_a
    cdef double[::1] tbuf = tbuf_a
    cdef double[::1] dbuf = dbuf_a

    with nogil:
        for m in range(M):
            acc = 0.0
            full = 0
            interior = 0
            nin = 0
            ncross = 0
            for bi in range(NB):
                cull = block_radius[bi] + body_radius
                qq = 0.0
                for i in range(n):
                    t0 = trans[m, i]
                    for j in range(n):
                        t0 = t0 + rots[m, i, j] * block_center[bi, j]
                    qq += t0 * t0
                if qq > cull * cull:
                    continue
                for ei in range(block_start[bi], block_start[bi + 1]):
                    for side in range(2):
                        v = edges[ei, side]
                        if stamp[v] != m:
                            stamp[v] = m
                            for i in range(n):
                                t0 = trans[m, i]
                                for j in range(n):
                                    t0 = t0 + rots[m, i, j] * verts[v, j]
                                placed[v, i] = t0
                            vin[v] = _contains(kind, &placed[v, 0], n, params, poly)
                            nin += vin[v]
                    v = edges[ei, 0]
                    w = edges[ei, 1]
                    k = _crossings(kind, &placed[v, 0], &placed[w, 0], &dbuf[0], n,
                                   params, poly, &tbuf[0])
                    s = vin[v]
                    if k == 0:
                        if s:
                            full += 1
                            seglen = 0.0
                            for i in range(n):
                                seglen += dbuf[i] * dbuf[i]
                            acc += sqrt(seglen)
                        continue
                    _sort(&tbuf[0], k)
                    ncross += k
                    if s:
                        interior += (k - 1) // 2
                    else:
                        interior += k // 2
                    seglen = 0.0
                    for i in range(n):
                        seglen += dbuf[i] * dbuf[i]
                    seglen = sqrt(seglen)
                    dlen = 0.0
                    t0 = 0.0
                    for jj in range(k + 1):
                        if (s ^ (jj & 1)):
                            dlen += (tbuf[jj] if jj < k else 1.0) - t0
                        if jj < k:
                            t0 = tbuf[jj]
                    acc += dlen * seglen
            inside_len[m] = acc
            chi_o[m] = nin - full + interior
            cross_o[m] = ncross
            nin_o[m] = nin
    return inside_len_a, chi_a, cross_a, nin_a
