# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics match ``poalab._kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def winners(double[:, :, ::1] bids, int favor):
    cdef Py_ssize_t B = bids.shape[0], n = bids.shape[1], m = bids.shape[2]
    out_arr = np.empty((B, m), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    cdef Py_ssize_t b, j, i
    cdef double best, x
    cdef int arg
    with nogil:
        for b in range(B):
            for j in range(m):
                best = bids[b, 0, j]
                arg = 0
                for i in range(1, n):
                    x = bids[b, i, j]
                    if x > best:
                        best = x
                        arg = <int>i
                if favor >= 0 and arg != favor and bids[b, favor, j] == best:
                    arg = favor
                out[b, j] = arg
    return out_arr


def projection_counts(const unsigned char[:, ::1] mask, const long long[::1] proj, long long nproj):
    cdef Py_ssize_t B = mask.shape[0], m = mask.shape[1]
    out_arr = np.zeros(B, dtype=np.int64)
    cdef long long[::1] out = out_arr
    seen_arr = np.full(nproj, -1, dtype=np.int64)
    cdef long long[::1] seen = seen_arr
    cdef Py_ssize_t b, j
    cdef long long p, c
    with nogil:
        for b in range(B):
            c = 0
            for j in range(m):
                if mask[b, j]:
                    p = proj[j]
                    if seen[p] != b:
                        seen[p] = b
                        c += 1
            out[b] = c
    return out_arr


def fictitious_play(const double[:, ::1] A, const double[:, ::1] Bm,
                    const double[::1] x0, const double[::1] y0,
                    const double[::1] pa0, const double[::1] pb0, long iters):
    cdef Py_ssize_t S1 = A.shape[0], S2 = A.shape[1]
    cx_arr = np.array(x0, dtype=np.float64, copy=True)
    cy_arr = np.array(y0, dtype=np.float64, copy=True)
    pa_arr = np.array(pa0, dtype=np.float64, copy=True)
    pb_arr = np.array(pb0, dtype=np.float64, copy=True)
    cdef double[::1] cx = cx_arr
    cdef double[::1] cy = cy_arr
    cdef double[::1] pa = pa_arr
    cdef double[::1] pb = pb_arr
    cdef Py_ssize_t t, a, b, ba, bb
    cdef double best
    with nogil:
        for t in range(iters):
            ba = 0
            best = pa[0]
            for a in range(1, S1):
                if pa[a] > best:
                    best = pa[a]
                    ba = a
            bb = 0
            best = pb[0]
            for b in range(1, S2):
                if pb[b] > best:
                    best = pb[b]
                    bb = b
            cx[ba] += 1.0
            cy[bb] += 1.0
            for a in range(S1):
                pa[a] += A[a, bb]
            for b in range(S2):
                pb[b] += Bm[ba, b]
    return cx_arr / cx_arr.sum(), cy_arr / cy_arr.sum()


def best_response_dynamics(const double[:, ::1] A, const double[:, ::1] Bm,
                           long i0, long j0, long max_iter):
    cdef Py_ssize_t S1 = A.shape[0], S2 = A.shape[1]
    visited_arr = np.zeros((S1, S2), dtype=np.uint8)
    cdef unsigned char[:, ::1] visited = visited_arr
    cdef long i = i0, j = j0, t = 0, ni, nj
    cdef Py_ssize_t a, b
    cdef double best
    cdef int status = 0
    with nogil:
        while t < max_iter:
            if visited[i, j]:
                status = 2
                break
            visited[i, j] = 1
            ni = i
            best = A[i, j]
            for a in range(S1):
                if A[a, j] > best:
                    best = A[a, j]
                    ni = a
            nj = j
            best = Bm[ni, j]
            for b in range(S2):
                if Bm[ni, b] > best:
                    best = Bm[ni, b]
                    nj = b
            t += 1
            if ni == i and nj == j:
                status = 1
                break
            i = ni
            j = nj
    return i, j, status, t
