# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled chart kernel; same contract as ``_chart_py.fill_chart``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def fill_chart(const cnp.int64_t[::1] order, const cnp.int64_t[::1] roots,
               const cnp.int64_t[::1] starts, const cnp.int64_t[::1] ends,
               const double[::1] span_scores, const double[:, ::1] link, double lam,
               const cnp.int64_t[::1] starts_ptr, const cnp.int64_t[::1] starts_items, Py_ssize_t n):
    cdef Py_ssize_t Q = roots.shape[0]
    best_arr = np.full(Q, -np.inf)
    back_arr = np.full((Q, n + 2), -1, dtype=np.int64)
    f_arr = np.empty(n + 2)
    cdef double[::1] best = best_arr
    cdef cnp.int64_t[:, ::1] back = back_arr
    cdef double[::1] f = f_arr
    cdef Py_ssize_t k, a, b, p, t, r, s, e, eb, lo, hi, side
    cdef double total, fp, vb, v
    for k in range(order.shape[0]):
        a = order[k]
        r = roots[a]
        s = starts[a]
        e = ends[a]
        total = span_scores[a]
        for side in range(2):
            if side == 0:
                lo = s
                hi = r - 1
            else:
                lo = r + 1
                hi = e
            if lo > hi:
                continue
            for p in range(lo, hi + 2):
                f[p] = -INFINITY
            f[lo] = 0.0
            for p in range(lo, hi + 1):
                fp = f[p]
                if fp == -INFINITY:
                    continue
                for t in range(starts_ptr[p], starts_ptr[p + 1]):
                    b = starts_items[t]
                    eb = ends[b]
                    if eb > hi:
                        continue
                    vb = best[b]
                    if vb == -INFINITY:
                        continue
                    v = fp + vb + lam * link[a, b]
                    if v > f[eb + 1]:
                        f[eb + 1] = v
                        back[a, eb + 1] = b
            total += f[hi + 1]
            if total == -INFINITY:
                break
        best[a] = total
    return best_arr, back_arr
