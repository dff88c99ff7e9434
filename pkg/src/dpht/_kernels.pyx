# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch ranking kernels.

One pass per replicate: sort an index/value pair vector, then accumulate
rank sums (grouped case) or signed midrank sums (paired case). Matches
dpht._kernels_py bit for bit; see that module for the exactness argument.
"""

import numpy as np

cimport numpy as cnp
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.pair cimport pair
from libcpp.vector cimport vector

cnp.import_array()


def group_rank_sums(values, sizes):
    """Per-replicate rank sums by group for a (z, n) matrix of pooled samples."""
    cdef double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef Py_ssize_t z = v.shape[0]
    cdef Py_ssize_t n = v.shape[1]
    cdef Py_ssize_t g = sz.shape[0]
    cdef Py_ssize_t row, col, k, gi

    group_of_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] group_of = group_of_arr
    col = 0
    for gi in range(g):
        for k in range(sz[gi]):
            group_of[col] = gi
            col += 1
    if col != n:
        raise ValueError("group sizes do not sum to the column count")

    out_arr = np.zeros((z, g), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef vector[pair[double, Py_ssize_t]] buf
    buf.resize(n)
    for row in range(z):
        for col in range(n):
            buf[col] = pair[double, Py_ssize_t](v[row, col], col)
        cpp_sort(buf.begin(), buf.end())
        for k in range(n):
            out[row, group_of[buf[k].second]] += <double> (k + 1)
    return out_arr


def signed_rank_sums(d):
    """Per-replicate Pratt signed-rank sums for a (z, n) matrix of differences."""
    cdef double[:, ::1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t z = dd.shape[0]
    cdef Py_ssize_t n = dd.shape[1]
    cdef Py_ssize_t row, col, i, j, k
    cdef double w, midrank, val

    out_arr = np.empty(z, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef vector[pair[double, Py_ssize_t]] buf
    buf.resize(n)
    for row in range(z):
        for col in range(n):
            val = dd[row, col]
            buf[col] = pair[double, Py_ssize_t]((val if val >= 0 else -val), col)
        cpp_sort(buf.begin(), buf.end())
        w = 0.0
        i = 0
        while i < n:
            j = i
            while j + 1 < n and buf[j + 1].first == buf[i].first:
                j += 1
            midrank = 0.5 * <double> ((i + 1) + (j + 1))
            for k in range(i, j + 1):
                val = dd[row, buf[k].second]
                if val > 0:
                    w += midrank
                elif val < 0:
                    w -= midrank
            i = j + 1
        out[row] = w
    return out_arr
