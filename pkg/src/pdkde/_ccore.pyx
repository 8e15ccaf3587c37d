# distutils: language = c++
"""Compiled versions of the hot kernels in ``_pycore``.

Same signatures and results as the pure-Python module.
"""
from libc.math cimport fabs
from libcpp.vector cimport vector

import numpy as np


cdef void _sym_diff(vector[int]& x, vector[int]& y, vector[int]& out) noexcept nogil:
    cdef size_t i = 0, j = 0
    out.clear()
    while i < x.size() and j < y.size():
        if x[i] < y[j]:
            out.push_back(x[i])
            i += 1
        elif y[j] < x[i]:
            out.push_back(y[j])
            j += 1
        else:
            i += 1
            j += 1
    while i < x.size():
        out.push_back(x[i])
        i += 1
    while j < y.size():
        out.push_back(y[j])
        j += 1


def reduce_boundary(boundaries):
    cdef Py_ssize_t n = len(boundaries)
    cdef vector[vector[int]] cols
    cdef vector[int] owner
    cdef vector[int] tmp
    cdef Py_ssize_t j
    cdef int piv, other
    cols.resize(n)
    owner.assign(n, -1)
    low = np.full(n, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] low_v = low
    for j in range(n):
        for f in sorted(boundaries[j]):
            cols[j].push_back(<int>f)
        while cols[j].size() > 0:
            piv = cols[j].back()
            other = owner[piv]
            if other < 0:
                owner[piv] = <int>j
                low_v[j] = piv
                break
            _sym_diff(cols[j], cols[other], tmp)
            cols[j].swap(tmp)
    return low


cdef bint _augment(int u, int m, int n, const double[:, ::1] cheb,
                   const double[::1] half_a, const double[::1] half_b,
                   double eps, int* match_right, char* seen) noexcept nogil:
    cdef int v
    if u < m:
        for v in range(n):
            if not seen[v] and cheb[u, v] <= eps:
                seen[v] = 1
                if match_right[v] < 0 or _augment(match_right[v], m, n, cheb, half_a, half_b, eps, match_right, seen):
                    match_right[v] = u
                    return True
        v = n + u
        if not seen[v] and half_a[u] <= eps:
            seen[v] = 1
            if match_right[v] < 0 or _augment(match_right[v], m, n, cheb, half_a, half_b, eps, match_right, seen):
                match_right[v] = u
                return True
        return False
    v = u - m
    if not seen[v] and half_b[v] <= eps:
        seen[v] = 1
        if match_right[v] < 0 or _augment(match_right[v], m, n, cheb, half_a, half_b, eps, match_right, seen):
            match_right[v] = u
            return True
    for v in range(n, n + m):
        if not seen[v]:
            seen[v] = 1
            if match_right[v] < 0 or _augment(match_right[v], m, n, cheb, half_a, half_b, eps, match_right, seen):
                match_right[v] = u
                return True
    return False


cdef bint _feasible(int m, int n, const double[:, ::1] cheb, const double[::1] half_a,
                    const double[::1] half_b, double eps,
                    vector[int]& match_right, vector[char]& seen) noexcept nogil:
    cdef int u, size = m + n
    match_right.assign(size, -1)
    for u in range(size):
        seen.assign(size, 0)
        if not _augment(u, m, n, cheb, half_a, half_b, eps, match_right.data(), seen.data()):
            return False
    return True


def bottleneck_distance(a, b):
    a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 2)
    cdef int m = a.shape[0], n = b.shape[0]
    if m + n == 0:
        return 0.0
    cdef const double[:, ::1] av = a
    cdef const double[:, ::1] bv = b
    cheb = np.empty((m, max(n, 1)), dtype=np.float64)
    half_a = np.empty(max(m, 1), dtype=np.float64)
    half_b = np.empty(max(n, 1), dtype=np.float64)
    cdef double[:, ::1] cv = cheb
    cdef double[::1] ha = half_a
    cdef double[::1] hb = half_b
    cdef int i, j
    cdef double x, y
    for i in range(m):
        ha[i] = (av[i, 1] - av[i, 0]) / 2.0
        for j in range(n):
            x = fabs(av[i, 0] - bv[j, 0])
            y = fabs(av[i, 1] - bv[j, 1])
            cv[i, j] = x if x > y else y
    for j in range(n):
        hb[j] = (bv[j, 1] - bv[j, 0]) / 2.0
    values = np.unique(np.concatenate([half_a[:m], half_b[:n], cheb[:, :n].ravel()]))
    cdef const double[::1] vals = values
    cdef int lo = 0, hi = values.shape[0] - 1, mid
    cdef vector[int] match_right
    cdef vector[char] seen
    with nogil:
        while lo < hi:
            mid = (lo + hi) // 2
            if _feasible(m, n, cv, ha, hb, vals[mid], match_right, seen):
                hi = mid
            else:
                lo = mid + 1
    return float(vals[lo])
