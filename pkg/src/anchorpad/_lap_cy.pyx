# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assignment kernel: shortest-augmenting-path with potentials.

Same algorithm as _lap_py.solve_square; kept in lockstep so the two backends
return bit-identical matchings and duals.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def solve_square(object cost):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] c = np.ascontiguousarray(
        cost, dtype=np.float64
    )
    cdef Py_ssize_t n = c.shape[0]
    if c.shape[1] != n:
        raise ValueError("solve_square expects a square matrix")

    u_arr = np.zeros(n + 1, dtype=np.float64)
    v_arr = np.zeros(n + 1, dtype=np.float64)
    p_arr = np.zeros(n + 1, dtype=np.intp)
    way_arr = np.zeros(n + 1, dtype=np.intp)
    minv_arr = np.empty(n + 1, dtype=np.float64)
    used_arr = np.zeros(n + 1, dtype=np.uint8)

    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t[::1] p = p_arr
    cdef Py_ssize_t[::1] way = way_arr
    cdef double[::1] minv = minv_arr
    cdef unsigned char[::1] used = used_arr
    cdef double[:, ::1] a = c

    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur
    cdef double INF = np.inf

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if not used[j]:
                    cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    col_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] col = col_arr
    for j in range(1, n + 1):
        col[p[j] - 1] = j - 1
    return col_arr, u_arr[1:].copy(), v_arr[1:].copy()
