# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hot loops for the lattice-sum kernel route: punctured cyclic convolutions.

The periodised Riesz kernel acts by direct summation over all grid-point
pairs, which is O(N^{2d}); these loops are the compiled core behind
``frakolm.kernel``.  A pure-Python twin lives in ``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def convolve2(double[:, ::1] table, double[:, ::1] u):
    """Cyclic convolution out[j] = sum_d table[d] * u[j - d mod N], d=2."""
    cdef Py_ssize_t n0 = table.shape[0], n1 = table.shape[1]
    if u.shape[0] != n0 or u.shape[1] != n1:
        raise ValueError("table/field shape mismatch")
    out_arr = np.zeros((n0, n1))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j0, j1, d0, d1, i0, i1
    cdef double acc, t
    for j0 in range(n0):
        for j1 in range(n1):
            acc = 0.0
            for d0 in range(n0):
                i0 = j0 - d0
                if i0 < 0:
                    i0 += n0
                for d1 in range(n1):
                    i1 = j1 - d1
                    if i1 < 0:
                        i1 += n1
                    acc += table[d0, d1] * u[i0, i1]
            out[j0, j1] = acc
    return out_arr


def convolve3(double[:, :, ::1] table, double[:, :, ::1] u):
    """Cyclic convolution for d=3."""
    cdef Py_ssize_t n0 = table.shape[0], n1 = table.shape[1], n2 = table.shape[2]
    if u.shape[0] != n0 or u.shape[1] != n1 or u.shape[2] != n2:
        raise ValueError("table/field shape mismatch")
    out_arr = np.zeros((n0, n1, n2))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t j0, j1, j2, d0, d1, d2, i0, i1, i2
    cdef double acc
    for j0 in range(n0):
        for j1 in range(n1):
            for j2 in range(n2):
                acc = 0.0
                for d0 in range(n0):
                    i0 = j0 - d0
                    if i0 < 0:
                        i0 += n0
                    for d1 in range(n1):
                        i1 = j1 - d1
                        if i1 < 0:
                            i1 += n1
                        for d2 in range(n2):
                            i2 = j2 - d2
                            if i2 < 0:
                                i2 += n2
                            acc += table[d0, d1, d2] * u[i0, i1, i2]
                out[j0, j1, j2] = acc
    return out_arr


def convolve(table, u):
    """Dispatch on dimension; contiguous float64 inputs required."""
    if table.ndim == 2:
        return convolve2(table, u)
    if table.ndim == 3:
        return convolve3(table, u)
    raise ValueError(f"unsupported dimension {table.ndim}")
