# cython: language_level=3
"""Compiled split-search kernel.

Mirrors split_py.best_split_sorted exactly: sequential left-to-right
accumulation, identical gain expression, first strictly-greater maximum.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def best_split_sorted(
    cnp.ndarray[cnp.float64_t, ndim=1] values,
    cnp.ndarray[cnp.float64_t, ndim=1] grad,
    cnp.ndarray[cnp.float64_t, ndim=1] hess,
    double l2_lambda,
    double gamma,
):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2:
        return None
    cdef double total_g = 0.0
    cdef double total_h = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total_g = total_g + grad[i]
        total_h = total_h + hess[i]
    cdef double parent = total_g * total_g / (total_h + l2_lambda)
    cdef double gl = 0.0
    cdef double hl = 0.0
    cdef double gr, hr, gain
    cdef double best_gain = -np.inf
    cdef Py_ssize_t best_pos = -1
    for i in range(n - 1):
        gl = gl + grad[i]
        hl = hl + hess[i]
        if values[i + 1] == values[i]:
            continue
        gr = total_g - gl
        hr = total_h - hl
        gain = 0.5 * (gl * gl / (hl + l2_lambda) + gr * gr / (hr + l2_lambda) - parent) - gamma
        if gain > best_gain:
            best_gain = gain
            best_pos = i
    if best_pos < 0 or not best_gain > 0.0:
        return None
    cdef double threshold = (values[best_pos] + values[best_pos + 1]) / 2.0
    return best_gain, threshold, best_pos + 1
