# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled skeleton walk / occupation kernel (see _walk_py.py for the reference)."""

from libc.math cimport pow

cdef int STATUS_RUNNING = 0
cdef int STATUS_LEVEL = 1
cdef int STATUS_TIME = 2
cdef int STATUS_BUDGET = 3


def walk_block(const double[::1] incr, double[::1] state, double[::1] occ,
               double dt_base, double alpha, double accel_window, double x_lo,
               double width, Py_ssize_t j0, double stop_occ, double t_end,
               double max_steps):
    cdef double x = state[0]
    cdef double t = state[1]
    cdef double outside = state[2]
    cdef double steps = state[3]
    cdef Py_ssize_t nbins = occ.shape[0]
    cdef Py_ssize_t n = incr.shape[0]
    cdef Py_ssize_t k = 0
    cdef Py_ssize_t j
    cdef double fj
    cdef int status = STATUS_RUNNING
    cdef double ax, m, dt
    cdef bint last
    with nogil:
        while k < n:
            if steps >= max_steps:
                status = STATUS_BUDGET
                break
            ax = x if x >= 0.0 else -x
            if ax > accel_window:
                m = ax / accel_window
                dt = dt_base * pow(m, alpha)
            else:
                m = 1.0
                dt = dt_base
            last = False
            if t + dt >= t_end:
                dt = t_end - t
                last = True
            fj = (x - x_lo) / width
            if fj >= 0.0 and fj < nbins:
                j = <Py_ssize_t>fj  # truncation == floor for fj >= 0
                occ[j] += dt
            else:
                j = -1
                outside += dt
            t += dt
            if last:
                t = t_end
                status = STATUS_TIME
                break
            if j == j0 and stop_occ >= 0.0 and occ[j0] > stop_occ:
                status = STATUS_LEVEL
                break
            x += m * incr[k]
            steps += 1.0
            k += 1
    state[0] = x
    state[1] = t
    state[2] = outside
    state[3] = steps
    return status, k
