# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot loop. Must stay step-for-step identical to ``_pure.run_chunk``."""

from libc.stdint cimport int64_t


def run_chunk(const double[:, ::1] u, int64_t[::1] state, const double[::1] params,
              int64_t t0, int64_t slots, int64_t nb,
              double[:, ::1] batch_sums, int64_t[::1] counts):
    cdef Py_ssize_t i, m = u.shape[0]
    cdef int64_t x = state[0], xhat = state[1], h = state[2], age = state[3]
    cdef int64_t t, b, a, delivered
    cdef double th0 = params[0], th1 = params[1], th2 = params[2]
    cdef double p1r = params[3], p0p = params[4]
    cdef double px0 = params[5], px1 = params[6], ph0 = params[7], ph1 = params[8]
    cdef double c1 = params[9], c2 = params[10], c3 = params[11]
    cdef double cost
    with nogil:
        for i in range(m):
            if u[i, 0] < th0:
                a = 0
            elif u[i, 0] < th1:
                a = 1
            elif u[i, 0] < th2:
                a = 2
            else:
                a = 3
            delivered = 0
            if a == 1:
                if h == 1 and u[i, 1] < p1r:
                    delivered = 1
            elif a == 3:
                if h == 1 or u[i, 1] < p0p:
                    delivered = 1
            if delivered:
                xhat = x
                age = x
            else:
                age = age + 1
            t = t0 + i
            if t >= 0:
                b = t * nb // slots
                if a == 1:
                    cost = c1
                elif a == 2:
                    cost = c2
                elif a == 3:
                    cost = c3
                else:
                    cost = 0.0
                batch_sums[b, 0] += 1.0 if x != xhat else 0.0
                batch_sums[b, 1] += <double>age
                batch_sums[b, 2] += cost
                batch_sums[b, 3] += <double>delivered
                batch_sums[b, 4] += 1.0 if xhat == 0 else 0.0
                counts[a] += 1
            if x == 0:
                if u[i, 2] < px0:
                    x = 1
            elif u[i, 2] < px1:
                x = 0
            if h == 0:
                if u[i, 3] < ph0:
                    h = 1
            elif u[i, 3] < ph1:
                h = 0
    state[0] = x
    state[1] = xhat
    state[2] = h
    state[3] = age
