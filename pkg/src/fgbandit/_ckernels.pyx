# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled UCB-N round loop. Must stay operation-for-operation identical to _pykernels."""
from libc.math cimport log, sqrt


def ucbn_rounds(const long long[::1] indptr, const long long[::1] indices,
                const double[::1] means, double sigma, const double[:, ::1] noise,
                double[::1] counts, double[::1] sums, long long t0, long long[::1] arms):
    cdef Py_ssize_t k = means.shape[0]
    cdef Py_ssize_t rounds = noise.shape[0]
    cdef Py_ssize_t r, i, p, j, a
    cdef double lt, idx, best
    for r in range(rounds):
        a = -1
        for i in range(k):
            if counts[i] == 0.0:
                a = i
                break
        if a < 0:
            lt = log(<double>(t0 + r))
            best = sums[0] / counts[0] + sqrt(2.0 * lt / counts[0])
            a = 0
            for i in range(1, k):
                idx = sums[i] / counts[i] + sqrt(2.0 * lt / counts[i])
                if idx > best:
                    best = idx
                    a = i
        arms[r] = a
        for p in range(indptr[a], indptr[a + 1]):
            j = indices[p]
            counts[j] += 1.0
            sums[j] += means[j] + sigma * noise[r, j]
