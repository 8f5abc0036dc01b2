# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled gate-application kernels.

Amplitude vectors are flat complex128 arrays of length ``2**m``; qubit ``q``
is bit ``m - 1 - q`` of the flat index (qubit 0 is the most significant bit).
A density matrix on ``n`` qubits is handled as a vector on ``2n`` qubits:
row qubits first, column qubits second.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def apply_1q(cplx[::1] vec, cplx[:, ::1] u, int q, int m):
    cdef Py_ssize_t dim = vec.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (m - 1 - q)
    cdef Py_ssize_t i, i0, i1
    cdef cplx a0, a1
    cdef cplx u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(dim):
        if i & stride:
            continue
        i0 = i
        i1 = i | stride
        a0 = vec[i0]
        a1 = vec[i1]
        out[i0] = u00 * a0 + u01 * a1
        out[i1] = u10 * a0 + u11 * a1
    return out_arr


def apply_2q(cplx[::1] vec, cplx[:, ::1] u, int q0, int q1, int m):
    cdef Py_ssize_t dim = vec.shape[0]
    cdef Py_ssize_t s0 = (<Py_ssize_t>1) << (m - 1 - q0)
    cdef Py_ssize_t s1 = (<Py_ssize_t>1) << (m - 1 - q1)
    cdef Py_ssize_t i, r, c
    cdef Py_ssize_t idx[4]
    cdef cplx amp[4]
    cdef cplx acc
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(dim):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        for r in range(4):
            amp[r] = vec[idx[r]]
        for r in range(4):
            acc = 0
            for c in range(4):
                acc = acc + u[r, c] * amp[c]
            out[idx[r]] = acc
    return out_arr


def depolarize(cplx[::1] vec, int n, qubits, double p):
    """Replace the listed qubits by the maximally mixed state with weight p."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t mask = 0
    cdef int k = 0
    cdef Py_ssize_t r, c, sub, rr, cc, s
    cdef Py_ssize_t nsub
    cdef cplx acc
    cdef double keep = 1.0 - p
    cdef double share
    for q in qubits:
        mask |= (<Py_ssize_t>1) << (n - 1 - <int>q)
        k += 1
    nsub = (<Py_ssize_t>1) << k
    share = p / nsub
    cdef Py_ssize_t[64] offsets
    # enumerate every assignment of the masked bits
    s = 0
    for sub in range(dim):
        if (sub & ~mask) == 0:
            offsets[s] = sub
            s += 1
    out_arr = np.empty(dim * dim, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for r in range(dim):
        for c in range(dim):
            acc = keep * vec[r * dim + c]
            if (r & mask) == (c & mask):
                rr = r & ~mask
                cc = c & ~mask
                for s in range(nsub):
                    acc = acc + share * vec[(rr | offsets[s]) * dim + (cc | offsets[s])]
            out[r * dim + c] = acc
    return out_arr
