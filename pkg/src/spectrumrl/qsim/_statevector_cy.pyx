# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels (default backend).

Same contract as ``_statevector_py``: dense complex128 statevectors, qubit k
mapped to bit k of the basis index. The parameter-shift sweep reuses circuit
prefixes, so differentiating rotation gate g costs one shifted gate plus the
suffix g+1..end instead of a full re-run.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from libc.string cimport memcpy

cnp.import_array()

NAME = "cython"

cdef enum:
    K_RX = 0
    K_RY = 1
    K_RZ = 2
    K_CZ = 3

KIND_RX, KIND_RY, KIND_RZ, KIND_CZ = K_RX, K_RY, K_RZ, K_CZ

ctypedef double complex cplx

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef double HALF_PI = 1.5707963267948966


cdef inline void _gate(cplx* st, int n_qubits, int kind, int target,
                       int control, double angle) noexcept nogil:
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t lo = (<Py_ssize_t>1) << target
    cdef Py_ssize_t block = lo << 1
    cdef Py_ssize_t base, off, i0, i1
    cdef double c, s
    cdef cplx a, b, ph
    if kind == K_CZ:
        for i0 in range(dim):
            if ((i0 >> target) & 1) and ((i0 >> control) & 1):
                st[i0] = -st[i0]
        return
    c = cos(0.5 * angle)
    s = sin(0.5 * angle)
    if kind == K_RX:
        base = 0
        while base < dim:
            for off in range(lo):
                i0 = base + off
                i1 = i0 + lo
                a = st[i0]
                b = st[i1]
                st[i0] = c * a - 1j * (s * b)
                st[i1] = c * b - 1j * (s * a)
            base += block
    elif kind == K_RY:
        base = 0
        while base < dim:
            for off in range(lo):
                i0 = base + off
                i1 = i0 + lo
                a = st[i0]
                b = st[i1]
                st[i0] = c * a - s * b
                st[i1] = c * b + s * a
            base += block
    else:  # K_RZ
        ph = c - 1j * s
        base = 0
        while base < dim:
            for off in range(lo):
                i0 = base + off
                i1 = i0 + lo
                st[i0] = ph * st[i0]
                st[i1] = (c + 1j * s) * st[i1]
            base += block


cdef inline void _run(cplx* st, int n_qubits, Py_ssize_t n_gates,
                      const int* kinds, const int* targets, const int* controls,
                      const double* angles, Py_ssize_t start) noexcept nogil:
    cdef Py_ssize_t g
    for g in range(start, n_gates):
        _gate(st, n_qubits, kinds[g], targets[g], controls[g], angles[g])


cdef inline void _expectations(const cplx* st, Py_ssize_t dim,
                               const unsigned long long* masks,
                               Py_ssize_t n_masks, double* out) noexcept nogil:
    cdef Py_ssize_t i, m
    cdef double p, acc
    for m in range(n_masks):
        acc = 0.0
        for i in range(dim):
            p = st[i].real * st[i].real + st[i].imag * st[i].imag
            if __builtin_popcountll((<unsigned long long>i) & masks[m]) & 1:
                acc -= p
            else:
                acc += p
        out[m] = acc


def apply_ops(cnp.ndarray[cplx, ndim=1] amps, int n_qubits,
              kinds, targets, controls, angles):
    """In-place gate sequence on a single (2**n,) statevector."""
    cdef cnp.ndarray[int, ndim=1] k = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] t = np.ascontiguousarray(targets, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] c = np.ascontiguousarray(controls, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=1] a = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n_gates = k.shape[0]
    if not amps.flags.c_contiguous:
        raise ValueError("amplitudes must be C-contiguous")
    with nogil:
        _run(<cplx*> amps.data, n_qubits, n_gates,
             <int*> k.data, <int*> t.data, <int*> c.data, <double*> a.data, 0)


def zprod_expectations(cnp.ndarray[cplx, ndim=1] amps, int n_qubits, masks):
    """Expectation of each Z-product observable (bitmask of measured qubits)."""
    cdef cnp.ndarray[unsigned long long, ndim=1] mk = \
        np.ascontiguousarray(masks, dtype=np.uint64)
    cdef Py_ssize_t n_masks = mk.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_masks, dtype=np.float64)
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    with nogil:
        _expectations(<cplx*> amps.data, dim, <unsigned long long*> mk.data,
                      n_masks, <double*> out.data)
    return out


def run_batch_expect(int n_qubits, kinds, targets, controls, angles_mat, masks):
    """Run one circuit per row of ``angles_mat`` from |0...0> and return the
    (batch, n_masks) matrix of Z-product expectations."""
    cdef cnp.ndarray[int, ndim=1] k = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] t = np.ascontiguousarray(targets, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] c = np.ascontiguousarray(controls, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=2] ang = \
        np.ascontiguousarray(np.atleast_2d(angles_mat), dtype=np.float64)
    cdef cnp.ndarray[unsigned long long, ndim=1] mk = \
        np.ascontiguousarray(masks, dtype=np.uint64)
    cdef Py_ssize_t n_gates = k.shape[0]
    cdef Py_ssize_t batch = ang.shape[0]
    cdef Py_ssize_t n_masks = mk.shape[0]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef cnp.ndarray[double, ndim=2] out = np.empty((batch, n_masks),
                                                    dtype=np.float64)
    cdef cnp.ndarray[cplx, ndim=1] scratch = np.empty(dim, dtype=np.complex128)
    cdef cplx* st = <cplx*> scratch.data
    cdef Py_ssize_t b, i
    with nogil:
        for b in range(batch):
            for i in range(dim):
                st[i] = 0.0
            st[0] = 1.0
            _run(st, n_qubits, n_gates, <int*> k.data, <int*> t.data,
                 <int*> c.data, <double*> ang.data + b * n_gates, 0)
            _expectations(st, dim, <unsigned long long*> mk.data, n_masks,
                          <double*> out.data + b * n_masks)
    return out


def shift_jacobian_batch(int n_qubits, kinds, targets, controls, angles_mat,
                         rot_positions, masks):
    """Parameter-shift derivatives of every Z-product expectation with respect
    to the angle of every rotation gate listed in ``rot_positions``.

    Returns (n_states, n_rot, n_masks) with entries (E(+pi/2) - E(-pi/2)) / 2.
    ``rot_positions`` must be sorted ascending.
    """
    cdef cnp.ndarray[int, ndim=1] k = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] t = np.ascontiguousarray(targets, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] c = np.ascontiguousarray(controls, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=2] ang = \
        np.ascontiguousarray(np.atleast_2d(angles_mat), dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1] rp = \
        np.ascontiguousarray(rot_positions, dtype=np.int64)
    cdef cnp.ndarray[unsigned long long, ndim=1] mk = \
        np.ascontiguousarray(masks, dtype=np.uint64)
    cdef Py_ssize_t n_gates = k.shape[0]
    cdef Py_ssize_t n_states = ang.shape[0]
    cdef Py_ssize_t n_rot = rp.shape[0]
    cdef Py_ssize_t n_masks = mk.shape[0]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t r
    for r in range(1, n_rot):
        if rp[r] <= rp[r - 1]:
            raise ValueError("rot_positions must be strictly increasing")
    for r in range(n_rot):
        if k[rp[r]] == K_CZ:
            raise ValueError("rot_positions must index rotation gates")

    cdef cnp.ndarray[double, ndim=3] out = np.empty((n_states, n_rot, n_masks),
                                                    dtype=np.float64)
    # state immediately before each differentiated gate, shared by both shifts
    cdef cnp.ndarray[cplx, ndim=2] prefix = np.empty((n_rot, dim),
                                                     dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] work = np.empty(dim, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] eplus = np.empty(n_masks, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] eminus = np.empty(n_masks, dtype=np.float64)
    cdef cplx* pre = <cplx*> prefix.data
    cdef cplx* st = <cplx*> work.data
    cdef double* ep = <double*> eplus.data
    cdef double* em = <double*> eminus.data
    cdef int* kp = <int*> k.data
    cdef int* tp = <int*> t.data
    cdef int* cp = <int*> c.data
    cdef long long* rpp = <long long*> rp.data
    cdef unsigned long long* mkp = <unsigned long long*> mk.data
    cdef double* op = <double*> out.data
    cdef double* angp
    cdef Py_ssize_t s, g, i, m, pos
    with nogil:
        for s in range(n_states):
            angp = <double*> ang.data + s * n_gates
            for i in range(dim):
                st[i] = 0.0
            st[0] = 1.0
            r = 0
            for g in range(n_gates):
                if r < n_rot and rpp[r] == g:
                    memcpy(pre + r * dim, st, dim * sizeof(cplx))
                    r += 1
                _gate(st, n_qubits, kp[g], tp[g], cp[g], angp[g])
            for r in range(n_rot):
                pos = rpp[r]
                memcpy(st, pre + r * dim, dim * sizeof(cplx))
                _gate(st, n_qubits, kp[pos], tp[pos], cp[pos],
                      angp[pos] + HALF_PI)
                _run(st, n_qubits, n_gates, kp, tp, cp, angp, pos + 1)
                _expectations(st, dim, mkp, n_masks, ep)
                memcpy(st, pre + r * dim, dim * sizeof(cplx))
                _gate(st, n_qubits, kp[pos], tp[pos], cp[pos],
                      angp[pos] - HALF_PI)
                _run(st, n_qubits, n_gates, kp, tp, cp, angp, pos + 1)
                _expectations(st, dim, mkp, n_masks, em)
                for m in range(n_masks):
                    op[(s * n_rot + r) * n_masks + m] = 0.5 * (ep[m] - em[m])
    return out
