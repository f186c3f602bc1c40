# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core.

Every kernel mirrors its counterpart in ``pure.py`` expression for
expression (and is compiled with -ffp-contract=off), so the two backends
are bitwise interchangeable.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

DEF LEAF_BLOCK = 1024
BLOCK = LEAF_BLOCK


cdef double _block_tree(const double* a, Py_ssize_t n) noexcept nogil:
    """Balanced pairwise sum of one zero-padded leaf block."""
    cdef double buf[LEAF_BLOCK]
    cdef Py_ssize_t i, half = LEAF_BLOCK
    for i in range(n):
        buf[i] = a[i]
    for i in range(n, LEAF_BLOCK):
        buf[i] = 0.0
    while half > 1:
        half = half // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
    return buf[0]


def block_sums(cnp.ndarray[cnp.float64_t, ndim=1] a, Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(stop - start)
    cdef Py_ssize_t b, lo, hi
    for b in range(start, stop):
        lo = b * LEAF_BLOCK
        hi = min(lo + LEAF_BLOCK, n)
        out[b - start] = _block_tree(&a[lo], hi - lo)
    return out


def combine_block_sums(cnp.ndarray[cnp.float64_t, ndim=1] sums):
    cdef Py_ssize_t n = sums.shape[0], m = 1, i, half
    while m < n:
        m *= 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.zeros(m)
    for i in range(n):
        buf[i] = sums[i]
    half = m
    while half > 1:
        half = half // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
    return float(buf[0])


def pairwise_sum(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.shape[0] == 0:
        return 0.0
    nblocks = (a.shape[0] + LEAF_BLOCK - 1) // LEAF_BLOCK
    return combine_block_sums(block_sums(a, 0, nblocks))


def laplacian(cnp.ndarray[cnp.float64_t, ndim=2] p, double dx, double dy):
    cdef Py_ssize_t nx = p.shape[0] - 2, ny = p.shape[1] - 2, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double dx2 = dx * dx, dy2 = dy * dy, c, tx, ty
    for i in range(nx):
        for j in range(ny):
            c = p[i + 1, j + 1]
            tx = (p[i + 2, j + 1] + p[i, j + 1] - 2.0 * c) / dx2
            ty = (p[i + 1, j + 2] + p[i + 1, j] - 2.0 * c) / dy2
            out[i, j] = tx + ty
    return out


def ddx(cnp.ndarray[cnp.float64_t, ndim=2] p, double dx):
    cdef Py_ssize_t nx = p.shape[0] - 2, ny = p.shape[1] - 2, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double twodx = 2.0 * dx
    for i in range(nx):
        for j in range(ny):
            out[i, j] = (p[i + 2, j + 1] - p[i, j + 1]) / twodx
    return out


def ddy(cnp.ndarray[cnp.float64_t, ndim=2] p, double dy):
    cdef Py_ssize_t nx = p.shape[0] - 2, ny = p.shape[1] - 2, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double twody = 2.0 * dy
    for i in range(nx):
        for j in range(ny):
            out[i, j] = (p[i + 1, j + 2] - p[i + 1, j]) / twody
    return out


cdef inline double _minmod(double a, double b) noexcept nogil:
    if a * b <= 0.0:
        return 0.0
    if a < 0.0:
        return a if a > b else b
    return a if a < b else b


def muscl_div_x(cnp.ndarray[cnp.float64_t, ndim=2] phi,
                cnp.ndarray[cnp.float64_t, ndim=2] uf, double dx):
    cdef Py_ssize_t nx = phi.shape[0] - 4, ny = phi.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double sL, sR, left, right, u, fprev, fcur
    for j in range(ny):
        # face i-1/2 of interior cell i sits between padded cells i+1, i+2
        for i in range(nx + 1):
            sL = _minmod(phi[i + 1, j] - phi[i, j], phi[i + 2, j] - phi[i + 1, j])
            sR = _minmod(phi[i + 2, j] - phi[i + 1, j], phi[i + 3, j] - phi[i + 2, j])
            left = phi[i + 1, j] + 0.5 * sL
            right = phi[i + 2, j] - 0.5 * sR
            u = uf[i, j]
            fcur = u * left if u >= 0.0 else u * right
            if i > 0:
                out[i - 1, j] = (fcur - fprev) / dx
            fprev = fcur
    return out


def muscl_div_y(cnp.ndarray[cnp.float64_t, ndim=2] phi,
                cnp.ndarray[cnp.float64_t, ndim=2] vf, double dy):
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1] - 4, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double sL, sR, left, right, v, fprev, fcur
    for i in range(nx):
        for j in range(ny + 1):
            sL = _minmod(phi[i, j + 1] - phi[i, j], phi[i, j + 2] - phi[i, j + 1])
            sR = _minmod(phi[i, j + 2] - phi[i, j + 1], phi[i, j + 3] - phi[i, j + 2])
            left = phi[i, j + 1] + 0.5 * sL
            right = phi[i, j + 2] - 0.5 * sR
            v = vf[i, j]
            fcur = v * left if v >= 0.0 else v * right
            if j > 0:
                out[i, j - 1] = (fcur - fprev) / dy
            fprev = fcur
    return out
