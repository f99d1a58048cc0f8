# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: dense forward pass, single-pixel occlusion sweep, direct DFT.

Summation order is fixed so that ``occlusion_q`` reproduces ``forward`` on every
occluded observation bit for bit. The first layer accumulates one partial sum per
image row, then adds the row partials in row order; deeper layers accumulate
left to right.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()


cdef void _dense(const double[:, ::1] w, const double[::1] b, const double[::1] x,
                 double[::1] out, bint relu) noexcept nogil:
    cdef Py_ssize_t h, k
    cdef double acc
    for h in range(w.shape[0]):
        acc = 0.0
        for k in range(w.shape[1]):
            acc += w[h, k] * x[k]
        acc = acc + b[h]
        if relu and not acc > 0.0:
            acc = 0.0
        out[h] = acc


cdef void _row_partials(const double[:, ::1] w, const double[::1] x, Py_ssize_t height,
                        Py_ssize_t width, double[:, ::1] partials) noexcept nogil:
    cdef Py_ssize_t h, i, j, base
    cdef double part
    for h in range(w.shape[0]):
        for i in range(height):
            base = i * width
            part = 0.0
            for j in range(width):
                part += w[h, base + j] * x[base + j]
            partials[h, i] = part


cdef inline double _finish_first(const double[:, ::1] partials, Py_ssize_t h, Py_ssize_t height,
                                 Py_ssize_t skip_row, double replacement, double bias,
                                 bint relu) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(height):
        if i == skip_row:
            acc += replacement
        else:
            acc += partials[h, i]
    acc = acc + bias
    if relu and not acc > 0.0:
        acc = 0.0
    return acc


def _unpack(list weights, list biases, relu_flags):
    ws = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
    bs = [np.ascontiguousarray(b, dtype=np.float64) for b in biases]
    flags = [bool(f) for f in relu_flags]
    return ws, bs, flags


cdef _tail(list ws, list bs, list flags, double[::1] a):
    """Layers after the first, evaluated left to right."""
    cdef Py_ssize_t layer
    cdef double[::1] cur = a
    cdef double[::1] nxt
    for layer in range(1, len(ws)):
        nxt = np.empty(ws[layer].shape[0])
        _dense(ws[layer], bs[layer], cur, nxt, flags[layer])
        cur = nxt
    return cur


def forward(list weights, list biases, relu_flags, x, Py_ssize_t height, Py_ssize_t width):
    ws, bs, flags = _unpack(weights, biases, relu_flags)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[:, ::1] w0 = ws[0]
    cdef double[::1] b0 = bs[0]
    cdef Py_ssize_t n_hidden = w0.shape[0]
    cdef double[:, ::1] partials = np.empty((n_hidden, height))
    cdef double[::1] a = np.empty(n_hidden)
    cdef Py_ssize_t h
    cdef bint relu0 = flags[0]
    _row_partials(w0, xv, height, width, partials)
    for h in range(n_hidden):
        a[h] = _finish_first(partials, h, height, -1, 0.0, b0[h], relu0)
    return np.asarray(_tail(ws, bs, flags, a)).copy()


def occlusion_q(list weights, list biases, relu_flags, x, Py_ssize_t height, Py_ssize_t width):
    """Q-values of every single-pixel-zeroed copy of ``x``; row p is pixel p (row-major)."""
    ws, bs, flags = _unpack(weights, biases, relu_flags)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[:, ::1] w0 = ws[0]
    cdef double[::1] b0 = bs[0]
    cdef Py_ssize_t n_hidden = w0.shape[0]
    cdef Py_ssize_t n_pix = height * width
    cdef Py_ssize_t n_out = ws[len(ws) - 1].shape[0]
    cdef double[:, ::1] partials = np.empty((n_hidden, height))
    cdef double[::1] a = np.empty(n_hidden)
    cdef double[:, ::1] out = np.empty((n_pix, n_out))
    cdef double[::1] q
    cdef Py_ssize_t p, i, j, jj, h, base, k
    cdef double part, xval
    cdef bint relu0 = flags[0]
    _row_partials(w0, xv, height, width, partials)
    for p in range(n_pix):
        i = p // width
        j = p % width
        base = i * width
        for h in range(n_hidden):
            part = 0.0
            for jj in range(width):
                xval = 0.0 if jj == j else xv[base + jj]
                part += w0[h, base + jj] * xval
            a[h] = _finish_first(partials, h, height, i, part, b0[h], relu0)
        q = _tail(ws, bs, flags, a)
        for k in range(n_out):
            out[p, k] = q[k]
    return np.asarray(out)


def dft2_direct(field):
    """Unnormalized, unshifted 2D DFT by direct summation, rows then columns.

    Phases are reduced modulo the axis length before indexing the twiddle
    tables, so no angle is ever computed from a large argument.
    """
    cdef double[:, ::1] x = np.ascontiguousarray(field, dtype=np.float64)
    cdef Py_ssize_t H = x.shape[0]
    cdef Py_ssize_t W = x.shape[1]
    cdef double[::1] cw = np.empty(W)
    cdef double[::1] sw = np.empty(W)
    cdef double[::1] ch = np.empty(H)
    cdef double[::1] sh = np.empty(H)
    cdef double[:, ::1] gre = np.empty((H, W))
    cdef double[:, ::1] gim = np.empty((H, W))
    cdef double[:, ::1] re = np.empty((H, W))
    cdef double[:, ::1] im = np.empty((H, W))
    cdef Py_ssize_t k, u, v, m, n, idx
    cdef double sr, si, val
    for k in range(W):
        cw[k] = cos(2.0 * M_PI * k / W)
        sw[k] = sin(2.0 * M_PI * k / W)
    for k in range(H):
        ch[k] = cos(2.0 * M_PI * k / H)
        sh[k] = sin(2.0 * M_PI * k / H)
    with nogil:
        # along each row: G[m, v] = sum_n x[m, n] exp(-2 pi i v n / W)
        for m in range(H):
            for v in range(W):
                sr = 0.0
                si = 0.0
                for n in range(W):
                    idx = (v * n) % W
                    val = x[m, n]
                    sr += val * cw[idx]
                    si -= val * sw[idx]
                gre[m, v] = sr
                gim[m, v] = si
        # along each column: F[u, v] = sum_m G[m, v] exp(-2 pi i u m / H)
        for u in range(H):
            for v in range(W):
                sr = 0.0
                si = 0.0
                for m in range(H):
                    idx = (u * m) % H
                    sr += gre[m, v] * ch[idx] + gim[m, v] * sh[idx]
                    si += gim[m, v] * ch[idx] - gre[m, v] * sh[idx]
                re[u, v] = sr
                im[u, v] = si
    return np.asarray(re) + 1j * np.asarray(im)
