# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled table kernels.

Mirrors sievekit._kernels_py operation-for-operation: integer powers by
repeated multiplication, strictly sequential accumulation of the running
transform Y, and identical interpolation expressions, so the two backends
produce bit-identical tables.  Keep the expression shapes in sync with the
pure module when editing.
"""

from libc.math cimport floor

import numpy as np

BACKEND_NAME = "compiled"

INIT_ZERO = 0
INIT_CONST = 1
INIT_POWER = 2
INIT_RECIP = 3


cdef inline double _pow_int(double x, long e) noexcept nogil:
    cdef double r
    cdef long i, n
    if e == 0:
        return 1.0
    r = x
    n = e if e > 0 else -e
    for i in range(n - 1):
        r = r * x
    if e > 0:
        return r
    return 1.0 / r


cdef inline double _init_eval(int kind, double a, long e, double u) noexcept nogil:
    # kind codes: 0 zero, 1 const, 2 power a*u^e, 3 recip a/u
    if kind == 0:
        return 0.0
    if kind == 1:
        return a
    if kind == 2:
        return a * _pow_int(u, e)
    return a / u


def interp_batch(values_obj, nvalid_obj, double u_min, double h,
                 int kind, double a, long e, uq_obj, Py_ssize_t kink_stride=0):
    """See sievekit._kernels_py.interp_batch."""
    cdef const double[::1] values = np.ascontiguousarray(values_obj, dtype=np.float64)
    cdef const double[::1] uq = np.ascontiguousarray(uq_obj, dtype=np.float64)
    cdef Py_ssize_t nvalid = nvalid_obj
    cdef Py_ssize_t q = uq.shape[0]
    if nvalid < 4:
        raise ValueError("interp_batch needs at least 4 valid nodes")
    out_arr = np.empty(q, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, bi, lo, piece
    cdef double u, t, b, tl, w0, w1, w2, w3, v0, v1, v2, v3
    for i in range(q):
        u = uq[i]
        t = (u - u_min) / h
        if t < 0.0:
            out[i] = _init_eval(kind, a, e, u)
            continue
        b = floor(t)
        if u == u_min + b * h:
            bi = <Py_ssize_t> b
            if bi > nvalid - 1:
                bi = nvalid - 1
            out[i] = values[bi]
            continue
        bi = <Py_ssize_t> b
        lo = bi - 1
        if kink_stride > 0:
            piece = bi // kink_stride
            if lo < piece * kink_stride:
                lo = piece * kink_stride
            if lo > (piece + 1) * kink_stride - 3:
                lo = (piece + 1) * kink_stride - 3
        if lo < 0:
            lo = 0
        if lo > nvalid - 4:
            lo = nvalid - 4
        tl = t - <double> lo
        v0 = values[lo]
        v1 = values[lo + 1]
        v2 = values[lo + 2]
        v3 = values[lo + 3]
        w0 = -(tl - 1.0) * (tl - 2.0) * (tl - 3.0) / 6.0
        w1 = tl * (tl - 2.0) * (tl - 3.0) / 2.0
        w2 = -tl * (tl - 1.0) * (tl - 3.0) / 2.0
        w3 = tl * (tl - 1.0) * (tl - 2.0) / 6.0
        out[i] = ((w0 * v0 + w1 * v1) + w2 * v2) + w3 * v3
    return out_arr


def advance_self_full(values_obj, Py_ssize_t n_steps, double u_min, double h,
                      Py_ssize_t d_steps, long p, double cp,
                      int kind, double a, long e):
    """See sievekit._kernels_py.advance_self_full."""
    cdef double[::1] values = values_obj
    cdef double Y, y0, x0, x1, xm, g0, g1, gm, phi0, phi1, phim, inc
    cdef double tl, w0, w1, w2, w3
    cdef Py_ssize_t i, m, j, idx, lo, piece
    cdef long pm1 = p - 1

    y0 = _init_eval(kind, a, e, u_min)
    values[0] = y0
    Y = _pow_int(u_min, p) * y0

    i = 0
    while i < n_steps:
        m = n_steps - i
        if m > d_steps:
            m = d_steps
        # phi at the segment's first node
        idx = i - d_steps
        if idx < 0:
            g0 = _init_eval(kind, a, e, u_min + (<double> idx) * h)
        else:
            g0 = values[idx]
        x0 = u_min + (<double> i) * h
        phi0 = cp * _pow_int(x0, pm1) * g0
        for j in range(m):
            # delayed sample at the step's end node (exact node index)
            idx = i - d_steps + j + 1
            if idx < 0:
                g1 = _init_eval(kind, a, e, u_min + (<double> idx) * h)
            else:
                g1 = values[idx]
            # delayed sample at the mid-step (index position idx-1+0.5)
            idx = i - d_steps + j
            if idx < 0:
                gm = _init_eval(kind, a, e, u_min + ((<double> idx) + 0.5) * h)
            else:
                lo = idx - 1
                # keep the stencil inside the smooth piece between kinks
                piece = idx // d_steps
                if lo < piece * d_steps:
                    lo = piece * d_steps
                if lo > (piece + 1) * d_steps - 3:
                    lo = (piece + 1) * d_steps - 3
                if lo < 0:
                    lo = 0
                if lo > i - 3:
                    lo = i - 3
                tl = ((<double> idx) + 0.5) - <double> lo
                w0 = -(tl - 1.0) * (tl - 2.0) * (tl - 3.0) / 6.0
                w1 = tl * (tl - 2.0) * (tl - 3.0) / 2.0
                w2 = -tl * (tl - 1.0) * (tl - 3.0) / 2.0
                w3 = tl * (tl - 1.0) * (tl - 2.0) / 6.0
                gm = ((w0 * values[lo] + w1 * values[lo + 1])
                      + w2 * values[lo + 2]) + w3 * values[lo + 3]
            x1 = u_min + (<double> (i + j + 1)) * h
            xm = u_min + ((<double> (i + j)) + 0.5) * h
            phi1 = cp * _pow_int(x1, pm1) * g1
            phim = cp * _pow_int(xm, pm1) * gm
            inc = (h / 6.0) * ((phi0 + 4.0 * phim) + phi1)
            Y = Y + inc
            values[i + j + 1] = Y / _pow_int(x1, p)
            phi0 = phi1
        i += m
