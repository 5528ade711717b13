"""NumPy implementation of the table kernels (pure-Python backend).

This module defines the reference semantics for the two hot kernels:

* ``interp_batch``      -- batched table lookup: exact at nodes, local 4-point
                           cubic between nodes, closed-form initial segment
                           below the table anchor.
* ``advance_self_full`` -- method-of-steps integration of a self-delayed
                           equation (u^p y)' = c*p*u^(p-1) * y(u-d) on a fixed
                           grid, one Simpson (degenerate RK4) update per step.

The compiled backend ``sievekit._kernels`` mirrors every floating-point
operation of this file in the same order, so the two backends produce
bit-identical tables.  When editing either file keep the expression shapes
in sync:

* integer powers by repeated multiplication (never libm pow),
* cumulative sums strictly sequential, seeded with the running transform Y,
* interpolation weights evaluated with the exact expressions below.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

# Initial-segment kind codes (shared with the compiled backend).
INIT_ZERO = 0
INIT_CONST = 1
INIT_POWER = 2   # a * u^e, integer e
INIT_RECIP = 3   # a / u


def pow_int(x, e: int):
    """x**e for integer e by repeated multiplication.

    |e| is small here (at most dimension+1); repeated multiplication keeps
    the rounding sequence identical across backends.
    """
    if e == 0:
        if isinstance(x, np.ndarray):
            return np.ones_like(x)
        return 1.0
    r = x
    for _ in range(abs(e) - 1):
        r = r * x
    if e > 0:
        return r
    return 1.0 / r


def init_eval(kind: int, a: float, e: int, u):
    """Evaluate a closed-form initial segment at u (scalar or array)."""
    if kind == INIT_ZERO:
        if isinstance(u, np.ndarray):
            return np.zeros_like(u)
        return 0.0
    if kind == INIT_CONST:
        if isinstance(u, np.ndarray):
            return np.full_like(u, a)
        return a
    if kind == INIT_POWER:
        return a * pow_int(u, e)
    if kind == INIT_RECIP:
        return a / u
    raise ValueError(f"unknown initial-segment kind {kind}")


def interp_batch(values, nvalid, u_min, h, kind, a, e, uq, kink_stride=0):
    """Evaluate a tabulated function at the points uq.

    values[0:nvalid] are the node values of the grid u_min + i*h.  Queries
    below u_min use the closed-form initial segment; queries that hit a node
    exactly return the stored value bit-for-bit; anything else is local
    4-point cubic interpolation with the stencil clamped to [0, nvalid-1].

    kink_stride > 0 marks derivative kinks at node indices that are
    multiples of it (delayed equations propagate the initial-segment splice
    at delay multiples); stencils are then kept inside one smooth piece so
    the kink does not degrade the interpolation order.

    The caller guarantees uq <= u_min + (nvalid-1)*h (+ node tolerance) and
    that the initial segment covers every query below u_min.
    """
    if nvalid < 4:
        raise ValueError("interp_batch needs at least 4 valid nodes")
    uq = np.asarray(uq, dtype=np.float64)
    out = np.empty_like(uq)
    t = (uq - u_min) / h

    below = t < 0.0
    if below.any():
        out[below] = init_eval(kind, a, e, uq[below])

    inb = ~below
    if inb.any():
        ti = t[inb]
        ui = uq[inb]
        b = np.floor(ti)
        bi = b.astype(np.int64)
        # Exact node hit: recompose the node coordinate with the same
        # expression the grid uses, so the float comparison is exact.
        node = ui == u_min + b * h
        res = np.empty_like(ti)
        if node.any():
            res[node] = values[np.minimum(bi[node], nvalid - 1)]
        mid = ~node
        if mid.any():
            bm = bi[mid]
            lo = bm - 1
            if kink_stride > 0:
                piece = bm // kink_stride
                np.maximum(lo, piece * kink_stride, out=lo)
                np.minimum(lo, (piece + 1) * kink_stride - 3, out=lo)
            np.clip(lo, 0, nvalid - 4, out=lo)
            tl = ti[mid] - lo
            v0 = values[lo]
            v1 = values[lo + 1]
            v2 = values[lo + 2]
            v3 = values[lo + 3]
            w0 = -(tl - 1.0) * (tl - 2.0) * (tl - 3.0) / 6.0
            w1 = tl * (tl - 2.0) * (tl - 3.0) / 2.0
            w2 = -tl * (tl - 1.0) * (tl - 3.0) / 2.0
            w3 = tl * (tl - 1.0) * (tl - 2.0) / 6.0
            res[mid] = ((w0 * v0 + w1 * v1) + w2 * v2) + w3 * v3
        out[inb] = res
    return out


def advance_self_full(values, n_steps, u_min, h, d_steps, p, cp, kind, a, e):
    """Fill values[1:n_steps+1] for a self-delayed problem.

    values has length n_steps+1; values[0] is seeded from the initial
    segment here.  Integration runs on Y(u) = u^p y(u), whose derivative
    c*p*u^(p-1)*y(u-d) needs only history, advancing in segments of one
    delay so every delayed sample is already known.  Stage samples at grid
    nodes are read directly; mid-step samples use the 4-point cubic with
    the stencil clamped to the filled prefix.
    """
    y0 = init_eval(kind, a, e, u_min)
    values[0] = y0
    Y = pow_int(u_min, p) * y0

    i = 0
    while i < n_steps:
        m = min(d_steps, n_steps - i)
        base = i - d_steps

        # Delayed samples at the m+1 step endpoints (exact node indices).
        idx = base + np.arange(m + 1, dtype=np.int64)
        gn = np.empty(m + 1, dtype=np.float64)
        neg = idx < 0
        if neg.any():
            gn[neg] = init_eval(kind, a, e, u_min + idx[neg] * h)
        pos = ~neg
        if pos.any():
            gn[pos] = values[idx[pos]]

        # Delayed samples at the m mid-steps (index position base+j+0.5).
        pidx = idx[:m]
        gm = np.empty(m, dtype=np.float64)
        bel = pidx < 0
        if bel.any():
            gm[bel] = init_eval(kind, a, e, u_min + (pidx[bel] + 0.5) * h)
        inb = ~bel
        if inb.any():
            pin = pidx[inb]
            lo = pin - 1
            # keep the stencil inside the smooth piece between kink nodes
            piece = pin // d_steps
            np.maximum(lo, piece * d_steps, out=lo)
            np.minimum(lo, (piece + 1) * d_steps - 3, out=lo)
            np.clip(lo, 0, i - 3, out=lo)
            tl = (pin + 0.5) - lo
            v0 = values[lo]
            v1 = values[lo + 1]
            v2 = values[lo + 2]
            v3 = values[lo + 3]
            w0 = -(tl - 1.0) * (tl - 2.0) * (tl - 3.0) / 6.0
            w1 = tl * (tl - 2.0) * (tl - 3.0) / 2.0
            w2 = -tl * (tl - 1.0) * (tl - 3.0) / 2.0
            w3 = tl * (tl - 1.0) * (tl - 2.0) / 6.0
            gm[inb] = ((w0 * v0 + w1 * v1) + w2 * v2) + w3 * v3

        # Simpson update of Y per step, then back to y = Y / u^p.
        jn = i + np.arange(m + 1, dtype=np.int64)
        xn = u_min + jn * h
        xm = u_min + (jn[:m] + 0.5) * h
        phin = cp * pow_int(xn, p - 1) * gn
        phim = cp * pow_int(xm, p - 1) * gm
        incs = (h / 6.0) * ((phin[:m] + 4.0 * phim) + phin[1:])
        Yarr = np.cumsum(np.concatenate(([Y], incs)))
        values[i + 1 : i + m + 1] = Yarr[1:] / pow_int(xn[1:], p)
        Y = Yarr[m]
        i += m
