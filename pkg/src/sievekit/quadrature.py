"""Adaptive Simpson quadrature over piecewise-smooth panels.

The integrand is a vectorized callable; refinement is level-synchronous so
each depth costs one batched evaluation.  Accepted intervals contribute the
Richardson-extrapolated value; the reported error estimate is the sum of
|S_fine - S_coarse| / 15 over accepted intervals (conservative: the
extrapolated value is one order better).
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9,
                     breakpoints=(), max_depth: int = 48) -> tuple[float, float]:
    """Integrate f over [a, b] splitting at interior breakpoints.

    f maps an ndarray of abscissae to an ndarray of values.  breakpoints
    are candidate kink locations; those strictly inside (a, b) start their
    own panel so the adaptive refinement only ever sees smooth pieces.
    Returns (value, error_estimate).
    """
    if not b > a:
        raise ParameterError(f"integration range [{a}, {b}] is empty")
    pts = [a]
    for x in sorted(set(float(x) for x in breakpoints)):
        if a + 1e-13 < x < b - 1e-13 and x - pts[-1] > 1e-13:
            pts.append(x)
    pts.append(b)
    edges = np.asarray(pts, dtype=np.float64)

    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    mid = 0.5 * (lo + hi)
    vals = f(np.concatenate([lo, mid, np.array([b])]))
    n = lo.size
    flo = vals[:n]
    fmid = vals[n : 2 * n]
    fhi = np.empty(n, dtype=np.float64)
    fhi[: n - 1] = flo[1:]
    fhi[n - 1] = vals[2 * n]
    S = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    # per-panel tolerance proportional to width
    tols = tol * (hi - lo) / (b - a)

    total = 0.0
    err = 0.0
    depth = 0
    while lo.size:
        if depth >= max_depth:
            # accept whatever is left at its current estimate
            total += float(np.sum(S))
            err += float(np.sum(np.abs(S))) * 1e-15 + 1e-300
            break
        mid = 0.5 * (lo + hi)
        mL = 0.5 * (lo + mid)
        mR = 0.5 * (mid + hi)
        fv = f(np.concatenate([mL, mR]))
        fmL = fv[: lo.size]
        fmR = fv[lo.size :]
        h2 = 0.5 * (hi - lo)
        SL = h2 / 6.0 * (flo + 4.0 * fmL + fmid)
        SR = h2 / 6.0 * (fmid + 4.0 * fmR + fhi)
        S2 = SL + SR
        delta = (S2 - S) / 15.0
        done = (np.abs(delta) <= tols) | (h2 <= 1e-14 * np.maximum(np.abs(lo), 1.0))
        if done.any():
            total += float(np.sum(S2[done] + delta[done]))
            err += float(np.sum(np.abs(delta[done])))
        keep = ~done
        if not keep.any():
            break
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        fmid = np.concatenate([fmL[keep], fmR[keep]])
        S = np.concatenate([SL[keep], SR[keep]])
        tols = np.concatenate([tols[keep] * 0.5, tols[keep] * 0.5])
        depth += 1
    return total, err


def find_sign_changes(g, a: float, b: float, scan_resolution: float = 1e-3,
                      bisect_tol: float = 1e-12) -> list[float]:
    """Locate every sign change of the vectorized g on [a, b].

    Scans at the given resolution, then bisects each bracketed change to
    bisect_tol in the abscissa.  Multiple crossings are supported.
    """
    n = max(int(np.ceil((b - a) / scan_resolution)), 8)
    xs = np.linspace(a, b, n + 1)
    ys = g(xs)
    sgn = np.sign(ys)
    roots = []
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    for i in idx:
        lo, hi = xs[i], xs[i + 1]
        ylo = ys[i]
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            ym = float(g(np.array([mid]))[0])
            if ym == 0.0:
                lo = hi = mid
                break
            if (ym > 0) == (ylo > 0):
                lo, ylo = mid, ym
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    # exact zeros at scan points count as crossings too
    for i in np.nonzero(sgn == 0)[0]:
        roots.append(float(xs[i]))
    return sorted(roots)
