"""Diamond-Halberstam-Richert sieve pair of dimension k.

Construction.  The auxiliary sigma_k solves

    sigma_k(u) = A_k u^k on (0, 2],   A_k = (2 e^gamma)^(-k) / k!,
    (u^(-k) sigma_k(u))' = -k u^(-k-1) sigma_k(u-2)   for u > 2,

and tends to 1.  The pair is

    F_k(u) = 1/sigma_k(u) on (0, alpha_k],      f_k(u) = 0 on (0, beta_k],
    (u^k F_k(u))' = k u^(k-1) f_k(u-1)          for u > alpha_k,
    (u^k f_k(u))' = k u^(k-1) F_k(u-1)          for u > beta_k,

with (alpha_k, beta_k) the unique switch points for which both functions
tend to 1.  beta_k is the sifting limit: f_k vanishes up to it and is
positive and increasing beyond.  Calibration shoots on (alpha, beta) with
residuals (F(u_max)-1, f(u_max)-1), damped Newton, finite-difference
Jacobian; results are cached on disk keyed by (k, step, u_max).

The dimension-1 pair has the classical closed forms F_1(u) = 2 e^gamma / u
on (0, 3] and f_1(u) = 2 e^gamma ln(u-1)/u on [2, 4], which this
construction reproduces with alpha_1 = beta_1 = 2; that and the headline
bound evaluation gate the transcription.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import cache as _cache
from .constants import EXP_GAMMA
from .dde import (
    DEFAULT_STEP,
    DelayProblem,
    GridSpec,
    InitialSegment,
    SolutionTable,
    TableReciprocal,
    load_table,
    save_table,
    solve_coupled,
    solve_dde,
)
from .errors import (
    CalibrationError,
    DomainError,
    ParameterError,
    TableFormatError,
)

K_MAX = 8

PAIR_HEADER = "SIEVEKIT-PAIR v1"

_NEWTON_TOL = 2.5e-7
_NEWTON_MAX_ITER = 60
_FD_DELTA = 1e-5


def _check_k(k) -> int:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ParameterError(f"sieve dimension must be an integer, got {k!r}")
    if not 1 <= k <= K_MAX:
        raise ParameterError(f"sieve dimension {k} outside supported range 1..{K_MAX}")
    return int(k)


def sigma_coefficient(k: int) -> float:
    """A_k = (2 e^gamma)^(-k) / k!, the power-law coefficient of sigma_k."""
    k = _check_k(k)
    return (2.0 * EXP_GAMMA) ** (-k) / math.factorial(k)


def _alpha_cap(k: int) -> float:
    return 4.0 * k + 10.0


def _sigma_span(k: int) -> float:
    return math.ceil(_alpha_cap(k)) + 4.0


_sigma_memo: dict[tuple, SolutionTable] = {}


def sigma_table(k: int, step: float = DEFAULT_STEP) -> SolutionTable:
    """Dense sigma_k table on [2, span] (power-law closed form below 2)."""
    k = _check_k(k)
    key = (k, step)
    tab = _sigma_memo.get(key)
    if tab is None:
        problem = DelayProblem(
            power=float(-k), delay=2.0, sign=1.0,
            initial=InitialSegment.power(sigma_coefficient(k), k, u_hi=2.0),
        )
        grid = GridSpec(2.0, _sigma_span(k), step)
        tab = solve_dde(problem, grid)
        _sigma_memo[key] = tab
    return tab


def sigma(k: int, u: float, step: float = DEFAULT_STEP) -> float:
    """sigma_k(u); closed form A_k u^k on (0,2], DDE continuation beyond."""
    if not u > 0:
        raise DomainError("sigma requires u > 0")
    return sigma_table(k, step).query(u)


@dataclass(frozen=True)
class DhrPair:
    """Calibrated sieve pair for one dimension: switch points and tables.

    F_table/f_table are anchored at alpha/beta; queries below the anchors
    come from 1/sigma_k and 0 respectively.  u_max is the calibration range
    top (both functions are within 1e-6 of 1 there).
    """

    k: int
    alpha: float
    beta: float
    F_table: SolutionTable
    f_table: SolutionTable
    sigma_table: SolutionTable
    u_max: float
    step: float

    def F_many(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if u.size and not np.all(u > 0.0):
            raise DomainError("F_k requires u > 0")
        if u.size and not np.all(u <= self.F_table.grid.u_max):
            raise DomainError(f"F_{self.k} table covers u <= {self.F_table.grid.u_max}")
        return self.F_table.query_many(u)

    def f_many(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if u.size and not np.all(u > 0.0):
            raise DomainError("f_k requires u > 0")
        if u.size and not np.all(u <= self.f_table.grid.u_max):
            raise DomainError(f"f_{self.k} table covers u <= {self.f_table.grid.u_max}")
        return self.f_table.query_many(u)

    def F(self, u: float) -> float:
        return float(self.F_many(np.array([float(u)]))[0])

    def f(self, u: float) -> float:
        return float(self.f_many(np.array([float(u)]))[0])


def _co_solve(k: int, alpha: float, beta: float, sig: SolutionTable,
              u_top: float, step: float) -> tuple[SolutionTable, SolutionTable]:
    prob_F = DelayProblem(
        power=float(k), delay=1.0, sign=1.0,
        initial=TableReciprocal(sig, u_hi=alpha),
    )
    prob_f = DelayProblem(
        power=float(k), delay=1.0, sign=1.0,
        initial=InitialSegment.zero(u_hi=beta),
    )
    return solve_coupled(prob_F, prob_f, u_top, step)


def _residual(k, alpha, beta, sig, u_eval, step):
    Ft, ft = _co_solve(k, alpha, beta, sig, u_eval + 4 * step, step)
    return (
        np.array([Ft.query(u_eval) - 1.0, ft.query(u_eval) - 1.0]),
        (Ft, ft),
    )


def _sweep_estimate(k: int, u_max: float, step: float,
                    sig: SolutionTable) -> tuple[float, float]:
    """Estimate (alpha, beta) by a backward-sweep fixed point.

    Both boundary values are pinned to 1 at u_top (the true values differ
    by a super-exponentially small amount there) and the equations are
    integrated downward -- pure quadrature, since each right-hand side only
    involves the companion function.  alpha is where the backward upper
    function crosses 1/sigma (transversally for k >= 2), beta is where the
    backward lower function reaches zero.  Iterating the two sweeps
    contracts quickly; the result seeds the Newton polish.
    """
    from . import backend

    h = step
    u_top = float(math.ceil(u_max))
    n = int(round((u_top - 2.0) / h))
    us = u_top - h * np.arange(n + 1)          # descending nodes, us[-1] = 2
    asc = us[::-1].copy()                      # ascending view for interp
    mid = us[:n] - 0.5 * h
    kk = float(k)

    sig_lo = sig.query_many(np.minimum(us, sig.grid.u_max))

    def interp_asc(vals_desc, x):
        return backend.interp_batch(
            np.ascontiguousarray(vals_desc[::-1]), n + 1, 2.0, h, 0, 0.0, 0, x
        )

    alpha = 2.0 * k + 1.0
    beta = 2.0 * k
    # crude but safe start: lower function ramps to 1 over one delay
    f_desc = np.clip((us - beta) / 1.0, 0.0, 1.0)

    def f_eval(x, f_vals, beta_cur):
        out = np.zeros_like(x)
        pos = x > beta_cur
        if pos.any():
            out[pos] = interp_asc(f_vals, x[pos])
        return out

    def F_eval(x, F_vals, alpha_cur):
        out = np.empty_like(x)
        low = x <= alpha_cur
        if low.any():
            out[low] = 1.0 / sig.query_many(x[low])
        hi = ~low
        if hi.any():
            out[hi] = interp_asc(F_vals, x[hi])
        return out

    def back_integral(g_nodes, g_mids):
        """G[j] = integral from us[j] to u_top of t^(k-1) * g(t-1) dt."""
        gn = us ** (kk - 1.0) * g_nodes
        gm = mid ** (kk - 1.0) * g_mids
        incs = (h / 6.0) * (gn[:n] + 4.0 * gm + gn[1:])
        return np.concatenate(([0.0], np.cumsum(incs)))

    def bracket_root(vals):
        """First descending index where vals turns nonnegative."""
        idx = np.nonzero(vals >= 0.0)[0]
        if idx.size == 0 or idx[0] == 0:
            return None
        return int(idx[0])

    F_desc = None
    for _ in range(400):
        # upper-function sweep using the current lower function
        G = back_integral(f_eval(us - 1.0, f_desc, beta),
                          f_eval(mid - 1.0, f_desc, beta))
        P = u_top ** kk - kk * G
        psi = P * sig_lo - us ** kk            # sign change at alpha
        j = bracket_root(psi)
        if j is None:
            raise CalibrationError(
                f"sweep for k={k} found no alpha crossing in [2, {u_top}]"
            )

        def psi_at(u, j=j, G=G):
            x = np.array([u, (u + us[j - 1]) / 2.0, us[j - 1]])
            gv = x ** (kk - 1.0) * f_eval(x - 1.0, f_desc, beta)
            seg = ((us[j - 1] - u) / 6.0) * (gv[0] + 4.0 * gv[1] + gv[2])
            P_u = P[j - 1] - kk * seg
            return P_u * sig.query(min(u, sig.grid.u_max)) - u ** kk

        lo_u, hi_u = us[j], us[j - 1]
        flo, fhi = psi[j], psi[j - 1]
        for _ in range(60):
            mid_u = 0.5 * (lo_u + hi_u)
            fm = psi_at(mid_u)
            if fm >= 0.0:
                lo_u, flo = mid_u, fm
            else:
                hi_u, fhi = mid_u, fm
        alpha_new = 0.5 * (lo_u + hi_u)
        F_desc = P / us ** kk

        # lower-function sweep using the fresh upper function
        G2 = back_integral(F_eval(us - 1.0, F_desc, alpha_new),
                           F_eval(mid - 1.0, F_desc, alpha_new))
        Q = u_top ** kk - kk * G2
        j2 = bracket_root(-Q)                  # Q decreasing through zero
        if j2 is None:
            raise CalibrationError(
                f"sweep for k={k} found no beta crossing in [2, {u_top}]"
            )

        def q_at(u, j2=j2, Q=Q):
            x = np.array([u, (u + us[j2 - 1]) / 2.0, us[j2 - 1]])
            gv = x ** (kk - 1.0) * F_eval(x - 1.0, F_desc, alpha_new)
            seg = ((us[j2 - 1] - u) / 6.0) * (gv[0] + 4.0 * gv[1] + gv[2])
            return Q[j2 - 1] - kk * seg

        lo_u, hi_u = us[j2], us[j2 - 1]
        for _ in range(60):
            mid_u = 0.5 * (lo_u + hi_u)
            if q_at(mid_u) <= 0.0:
                lo_u = mid_u
            else:
                hi_u = mid_u
        beta_new = 0.5 * (lo_u + hi_u)
        f_desc = Q / us ** kk

        delta = abs(alpha_new - alpha) + abs(beta_new - beta)
        alpha, beta = alpha_new, beta_new
        if delta < 1e-11:
            break

    return alpha, beta


def _shoot(k: int, u_max: float, step: float):
    """Calibrate (alpha, beta): backward-sweep estimate, then damped Newton
    on the endpoint residuals (F(u_max)-1, f(u_max)-1)."""
    sig = sigma_table(k, step)
    lo = 1.2
    a_hi = _alpha_cap(k)
    b_hi = 4.0 * k + 8.0

    def clip(x):
        return np.array([
            min(max(x[0], lo), a_hi),
            min(max(x[1], lo), b_hi),
        ])

    if k == 1:
        # The linear-sieve pair: the closed forms make the crossing of the
        # backward sweep tangential, but (2, 2) is already the solution.
        start = np.array([2.0, 2.0])
    else:
        start = np.array(_sweep_estimate(k, u_max, step, sig))

    x = clip(start)
    R, tables = _residual(k, x[0], x[1], sig, u_max, step)
    norm = np.max(np.abs(R))

    for _ in range(_NEWTON_MAX_ITER):
        if norm < _NEWTON_TOL:
            return x[0], x[1], tables[0], tables[1]
        J = np.empty((2, 2), dtype=np.float64)
        for col in range(2):
            xp = x.copy()
            xp[col] += _FD_DELTA
            Rp, _ = _residual(k, xp[0], xp[1], sig, u_max, step)
            J[:, col] = (Rp - R) / _FD_DELTA
        try:
            dx = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -R, rcond=None)[0]
        lam = 1.0
        improved = False
        while lam >= 2.0 ** -20:
            x_new = clip(x + lam * dx)
            R_new, tables_new = _residual(k, x_new[0], x_new[1], sig, u_max, step)
            norm_new = np.max(np.abs(R_new))
            if norm_new < norm:
                x, R, norm, tables = x_new, R_new, norm_new, tables_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            break

    if norm < 1e-6:
        return x[0], x[1], tables[0], tables[1]
    raise CalibrationError(
        f"shooting for k={k} stalled with residuals {R.tolist()}",
        residuals=tuple(R.tolist()),
    )


# -- cache ---------------------------------------------------------------


def _pair_dir(k, step, u_max, cache_dir):
    root = _cache.resolve_cache_dir(cache_dir)
    return os.path.join(
        root, f"dhr_k{k}_h{_cache.step_tag(step)}_u{int(round(u_max))}"
    )


def _save_pair(pair: DhrPair, directory: str) -> None:
    parent = os.path.dirname(os.path.abspath(directory)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(dir=parent, prefix=".pair-tmp-")
    try:
        manifest = "\n".join([
            PAIR_HEADER,
            f"{pair.k} {pair.alpha!r} {pair.beta!r} {pair.step!r} {pair.u_max!r}",
        ]) + "\n"
        with open(os.path.join(tmp, "manifest.txt"), "w") as fh:
            fh.write(manifest)
        save_table(pair.F_table, os.path.join(tmp, "F.tbl"))
        save_table(pair.f_table, os.path.join(tmp, "f.tbl"))
        save_table(pair.sigma_table, os.path.join(tmp, "sigma.tbl"))
        try:
            os.rename(tmp, directory)
        except OSError:
            # another process won the race; keep theirs
            import shutil

            shutil.rmtree(tmp, ignore_errors=True)
    except BaseException:
        import shutil

        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _load_pair(k, step, u_max, directory) -> DhrPair | None:
    manifest_path = os.path.join(directory, "manifest.txt")
    try:
        with open(manifest_path) as fh:
            lines = fh.read().splitlines()
        if len(lines) < 2 or lines[0] != PAIR_HEADER:
            return None
        parts = lines[1].split()
        mk = int(parts[0])
        alpha, beta, mstep, mu_max = map(float, parts[1:5])
        if mk != k or mstep != step or mu_max != u_max:
            return None
        F_tab = load_table(os.path.join(directory, "F.tbl"))
        f_tab = load_table(os.path.join(directory, "f.tbl"))
        sig = load_table(os.path.join(directory, "sigma.tbl"))
        # Reattach the reciprocal-of-sigma provider below alpha.
        F_tab = SolutionTable(
            F_tab.grid, F_tab.values, TableReciprocal(sig, u_hi=alpha),
            p=F_tab.p, d=F_tab.d, c=F_tab.c,
        )
        return DhrPair(mk, alpha, beta, F_tab, f_tab, sig, mu_max, mstep)
    except (OSError, TableFormatError, ValueError, IndexError):
        return None


_pair_memo: dict[tuple, DhrPair] = {}


def default_u_max(k: int, v: float | None = None) -> float:
    """Calibration range top: beta-guess + 20, enlarged for a requested v."""
    base = 2.0 * k + 20.0
    if v is not None:
        base = max(base, float(v) + 2.0)
    return math.ceil(base)


def calibrate(k: int, u_max: float | None = None, step: float = DEFAULT_STEP,
              cache_dir: str | None = None) -> DhrPair:
    """Calibrated pair for dimension k (cached on disk and in-process).

    Raises CalibrationError (with the final residuals) if the shooting
    fails to reach |F(u_max)-1|, |f(u_max)-1| <= 1e-6.
    """
    k = _check_k(k)
    if u_max is None:
        u_max = default_u_max(k)
    u_max = float(u_max)
    if u_max < 2.0 * k + 20.0:
        raise ParameterError(
            f"u_max {u_max} below beta-guess + 20 = {2.0 * k + 20.0}"
        )
    key = (k, step, u_max, _cache.resolve_cache_dir(cache_dir))
    pair = _pair_memo.get(key)
    if pair is not None:
        return pair

    directory = _pair_dir(k, step, u_max, cache_dir)
    pair = _load_pair(k, step, u_max, directory)
    if pair is None:
        alpha, beta, F_tab, f_tab = _shoot(k, u_max, step)
        pair = DhrPair(k, alpha, beta, F_tab, f_tab,
                       sigma_table(k, step), u_max, step)
        _save_pair(pair, directory)
    _pair_memo[key] = pair
    return pair


def sieve_F(pair: DhrPair, u: float) -> float:
    """Upper sieve function F_k at u (1/sigma_k below alpha_k)."""
    return pair.F(u)


def sieve_f(pair: DhrPair, u: float) -> float:
    """Lower sieve function f_k at u (zero up to beta_k)."""
    return pair.f(u)


def sifting_limit(k: int, step: float = DEFAULT_STEP,
                  cache_dir: str | None = None) -> float:
    """beta_k: f_k(beta_k) = 0 and f_k > 0 beyond."""
    return calibrate(k, step=step, cache_dir=cache_dir).beta
