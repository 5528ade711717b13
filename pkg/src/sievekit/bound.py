"""The weighted-sieve bound N(u,v;k) and its parameter search.

For a sieve dimension k and parameters v/(v-1) < u < v with v above the
sifting limit beta_k,

    N(u,v;k) = uk - 1 + (k / f_k(v)) * (I1 - I2 - e^gamma (u-1) f_{k-1}(v/2) / v),

    I1 = integral over s in [1/v, 1/u] of
         min(F_k(v-vs), e^gamma F_{k-1}(v/2) w(v-vs)) * (1-us)/s,
    I2 = integral over s in [1/u, 1-1/v] of
         max(f_k(v-vs), e^gamma f_{k-1}(v/2) w(v-vs)) * (us-1)/s,

and any integer r > max(N(u,v;k), uk-1) is an admissible almost-prime
exponent for admissible k-tuples.  The unmixed comparison value replaces
the bracket by the single F_k integral:

    old(u,v;k) = uk - 1 + (k / f_k(v)) * integral of F_k(v-vs) (1-us)/s.

Whenever f_{k-1}(v/2) > 0 the mixed bound is pointwise at least as good.

Integrands are piecewise smooth; panels split at the Buchstab/sigma kink
preimages, at the sieve-function switch points, and at min/max branch
crossings located by scan-and-bisect.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .buchstab import buchstab_on_segment, get_buchstab
from .constants import EXP_GAMMA
from .dde import DEFAULT_STEP
from .dhr import DhrPair, calibrate, default_u_max
from .errors import EvaluationError, ParameterError
from .quadrature import adaptive_simpson, find_sign_changes

DEFAULT_QUAD_TOL = 1e-9


@dataclass(frozen=True)
class BoundParams:
    """One (k, u, v) evaluation point; must satisfy v/(v-1) < u < v."""

    k: int
    u: float
    v: float

    def validate(self) -> None:
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool):
            raise ParameterError("k must be an integer")
        if self.k < 2:
            raise ParameterError(
                "the mixed bound references dimension k-1; need k >= 2"
            )
        if self.k > 8:
            raise ParameterError("sieve dimension k outside supported range 2..8")
        u, v = float(self.u), float(self.v)
        if not (v > 1.0 and v / (v - 1.0) < u < v):
            raise ParameterError(
                f"(u, v) = ({u}, {v}) violates v/(v-1) < u < v"
            )


@dataclass(frozen=True)
class BoundReport:
    """Evaluation record: integrals, bound values, derived exponent."""

    params: BoundParams
    I1: float
    I2: float
    S4_term: float
    N_value: float
    old_value: float
    r: int
    quadrature_error_estimate: float
    borderline: bool

    def to_dict(self) -> dict:
        return {
            "k": self.params.k,
            "u": self.params.u,
            "v": self.params.v,
            "I1": self.I1,
            "I2": self.I2,
            "S4_term": self.S4_term,
            "N": self.N_value,
            "old": self.old_value,
            "r": self.r,
            "err_estimate": self.quadrature_error_estimate,
            "borderline": self.borderline,
        }


class BoundTables:
    """The tables one (k, v-range) evaluation needs, loaded once."""

    def __init__(self, k: int, v_hi: float, step: float = DEFAULT_STEP,
                 cache_dir: str | None = None):
        self.k = k
        self.pair_k: DhrPair = calibrate(
            k, u_max=default_u_max(k, v_hi), step=step, cache_dir=cache_dir
        )
        self.pair_km1: DhrPair = calibrate(
            k - 1, u_max=default_u_max(k - 1, v_hi), step=step,
            cache_dir=cache_dir,
        )
        self.w = get_buchstab(min_u_max=max(v_hi - 1.0, 4.0), step=step,
                              cache_dir=cache_dir)
        self.step = step
        self.cache_dir = cache_dir


def _tables_for(params: BoundParams, step, cache_dir) -> BoundTables:
    return BoundTables(params.k, params.v, step=step, cache_dir=cache_dir)


def integrand_I1(s, params: BoundParams, tables: BoundTables):
    """min(F_k(v-vs), e^g F_{k-1}(v/2) w(v-vs)) * (1-us)/s on [1/v, 1/u]."""
    u, v = params.u, params.v
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if s_arr.size and (s_arr.min() < 1.0 / v - 1e-12
                       or s_arr.max() > 1.0 / u + 1e-12):
        raise ParameterError("I1 integrand needs s in [1/v, 1/u]")
    x = np.maximum(v - v * s_arr, 1.0)
    Fk = tables.pair_k.F_many(x)
    alt = EXP_GAMMA * tables.pair_km1.F(v / 2.0) * tables.w.w_many(x)
    out = np.minimum(Fk, alt) * (1.0 - u * s_arr) / s_arr
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return float(out[0])
    return out


def integrand_I2(s, params: BoundParams, tables: BoundTables):
    """max(f_k(v-vs), e^g f_{k-1}(v/2) w(v-vs)) * (us-1)/s on [1/u, 1-1/v]."""
    u, v = params.u, params.v
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if s_arr.size and (s_arr.min() < 1.0 / u - 1e-12
                       or s_arr.max() > 1.0 - 1.0 / v + 1e-12):
        raise ParameterError("I2 integrand needs s in [1/u, 1-1/v]")
    x = np.maximum(v - v * s_arr, 1.0)
    fk = tables.pair_k.f_many(x)
    alt = EXP_GAMMA * tables.pair_km1.f(v / 2.0) * tables.w.w_many(x)
    out = np.maximum(fk, alt) * (u * s_arr - 1.0) / s_arr
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return float(out[0])
    return out


def _s_of_x(v: float, xs) -> list[float]:
    return [(v - x) / v for x in xs]


def _breakpoints(params: BoundParams, tables: BoundTables, lo, hi, which: str):
    """Panel boundaries: kink preimages of w/sigma (integer x), sieve switch
    points alpha_k, beta_k and their one-delay descendants, mapped to s."""
    v = params.v
    pk = tables.pair_k
    xs = list(range(2, int(math.floor(v)) + 1))
    xs += [pk.alpha, pk.beta, pk.alpha + 1.0, pk.beta + 1.0]
    if which in ("I1", "I2"):
        pm = tables.pair_km1
        xs += [pm.alpha, pm.beta]
    pts = [s for s in _s_of_x(v, xs) if lo < s < hi]
    return pts


def _crossings(params: BoundParams, tables: BoundTables, lo, hi, which: str):
    """min/max branch crossings, located by scanning then bisection."""
    u, v = params.u, params.v
    if which == "I1":
        const = EXP_GAMMA * tables.pair_km1.F(v / 2.0)

        def diff(s):
            x = np.maximum(v - v * s, 1.0)
            return tables.pair_k.F_many(x) - const * tables.w.w_many(x)
    else:
        const = EXP_GAMMA * tables.pair_km1.f(v / 2.0)

        def diff(s):
            x = np.maximum(v - v * s, 1.0)
            return tables.pair_k.f_many(x) - const * tables.w.w_many(x)

    return find_sign_changes(diff, lo, hi)


def _evaluate(params: BoundParams, tables: BoundTables,
              quad_tol: float = DEFAULT_QUAD_TOL, which: str = "both"):
    """Compute (I1, I2, S4_term, N, old, err_N, err_old); the unneeded side
    is skipped when which is 'N' or 'old'."""
    u, v, k = params.u, params.v, params.k
    pk = tables.pair_k
    if not v > pk.beta:
        raise EvaluationError(
            f"below sifting limit: v = {v} <= beta_{k} = {pk.beta:.6f}"
        )
    fkv = pk.f(v)
    if not fkv > 0.0:
        raise EvaluationError(f"below sifting limit: f_{k}({v}) = {fkv}")

    I1 = I2 = S4 = N = old = err_N = err_old = float("nan")

    if which in ("both", "N"):
        lo1, hi1 = 1.0 / v, 1.0 / u
        bp1 = _breakpoints(params, tables, lo1, hi1, "I1")
        bp1 += _crossings(params, tables, lo1, hi1, "I1")
        I1, e1 = adaptive_simpson(
            lambda s: integrand_I1(s, params, tables), lo1, hi1,
            tol=quad_tol, breakpoints=bp1,
        )
        lo2, hi2 = 1.0 / u, 1.0 - 1.0 / v
        bp2 = _breakpoints(params, tables, lo2, hi2, "I2")
        bp2 += _crossings(params, tables, lo2, hi2, "I2")
        I2, e2 = adaptive_simpson(
            lambda s: integrand_I2(s, params, tables), lo2, hi2,
            tol=quad_tol, breakpoints=bp2,
        )
        S4 = EXP_GAMMA * (u - 1.0) * tables.pair_km1.f(v / 2.0) / v
        N = u * k - 1.0 + (k / fkv) * (I1 - I2 - S4)
        err_N = (k / fkv) * (e1 + e2)

    if which in ("both", "old"):
        lo1, hi1 = 1.0 / v, 1.0 / u
        bp = _breakpoints(params, tables, lo1, hi1, "old")

        def old_integrand(s):
            x = np.maximum(v - v * s, 1.0)
            return tables.pair_k.F_many(x) * (1.0 - u * s) / s

        J, eo = adaptive_simpson(old_integrand, lo1, hi1, tol=quad_tol,
                                 breakpoints=bp)
        old = u * k - 1.0 + (k / fkv) * J
        err_old = (k / fkv) * eo

    return I1, I2, S4, N, old, err_N, err_old


def compute_bound(params: BoundParams, step: float = DEFAULT_STEP,
                  quad_tol: float = DEFAULT_QUAD_TOL,
                  cache_dir: str | None = None,
                  tables: BoundTables | None = None) -> BoundReport:
    """Evaluate the mixed bound, the unmixed comparison value, and derive r.

    r = floor(max(N, uk-1)) + 1; the report is flagged borderline when that
    max sits within the quadrature error estimate of an integer.
    """
    params = BoundParams(params.k, float(params.u), float(params.v))
    params.validate()
    if tables is None:
        tables = _tables_for(params, step, cache_dir)
    I1, I2, S4, N, old, err_N, err_old = _evaluate(params, tables,
                                                   DEFAULT_QUAD_TOL if quad_tol is None else quad_tol,
                                                   "both")
    mx = max(N, params.u * params.k - 1.0)
    r = int(math.floor(mx)) + 1
    borderline = abs(mx - round(mx)) <= err_N
    return BoundReport(
        params=params, I1=I1, I2=I2, S4_term=S4, N_value=N, old_value=old,
        r=r, quadrature_error_estimate=err_N + err_old, borderline=borderline,
    )


# -- parameter search ------------------------------------------------------


def _objective(params: BoundParams, tables: BoundTables, quad_tol: float,
               objective: str) -> float:
    if objective == "old":
        return _evaluate(params, tables, quad_tol, "old")[4]
    vals = _evaluate(params, tables, quad_tol, "N")
    return max(vals[3], params.u * params.k - 1.0)


def _valid_point(k, u, v, beta_k) -> bool:
    return (v > 1.0 and v / (v - 1.0) < u < v and v > beta_k + 1e-9)


_WORKER_STATE: dict = {}


def _opt_worker(chunk):
    (k, v_hi, step, cache_dir, quad_tol, objective, pts) = chunk
    key = (k, v_hi, step, cache_dir)
    tables = _WORKER_STATE.get(key)
    if tables is None:
        tables = BoundTables(k, v_hi, step=step, cache_dir=cache_dir)
        _WORKER_STATE[key] = tables
    out = []
    for (u, v) in pts:
        try:
            J = _objective(BoundParams(k, u, v), tables, quad_tol, objective)
        except EvaluationError:
            continue
        if math.isfinite(J):
            out.append((J, u, v))
    return out


def optimize_bound(k: int, u_range: tuple[float, float],
                   v_range: tuple[float, float], grid_density: int,
                   objective: str = "mixed", jobs: int = 1,
                   step: float = DEFAULT_STEP,
                   quad_tol: float = DEFAULT_QUAD_TOL,
                   cache_dir: str | None = None) -> BoundReport:
    """Grid search + coordinate-descent refinement of the (u, v) parameters.

    objective 'mixed' minimizes max(N(u,v;k), uk-1); 'old' minimizes the
    unmixed comparison value.  Ties break toward smaller u, then smaller v;
    the reduction is lexicographic, so the winner is independent of worker
    scheduling.  Raises ParameterError when no grid point is valid.
    """
    if grid_density < 2:
        raise ParameterError("grid_density must be at least 2 per axis")
    if objective not in ("mixed", "old"):
        raise ParameterError(f"unknown objective {objective!r}")
    u_lo, u_hi = map(float, u_range)
    v_lo, v_hi = map(float, v_range)
    if not (u_lo <= u_hi and v_lo <= v_hi):
        raise ParameterError("empty parameter ranges")

    tables = BoundTables(k, v_hi, step=step, cache_dir=cache_dir)
    beta_k = tables.pair_k.beta

    us = np.linspace(u_lo, u_hi, grid_density)
    vs = np.linspace(v_lo, v_hi, grid_density)
    pts = [(float(u), float(v)) for u in us for v in vs
           if _valid_point(k, u, v, beta_k)]
    if not pts:
        raise ParameterError(
            "no valid (u, v) in the requested ranges "
            f"(need v/(v-1) < u < v and v > beta_{k} = {beta_k:.4f})"
        )

    results: list[tuple[float, float, float]] = []
    if jobs > 1:
        chunks = [
            (k, v_hi, step, cache_dir, quad_tol, objective, list(part))
            for part in np.array_split(np.array(pts, dtype=object), jobs * 4)
            if len(part)
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_opt_worker, chunks):
                results.extend(part)
    else:
        results = _opt_worker(
            (k, v_hi, step, cache_dir, quad_tol, objective, pts)
        )
    if not results:
        raise ParameterError("no valid (u, v) point could be evaluated")

    best = min(results)  # lexicographic: (J, u, v)
    du = (u_hi - u_lo) / (grid_density - 1) if grid_density > 1 else 0.0
    dv = (v_hi - v_lo) / (grid_density - 1) if grid_density > 1 else 0.0

    u0, v0 = best[1], best[2]
    J0 = best[0]
    for _ in range(3):
        for axis in ("u", "v"):
            span = du if axis == "u" else dv
            if span <= 0:
                continue
            if axis == "u":
                cands = np.linspace(max(u_lo, u0 - span), min(u_hi, u0 + span), 11)
            else:
                cands = np.linspace(max(v_lo, v0 - span), min(v_hi, v0 + span), 11)
            for c in cands:
                uu, vv = (float(c), v0) if axis == "u" else (u0, float(c))
                if not _valid_point(k, uu, vv, beta_k):
                    continue
                try:
                    J = _objective(BoundParams(k, uu, vv), tables, quad_tol,
                                   objective)
                except EvaluationError:
                    continue
                if J < J0 - 0.0 or (J == J0 and (uu, vv) < (u0, v0)):
                    J0, u0, v0 = J, uu, vv
        du /= 4.0
        dv /= 4.0

    return compute_bound(BoundParams(k, u0, v0), step=step, quad_tol=quad_tol,
                         cache_dir=cache_dir, tables=tables)
