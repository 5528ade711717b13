"""The Buchstab function w(u).

w(u) = 1/u on [1, 2] and (u w(u))' = w(u-1) beyond; w oscillates around and
converges to e^-gamma.  Values come from a cached dense table solved by the
DDE engine; the initial reciprocal segment is served in closed form, so
w is exact on [1, 2].
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import cache as _cache
from .constants import EXP_NEG_GAMMA
from .dde import (
    DEFAULT_STEP,
    DelayProblem,
    GridSpec,
    InitialSegment,
    SolutionTable,
    load_table,
    save_table,
    solve_dde,
)
from .errors import DomainError, TableFormatError

U_MAX_DEFAULT = 64.0


class BuchstabTable:
    """Immutable w-table covering [1, u_max] (closed form on [1, 2),
    DDE solution on [2, u_max])."""

    def __init__(self, table: SolutionTable):
        self.table = table
        self.u_max = table.grid.u_max

    def w_many(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if u.size and not np.all(u >= 1.0):
            raise DomainError("Buchstab w requires u >= 1")
        if u.size and not np.all(u <= self.u_max):
            raise DomainError(f"Buchstab table covers u <= {self.u_max}")
        return self.table.query_many(u)

    def w(self, u: float) -> float:
        return float(self.w_many(np.array([float(u)]))[0])


def build_buchstab(u_max: float = U_MAX_DEFAULT, step: float = DEFAULT_STEP,
                   cache_dir: str | None = None) -> BuchstabTable:
    """Solve (or load from cache) the w-table on [2, u_max]."""
    u_max = float(math.ceil(u_max))
    if u_max < 4:
        u_max = 4.0
    directory = _cache.resolve_cache_dir(cache_dir)
    path = os.path.join(
        directory, f"buchstab_h{_cache.step_tag(step)}_u{int(u_max)}.tbl"
    )
    if os.path.exists(path):
        try:
            table = load_table(path)
            if (table.grid.step == step and table.grid.u_max == u_max
                    and table.initial is not None):
                return BuchstabTable(table)
        except (TableFormatError, OSError):
            pass
    problem = DelayProblem(
        power=1.0, delay=1.0, sign=1.0,
        initial=InitialSegment.recip(1.0, u_hi=2.0),
    )
    grid = GridSpec(2.0, u_max, step)
    table = solve_dde(problem, grid)
    try:
        save_table(table, path)
    except OSError:
        pass
    return BuchstabTable(table)


_memo: dict[tuple, BuchstabTable] = {}


def get_buchstab(min_u_max: float = U_MAX_DEFAULT, step: float = DEFAULT_STEP,
                 cache_dir: str | None = None) -> BuchstabTable:
    """Shared table, enlarged on demand (the bound layer needs w up to v-1)."""
    u_max = max(U_MAX_DEFAULT, float(math.ceil(min_u_max)))
    key = (u_max, step, _cache.resolve_cache_dir(cache_dir))
    tab = _memo.get(key)
    if tab is None:
        tab = build_buchstab(u_max, step, cache_dir)
        _memo[key] = tab
    return tab


def buchstab_w(u: float, step: float = DEFAULT_STEP,
               cache_dir: str | None = None) -> float:
    """w(u) for u >= 1 (domain error below)."""
    if not u >= 1.0:
        raise DomainError("Buchstab w requires u >= 1")
    tab = get_buchstab(max(U_MAX_DEFAULT, u), step, cache_dir)
    return tab.w(u)


class BuchstabSegment:
    """View of s -> w(v - v*s) on [s_lo, s_hi], with the kink locations.

    kinks lists the s where v - v*s crosses 2 and 3 (the derivative kinks
    of w relevant to quadrature), in increasing s order.
    """

    def __init__(self, view_table: BuchstabTable, v: float, s_lo: float, s_hi: float):
        if not s_lo < s_hi:
            raise DomainError("need s_lo < s_hi")
        x_hi = v - v * s_lo
        x_lo = v - v * s_hi
        if x_lo < 1.0 - 1e-12 or x_hi > view_table.u_max + 1e-12:
            raise DomainError(
                f"w argument range [{x_lo}, {x_hi}] leaves [1, {view_table.u_max}]"
            )
        self._tab = view_table
        self.v = v
        self.s_lo = s_lo
        self.s_hi = s_hi
        self.kinks = [
            s for s in (1.0 - 3.0 / v, 1.0 - 2.0 / v) if s_lo < s < s_hi
        ]

    def __call__(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if s_arr.size and (s_arr.min() < self.s_lo - 1e-12
                           or s_arr.max() > self.s_hi + 1e-12):
            raise DomainError("s outside the segment view range")
        x = np.minimum(np.maximum(self.v - self.v * s_arr, 1.0), self._tab.u_max)
        out = self._tab.w_many(x)
        if np.isscalar(s) or np.asarray(s).ndim == 0:
            return float(out[0])
        return out


def buchstab_on_segment(v: float, s_lo: float, s_hi: float,
                        step: float = DEFAULT_STEP,
                        cache_dir: str | None = None) -> BuchstabSegment:
    """Segment view used by the weighted-bound integrands."""
    tab = get_buchstab(max(U_MAX_DEFAULT, v - v * s_lo), step, cache_dir)
    return BuchstabSegment(tab, v, s_lo, s_hi)


def asymptotic_value() -> float:
    """The long-run limit e^-gamma of w."""
    return EXP_NEG_GAMMA
