"""Fixed-step integrator for retarded delay differential equations.

The engine integrates equations of the normal form

    (u^p y(u))' = c * p * u^(p-1) * g(u - d)

where g is either the solution itself (self-delay) or a companion function
(coupled delay), on a uniform grid, with a closed-form initial segment below
the grid anchor.  The transform Y(u) = u^p y(u) makes the right-hand side
depend on delayed history only, so classical RK4 degenerates to a Simpson
update per step and the solve advances segment-by-segment (method of steps),
each segment one delay long.  Delayed samples at grid nodes are exact node
reads; mid-step samples use a local 4-point cubic.

Accuracy is O(step^4) between derivative kinks; grids for the canonical
clients are anchored so that first-generation kinks fall on nodes.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import (
    ConfigurationError,
    DomainError,
    NumericOverflowError,
    TableFormatError,
)

DEFAULT_STEP = 2.0 ** -10

TABLE_HEADER = "SIEVEKIT-TABLE v1"

_INIT_CODES = {"zero": 0, "const": 1, "power": 2, "recip": 3}


def _g17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid u_min + i*step, i = 0..n_steps."""

    u_min: float
    u_max: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigurationError(f"grid step must be positive, got {self.step}")
        if not self.u_min < self.u_max:
            raise ConfigurationError(
                f"grid needs u_min < u_max, got [{self.u_min}, {self.u_max}]"
            )
        ratio = (self.u_max - self.u_min) / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError(
                f"(u_max - u_min)/step = {ratio} is not an integer within 1e-9"
            )

    @classmethod
    def from_steps(cls, u_min: float, n_steps: int, step: float) -> "GridSpec":
        return cls(u_min, u_min + n_steps * step, step)

    @property
    def n_steps(self) -> int:
        return int(round((self.u_max - self.u_min) / self.step))

    def nodes(self) -> np.ndarray:
        return self.u_min + np.arange(self.n_steps + 1) * self.step


@dataclass(frozen=True)
class InitialSegment:
    """Closed-form definition of the solution on (0, u_hi].

    kind is one of 'zero', 'const' (value a), 'power' (a * u^e, integer e),
    'recip' (a / u).
    """

    kind: str
    u_hi: float
    a: float = 0.0
    e: int = 0

    def __post_init__(self):
        if self.kind not in _INIT_CODES:
            raise ConfigurationError(f"unknown initial-segment kind {self.kind!r}")
        if not self.u_hi > 0:
            raise ConfigurationError("initial segment needs u_hi > 0")

    @property
    def code(self) -> int:
        return _INIT_CODES[self.kind]

    def eval(self, u: float) -> float:
        return float(backend.pure.init_eval(self.code, self.a, self.e, float(u)))

    def eval_many(self, u: np.ndarray) -> np.ndarray:
        return backend.pure.init_eval(self.code, self.a, self.e, np.asarray(u, float))

    @classmethod
    def zero(cls, u_hi):
        return cls("zero", u_hi)

    @classmethod
    def const(cls, a, u_hi):
        return cls("const", u_hi, a=a)

    @classmethod
    def power(cls, a, e, u_hi):
        return cls("power", u_hi, a=a, e=int(e))

    @classmethod
    def recip(cls, a, u_hi):
        return cls("recip", u_hi, a=a)


class TableReciprocal:
    """History provider returning 1/other(u) for queries below a grid anchor.

    Serves the upper DHR function, which equals the reciprocal of the sigma
    auxiliary below its switch point; not expressible as a closed-form
    InitialSegment, hence not serializable (descriptor 'external').
    """

    def __init__(self, table: "SolutionTable", u_hi: float):
        self.table = table
        self.u_hi = float(u_hi)

    def eval(self, u: float) -> float:
        return 1.0 / self.table.query(u)

    def eval_many(self, u: np.ndarray) -> np.ndarray:
        return 1.0 / self.table.query_many(u)


@dataclass(frozen=True)
class DelayProblem:
    """One equation (u^p y)' = c p u^(p-1) g(u-d) with its initial segment.

    power may be negative (the sigma auxiliary uses p = -k); it must be an
    integer, as must delay/step.  source None means self-delay.
    """

    power: float
    delay: float
    sign: float
    initial: InitialSegment
    source: "SolutionTable | None" = None

    def __post_init__(self):
        if self.delay <= 0:
            raise ConfigurationError("delay must be positive")
        if self.sign not in (-1.0, 1.0, -1, 1):
            raise ConfigurationError("sign must be +1 or -1")
        if abs(self.power - round(self.power)) > 0:
            raise ConfigurationError(
                f"only integer powers are supported, got {self.power}"
            )


class SolutionTable:
    """Dense grid of a solved function with interpolating queries.

    query(u) is exact at nodes, 4-point cubic between nodes, and delegates to
    the initial segment below u_min.  Immutable after construction; safe for
    concurrent readers.
    """

    def __init__(self, grid: GridSpec, values: np.ndarray, initial=None,
                 p: float = 0.0, d: float = 0.0, c: float = 1.0):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n_steps + 1,):
            raise ConfigurationError(
                f"values shape {values.shape} does not match grid "
                f"({grid.n_steps + 1} nodes)"
            )
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self.initial = initial
        self.p = float(p)
        self.d = float(d)
        self.c = float(c)
        # The initial-segment splice propagates derivative kinks at delay
        # multiples; aligned grids put them on nodes and interpolation
        # stencils must not cross them.
        if self.d > 0:
            ratio = self.d / grid.step
            self.kink_stride = (
                int(round(ratio)) if abs(ratio - round(ratio)) <= 1e-9 else 0
            )
        else:
            self.kink_stride = 0

    # -- queries --------------------------------------------------------

    def query_many(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if u.size and not np.all(u > 0.0):
            raise DomainError("query requires u > 0")
        if u.size and not np.all(u <= self.grid.u_max):
            raise DomainError(
                f"query above table range (u_max = {self.grid.u_max})"
            )
        g = self.grid
        below = u < g.u_min
        if below.any():
            if self.initial is None:
                raise DomainError(
                    "query below u_min but the table has no initial segment "
                    "(externally-initialized table loaded without context)"
                )
            out = np.empty_like(u)
            out[below] = self.initial.eval_many(u[below])
            inb = ~below
            out[inb] = backend.interp_batch(
                self.values, self.values.size, g.u_min, g.step, 0, 0.0, 0,
                u[inb], self.kink_stride,
            )
            return out
        return backend.interp_batch(
            self.values, self.values.size, g.u_min, g.step, 0, 0.0, 0, u,
            self.kink_stride,
        )

    def query(self, u: float) -> float:
        return float(self.query_many(np.array([float(u)]))[0])

    def covers(self, lo: float, hi: float) -> bool:
        low_ok = lo >= self.grid.u_min or (self.initial is not None and lo > 0.0)
        return low_ok and hi <= self.grid.u_max


def query(table: SolutionTable, u: float) -> float:
    """Module-level alias for SolutionTable.query."""
    return table.query(u)


# -- integration ---------------------------------------------------------


def _delay_steps(delay: float, step: float) -> int:
    ratio = delay / step
    if abs(ratio - round(ratio)) > 1e-9:
        raise ConfigurationError(
            f"delay/step = {ratio} must be an integer within 1e-9"
        )
    d_steps = int(round(ratio))
    if d_steps < 8:
        raise ConfigurationError(
            f"step {step} too large relative to delay {delay} (need step <= delay/8)"
        )
    return d_steps


def _phi_chain(Y0, h, cp, p, xn, xm, gn, gm):
    """Simpson-accumulate Y along one run of nodes; return (y[1:], Y_end).

    Shared by the external-source and coupled paths (plain numpy in both
    backends; only the self-delay path is backend-fused).
    """
    pow_int = backend.pure.pow_int
    m = xm.size
    phin = cp * pow_int(xn, p - 1) * gn
    phim = cp * pow_int(xm, p - 1) * gm
    incs = (h / 6.0) * ((phin[:m] + 4.0 * phim) + phin[1:])
    Yarr = np.cumsum(np.concatenate(([Y0], incs)))
    y = Yarr[1:] / pow_int(xn[1:], p)
    return y, Yarr[m]


def solve_dde(problem: DelayProblem, grid: GridSpec) -> SolutionTable:
    """Integrate one retarded equation over the grid.

    Preconditions: step <= delay/8; grid.u_min matches the top of the initial
    segment (self-delay) or the source covers [u_min-d, u_max-d] (coupled).
    """
    h = grid.step
    d_steps = _delay_steps(problem.delay, h)
    p = int(round(problem.power))
    cp = problem.sign * p
    init = problem.initial
    n = grid.n_steps

    if problem.source is None:
        if abs(init.u_hi - grid.u_min) > 1e-12:
            raise ConfigurationError(
                "self-delayed solve requires the grid to start at the top of "
                f"the initial segment ({init.u_hi} != {grid.u_min})"
            )
        low = grid.u_min - problem.delay
        if low < 0 or (low == 0 and init.kind == "recip"):
            raise DomainError(
                "delayed argument leaves the initial segment's domain (0, u_hi]"
            )
        values = np.empty(n + 1, dtype=np.float64)
        backend.advance_self_full(
            values, n, grid.u_min, h, d_steps, p, cp,
            init.code, init.a, init.e,
        )
    else:
        src = problem.source
        if not src.covers(grid.u_min - problem.delay, grid.u_max - problem.delay):
            raise DomainError(
                "source table coverage gap: needs "
                f"[{grid.u_min - problem.delay}, {grid.u_max - problem.delay}]"
            )
        if grid.u_min < init.u_hi:
            raise ConfigurationError("grid.u_min below top of initial segment")
        jn = np.arange(n + 1, dtype=np.int64)
        xn = grid.u_min + jn * h
        xm = grid.u_min + (jn[:n] + 0.5) * h
        gn = src.query_many(xn - problem.delay)
        gm = src.query_many(xm - problem.delay)
        values = np.empty(n + 1, dtype=np.float64)
        values[0] = init.eval(grid.u_min)
        Y0 = backend.pure.pow_int(grid.u_min, p) * values[0]
        values[1:], _ = _phi_chain(Y0, h, cp, p, xn, xm, gn, gm)

    if not np.isfinite(values).all():
        raise NumericOverflowError("solver produced a non-finite value")
    return SolutionTable(grid, values, init, p=problem.power,
                         d=problem.delay, c=problem.sign)


# -- coupled pair ---------------------------------------------------------


class _CoState:
    """Mutable integration state for one member of a coupled pair."""

    def __init__(self, problem: DelayProblem, anchor: float, n: int, h: float):
        self.problem = problem
        self.anchor = anchor
        self.n = n
        self.h = h
        self.p = int(round(problem.power))
        self.cp = problem.sign * self.p
        self.values = np.empty(n + 1, dtype=np.float64)
        self.values[0] = problem.initial.eval(anchor)
        self.filled = 0
        self.Y = backend.pure.pow_int(anchor, self.p) * self.values[0]

    @property
    def end_u(self) -> float:
        return self.anchor + self.filled * self.h

    def history(self, pos: np.ndarray) -> np.ndarray:
        """Evaluate this function at pos: initial provider up to the anchor
        (values agree there by construction), interpolation on the filled
        prefix beyond it."""
        init = self.problem.initial
        stride = int(round(1.0 / self.h))
        below = pos <= self.anchor
        if not below.any():
            return backend.interp_batch(
                self.values, self.filled + 1, self.anchor, self.h, 0, 0.0, 0,
                pos, stride,
            )
        out = np.empty_like(pos)
        out[below] = init.eval_many(pos[below])
        inb = ~below
        if inb.any():
            out[inb] = backend.interp_batch(
                self.values, self.filled + 1, self.anchor, self.h, 0, 0.0, 0,
                pos[inb], stride,
            )
        return out


def solve_coupled(problem_a: DelayProblem, problem_b: DelayProblem,
                  u_top: float, step: float) -> tuple[SolutionTable, SolutionTable]:
    """Co-integrate two mutually-delayed equations up to at least u_top.

    Each problem's initial provider covers (0, anchor]; each equation's
    delayed source is the other function.  Both must have delay 1 (the only
    coupled client).  The lagging function advances first, one delay-segment
    at a time, so every delayed sample is already available.
    """
    if problem_a.delay != 1.0 or problem_b.delay != 1.0:
        raise ConfigurationError("coupled solve supports delay 1 only")
    h = step
    d_steps = _delay_steps(1.0, h)

    states = []
    for prob in (problem_a, problem_b):
        anchor = prob.initial.u_hi
        if anchor <= 1.0:
            raise ConfigurationError(
                "coupled anchors must exceed the delay (anchor > 1)"
            )
        n = int(math.ceil((u_top - anchor) / h - 1e-12))
        if n < 2 * d_steps:
            raise ConfigurationError(
                "u_top must exceed both anchors by at least two delays"
            )
        states.append(_CoState(prob, anchor, n, h))
    sa, sb = states

    def advance(st: _CoState, other: _CoState):
        m = min(d_steps, st.n - st.filled)
        j = st.filled + np.arange(m + 1, dtype=np.int64)
        xn = st.anchor + j * h
        xm = st.anchor + (j[:m] + 0.5) * h
        gn = other.history(xn - 1.0)
        gm = other.history(xm - 1.0)
        ynew, Yend = _phi_chain(st.Y, h, st.cp, st.p, xn, xm, gn, gm)
        st.values[st.filled + 1 : st.filled + m + 1] = ynew
        st.Y = Yend
        st.filled += m

    while sa.filled < sa.n or sb.filled < sb.n:
        a_done = sa.filled >= sa.n
        b_done = sb.filled >= sb.n
        if not a_done and (b_done or sa.end_u <= sb.end_u):
            advance(sa, sb)
        else:
            advance(sb, sa)

    tables = []
    for st in (sa, sb):
        if not np.isfinite(st.values).all():
            raise NumericOverflowError("coupled solver produced a non-finite value")
        grid = GridSpec.from_steps(st.anchor, st.n, h)
        tables.append(
            SolutionTable(grid, st.values, st.problem.initial,
                          p=st.problem.power, d=1.0, c=st.problem.sign)
        )
    return tables[0], tables[1]


# -- table cache file format ----------------------------------------------


def save_table(table: SolutionTable, path: str) -> None:
    """Write the versioned text format; atomic via rename; bit-exact."""
    init = table.initial
    if isinstance(init, InitialSegment):
        parts = ["init", init.kind, _g17(init.a), str(init.e), _g17(init.u_hi)]
        init_line = " ".join(parts)
    else:
        init_line = "init external"
    lines = [
        TABLE_HEADER,
        f"p {_g17(table.p)}",
        f"d {_g17(table.d)}",
        f"c {_g17(table.c)}",
        f"u_min {_g17(table.grid.u_min)}",
        f"u_max {_g17(table.grid.u_max)}",
        f"step {_g17(table.grid.step)}",
        init_line,
        f"n {table.grid.n_steps}",
    ]
    lines.extend(_g17(v) for v in table.values)
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_table(path: str) -> SolutionTable:
    """Read a table file; raises TableFormatError on any mismatch."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TABLE_HEADER:
        raise TableFormatError(f"{path}: bad or unsupported table header")

    def kv(i, key):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != key:
            raise TableFormatError(f"{path}: expected '{key} <value>' on line {i+1}")
        return parts[1]

    p = float(kv(1, "p"))
    d = float(kv(2, "d"))
    c = float(kv(3, "c"))
    u_min = float(kv(4, "u_min"))
    u_max = float(kv(5, "u_max"))
    step = float(kv(6, "step"))
    init_parts = lines[7].split()
    if not init_parts or init_parts[0] != "init":
        raise TableFormatError(f"{path}: expected initial-segment descriptor")
    if init_parts[1] == "external":
        initial = None
    else:
        kind = init_parts[1]
        a = float(init_parts[2])
        e = int(init_parts[3])
        u_hi = float(init_parts[4])
        initial = InitialSegment(kind, u_hi, a=a, e=e)
    n = int(kv(8, "n"))
    if len(lines) < 9 + n + 1:
        raise TableFormatError(f"{path}: truncated value block")
    values = np.array([float(x) for x in lines[9 : 9 + n + 1]], dtype=np.float64)
    grid = GridSpec(u_min, u_max, step)
    if grid.n_steps != n:
        raise TableFormatError(f"{path}: node count mismatch")
    return SolutionTable(grid, values, initial, p=p, d=d, c=c)
