"""Integer linear k-tuples: admissibility, normalization, empirical scanning.

A tuple is a list of distinct forms L_i(x) = a_i x + b_i.  It is admissible
when the product Pi(n) = prod L_i(n) has no fixed prime divisor: for every
prime p some residue n_p has p not dividing Pi(n_p).  Only finitely many
primes need checking: p <= k and the primes dividing some a_i (for larger
p coprime to every a_i there are at most k < p roots mod p).

Normalization applies the substitution x -> M x + B, with M the radical of
prod a_i times all cross terms a_i b_j - a_j b_i, and B a residue chosen so
no prime of M divides any new constant term.  The result satisfies the
normal-form clauses: positive coefficients sharing one prime support, that
support coprime to every constant term, and every cross-term prime inside
it.  Then the root count v_p is k for p not dividing A and 0 otherwise.

The scanner counts, over n in [N, 2N), the survivors of sifting by all
primes below z and sums tau - Omega(Pi(n)) over them, at desk scale with
an exact segmented sieve plus full factorization of the survivors.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import big_omega, crt, factorint, isprime, prod_tree, radical, sieve_primes
from .errors import AdmissibilityError, DomainError, ParameterError, ResourceError

SCAN_N_LIMIT = 10 ** 8
SCAN_Z_LIMIT = 10 ** 7
V_Z_LIMIT = 10 ** 6


@dataclass(frozen=True, order=True)
class LinearForm:
    """One form a*x + b with a != 0."""

    a: int
    b: int

    def __post_init__(self):
        if self.a == 0:
            raise ParameterError("linear form needs a != 0")

    def value(self, n: int) -> int:
        return self.a * n + self.b

    def __str__(self) -> str:
        if self.a == 1:
            head = "x"
        elif self.a == -1:
            head = "-x"
        else:
            head = f"{self.a}x"
        if self.b == 0:
            return head
        return f"{head}{self.b:+d}"


_FORM_RE = re.compile(r"^([+-]?\d*)x([+-]\d+)?$")


def parse_form(text: str) -> LinearForm:
    s = text.replace(" ", "")
    m = _FORM_RE.match(s)
    if not m:
        raise ParameterError(f"cannot parse linear form {text!r}")
    a_txt, b_txt = m.groups()
    if a_txt in ("", "+"):
        a = 1
    elif a_txt == "-":
        a = -1
    else:
        a = int(a_txt)
    b = int(b_txt) if b_txt else 0
    return LinearForm(a, b)


class LinearTuple:
    """Immutable list of distinct linear forms."""

    def __init__(self, forms):
        forms = tuple(
            f if isinstance(f, LinearForm) else LinearForm(*f) for f in forms
        )
        if not forms:
            raise ParameterError("tuple needs at least one form")
        if len(set(forms)) != len(forms):
            raise ParameterError("forms in a tuple must be pairwise distinct")
        self.forms = forms
        self._admissible: bool | None = None

    @property
    def k(self) -> int:
        return len(self.forms)

    @property
    def A(self) -> int:
        """Product of the coefficients a_i."""
        out = 1
        for f in self.forms:
            out *= f.a
        return out

    def __str__(self) -> str:
        return ", ".join(str(f) for f in self.forms)

    def __eq__(self, other):
        return isinstance(other, LinearTuple) and self.forms == other.forms

    def __hash__(self):
        return hash(self.forms)


def parse_tuple(text: str) -> LinearTuple:
    """Parse the CLI literal syntax, e.g. 'x,x+2,x+6' or '6x+5,6x+7,6x+11'."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ParameterError(f"cannot parse tuple literal {text!r}")
    return LinearTuple([parse_form(p) for p in parts])


def product_at(t: LinearTuple, n: int) -> int:
    """Pi(n) = prod_i L_i(n), exact."""
    out = 1
    for f in t.forms:
        out *= f.value(n)
    return out


def product_omitting(t: LinearTuple, j: int, n: int) -> int:
    """prod_{i != j} L_i(n) with 1-based j."""
    if not 1 <= j <= t.k:
        raise ParameterError(f"form index {j} outside 1..{t.k}")
    out = 1
    for i, f in enumerate(t.forms, start=1):
        if i != j:
            out *= f.value(n)
    return out


def _check_primes(t: LinearTuple) -> list[int]:
    """Primes that decide admissibility: p <= k plus p | some a_i."""
    ps = {int(p) for p in sieve_primes(t.k + 1)}
    for f in t.forms:
        ps.update(factorint(abs(f.a)).keys())
    return sorted(ps)


def is_admissible(t: LinearTuple) -> bool:
    """True iff the product has no fixed prime divisor."""
    if t._admissible is not None:
        return t._admissible
    ok = True
    for p in _check_primes(t):
        if all(product_at(t, n) % p == 0 for n in range(p)):
            ok = False
            break
    t._admissible = ok
    return ok


def v_p(t: LinearTuple, p: int) -> int:
    """Number of roots of Pi mod p over the full residue system {0..p-1}."""
    if not isprime(p):
        raise ParameterError(f"v_p needs a prime, got {p}")
    return sum(1 for n in range(p) if product_at(t, n) % p == 0)


def satisfies_normal_form(t: LinearTuple) -> bool:
    """The normal-form checker: admissible, a_i > 0 with one shared prime
    support, support coprime to every b_j, and all cross-term primes inside
    the support."""
    if any(f.a <= 0 for f in t.forms):
        return False
    if not is_admissible(t):
        return False
    rads = {radical(f.a) for f in t.forms}
    if len(rads) != 1:
        return False
    rad = rads.pop()
    if any(math.gcd(rad, f.b) != 1 for f in t.forms):
        return False
    for i in range(t.k):
        for j in range(i + 1, t.k):
            fi, fj = t.forms[i], t.forms[j]
            cross = fi.a * fj.b - fj.a * fi.b
            if cross == 0:
                return False
            if radical(cross) != math.gcd(radical(cross), rad):
                return False
    return True


def normalize(t: LinearTuple) -> tuple[LinearTuple, int, int]:
    """Substitute x -> A x + B so the result meets the normal form.

    Returns (tuple', A, B).  Already-conforming tuples come back unchanged
    with (A, B) = (1, 0).  Raises AdmissibilityError for inadmissible input.
    """
    flipped = LinearTuple([
        f if f.a > 0 else LinearForm(-f.a, -f.b) for f in t.forms
    ])
    if not is_admissible(flipped):
        raise AdmissibilityError(f"tuple {t} is inadmissible")
    if satisfies_normal_form(flipped) and flipped == t:
        return t, 1, 0

    cross_prod = 1
    for i in range(flipped.k):
        for j in range(i + 1, flipped.k):
            fi, fj = flipped.forms[i], flipped.forms[j]
            c = fi.a * fj.b - fj.a * fi.b
            if c == 0:
                raise AdmissibilityError(
                    f"proportional forms {fi} and {fj} admit a fixed divisor"
                )
            cross_prod *= c
    M = radical(abs(flipped.A) * abs(cross_prod))

    residues = []
    for p in sorted(factorint(M).keys()):
        n_p = next(
            (n for n in range(p) if product_at(flipped, n) % p != 0), None
        )
        if n_p is None:
            raise AdmissibilityError(
                f"no admissible residue mod {p} for {t}"
            )
        residues.append((n_p, p))
    B, _ = crt(residues)

    t2 = LinearTuple([
        LinearForm(f.a * M, f.value(B)) for f in flipped.forms
    ])
    if not satisfies_normal_form(t2):
        raise AdmissibilityError(
            f"normalization of {t} failed the normal-form checker"
        )
    return t2, M, B


def compute_V(z: int, k: int, A: int) -> float:
    """V(z) = prod over primes p < z, p not dividing A, of (1 - k/p),
    exact rational then rounded once."""
    if z > V_Z_LIMIT:
        raise ResourceError(f"compute_V supports z <= {V_Z_LIMIT}")
    num, den = [], []
    for p in sieve_primes(int(z)):
        p = int(p)
        if A % p == 0:
            continue
        if p <= k:
            raise DomainError(
                f"dimension exceeds prime: factor (1 - {k}/{p}) <= 0"
            )
        num.append(p - k)
        den.append(p)
    if not num:
        return 1.0
    return float(Fraction(prod_tree(num), prod_tree(den)))


@dataclass(frozen=True)
class ScanReport:
    """Empirical sifted sum S(tau; N, z) with its witnesses.

    S_value sums tau - Omega(Pi(n)) over survivors; witnesses lists the
    survivors with Omega(Pi(n)) <= floor(tau) as (n, Omega) sorted by n.
    """

    N: int
    z: int
    tau: float
    S_value: float
    survivor_count: int
    witnesses: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "z": self.z,
            "tau": self.tau,
            "S": self.S_value,
            "survivors": self.survivor_count,
            "witnesses": [[n, o] for n, o in self.witnesses],
        }


def _sieve_roots(t: LinearTuple, z: int):
    """(primes, roots-per-form) for all p < z with p not dividing A."""
    primes = [int(p) for p in sieve_primes(int(z))]
    A = t.A
    ps, roots = [], []
    for p in primes:
        if A % p == 0:
            continue
        ps.append(p)
        roots.append([(-f.b * pow(f.a, -1, p)) % p for f in t.forms])
    return ps, roots


def _scan_block(t: LinearTuple, lo: int, hi: int, ps, roots) -> list[int]:
    """Survivor n-values in [lo, hi) after sifting all forms by all ps."""
    length = hi - lo
    alive = np.ones(length, dtype=bool)
    large_p, large_r = [], []
    for p, rts in zip(ps, roots):
        if p <= length:
            for r in rts:
                start = (r - lo) % p
                alive[start::p] = False
        else:
            for r in rts:
                large_p.append(p)
                large_r.append(r)
    if large_p:
        parr = np.array(large_p, dtype=np.int64)
        rarr = np.array(large_r, dtype=np.int64)
        starts = (rarr - lo) % parr
        hits = starts[starts < length]
        alive[hits] = False
    return [int(n) for n in np.nonzero(alive)[0] + lo]


def scan_S(t: LinearTuple, N: int, z: int, tau: float,
           jobs: int = 1, block_size: int = 1 << 21) -> ScanReport:
    """Exact S(tau; N, z) over n in [N, 2N) for a normalized tuple.

    Survivors are found by a segmented sieve of the k progressions (never
    by factoring non-survivors); each survivor's Pi(n) is then fully
    factored for Omega.  Blocks merge in index order, so the report is
    independent of worker scheduling.
    """
    if not satisfies_normal_form(t):
        raise ParameterError(
            "scan_S requires a tuple in normal form (run normalize first)"
        )
    N = int(N)
    z = int(z)
    if N < 1 or N > SCAN_N_LIMIT:
        raise ResourceError(f"scan supports 1 <= N <= {SCAN_N_LIMIT}")
    if z < 2 or z > SCAN_Z_LIMIT:
        raise ResourceError(f"scan supports 2 <= z <= {SCAN_Z_LIMIT}")

    ps, roots = _sieve_roots(t, z)
    blocks = [(lo, min(lo + block_size, 2 * N))
              for lo in range(N, 2 * N, block_size)]
    survivors: list[int] = []
    if jobs > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_scan_block, t, lo, hi, ps, roots)
                    for lo, hi in blocks]
            for fut in futs:          # submission order == block order
                survivors.extend(fut.result())
    else:
        for lo, hi in blocks:
            survivors.extend(_scan_block(t, lo, hi, ps, roots))

    S = 0.0
    witnesses = []
    tau = float(tau)
    cutoff = math.floor(tau)
    for n in survivors:
        omega = sum(big_omega(f.value(n)) for f in t.forms)
        S += tau - omega
        if omega <= cutoff:
            witnesses.append((n, omega))
    return ScanReport(
        N=N, z=z, tau=tau, S_value=S,
        survivor_count=len(survivors), witnesses=witnesses,
    )
