"""Integer arithmetic: prime sieving, deterministic primality, factorization.

Primality is deterministic Miller-Rabin with the 12-prime base set, valid
for n < 3.317e24; composites split by Brent's cycle variant of Pollard rho
with a deterministic parameter schedule, so factorizations are reproducible.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np

from .errors import ParameterError

# valid deterministic MR base set for n < 3 317 044 064 679 887 385 961 981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3317044064679887385961981

_TRIAL_PRIMES: tuple[int, ...] = ()


def sieve_primes(limit: int) -> np.ndarray:
    """All primes < limit as an int64 array."""
    if limit <= 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit, dtype=bool)
    mask[:2] = False
    for p in range(2, int(math.isqrt(limit - 1)) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def _trial_primes() -> tuple[int, ...]:
    global _TRIAL_PRIMES
    if not _TRIAL_PRIMES:
        _TRIAL_PRIMES = tuple(int(p) for p in sieve_primes(1000))
    return _TRIAL_PRIMES


def isprime(n: int) -> bool:
    """Deterministic Miller-Rabin (n < 3.317e24)."""
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ParameterError(f"primality test limited to n < {_MR_LIMIT}")
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of composite odd n (deterministic schedule)."""
    if n % 2 == 0:
        return 2
    for c in range(1, 1000):
        y, r, q = 2, 1, 1
        g = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ParameterError(f"failed to factor {n}")


def factorint(n: int) -> dict[int, int]:
    """Full factorization n = prod p^e as {p: e} (n >= 1)."""
    n = int(n)
    if n < 1:
        raise ParameterError("factorint requires n >= 1")
    out: dict[int, int] = {}
    for p in _trial_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if isprime(m):
            out[m] = out.get(m, 0) + 1
            continue
        # perfect powers fall out of rho eventually, but check squares first
        r = math.isqrt(m)
        if r * r == m:
            stack.extend([r, r])
            continue
        d = _pollard_brent(m)
        stack.extend([d, m // d])
    return out


def big_omega(n: int) -> int:
    """Omega(n): prime factors counted with multiplicity (Omega(1) = 0)."""
    return sum(factorint(n).values())


def radical(n: int) -> int:
    """Product of the distinct primes dividing n (radical(1) = 1)."""
    n = abs(int(n))
    if n == 0:
        raise ParameterError("radical(0) is undefined")
    return reduce(lambda acc, p: acc * p, factorint(n).keys(), 1)


def crt(residues: list[tuple[int, int]]) -> tuple[int, int]:
    """Combine pairwise-coprime congruences x = r (mod m); returns (x, M)
    with 0 <= x < M."""
    x, M = 0, 1
    for r, m in residues:
        g = math.gcd(M, m)
        if g != 1:
            raise ParameterError("crt moduli must be pairwise coprime")
        # x' = x + M * t with t = (r - x)/M mod m
        t = ((r - x) * pow(M, -1, m)) % m
        x = x + M * t
        M *= m
        x %= M
    return x, M


def prod_tree(factors: list[int]) -> int:
    """Balanced product (quasi-linear bit complexity for long lists)."""
    if not factors:
        return 1
    items = list(factors)
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]
