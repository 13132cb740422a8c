"""Sieving, factorization and prime-power smoothness.

``n`` is *prime-power smooth* with bound ``y`` when every exact prime-power
divisor ``p**a || n`` satisfies ``p**a <= y``.  This is stricter than the usual
notion (which only bounds ``p``), and is the smoothness used throughout.
"""

from __future__ import annotations

import functools
import math
import os
from typing import NamedTuple

import numpy as np

from .errors import SieveRangeError

DEFAULT_SIEVE_LIMIT = 2_000_000
SIEVE_LIMIT_ENV = "UNITFRAC_SIEVE_LIMIT"


class PrimePower(NamedTuple):
    p: int
    a: int

    @property
    def value(self) -> int:
        return self.p**self.a

    def __str__(self) -> str:
        return f"{self.p}^{self.a}" if self.a > 1 else str(self.p)


def primes_upto(n: int) -> np.ndarray:
    """All primes ``<= n`` as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.flatnonzero(flags).astype(np.int64)


class FactorSieve:
    """Smallest-prime-factor table for ``[2, limit]``.

    The limit is fixed at construction; queries above it raise
    :class:`SieveRangeError` instead of growing the table.
    """

    def __init__(self, limit: int):
        if limit < 2:
            raise ValueError("sieve limit must be at least 2")
        self.limit = int(limit)
        spf = np.zeros(self.limit + 1, dtype=np.int32)
        for p in primes_upto(math.isqrt(self.limit)):
            p = int(p)
            block = spf[p * p :: p]
            block[block == 0] = p
        idx = np.flatnonzero(spf == 0)
        spf[idx] = idx
        spf[0:2] = [0, 1]
        self.spf = spf
        self._lpp: np.ndarray | None = None
        self._gpf: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"FactorSieve(limit={self.limit})"

    @functools.cached_property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.spf.size)
        mask = self.spf == idx
        mask[:2] = False
        return np.flatnonzero(mask).astype(np.int64)

    def _check(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise SieveRangeError(f"{n} outside sieve range [1, {self.limit}]", n=n, limit=self.limit)

    def factorize(self, n: int) -> list[PrimePower]:
        self._check(n)
        out: list[PrimePower] = []
        spf = self.spf
        while n > 1:
            p = int(spf[n])
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append(PrimePower(p, a))
        return out

    @property
    def largest_pp(self) -> np.ndarray:
        """``largest_pp[n]`` is the largest exact prime-power divisor of ``n`` (1 for n=1)."""
        if self._lpp is None:
            L = self.limit
            lpp = np.ones(L + 1, dtype=np.int32)
            for p in self.primes:
                p = int(p)
                q = p
                while q <= L:
                    view = lpp[q::q]
                    np.maximum(view, q, out=view)
                    q *= p
            lpp[0] = 0
            self._lpp = lpp
        return self._lpp

    @property
    def greatest_prime_factor(self) -> np.ndarray:
        if self._gpf is None:
            gpf = np.ones(self.limit + 1, dtype=np.int32)
            for p in self.primes:
                gpf[int(p) :: int(p)] = p
            gpf[0] = 0
            self._gpf = gpf
        return self._gpf


@functools.lru_cache(maxsize=4)
def _sieve_for(limit: int) -> FactorSieve:
    return FactorSieve(limit)


def default_sieve_limit() -> int:
    env = os.environ.get(SIEVE_LIMIT_ENV)
    return int(env) if env else DEFAULT_SIEVE_LIMIT


def get_sieve(limit: int | None = None) -> FactorSieve:
    """Shared read-only sieve. ``limit`` defaults to ``$UNITFRAC_SIEVE_LIMIT``."""
    return _sieve_for(int(limit) if limit is not None else default_sieve_limit())


def _sieve_covering(n: int, sieve: FactorSieve | None) -> FactorSieve | None:
    if sieve is not None:
        sieve._check(n)
        return sieve
    s = get_sieve()
    return s if n <= s.limit else None


def factorize(n: int, sieve: FactorSieve | None = None) -> list[PrimePower]:
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    return (sieve or get_sieve()).factorize(n)


def factor_over_base(n: int, bound: int) -> tuple[list[PrimePower], int]:
    """Trial-divide ``n`` by primes ``<= bound``; returns the factors and cofactor.

    Meant for large numbers (residual denominators) whose primes are known to
    be small.
    """
    out = []
    for p in primes_upto(bound):
        p = int(p)
        if p * p > n and n > 1 and n <= bound:
            out.append(PrimePower(n, 1))
            n = 1
            break
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append(PrimePower(p, a))
        if n == 1:
            break
    return out, n


def _pp_factors(n: int, sieve: FactorSieve | None) -> list[PrimePower]:
    s = _sieve_covering(n, sieve)
    if s is not None:
        return s.factorize(n)
    factors, rest = factor_over_base(n, math.isqrt(n) + 1)
    if rest > 1:
        factors.append(PrimePower(rest, 1))
    return factors


def largest_prime_power_factor(n: int, sieve: FactorSieve | None = None) -> PrimePower:
    if n < 2:
        raise ValueError("largest_prime_power_factor needs n >= 2")
    return max(_pp_factors(n, sieve), key=lambda f: f.value)


def is_smooth(n: int, y: int, sieve: FactorSieve | None = None) -> bool:
    """True iff every exact prime-power divisor of ``n`` is at most ``y``."""
    if n < 1 or y < 1:
        raise ValueError("is_smooth needs n >= 1 and y >= 1")
    if n == 1:
        return True
    if n <= y:
        return True
    s = _sieve_covering(n, sieve)
    if s is not None:
        return int(s.largest_pp[n]) <= y
    return all(f.value <= y for f in _pp_factors(n, sieve))


def _table_sieve(N: int, sieve: FactorSieve | None) -> FactorSieve:
    if sieve is None:
        sieve = get_sieve(max(default_sieve_limit(), N)) if N > default_sieve_limit() else get_sieve()
    sieve._check(N)
    return sieve


def psi_prime(N: int, y: int, sieve: FactorSieve | None = None) -> int:
    """Number of prime-power smooth ``n <= N`` (bound ``y``)."""
    if N < 1 or y < 1:
        raise ValueError("psi_prime needs N >= 1 and y >= 1")
    s = _table_sieve(N, sieve)
    return int(np.count_nonzero(s.largest_pp[1 : N + 1] <= y))


def psi(N: int, y: int, sieve: FactorSieve | None = None) -> int:
    """Ordinary smooth count: ``n <= N`` with every prime factor ``<= y``."""
    if N < 1 or y < 1:
        raise ValueError("psi needs N >= 1 and y >= 1")
    s = _table_sieve(N, sieve)
    return int(np.count_nonzero(s.greatest_prime_factor[1 : N + 1] <= y))


def lcm_up_to(y: int) -> int:
    """``lcm(1, ..., y)``: product of the largest power of each prime ``p <= y``."""
    if y < 1:
        raise ValueError("lcm_up_to needs y >= 1")
    out = 1
    for p in primes_upto(y):
        p = int(p)
        q = p
        while q * p <= y:
            q *= p
        out *= q
    return out


def primes_in(lo: float, hi: float, coprime_to: int = 1) -> list[int]:
    """Primes ``p`` with ``lo < p < hi`` (strict) and ``p`` not dividing ``coprime_to``."""
    if hi <= 2:
        return []
    top = math.ceil(hi) - 1 if float(hi).is_integer() else math.floor(hi)
    return [int(p) for p in primes_upto(top) if lo < p < hi and coprime_to % int(p) != 0]


def valuation(n: int, p: int) -> int:
    """Exponent of ``p`` in ``n`` (``n != 0``)."""
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def prime_powers_between(lo: int, hi: int) -> list[PrimePower]:
    """Prime powers ``q`` with ``lo < q <= hi``, sorted by value."""
    out = []
    for p in primes_upto(hi):
        p = int(p)
        q, a = p, 1
        while q <= hi:
            if q > lo:
                out.append(PrimePower(p, a))
            q *= p
            a += 1
    return sorted(out, key=lambda f: f.value)


def max_pp_factor_value(n: int, bound: int) -> int:
    """Largest prime-power divisor of ``n`` whose primes all lie below ``bound``.

    Raises if ``n`` has a prime factor ``> bound``.
    """
    factors, rest = factor_over_base(n, bound)
    if rest != 1:
        raise ValueError(f"{n} has a prime factor above {bound}")
    return max((f.value for f in factors), default=1)
