"""Exact rational substrate: harmonic interval sums and the interval endpoint M."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


@dataclass(frozen=True)
class HarmonicInterval:
    """Closed range of integers ``lo <= n <= hi``."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 1 or self.hi < 1:
            raise ValueError(f"interval endpoints must be positive, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def open(cls, N: int, c: float) -> "HarmonicInterval":
        """Normalize the open range ``N < n < cN`` to ``[N+1, ceil(cN)-1]``."""
        return cls(N + 1, math.ceil(c * N) - 1)

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, n: object) -> bool:
        return isinstance(n, int) and self.lo <= n <= self.hi


def parse_rational(text: str) -> Fraction:
    """Parse ``"a/b"`` or an integer string. Decimals are rejected."""
    s = text.strip()
    if "/" in s:
        num, _, den = s.partition("/")
        if not _is_int(num) or not _is_int(den):
            raise ValueError(f"malformed rational {text!r}")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    if not _is_int(s):
        raise ValueError(f"malformed rational {text!r} (use a/b or an integer)")
    return Fraction(int(s))


def _is_int(s: str) -> bool:
    s = s.strip()
    if s[:1] in "+-":
        s = s[1:]
    return s.isdigit()


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def reciprocal_sum(terms: Iterable[int]) -> Fraction:
    """Exact ``sum(1/n)`` by balanced pairwise aggregation."""
    parts = [Fraction(1, n) for n in terms]
    if not parts:
        return Fraction(0)
    return _tree_sum(parts)


def _tree_sum(parts: Sequence[Fraction]) -> Fraction:
    while len(parts) > 1:
        paired = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            paired.append(parts[-1])
        parts = paired
    return parts[0]


def harmonic_sum(interval: HarmonicInterval, excluded: Iterable[int] = ()) -> Fraction:
    """Exact value of ``sum 1/n`` over ``interval`` with ``excluded`` terms left out."""
    skip = set(excluded)
    stray = [n for n in skip if n not in interval]
    if stray:
        raise ValueError(f"excluded terms outside {interval}: {sorted(stray)[:5]}")
    return reciprocal_sum(n for n in interval if n not in skip)


def find_M(r: Fraction, N: int) -> int:
    """Smallest ``M >= N`` with ``sum_{N<=n<=M} 1/n >= r``.

    The sum then also satisfies ``<= r + 1/M`` because the sum up to ``M-1``
    is still below ``r``.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if N < 2:
        raise ValueError("N must be at least 2")
    # float guess from log((M+1/2)/(N-1/2)) ~ r, then exact correction
    guess = max(N, int((N - 0.5) * math.exp(float(r)) - 0.5) - 1)
    s = harmonic_sum(HarmonicInterval(N, guess))
    M = guess
    if s >= r:
        while M > N and s - Fraction(1, M) >= r:
            s -= Fraction(1, M)
            M -= 1
        return M
    while s < r:
        M += 1
        s += Fraction(1, M)
    return M


def ratio_to_growth(M: int, N: int) -> float:
    """Observed exponent ``log(M/N)``; compare against ``r``."""
    if not M >= N >= 2:
        raise ValueError(f"need M >= N >= 2, got M={M}, N={N}")
    return math.log(M / N)
