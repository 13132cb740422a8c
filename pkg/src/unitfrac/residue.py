"""Subsets of primes whose reciprocals hit a residue class, and the
``n_i = q * s(q) * r_i`` construction built on top of them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import NoCandidateError, ResidueUnreachable
from .primes import PrimePower, is_smooth, primes_in
from .rational import reciprocal_sum

_INF = np.iinfo(np.int16).max


@dataclass(frozen=True)
class ResidueTarget:
    modulus: int
    residue: int

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(f"residue {self.residue} not in [0, {self.modulus})")


@dataclass(frozen=True)
class SubsetSelection:
    chosen: tuple[int, ...]
    modulus: int
    achieved: int

    def verify(self) -> bool:
        return sum(pow(p, -1, self.modulus) for p in self.chosen) % self.modulus == self.achieved


@dataclass
class CorollarySelection:
    q: PrimePower
    s: int
    primes: list[int]
    target: int
    N: int
    c: float
    pool: list[int] = field(default_factory=list)

    @property
    def denominators(self) -> list[int]:
        return [self.q.value * self.s * r for r in self.primes]

    @property
    def reciprocal_sum(self) -> Fraction:
        return reciprocal_sum(self.denominators)

    def verify(self) -> bool:
        qv = self.q.value
        if math.gcd(qv, self.s) != 1:
            return False
        if any(not self.N < n < self.c * self.N for n in self.denominators):
            return False
        got = sum(pow(self.s * r, -1, qv) for r in self.primes) % qv
        return got == self.target % qv


def least_residue(a: int, b: int, n: int) -> int:
    """Representative of ``a * b^-1 (mod n)`` in ``(-n/2, n/2]``."""
    if n < 2:
        raise ValueError("modulus must be at least 2")
    try:
        inv = pow(b, -1, n)
    except ValueError:
        raise ValueError(f"{b} is not invertible mod {n}") from None
    z = a * inv % n
    return z - n if 2 * z > n else z


def min_subset_for_residue(residues: Sequence[int], n: int, target: int) -> list[int] | None:
    """Indices of a minimum-size subset of ``residues`` summing to ``target`` mod ``n``.

    Among minimum-size subsets the lexicographically smallest index list wins.
    Returns ``None`` when the target is unreachable.
    """
    target %= n
    if target == 0:
        return []
    k = len(residues)
    # best[i][t]: fewest elements of residues[i:] summing to t (mod n)
    best = np.full((k + 1, n), _INF, dtype=np.int16)
    best[k, 0] = 0
    for i in range(k - 1, -1, -1):
        nxt = best[i + 1]
        take = np.roll(nxt, residues[i] % n)
        best[i] = np.minimum(nxt, np.where(take == _INF, _INF, take + 1))
    need = int(best[0, target])
    if need == _INF:
        return None
    chosen, t = [], target
    for i in range(k):
        if need == 0:
            break
        rest = (t - residues[i]) % n
        if int(best[i + 1, rest]) == need - 1:
            chosen.append(i)
            t, need = rest, need - 1
    return chosen


def reachable_residues(residues: Sequence[int], n: int) -> np.ndarray:
    """Boolean mask of residues mod ``n`` reachable as subset sums."""
    reach = np.zeros(n, dtype=bool)
    reach[0] = True
    for r in residues:
        reach |= np.roll(reach, r % n)
    return reach


def find_prime_subset(pool: Sequence[int], target: ResidueTarget) -> SubsetSelection:
    """Subset of ``pool`` whose reciprocals sum to ``target.residue`` mod ``target.modulus``.

    Smallest cardinality first, then lexicographically smallest prime list.
    """
    n = target.modulus
    primes = sorted(pool)
    bad = [p for p in primes if math.gcd(p, n) != 1]
    if bad:
        raise ValueError(f"pool members {bad} not coprime to modulus {n}")
    inverses = [pow(p, -1, n) for p in primes]
    idx = min_subset_for_residue(inverses, n, target.residue)
    if idx is None:
        reach = reachable_residues(inverses, n)
        raise ResidueUnreachable(
            f"residue {target.residue} mod {n} unreachable from {len(primes)} primes",
            pool_size=len(primes),
            reachable=int(reach.sum()),
            modulus=n,
        )
    chosen = tuple(primes[i] for i in idx)
    sel = SubsetSelection(chosen, n, target.residue)
    assert sel.verify()
    return sel


def s_threshold(q: int, N: int, delta: float) -> float:
    """``N / (q log^{3+delta} q)``."""
    return N / (q * math.log(q) ** (3.0 + delta))


def construct_s(
    q: PrimePower, N: int, c: float, delta: float, y: int, cap: int | None = None
) -> int:
    """Smallest ``s > N / (q log^{3+delta} q)`` that is y-smooth and coprime to ``q``."""
    qv = q.value
    if qv < 2:
        raise ValueError("q must be at least 2")
    if cap is None:
        cap = max(1, math.ceil(c * N / qv))
    s = math.floor(s_threshold(qv, N, delta)) + 1
    while s <= cap:
        if math.gcd(s, qv) == 1 and is_smooth(s, y):
            return s
        s += 1
    raise NoCandidateError(
        f"no smooth s coprime to {qv} in ({s_threshold(qv, N, delta):.4g}, {cap}]", q=str(q), cap=cap
    )


def corollary_select(
    q: PrimePower,
    target_residue: int,
    N: int,
    c: float,
    *,
    delta: float = 0.5,
    y: int | None = None,
    prime_filter: Callable[[int, int], bool] | None = None,
) -> CorollarySelection:
    """Denominators ``q * s * r_i`` in ``(N, cN)`` with ``sum 1/(s r_i) = target (mod q)``.

    ``y`` bounds the smoothness of ``s`` (default ``q - 1``).  ``prime_filter(s, r)``
    narrows the prime pool further, e.g. to keep the products available.
    """
    qv = q.value
    target = target_residue % qv
    if y is None:
        y = qv - 1
    s = construct_s(q, N, c, delta, max(y, 1))
    pool = primes_in(N / (qv * s), c * N / (qv * s), coprime_to=qv)
    pool = [p for p in pool if N < qv * s * p < c * N]
    if prime_filter is not None:
        pool = [p for p in pool if prime_filter(s, p)]
    if target == 0:
        return CorollarySelection(q, s, [], target, N, c, pool)
    # sum 1/(s r) = t  <=>  sum 1/r = s t  (mod q)
    try:
        sel = find_prime_subset(pool, ResidueTarget(qv, s * target % qv))
    except ResidueUnreachable as exc:
        inv_s = pow(s, -1, qv)
        mask = reachable_residues([pow(p, -1, qv) for p in pool], qv)
        reach = sorted(int(x) * inv_s % qv for x in np.flatnonzero(mask))
        raise ResidueUnreachable(
            f"residue {target} mod {qv} unreachable with s={s} and {len(pool)} primes; reachable {reach[:20]}",
            q=str(q),
            s=s,
            pool_size=len(pool),
            reachable=len(reach),
        ) from exc
    out = CorollarySelection(q, s, list(sel.chosen), target, N, c, pool)
    assert out.verify()
    return out


def cap_condition7(N: int, delta: float, slack: float = 2.0) -> float:
    """Per-stage reciprocal budget ``slack * log^{3 + 2 delta/3} N / N``."""
    return slack * math.log(N) ** (3.0 + 2.0 * delta / 3.0) / N


def exponential_sum_magnitude(pool: Sequence[int], n: int, h: int) -> tuple[float, float]:
    """``|prod (1 + e(r_n(h/p)/n))|`` and the comparison value ``2^k / n``."""
    acc = 1.0
    for p in pool:
        acc *= abs(2.0 * math.cos(math.pi * least_residue(h, p, n) / n))
    return acc, 2.0 ** len(pool) / n
