"""End-to-end construction: interval terms, cleanup, then a smooth-number tail.

For ``r`` and ``N`` the interval ``[N, M]`` is taken with ``M`` the first point
where the harmonic sum reaches ``r``.  ``M`` itself is ceded to the tail, the
cleanup removes terms from ``[N, M-1]`` until the kept sum ``u/v`` has a
denominator with only small prime-power factors, and the difference
``a/b = r - u/v`` is written as a sum of reciprocals of smooth integers in
``[M, hi]``.  Interval and tail terms are disjoint by construction.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .cleanup import CleanupConfig, CleanupTrace, cleanup
from .errors import (
    CapExceededError,
    CleanupIncomplete,
    DecompositionFailed,
    InfeasibleError,
    SearchBudgetExceeded,
    UnitFracError,
)
from .primes import factor_over_base, get_sieve, largest_prime_power_factor
from .rational import HarmonicInterval, find_M, format_rational, harmonic_sum, reciprocal_sum
from .smooth import enumerate_smooth, solve_by_residues, solve_reciprocal_subset


@dataclass
class PipelineConfig:
    epsilon: float = 1 / 6
    delta: float = 0.5
    small_bound: int | None = None
    large_threshold: int | None = None
    # tail terms must stay below max_ratio * N
    max_ratio: float = 64.0
    widen_factor: float = 1.1
    node_budget: int = 20_000
    residue_tries: int = 8
    exhaustive_max_l: int = 80
    time_limit: float = 8.0
    cleanup_methods: tuple[str, ...] = ("corollary", "extended", "strip")

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 0.25:
            raise ValueError("epsilon must lie in (0, 1/4)")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_ratio <= 1 or self.widen_factor <= 1:
            raise ValueError("max_ratio and widen_factor must exceed 1")
        if self.node_budget < 1 or self.time_limit <= 0 or self.residue_tries < 1:
            raise ValueError("budgets must be positive")

    def formula_small_bound(self, N: int) -> int:
        return max(2, math.floor(N ** (0.25 - self.epsilon)))

    def formula_large_threshold(self, N: int) -> int:
        return math.floor(N / math.log(N) ** (3 + self.delta))

    def small_bound_ladder(self, N: int, M: int) -> list[int]:
        """Small-bound candidates: the formula value, then ~x1.5 steps up to ``M``.

        The formula value ``N^{1/4 - epsilon}`` is degenerate for small ``N``;
        the ladder keeps the construction usable there.
        """
        if self.small_bound is not None:
            return [self.small_bound]
        out = {self.formula_small_bound(N)}
        y = 4
        while y < M:
            out.add(y)
            y = math.ceil(y * 1.5)
        out.add(max(M, 2))
        return sorted(out)


@dataclass
class Decomposition:
    r: Fraction
    N: int
    terms: list[int]
    M: int | None = None
    small_bound: int | None = None
    y: int | None = None
    hi: int | None = None
    tail_target: Fraction | None = None
    cleanup: CleanupTrace | None = field(default=None, repr=False)
    tail: list[int] = field(default_factory=list, repr=False)
    attempts: list[dict] = field(default_factory=list, repr=False)

    @property
    def k(self) -> int:
        return len(self.terms)

    @property
    def ratio(self) -> float:
        return self.terms[-1] / self.N if self.terms else 0.0

    def to_dict(self, detail: bool = False) -> dict:
        out = {
            "r": format_rational(self.r),
            "N": self.N,
            "terms": self.terms,
            "ratio": self.ratio,
            "k": self.k,
        }
        if detail:
            out.update(
                M=self.M,
                small_bound=self.small_bound,
                y=self.y,
                hi=self.hi,
                tail_target=None if self.tail_target is None else format_rational(self.tail_target),
                tail=self.tail,
                cleanup=None if self.cleanup is None else self.cleanup.to_dict(),
                attempts=self.attempts,
            )
        return out

    def to_text(self) -> str:
        return f"{format_rational(self.r)} = " + " + ".join(f"1/{x}" for x in self.terms)


def _largest_pp(n: int, bound: int) -> int:
    if n == 1:
        return 1
    factors, rest = factor_over_base(n, bound)
    best = max((f.value for f in factors), default=1)
    if rest > 1:
        best = max(best, largest_prime_power_factor(rest).value)
    return best


def decompose(r: Fraction, N: int, config: PipelineConfig | None = None) -> Decomposition:
    """Write ``r`` as a sum of distinct unit fractions with denominators ``>= N``.

    Raises :class:`DecompositionFailed` (with every attempt recorded) when no
    small-bound choice leads to a solvable tail under ``config.max_ratio``.
    """
    config = config or PipelineConfig()
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if N < 2:
        raise ValueError("N must be at least 2")
    M = find_M(r, N)
    cap = math.floor(config.max_ratio * N)
    if M > cap:
        raise DecompositionFailed(
            f"M={M} already exceeds max_ratio*N={cap}", [], M=M, cap=cap, reason_detail="ratio_cap"
        )
    get_sieve()._check(cap)
    full = harmonic_sum(HarmonicInterval(N, M))
    if full == r:
        d = Decomposition(r, N, list(range(N, M + 1)), M=M, hi=M, tail_target=Fraction(0))
        _gate(d)
        return d

    deadline = time.monotonic() + config.time_limit
    attempts: list[dict] = []
    stages = []
    for sb in config.small_bound_ladder(N, M):
        try:
            stages.append(_prepare(r, N, M, sb, config))
        except (InfeasibleError, CleanupIncomplete) as exc:
            attempts.append({"small_bound": sb, "outcome": exc.reason, "message": str(exc)})
    # grow the tail window and try every prepared small bound at each width,
    # so the first hit has the smallest hi the ladder can offer
    hi = min(cap, max(M + 1, math.floor(M * config.widen_factor)))
    while stages:
        for st in list(stages):
            if time.monotonic() > deadline:
                attempts.append({"outcome": "time_limit", "hi": hi})
                raise DecompositionFailed(
                    f"time limit {config.time_limit}s reached for r={format_rational(r)}, N={N}",
                    attempts,
                    M=M,
                )
            tail, y = _solve_tail(M, hi, st, config, attempts)
            if tail is None:
                continue
            attempts.append({"small_bound": st["sb"], "y": y, "hi": hi, "outcome": "ok"})
            d = Decomposition(
                r,
                N,
                sorted(st["kept"] + tail),
                M=M,
                small_bound=st["sb"],
                y=y,
                hi=hi,
                tail_target=st["ab"],
                cleanup=st["trace"],
                tail=tail,
                attempts=attempts,
            )
            _gate(d)
            return d
        if hi >= cap:
            break
        hi = min(cap, max(hi + 1, math.floor(hi * config.widen_factor)))
    raise DecompositionFailed(
        f"no construction found for r={format_rational(r)}, N={N} within ratio {config.max_ratio}",
        attempts,
        M=M,
    )


def _solve_tail(M: int, hi: int, st: dict, config: PipelineConfig, attempts: list):
    """Try the tail with the minimal smoothness bound, then with every integer of the window.

    The residue solver goes first; the exhaustive search is the fallback for
    small windows, where random residue picks can miss a rare solution.
    """
    ab = st["ab"]
    for y in dict.fromkeys([st["y"], max(st["y"], hi)]):
        si = enumerate_smooth(M, hi, y)
        if si.reciprocal_total < ab:
            continue
        if si.reciprocal_total < ab + 1:
            try:
                return solve_by_residues(si, ab, tries=config.residue_tries), y
            except InfeasibleError:
                continue
            except SearchBudgetExceeded:
                pass
        if si.l > config.exhaustive_max_l:
            attempts.append({"small_bound": st["sb"], "y": y, "hi": hi, "outcome": "budget_exceeded"})
            continue
        try:
            return solve_reciprocal_subset(si, ab, node_budget=config.node_budget, order="prime"), y
        except InfeasibleError:
            continue
        except SearchBudgetExceeded as exc:
            attempts.append({"small_bound": st["sb"], "y": y, "hi": hi, "outcome": exc.reason})
    return None, None


def _prepare(r, N, M, sb, config: PipelineConfig) -> dict:
    """Cleanup for one small bound; returns kept terms, tail target and smoothness bound."""
    trace = None
    if M - 1 >= N:
        iv = HarmonicInterval(N, M - 1)
        lt = config.large_threshold if config.large_threshold is not None else M
        trace = cleanup(
            N,
            M / N,
            sb,
            lt,
            CleanupConfig(delta=config.delta, methods=config.cleanup_methods),
            interval=iv,
        )
        removed = set(trace.removed)
        kept = [n for n in iv if n not in removed]
        kept_sum = trace.residual
    else:
        kept, kept_sum = [], Fraction(0)
    ab = r - kept_sum
    if ab <= 0:
        raise InfeasibleError("kept interval already reaches r")
    y = max(sb, _largest_pp(ab.denominator, M), 2)
    return {"sb": sb, "trace": trace, "kept": kept, "ab": ab, "y": y}


def _gate(d: Decomposition) -> None:
    rep = verify(d)
    if not rep["valid"]:
        raise AssertionError(f"pipeline produced an invalid decomposition: {rep}")


def verify(d: Decomposition | None = None, *, terms=None, r=None, N=None) -> dict:
    """Re-check a representation from scratch and report its shape."""
    if d is not None:
        terms, r, N = d.terms, d.r, d.N
    terms = list(terms)
    r = Fraction(r)
    total = reciprocal_sum(terms) if terms else Fraction(0)
    distinct = len(set(terms)) == len(terms)
    above = all(x >= N for x in terms)
    exact = total == r
    xk = max(terms) if terms else None
    ratio = xk / N if xk else None
    scale = float(r) * math.log(math.log(N)) / math.log(N) if N >= 3 else None
    return {
        "valid": bool(terms) and exact and distinct and above and all(x > 0 for x in terms),
        "exact_sum": exact,
        "sum": format_rational(total),
        "distinct": distinct,
        "all_at_least_N": above,
        "k": len(terms),
        "max_denominator": xk,
        "ratio": ratio,
        "excess": None if ratio is None else ratio / math.exp(float(r)) - 1.0,
        "loglog_scale": scale,
    }


def largest_prime_in(terms) -> int:
    sv = get_sieve()
    best = 1
    for x in terms:
        if x <= sv.limit:
            best = max(best, int(sv.greatest_prime_factor[x]))
        else:
            factors, rest = factor_over_base(x, math.isqrt(x) + 1)
            best = max([best, rest] + [f.p for f in factors])
    return best


def tightness_check(d: Decomposition | None = None, slack: float = 2.0, *, terms=None) -> dict:
    """Largest prime ``p`` dividing any term against ``slack * x_k / log x_k``.

    Single-term representations are flagged as the boundary case rather than
    counted as a failure of the construction.
    """
    if slack < 1:
        raise ValueError("slack must be at least 1")
    terms = sorted(d.terms if d is not None else terms)
    xk = terms[-1]
    p = largest_prime_in(terms)
    bound = xk / math.log(xk)
    return {
        "p": p,
        "x_k": xk,
        "x_k_over_log": bound,
        "normalized": p * math.log(xk) / xk,
        "slack": slack,
        "passes": p <= slack * bound,
        "boundary_case": len(terms) == 1,
    }


def min_ratio_bruteforce(r: Fraction, N: int, x_max: int) -> tuple[Fraction, list[int]]:
    """Exact minimum of ``x_k / x_1`` over subsets of ``[N, x_max]`` with reciprocal sum ``r``.

    Candidate endpoint pairs are tried in increasing ratio; for each, an
    exhaustive search over the integers strictly between decides feasibility.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if x_max < N:
        raise ValueError("x_max must be at least N")
    pairs = sorted(
        ((Fraction(b, a), a, b) for a in range(N, x_max + 1) for b in range(a, x_max + 1)),
        key=lambda t: (t[0], t[1]),
    )
    for ratio, a, b in pairs:
        if a == b:
            if r == Fraction(1, a):
                return ratio, [a]
            continue
        rest = r - Fraction(1, a) - Fraction(1, b)
        if rest < 0:
            continue
        inner = list(range(a + 1, b))
        if rest > reciprocal_sum(inner) if inner else rest > 0:
            continue
        if rest == 0:
            return ratio, [a, b]
        try:
            mid = solve_reciprocal_subset(inner, rest, node_budget=10**9, order="prime")
        except InfeasibleError:
            continue
        return ratio, sorted([a, *mid, b])
    raise InfeasibleError(f"no representation of {format_rational(r)} inside [{N}, {x_max}]")
