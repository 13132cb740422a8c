"""Interval cleanup: drop terms from a harmonic interval until the denominator of
what is left has only small prime-power factors.

Terms whose largest prime-power factor exceeds ``large_threshold`` are removed
outright.  Then the remaining offending prime powers ``q`` are cancelled one at
a time, largest first: a few multiples ``q*m`` are removed so that the removed
reciprocals match the residual's ``1/q`` part modulo ``q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CleanupIncomplete, InfeasibleError
from .primes import (
    FactorSieve,
    PrimePower,
    factor_over_base,
    get_sieve,
    prime_powers_between,
    valuation,
)
from .rational import HarmonicInterval, reciprocal_sum
from .residue import cap_condition7, corollary_select, min_subset_for_residue

METHODS = ("corollary", "extended", "strip")


@dataclass
class CleanupConfig:
    delta: float = 0.5
    # tried in order for each offending prime power; "corollary" alone is the strict construction
    methods: tuple[str, ...] = METHODS
    budget_slack: float = 2.0

    def __post_init__(self) -> None:
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")


@dataclass
class CleanupStage:
    q: PrimePower
    method: str
    removed: list[int] = field(default_factory=list)
    target: int | None = None
    revisit: bool = False
    note: str = ""

    @property
    def reciprocal_sum(self) -> Fraction:
        return reciprocal_sum(self.removed)

    def to_dict(self) -> dict:
        return {
            "q": self.q.value,
            "p": self.q.p,
            "a": self.q.a,
            "method": self.method,
            "target": self.target,
            "removed": self.removed,
            "revisit": self.revisit,
            "note": self.note,
        }


@dataclass
class CleanupTrace:
    interval: HarmonicInterval
    small_bound: int
    large_threshold: int
    large_removed: list[int]
    stages: list[CleanupStage]
    residual: Fraction
    complete: bool = True
    convention: str = "closed"
    failure: str = ""

    @property
    def removed(self) -> list[int]:
        out = list(self.large_removed)
        for st in self.stages:
            out.extend(st.removed)
        return sorted(out)

    @property
    def budget(self) -> Fraction:
        return reciprocal_sum(self.removed)

    @property
    def acted_stages(self) -> list[CleanupStage]:
        return [st for st in self.stages if st.method != "skip"]

    def residual_max_pp(self) -> int:
        factors, rest = factor_over_base(self.residual.denominator, self.interval.hi)
        assert rest == 1
        return max((f.value for f in factors), default=1)

    def to_dict(self) -> dict:
        return {
            "interval": [self.interval.lo, self.interval.hi],
            "convention": self.convention,
            "small_bound": self.small_bound,
            "large_threshold": self.large_threshold,
            "large_removed": self.large_removed,
            "stages": [st.to_dict() for st in self.acted_stages],
            "skipped": [st.q.value for st in self.stages if st.method == "skip"],
            "residual_num_digits": len(str(self.residual.numerator)),
            "residual_den_digits": len(str(self.residual.denominator)),
            "budget": float(self.budget),
            "complete": self.complete,
            "failure": self.failure,
        }

    def report_lines(self) -> list[str]:
        """One JSON object per line: a header, one line per stage, a footer."""
        lines = [
            json.dumps(
                {
                    "interval": [self.interval.lo, self.interval.hi],
                    "convention": self.convention,
                    "small_bound": self.small_bound,
                    "large_threshold": self.large_threshold,
                    "large_removed": len(self.large_removed),
                }
            )
        ]
        for i, st in enumerate(self.stages):
            lines.append(json.dumps({"stage": i, **st.to_dict()}))
        lines.append(
            json.dumps(
                {
                    "complete": self.complete,
                    "residual_num_digits": len(str(self.residual.numerator)),
                    "residual_den_digits": len(str(self.residual.denominator)),
                    "budget": float(self.budget),
                }
            )
        )
        return lines


def _sieve_for(hi: int, sieve: FactorSieve | None) -> FactorSieve:
    s = sieve or get_sieve()
    s._check(hi)
    return s


def remove_large_pp_terms(
    N: int,
    c: float,
    threshold: int,
    *,
    interval: HarmonicInterval | None = None,
    sieve: FactorSieve | None = None,
) -> tuple[list[int], Fraction]:
    """Remove every term whose largest prime-power factor exceeds ``threshold``.

    Works on the open range ``N < n < cN`` unless ``interval`` is given.
    Returns the removed terms and the exact sum of what is kept.
    """
    if threshold < 1:
        raise ValueError("threshold must be positive")
    iv = interval or HarmonicInterval.open(N, c)
    lpp = _sieve_for(iv.hi, sieve).largest_pp
    removed = [n for n in iv if lpp[n] > threshold]
    drop = set(removed)
    return removed, reciprocal_sum(n for n in iv if n not in drop)


def lemma2_sum(
    N: int, c: float, threshold: int, *, sieve: FactorSieve | None = None
) -> tuple[Fraction, float]:
    """Exact ``sum 1/n`` over ``N < n <= cN`` having a prime-power factor above ``threshold``,
    with the main term ``log(c) * (log N - log threshold) / log N`` alongside."""
    hi = math.floor(c * N)
    if hi <= N:
        return Fraction(0), 0.0
    lpp = _sieve_for(hi, sieve).largest_pp
    exact = reciprocal_sum(n for n in range(N + 1, hi + 1) if lpp[n] > threshold)
    # alpha = (log N - log threshold) / log log N  =>  alpha log c log log N / log N
    main = math.log(c) * max(0.0, math.log(N) - math.log(threshold)) / math.log(N)
    return exact, main


def stage_residue(residual: Fraction, q: PrimePower) -> int:
    """Residue of ``q * residual`` modulo ``q`` when ``q`` exactly divides the denominator.

    With ``residual = u / (q w)``, ``p`` not dividing ``w``, this is ``u * w^-1 mod q``.
    """
    qv = q.value
    g = residual.denominator
    w, rem = divmod(g, qv)
    if rem or w % q.p == 0:
        raise ValueError(f"{q} does not exactly divide the denominator")
    return residual.numerator * pow(w, -1, qv) % qv


def cleanup(
    N: int,
    c: float,
    small_bound: int,
    large_threshold: int,
    config: CleanupConfig | None = None,
    *,
    interval: HarmonicInterval | None = None,
    sieve: FactorSieve | None = None,
    raise_on_failure: bool = True,
) -> CleanupTrace:
    """Run the full cleanup on ``N < n < cN`` (or on ``interval`` when given).

    On completion every prime-power factor of the residual denominator is at
    most ``small_bound``.  If some prime power cannot be cancelled with the
    configured methods, :class:`CleanupIncomplete` is raised carrying the
    partial trace (or the trace is returned marked incomplete).
    """
    config = config or CleanupConfig()
    if small_bound < 1:
        raise ValueError("small_bound must be positive")
    iv = interval or HarmonicInterval.open(N, c)
    sv = _sieve_for(iv.hi, sieve)
    lpp = sv.largest_pp
    # the corollary works on an open range; make it coincide with iv
    n_open, c_open = (iv.lo - 1, (iv.hi + 1) / (iv.lo - 1)) if iv.lo > 1 else (0, 0.0)

    large_threshold = max(large_threshold, small_bound)
    large_removed = [n for n in iv if lpp[n] > large_threshold]
    kept = set(iv) - set(large_removed)
    residual = reciprocal_sum(kept)
    trace = CleanupTrace(iv, small_bound, large_threshold, large_removed, [], residual)

    ladder = [q for q in reversed(prime_powers_between(small_bound, large_threshold)) if q.p <= iv.hi]
    pos = 0
    while True:
        factors, rest = factor_over_base(residual.denominator, iv.hi)
        assert rest == 1
        offenders = [f for f in factors if f.value > small_bound]
        if not offenders:
            trace.stages.extend(CleanupStage(q, "skip") for q in ladder[pos:])
            break
        q = max(offenders, key=lambda f: f.value)
        if q.value > large_threshold:
            raise AssertionError(f"prime power {q} above large threshold reappeared")
        at = ladder.index(q)
        revisit = at < pos
        if not revisit:
            trace.stages.extend(CleanupStage(x, "skip") for x in ladder[pos:at])
            pos = at + 1
        target = stage_residue(residual, q)
        stage = None
        errors = []
        for method in config.methods:
            try:
                removed = _cancel(method, q, target, kept, sv, n_open, c_open, config)
            except InfeasibleError as exc:
                errors.append(f"{method}: {exc}")
                continue
            stage = CleanupStage(q, method, sorted(removed), target, revisit, "; ".join(errors))
            break
        if stage is None:
            trace.stages.append(CleanupStage(q, "failed", [], target, revisit, "; ".join(errors)))
            trace.complete = False
            trace.failure = f"could not cancel {q}: " + "; ".join(errors)
            if raise_on_failure:
                raise CleanupIncomplete(trace.failure, trace, q=q.value)
            return trace
        kept.difference_update(stage.removed)
        residual -= reciprocal_sum(stage.removed)
        trace.residual = residual
        trace.stages.append(stage)
        if residual.denominator % q.value == 0:
            raise AssertionError(f"stage {q} left {q} in the denominator")
    return trace


def _cancel(
    method: str,
    q: PrimePower,
    target: int,
    kept: set[int],
    sv: FactorSieve,
    n_open: int,
    c_open: float,
    config: CleanupConfig,
) -> list[int]:
    qv, p = q.value, q.p
    lpp = sv.largest_pp
    if method == "corollary":
        if n_open < 1:
            raise InfeasibleError("interval too short for the corollary")

        def ok(s: int, r: int) -> bool:
            # keep the descent: the new terms q*s*r must be available and s*r must stay below q
            return r < qv and qv * s * r in kept and lpp[s * r] < qv

        sel = corollary_select(q, target, n_open, c_open, delta=config.delta, y=qv - 1, prime_filter=ok)
        removed = sel.denominators
        if any(n not in kept for n in removed):
            raise InfeasibleError("corollary picked a term that is no longer available")
        return removed
    if method == "extended":
        # every available q*m with p not dividing m and m's prime powers below q
        pool = sorted(n for n in kept if n % qv == 0 and (n // qv) % p != 0 and lpp[n // qv] < qv)
        residues = [pow(n // qv, -1, qv) for n in pool]
        idx = min_subset_for_residue(residues, qv, target)
        if idx is None:
            raise InfeasibleError(f"{len(pool)} multiples of {qv} cannot reach residue {target}")
        return [pool[i] for i in idx]
    if method == "strip":
        return sorted(n for n in kept if valuation(n, p) >= q.a)
    raise ValueError(method)

