"""Prime-power smooth integers in ``[M, hi]`` and exact reciprocal subset sums over them."""

from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import CapExceededError, InfeasibleError, SearchBudgetExceeded
from .primes import FactorSieve, factor_over_base, get_sieve, is_smooth, lcm_up_to
from .rational import reciprocal_sum

DEFAULT_CONVOLUTION_CAP = 10**8
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class SmoothInterval:
    M: int
    hi: int
    y: int
    members: tuple[int, ...]
    P: int = field(repr=False)

    @property
    def l(self) -> int:
        return len(self.members)

    @property
    def reciprocal_total(self) -> Fraction:
        return reciprocal_sum(self.members)

    def to_text(self) -> str:
        return "\n".join([f"{self.M} {self.hi} {self.y}", *map(str, self.members)]) + "\n"


class CMSelection(NamedTuple):
    hi: int
    total: Fraction
    ratio: float


@dataclass
class RepresentationCount:
    count: int
    method: str
    l: int
    P: int
    # True when subsets were counted by reciprocal sum modulo 1 rather than exactly
    modular: bool = False

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "method": self.method,
            "l": self.l,
            "P_digits": len(str(self.P)),
            "modular": self.modular,
        }


def enumerate_smooth(M: int, hi: int, y: int, *, sieve: FactorSieve | None = None) -> SmoothInterval:
    """All ``n`` in ``[M, hi]`` whose prime-power factors are at most ``y``."""
    if M > hi:
        raise ValueError(f"empty range [{M}, {hi}]")
    if y < 2:
        raise ValueError("y must be at least 2")
    members = _smooth_range(M, hi, y, sieve)
    return SmoothInterval(M, hi, y, tuple(members), lcm_up_to(y))


def _smooth_range(M: int, hi: int, y: int, sieve: FactorSieve | None) -> list[int]:
    s = sieve or get_sieve()
    if hi <= s.limit:
        block = s.largest_pp[M : hi + 1]
        return [int(x) + M for x in np.flatnonzero(block <= y)]
    return [n for n in range(M, hi + 1) if is_smooth(n, y, s if n <= s.limit else None)]


def select_cM(
    M: int, ab: Fraction, y: int, *, cap: int | None = None, sieve: FactorSieve | None = None
) -> CMSelection:
    """Smallest ``hi`` where the smooth reciprocal sum over ``[M, hi]`` first reaches ``2*ab``."""
    ab = Fraction(ab)
    if ab <= 0:
        raise ValueError("ab must be positive")
    cap = cap if cap is not None else 64 * M
    goal = 2 * ab
    acc, lo = 0.0, M
    chunk = max(64, M)
    while lo <= cap:
        top = min(cap, lo + chunk - 1)
        members = _smooth_range(lo, top, y, sieve)
        if members:
            csum = np.cumsum(1.0 / np.asarray(members, dtype=float)) + acc
            hit = np.flatnonzero(csum >= float(goal) * (1 - 1e-12))
            if hit.size:
                return _exact_crossing(M, members[int(hit[0]) :], y, goal, sieve, cap)
            acc = float(csum[-1])
        lo = top + 1
        chunk *= 2
    raise CapExceededError(
        f"smooth reciprocal sum over [{M}, {cap}] stays below 2*ab={float(goal):.6g}", cap=cap, M=M
    )


def _exact_crossing(M, tail, y, goal, sieve, cap) -> CMSelection:
    # exact check near the float crossing, walking backwards/forwards as needed
    before = _smooth_range(M, tail[0] - 1, y, sieve) if tail[0] > M else []
    total = reciprocal_sum(before) + Fraction(1, tail[0])
    k = 0
    while total < goal:
        k += 1
        if k >= len(tail):
            more = _smooth_range(tail[-1] + 1, min(cap, 2 * tail[-1]), y, sieve)
            if not more:
                raise CapExceededError("smooth sum never reaches target below cap", cap=cap, M=M)
            tail = list(tail) + more
        total += Fraction(1, tail[k])
    while before and total - Fraction(1, tail[k] if k < len(tail) else before[-1]) >= goal:
        # float overshoot: step back
        last = tail[k]
        total -= Fraction(1, last)
        if k > 0:
            k -= 1
        else:
            tail = [before.pop()] + list(tail)
    hi = tail[k]
    return CMSelection(hi, total, hi / M)


def solve_reciprocal_subset(
    si: SmoothInterval | tuple[int, ...] | list[int],
    ab: Fraction,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    order: str = "value",
) -> list[int]:
    """A subset of the members whose reciprocals sum exactly to ``ab``.

    Depth-first over members from the largest down, skipping before taking.
    With ``order="prime"`` members are grouped by greatest prime factor
    (largest prime first, then by value), which lets the lcm cut fire at the
    end of each group; much faster when many primes are involved.
    A branch is cut when the remaining members cannot reach the residual
    (suffix sums) or when the residual's denominator does not divide the lcm
    of the remaining members.  Failed states are memoized.

    Raises :class:`InfeasibleError` when the search space is exhausted and
    :class:`SearchBudgetExceeded` when ``node_budget`` nodes were expanded first.
    """
    members = sorted(set(si.members if isinstance(si, SmoothInterval) else si), reverse=True)
    if order == "prime":
        members.sort(key=lambda m: (_gpf(m), m), reverse=True)
    elif order != "value":
        raise ValueError(f"unknown order {order!r}")
    ab = Fraction(ab)
    if ab < 0:
        raise ValueError("ab must be non-negative")
    if ab == 0:
        return []
    L = math.lcm(ab.denominator, *members) if members else ab.denominator
    vals = [L // m for m in members]
    k = len(members)
    suffix = [0] * (k + 1)
    step = [L] * (k + 1)  # residual T must be a multiple of step[i] = L / lcm(members[i:])
    run_lcm = 1
    for i in range(k - 1, -1, -1):
        suffix[i] = suffix[i + 1] + vals[i]
        run_lcm = math.lcm(run_lcm, members[i])
        step[i] = L // run_lcm
    T0 = ab.numerator * (L // ab.denominator)
    if T0 > suffix[0]:
        raise InfeasibleError("target exceeds the sum of all reciprocals", target=str(ab))

    failed: set[tuple[int, int]] = set()
    chosen: list[int] = []
    # explicit stack of (index, residual, phase): 0 enter, 1 skip branch done, 2 take branch done
    stack = [(0, T0, 0)]
    nodes = 0
    while stack:
        i, T, phase = stack.pop()
        if phase == 0:
            if T == 0:
                result = sorted(members[j] for j in chosen)
                assert reciprocal_sum(result) == ab
                return result
            if i == k or T > suffix[i] or T % step[i] or (i, T) in failed:
                continue
            nodes += 1
            if nodes > node_budget:
                raise SearchBudgetExceeded(
                    f"gave up after {node_budget} nodes", nodes=node_budget, l=k, target=str(ab)
                )
            stack.append((i, T, 1))
            stack.append((i + 1, T, 0))
        elif phase == 1:
            if vals[i] <= T:
                chosen.append(i)
                stack.append((i, T, 2))
                stack.append((i + 1, T - vals[i], 0))
            else:
                failed.add((i, T))
        else:
            chosen.pop()
            failed.add((i, T))
    raise InfeasibleError(
        f"no subset of {k} members sums to {ab} (exhaustive)", l=k, target=str(ab)
    )


def solve_by_residues(
    si: SmoothInterval | tuple[int, ...] | list[int],
    ab: Fraction,
    *,
    tries: int = 200,
    seed: int = 0,
    final_modulus_cap: int = 400_000,
    steer: int = 16,
) -> list[int]:
    """Subset with reciprocal sum ``ab`` found one prime at a time, modulo 1.

    If the members' reciprocals add up to less than ``ab + 1``, a subset whose
    sum agrees with ``ab`` modulo 1 has sum exactly ``ab``.  Agreement modulo 1
    splits into one congruence per prime ``p``; going from the largest prime
    down, only members whose greatest prime factor is ``p`` are still free to
    fix the ``p``-part, so each group is a small residue subset-sum.  The
    members built from the smallest primes are handled together at the end.
    Each try draws ``steer`` random feasible subsets per group (seeded, so
    runs repeat) and keeps the one leaving the remaining target closest to its
    share of the remaining mass, so the last group, which has almost no mass,
    is asked for something small.  The result is re-summed exactly before it
    is returned.
    """
    members = sorted(set(si.members if isinstance(si, SmoothInterval) else si))
    ab = Fraction(ab)
    if ab < 0:
        raise ValueError("ab must be non-negative")
    if ab == 0:
        return []
    if not members:
        raise InfeasibleError("no members", target=str(ab))
    if reciprocal_sum(members) < ab:
        raise InfeasibleError("target exceeds the sum of all reciprocals", target=str(ab))

    sieve = get_sieve()
    fac = {m: dict(sieve.factorize(m)) for m in members}
    bfac, rest = factor_over_base(ab.denominator, members[-1])
    if rest != 1:
        raise InfeasibleError("target denominator has a prime above every member's", target=str(ab))
    top: dict[int, int] = {f.p: f.a for f in bfac}
    for f in fac.values():
        for p, e in f.items():
            top[p] = max(top.get(p, 0), e)
    gpf = {m: max(fac[m]) for m in members}
    groups_of: dict[int, list[int]] = {}
    for m in members:
        groups_of.setdefault(gpf[m], []).append(m)

    # smallest primes form one joint component while its modulus stays small
    L0, cutoff = 1, 1
    for p in sorted(top):
        if L0 * p ** top[p] > final_modulus_cap:
            break
        L0 *= p ** top[p]
        cutoff = p
    high = sorted((p for p in top if p > cutoff), reverse=True)
    # component key: a prime above the cutoff, or 0 for the joint low part
    mods = {p: p ** top[p] for p in high}
    mods[0] = L0

    def image(num: int, den: int, dfac: dict, key: int) -> int:
        """``mod * num/den`` modulo ``mod``; additive, so members' images just add up."""
        mod = mods[key]
        part = math.prod(p**e for p, e in dfac.items() if (p <= cutoff if key == 0 else p == key))
        return num * (mod // part) * pow(den // part, -1, mod) % mod

    contrib = {
        m: [(p, image(1, m, fac[m], p)) for p in fac[m] if p > cutoff] + [(0, image(1, m, fac[m], 0))]
        for m in members
    }
    bdict = {f.p: f.a for f in bfac}
    start = {key: image(ab.numerator, ab.denominator, bdict, key) for key in mods}

    order = [(p, groups_of.get(p, [])) for p in high] + [(0, [m for m in members if gpf[m] <= cutoff])]
    plan = []
    for key, grp in order:
        cs = [dict(contrib[m])[key] for m in grp]
        plan.append((key, mods[key], grp, cs, _reach_tables(cs, mods[key])))

    # a component whose need no earlier member can change fails the same way on every try
    movable, seen_keys = set(), set()
    for key, _, grp, _, _ in plan:
        if key in seen_keys:
            movable.add(key)
        for m in grp:
            seen_keys.update(k2 for k2, c in contrib[m] if c)
    masses = [sum(1.0 / m for m in grp) for _, _, grp, _, _ in plan]
    after = list(itertools.accumulate(reversed(masses + [0.0])))[::-1][1:]
    ab_f = float(ab)

    failures: dict[int, int] = {}
    for attempt in range(tries):
        rng = random.Random(seed * 1_000_003 + attempt)
        need = dict(start)
        chosen: list[int] = []
        t_f = ab_f
        for j, (key, mod, grp, cs, tab) in enumerate(plan):
            if not tab[0][need[key] % mod]:
                if key not in movable:
                    raise InfeasibleError(
                        f"component {key or 'low'} cannot be cleared", target=str(ab), tries=attempt + 1
                    )
                failures[key] = failures.get(key, 0) + 1
                break
            # keep the remaining target proportional to the remaining mass
            goal = t_f * after[j] / (after[j] + masses[j]) if masses[j] else t_f
            best = None
            for _ in range(steer if len(grp) > 1 and key else 1):
                pick = _sample(cs, mod, need[key], tab, rng, rng.random())
                gap = abs(t_f - sum(1.0 / grp[i] for i in pick) - goal)
                if best is None or gap < best[0]:
                    best = (gap, pick)
            for i in best[1]:
                m = grp[i]
                chosen.append(m)
                t_f -= 1.0 / m
                for k2, c in contrib[m]:
                    need[k2] = (need[k2] - c) % mods[k2]
        else:
            out = sorted(chosen)
            if reciprocal_sum(out) == ab:
                return out
    raise SearchBudgetExceeded(
        f"residue search found nothing in {tries} tries",
        tries=tries,
        l=len(members),
        target=str(ab),
        failures={str(k): v for k, v in failures.items()},
    )


def _reach_tables(cs: list[int], mod: int) -> list[np.ndarray]:
    """``tabs[i][t]``: residue ``t`` reachable as a subset sum of ``cs[i:]``."""
    tabs = [None] * (len(cs) + 1)
    cur = np.zeros(mod, dtype=bool)
    cur[0] = True
    tabs[len(cs)] = cur
    for i in range(len(cs) - 1, -1, -1):
        cur = cur | np.roll(cur, cs[i] % mod)
        tabs[i] = cur
    return tabs


def _sample(cs, mod, need, tabs, rng, p_take: float = 0.5) -> list[int] | None:
    if not tabs[0][need % mod]:
        return None
    out, t = [], need % mod
    for i, c in enumerate(cs):
        nxt = tabs[i + 1]
        skip = bool(nxt[t])
        take = bool(nxt[(t - c) % mod])
        if take and (not skip or rng.random() < p_take):
            out.append(i)
            t = (t - c) % mod
    return out


def _gpf(n: int) -> int:
    s = get_sieve()
    if n <= s.limit:
        return int(s.greatest_prime_factor[n])
    return max(f.p for f in factor_over_base(n, math.isqrt(n) + 1)[0]) if n > 1 else 1


def _scaled(si: SmoothInterval, ab: Fraction) -> tuple[list[int], int, int]:
    P = si.P
    bad = [m for m in si.members if P % m]
    if bad:
        raise ValueError(f"members {bad[:5]} do not divide P")
    if P % ab.denominator:
        raise ValueError(f"denominator {ab.denominator} does not divide P")
    return [P // m for m in si.members], ab.numerator * (P // ab.denominator), P


def count_representations(
    si: SmoothInterval,
    ab: Fraction,
    *,
    method: str = "exact-convolution",
    cap: int = DEFAULT_CONVOLUTION_CAP,
) -> RepresentationCount:
    """Number of member subsets whose reciprocals sum to ``ab``.

    ``exact-convolution`` multiplies out ``prod (1 + z^{P/m_j})`` as an integer
    polynomial and reads off the coefficient of ``z^{ab * P}``.
    ``float-exponential`` evaluates ``(1/P) sum_h e(-ab h) prod (1 + e(h/m_j))``;
    it counts subsets whose sum agrees with ``ab`` modulo 1.
    ``brute-force`` lists every subset sum.  The empty subset counts for ``ab = 0``.
    """
    ab = Fraction(ab)
    if ab < 0:
        raise ValueError("ab must be non-negative")
    if si.P > cap:
        raise CapExceededError(f"P has {len(str(si.P))} digits, above cap {cap}", P_digits=len(str(si.P)))
    vals, target, P = _scaled(si, ab)
    l = len(vals)
    if method == "exact-convolution":
        count = _convolution_count(vals, target, cap)
        return RepresentationCount(count, method, l, P)
    if method == "brute-force":
        sums = subset_sums(vals)
        return RepresentationCount(int(np.count_nonzero(sums == target)), method, l, P)
    if method == "float-exponential":
        return RepresentationCount(_exponential_count(si.members, ab, P), method, l, P, modular=True)
    raise ValueError(f"unknown method {method!r}")


def _convolution_count(vals: list[int], target: int, cap: int) -> int:
    if target > sum(vals):
        return 0
    return int(_convolution_poly(vals, cap)[target])


def _convolution_poly(vals: list[int], cap: int) -> np.ndarray:
    total = sum(vals)
    if total + 1 > cap:
        raise CapExceededError(f"convolution length {total + 1} above cap {cap}", length=total + 1)
    # counts can reach 2^l; fall back to Python ints past int64
    dtype = np.int64 if len(vals) < 62 else object
    poly = np.zeros(total + 1, dtype=dtype)
    poly[0] = 1
    reach = 0
    for v in vals:
        poly[v : reach + v + 1] += poly[: reach + 1].copy()
        reach += v
    return poly


def representation_histogram(si: SmoothInterval, *, cap: int = DEFAULT_CONVOLUTION_CAP) -> np.ndarray:
    """Entry ``k`` is the number of member subsets with reciprocal sum ``k / P``."""
    if si.P > cap:
        raise CapExceededError(f"P has {len(str(si.P))} digits, above cap {cap}", P_digits=len(str(si.P)))
    vals, _, _ = _scaled(si, Fraction(0))
    return _convolution_poly(vals, cap)


def subset_sums(vals: list[int]) -> np.ndarray:
    """Every subset sum, one entry per subset (length ``2^len(vals)``)."""
    if len(vals) > 26:
        raise CapExceededError("brute force limited to 26 members", l=len(vals))
    sums = np.zeros(1, dtype=np.int64)
    for v in vals:
        sums = np.concatenate([sums, sums + v])
    return sums


def _exponential_count(members, ab: Fraction, P: int) -> int:
    h = np.arange(-(P // 2), P - P // 2, dtype=np.float64)
    acc = np.exp(-2j * np.pi * float(ab) * h)
    for m in members:
        acc *= 1.0 + np.exp(2j * np.pi * h / m)
    return int(round(acc.sum().real / P))


def amplitude(members, h: float) -> complex:
    """``A(h) = prod (1 + e(h / m_j))``."""
    out = complex(1.0)
    for m in members:
        out *= 1.0 + cmath.exp(2j * math.pi * h / m)
    return out


def bound_diagnostics(
    si: SmoothInterval, ab: Fraction, samples: int = 200, *, seed: int = 0, max_l: int = 64
) -> dict:
    """Numerical look at the amplitude ``A(h)`` behind the subset count.

    Checks ``Re(e(-ab h) A(h)) >= 0`` for every integer ``|h| < M/2`` (capped at
    ``samples`` evenly spread values when there are more) and the largest
    ``|A(h)| / 2^l`` over ``samples`` random ``M/2 <= |h| <= P/2``.
    """
    if si.l > max_l:
        raise CapExceededError(f"l={si.l} above float limit {max_l}", l=si.l)
    ab = Fraction(ab)
    l, M, P = si.l, si.M, si.P
    full = 2.0**l
    a0 = amplitude(si.members, 0)
    near = [h for h in range(-((M - 1) // 2), (M - 1) // 2 + 1) if 2 * abs(h) < M]
    if len(near) > samples:
        near = sorted(set(np.linspace(near[0], near[-1], samples).round().astype(int).tolist()))
    near_vals = [(cmath.exp(-2j * math.pi * float(ab) * h) * amplitude(si.members, h)).real for h in near]
    rng = np.random.default_rng(seed)
    far_ratio = None
    far_h = []
    if P // 2 >= math.ceil(M / 2):
        far_h = rng.integers(math.ceil(M / 2), P // 2 + 1, size=samples).tolist()
        far_h = [h if rng.random() < 0.5 else -h for h in far_h]
        far_ratio = max(abs(amplitude(si.members, h)) / full for h in far_h)
    min_near = min(near_vals) if near_vals else None
    return {
        "l": l,
        "M": M,
        "P": P,
        "A0": a0.real,
        "A0_expected": full,
        "near_h_checked": len(near),
        "near_min_real": min_near,
        "near_min_real_scaled": None if min_near is None else min_near / full,
        "near_nonnegative": all(v >= -1e-9 * full for v in near_vals),
        "far_h_sampled": len(far_h),
        "far_max_ratio": far_ratio,
        "far_bound": 1.0 / (2 * P),
    }


def lemma4_check(
    M: int, h: float, epsilon: float, *, kappa: float = 0.25, sieve: FactorSieve | None = None
) -> str:
    """Classify ``h`` for the short-interval dichotomy.

    With members the smooth integers in ``[M, (1 + 1/log M) M]`` (bound
    ``M^{1/4 - epsilon}``) and ``I = (h - M^{3/4}, h + M^{3/4})``: ``"case1"`` if at
    least ``kappa * M^{3/4}`` members divide no integer of ``I``, ``"case2"`` if an
    integer of ``I`` is divisible by ``lcm(1..M^{1/4-epsilon})``, else ``"violation"``.
    """
    if not 0 < epsilon < 0.125:
        raise ValueError("epsilon must lie in (0, 1/8)")
    return lemma4_details(M, h, epsilon, kappa=kappa, sieve=sieve)["verdict"]


def lemma4_details(
    M: int, h: float, epsilon: float, *, kappa: float = 0.25, sieve: FactorSieve | None = None
) -> dict:
    y = max(1, math.floor(M ** (0.25 - epsilon)))
    top = math.floor((1 + 1 / math.log(M)) * M)
    members = _smooth_range(M, top, y, sieve) if y >= 2 else []
    width = M**0.75
    lo, hi = h - width, h + width
    missing = sum(1 for m in members if not _has_multiple_in(m, lo, hi))
    P = lcm_up_to(y)
    case1 = missing >= kappa * width
    case2 = _has_multiple_in(P, lo, hi)
    verdict = "case1" if case1 else "case2" if case2 else "violation"
    return {
        "M": M,
        "h": h,
        "epsilon": epsilon,
        "y": y,
        "l": len(members),
        "members_missing_I": missing,
        "case1_threshold": kappa * width,
        "P": P,
        "P_multiple_in_I": case2,
        "verdict": verdict,
    }


def _has_multiple_in(m: int, lo: float, hi: float) -> bool:
    # smallest multiple of m strictly above lo, compared against hi (open interval)
    k = math.floor(lo / m) + 1
    return k * m < hi


def read_instance(path: str | Path) -> SmoothInterval:
    """Parse the instance format: header ``M hi y`` then one member per line."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty instance file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"{path}: header must be 'M hi y'")
    M, hi, y = map(int, head)
    members = tuple(sorted(int(x) for x in lines[1:]))
    if len(set(members)) != len(members):
        raise ValueError(f"{path}: duplicate members")
    if any(not M <= m <= hi for m in members):
        raise ValueError(f"{path}: members outside [{M}, {hi}]")
    return SmoothInterval(M, hi, y, members, lcm_up_to(y))


def write_instance(si: SmoothInterval, path: str | Path) -> None:
    Path(path).write_text(si.to_text())
