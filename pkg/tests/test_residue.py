import itertools
import math

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from unitfrac.errors import NoCandidateError, ResidueUnreachable
from unitfrac.primes import PrimePower, largest_prime_power_factor
from unitfrac.residue import (
    ResidueTarget,
    cap_condition7,
    construct_s,
    corollary_select,
    exponential_sum_magnitude,
    find_prime_subset,
    least_residue,
    min_subset_for_residue,
    reachable_residues,
    s_threshold,
)


def test_least_residue_examples():
    assert least_residue(1, 2, 5) == -2
    assert least_residue(3, 1, 7) == 3
    assert least_residue(0, 1, 9) == 0


@given(st.integers(-10**6, 10**6), st.integers(1, 10**4), st.sampled_from(list(sympy.primerange(2, 200)) + [4, 9, 10, 12]))
@settings(max_examples=300, deadline=None)
def test_least_residue_property(a, b, n):
    if math.gcd(b, n) != 1:
        with pytest.raises(ValueError):
            least_residue(a, b, n)
        return
    z = least_residue(a, b, n)
    assert (z * b - a) % n == 0
    assert -n / 2 < z <= n / 2


def test_find_prime_subset_examples():
    assert find_prime_subset([2, 3], ResidueTarget(5, 2)).chosen == (3,)
    assert find_prime_subset([2, 3, 7, 11], ResidueTarget(5, 0)).chosen == ()
    assert find_prime_subset([2, 3, 7, 11], ResidueTarget(5, 4)).chosen == (2, 11)


def _brute_min_subset(pool, n, t):
    for k in range(len(pool) + 1):
        for combo in itertools.combinations(sorted(pool), k):
            if sum(pow(p, -1, n) for p in combo) % n == t:
                return combo
    return None


@given(
    st.sampled_from([5, 7, 11, 13]),
    st.lists(st.sampled_from(list(sympy.primerange(2, 80))), min_size=1, max_size=8, unique=True),
    st.integers(0, 12),
)
@settings(max_examples=150, deadline=None)
def test_find_prime_subset_matches_brute_force(n, pool, t):
    pool = [p for p in pool if p != n]
    t %= n
    expected = _brute_min_subset(pool, n, t)
    if expected is None:
        with pytest.raises(ResidueUnreachable):
            find_prime_subset(pool, ResidueTarget(n, t))
    else:
        sel = find_prime_subset(pool, ResidueTarget(n, t))
        assert sel.chosen == expected
        assert sel.verify()


def test_pool_must_be_coprime():
    with pytest.raises(ValueError):
        find_prime_subset([5, 7], ResidueTarget(5, 1))
    with pytest.raises(ValueError):
        ResidueTarget(5, 5)


def test_first_200_primes_reach_everything_small():
    first = list(sympy.primerange(2, sympy.prime(202) + 1))
    for n in sympy.primerange(2, 30):
        pool = [p for p in first if p != n][:200]
        mask = reachable_residues([pow(p, -1, n) for p in pool], n)
        assert mask.all()


def test_min_subset_dp_small():
    assert min_subset_for_residue([3, 2, 3, 1], 5, 4) == [0, 3]
    assert min_subset_for_residue([2], 4, 1) is None


def test_construct_s_examples():
    assert s_threshold(7, 100, 0) == pytest.approx(1.93, abs=0.01)
    assert construct_s(PrimePower(7, 1), 100, 2, 0, 10) == 2
    # q above N: threshold below 1, so s = 1
    assert construct_s(PrimePower(101, 1), 100, 2, 0.5, 100) == 1


def test_construct_s_natural_log_threshold():
    # with natural logs the threshold for q=2, N=4, delta=0 is 4 / (2 log^3 2) ~ 6.006;
    # no odd integer with prime powers <= 4 lies above it, so no candidate exists
    assert s_threshold(2, 4, 0) == pytest.approx(6.006, abs=1e-3)
    with pytest.raises(NoCandidateError):
        construct_s(PrimePower(2, 1), 4, 2, 0, 4)


def test_corollary_examples():
    sel = corollary_select(PrimePower(7, 1), 4, 100, 2)
    assert sel.s == 2 and sel.primes == [11, 13]
    assert sel.denominators == [154, 182]
    assert sel.verify()
    empty = corollary_select(PrimePower(7, 1), 0, 100, 2)
    assert empty.primes == [] and empty.denominators == []
    with pytest.raises(ResidueUnreachable) as info:
        corollary_select(PrimePower(7, 1), 5, 100, 2)
    assert info.value.details["reachable"] == 4


@pytest.mark.parametrize("q", [PrimePower(61, 1), PrimePower(67, 1), PrimePower(11, 2), PrimePower(47, 1)])
def test_corollary_invariants(q):
    N, c = 1000, 2
    for t in range(q.value):
        try:
            sel = corollary_select(q, t, N, c)
        except ResidueUnreachable:
            continue
        assert sel.verify()
        for n, r in zip(sel.denominators, sel.primes):
            assert N < n < c * N
            if sel.s < q.value and r < q.value:
                assert largest_prime_power_factor(n).value == q.value


def test_diagnostic_helpers():
    assert cap_condition7(1000, 0.5) == pytest.approx(2 * math.log(1000) ** (3 + 1 / 3) / 1000)
    mag, ref = exponential_sum_magnitude([11, 13, 17], 7, 0)
    assert mag == pytest.approx(8.0) and ref == pytest.approx(8 / 7)
