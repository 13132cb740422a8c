import math
from fractions import Fraction

import pytest

from unitfrac.cleanup import (
    CleanupConfig,
    cleanup,
    lemma2_sum,
    remove_large_pp_terms,
    stage_residue,
)
from unitfrac.errors import CleanupIncomplete
from unitfrac.primes import PrimePower, factor_over_base, factorize
from unitfrac.rational import HarmonicInterval, harmonic_sum, reciprocal_sum

EXPECTED_REMOVED = [11, 13, 16, 17, 18, 19]


def test_remove_large_pp_example():
    removed, kept = remove_large_pp_terms(10, 2, 7)
    assert removed == EXPECTED_REMOVED
    budget = sum(Fraction(1, n) for n in EXPECTED_REMOVED)
    assert kept == harmonic_sum(HarmonicInterval(11, 19)) - budget
    assert kept == Fraction(31, 140)


def test_remove_nothing_above_cN():
    removed, kept = remove_large_pp_terms(10, 2, 20)
    assert removed == []
    assert kept == harmonic_sum(HarmonicInterval(11, 19))


def test_lemma2_sum_examples():
    exact, main = lemma2_sum(10, 2, 7)
    # closed range N < n <= cN also contains 20 = 4*5, whose prime powers are small
    assert exact == sum(Fraction(1, n) for n in EXPECTED_REMOVED)
    assert main == pytest.approx(math.log(2) * (math.log(10) - math.log(7)) / math.log(10))
    assert lemma2_sum(10, 2, 20)[0] == 0


def test_lemma2_direct_summation_oracle():
    import sympy

    N, c, thr = 3000, 2, 400
    oracle = sum(
        Fraction(1, n) for n in range(N + 1, c * N + 1) if max(p**a for p, a in sympy.factorint(n).items()) > thr
    )
    assert lemma2_sum(N, c, thr)[0] == oracle


def test_stage_residue():
    r = Fraction(3, 7 * 4)
    assert stage_residue(r, PrimePower(7, 1)) == 3 * pow(4, -1, 7) % 7
    with pytest.raises(ValueError):
        stage_residue(Fraction(1, 49), PrimePower(7, 1))


def _replay(trace, small_bound):
    """Recompute residuals stage by stage and check the descent."""
    residual = harmonic_sum(trace.interval) - reciprocal_sum(trace.large_removed)
    seen = set(trace.large_removed)
    for st in trace.stages:
        for n in st.removed:
            assert n in trace.interval and n not in seen
            seen.add(n)
        if st.removed:
            residual -= reciprocal_sum(st.removed)
        if st.method == "skip":
            continue
        factors, rest = factor_over_base(residual.denominator, trace.interval.hi)
        assert rest == 1
        assert residual.denominator % st.q.value != 0
        assert not [f for f in factors if f.value > max(st.q.value, small_bound)]
    return residual


@pytest.mark.parametrize("N", [100, 500])
def test_cleanup_descent(N):
    trace = cleanup(N, 2, 10, N)
    assert trace.complete
    assert _replay(trace, 10) == trace.residual
    assert all(f.value <= 10 for f in factorize(trace.residual.denominator))
    assert trace.budget == harmonic_sum(trace.interval) - trace.residual


def test_cleanup_example_thresholds():
    trace = cleanup(100, 2, 10, 50)
    assert trace.complete
    assert all(f.value <= 10 for f in factorize(trace.residual.denominator))
    assert trace.budget == harmonic_sum(trace.interval) - trace.residual


def test_cleanup_empty_middle_range():
    trace = cleanup(100, 2, 60, 50)
    assert trace.stages == [] or all(st.method == "skip" for st in trace.stages)
    removed, _ = remove_large_pp_terms(100, 2, 60)
    assert trace.removed == removed


def test_cleanup_incomplete_carries_trace():
    # corollary only, on a short interval: some prime power cannot be cancelled
    cfg = CleanupConfig(methods=("corollary",))
    with pytest.raises(CleanupIncomplete) as info:
        cleanup(30, 1.5, 4, 45, cfg)
    trace = info.value.trace
    assert not trace.complete and trace.failure
    assert info.value.to_dict()["reason"] == "cleanup_incomplete"
    soft = cleanup(30, 1.5, 4, 45, cfg, raise_on_failure=False)
    assert not soft.complete


def test_trace_serialisation():
    import json

    trace = cleanup(100, 2, 10, 100)
    lines = trace.report_lines()
    assert all(json.loads(line) for line in lines)
    d = trace.to_dict()
    assert d["complete"] and d["interval"] == [101, 199]


def test_config_validation():
    with pytest.raises(ValueError):
        CleanupConfig(methods=("magic",))
