import itertools
from fractions import Fraction

import pytest


def brute_force_subsets(members, target):
    """All subsets (as sorted tuples) of ``members`` whose reciprocals sum to ``target``."""
    target = Fraction(target)
    out = []
    for k in range(len(members) + 1):
        for combo in itertools.combinations(sorted(members), k):
            if sum((Fraction(1, m) for m in combo), Fraction(0)) == target:
                out.append(combo)
    return out


@pytest.fixture(scope="session")
def sieve():
    from unitfrac.primes import get_sieve

    return get_sieve()
