"""Exact Egyptian-fraction constructions over short intervals, with the number-theoretic
tools they rest on: prime-power sieves, Dickman's function, residue subset sums,
smooth-number reciprocal sums and an end-to-end decomposition pipeline."""

from .cleanup import CleanupConfig, CleanupTrace, cleanup, lemma2_sum, remove_large_pp_terms
from .dickman import RhoEvaluator, debruijn_estimate, rho
from .errors import (
    CapExceededError,
    CleanupIncomplete,
    DecompositionFailed,
    InfeasibleError,
    SearchBudgetExceeded,
    SieveRangeError,
    UnitFracError,
)
from .pipeline import (
    Decomposition,
    PipelineConfig,
    decompose,
    min_ratio_bruteforce,
    tightness_check,
    verify,
)
from .primes import factorize, get_sieve, is_smooth, psi, psi_prime
from .rational import HarmonicInterval, find_M, format_rational, harmonic_sum, parse_rational
from .residue import ResidueTarget, corollary_select, find_prime_subset, least_residue
from .smooth import (
    SmoothInterval,
    count_representations,
    enumerate_smooth,
    select_cM,
    solve_by_residues,
    solve_reciprocal_subset,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "CleanupConfig",
    "CleanupIncomplete",
    "CleanupTrace",
    "Decomposition",
    "DecompositionFailed",
    "HarmonicInterval",
    "InfeasibleError",
    "PipelineConfig",
    "ResidueTarget",
    "RhoEvaluator",
    "SearchBudgetExceeded",
    "SieveRangeError",
    "SmoothInterval",
    "UnitFracError",
    "cleanup",
    "corollary_select",
    "count_representations",
    "debruijn_estimate",
    "decompose",
    "enumerate_smooth",
    "factorize",
    "find_M",
    "find_prime_subset",
    "format_rational",
    "get_sieve",
    "harmonic_sum",
    "is_smooth",
    "least_residue",
    "lemma2_sum",
    "min_ratio_bruteforce",
    "parse_rational",
    "psi",
    "psi_prime",
    "remove_large_pp_terms",
    "rho",
    "select_cM",
    "solve_by_residues",
    "solve_reciprocal_subset",
    "tightness_check",
    "verify",
]
