"""Exception taxonomy. Every error carries a short machine-readable ``reason``."""

from __future__ import annotations


class UnitFracError(Exception):
    reason = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"reason": self.reason, "message": str(self), **_jsonable(self.details)}


class SieveRangeError(UnitFracError, ValueError):
    reason = "sieve_range"


class InfeasibleError(UnitFracError):
    """An exhaustive search finished without finding what was asked for."""

    reason = "infeasible"


class ResidueUnreachable(InfeasibleError):
    reason = "residue_unreachable"


class NoCandidateError(InfeasibleError):
    reason = "no_candidate"


class SearchBudgetExceeded(UnitFracError):
    """The search gave up before finishing; nothing is known about feasibility."""

    reason = "budget_exceeded"


class CapExceededError(UnitFracError):
    reason = "cap_exceeded"


class CleanupIncomplete(UnitFracError):
    reason = "cleanup_incomplete"

    def __init__(self, message: str, trace, **details):
        super().__init__(message, **details)
        self.trace = trace


class DecompositionFailed(UnitFracError):
    reason = "decomposition_failed"

    def __init__(self, message: str, attempts: list, **details):
        super().__init__(message, **details)
        self.attempts = attempts


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (str, int, float, bool)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = [x if isinstance(x, (str, int, float, bool)) else str(x) for x in v]
        else:
            out[k] = str(v)
    return out
