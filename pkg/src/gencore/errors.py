"""Exception types shared across modules.

Each carries a stable ``code`` and a ``details`` dict so the CLI can emit a
machine-readable error object without knowing the individual classes.
"""

from __future__ import annotations


class GencoreError(Exception):
    code = "ERROR"
    # CLI exit status: 2 for existence/hypothesis failures, 1 for bad input
    exit_code = 2

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class NotGroupInvertible(GencoreError):
    """Index of the matrix exceeds one (``rank(a @ a) < rank(a)``)."""

    code = "NOT_GROUP_INVERTIBLE"


class NotAProjector(GencoreError):
    code = "NOT_A_PROJECTOR"


class HypothesisViolated(GencoreError):
    """A bound's hypotheses fail; ``report`` holds the partial BoundReport."""

    code = "HYPOTHESIS_VIOLATED"

    def __init__(self, message: str, report=None, **details):
        super().__init__(message, **details)
        self.report = report


class InternalInconsistency(GencoreError):
    code = "INTERNAL_INCONSISTENCY"


class GroupInvertibilityLostNearT0(GencoreError):
    code = "GROUP_INVERTIBILITY_LOST"


class DimensionMismatch(GencoreError, ValueError):
    code = "DIMENSION_MISMATCH"
    exit_code = 1
