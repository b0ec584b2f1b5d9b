"""Generalized inverses of complex matrices and their continuity and derivatives."""

from .calc import MatrixFamily, derivative_bundle, fd_check
from .errors import (
    DimensionMismatch,
    GencoreError,
    GroupInvertibilityLostNearT0,
    HypothesisViolated,
    InternalInconsistency,
    NotAProjector,
    NotGroupInvertible,
)
from .geninv import (
    core_inverse,
    dual_core_inverse,
    group_inverse,
    inverse_bundle,
    mp_inverse,
    verify_identities,
)
from .limits import Thresholds, analyze_sequence, build_trace
from .matcore import RankTolerance, SubspaceBasis
from .subgeo import gap, max_angle, psi_of

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch",
    "GencoreError",
    "GroupInvertibilityLostNearT0",
    "HypothesisViolated",
    "InternalInconsistency",
    "MatrixFamily",
    "NotAProjector",
    "NotGroupInvertible",
    "RankTolerance",
    "SubspaceBasis",
    "Thresholds",
    "analyze_sequence",
    "build_trace",
    "core_inverse",
    "derivative_bundle",
    "dual_core_inverse",
    "fd_check",
    "gap",
    "group_inverse",
    "inverse_bundle",
    "max_angle",
    "mp_inverse",
    "psi_of",
    "verify_identities",
]
