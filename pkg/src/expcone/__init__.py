"""Projection, facial structure and error bounds for the exponential cone."""

from ._backend import BACKEND
from .analysis import (
    ExponentFit,
    GammaEstimate,
    SequenceKind,
    TightnessPoint,
    estimate_gamma,
    fit_exponent,
    kl_quotient,
    tightness_sequence,
)
from .faces import (
    FaceDescriptor,
    FaceKind,
    canonical_exposing,
    classify_exposing,
    distance_decomposition,
    face_frame,
    face_meet,
    project_face,
)
from .feasibility import (
    ErrorBoundReport,
    FacialReductionChain,
    FeasibilityProblem,
    Regime,
    assemble_bound,
    build_chain,
    classify_regime,
    distance_to_intersection,
    find_certificate,
    verify_bound,
)
from .geometry import (
    AffineSubspace,
    ConvergenceError,
    Membership,
    MembershipStatus,
    MoreauPair,
    boundary_point,
    contains,
    distance,
    dual_contains,
    project,
    project_dual,
)
from .gfun import GFunction, GKind, growth_constant

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AffineSubspace",
    "ConvergenceError",
    "ErrorBoundReport",
    "ExponentFit",
    "FaceDescriptor",
    "FaceKind",
    "FacialReductionChain",
    "FeasibilityProblem",
    "GFunction",
    "GKind",
    "GammaEstimate",
    "Membership",
    "MembershipStatus",
    "MoreauPair",
    "Regime",
    "SequenceKind",
    "TightnessPoint",
    "assemble_bound",
    "boundary_point",
    "build_chain",
    "canonical_exposing",
    "classify_exposing",
    "classify_regime",
    "contains",
    "distance",
    "distance_decomposition",
    "distance_to_intersection",
    "dual_contains",
    "estimate_gamma",
    "face_frame",
    "face_meet",
    "find_certificate",
    "fit_exponent",
    "growth_constant",
    "kl_quotient",
    "project",
    "project_dual",
    "project_face",
    "tightness_sequence",
    "verify_bound",
]
