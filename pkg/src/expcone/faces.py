"""Face lattice of the exponential cone.

The nontrivial faces are the rays ``F_β = cone{(1-β, 1, e^{1-β})}``, the ray
``F_∞ = {(x, 0, 0) : x <= 0}``, the non-exposed ray ``F_ne = {(0, 0, z) : z >= 0}``
and the two-dimensional face ``F_{-∞} = {(x, 0, z) : x <= 0, z >= 0}``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import MembershipStatus, as_point

__all__ = [
    "BETA_MAX",
    "DistanceDecomposition",
    "FaceDescriptor",
    "FaceFrame",
    "FaceKind",
    "beta_sheet_terms",
    "canonical_exposing",
    "classify_exposing",
    "distance_decomposition",
    "face_dual_contains",
    "face_frame",
    "face_meet",
    "project_face",
]

BETA_MAX = 700.0


class FaceKind(str, enum.Enum):
    FULL = "Full"
    FBETA = "FBeta"
    FINF = "FInf"
    FNEGINF = "FNegInf"
    FNE = "FNe"
    ZERO = "Zero"


@dataclass(frozen=True)
class FaceDescriptor:
    kind: FaceKind
    beta: float | None = None

    def __post_init__(self):
        if self.kind is FaceKind.FBETA:
            if self.beta is None or not math.isfinite(self.beta):
                raise ValueError("FBeta needs a finite beta")
        elif self.beta is not None:
            raise ValueError(f"{self.kind.value} carries no beta")

    @classmethod
    def full(cls):
        return cls(FaceKind.FULL)

    @classmethod
    def fbeta(cls, beta: float):
        return cls(FaceKind.FBETA, float(beta))

    @classmethod
    def finf(cls):
        return cls(FaceKind.FINF)

    @classmethod
    def fneginf(cls):
        return cls(FaceKind.FNEGINF)

    @classmethod
    def fne(cls):
        """The non-exposed ray; never returned by :func:`classify_exposing`."""
        return cls(FaceKind.FNE)

    @classmethod
    def zero(cls):
        return cls(FaceKind.ZERO)

    @property
    def is_polyhedral(self) -> bool:
        return self.kind is not FaceKind.FULL

    def __str__(self):
        if self.kind is FaceKind.FBETA:
            return f"FBeta({self.beta:g})"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "FaceDescriptor":
        text = text.strip()
        m = re.fullmatch(r"FBeta\(\s*([^)]+)\)", text)
        if m:
            return cls.fbeta(float(m.group(1)))
        try:
            return cls(FaceKind(text))
        except ValueError:
            raise ValueError(f"unknown face {text!r}") from None


@dataclass(frozen=True)
class FaceFrame:
    z_hat: np.ndarray
    f_hat: np.ndarray
    p_hat: np.ndarray


@dataclass(frozen=True)
class DistanceDecomposition:
    dist_to_hyperplane: float
    dist_within_hyperplane: float
    f_inner_sign: int


def _check_beta(beta):
    if not math.isfinite(beta) or abs(beta) > BETA_MAX:
        raise OverflowError(f"|beta| must be at most {BETA_MAX:g}, got {beta}")


def face_frame(beta: float) -> FaceFrame:
    _check_beta(beta)
    a = math.exp(beta - 1.0)
    b = math.exp(1.0 - beta)
    z_hat = np.array([1.0, beta, -a])
    f_hat = np.array([1.0 - beta, 1.0, b])
    p_hat = np.array([beta * b + a, -b - (1.0 - beta) * a, beta * beta - beta + 1.0])
    return FaceFrame(z_hat, f_hat, p_hat)


def canonical_exposing(face: FaceDescriptor) -> np.ndarray:
    """A dual vector exposing ``face`` (for the non-exposed ``F_ne`` none exists)."""
    k = face.kind
    if k is FaceKind.FBETA:
        _check_beta(face.beta)
        return np.array([-1.0, -face.beta, math.exp(face.beta - 1.0)])
    if k is FaceKind.FINF:
        return np.array([0.0, 0.0, 1.0])
    if k is FaceKind.FNEGINF:
        return np.array([0.0, 1.0, 0.0])
    if k is FaceKind.ZERO:
        return np.array([-1.0, 0.0, 1.0])
    if k is FaceKind.FULL:
        return np.zeros(3)
    raise ValueError("F_ne is not exposed")


def classify_exposing(z, tol: float = 1e-9) -> FaceDescriptor:
    """Identify the face ``K ∩ {z}⊥`` for a nonzero ``z`` in K*."""
    z = as_point(z, "exposing vector")
    nz = float(np.linalg.norm(z))
    if nz == 0:
        raise ValueError("the zero vector exposes the whole cone")
    mem = geometry.dual_contains(z / nz, tol)
    if mem.status is MembershipStatus.OUTSIDE:
        raise ValueError(f"{z.tolist()} is not in the dual cone (violation {mem.violation:.3g})")
    if mem.status is MembershipStatus.INTERIOR:
        return FaceDescriptor.zero()
    zx, zy, zz = z / nz
    if abs(zx) < tol:
        if zz > tol:
            return FaceDescriptor.finf()
        if zy > tol:
            return FaceDescriptor.fneginf()
        raise ValueError(f"{z.tolist()} does not expose a proper face")
    return FaceDescriptor.fbeta(zy / zx)


def project_face(face: FaceDescriptor, p) -> np.ndarray:
    p = as_point(p)
    k = face.kind
    if k is FaceKind.FULL:
        return geometry.project(p).primal
    if k is FaceKind.FBETA:
        f = face_frame(face.beta).f_hat
        return max(float(p @ f), 0.0) / float(f @ f) * f
    if k is FaceKind.FINF:
        return np.array([min(p[0], 0.0), 0.0, 0.0])
    if k is FaceKind.FNE:
        return np.array([0.0, 0.0, max(p[2], 0.0)])
    if k is FaceKind.FNEGINF:
        return np.array([min(p[0], 0.0), 0.0, max(p[2], 0.0)])
    return np.zeros(3)


def project_face_many(face: FaceDescriptor, P) -> np.ndarray:
    """Row-wise version of :func:`project_face`."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    k = face.kind
    out = np.zeros_like(P)
    if k is FaceKind.FULL:
        return geometry.project_many(P)[0]
    if k is FaceKind.FBETA:
        f = face_frame(face.beta).f_hat
        return np.maximum(P @ f, 0.0)[:, None] / float(f @ f) * f
    if k in (FaceKind.FINF, FaceKind.FNEGINF):
        out[:, 0] = np.minimum(P[:, 0], 0.0)
    if k in (FaceKind.FNE, FaceKind.FNEGINF):
        out[:, 2] = np.maximum(P[:, 2], 0.0)
    return out


def face_dual_contains(face: FaceDescriptor, z, tol: float = 1e-9) -> bool:
    """Membership of ``z`` in the dual cone of ``face`` (absolute tolerance)."""
    z = np.asarray(z, dtype=float)
    k = face.kind
    if k is FaceKind.FULL:
        return geometry.dual_contains(z, tol).inside
    if k is FaceKind.FBETA:
        f = face_frame(face.beta).f_hat
        return float(z @ f) / float(np.linalg.norm(f)) >= -tol
    if k is FaceKind.FINF:
        return z[0] <= tol
    if k is FaceKind.FNE:
        return z[2] >= -tol
    if k is FaceKind.FNEGINF:
        return z[0] <= tol and z[2] >= -tol
    return True


def face_meet(face: FaceDescriptor, z, tol: float = 1e-9) -> FaceDescriptor:
    """``face ∩ {z}⊥`` for ``z`` in the dual of ``face``."""
    z = np.asarray(z, dtype=float)
    nz = float(np.linalg.norm(z))
    if nz <= tol:
        return face
    if not face_dual_contains(face, z / nz, tol):
        raise ValueError(f"{z.tolist()} is not in the dual of {face}")
    zx, zy, zz = z / nz
    k = face.kind
    if k is FaceKind.FULL:
        return classify_exposing(z, tol)
    if k is FaceKind.FBETA:
        f = face_frame(face.beta).f_hat
        return FaceDescriptor.zero() if float(z @ f) / nz > tol * np.linalg.norm(f) else face
    if k is FaceKind.FINF:
        return FaceDescriptor.zero() if zx < -tol else face
    if k is FaceKind.FNE:
        return FaceDescriptor.zero() if zz > tol else face
    if k is FaceKind.FNEGINF:
        neg_x = zx < -tol
        pos_z = zz > tol
        if neg_x and pos_z:
            return FaceDescriptor.zero()
        if neg_x:
            return FaceDescriptor.fne()
        if pos_z:
            return FaceDescriptor.finf()
        return face
    return face


def beta_sheet_terms(beta: float, y, r):
    """Stable ``⟨ẑ,v⟩, ⟨f̂,v⟩, ⟨p̂,v⟩`` for sheet points ``v = y(r, 1, e^r)``.

    With ``h = r - (1 - β)`` the hyperplane term is ``y(1 + h - e^h)``, which
    is evaluated without the cancellation of the raw inner product.
    """
    _check_beta(beta)
    y = np.asarray(y, dtype=float)
    h = np.asarray(r, dtype=float) - (1.0 - beta)
    a = math.exp(beta - 1.0)
    b = math.exp(1.0 - beta)
    em = np.expm1(h)
    small = np.abs(h) < 1e-3
    hs = np.where(small, h, 0.0)
    series = hs * hs * (0.5 + hs * (1.0 / 6.0 + hs * (1.0 / 24.0 + hs / 120.0)))
    zv = -y * np.where(small, series, em - h)
    c = beta * beta - beta + 1.0
    # ⟨f̂, d(r)⟩ = (1-β)r + 1 + e^{1-β+r}
    fv = y * ((1.0 - beta) * (1.0 - beta + h) + 1.0 + b * np.exp(1.0 - beta + h))
    pv = y * (b * (c * em + beta * h) + a * h)
    return zv, fv, pv


def distance_decomposition(beta: float, v) -> DistanceDecomposition:
    """Split the distance from ``v`` to ``F_β`` through the hyperplane ``{ẑ}⊥``.

    ``w = P_{ẑ⊥} v`` and ``u = P_{F_β} w``; the two returned distances are
    ``‖w - v‖`` and ``‖w - u‖``.
    """
    v = as_point(v)
    fr = face_frame(beta)
    nz = np.linalg.norm(fr.z_hat)
    nf = np.linalg.norm(fr.f_hat)
    npp = np.linalg.norm(fr.p_hat)
    zv = float(fr.z_hat @ v)
    fv = float(fr.f_hat @ v)
    pv = float(fr.p_hat @ v)
    to_plane = abs(zv) / nz
    if fv >= 0:
        within = abs(pv) / npp
    else:
        within = math.hypot(fv / nf, pv / npp)
    return DistanceDecomposition(float(to_plane), float(within), 1 if fv > 0 else (0 if fv == 0 else -1))
