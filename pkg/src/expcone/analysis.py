"""Numerical probes of the error-bound constants.

``estimate_gamma`` scans boundary points for the infimum of
``g(‖w - v‖) / ‖w - u‖`` with ``w = P_{z⊥} v`` and ``u = P_F w``. The result is
an upper estimate of the true infimum, not a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import geometry
from .faces import (
    FaceDescriptor,
    FaceKind,
    beta_sheet_terms,
    classify_exposing,
    face_frame,
    project_face_many,
)
from .gfun import GFunction, evaluate

__all__ = [
    "ExponentFit",
    "GammaEstimate",
    "SequenceKind",
    "TightnessPoint",
    "estimate_gamma",
    "fit_exponent",
    "kappa_table",
    "kl_quotient",
    "tightness_sequence",
]


@dataclass(frozen=True)
class GammaEstimate:
    gamma_hat: float
    argmin_witness: np.ndarray
    samples_used: int
    g: GFunction
    eta: float
    vanishing: bool = False
    gamma_by_rmax: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    sample_range: tuple
    local_slopes: tuple = ()
    hoelderian: bool = True


class TightnessPoint(NamedTuple):
    w: np.ndarray
    lhs: float
    rhs_input: float
    log_rhs_input: float


@dataclass(frozen=True)
class SequenceKind:
    """One of the three tightness families: ``entropic``, ``beta`` or ``log``."""

    name: str
    beta: float = 1.0

    def __post_init__(self):
        if self.name not in ("entropic", "beta", "log"):
            raise ValueError(f"unknown sequence kind {self.name!r}")

    @classmethod
    def entropic(cls):
        return cls("entropic")

    @classmethod
    def beta_b(cls, beta: float = 1.0):
        return cls("beta", float(beta))

    @classmethod
    def log_c(cls):
        return cls("log")


def _sheet_samples(eta, n_scale, n_r, r_max, extra_r=()):
    s = np.logspace(math.log10(eta) - 8, math.log10(eta), n_scale)
    r = np.unique(np.concatenate([np.linspace(-r_max, r_max, n_r), np.asarray(extra_r, dtype=float)]))
    r = r[np.abs(r) <= r_max]
    norm = np.sqrt(r * r + 1.0 + np.exp(2 * r))
    S, R = np.meshgrid(s, r, indexing="ij")
    Y = S / norm[None, :]
    return Y.ravel(), R.ravel()


def _quadrant_samples(eta, n_scale, n_theta):
    s = np.logspace(math.log10(eta) - 8, math.log10(eta), n_scale)
    # angles from the -x axis towards +z, clustered at both ends
    u = np.linspace(-12, 12, n_theta)
    theta = (math.pi / 2) / (1.0 + np.exp(-u))
    S, T = np.meshgrid(s, theta, indexing="ij")
    return np.stack([-S * np.cos(T), np.zeros_like(S), S * np.sin(T)], axis=-1).reshape(-1, 3)


def estimate_gamma(
    z,
    face: FaceDescriptor,
    g: GFunction,
    eta: float = 1.0,
    n_scale: int = 41,
    n_r: int = 1601,
    n_theta: int = 201,
    r_max: float = 40.0,
    tol: float = 1e-9,
) -> GammaEstimate:
    """Infimum of ``g(‖w-v‖)/‖w-u‖`` over sampled ``v ∈ bd K ∩ B(η) \\ F``.

    Sheet points are sampled on a log grid of norms times a uniform grid of
    ``r = x/y`` (refined around the face generator for ``F_β``), plus the
    quadrant ``F_{-∞}`` when it is not the face itself. ``vanishing`` is set
    when the infimum collapses as the ``r`` range widens from 10 to ``r_max``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    z = np.asarray(z, dtype=float)
    found = classify_exposing(z, tol)
    if found != face and not (
        found.kind is FaceKind.FBETA and face.kind is FaceKind.FBETA and math.isclose(found.beta, face.beta, rel_tol=1e-6)
    ):
        raise ValueError(f"z exposes {found}, not {face}")
    zh = z / np.linalg.norm(z)
    extra = ()
    if face.kind is FaceKind.FBETA:
        c = 1.0 - face.beta
        off = np.logspace(-8, 0.5, 400)
        extra = np.concatenate([c + off, c - off])
    Y, R = _sheet_samples(eta, n_scale, n_r, r_max, extra)
    V = np.stack([Y * R, Y, Y * np.exp(R)], axis=-1)

    if face.kind is FaceKind.FBETA:
        fr = face_frame(face.beta)
        zv, fv, pv = beta_sheet_terms(face.beta, Y, R)
        a = np.abs(zv) / np.linalg.norm(fr.z_hat)
        nf, npp = np.linalg.norm(fr.f_hat), np.linalg.norm(fr.p_hat)
        b = np.where(fv >= 0, np.abs(pv) / npp, np.hypot(fv / nf, pv / npp))
    else:
        a, b = _generic_ab(V, zh, face)

    if face.kind is not FaceKind.FNEGINF:
        Q = _quadrant_samples(eta, n_scale, n_theta)
        aq, bq = _generic_ab(Q, zh, face)
        V = np.concatenate([V, Q])
        a = np.concatenate([a, aq])
        b = np.concatenate([b, bq])
        R = np.concatenate([R, np.zeros(len(Q))])

    keep = b > 1e-14 * eta
    if not keep.any():
        raise ValueError("no admissible samples; eta too small or grid degenerate")
    V, a, b, R = V[keep], a[keep], b[keep], R[keep]
    ratio = evaluate(g, a) / b
    i = int(np.argmin(ratio))
    by_r = {}
    for rm in (10.0, 20.0, r_max):
        sel = np.abs(R) <= rm
        if sel.any():
            by_r[rm] = float(ratio[sel].min())
    lo, hi = by_r.get(r_max, ratio[i]), by_r.get(10.0, ratio[i])
    vanishing = bool(lo < 1e-6 and lo < 1e-4 * hi)
    return GammaEstimate(float(ratio[i]), V[i].copy(), int(len(ratio)), g, float(eta), vanishing, by_r)


def _generic_ab(V, zh, face):
    zv = V @ zh
    W = V - zv[:, None] * zh[None, :]
    U = project_face_many(face, W)
    return np.abs(zv), np.linalg.norm(W - U, axis=1)


def kappa_table(z, face: FaceDescriptor, g: GFunction, etas=(0.5, 1.0, 2.0, 4.0, 8.0, 16.0), **grid) -> "Coefficient":
    """Ceiling-step table ``η ↦ max{2η^{1-α}, 2/γ̂(η)}`` for use as ``κ_{z,t}``."""
    from .frf import Coefficient

    alpha = g.exponent
    vals = []
    for eta in etas:
        est = estimate_gamma(z, face, g, eta, **grid)
        if est.vanishing or not est.gamma_hat > 0:
            raise ValueError(f"ratio vanishes for {face} with {g}; no finite kappa")
        vals.append(max(2 * eta ** (1 - alpha), 2 / est.gamma_hat))
    return Coefficient.table(etas, vals)


def _regress(lx, ly):
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), float(coef[1]), min(max(r2, 0.0), 1.0)


def fit_exponent(z, face: FaceDescriptor, eta: float = 1.0, samples: int = 60, side: int = 1, tol=1e-9) -> ExponentFit:
    """Log-log regression of ``d(q, F)`` against ``d(q, K)`` for ``q ∈ {z}⊥``.

    Points are ``q = q0 + s·n`` with ``q0`` in the relative interior of the
    face at norm ``η/2`` and ``n`` a unit direction inside ``{z}⊥`` normal to
    the face, for log-spaced ``s``. ``local_slopes`` are the slopes over the
    three thirds of the range (largest ``d(q,K)`` first); a collapse of these
    towards zero marks a non-Hölderian relation.
    """
    if samples < 10:
        raise ValueError("need at least 10 samples")
    z = np.asarray(z, dtype=float)
    found = classify_exposing(z, tol)
    if found.kind is not face.kind:
        raise ValueError(f"z exposes {found}, not {face}")
    zh = z / np.linalg.norm(z)
    k = face.kind
    if k is FaceKind.FBETA:
        fr = face_frame(face.beta)
        q0 = fr.f_hat / np.linalg.norm(fr.f_hat)
        n = fr.p_hat / np.linalg.norm(fr.p_hat)
    elif k is FaceKind.FINF:
        q0 = np.array([-1.0, 0.0, 0.0])
        # for z = (0, a, b) this is (0, b, -a): y >= 0 for side = 1
        n = np.array([0.0, zh[2], -zh[1]])
        n /= np.linalg.norm(n)
    elif k is FaceKind.FNEGINF:
        q0 = np.array([0.0, 0.0, 1.0])
        n = np.array([1.0, 0.0, 0.0])
    else:
        raise ValueError(f"no exponent probe for {face}")
    s = np.logspace(-7, -1, samples) * eta
    Q = 0.5 * eta * q0[None, :] + side * s[:, None] * n[None, :]
    d_face = np.linalg.norm(Q - project_face_many(face, Q), axis=1)
    d_cone = geometry.distance_many(Q)
    ok = (d_cone > 0) & (d_face > 0)
    if ok.sum() < 10:
        raise ValueError("degenerate sample spread: too few points off the cone")
    lx, ly = np.log(d_cone[ok]), np.log(d_face[ok])
    slope, intercept, r2 = _regress(lx, ly)
    order = np.argsort(-lx)
    thirds = np.array_split(order, 3)
    local = tuple(_regress(lx[t], ly[t])[0] for t in thirds)
    hoelderian = bool(r2 >= 0.9 and local[-1] > 0.25 * max(local[0], 1e-12))
    return ExponentFit(slope, intercept, r2, (float(d_cone[ok].min()), float(d_cone[ok].max())), local, hoelderian)


def tightness_sequence(kind: SequenceKind, k: float) -> TightnessPoint:
    """The ``k``-th point of a tightness family.

    ``entropic``: ``w = (ln k / k, 0, 1)``, ``lhs = d(w, F_{-∞})``.
    ``beta``: ``w = P_{ẑ⊥} v`` with ``v = (1-β+1/k, 1, e^{1-β+1/k})``,
    ``lhs = ‖w - u‖`` and ``rhs_input = ‖w - v‖``.
    ``log``: ``w = (-1, 1/k, 0)``, ``lhs = d(w, F_∞) = 1/k``.
    For all three ``rhs_input`` is the distance (or its bound) fed to ``g``.
    """
    if isinstance(kind, str):
        kind = SequenceKind(kind)
    if not k >= 1:
        raise ValueError("k must be at least 1")
    if kind.name == "entropic":
        if k < 3:
            raise ValueError("the entropic sequence needs k >= 3")
        lhs = math.log(k) / k
        w = np.array([lhs, 0.0, 1.0])
        d = geometry.distance(w)
        return TightnessPoint(w, lhs, d, math.log(d) if d > 0 else -math.inf)
    if kind.name == "beta":
        beta = kind.beta
        fr = face_frame(beta)
        h = 1.0 / k
        r = 1.0 - beta + h
        v = geometry.boundary_point(1.0, r)
        zv, fv, pv = (float(t) for t in beta_sheet_terms(beta, 1.0, r))
        nz2 = float(fr.z_hat @ fr.z_hat)
        w = v - zv / nz2 * fr.z_hat
        rhs = abs(zv) / math.sqrt(nz2)
        lhs = abs(pv) / float(np.linalg.norm(fr.p_hat))
        return TightnessPoint(w, lhs, rhs, math.log(rhs) if rhs > 0 else -math.inf)
    w = np.array([-1.0, 1.0 / k, 0.0])
    log_bound = -k - math.log(k)
    if log_bound > -700:
        d = geometry.distance(w)
        return TightnessPoint(w, 1.0 / k, d, math.log(d) if d > 0 else log_bound)
    # below double range: the bound e^{-k}/k is exact to first order here
    return TightnessPoint(w, 1.0 / k, 0.0, log_bound)


def kl_quotient(y, cone_blocks: int | None = None, affine: "geometry.AffineSubspace | None" = None):
    """``f(y) = d(y, C1)² + d(y, C2)²`` and the norm of its gradient.

    ``C1`` is the product of ``cone_blocks`` exponential cones (inferred
    from the length of ``y`` by default) and ``C2`` the affine set
    ``affine`` (the whole space when ``None``).
    """
    y = np.asarray(y, dtype=float).ravel()
    m = y.size // 3 if cone_blocks is None else cone_blocks
    if 3 * m != y.size:
        raise ValueError("point length does not match the block count")
    p1, _ = geometry.project_product(y[None, :])
    r1 = y - p1[0]
    r2 = np.zeros_like(y) if affine is None else y - affine.project(y)
    f = float(r1 @ r1 + r2 @ r2)
    return f, float(np.linalg.norm(2 * r1 + 2 * r2))
