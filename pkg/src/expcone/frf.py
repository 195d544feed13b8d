"""Facial residual function expressions.

An FRF is a function ``ψ(ε, t)`` that is nonnegative, nondecreasing in both
arguments and vanishes at ``ε = 0``. They are represented as immutable
expression trees so that they can be composed, evaluated on grids and
serialised to JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .faces import FaceDescriptor, FaceKind, classify_exposing
from .gfun import GFunction, GKind, evaluate

__all__ = [
    "Coefficient",
    "Const",
    "Diamond",
    "Eps",
    "FRFExpr",
    "FRFTag",
    "GApply",
    "Max",
    "Prod",
    "Scale",
    "Subst",
    "Sum",
    "TCoeff",
    "check_frf",
    "diamond_chain",
    "eval_frf",
    "frf_for_exposed",
    "frf_from_json",
    "frf_nonexposed",
    "frf_to_json",
    "lift_frf",
    "polyhedral_frf",
    "product_frf",
    "rescale",
]


@dataclass(frozen=True)
class Coefficient:
    """Monotone nondecreasing scalar function of ``t``.

    ``kind`` is ``"constant"`` (``value``), ``"power"`` (``value * t**exponent``)
    or ``"table"``. Tables use the ceiling-step rule: ``c(t)`` is the value at
    the first breakpoint ``>= t``, and the last value beyond the table.
    """

    kind: str
    value: float = 1.0
    exponent: float = 0.0
    breakpoints: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "constant":
            if not self.value >= 0:
                raise ValueError("constant coefficient must be nonnegative")
        elif self.kind == "power":
            if not (self.value >= 0 and self.exponent >= 0):
                raise ValueError("power coefficient needs nonnegative scale and exponent")
        elif self.kind == "table":
            bp = np.asarray(self.breakpoints, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if bp.size == 0 or bp.shape != vals.shape:
                raise ValueError("table needs matching, nonempty breakpoints and values")
            if np.any(np.diff(bp) <= 0) or np.any(np.diff(vals) < 0) or np.any(vals < 0):
                raise ValueError("table must be increasing in t and nondecreasing in value")
        else:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float):
        return cls("constant", value=float(value))

    @classmethod
    def power(cls, scale: float, exponent: float):
        return cls("power", value=float(scale), exponent=float(exponent))

    @classmethod
    def table(cls, breakpoints, values):
        vals = np.maximum.accumulate(np.asarray(values, dtype=float))
        return cls("table", breakpoints=tuple(map(float, breakpoints)), values=tuple(map(float, vals)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.value)
        elif self.kind == "power":
            out = self.value * np.power(t, self.exponent)
        else:
            bp = np.asarray(self.breakpoints)
            idx = np.minimum(np.searchsorted(bp, t, side="left"), bp.size - 1)
            out = np.asarray(self.values)[idx]
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "power":
            return {"kind": "power", "value": self.value, "exponent": self.exponent}
        return {"kind": "table", "breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "power":
            return cls.power(d["value"], d["exponent"])
        return cls.table(d["breakpoints"], d["values"])


def _coef(c) -> Coefficient:
    return c if isinstance(c, Coefficient) else Coefficient.constant(c)


class FRFExpr:
    """Base class of expression nodes."""

    def __call__(self, eps, t=0.0):
        return eval_frf(self, eps, t)


@dataclass(frozen=True)
class Eps(FRFExpr):
    pass


@dataclass(frozen=True)
class Const(FRFExpr):
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("Const must be nonnegative")


@dataclass(frozen=True)
class TCoeff(FRFExpr):
    coef: Coefficient


@dataclass(frozen=True)
class Sum(FRFExpr):
    terms: tuple


@dataclass(frozen=True)
class Max(FRFExpr):
    terms: tuple


@dataclass(frozen=True)
class Prod(FRFExpr):
    terms: tuple


@dataclass(frozen=True)
class Scale(FRFExpr):
    factor: float
    child: FRFExpr

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("Scale needs a positive factor")


@dataclass(frozen=True)
class GApply(FRFExpr):
    g: GFunction
    child: FRFExpr


@dataclass(frozen=True)
class Diamond(FRFExpr):
    """``(left ♦ right)(ε, t) = left(ε + right(ε, t), t)``."""

    left: FRFExpr
    right: FRFExpr


@dataclass(frozen=True)
class Subst(FRFExpr):
    """``child(eps(ε, t), t_scale * t)``."""

    child: FRFExpr
    eps: FRFExpr
    t_scale: float = 1.0

    def __post_init__(self):
        if not self.t_scale > 0:
            raise ValueError("Subst needs a positive t_scale")


@dataclass(frozen=True)
class FRFTag:
    face: FaceDescriptor
    exposing: tuple
    ambient: str = "Kexp"


def _ev(node, e, t):
    if isinstance(node, Eps):
        return e
    if isinstance(node, Const):
        return np.zeros(np.broadcast(e, t).shape) + node.value
    if isinstance(node, TCoeff):
        return np.zeros(np.broadcast(e, t).shape) + node.coef(t)
    if isinstance(node, Sum):
        return sum((_ev(c, e, t) for c in node.terms), np.zeros(np.broadcast(e, t).shape))
    if isinstance(node, Max):
        return np.maximum.reduce([np.broadcast_to(_ev(c, e, t), np.broadcast(e, t).shape) for c in node.terms])
    if isinstance(node, Prod):
        out = np.ones(np.broadcast(e, t).shape)
        for c in node.terms:
            out = out * _ev(c, e, t)
        return out
    if isinstance(node, Scale):
        return node.factor * _ev(node.child, e, t)
    if isinstance(node, GApply):
        return evaluate(node.g, np.maximum(_ev(node.child, e, t), 0.0))
    if isinstance(node, Diamond):
        return _ev(node.left, e + _ev(node.right, e, t), t)
    if isinstance(node, Subst):
        return _ev(node.child, _ev(node.eps, e, t), node.t_scale * t)
    raise TypeError(f"not an FRF node: {node!r}")


def eval_frf(psi: FRFExpr, eps, t=0.0):
    """Evaluate ``psi`` at ``(eps, t)``; broadcasts over numpy arrays."""
    e = np.asarray(eps, dtype=float)
    tt = np.asarray(t, dtype=float)
    if np.any(e < 0) or np.any(tt < 0):
        raise ValueError("FRFs are evaluated at nonnegative arguments")
    out = np.asarray(_ev(psi, e, tt), dtype=float)
    out = np.broadcast_to(out, np.broadcast(e, tt).shape)
    return float(out) if out.ndim == 0 else np.array(out)


def _sum(*terms):
    return Sum(tuple(terms))


def _max(*terms):
    return Max(tuple(terms))


def _prod(*terms):
    return Prod(tuple(terms))


def frf_for_exposed(face: FaceDescriptor, z, kappa=1.0, g: GFunction | None = None, tol=1e-9) -> FRFExpr:
    """FRF for ``K ∩ {z}⊥`` with respect to the whole cone.

    The shape is ``max{ε, ε/‖z‖} + κ(t) g(ε + max{ε, ε/‖z‖})`` where ``g``
    depends on the face: entropy (or a supplied power) for ``F_{-∞}``,
    square root for ``F_β``, identity for ``F_∞`` when ``z_y > 0`` and the
    log function when ``z_y = 0``.
    """
    z = np.asarray(z, dtype=float)
    found = classify_exposing(z, tol)
    k = face.kind
    if found.kind is not k or (k is FaceKind.FBETA and not math.isclose(found.beta, face.beta, rel_tol=1e-6, abs_tol=1e-9)):
        raise ValueError(f"z exposes {found}, not {face}")
    nz = float(np.linalg.norm(z))
    if k is FaceKind.FNEGINF:
        g = g or GFunction.entropy()
        if g.kind not in (GKind.ENTROPY, GKind.POWER):
            raise ValueError("F_{-inf} takes the entropy function or a power")
    elif k is FaceKind.FBETA:
        g = GFunction.power(0.5)
    elif k is FaceKind.FINF:
        g = GFunction.identity() if z[1] / nz > tol else GFunction.log()
    elif k is FaceKind.ZERO:
        g = GFunction.identity()
    else:
        raise ValueError(f"no exposed FRF for {face}")
    m = _max(Eps(), Scale(1.0 / nz, Eps()))
    return _sum(m, _prod(TCoeff(_coef(kappa)), GApply(g, _sum(Eps(), m))))


def frf_nonexposed(z, sigma=1.0, g: GFunction | None = None, tol=1e-9) -> FRFExpr:
    """FRF for ``F_ne`` inside ``F_{-∞}``: ``σ(t) ε + σ(t) g(ε)``."""
    z = np.asarray(z, dtype=float)
    nz = float(np.linalg.norm(z))
    if nz == 0 or not (z[0] < -tol * nz and abs(z[2]) <= tol * nz):
        raise ValueError("z must have z_x < 0 and z_z = 0 to expose F_ne within F_{-inf}")
    g = g or GFunction.entropy()
    if g.kind is GKind.POWER and g.alpha >= 1:
        raise ValueError("power exponent must be below 1")
    if g.kind not in (GKind.ENTROPY, GKind.POWER):
        raise ValueError("F_ne takes the entropy function or a power")
    s = TCoeff(_coef(sigma))
    return _sum(_prod(s, Eps()), _prod(s, GApply(g, Eps())))


def polyhedral_frf(kappa=1.0) -> FRFExpr:
    """``κ ε``, the FRF available for polyhedral faces."""
    return _prod(TCoeff(_coef(kappa)), Eps())


def rescale(psi: FRFExpr, m1: float, m2: float, m3: float) -> FRFExpr:
    """``M₃ ψ(M₁ ε, M₂ t)``."""
    if not (m1 > 0 and m2 > 0 and m3 > 0):
        raise ValueError("rescaling factors must be positive")
    return Scale(m3, Subst(psi, Scale(m1, Eps()), m2))


def diamond_chain(psis: Sequence[FRFExpr]) -> FRFExpr:
    """Right-associated chain ``ψ_n ♦ (ψ_{n-1} ♦ (... ♦ ψ_1))``.

    ``psis`` is given in written order, outermost first:
    ``[ψ_n, ..., ψ_1]``.
    """
    if not psis:
        raise ValueError("diamond_chain needs at least one FRF")
    phi = psis[-1]
    for psi in reversed(psis[:-1]):
        phi = Diamond(psi, phi)
    return phi


def product_frf(block_frfs: Sequence[FRFExpr], g: GFunction, sigma=1.0) -> FRFExpr:
    """``Σ_i ψ_i(σ(t) max{ε, g(2ε)}, t)`` for a product of cones."""
    if not block_frfs:
        raise ValueError("product_frf needs at least one block")
    arg = _prod(TCoeff(_coef(sigma)), _max(Eps(), GApply(g, Scale(2.0, Eps()))))
    return Sum(tuple(Subst(psi, arg) for psi in block_frfs))


def lift_frf(psi: FRFExpr, g: GFunction, sigma=1.0) -> FRFExpr:
    """``ε + ψ(σ(t) max{ε, g(2ε)}, t)``: from an FRF of a face to the cone."""
    arg = _prod(TCoeff(_coef(sigma)), _max(Eps(), GApply(g, Scale(2.0, Eps()))))
    return _sum(Eps(), Subst(psi, arg))


def check_frf(psi: FRFExpr, eps_grid=None, t_grid=None, rtol=1e-12):
    """Grid check of the FRF conditions: returns ``(vanishes_at_zero, monotone)``."""
    e = np.linspace(0.0, 10.0, 100) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    t = np.linspace(0.0, 100.0, 100) if t_grid is None else np.asarray(t_grid, dtype=float)
    zero = eval_frf(psi, 0.0, np.array([0.0, 1.0, 10.0, 1e3]))
    vals = eval_frf(psi, e[:, None], t[None, :])
    slack = rtol * np.maximum(1.0, np.abs(vals))
    mono = bool(np.all(np.diff(vals, axis=0) >= -slack[1:]) and np.all(np.diff(vals, axis=1) >= -slack[:, 1:]))
    return bool(np.all(zero == 0) and np.all(vals >= 0)), mono


def _to_dict(node):
    if isinstance(node, Eps):
        return {"node": "Eps"}
    if isinstance(node, Const):
        return {"node": "Const", "value": node.value}
    if isinstance(node, TCoeff):
        return {"node": "TCoeff", "coef": node.coef.to_dict()}
    if isinstance(node, (Sum, Max, Prod)):
        return {"node": type(node).__name__, "children": [_to_dict(c) for c in node.terms]}
    if isinstance(node, Scale):
        return {"node": "Scale", "factor": node.factor, "children": [_to_dict(node.child)]}
    if isinstance(node, GApply):
        return {"node": "GApply", "g": str(node.g), "children": [_to_dict(node.child)]}
    if isinstance(node, Diamond):
        return {"node": "Diamond", "children": [_to_dict(node.left), _to_dict(node.right)]}
    if isinstance(node, Subst):
        return {"node": "Subst", "t_scale": node.t_scale, "children": [_to_dict(node.child), _to_dict(node.eps)]}
    raise TypeError(f"not an FRF node: {node!r}")


def _from_dict(d):
    kind = d["node"]
    kids = [_from_dict(c) for c in d.get("children", [])]
    if kind == "Eps":
        return Eps()
    if kind == "Const":
        return Const(float(d["value"]))
    if kind == "TCoeff":
        return TCoeff(Coefficient.from_dict(d["coef"]))
    if kind in ("Sum", "Max", "Prod"):
        return {"Sum": Sum, "Max": Max, "Prod": Prod}[kind](tuple(kids))
    if kind == "Scale":
        return Scale(float(d["factor"]), kids[0])
    if kind == "GApply":
        return GApply(GFunction.parse(d["g"]), kids[0])
    if kind == "Diamond":
        return Diamond(kids[0], kids[1])
    if kind == "Subst":
        return Subst(kids[0], kids[1], float(d.get("t_scale", 1.0)))
    raise ValueError(f"unknown FRF node {kind!r}")


def frf_to_json(psi: FRFExpr) -> str:
    return json.dumps(_to_dict(psi))


def frf_from_json(text) -> FRFExpr:
    return _from_dict(json.loads(text) if isinstance(text, str) else text)
