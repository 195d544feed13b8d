"""Feasibility problems ``(L + a) ∩ K`` for products of exponential cones.

A problem is described by a basis of ``L`` (rows of length ``3m``) and an
anchor ``a``. :func:`build_chain` runs facial reduction with a numerical
certificate search, :func:`classify_regime` maps the resulting chain to the
kind of error bound that holds, and :func:`verify_bound` checks a candidate
bound empirically against a distance oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize, minimize_scalar

from . import geometry
from .analysis import SequenceKind, tightness_sequence
from .faces import (
    FaceDescriptor,
    FaceKind,
    face_dual_contains,
    face_frame,
    face_meet,
    project_face_many,
)
from .frf import (
    Eps,
    FRFExpr,
    GApply,
    diamond_chain,
    frf_for_exposed,
    polyhedral_frf,
    product_frf,
)
from .gfun import GFunction, growth_constant

__all__ = [
    "AssembledBound",
    "CertificateResult",
    "CertificateSearchInconclusive",
    "ErrorBoundReport",
    "FacialReductionChain",
    "FeasibilityProblem",
    "OracleDivergence",
    "Regime",
    "assemble_bound",
    "build_chain",
    "check_chain",
    "classify_regime",
    "distance_to_intersection",
    "distances_to_intersection",
    "example_problem",
    "find_certificate",
    "regime_bound",
    "step_frfs",
    "verify_bound",
]

CHAIN_TOL = 1e-9
DYKSTRA_CAP = 1_000_000
DYKSTRA_TOL = 1e-10
KAPPA_FLOOR = 1e-300


class CertificateSearchInconclusive(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class OracleDivergence(geometry.ConvergenceError):
    """Dykstra hit its iteration cap; the problem is likely infeasible."""


@dataclass
class FeasibilityProblem:
    m: int
    L_basis: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        self.m = int(self.m)
        if self.m < 1:
            raise ValueError("m must be at least 1")
        n = 3 * self.m
        b = np.asarray(self.L_basis, dtype=float)
        b = b.reshape(0, n) if b.size == 0 else np.atleast_2d(b)
        if b.shape[1] != n:
            raise ValueError(f"basis vectors must have length {n}")
        if b.shape[0] and np.linalg.matrix_rank(b, tol=1e-10) < b.shape[0]:
            raise ValueError("basis vectors are linearly dependent")
        a = np.asarray(self.a, dtype=float).ravel()
        if a.shape != (n,):
            raise ValueError(f"anchor must have length {n}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
            raise ValueError("problem data must be finite")
        self.L_basis, self.a = b, a

    @property
    def dim(self) -> int:
        return 3 * self.m

    @property
    def affine(self) -> geometry.AffineSubspace:
        return geometry.AffineSubspace(self.L_basis, self.a, dim=self.dim)

    def certificate_space(self) -> np.ndarray:
        """Orthonormal basis (columns) of ``L⊥ ∩ {a}⊥``."""
        rows = np.vstack([self.L_basis, self.a[None, :]])
        return null_space(rows, rcond=1e-12)

    def to_dict(self):
        return {"m": self.m, "L_basis": self.L_basis.tolist(), "a": self.a.tolist()}

    @classmethod
    def from_dict(cls, d):
        missing = {"m", "L_basis", "a"} - set(d)
        if missing:
            raise ValueError(f"problem is missing {sorted(missing)}")
        return cls(d["m"], d["L_basis"], d["a"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "FeasibilityProblem":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def orthogonal_to(cls, vectors, m=None, a=None) -> "FeasibilityProblem":
        """The problem with ``L = span(vectors)⊥``."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        n = v.shape[1]
        basis = null_space(v, rcond=1e-12).T
        return cls(m or n // 3, basis, np.zeros(n) if a is None else a)


@dataclass(frozen=True)
class CertificateResult:
    status: str  # found | none | inconclusive
    z: np.ndarray | None = None
    evaluations: int = 0
    stage: str = ""


@dataclass
class FacialReductionChain:
    faces: list
    exposing: list
    d_pps: int
    sane: bool
    stages: list = field(default_factory=list)

    def to_dict(self):
        return {
            "faces": [[str(f) for f in fs] for fs in self.faces],
            "exposing": [np.asarray(z).tolist() for z in self.exposing],
            "d_pps": self.d_pps,
            "sane": self.sane,
            "stages": list(self.stages),
        }


@dataclass(frozen=True)
class Regime:
    name: str
    exponent: float | None = None
    level: int | None = None

    def __str__(self):
        if self.name == "Hoelder":
            return f"Hoelder({self.exponent:g})"
        if self.name == "MixedEntropicHoelder":
            return f"MixedEntropicHoelder({self.level})"
        return self.name

    @property
    def supported(self) -> bool:
        return self.name != "Unsupported"


@dataclass(frozen=True)
class ErrorBoundReport:
    regime: Regime
    kappa_fit: float
    max_violation: float
    samples: int
    skipped: int
    tightness_ratio: float | None
    tight: bool | None
    seed: int

    def to_dict(self):
        return {
            "regime": str(self.regime),
            "kappa_fit": self.kappa_fit,
            "max_violation": self.max_violation,
            "samples": self.samples,
            "skipped": self.skipped,
            "tightness_ratio": self.tightness_ratio,
            "tight": self.tight,
            "seed": self.seed,
        }


# --- face helpers -----------------------------------------------------------


def _face_generators(face: FaceDescriptor):
    k = face.kind
    if k is FaceKind.FBETA:
        f = face_frame(face.beta).f_hat
        return [f / np.linalg.norm(f)]
    if k is FaceKind.FINF:
        return [np.array([-1.0, 0.0, 0.0])]
    if k is FaceKind.FNE:
        return [np.array([0.0, 0.0, 1.0])]
    if k is FaceKind.FNEGINF:
        return [np.array([-1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    if k is FaceKind.ZERO:
        return []
    return None


def _face_dual_rows(face: FaceDescriptor):
    """Rows ``r`` with ``F* = {z : r·z >= 0}`` for a polyhedral face."""
    gens = _face_generators(face)
    return [] if gens is None else gens


def _blocks(x, m):
    return np.asarray(x, dtype=float).reshape(m, 3)


def _project_faces(faces, X):
    X = np.atleast_2d(X)
    out = np.empty_like(X)
    for i, f in enumerate(faces):
        out[:, 3 * i : 3 * i + 3] = project_face_many(f, X[:, 3 * i : 3 * i + 3])
    return out


# --- certificate search -----------------------------------------------------

_BETA_GRID = np.unique(np.concatenate([np.linspace(-12.0, 12.0, 97), np.arange(-12.0, 13.0)]))


def _dual_ray(beta):
    v = np.array([-1.0, -beta, math.exp(beta - 1.0)])
    return v / np.linalg.norm(v)


def _generators(extra=()):
    g = [np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    g += [_dual_ray(b) for b in _BETA_GRID]
    g += [_dual_ray(b) for b in extra]
    return np.array(g).T


def _pps_holds(problem, faces, rng, starts=6):
    """Look for ``x ∈ L + a`` strictly inside every Full block and inside the other faces."""
    full = [i for i, f in enumerate(faces) if f.kind is FaceKind.FULL]
    if not full:
        return True
    aff = problem.affine
    Q = aff.q
    a = aff.anchor
    k = Q.shape[1]

    def margins(c):
        x = a + Q @ c
        out = []
        for i in full:
            xi, yi, zi = x[3 * i : 3 * i + 3]
            ys = max(yi, 1e-300)
            out.append(yi)
            out.append(zi - yi * math.exp(min(xi / ys, 50.0)) if yi > 0 else zi - 1e300)
        return np.array(out)

    if k == 0:
        return _polyhedral_ok(a, faces, problem.m) and margins(np.zeros(0)).min() > 1e-6
    eqs, ineqs = _polyhedral_constraints(faces, problem.m)
    cons = [{"type": "ineq", "fun": lambda v: margins(v[:-1]) - v[-1]}]
    if len(eqs):
        cons.append({"type": "eq", "fun": lambda v: eqs @ (a + Q @ v[:-1])})
    if len(ineqs):
        cons.append({"type": "ineq", "fun": lambda v: ineqs @ (a + Q @ v[:-1])})
    bounds = [(-1.0, 1.0)] * k + [(None, 1.0)]
    for s in range(starts):
        c0 = np.zeros(k) if s == 0 else rng.uniform(-1, 1, k)
        # centre the Full blocks at (0, 1, e) as a first guess
        if s == 1:
            target = np.tile([0.0, 1.0, math.e], problem.m) * 0.3
            c0 = np.clip(Q.T @ (target - a), -1, 1)
        v0 = np.append(c0, min(margins(c0).min(), 0.0))
        with np.errstate(all="ignore"):
            res = minimize(lambda v: -v[-1], v0, method="SLSQP", bounds=bounds, constraints=cons, options={"maxiter": 300, "ftol": 1e-12})
        c = res.x[:-1]
        x = a + Q @ c
        if margins(c).min() > 1e-6 and _polyhedral_ok(x, faces, problem.m):
            return True
    return False


def _polyhedral_constraints(faces, m):
    eqs, ineqs = [], []
    for i, f in enumerate(faces):
        gens = _face_generators(f)
        if gens is None:
            continue
        basis = np.array(gens).reshape(-1, 3)
        comp = null_space(basis) if len(gens) else np.eye(3)
        for col in comp.T:
            row = np.zeros(3 * m)
            row[3 * i : 3 * i + 3] = col
            eqs.append(row)
        # x_i = Σ t_j gen_j with t_j >= 0; the generators are orthonormal here
        for gvec in gens:
            row = np.zeros(3 * m)
            row[3 * i : 3 * i + 3] = gvec
            ineqs.append(row)
    return np.array(eqs).reshape(-1, 3 * m), np.array(ineqs).reshape(-1, 3 * m)


def _polyhedral_ok(x, faces, m, tol=1e-9):
    eqs, ineqs = _polyhedral_constraints(faces, m)
    return bool(np.all(np.abs(eqs @ x) <= tol) and np.all(ineqs @ x >= -tol))


def _lp_certificate(S, faces, target, extra_rays):
    """LP over ``z = S c`` with Full blocks in an inner polyhedral approximation of K*."""
    m = len(faces)
    k = S.shape[1]
    full = [i for i, f in enumerate(faces) if f.kind is FaceKind.FULL]
    gens = {i: _generators(extra_rays.get(i, ())) for i in full}
    nt = [gens[i].shape[1] for i in full]
    nvar = k + sum(nt)
    offs = np.cumsum([k] + nt)
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for j, i in enumerate(full):
        G = gens[i]
        for r in range(3):
            row = np.zeros(nvar)
            row[:k] = S[3 * i + r]
            row[offs[j] : offs[j + 1]] = -G[r]
            A_eq.append(row)
            b_eq.append(0.0)
        row = np.zeros(nvar)
        row[offs[j] : offs[j + 1]] = 1.0
        A_ub.append(row)
        b_ub.append(1.0)
    for i, f in enumerate(faces):
        if f.kind is FaceKind.FULL:
            continue
        for r in _face_dual_rows(f):
            row = np.zeros(nvar)
            row[:k] = -(r @ S[3 * i : 3 * i + 3])
            A_ub.append(row)
            b_ub.append(0.0)
    cost = np.zeros(nvar)
    j = full.index(target)
    cost[offs[j] : offs[j + 1]] = -1.0
    bounds = [(-1e3, 1e3)] * k + [(0.0, None)] * sum(nt)
    res = linprog(
        cost,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status != 0 or -res.fun < 1e-9:
        return None
    return S @ res.x[:k]


def _curved_rays(S, i):
    """``β`` values whose dual boundary ray lies in the block-``i`` range of ``S``."""
    Si = S[3 * i : 3 * i + 3]
    U, sv, _ = np.linalg.svd(Si, full_matrices=False)
    U = U[:, sv > 1e-12]
    if U.shape[1] == 3:
        return []
    if U.shape[1] == 0:
        return []

    def resid(b):
        v = _dual_ray(b)
        return float(np.linalg.norm(v - U @ (U.T @ v)))

    grid = np.linspace(-30.0, 30.0, 6001)
    vals = np.array([resid(b) for b in grid])
    found = []
    for j in range(1, len(grid) - 1):
        if vals[j] <= vals[j - 1] and vals[j] <= vals[j + 1] and vals[j] < 1e-2:
            r = minimize_scalar(resid, bounds=(grid[j - 1], grid[j + 1]), method="bounded", options={"xatol": 1e-13})
            if r.fun < 1e-9:
                found.append(float(r.x))
    return found


def _is_certificate(z, faces, tol=CHAIN_TOL):
    m = len(faces)
    zb = _blocks(z, m)
    scale = max(np.abs(z).max(), 1e-300)
    drop = False
    for f, zi in zip(faces, zb):
        zi = zi / scale
        if f.kind is FaceKind.FULL:
            if np.linalg.norm(zi) <= tol:
                continue
            if not geometry.dual_contains(zi / np.linalg.norm(zi), tol).inside:
                return False
            drop = True
        elif not face_dual_contains(f, zi, tol):
            return False
        elif face_meet(f, zi, tol) != f:
            drop = True
    return drop


def _clean(z):
    z = np.asarray(z, dtype=float)
    z = z / np.abs(z).max()
    z[np.abs(z) < 1e-12] = 0.0
    return z


def find_certificate(problem: FeasibilityProblem, faces, seed: int = 0, budget: int = 100_000) -> CertificateResult:
    """Search ``z ∈ F* ∩ L⊥ ∩ {a}⊥`` exposing a strictly smaller face.

    Stages: a PPS check (a strictly feasible point in the Full blocks means
    no certificate is needed), one LP per Full block over an inner polyhedral
    approximation of K*, a sweep over the curved dual rays, then random
    sampling. Certificates found for different blocks are summed so the
    chosen one exposes the largest drop.
    """
    faces = tuple(faces)
    if len(faces) != problem.m:
        raise ValueError("one face per block is required")
    rng = np.random.default_rng(seed)
    full = [i for i, f in enumerate(faces) if f.kind is FaceKind.FULL]
    if not full:
        return CertificateResult("none", stage="polyhedral")
    S = problem.certificate_space()
    if S.shape[1] == 0:
        return CertificateResult("none", stage="trivial-space")
    evals = 0
    if _pps_holds(problem, faces, rng):
        return CertificateResult("none", evaluations=1, stage="pps")
    found, stages = [], []
    missing = []
    for i in full:
        z = _lp_certificate(S, faces, i, {})
        evals += 1
        if z is not None and _is_certificate(z, faces):
            found.append(_clean(z))
            stages.append("lp")
        else:
            missing.append(i)
    for i in missing:
        rays = _curved_rays(S, i)
        evals += 6001
        if rays:
            z = _lp_certificate(S, faces, i, {i: rays})
            if z is not None and _is_certificate(z, faces):
                found.append(_clean(z))
                stages.append("sweep")
    if not found:
        n = max(0, min(budget - evals, 20_000))
        C = rng.standard_normal((n, S.shape[1]))
        for c in C:
            for sgn in (1.0, -1.0):
                z = sgn * (S @ c)
                if _is_certificate(z, faces):
                    found.append(_clean(z))
                    stages.append("random")
                    break
            if found:
                break
        evals += n
    if found:
        z = _clean(np.sum(found, axis=0))
        if not _is_certificate(z, faces):
            z = found[0]
        return CertificateResult("found", z, evals, "+".join(sorted(set(stages))))
    if problem.m == 1:
        return CertificateResult("none", evaluations=evals, stage="exhausted")
    return CertificateResult("inconclusive", evaluations=evals, stage="exhausted")


def build_chain(problem: FeasibilityProblem, seed: int = 0) -> FacialReductionChain:
    faces = (FaceDescriptor.full(),) * problem.m
    chain, zs, stages = [faces], [], []
    while any(f.kind is FaceKind.FULL for f in faces):
        res = find_certificate(problem, faces, seed=seed)
        if res.status == "inconclusive":
            partial = _finish_chain(chain, zs, stages)
            raise CertificateSearchInconclusive("certificate search was inconclusive", partial)
        if res.status == "none":
            break
        zb = _blocks(res.z, problem.m)
        faces = tuple(face_meet(f, zi, CHAIN_TOL) for f, zi in zip(faces, zb))
        chain.append(faces)
        zs.append(res.z)
        stages.append(res.stage)
        if len(chain) > problem.m + 1:
            raise RuntimeError("chain longer than the block count; certificate search is inconsistent")
    out = _finish_chain(chain, zs, stages)
    check_chain(problem, out)
    return out


def _finish_chain(chain, zs, stages):
    sane = not any(f.kind is FaceKind.FINF for fs in chain for f in fs)
    return FacialReductionChain(list(chain), list(zs), len(chain) - 1, sane, list(stages))


def check_chain(problem: FeasibilityProblem, chain: FacialReductionChain, tol: float = CHAIN_TOL):
    """Raise ``ValueError`` if any chain invariant fails."""
    if len(chain.exposing) != len(chain.faces) - 1 or chain.d_pps != len(chain.exposing):
        raise ValueError("chain lengths are inconsistent")
    if chain.d_pps > problem.m:
        raise ValueError("chain longer than the block count")
    for i, z in enumerate(chain.exposing):
        z = np.asarray(z, dtype=float)
        zn = z / np.linalg.norm(z)
        if problem.L_basis.shape[0] and np.abs(problem.L_basis @ zn).max() > tol * max(1.0, np.abs(problem.L_basis).max()):
            raise ValueError(f"certificate {i} is not orthogonal to L")
        if abs(problem.a @ zn) > tol * max(1.0, np.linalg.norm(problem.a)):
            raise ValueError(f"certificate {i} is not orthogonal to a")
        cur, nxt = chain.faces[i], chain.faces[i + 1]
        for f, zi, g in zip(cur, _blocks(z, problem.m), nxt):
            if f.kind is FaceKind.FULL:
                if np.linalg.norm(zi) > tol and not geometry.dual_contains(zi / np.abs(z).max(), tol).inside:
                    raise ValueError(f"certificate {i} is not in the dual cone")
            elif not face_dual_contains(f, zi / np.abs(z).max(), tol):
                raise ValueError(f"certificate {i} is not in the dual of {f}")
            if face_meet(f, zi, tol) != g:
                raise ValueError(f"face {i + 1} is not F ∩ z⊥")
    sane = not any(f.kind is FaceKind.FINF for fs in chain.faces for f in fs)
    if sane != chain.sane:
        raise ValueError("sane flag is wrong")


# --- regimes and bounds -----------------------------------------------------


def _finf_lipschitz(problem):
    """Is there ``z ∈ L⊥ ∩ {a}⊥`` of the form ``(0, y, z)`` with ``y, z > 0``?"""
    S = problem.certificate_space()
    k = S.shape[1]
    if k == 0:
        return False
    A_eq = S[0:1]
    A_ub = -S[1:3]
    res = linprog(np.zeros(k), A_ub=A_ub, b_ub=-np.ones(2), A_eq=A_eq, b_eq=[0.0], bounds=[(None, None)] * k, method="highs")
    return res.status == 0


def classify_regime(chain: FacialReductionChain, problem: FeasibilityProblem | None = None) -> Regime:
    m = len(chain.faces[0])
    if chain.d_pps == 0:
        return Regime("Lipschitz")
    if m > 1:
        if not chain.sane:
            return Regime("Unsupported")
        return Regime("MixedEntropicHoelder", level=chain.d_pps)
    last = chain.faces[-1][0]
    k = last.kind
    if k is FaceKind.FNEGINF:
        return Regime("Entropic")
    if k is FaceKind.FBETA:
        return Regime("Hoelder", exponent=0.5)
    if k is FaceKind.FINF:
        z = chain.exposing[-1]
        if z[1] > CHAIN_TOL and z[2] > CHAIN_TOL:
            return Regime("Lipschitz")
        if problem is None:
            raise ValueError("classifying an F_inf chain needs the problem")
        return Regime("Lipschitz") if _finf_lipschitz(problem) else Regime("LogType")
    return Regime("Lipschitz")


_HAT_G = GFunction.entropy()


def regime_bound(regime: Regime) -> FRFExpr:
    """The bound shape ``g(ε)`` of a regime, without its constant."""
    if regime.name == "Lipschitz":
        return Eps()
    if regime.name == "Hoelder":
        return GApply(GFunction.power(regime.exponent), Eps())
    if regime.name == "Entropic":
        return GApply(GFunction.entropy(), Eps())
    if regime.name == "LogType":
        return GApply(GFunction.log(), Eps())
    if regime.name == "MixedEntropicHoelder":
        e = Eps()
        for _ in range(regime.level):
            e = GApply(GFunction.power(0.5), GApply(_HAT_G, e))
        return e
    raise ValueError(f"no bound for regime {regime}")


def step_frfs(problem: FeasibilityProblem, chain: FacialReductionChain, kappa: float = 1.0) -> list:
    """One FRF per chain step, in step order."""
    out = []
    for i, z in enumerate(chain.exposing):
        cur, nxt = chain.faces[i], chain.faces[i + 1]
        blocks = []
        for f, zi, g in zip(cur, _blocks(z, problem.m), nxt):
            if f.kind is FaceKind.FULL and g != f:
                blocks.append(frf_for_exposed(g, zi, kappa))
            else:
                blocks.append(polyhedral_frf(kappa))
        out.append(blocks[0] if problem.m == 1 else product_frf(blocks, _HAT_G))
    return out


@dataclass(frozen=True)
class AssembledBound:
    """``ε + φ(ε, M)`` with ``φ`` the diamond chain of the step FRFs."""

    expr: FRFExpr
    radius: float
    dominating: FRFExpr | None = None

    def __call__(self, eps):
        return self.expr(eps, self.radius)


def assemble_bound(chain: FacialReductionChain, frfs, B_radius: float) -> AssembledBound:
    frfs = list(frfs)
    if len(frfs) != chain.d_pps:
        raise ValueError(f"expected {chain.d_pps} FRFs, got {len(frfs)}")
    if not B_radius > 0:
        raise ValueError("B_radius must be positive")
    if not frfs:
        expr = Eps()
    else:
        from .frf import Sum

        # φ = ψ_{ℓ-1} ♦ ... ♦ ψ_1; frfs arrive in step order
        expr = Sum((Eps(), diamond_chain(frfs[::-1])))
    dom = None
    if len(chain.faces[0]) > 1 and chain.sane:
        dom = regime_bound(Regime("MixedEntropicHoelder", level=chain.d_pps))
    return AssembledBound(expr, float(B_radius), dom)


# --- distance oracle --------------------------------------------------------


def _closed_form_faces(problem, chain):
    if chain is None:
        return None
    faces = chain.faces[-1]
    if any(f.kind is FaceKind.FULL for f in faces):
        return None
    aff = problem.affine
    if np.linalg.norm(aff.anchor) > 1e-12:
        return None
    for i, f in enumerate(faces):
        for gvec in _face_generators(f):
            v = np.zeros(problem.dim)
            v[3 * i : 3 * i + 3] = gvec
            if aff.distance(v)[0] > 1e-10:
                return None
    return faces


def _dykstra(X, proj_a, proj_b, tol, cap):
    x = X.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    active = np.ones(len(x), dtype=bool)
    for it in range(cap):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return x, it
        xa = x[idx]
        y = proj_a(xa + p[idx])
        p[idx] = xa + p[idx] - y
        xn = proj_b(y + q[idx])
        q[idx] = y + q[idx] - xn
        change = np.abs(xn - xa).max(axis=1)
        x[idx] = xn
        active[idx[change < tol]] = False
    raise OracleDivergence(
        f"Dykstra did not converge in {cap} iterations",
        {"unconverged": int(active.sum())},
    )


def distances_to_intersection(X, problem: FeasibilityProblem, chain: FacialReductionChain | None = None, tol: float = DYKSTRA_TOL, cap: int = DYKSTRA_CAP, method: str = "auto"):
    """Distances from the rows of ``X`` to ``(L + a) ∩ K``.

    ``method``: ``closed`` (terminal face inside ``L + a``), ``reduced``
    (Dykstra between the terminal face and ``L + a``), ``raw`` (Dykstra
    between K and ``L + a``) or ``auto`` (the first that applies).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != problem.dim:
        raise ValueError(f"points must have {problem.dim} coordinates")
    aff = problem.affine
    faces = _closed_form_faces(problem, chain)
    if method in ("auto", "closed") and faces is not None:
        return geometry.row_norms(X - _project_faces(faces, X))
    if method == "closed":
        raise ValueError("the terminal face is not contained in L + a")
    if method in ("auto", "reduced") and chain is not None:
        fs = chain.faces[-1]
        proj = lambda Y: _project_faces(fs, Y)  # noqa: E731
    elif method in ("auto", "raw", "reduced"):
        proj = lambda Y: geometry.project_product(Y)[0]  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    x, _ = _dykstra(X, proj, aff.project, tol, cap)
    # a stationary pair with a gap means the sets do not meet
    gap = geometry.row_norms(x - proj(x))
    if np.any(gap > math.sqrt(tol) * np.maximum(1.0, geometry.row_norms(x))):
        raise OracleDivergence("Dykstra stalled at a positive gap; the problem looks infeasible", {"gap": float(gap.max())})
    return geometry.row_norms(X - x)


def distance_to_intersection(x, problem: FeasibilityProblem, chain: FacialReductionChain | None = None, tol: float = DYKSTRA_TOL, method: str = "auto") -> float:
    return float(distances_to_intersection(np.asarray(x, dtype=float)[None, :], problem, chain, tol, method=method)[0])


# --- empirical verification -------------------------------------------------


def _probe_depths(samples):
    # quadratic in the probe count, so deeper probes come with more samples
    n = max(3, samples // 100)
    j = np.arange(1, n + 1)
    return np.minimum(0.5 * j * j, 690.0)


def _tightness_points(problem, chain, samples):
    """Embedded tightness-sequence points for the terminal faces of ``chain``."""
    if chain is None or chain.d_pps == 0:
        return np.zeros((0, problem.dim))
    last = chain.faces[-1]
    depths = _probe_depths(samples)
    pts = []
    for logk in depths:
        k = math.exp(logk)
        x = np.zeros(problem.dim)
        any_block = False
        for i, f in enumerate(last):
            if f.kind is FaceKind.FNEGINF:
                x[3 * i : 3 * i + 3] = tightness_sequence(SequenceKind.entropic(), max(k, 3.0)).w
                any_block = True
            elif f.kind is FaceKind.FBETA:
                kk = min(k, 1e7)
                x[3 * i : 3 * i + 3] = tightness_sequence(SequenceKind.beta_b(f.beta), kk).w
                any_block = True
            elif f.kind is FaceKind.FINF:
                kk = min(logk + 3.0, 500.0)
                x[3 * i : 3 * i + 3] = tightness_sequence(SequenceKind.log_c(), kk).w
                any_block = True
        if any_block:
            pts.append(x)
    if not pts:
        return np.zeros((0, problem.dim))
    P = np.unique(np.array(pts), axis=0)
    # keep only points that stay in L + a
    return P[problem.affine.distance(P) <= 1e-12 * np.maximum(1.0, np.abs(P).max(axis=1))]


def _random_points(problem, chain, B_radius, n, rng):
    dim = problem.dim
    # near-feasible points: feasible base plus a small perturbation
    m = n - n // 2
    base = rng.standard_normal((m, dim)) * (B_radius / 2)
    faces = _closed_form_faces(problem, chain)
    if faces is not None:
        base = _project_faces(faces, base)
    else:
        base = np.repeat(problem.affine.anchor[None, :], m, axis=0)
        feas = geometry.project_product(base)[0]
        if np.abs(feas - base).max() > 1e-9:
            base = np.zeros((0, dim))
    V = rng.standard_normal((len(base), dim))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    delta = 10 ** rng.uniform(-8, 0, len(base))
    near = base + delta[:, None] * V * B_radius
    near = near[np.linalg.norm(near, axis=1) <= B_radius]
    # uniform points of the ball fill up the rest
    k = n - len(near)
    U = rng.standard_normal((k, dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    R = B_radius * rng.uniform(0, 1, k) ** (1.0 / dim)
    return np.vstack([U * R[:, None], near])


def verify_bound(
    problem: FeasibilityProblem,
    chain: FacialReductionChain,
    bound,
    B_radius: float = 2.0,
    samples: int = 2000,
    seed: int = 0,
    regime: Regime | None = None,
    tol: float = DYKSTRA_TOL,
) -> ErrorBoundReport:
    """Fit the smallest ``κ`` with ``d(x, (L+a) ∩ K) <= κ·bound(ε(x))`` on samples.

    ``ε(x) = max{d(x, K), d(x, L+a)}``. Samples are random points of
    ``B(B_radius)``, near-feasible points and tightness probes whose depth
    grows with ``samples``. ``tightness_ratio`` is the smallest
    ``lhs / bound(ε)`` along the probes and ``tight`` compares it with
    ``1 / (2 L)`` for the growth constant ``L`` of the bound's outer function.
    """
    if not B_radius > 0 or samples < 1:
        raise ValueError("B_radius and samples must be positive")
    rng = np.random.default_rng(seed)
    regime = regime or classify_regime(chain, problem)
    evaluate = bound if callable(bound) and not isinstance(bound, FRFExpr) else (lambda e: bound(e, B_radius))
    X = _random_points(problem, chain, B_radius, samples, rng)
    T = _tightness_points(problem, chain, samples)
    allx = np.vstack([X, T])
    lhs = distances_to_intersection(allx, problem, chain, tol)
    eps = np.maximum(geometry.product_distance(allx), problem.affine.distance(allx))
    rhs = np.maximum(np.asarray(evaluate(eps), dtype=float), KAPPA_FLOOR)
    # the closed-form oracle is exact; the iterative one only to its tolerance
    floor = 0.0 if _closed_form_faces(problem, chain) is not None else 10 * tol
    use = lhs > floor
    if not use.any():
        kappa = 0.0
    else:
        kappa = float(np.max(lhs[use] / rhs[use]) * (1 + 4 * np.finfo(float).eps))
    viol = float(np.max(np.where(use, lhs - kappa * rhs, -np.inf))) if use.any() else 0.0
    tr, tight = None, None
    nt = len(T)
    # lower bounds along the sequences are only claimed for a single cone
    if nt and problem.m == 1:
        sel = use[-nt:]
        if sel.any():
            tr = float(np.min(lhs[-nt:][sel] / rhs[-nt:][sel]))
            L = _outer_growth(bound)
            tight = bool(tr >= 1.0 / (2.0 * L))
    return ErrorBoundReport(regime, kappa, viol, int(len(allx)), int((~use).sum()), tr, tight, seed)


def _outer_growth(bound):
    node = bound.expr if isinstance(bound, AssembledBound) else bound
    if isinstance(node, GApply):
        return growth_constant(node.g)
    return 1.0


# --- example problems -------------------------------------------------------


def example_problem(name: str, beta: float = 1.0) -> FeasibilityProblem:
    """Small named problems used by the demos and tests."""
    if name == "entropic":
        return FeasibilityProblem(1, [[1, 0, 0], [0, 0, 1]], [0, 0, 0])
    if name == "beta":
        return FeasibilityProblem.orthogonal_to([face_frame(beta).z_hat])
    if name == "log":
        return FeasibilityProblem(1, [[1, 0, 0], [0, 1, 0]], [0, 0, 0])
    if name == "slater":
        return FeasibilityProblem(1, np.zeros((0, 3)), [0, 1, 2])
    if name == "product":
        z = np.zeros((2, 6))
        z[0, :3] = face_frame(beta).z_hat
        z[1, 4] = 1.0
        return FeasibilityProblem.orthogonal_to(z, m=2)
    if name == "product3":
        z = np.zeros((2, 6))
        z[0, 1] = 1.0
        z[1, 0] = -1.0
        z[1, 4] = 1.0
        return FeasibilityProblem.orthogonal_to(z, m=2)
    raise ValueError(f"unknown example {name!r}")
