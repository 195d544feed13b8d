"""Membership, projection and boundary parametrisation for the exponential cone.

``K = cl{(x, y, z) : y > 0, z >= y e^{x/y}}`` and its dual
``K* = cl{(x, y, z) : x < 0, e z >= -x e^{y/x}}``. Points are plain numpy
arrays of shape ``(3,)``; batched helpers take ``(n, 3)`` or ``(n, 3m)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = [
    "AffineSubspace",
    "ConvergenceError",
    "Membership",
    "MembershipStatus",
    "MoreauPair",
    "boundary_point",
    "contains",
    "distance",
    "distance_many",
    "dual_contains",
    "product_distance",
    "project",
    "project_dual",
    "project_many",
    "project_product",
    "row_norms",
]

DEFAULT_TOL = 1e-12
_CHECK_TOL = 1e-9
_MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """Raised when a numerical solve fails its own residual check."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class MembershipStatus(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Membership:
    status: MembershipStatus
    violation: float

    @property
    def inside(self) -> bool:
        return self.status is not MembershipStatus.OUTSIDE


@dataclass(frozen=True)
class MoreauPair:
    """``primal`` is the projection onto K, ``polar`` the one onto ``-K*``."""

    primal: np.ndarray
    polar: np.ndarray

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.polar))


def row_norms(V) -> np.ndarray:
    """Euclidean row norms without underflow for tiny entries."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    scale = np.abs(V).max(axis=1, initial=0.0)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sqrt(((V / safe[:, None]) ** 2).sum(axis=1))


def as_point(p, name="point") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have exactly 3 coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates: {arr}")
    return arr


def _sheet_violation(x, y, z):
    # residual of y e^{x/y} - z divided by its gradient norm, y > 0
    t = x / y
    with np.errstate(over="ignore", invalid="ignore"):
        if t > 0:
            e = np.exp(-t)
            return (y - z * e) / np.sqrt(e * e + 1.0 + (1.0 - t) ** 2)
        e = np.exp(t)
        return (y * e - z) / np.sqrt(e * e * (1.0 + (1.0 - t) ** 2) + 1.0)


def _dual_sheet_violation(x, y, z):
    # residual of -x e^{y/x - 1} - z divided by its gradient norm, x < 0
    s = y / x - 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        if s > 0:
            e = np.exp(-s)
            return (-x - z * e) / np.sqrt(e * e + 1.0 + s * s)
        e = np.exp(s)
        return (-x * e - z) / np.sqrt(1.0 + e * e * (1.0 + s * s))


def _classify(interior, dist, p, tol):
    if interior:
        return Membership(MembershipStatus.INTERIOR, 0.0)
    viol = float(dist) / max(1.0, float(np.linalg.norm(p)))
    status = MembershipStatus.BOUNDARY if viol <= tol else MembershipStatus.OUTSIDE
    return Membership(status, viol)


def contains(p, tol: float = DEFAULT_TOL) -> Membership:
    """Classify ``p`` against K.

    Interior means ``y > tol`` and a gradient-normalised slack above ``tol``
    in ``z >= y e^{x/y}``. Otherwise the violation is ``d(p, K) / max(1, ‖p‖)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = as_point(p)
    x, y, z = arr
    interior = bool(y > tol and -_sheet_violation(x, y, z) > tol)
    if interior:
        return _classify(True, 0.0, arr, tol)
    return _classify(False, project_many(arr[None, :])[2][0], arr, tol)


def dual_contains(z, tol: float = DEFAULT_TOL) -> Membership:
    """Classify ``z`` against the dual cone K*, with ``d(z, K*) = ‖P_K(-z)‖``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = as_point(z, "dual point")
    x, y, zz = arr
    interior = bool(x < -tol and -_dual_sheet_violation(x, y, zz) > tol)
    if interior:
        return _classify(True, 0.0, arr, tol)
    primal = project_many(-arr[None, :])[0][0]
    return _classify(False, np.linalg.norm(primal), arr, tol)


def boundary_point(y: float, r: float) -> np.ndarray:
    """Return ``y * (r, 1, e^r)``, the sheet point with ratio ``x/y = r``."""
    if not y > 0:
        raise ValueError(f"boundary_point needs y > 0, got {y}")
    if not np.isfinite(r) or not np.isfinite(y):
        raise ValueError("boundary_point needs finite arguments")
    return np.array([y * r, y, y * np.exp(r)])


def _check_pairs(p, primal, polar):
    scale = np.maximum(1.0, np.abs(p).max(axis=1))
    resid = np.abs(primal + polar - p).max(axis=1) / scale
    bad = ~np.isfinite(resid) | (resid > _CHECK_TOL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ConvergenceError(
            f"projection failed its residual check at {p[i].tolist()}",
            {"sum_residual": float(resid[i]), "count": int(bad.sum())},
        )


def project_many(points):
    """Batched projection: returns ``(primal, polar, dist)`` arrays."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(p)):
        raise ValueError("projection input must be finite")
    primal, polar, dist, _, _, iters = _backend.project_batch(p, _MAX_ITER)
    _check_pairs(p, primal, polar)
    if np.any(iters >= _MAX_ITER):
        i = int(np.flatnonzero(iters >= _MAX_ITER)[0])
        raise ConvergenceError(f"root search hit {_MAX_ITER} iterations at {p[i].tolist()}", {"iterations": _MAX_ITER})
    return primal, polar, dist


def project(p) -> MoreauPair:
    """Moreau decomposition of ``p`` with respect to K."""
    arr = as_point(p)
    primal, polar, _ = project_many(arr[None, :])
    return MoreauPair(primal[0], polar[0])


def distance(p) -> float:
    """Euclidean distance from ``p`` to K."""
    arr = as_point(p)
    return float(project_many(arr[None, :])[2][0])


def distance_many(points) -> np.ndarray:
    return project_many(points)[2]


def project_dual(z) -> np.ndarray:
    """Projection onto K*, via ``P_{K*}(z) = z + P_K(-z)``."""
    arr = as_point(z, "dual point")
    return arr + project(-arr).primal


def project_product(X) -> tuple[np.ndarray, np.ndarray]:
    """Blockwise projection of ``(n, 3m)`` rows onto ``K^m``.

    Returns the projected rows and the distance of each row.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, dim = X.shape
    if dim % 3:
        raise ValueError("product points need a multiple of 3 coordinates")
    primal, _, dist = project_many(X.reshape(-1, 3))
    d = row_norms(dist.reshape(n, dim // 3))
    return primal.reshape(n, dim), d


def product_distance(X) -> np.ndarray:
    return project_product(X)[1]


class AffineSubspace:
    """The set ``L + a`` with ``L`` spanned by the rows of ``basis``.

    An empty basis gives the single point ``{a}``; ``basis=None`` with no
    anchor gives the whole space.
    """

    def __init__(self, basis, anchor=None, dim=None):
        if basis is None:
            if dim is None:
                raise ValueError("whole-space subspace needs dim")
            self.dim = int(dim)
            self.q = np.eye(self.dim)
        else:
            b = np.asarray(basis, dtype=float)
            if b.size == 0:
                if dim is None and anchor is None:
                    raise ValueError("empty basis needs dim or anchor")
                self.dim = int(dim if dim is not None else np.asarray(anchor).size)
                self.q = np.zeros((self.dim, 0))
            else:
                b = np.atleast_2d(b)
                self.dim = b.shape[1]
                q, r = np.linalg.qr(b.T)
                rank = int(np.sum(np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())))
                if rank < b.shape[0]:
                    raise ValueError("basis vectors are linearly dependent")
                self.q = q
        a = np.zeros(self.dim) if anchor is None else np.asarray(anchor, dtype=float)
        if a.shape != (self.dim,):
            raise ValueError("anchor dimension does not match the basis")
        # store the anchor component orthogonal to L
        self.anchor = a - self.q @ (self.q.T @ a)

    def project(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Y = X - self.anchor
        return Y @ self.q @ self.q.T + self.anchor

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return row_norms(X - self.project(X))
