"""Vectorised numpy kernels for projecting onto the exponential cone.

Used when the compiled extension is unavailable. The public entry point is
:func:`project_batch`; the compiled module exposes the same signature.

Outside ``K ∪ K°`` and the ``x ≤ 0, y ≤ 0`` wedge, the projection lies on the
sheet ``z = y e^{x/y}`` at a point ``y·(ρ, 1, e^ρ)``. Writing
``p = y·d(ρ) + λ·n(ρ)`` with the outward normal ``n(ρ) = (1, 1-ρ, -e^{-ρ})``
gives ``y = ((ρ-1)x + y₀)/(ρ²-ρ+1)`` and ``λ = (x - ρy₀)/(ρ²-ρ+1)``. Positivity
of ``y`` and ``λ`` confines ρ to an interval on which the remaining
coordinate equation is strictly increasing, so a bracketed solve is safe.
"""

from __future__ import annotations

import numpy as np

RHO_MAX = 700.0

CASE_PRIMAL = 0
CASE_POLAR = 1
CASE_WEDGE = 2
CASE_SHEET = 3


def _in_cone(x, y, z):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = np.where(y > 0, x / np.where(y > 0, y, 1.0), 0.0)
        sheet = (y > 0) & (z >= y * np.exp(np.minimum(ratio, RHO_MAX + 10)))
    return sheet | ((y == 0) & (x <= 0) & (z >= 0))


def _in_polar(x, y, z):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = np.where(x > 0, y / np.where(x > 0, x, 1.0), 0.0)
        curved = (x > 0) & (-z >= x * np.exp(np.minimum(ratio - 1.0, RHO_MAX + 10)))
    return curved | ((x == 0) & (y <= 0) & (z <= 0))


def scaled_residual(rho, x, y, z):
    """Root function of the sheet case, rescaled by ``e^{-|ρ|}``.

    The sign matches ``((ρ-1)x+y)e^ρ - (x-ρy)e^{-ρ} - (ρ²-ρ+1)z``.
    """
    a = (rho - 1.0) * x + y
    b = x - rho * y
    c = rho * rho - rho + 1.0
    pos = rho >= 0
    e = np.exp(-np.abs(rho))
    return np.where(pos, a - b * e * e - c * z * e, a * e * e - b - c * z * e)


def _bracket(x, y):
    lo = np.full_like(x, -RHO_MAX)
    hi = np.full_like(x, RHO_MAX)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = 1.0 - y / x
        r2 = x / y
    lo = np.where(x > 0, np.maximum(lo, r1), lo)
    hi = np.where(x < 0, np.minimum(hi, r1), hi)
    hi = np.where(y > 0, np.minimum(hi, r2), hi)
    lo = np.where(y < 0, np.maximum(lo, r2), lo)
    return np.clip(lo, -RHO_MAX, RHO_MAX), np.clip(hi, -RHO_MAX, RHO_MAX)


def _sheet_pair(rho, x, y, z):
    # normal scaled so that no component overflows
    e = np.exp(-np.abs(rho))
    pos = rho >= 0
    nx = np.where(pos, 1.0, e)
    ny = (1.0 - rho) * nx
    nz = np.where(pos, -e, -1.0)
    nn = nx * nx + ny * ny + nz * nz
    lam = np.maximum(x * nx + y * ny + z * nz, 0.0) / nn
    polar = np.stack([lam * nx, lam * ny, lam * nz], axis=-1)
    dist = lam * np.sqrt(nn)
    num = (rho - 1.0) * x + y
    # the direct primal is trusted only when its numerator did not cancel
    clean = np.abs(num) > 1e-6 * (np.abs(rho - 1.0) * np.abs(x) + np.abs(y))
    yc = np.maximum(num, 0.0) / (rho * rho - rho + 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        primal = np.stack([yc * rho, yc, yc * np.exp(rho)], axis=-1)
    # each coordinate: keep the smaller part as computed, the larger by difference
    p = np.stack([x, y, z], axis=-1)
    keep_primal = clean[:, None] & (np.abs(primal) <= np.abs(polar))
    primal = np.where(keep_primal, primal, p - polar)
    polar = np.where(keep_primal, p - primal, polar)
    return primal, polar, dist


def project_batch(points, max_iter=200):
    """Project an ``(n, 3)`` array onto the exponential cone.

    Returns ``(primal, polar, dist, rho, case, iters)``. ``rho`` is NaN
    outside the sheet case and ``iters`` counts bisection steps.
    """
    p = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    n = p.shape[0]
    primal = np.zeros_like(p)
    polar = np.zeros_like(p)
    dist = np.zeros(n)
    rho = np.full(n, np.nan)
    case = np.full(n, CASE_SHEET, dtype=np.int8)
    iters = np.zeros(n, dtype=np.int64)

    in_k = _in_cone(x, y, z)
    in_pol = _in_polar(x, y, z) & ~in_k
    wedge = (x <= 0) & (y <= 0) & ~in_k & ~in_pol
    case[in_k] = CASE_PRIMAL
    case[in_pol] = CASE_POLAR
    case[wedge] = CASE_WEDGE

    primal[in_k] = p[in_k]
    polar[in_pol] = p[in_pol]
    dist[in_pol] = np.linalg.norm(p[in_pol], axis=1)
    if wedge.any():
        pw = p[wedge]
        primal[wedge] = np.stack([pw[:, 0], np.zeros(len(pw)), np.maximum(pw[:, 2], 0.0)], axis=-1)
        polar[wedge] = np.stack([np.zeros(len(pw)), pw[:, 1], np.minimum(pw[:, 2], 0.0)], axis=-1)
        dist[wedge] = np.hypot(pw[:, 1], np.minimum(pw[:, 2], 0.0))

    sheet = case == CASE_SHEET
    if sheet.any():
        xs, ys, zs = x[sheet], y[sheet], z[sheet]
        lo, hi = _bracket(xs, ys)
        # bracket emptied by the clamp: the root sits beyond |ρ| = RHO_MAX
        beyond = lo >= hi
        lo = np.where(beyond, hi, lo)
        f_lo = scaled_residual(lo, xs, ys, zs)
        f_hi = scaled_residual(hi, xs, ys, zs)
        r = np.where(f_lo >= 0, lo, np.where(f_hi <= 0, hi, 0.5 * (lo + hi)))
        active = (f_lo < 0) & (f_hi > 0) & ~beyond
        it = np.zeros(len(xs), dtype=np.int64)
        for _ in range(max_iter):
            if not active.any():
                break
            mid = 0.5 * (lo + hi)
            f_mid = scaled_residual(mid, xs, ys, zs)
            go_up = f_mid < 0
            lo = np.where(active & go_up, mid, lo)
            hi = np.where(active & ~go_up, mid, hi)
            it += active
            done = (hi - lo <= 4e-16 * np.maximum(1.0, np.abs(mid))) | (f_mid == 0)
            r = np.where(active, np.where(f_mid == 0, mid, 0.5 * (lo + hi)), r)
            active &= ~done
        pri, pol, d = _sheet_pair(r, xs, ys, zs)
        # root beyond the clamp: the sheet degenerates towards F_{-inf}
        ps = p[sheet]
        cand = np.stack([np.minimum(xs, 0.0), np.zeros_like(xs), np.maximum(zs, 0.0)], axis=-1)
        dc = np.linalg.norm(ps - cand, axis=1)
        at_clamp = np.abs(r) >= RHO_MAX
        swap = at_clamp & (dc <= np.linalg.norm(ps - pri, axis=1))
        pri = np.where(swap[:, None], cand, pri)
        pol = np.where(swap[:, None], ps - cand, pol)
        d = np.where(swap, dc, np.where(at_clamp, np.linalg.norm(pol, axis=1), d))
        polar[sheet] = pol
        primal[sheet] = pri
        dist[sheet] = d
        rho[sheet] = r
        iters[sheet] = it
    return primal, polar, dist, rho, case, iters
