"""Acceptance suite: one PASS/FAIL line per criterion.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
where the lines are repeated in the terminal summary.
"""

import math
import sys
import time

import numpy as np
import pytest

from expcone import geometry
from expcone.analysis import SequenceKind, estimate_gamma, fit_exponent, tightness_sequence
from expcone.faces import FaceDescriptor as FD, canonical_exposing, distance_decomposition, face_frame, project_face
from expcone.feasibility import (
    Regime,
    assemble_bound,
    build_chain,
    classify_regime,
    example_problem,
    regime_bound,
    step_frfs,
    verify_bound,
)
from expcone.frf import (
    Coefficient,
    Diamond,
    Eps,
    GApply,
    Prod,
    check_frf,
    diamond_chain,
    frf_for_exposed,
    frf_nonexposed,
    lift_frf,
    polyhedral_frf,
    product_frf,
    rescale,
)
from expcone.gfun import GFunction as G, growth_constant

RESULTS = {}


def moreau_suite():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    U = rng.standard_normal((10_000, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    P = U * 10 * rng.uniform(0, 1, (10_000, 1)) ** (1 / 3)
    pri, pol, _ = geometry.project_many(P)
    ident = np.abs(P - pri - pol).max()
    orth = np.abs(np.sum(pri * pol, axis=1)).max()
    inside = all(geometry.contains(x, 1e-8).inside for x in pri) and all(geometry.dual_contains(-x, 1e-8).inside for x in pol)
    dt = time.perf_counter() - t0
    ok = ident <= 1e-8 and orth <= 1e-8 and inside and dt < 10
    return ok, f"identity {ident:.1e}, orthogonality {orth:.1e}, membership {inside}, {dt:.2f} s"


def distance_equivalence():
    rng = np.random.default_rng(2)
    worst = 0.0
    for beta in (-3, -1, 0, 0.5, 1, 2, 5):
        fr = face_frame(beta)
        zh = fr.z_hat / np.linalg.norm(fr.z_hat)
        fh = fr.f_hat / np.linalg.norm(fr.f_hat)
        for _ in range(1000):
            v = geometry.boundary_point(10 ** rng.uniform(-2, 1), rng.uniform(-8, 8))
            w = v - (v @ zh) * zh
            u = max(w @ fh, 0.0) * fh
            d = distance_decomposition(beta, v)
            worst = max(worst, abs(d.dist_to_hyperplane - np.linalg.norm(w - v)), abs(d.dist_within_hyperplane - np.linalg.norm(w - u)))
    return worst <= 1e-10, f"max deviation {worst:.1e} over 7000 boundary points"


def beta_limit():
    ks = [1e3, 1e4, 1e5, 1e6]
    r = []
    for k in ks:
        p = tightness_sequence(SequenceKind.beta_b(1.0), k)
        r.append(math.sqrt(p.rhs_input) / p.lhs)
    # the sequence itself, evaluated far out, fixes the constant
    far = tightness_sequence(SequenceKind.beta_b(1.0), 1e8)
    limit = math.sqrt(far.rhs_input) / far.lhs
    rel = abs(r[-1] - limit) / limit
    steps = np.abs(np.diff(r))
    ok = rel < 0.01 and abs(limit - 3 ** -0.75) < 1e-6 and np.all(steps[1:] < steps[:-1])
    return ok, f"ratio at 1e6 = {r[-1]:.10f}, sequence limit {limit:.10f}, 3^(-3/4) = {3 ** -0.75:.10f}"


def entropic_tightness():
    L = growth_constant(G.entropy())
    lo, hi, worst_face, worst_cone = np.inf, 0.0, 0.0, 0.0
    for k in np.unique(np.round(np.logspace(1, 6, 41))):
        p = tightness_sequence(SequenceKind.entropic(), k)
        dface = np.linalg.norm(p.w - project_face(FD.fneginf(), p.w))
        worst_face = max(worst_face, abs(dface - math.log(k) / k) / (math.log(k) / k))
        worst_cone = max(worst_cone, p.rhs_input * k)
        ratio = p.lhs / G.entropy()(p.rhs_input)
        lo, hi = min(lo, ratio), max(hi, ratio)
    ok = worst_face < 1e-14 and worst_cone <= 1 and lo >= 0.5 and hi <= 2 * L
    return ok, f"ratio in [{lo:.4f}, {hi:.4f}] within [0.5, {2 * L:.4f}], max k*d_K = {worst_cone:.4f}"


def log_tightness():
    vals = []
    for k in range(50, 501):
        p = tightness_sequence(SequenceKind.log_c(), k)
        vals.append(k * G.log()(p.rhs_input))
    lo, hi = min(vals), max(vals)
    return 0.8 <= lo and hi <= 1.2, f"k*g(d_K) in [{lo:.4f}, {hi:.4f}] for k = 50..500"


def non_hoelder():
    parts, ok = [], True
    for alpha in (0.25, 0.5, 1.0):
        r = []
        for k in range(1, 61):
            q = np.array([-0.5, 0.5 / k, 0.0])
            r.append(geometry.distance(q) ** alpha / (0.5 / k))
        # the bound k^(1-a) e^(-a k) peaks at k = (1-a)/a; monotone from there
        k0 = max(1, math.ceil((1 - alpha) / alpha))
        mono = bool(np.all(np.diff(r[k0 - 1 :]) < 0))
        ok &= mono and r[-1] < 1e-4
        parts.append(f"a={alpha:g}: decreasing from k={k0} {mono}, k=60 ratio {r[-1]:.1e}")
    return ok, "; ".join(parts)


def exponent_fits():
    fits = {
        "FBeta(0)": (fit_exponent(canonical_exposing(FD.fbeta(0)), FD.fbeta(0)), 0.5),
        "FBeta(1)": (fit_exponent(canonical_exposing(FD.fbeta(1)), FD.fbeta(1)), 0.5),
        "FInf z=(0,1,1)": (fit_exponent([0, 1, 1], FD.finf()), 1.0),
    }
    ok = all(abs(f.slope - s) <= 0.05 and f.r_squared >= 0.98 for f, s in fits.values())
    return ok, ", ".join(f"{n} slope {f.slope:.4f} r2 {f.r_squared:.5f}" for n, (f, _) in fits.items())


def gamma_floor():
    est = estimate_gamma([0, 1, 1], FD.finf(), G.identity())
    floor = 1 / (2 * math.sqrt(2)) - 0.01
    return est.gamma_hat >= floor, f"gamma_hat {est.gamma_hat:.6f} >= {floor:.6f}"


def frf_algebra():
    kap = Coefficient.table([1, 10, 100], [1, 2, 5])
    sq = GApply(G.power(0.5), Eps())
    built = [
        frf_for_exposed(FD.fbeta(1.0), canonical_exposing(FD.fbeta(1.0)), kap),
        frf_for_exposed(FD.fneginf(), [0, 1, 0], kap),
        frf_for_exposed(FD.finf(), [0, 1, 1], kap),
        frf_for_exposed(FD.finf(), [0, 0, 1], kap),
        frf_nonexposed([-1, 0, 0], kap),
        polyhedral_frf(kap),
    ]
    built += [product_frf(built[:2], G.entropy(), kap), lift_frf(built[4], G.entropy(), kap), diamond_chain(built[:3]), rescale(built[3], 2, 3, 4)]
    e, t = np.linspace(0, 10, 100), np.linspace(0, 100, 100)
    good = all(check_frf(p, e, t) == (True, True) for p in built)
    psi = built[4]
    lhs = rescale(rescale(psi, 2.0, 0.5, 3.0), 0.25, 4.0, 1.5)(e[:, None], t)
    rhs = rescale(psi, 0.5, 2.0, 4.5)(e[:, None], t)
    law = float(np.abs(lhs - rhs).max())
    p3, p2, p1 = sq, rescale(Eps(), 1, 1, 2), Prod((Eps(), Eps()))
    right, left = diamond_chain([p3, p2, p1]), Diamond(Diamond(p3, p2), p1)
    gap = float(np.abs(right(1.0) - left(1.0)))
    ok = good and law <= 1e-12 * np.abs(rhs).max() and gap > 0
    return ok, f"{len(built)} FRFs pass the grid check {good}, rescale law error {law:.1e}, associativity gap at eps=1 {gap:.4f}"


def regimes_end_to_end():
    want = {"entropic": "Entropic", "beta": "Hoelder(0.5)", "log": "LogType"}
    parts, ok = [], True
    for name, reg in want.items():
        p = example_problem(name)
        c = build_chain(p)
        r = classify_regime(c, p)
        rep = verify_bound(p, c, regime_bound(r), samples=2000)
        good = str(r) == reg and rep.max_violation <= 0 and bool(rep.tight)
        ok &= good
        parts.append(f"{name}: {r}, kappa {rep.kappa_fit:.3f}, violation {rep.max_violation:.1e}, tight {rep.tight}")
    p = example_problem("entropic")
    c = build_chain(p)
    ks = [verify_bound(p, c, Eps(), samples=n, regime=Regime("Lipschitz")).kappa_fit for n in (1000, 2000, 4000)]
    growth = ks[-1] / ks[0]
    ok &= growth > 10
    parts.append(f"wrong Lipschitz kappa {ks[0]:.1f} -> {ks[1]:.1f} -> {ks[2]:.1f} ({growth:.1f}x)")
    return ok, "; ".join(parts)


def sane_product():
    p = example_problem("product")
    c = build_chain(p)
    b = assemble_bound(c, step_frfs(p, c), 2.0)
    rep = verify_bound(p, c, b.dominating, samples=10_000)
    faces = sorted(str(f) for f in c.faces[-1])
    ok = faces == ["FBeta(1)", "FNegInf"] and c.d_pps <= 2 and c.sane and rep.max_violation <= 0 and math.isfinite(rep.kappa_fit)
    return ok, f"faces {faces}, d_pps {c.d_pps}, sane {c.sane}, {rep.samples} samples, kappa {rep.kappa_fit:.4f}, violation {rep.max_violation:.1e}"


CRITERIA = {
    1: ("Moreau suite", moreau_suite),
    2: ("distance decomposition", distance_equivalence),
    3: ("Hoelder-1/2 limit", beta_limit),
    4: ("entropic tightness", entropic_tightness),
    5: ("log-type tightness", log_tightness),
    6: ("non-Hoelderian witness", non_hoelder),
    7: ("exponent fits", exponent_fits),
    8: ("gamma floor", gamma_floor),
    9: ("FRF algebra", frf_algebra),
    10: ("end-to-end regimes", regimes_end_to_end),
    11: ("SANE product", sane_product),
}


def run_criterion(n):
    title, fn = CRITERIA[n]
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failure, not an error in the harness
        ok, detail = False, f"{type(e).__name__}: {e}"
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    RESULTS[n] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, line = run_criterion(n)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n)[0] for n in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
