"""Command-line front end.

Exit codes: 0 on success, 2 on invalid input, 3 when a solver does not
converge or a certificate search is inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__, geometry
from .analysis import SequenceKind, estimate_gamma, fit_exponent, kl_quotient, tightness_sequence
from .faces import FaceDescriptor, classify_exposing
from .feasibility import (
    CertificateSearchInconclusive,
    FeasibilityProblem,
    Regime,
    build_chain,
    classify_regime,
    example_problem,
    regime_bound,
    verify_bound,
)
from .frf import eval_frf, frf_for_exposed, frf_to_json
from .gfun import GFunction, growth_constant

SCHEMA = "1"
CSV_HEADER = ["k", "lhs", "dK", "ratio"]


class UsageError(ValueError):
    pass


def parse_point(text: str, n: int | None = 3) -> np.ndarray:
    """``"x,y,z"``; block points are ``;``-separated triples."""
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"not a list of reals: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} coordinates, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("coordinates must be finite")
    return np.array(vals)


def _emit(payload: dict, out: str | None):
    payload = {"schema": SCHEMA, **payload}
    text = json.dumps(payload, indent=2, default=_jsonable)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    return str(o)


def _write_csv(rows, out):
    buf = io.StringIO() if out is None else open(out, "w", newline="")
    try:
        w = csv.writer(buf)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in r])
        if out is None:
            sys.stdout.write(buf.getvalue())
    finally:
        buf.close()


def _problem(args) -> FeasibilityProblem:
    if args.problem and args.example:
        raise UsageError("give either --problem or --example")
    if args.problem:
        return FeasibilityProblem.load(args.problem)
    if args.example:
        return example_problem(args.example, args.beta)
    raise UsageError("a problem is required (--problem FILE or --example NAME)")


# --- subcommands ------------------------------------------------------------


def cmd_project(args):
    p = parse_point(args.point)
    pair = geometry.project(p)
    mem = geometry.contains(p)
    _emit(
        {
            "point": p,
            "primal": pair.primal,
            "polar": pair.polar,
            "distance": pair.distance,
            "membership": mem.status.value,
            "violation": mem.violation,
        },
        args.out,
    )


def cmd_classify(args):
    z = parse_point(args.z)
    face = classify_exposing(z, args.tol)
    _emit({"z": z, "face": str(face)}, args.out)


def cmd_frf(args):
    z = parse_point(args.z)
    face = FaceDescriptor.parse(args.face) if args.face else classify_exposing(z)
    g = GFunction.parse(args.g) if args.g else None
    psi = frf_for_exposed(face, z, args.kappa, g)
    eps = parse_point(args.eps, None)
    vals = eval_frf(psi, eps, args.t)
    _emit({"face": str(face), "z": z, "frf": json.loads(frf_to_json(psi)), "eps": eps, "t": args.t, "values": np.atleast_1d(vals)}, args.out)


def cmd_gamma(args):
    z = parse_point(args.z)
    face = FaceDescriptor.parse(args.face) if args.face else classify_exposing(z)
    g = GFunction.parse(args.g)
    est = estimate_gamma(z, face, g, args.eta)
    payload = {
        "face": str(face),
        "g": str(g),
        "eta": est.eta,
        "gamma_hat": est.gamma_hat,
        "argmin_witness": est.argmin_witness,
        "samples_used": est.samples_used,
        "vanishing": est.vanishing,
    }
    if args.fit:
        fit = fit_exponent(z, face, args.eta)
        payload["exponent_fit"] = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "sample_range": list(fit.sample_range),
            "hoelderian": fit.hoelderian,
        }
    _emit(payload, args.out)


def cmd_chain(args):
    prob = _problem(args)
    chain = build_chain(prob, seed=args.seed)
    regime = classify_regime(chain, prob)
    _emit({"problem": prob.to_dict(), "chain": chain.to_dict(), "regime": str(regime), "seed": args.seed}, args.out)


def _parse_regime(text: str) -> Regime:
    t = text.strip()
    if t in ("Lipschitz", "Entropic", "LogType"):
        return Regime(t)
    if t.startswith("Hoelder(") and t.endswith(")"):
        return Regime("Hoelder", exponent=float(t[8:-1]))
    if t.startswith("MixedEntropicHoelder(") and t.endswith(")"):
        return Regime("MixedEntropicHoelder", level=int(t[21:-1]))
    raise UsageError(f"unknown regime {text!r}")


def cmd_verify(args):
    prob = _problem(args)
    chain = build_chain(prob, seed=args.seed)
    regime = classify_regime(chain, prob)
    if not regime.supported:
        raise UsageError("unsupported composite regime: the chain meets F_inf in a product")
    trial = _parse_regime(args.bound) if args.bound else regime
    rep = verify_bound(prob, chain, regime_bound(trial), args.radius, args.samples, args.seed, regime=regime)
    payload = rep.to_dict()
    payload.update({"trial_bound": str(trial), "chain": chain.to_dict(), "radius": args.radius})
    if args.bound and str(trial) != str(regime):
        payload["note"] = "trial bound differs from the classified regime"
    _emit(payload, args.out)


def _kgrid(kmin, kmax, per_decade=4):
    n = max(2, int(round(per_decade * math.log10(kmax / kmin))) + 1)
    return np.unique(np.round(np.logspace(math.log10(kmin), math.log10(kmax), n)))


def demo_rows(kind: str, kmax: float | None = None, alpha: float = 0.5, beta: float = 1.0):
    """Rows ``(k, lhs, dK, ratio)`` and a summary dict for a demo sequence."""
    rows = []
    if kind == "entropic":
        kmax = kmax or 1e6
        L = growth_constant(GFunction.entropy())
        for k in _kgrid(10, kmax):
            p = tightness_sequence(SequenceKind.entropic(), k)
            rows.append((int(k), p.lhs, p.rhs_input, p.lhs / float(GFunction.entropy()(p.rhs_input))))
        summary = {"band": [0.5, 2 * L], "ratio": "lhs / g_-inf(dK)"}
    elif kind == "beta":
        kmax = kmax or 1e6
        for k in _kgrid(10, kmax):
            p = tightness_sequence(SequenceKind.beta_b(beta), k)
            rows.append((int(k), p.lhs, geometry.distance(p.w), math.sqrt(p.rhs_input) / p.lhs))
        summary = {"beta": beta, "ratio": "||w - v||^(1/2) / lhs", "limit_beta_1": 3 ** -0.75}
    elif kind == "log":
        kmax = int(kmax or 500)
        for k in range(1, kmax + 1):
            p = tightness_sequence(SequenceKind.log_c(), k)
            g = -1.0 / p.log_rhs_input if p.rhs_input == 0 else float(GFunction.log()(p.rhs_input))
            rows.append((k, p.lhs, p.rhs_input, k * g))
        summary = {"ratio": "k * g_inf(dK)"}
    elif kind == "nonholder":
        kmax = int(kmax or 60)
        for k in range(1, kmax + 1):
            q = np.array([-0.5, 0.5 / k, 0.0])
            dk = geometry.distance(q)
            rows.append((k, 0.5 / k, dk, dk**alpha / (0.5 / k)))
        summary = {"alpha": alpha, "eta": 1.0, "ratio": "dK^alpha / d(q, F_inf)"}
    elif kind == "kl":
        kmax = kmax or 1e12
        aff = geometry.AffineSubspace([[1, 0, 0], [0, 0, 1]])
        for k in _kgrid(10, kmax, 2):
            w = tightness_sequence(SequenceKind.entropic(), k).w
            y = 0.5 * (w + geometry.project(w).primal)
            f, gn = kl_quotient(y, affine=aff)
            rows.append((int(k), f, geometry.distance(y), gn / (2 * math.sqrt(f))))
        summary = {"ratio": "phi'(f) * ||grad f|| with phi(s) = s^(1/2)", "sets": "K_exp and {y = 0}"}
    else:
        raise UsageError(f"unknown demo {kind!r}")
    ratios = [r[3] for r in rows]
    summary.update({"kind": kind, "count": len(rows), "ratio_min": min(ratios), "ratio_max": max(ratios), "ratio_last": ratios[-1]})
    return rows, summary


def cmd_demo(args):
    rows, summary = demo_rows(args.kind, args.kmax, args.alpha, args.beta)
    summary["seed"] = args.seed
    if args.out and args.out.endswith(".json"):
        summary["rows"] = [dict(zip(CSV_HEADER, r)) for r in rows]
        _emit(summary, args.out)
    elif args.out:
        _write_csv(rows, args.out)
        summary["csv"] = args.out
        _emit(summary, None)
    else:
        summary["rows"] = [dict(zip(CSV_HEADER, r)) for r in rows]
        _emit(summary, None)


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="expcone", description="Projections and error bounds for the exponential cone.")
    ap.add_argument("--version", action="version", version=f"expcone {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the report to this file")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sampling (default 0)")
        return p

    p = common(sub.add_parser("project", help="project a point onto the cone"))
    p.add_argument("--point", required=True, help="x,y,z")
    p.set_defaults(func=cmd_project)

    p = common(sub.add_parser("classify", help="face exposed by a dual vector"))
    p.add_argument("--z", required=True, help="x,y,z in the dual cone")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_classify)

    p = common(sub.add_parser("frf", help="facial residual function for an exposed face"))
    p.add_argument("--z", required=True)
    p.add_argument("--face", help="face descriptor, e.g. FBeta(1); classified from z by default")
    p.add_argument("--g", help="g function for F_-inf: entropy or power(a)")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--eps", default="0,1e-6,1e-3,0.1,1", help="evaluation points")
    p.add_argument("--t", type=float, default=1.0)
    p.set_defaults(func=cmd_frf)

    p = common(sub.add_parser("gamma", help="estimate the ratio infimum for a face"))
    p.add_argument("--z", required=True)
    p.add_argument("--face")
    p.add_argument("--g", default="identity", help="identity, entropy, log or power(a)")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--fit", action="store_true", help="also fit the log-log exponent")
    p.set_defaults(func=cmd_gamma)

    examples = ["entropic", "beta", "log", "slater", "product", "product3"]
    for name, func, helptext in (("chain", cmd_chain, "facial reduction chain and regime"), ("verify", cmd_verify, "verify an error bound empirically")):
        p = common(sub.add_parser(name, help=helptext))
        p.add_argument("--problem", help='JSON file {"m", "L_basis", "a"}')
        p.add_argument("--example", choices=examples)
        p.add_argument("--beta", type=float, default=1.0, help="beta for the beta and product examples")
        if name == "verify":
            p.add_argument("--bound", help="trial regime, e.g. Lipschitz or Hoelder(0.5); defaults to the classified one")
            p.add_argument("--radius", type=float, default=2.0)
            p.add_argument("--samples", type=int, default=2000)
        p.set_defaults(func=func)

    p = common(sub.add_parser("demo", help="tabulate a tightness or counterexample sequence"))
    p.add_argument("kind", choices=["entropic", "beta", "log", "nonholder", "kl"])
    p.add_argument("--kmax", type=float)
    p.add_argument("--alpha", type=float, default=0.5, help="exponent for the nonholder demo")
    p.add_argument("--beta", type=float, default=1.0, help="beta for the beta demo")
    p.set_defaults(func=cmd_demo)
    return ap


_POINT_FLAGS = ("--point", "--z", "--eps")


def _join_negative(argv):
    # "--z -1,0,1" would otherwise be read as an unknown flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _POINT_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
                break
            out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative(argv))
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args)
    except (geometry.ConvergenceError, CertificateSearchInconclusive) as e:
        print(f"expcone: {e}", file=sys.stderr)
        return 3
    except (ValueError, OverflowError, OSError) as e:
        print(f"expcone: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
