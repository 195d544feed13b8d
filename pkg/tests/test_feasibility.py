import json
import math

import numpy as np
import pytest

from expcone import geometry
from expcone.analysis import SequenceKind, tightness_sequence
from expcone.faces import FaceDescriptor as FD, FaceKind, classify_exposing
from expcone.feasibility import (
    AssembledBound,
    FacialReductionChain,
    FeasibilityProblem,
    OracleDivergence,
    Regime,
    assemble_bound,
    build_chain,
    check_chain,
    classify_regime,
    distance_to_intersection,
    distances_to_intersection,
    example_problem,
    find_certificate,
    regime_bound,
    step_frfs,
    verify_bound,
)
from expcone.frf import Eps, GApply, eval_frf
from expcone.gfun import GFunction as G

FULL = (FD.full(),)


def _names(chain):
    return [[str(f) for f in fs] for fs in chain.faces]


def test_problem_validation_and_io(tmp_path):
    p = example_problem("product")
    path = tmp_path / "p.json"
    p.save(path)
    raw = json.loads(path.read_text())
    assert set(raw) == {"m", "L_basis", "a"}
    q = FeasibilityProblem.load(path)
    assert q.m == 2 and np.array_equal(q.L_basis, p.L_basis) and np.array_equal(q.a, p.a)
    with pytest.raises(ValueError):
        FeasibilityProblem(1, [[1, 0, 0], [2, 0, 0]], [0, 0, 0])
    with pytest.raises(ValueError):
        FeasibilityProblem(2, [[1, 0, 0]], [0, 0, 0])


def test_certificate_entropic():
    res = find_certificate(example_problem("entropic"), FULL)
    assert res.status == "found"
    z = res.z / np.abs(res.z).max()
    np.testing.assert_allclose(z, [0, 1, 0], atol=1e-12)


def test_certificate_beta_recovers_normal():
    zt = np.array([-1.0, -1.0, 1.0])
    res = find_certificate(FeasibilityProblem.orthogonal_to([zt]), FULL)
    assert res.status == "found"
    cos = res.z @ zt / (np.linalg.norm(res.z) * np.linalg.norm(zt))
    assert cos == pytest.approx(1.0, abs=1e-12)
    f = classify_exposing(res.z)
    assert f.kind is FaceKind.FBETA and f.beta == pytest.approx(1.0, abs=1e-12)


def test_certificate_slater_none():
    res = find_certificate(example_problem("slater"), FULL)
    assert res.status == "none"


@pytest.mark.parametrize(
    "name,faces,regime",
    [
        ("entropic", [["Full"], ["FNegInf"]], "Entropic"),
        ("beta", [["Full"], ["FBeta(1)"]], "Hoelder(0.5)"),
        ("log", [["Full"], ["FInf"]], "LogType"),
        ("slater", [["Full"]], "Lipschitz"),
        ("product", [["Full", "Full"], ["FBeta(1)", "FNegInf"]], "MixedEntropicHoelder(1)"),
        ("product3", [["Full", "Full"], ["FNegInf", "Full"], ["FNe", "FNegInf"]], "MixedEntropicHoelder(2)"),
    ],
)
def test_chains_and_regimes(name, faces, regime):
    p = example_problem(name)
    c = build_chain(p)
    assert _names(c) == faces
    assert c.d_pps == len(faces) - 1 <= p.m
    assert str(classify_regime(c, p)) == regime
    check_chain(p, c)
    assert c.sane == (name != "log")


def test_hoelder_for_negative_beta():
    p = example_problem("beta", beta=-2.0)
    c = build_chain(p)
    assert c.faces[-1][0] == FD.fbeta(-2.0)
    assert classify_regime(c, p) == Regime("Hoelder", exponent=0.5)


def test_finf_with_positive_certificate_is_lipschitz():
    p = FeasibilityProblem.orthogonal_to([[0, 1, 1]])
    c = build_chain(p)
    assert c.faces[-1][0].kind is FaceKind.FINF
    assert classify_regime(c, p).name == "Lipschitz"


def test_non_sane_product_is_unsupported():
    z = np.zeros((2, 6))
    z[0, 2] = 1.0
    z[1, 4] = 1.0
    p = FeasibilityProblem.orthogonal_to(z, m=2)
    c = build_chain(p)
    assert not c.sane
    r = classify_regime(c, p)
    assert r.name == "Unsupported" and not r.supported
    with pytest.raises(ValueError):
        regime_bound(r)


def test_check_chain_rejects_bad_certificate():
    p = example_problem("entropic")
    bad = FacialReductionChain([FULL, (FD.fneginf(),)], [np.array([0.0, 0.0, 1.0])], 1, True)
    with pytest.raises(ValueError):
        check_chain(p, bad)
    c = build_chain(p)
    c.sane = False
    with pytest.raises(ValueError):
        check_chain(p, c)


def test_chain_json():
    d = build_chain(example_problem("product3")).to_dict()
    assert json.loads(json.dumps(d))["d_pps"] == 2


def test_distance_examples():
    p = example_problem("entropic")
    c = build_chain(p)
    assert distance_to_intersection([-1, 0, 2], p, c) == 0.0
    for k in (10, 1e3, 1e6):
        w = tightness_sequence(SequenceKind.entropic(), k).w
        assert distance_to_intersection(w, p, c) == pytest.approx(math.log(k) / k, rel=1e-12)
    p = example_problem("log")
    c = build_chain(p)
    for k in (5, 50):
        assert distance_to_intersection([-1, 1 / k, 0], p, c) == pytest.approx(1 / k, rel=1e-12)


@pytest.mark.parametrize("name", ["entropic", "beta", "log", "product", "product3"])
def test_oracles_agree(name, rng):
    p = example_problem(name)
    c = build_chain(p)
    X = rng.standard_normal((40, p.dim))
    closed = distances_to_intersection(X, p, c, method="closed")
    reduced = distances_to_intersection(X, p, c, tol=1e-12, method="reduced")
    np.testing.assert_allclose(closed, reduced, atol=10 * 1e-10)


def test_raw_oracle_on_slater_problem(rng):
    p = example_problem("slater")
    X = rng.standard_normal((10, 3))
    d = distances_to_intersection(X, p, method="raw")
    np.testing.assert_allclose(d, np.linalg.norm(X - [0, 1, 2], axis=1), atol=1e-9)


def test_oracle_divergence_on_infeasible():
    strong = FeasibilityProblem(1, np.zeros((0, 3)), [0, -1, 0])
    with pytest.raises(OracleDivergence):
        distances_to_intersection(np.zeros((1, 3)), strong, method="raw")
    weak = FeasibilityProblem(1, [[1, 0, 0]], [0, 1, 0])
    with pytest.raises(OracleDivergence):
        distances_to_intersection(np.zeros((1, 3)), weak, method="raw", cap=500)


def test_assemble_examples():
    p = example_problem("slater")
    b = assemble_bound(build_chain(p), [], 2.0)
    assert b(0.3) == 0.3
    c2 = build_chain(example_problem("beta"))
    sq = GApply(G.power(0.5), Eps())
    b = assemble_bound(c2, [sq], 2.0)
    assert b(0.08) == pytest.approx(0.08 + math.sqrt(0.08), rel=1e-15)
    with pytest.raises(ValueError):
        assemble_bound(c2, [], 2.0)
    c3 = build_chain(example_problem("product3"))
    b = assemble_bound(c3, step_frfs(example_problem("product3"), c3), 2.0)
    ent = G.entropy()
    e = 1e-4
    assert eval_frf(b.dominating, e) == pytest.approx(math.sqrt(ent(math.sqrt(ent(e)))), rel=1e-14)


@pytest.mark.parametrize("name", ["entropic", "beta", "log", "slater", "product", "product3"])
def test_verify_regime_bound(name):
    p = example_problem(name)
    c = build_chain(p)
    r = classify_regime(c, p)
    rep = verify_bound(p, c, regime_bound(r), samples=2000)
    assert rep.max_violation <= 0 and math.isfinite(rep.kappa_fit) and rep.kappa_fit > 0
    if p.m == 1 and c.d_pps:
        assert rep.tight
    rep2 = verify_bound(p, c, assemble_bound(c, step_frfs(p, c), 2.0), samples=2000)
    assert rep2.max_violation <= 0 and math.isfinite(rep2.kappa_fit)


def test_verify_is_deterministic():
    p = example_problem("product")
    c = build_chain(p)
    b = regime_bound(classify_regime(c, p))
    assert verify_bound(p, c, b, samples=500, seed=3) == verify_bound(p, c, b, samples=500, seed=3)


def test_wrong_lipschitz_trial_diverges():
    p = example_problem("entropic")
    c = build_chain(p)
    k = [verify_bound(p, c, Eps(), samples=n, regime=Regime("Lipschitz")).kappa_fit for n in (1000, 2000, 4000)]
    assert k[0] < k[1] < k[2] and k[2] > 10 * k[0]
    ok = [verify_bound(p, c, regime_bound(Regime("Entropic")), samples=n).kappa_fit for n in (1000, 2000, 4000)]
    assert max(ok) < 1.5 * min(ok)
