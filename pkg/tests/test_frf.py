import math

import numpy as np
import pytest

from expcone.faces import FaceDescriptor as FD, canonical_exposing
from expcone.frf import (
    Coefficient,
    Const,
    Diamond,
    Eps,
    GApply,
    Prod,
    check_frf,
    diamond_chain,
    eval_frf,
    frf_for_exposed,
    frf_from_json,
    frf_nonexposed,
    frf_to_json,
    lift_frf,
    polyhedral_frf,
    product_frf,
    rescale,
)
from expcone.gfun import E2, GFunction as G

SQRT = GApply(G.power(0.5), Eps())
ENT = GApply(G.entropy(), Eps())
EG = np.linspace(0, 10, 100)
TG = np.linspace(0, 100, 100)


def test_eval_basics():
    assert eval_frf(Eps(), 3.0, 100.0) == 3.0
    assert eval_frf(Diamond(Eps(), Eps()), 2.5, 7.0) == 5.0
    e = 0.3
    assert eval_frf(Diamond(SQRT, SQRT), e, 1.0) == pytest.approx(math.sqrt(e + math.sqrt(e)), rel=1e-15)
    with pytest.raises(ValueError):
        eval_frf(Eps(), -1.0)


def test_exposed_examples():
    z = canonical_exposing(FD.fbeta(1.0))
    z = z * math.sqrt(3) / np.linalg.norm(z)
    psi = frf_for_exposed(FD.fbeta(1.0), z)
    assert psi(1.0, 0.0) == pytest.approx(1 + math.sqrt(2), rel=1e-14)
    psi = frf_for_exposed(FD.finf(), [0, 1, 1])
    assert psi(1.0, 5.0) == pytest.approx(3.0, rel=1e-14)
    for face, z in ((FD.fneginf(), [0, 1, 0]), (FD.finf(), [0, 0, 1]), (FD.finf(), [0, 1, 1])):
        assert frf_for_exposed(face, z)(0.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        frf_for_exposed(FD.fneginf(), [0, 1, 1])


def test_log_face_uses_log_function():
    psi = frf_for_exposed(FD.finf(), [0, 0, 1])
    e = 1e-3
    assert psi(e) == pytest.approx(e + (-1 / math.log(2 * e)), rel=1e-12)


def test_nonexposed_examples():
    z = [-1, 0, 0]
    assert frf_nonexposed(z, g=G.power(0.5))(4.0) == 6.0
    assert frf_nonexposed(z)(0.0, 9.0) == 0.0
    assert frf_nonexposed(z, sigma=2.0)(E2) == pytest.approx(6 * E2, rel=1e-14)
    with pytest.raises(ValueError):
        frf_nonexposed([0, 0, 1])
    with pytest.raises(ValueError):
        frf_nonexposed(z, g=G.power(1.0))


def test_rescale_examples():
    psi = frf_nonexposed([-1, 0, 0], sigma=Coefficient.power(1.0, 0.5))
    assert np.array_equal(rescale(psi, 1, 1, 1)(EG[:, None], TG), psi(EG[:, None], TG))
    assert rescale(Eps(), 2, 1, 3)(1.5) == 9.0
    assert rescale(SQRT, 4, 1, 1)(2.0) == pytest.approx(2 * math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError):
        rescale(Eps(), 0, 1, 1)


def test_rescale_composition():
    psi = frf_nonexposed([-1, 0, 0], sigma=Coefficient.power(1.0, 0.5))
    a, b, c, d, e, f = 2.0, 0.5, 3.0, 0.25, 4.0, 1.5
    lhs = rescale(rescale(psi, a, b, c), d, e, f)(EG[:, None], TG)
    rhs = rescale(psi, a * d, b * e, c * f)(EG[:, None], TG)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=0)


def test_diamond_chain_examples():
    assert diamond_chain([Eps()]) == Eps()
    assert diamond_chain([SQRT, Eps()])(0.7) == pytest.approx(math.sqrt(1.4), rel=1e-15)
    assert diamond_chain([ENT, ENT])(E2, 4.0) == pytest.approx(4 * E2, rel=1e-14)
    with pytest.raises(ValueError):
        diamond_chain([])


def test_diamond_not_associative():
    p3, p2, p1 = SQRT, rescale(Eps(), 1, 1, 2), Prod((Eps(), Eps()))
    right = diamond_chain([p3, p2, p1])
    assert right == Diamond(p3, Diamond(p2, p1))
    left = Diamond(Diamond(p3, p2), p1)
    e = np.linspace(0.1, 3, 30)
    assert np.allclose(right(e), np.sqrt(3 * e + 2 * e**2))
    assert np.allclose(left(e), np.sqrt(3 * (e + e**2)))
    assert np.max(np.abs(left(e) - right(e))) > 0.1


def test_product_examples():
    one = product_frf([SQRT], G.identity())
    assert one(0.3, 1.0) == pytest.approx(math.sqrt(0.6), rel=1e-15)
    assert product_frf([Eps(), Eps()], G.identity())(1.25) == 5.0
    val = product_frf([SQRT, SQRT], G.power(0.5))(1 / 16)
    assert val == pytest.approx(2 * (1 / 8) ** 0.25, rel=1e-14)


def test_lift_examples():
    assert lift_frf(Const(0.0), G.entropy())(0.4, 2.0) == 0.4
    assert lift_frf(Eps(), G.identity())(0.5) == 1.5
    kappa, g = 2.5, G.power(0.5)
    psi = lift_frf(polyhedral_frf(kappa), g, sigma=Coefficient.power(1.0, 1.0))
    e, t = 0.01, 3.0
    assert psi(e, t) == pytest.approx(e + kappa * t * max(e, math.sqrt(2 * e)), rel=1e-14)


def _constructed():
    kap = Coefficient.table([1, 10, 100], [1, 2, 5])
    z_beta = canonical_exposing(FD.fbeta(-1.0))
    out = [
        frf_for_exposed(FD.fbeta(-1.0), z_beta, kappa=kap),
        frf_for_exposed(FD.fneginf(), [0, 2, 0], kappa=kap),
        frf_for_exposed(FD.fneginf(), [0, 1, 0], g=G.power(0.3)),
        frf_for_exposed(FD.finf(), [0, 1, 1], kappa=kap),
        frf_for_exposed(FD.finf(), [0, 0, 1]),
        frf_nonexposed([-1, 0, 0], sigma=kap),
        polyhedral_frf(kap),
    ]
    out += [
        rescale(out[0], 2, 3, 0.5),
        diamond_chain(out[:3]),
        product_frf(out[1:3], G.entropy(), sigma=kap),
        lift_frf(out[5], G.entropy(), sigma=kap),
    ]
    return out


@pytest.mark.parametrize("i", range(11))
def test_constructed_frfs_pass_grid_check(i):
    assert check_frf(_constructed()[i], EG, TG) == (True, True)


def test_check_frf_rejects_bad_expression():
    assert check_frf(Const(1.0))[0] is False


def test_json_round_trip():
    for psi in _constructed():
        back = frf_from_json(frf_to_json(psi))
        assert back == psi
        np.testing.assert_array_equal(back(EG[:, None], TG), psi(EG[:, None], TG))
    with pytest.raises(ValueError):
        frf_from_json('{"node": "Nope"}')


def test_coefficient_table_ceiling_rule():
    c = Coefficient.table([1, 2, 4], [1, 3, 2])
    assert c.values == (1.0, 3.0, 3.0)
    np.testing.assert_array_equal(c(np.array([0.0, 1.0, 1.5, 2.0, 9.0])), [1, 1, 3, 3, 3])
    with pytest.raises(ValueError):
        Coefficient.table([2, 1], [1, 2])
