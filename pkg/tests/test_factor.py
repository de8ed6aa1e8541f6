import mpmath
import numpy as np
import pytest

from qfactor.factor import (
    HADAMARD_IDS, ROUNDTRIP_GENS, ConvergenceDomain, _Lattice, build_O, coproduct_image,
    corollary_check, corollary_sides, corollary_stability_check, hadamard_check, hadamard_roundtrip_check,
    hadamard_sides, intertwiner_check, o_column_check, o_inverse_check,
)
from qfactor.qnum import QParams, exp_q_coeffs, nilpotent_power_series
from qfactor.reps import BorelMapSpec, MapId, borel_map, osc_rep, q_cartan, sl2_from_osc
from qfactor.tensor import embed, residual

Q06 = QParams(0.6)


def col(O, D, n, m):
    """Column v_n (x) v_m of O as a dict (n', m') -> value."""
    c = O.op.data[:, n * D + m]
    return {(i // D, i % D): c[i] for i in np.flatnonzero(np.abs(c) > 1e-15)}


def test_O_low_columns():
    D = 4
    O = build_O(D, D, QParams(2))
    assert col(O, D, 0, 0) == {(0, 0): 1}
    assert col(O, D, 1, 0) == pytest.approx({(1, 0): 1, (0, 1): 1})
    assert col(O, D, 2, 0) == pytest.approx({(2, 0): 1, (1, 1): 1.25, (0, 2): 1})


def test_O_nilpotent_example_at_D4(p13):
    # exp_{q^-2}(lam e1 f2) on W1(4) (x) W2(4): column (1, 0) is v1 v0 + v0 v1
    w1, w2 = osc_rep(1, 4, p13), osc_rep(2, 4, p13)
    legs = (w1.space, w2.space)
    N = p13.lam * (embed(w1["e"], legs) @ embed(w2["f"], legs))
    O = nilpotent_power_series(exp_q_coeffs(5, 1.3**-2), N)
    assert np.allclose(O.data[:, 4], np.eye(16)[:, 4] + np.eye(16)[:, 1])


@pytest.mark.parametrize("q", [1.3, 2.0, 0.6])
def test_O_block_diagonal(q):
    D = 7
    O = build_O(D, D, QParams(q)).op.data
    n = np.add.outer(np.arange(D), np.arange(D)).ravel()
    assert not O[n[:, None] != n[None, :]].any()


def test_O_columns_closed_form(p13):
    assert o_column_check(16, p13).residual < 1e-13


@pytest.mark.parametrize("order", ["12", "21"])
def test_O_block_inverse(order, p13):
    r = o_inverse_check(16, p13, order=order)
    assert r.residual < 1e-13 and r.notes["route"] == "block"


def test_O_rectangular_cutoffs(p13):
    O = build_O(5, 3, p13)
    assert O.op.dims == (5, 3)
    assert np.abs((O.op @ O.inv).data - np.eye(15)).max() < 1e-13


def test_O_rejects_tiny_cutoff(p13):
    with pytest.raises(ValueError):
        build_O(1, 4, p13)


def test_coproduct_h_primitive(p13):
    w1, w2 = osc_rep(1, 5, p13), osc_rep(2, 5, p13)
    a = borel_map(BorelMapSpec(MapId.RHO1_PLUS, 0.4), w1)
    b = borel_map(BorelMapSpec(MapId.RHO2_PLUS, 0.4), w2)
    legs = (w1.space, w2.space)
    ref = embed(w1["h"], legs) + embed(w2["h"], legs)
    assert np.array_equal(coproduct_image((a, b), "h1").data, ref.data)


def test_coproduct_e_under_ev_pair(p13):
    mu, x = 0.7321, 0.4
    w1, w2 = osc_rep(1, 5, p13), osc_rep(2, 5, p13)
    a = borel_map(BorelMapSpec(MapId.EV1_PLUS, x, mu), w1)
    b = borel_map(BorelMapSpec(MapId.EV2_PLUS, x, mu), w2)
    legs = (w1.space, w2.space)
    E1, H1 = sl2_from_osc(w1, mu)["E"], sl2_from_osc(w1, mu)["H"]
    E2 = sl2_from_osc(w2, mu)["E"]
    ref = x * embed(E1, legs) + embed(q_cartan(p13, -1, H1), legs) @ (x * embed(E2, legs))
    assert np.allclose(coproduct_image((a, b), "e1").data, ref.data, atol=1e-14)
    F1 = sl2_from_osc(w1, mu)["F"]
    assert np.allclose(coproduct_image((a, b), "e0").data, embed(F1, legs).data)
    with pytest.raises(ValueError):
        coproduct_image((a, b), "k0")


def test_intertwiner_h_is_exact(p13):
    reps_ = intertwiner_check("Bplus", 0.7321, 0.4, 16, p13, gens=("h0", "h1"))
    assert all(r.residual < 1e-13 for r in reps_)


@pytest.mark.parametrize("variant", ["Bplus", "Bminus", "opposite"])
def test_intertwiner_variants(variant, p13):
    reps_ = intertwiner_check(variant, 0.7321, 0.4, 16, p13)
    assert reps_ and max(r.residual for r in reps_) < 1e-11


def test_intertwiner_f0_uses_E2(p13):
    (r,) = intertwiner_check("Bminus", 0.7321, 0.4, 12, p13, gens=("f0",))
    assert r.residual < 1e-11


def test_intertwiner_errors(p13):
    with pytest.raises(ValueError, match="unknown intertwiner"):
        intertwiner_check("nope", 0.7, 0.4, 8, p13)
    with pytest.raises(ValueError, match="too small"):
        intertwiner_check("Bplus", 0.7, 0.4, 2, p13)


@pytest.mark.parametrize("mu", [0.0, 0.7321])
def test_corollary(mu, p13):
    assert corollary_check(mu, 0.4, 12, p13).residual < 1e-10


def test_corollary_vacuum_column(p13):
    lhs, rhs = corollary_sides(0.7321, 0.4, 12, p13)
    # (n, m) = (0, 0), quantum up is the first composite column
    assert np.abs(lhs.data[:, 0] - rhs.data[:, 0]).max() < 1e-12


def test_corollary_at_x_zero(p13):
    assert corollary_check(0.7321, 0.0, 10, p13).residual < 1e-12


def test_corollary_stability(p13):
    r = corollary_stability_check(0.7321, 0.4, 12, p13)
    assert r.residual < 1e-13
    assert r.notes["residual_2D"] < 1e-10


def test_corollary_guards(p13):
    with pytest.raises(ValueError, match="D >= 8"):
        corollary_check(0.3, 0.4, 6, p13)
    with pytest.raises(ValueError, match="margin"):
        corollary_check(0.3, 0.4, 10, p13, smax=9)


# --- Hadamard --------------------------------------------------------------

def test_hadamard_outside_disc():
    with pytest.raises(ConvergenceDomain, match="convergence domain"):
        hadamard_check("e2", 0, 6, QParams(1.3))
    with pytest.raises(ConvergenceDomain):
        hadamard_roundtrip_check("e2", 0, 6, QParams(1.3))


def test_hadamard_unknown_id():
    with pytest.raises(ValueError, match="unknown Hadamard"):
        hadamard_check("e7", 0, 6, Q06)
    with pytest.raises(ValueError, match="round trip"):
        hadamard_roundtrip_check("h9", 0, 6, Q06)


def test_hadamard_commuting_generator_is_trivial():
    assert hadamard_check("e1", 0.37, 14, Q06).residual < 1e-25


def test_hadamard_alpha_zero_identity():
    lhs, rhs, _ = hadamard_sides("inv_qh1", 0, 8, Q06)
    assert np.allclose(lhs.data, np.eye(64)) and np.allclose(rhs.data, np.eye(64))


def test_hadamard_total_cartan_commutes():
    assert hadamard_check("qh1+h2", 0.37, 14, Q06).residual < 1e-11


@pytest.mark.parametrize("alpha", [0.0, 0.37, 1.0])
@pytest.mark.parametrize("ident", HADAMARD_IDS)
def test_hadamard_suite(ident, alpha):
    r = hadamard_check(ident, alpha, 14, Q06)
    assert r.residual < 1e-9, r.line()


@pytest.mark.parametrize("gen", ROUNDTRIP_GENS)
def test_hadamard_roundtrip(gen):
    assert hadamard_roundtrip_check(gen, 0.37, 14, Q06).residual < 1e-9


def test_lattice_matches_float_route():
    # at q = 0.9, D = 6 the float conjugation is well conditioned
    p, D = QParams(0.9), 6
    O = build_O(D, D, p)
    w2 = osc_rep(2, D, p)
    legs = O.op.spaces
    flt = O.inv @ embed(w2["e"], legs) @ O.op
    hp, _, _ = hadamard_sides("e2", 0, D, p)
    assert residual(flt, hp) < 1e-13
    with mpmath.workdps(60):
        L = _Lattice(D, p)
        assert residual(L.to_operator(L.O), O.op) < 1e-14
        assert residual(L.to_operator(L.Oinv), O.inv) < 1e-14


def test_qh_notes_record_route_gap():
    r = hadamard_check("qh1", 0.37, 10, Q06)
    assert r.notes["dps"] == 60 and "coeff_route_gap" in r.notes
