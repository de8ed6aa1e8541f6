import numpy as np
import pytest

from qfactor.lops import build_L
from qfactor.qops import (
    MAX_SITES, ChainSpec, DivergentTrace, character_check, commutator_check, convergence_probe,
    cutoff_stability_check, dump_operator, monodromy, q_operator, q_zero_check, t_operator,
    theorem2_check, trace_probe, twist_operators, weight_check,
)
from qfactor.reps import fund_rep
from qfactor.tensor import embed, read_dump, read_sidecar

MU = 0.7321


def spec(N=1, **kw):
    base = dict(q=1.25, x=0.2, phi=N + 2, D=40)
    base.update(kw)
    return ChainSpec(N, **base)


def test_chainspec_validation():
    with pytest.raises(ValueError, match="N must"):
        ChainSpec(0, 1.25, 0.2, 3)
    with pytest.raises(ValueError, match="N must"):
        ChainSpec(MAX_SITES + 1, 1.25, 0.2, 10)
    with pytest.raises(ValueError, match="exceed"):
        ChainSpec(2, 1.25, 0.2, 2)
    with pytest.raises(ValueError, match="D"):
        ChainSpec(1, 1.25, 0.2, 3, D=1)
    assert ChainSpec(2, 1.25, 0.2, 0, allow_undertwist=True).phi == 0
    assert spec(2).with_(phi=5).phi == 5


def test_twist_operators():
    tw = twist_operators(spec(2))
    assert tw.magnetization.tolist() == [2, 0, 0, -2]
    z = tw.z_quantum.diag()
    assert np.allclose(z, 1.25 ** (np.array([1, 0, 0, -1]) + 4))
    assert np.allclose((tw.chi_inv @ tw.chi_inv.inv()).data, np.eye(4))
    assert np.allclose(tw.z_pow(2).diag(), z**2)


def test_monodromy_single_site_is_L():
    s = spec(1)
    aux = fund_rep(s.p, "A")
    site = s.sites[0]
    M = monodromy(aux, 0.3, s)
    assert np.array_equal(M.data, build_L(aux, 0.3, site).op.data)


def test_monodromy_two_sites_is_product():
    s = spec(2)
    aux = fund_rep(s.p, "A")
    legs = (aux.space,) + s.sites
    M = monodromy(aux, 0.3, s)
    ref = embed(build_L(aux, 0.3, s.sites[0]).op, legs) @ embed(build_L(aux, 0.3, s.sites[1]).op, legs)
    assert M.data.shape == (8, 8) and np.array_equal(M.data, ref.data)


def test_t_direct_summation_oracle():
    # N = 1: diagonal of T is a scalar sum over the Verma basis (60 terms)
    q, phi, x = 1.3, 3, 0.3
    s = ChainSpec(1, q, x, phi, D=40)
    T = t_operator(MU, s)
    w = [MU - 2 * n for n in range(60)]
    up = sum(q ** (phi * h) * (q ** (h / 2) - x / q * q ** (-h / 2)) for h in w)
    down = sum(q ** (phi * h) * (q ** (-h / 2) - x / q * q ** (h / 2)) for h in w)
    assert abs(up - 1.8194941595599479) < 1e-12 and abs(down - 1.674500542483254) < 1e-12
    assert np.allclose(np.diag(T.data), [up, down], rtol=0, atol=1e-9)
    assert abs(T.data[0, 1]) == 0 and abs(T.data[1, 0]) == 0


def test_q_cutoff_doubling():
    s = ChainSpec(1, 1.3, 0.3, 3, D=40)
    a, b = q_operator(1, s), q_operator(1, s, D=80)
    assert np.abs(a.data - b.data).max() < 1e-9


def test_character_frozen_values():
    T0 = t_operator(MU, spec(1), x=0)
    assert np.allclose(np.diag(T0.data), [2.2414741920899566, 2.2376570219633325], rtol=1e-12)


@pytest.mark.parametrize("N", [1, 2])
def test_character(N):
    assert character_check(MU, spec(N)).residual < 1e-10


def test_character_independent_of_cutoff():
    s = spec(2)
    assert np.abs(t_operator(MU, s, x=0).data - t_operator(MU, s, x=0, D=80).data).max() < 1e-12


def test_twist_covariance():
    # phi -> phi + 1 multiplies each sector's character by q^{mu} (1 - z^-2)/(1 - q^-2 z^-2)
    s = spec(2)
    a = t_operator(MU, s, x=0).diag()
    b = t_operator(MU, s.with_(phi=s.phi + 1), x=0).diag()
    z = twist_operators(s).z_quantum.diag()
    assert np.allclose(b / a, 1.25**MU * (1 - z**-2) / (1 - z**-2 * 1.25**-2), rtol=1e-12)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("i", [1, 2])
def test_q_at_zero_is_identity(N, i):
    assert q_zero_check(i, spec(N)).residual < 1e-8


@pytest.mark.parametrize("N", [1, 2])
def test_theorem2(N):
    assert theorem2_check(MU, spec(N)).residual < 1e-8


def test_theorem2_mu_zero():
    assert theorem2_check(0.0, spec(2)).residual < 1e-8


def test_theorem2_spec_point():
    assert theorem2_check(MU, ChainSpec(2, 1.25, 0.2, 4, D=40)).residual < 1e-8


def test_theorem2_cutoff_stable():
    assert cutoff_stability_check(MU, spec(2)).residual < 1e-9


@pytest.mark.parametrize("N", [1, 2])
def test_commuting_family(N):
    assert commutator_check(MU, spec(N)).residual < 1e-8


def test_t_at_two_spectral_points_commute():
    s = spec(2)
    a, b = t_operator(MU, s, x=0.2), t_operator(0.3, s, x=0.11)
    assert np.abs((a @ b - b @ a).data).max() < 1e-8


def test_weight_conservation():
    assert weight_check(MU, spec(2)).residual < 1e-12


def test_toy_geometric_probe():
    r = convergence_probe(lambda D: sum(0.5**n for n in range(D)), [10, 20, 40], name="toy")
    S = {D: 2 - 2.0 ** (1 - D) for D in (10, 20, 40)}  # closed-form partial sums
    d1, d2 = (S[20] - S[10]) / (1 + S[20]), (S[40] - S[20]) / (1 + S[40])
    assert r.notes["diffs"] == pytest.approx([d1, d2], rel=1e-12)
    assert r.notes["decay_ratio"] == pytest.approx(d2 / d1, rel=1e-9)
    assert not r.passed  # tail 2^-20 is above 1e-9
    assert convergence_probe(lambda D: sum(0.5**n for n in range(D)), [40, 80, 160]).passed


def test_probe_needs_two_cutoffs():
    with pytest.raises(ValueError):
        convergence_probe(lambda D: 1.0, [10])


@pytest.mark.parametrize("kind", ["T", "Q1", "Q2"])
def test_trace_probes_pass(kind):
    assert trace_probe(kind, spec(2), MU).passed


def test_under_twist_diverges():
    s = ChainSpec(2, 1.25, 0.2, 0, D=20, allow_undertwist=True)
    with pytest.raises(DivergentTrace, match="worst sector m=-2"):
        trace_probe("Q1", s)


def test_trace_probe_kind():
    with pytest.raises(ValueError):
        trace_probe("X", spec(1))


def test_dump_operator(tmp_path):
    Q = q_operator(1, spec(1))
    b, side = dump_operator(Q, tmp_path / "Q1.qlop", {"object": "Q1", "N": 1})
    meta = read_sidecar(side)
    assert meta["leg0.kind"] == "spin_site" and meta["object"] == "Q1"
    back = read_dump(b, kinds=[meta["leg0.kind"]])
    assert np.array_equal(back.data, Q.data)
