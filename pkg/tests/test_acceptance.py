"""Acceptance criteria 1-10, one test each.

Every test records a ``criterion N: PASS|FAIL ...`` line; the lines are printed
in the pytest terminal summary and by ``python tests/test_acceptance.py``.
"""
import time

import pytest

from qfactor import cli, factor, lops, qops, reps
from qfactor.qnum import QParams

RESULTS: dict[int, str] = {}
MU = 0.7321


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


def worst(reports) -> float:
    return max(r.residual for r in reports)


def test_criterion_01_relations():
    t0 = time.perf_counter()
    out = cli.suite_relations(cli.SuiteConfig(suite="relations"))
    dt = time.perf_counter() - t0
    grid = {(r.params["q"], r.params.get("mu")) for r in out if "mu" in r.params}
    covered = all((complex(q), mu) in grid for q in (1.2, 1.3) for mu in (0.3, 0.7321))
    kinds = {r.name.split(":")[0] for r in out}
    need = {"relations[osc]", "relations[sl2]", "relations[casimir]", "relations[borel]"}
    serre = sum(any(k.startswith("serre") for k in r.notes["per_relation"]) for r in out)
    w = worst(out)
    record(1, w < 1e-12 and dt < 5 and covered and need <= kinds and serre >= 8,
           f"{len(out)} relation checks, worst residual {w:.2e} (< 1e-12), {dt:.2f} s (< 5 s)")


def test_criterion_02_contraction():
    p = QParams(1.3)
    rs = [reps.contraction_limit_check([10, 20, 30], 6, p, kind=k) for k in (1, 2)]
    seqs = [r.notes["residuals"] for r in rs]
    mono = all(s[0] > s[1] > s[2] for s in seqs)
    final = max(s[-1] for s in seqs)
    record(2, mono and final < 1e-6,
           f"residuals osc1 {['%.1e' % v for v in seqs[0]]}, osc2 {['%.1e' % v for v in seqs[1]]}, "
           f"strictly decreasing={mono}, final {final:.2e} (< 1e-6)")


def test_criterion_03_qdet_and_phi():
    p = QParams(1.3)
    qd = [lops.qdet_check(reps.verma_rep(mu, 20, p), 0.5) for mu in (0.3, MU)]
    ph = []
    for q in (1.2, 1.3):
        for mu in (0.3, MU):
            for x in (0.1, 0.3):
                ph += [lops.phi_qdet_check(mu, x, QParams(q)), lops.phi_factor_check(mu, x, QParams(q))]
    a, b = worst(qd), worst(ph)
    record(3, a < 1e-10 and b < 1e-10, f"qdet worst {a:.2e}, phi relations worst {b:.2e} (< 1e-10)")


def test_criterion_04_rll():
    p = QParams(1.3)
    fund = lops.rll_check(reps.fund_rep(p, "A"), 0.7, 0.3, tol=1e-12)
    aux = [lops.rll_check(a, 0.7, 0.3, ordering=o)
           for a in (reps.osc_rep(1, 20, p), reps.osc_rep(2, 20, p), reps.verma_rep(MU, 20, p))
           for o in ("rll", "llr")]
    w = worst(aux)
    record(4, fund.residual < 1e-12 and w < 1e-10,
           f"fundamental YBE {fund.residual:.2e} (< 1e-12), oscillator/Verma RLL worst {w:.2e} (< 1e-10)")


def test_criterion_05_O():
    p = QParams(1.3)
    cols = factor.o_column_check(16, p)
    inv = [factor.o_inverse_check(16, p, order=o) for o in ("12", "21")]
    w = worst(inv)
    record(5, cols.residual < 1e-13 and w < 1e-13,
           f"column formula {cols.residual:.2e}, block inverse {w:.2e} (< 1e-13)")


def test_criterion_06_intertwiners():
    p = QParams(1.3)
    out = []
    for v in ("Bplus", "Bminus", "opposite"):
        out += factor.intertwiner_check(v, MU, 0.4, 16, p)
    gens = {r.name for r in out}
    need = {f"intertwiner[Bplus]:{g}" for g in ("e0", "e1", "h0", "h1")}
    need |= {"intertwiner[Bminus]:f0", "intertwiner[Bminus]:f1"}
    w = worst(out)
    record(6, w < 1e-11 and need <= gens, f"{len(out)} generator checks, worst {w:.2e} (< 1e-11)")


def test_criterion_07_corollary():
    p = QParams(1.3)
    main = [factor.corollary_check(mu, 0.4, 12, p) for mu in (0.0, MU)]
    stab = [factor.corollary_stability_check(mu, 0.4, 12, p) for mu in (0.0, MU)]
    a, b = worst(main), worst(stab)
    record(7, a < 1e-10 and b < 1e-13, f"residual {a:.2e} (< 1e-10), D=12 vs 24 change {b:.2e} (< 1e-13)")


def test_criterion_08_hadamard():
    p = QParams(0.6)
    ids, trips = [], []
    for a in (0.0, 0.37, 1.0):
        ids += [factor.hadamard_check(i, a, 14, p) for i in factor.HADAMARD_IDS]
        trips += [factor.hadamard_roundtrip_check(g, a, 14, p) for g in factor.ROUNDTRIP_GENS]
    a, b = worst(ids), worst(trips)
    record(8, a < 1e-9 and b < 1e-9,
           f"{len(ids)} identity checks worst {a:.2e}, forward/inverse round trips worst {b:.2e} (< 1e-9)")


def test_criterion_09_theorem2():
    t0 = time.perf_counter()
    parts = {"theorem2": [], "stability": [], "character": [], "Q(0)": [], "commutators": []}
    for N in (1, 2):
        spec = qops.ChainSpec(N, 1.25, 0.2, N + 2, D=40)
        for k in ("T", "Q1", "Q2"):
            qops.trace_probe(k, spec, MU)
        parts["theorem2"].append(qops.theorem2_check(MU, spec))
        parts["stability"].append(qops.cutoff_stability_check(MU, spec))
        parts["character"].append(qops.character_check(MU, spec))
        parts["Q(0)"] += [qops.q_zero_check(i, spec) for i in (1, 2)]
        parts["commutators"].append(qops.commutator_check(MU, spec))
    dt = time.perf_counter() - t0
    lim = {"theorem2": 1e-8, "stability": 1e-9, "character": 1e-10, "Q(0)": 1e-8, "commutators": 1e-8}
    w = {k: worst(v) for k, v in parts.items()}
    ok = all(w[k] < lim[k] for k in lim) and dt < 60
    record(9, ok, ", ".join(f"{k} {w[k]:.1e}" for k in lim) + f", {dt:.1f} s (< 60 s)")


def test_criterion_10_cli(check_all, tmp_path, capsys):
    broken = cli.main(["check", "relations", "--tol", "1e-20", "--out", str(tmp_path / "b")])
    domain = cli.main(["check", "hadamard", "--q", "1.3", "--out", str(tmp_path / "h")])
    err = capsys.readouterr().err
    ok = check_all["code"] == 0 and broken == 1 and domain == 2 and "convergence domain" in err
    record(10, ok, f"check all -> {check_all['code']} ({len(check_all['reports'])} records, "
                   f"{check_all['elapsed']:.0f} s), --tol 1e-20 -> {broken}, hadamard --q 1.3 -> {domain}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
