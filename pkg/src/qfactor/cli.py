"""Command-line driver.

    qfactor check <suite> [--q Q] [--mu MU] ... [--out DIR]
    qfactor dump {T,Q1,Q2,L,O} --out FILE [...]

Exit codes: 0 all checks pass, 1 some check fails, 2 configuration or
convergence error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable

from . import factor, lops, qops, reps
from .qnum import DegenerateBase, QParams, SeriesDivergence
from .report import CheckReport, write_report
from .tensor import Operator

SUITES = ("relations", "contraction", "qdet", "rll", "phi", "intertwiners", "corollary", "hadamard", "qops")
DUMPABLE = ("T", "Q1", "Q2", "L", "O")

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    """Every field left as ``None`` falls back to the per-suite default."""

    suite: str = "all"
    q: float | None = None        # relations: {1.2, 1.3}; hadamard: 0.6; qops: 1.25; others: 1.3
    mu: float | None = None       # 0.7321 (relations also 0.3; corollary also 0)
    x: float | None = None        # qdet 0.5, phi 0.3, rll 0.7, intertwiners/corollary 0.4, qops 0.2
    y: float | None = None        # rll 0.3
    phi: float | None = None      # qops: N + 2
    N: int | None = None          # qops: both 1 and 2
    D: int | None = None          # relations/qdet/rll 20, contraction 6, intertwiners 16, corollary 12,
                                  # hadamard 14, qops 40
    tol: float | None = None      # overrides every check tolerance when set
    alpha: tuple = (0.0, 0.37, 1.0)
    seed: int = 0
    output_dir: str = "qfactor-out"
    dump: bool = False

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ConfigError(f"suite: unknown suite {self.suite!r} (choose from {', '.join(SUITES)}, all)")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError(f"tol: must be positive, got {self.tol}")
        if self.q is not None and self.q == 0:
            raise ConfigError("q: must be nonzero")
        if self.D is not None and self.D < 2:
            raise ConfigError(f"D: must be >= 2, got {self.D}")
        if self.N is not None and not 1 <= self.N <= qops.MAX_SITES:
            raise ConfigError(f"N: must be in 1..{qops.MAX_SITES}, got {self.N}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "SuiteConfig":
        """JSON object, or ``key=value`` lines whose values are parsed as JSON
        scalars/lists when possible and kept as strings otherwise."""
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            raw = _key_values(text, path)
        if not isinstance(raw, dict):
            raise ConfigError(f"config: {path} must hold an object or key=value lines")
        known = {f.name for f in fields(cls)}
        bad = sorted(set(raw) - known)
        if bad:
            raise ConfigError(f"config: unknown field(s) {bad}")
        if "alpha" in raw:
            raw["alpha"] = tuple(raw["alpha"])
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    def pick(self, name: str, default):
        v = getattr(self, name)
        return default if v is None else v


def _key_values(text: str, path) -> dict:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise ConfigError(f"config: {path}:{i}: expected key=value, got {line!r}")
        v = v.strip()
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


# --- suites --------------------------------------------------------------------

def _qp(cfg: SuiteConfig, default: float) -> QParams:
    return QParams(cfg.pick("q", default))


def _need_D(cfg: SuiteConfig, default: int, minimum: int) -> int:
    D = cfg.pick("D", default)
    if D < minimum:
        raise ConfigError(f"D: suite {cfg.suite!r} needs D >= {minimum}, got {D}")
    return D


def suite_relations(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 20, 6)
    qs = [cfg.q] if cfg.q is not None else [1.2, 1.3]
    mus = [cfg.mu] if cfg.mu is not None else [0.3, 0.7321]
    rng = random.Random(cfg.seed)
    points = [(q, mu) for q in qs for mu in mus]
    if cfg.q is None and cfg.mu is None:
        points.append((round(rng.uniform(1.1, 1.4), 6), round(rng.uniform(0.2, 0.9), 6)))
    out = []
    x = cfg.pick("x", 0.5)
    for q, mu in points:
        p = QParams(q)
        tag = f"@q={q:g},mu={mu:g}"
        o1, o2 = reps.osc_rep(1, D, p), reps.osc_rep(2, D, p)
        v = reps.verma_rep(mu, D, p)
        out += [reps.relations_check(o1, "osc", name=f"relations[osc]:osc1{tag}"),
                reps.relations_check(o2, "osc", name=f"relations[osc]:osc2{tag}"),
                reps.relations_check(v, "sl2", name=f"relations[sl2]:verma{tag}"),
                reps.relations_check(v, "casimir", name=f"relations[casimir]:verma{tag}")]
        for c, tilde in ((o1, False), (o2, False), (o1, True), (o2, True)):
            s = reps.sl2_from_osc(c, mu, tilde)
            out.append(reps.relations_check(s, "sl2", name=f"relations[sl2]:{s.name}{tag}"))
        out.append(reps.relations_check(reps.borel_map(reps.BorelMapSpec(reps.MapId.EV_X, x, mu), v),
                                        "affine", name=f"relations[affine]:ev_x{tag}"))
        for mid in reps.MapId:
            if mid is reps.MapId.EV_X:
                continue
            spec = reps.BorelMapSpec(mid, x, mu)
            r = reps.borel_map(spec, o1 if spec.osc_kind == 1 else o2)
            out.append(reps.relations_check(r, "borel", name=f"relations[borel]:{mid.value}{tag}"))
    p = QParams(qs[-1])
    out.append(reps.relations_check(reps.fund_rep(p), "sl2", name="relations[sl2]:fundamental"))
    out.append(reps.relations_check(reps.findim_rep(3, p), "sl2", name="relations[sl2]:findim3"))
    return _retol(out, cfg, 1e-12)


def suite_contraction(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 6, 3)
    p = _qp(cfg, 1.3)
    if not (p.q.imag == 0 and p.q.real > 1):
        raise ConfigError("q: contraction suite needs real q > 1")
    return _retol([reps.contraction_limit_check([10, 20, 30], D, p, kind=k) for k in (1, 2)], cfg, 1e-6)


def suite_qdet(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 20, 6)
    p = _qp(cfg, 1.3)
    x = cfg.pick("x", 0.5)
    mus = [cfg.mu] if cfg.mu is not None else [0.3, 0.7321]
    carriers = [reps.verma_rep(mu, D, p) for mu in mus] + [reps.fund_rep(p), reps.findim_rep(3, p)]
    out = []
    for c in carriers:
        r = lops.qdet_check(c, x)
        if "mu" in c.params:
            r.name += f"@mu={c.params['mu']:g}"
        out.append(r)
    return _retol(out, cfg, 1e-10)


def suite_phi(cfg: SuiteConfig) -> list[CheckReport]:
    qs = [cfg.q] if cfg.q is not None else [1.2, 1.3]
    mus = [cfg.mu] if cfg.mu is not None else [0.3, 0.7321]
    x = cfg.pick("x", 0.3)
    out = []
    for q in qs:
        p = QParams(q)
        for mu in mus:
            for r in (lops.phi_qdet_check(mu, x, p), lops.phi_factor_check(mu, x, p)):
                r.name += f"@q={q:g},mu={mu:g}"
                out.append(r)
    return _retol(out, cfg, 1e-10)


def suite_rll(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 20, 6)
    p = _qp(cfg, 1.3)
    x, y, mu = cfg.pick("x", 0.7), cfg.pick("y", 0.3), cfg.pick("mu", 0.7321)
    out = [lops.rll_check(reps.fund_rep(p, "A"), x, y, tol=1e-12)]
    for aux in (reps.osc_rep(1, D, p), reps.osc_rep(2, D, p), reps.verma_rep(mu, D, p)):
        for ordering in ("rll", "llr"):
            out.append(lops.rll_check(aux, x, y, ordering=ordering))
    return _retol(out, cfg, None)


def suite_intertwiners(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 16, 4)
    p = _qp(cfg, 1.3)
    mu, x = cfg.pick("mu", 0.7321), cfg.pick("x", 0.4)
    out = [factor.o_column_check(D, p), factor.o_inverse_check(D, p), factor.o_inverse_check(D, p, order="21")]
    for variant in ("Bplus", "Bminus", "opposite"):
        out += factor.intertwiner_check(variant, mu, x, D, p)
    return _retol(out, cfg, None)


def suite_corollary(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 12, 8)
    p = _qp(cfg, 1.3)
    x = cfg.pick("x", 0.4)
    mus = [cfg.mu] if cfg.mu is not None else [0.0, 0.7321]
    out = []
    for mu in mus:
        out += [factor.corollary_check(mu, x, D, p), factor.corollary_stability_check(mu, x, D, p)]
    return _retol(out, cfg, None)


def suite_hadamard(cfg: SuiteConfig) -> list[CheckReport]:
    D = _need_D(cfg, 14, 4)
    p = _qp(cfg, 0.6)
    if not abs(p.q) < 1:
        raise factor.ConvergenceDomain(f"convergence domain: hadamard suite needs |q| < 1, got q={cfg.q}")
    out = []
    for a in cfg.alpha:
        out += [factor.hadamard_check(i, a, D, p) for i in factor.HADAMARD_IDS]
        out += [factor.hadamard_roundtrip_check(g, a, D, p) for g in factor.ROUNDTRIP_GENS]
    return _retol(out, cfg, None)


def _chain_specs(cfg: SuiteConfig) -> list[qops.ChainSpec]:
    D = _need_D(cfg, 40, 4)
    q, x = cfg.pick("q", 1.25), cfg.pick("x", 0.2)
    Ns = [cfg.N] if cfg.N is not None else [1, 2]
    return [qops.ChainSpec(N, q, x, cfg.pick("phi", N + 2), D) for N in Ns]


def suite_qops(cfg: SuiteConfig) -> list[CheckReport]:
    mu = cfg.pick("mu", 0.7321)
    out = []
    for spec in _chain_specs(cfg):
        # convergence is certified before any trace is reported
        out += [qops.trace_probe("T", spec, mu), qops.trace_probe("Q1", spec), qops.trace_probe("Q2", spec)]
        out += [qops.theorem2_check(mu, spec), qops.cutoff_stability_check(mu, spec),
                qops.character_check(mu, spec), qops.q_zero_check(1, spec), qops.q_zero_check(2, spec),
                qops.commutator_check(mu, spec), qops.weight_check(mu, spec)]
        if cfg.dump:
            out_dir = Path(cfg.output_dir)
            for obj in ("T", "Q1", "Q2"):
                op = _dump_object(obj, cfg, spec)
                qops.dump_operator(op, out_dir / f"{obj}_N{spec.N}.qlop", _dump_meta(obj, cfg, spec))
    return _retol(out, cfg, None)


SUITE_FUNCS: dict[str, Callable[[SuiteConfig], list[CheckReport]]] = {
    "relations": suite_relations, "contraction": suite_contraction, "qdet": suite_qdet, "phi": suite_phi,
    "rll": suite_rll, "intertwiners": suite_intertwiners, "corollary": suite_corollary,
    "hadamard": suite_hadamard, "qops": suite_qops,
}


def _retol(reports: list[CheckReport], cfg: SuiteConfig, default: float | None) -> list[CheckReport]:
    """Apply ``--tol`` (or a suite-wide default) on top of each check's own tolerance."""
    tol = cfg.tol if cfg.tol is not None else default
    if tol is not None:
        for r in reports:
            r.tolerance = tol
    return reports


# --- run ---------------------------------------------------------------------

ERRORS = (ConfigError, factor.ConvergenceDomain, qops.DivergentTrace, DegenerateBase,
          SeriesDivergence, ValueError)


def run(cfg: SuiteConfig) -> tuple[int, list[CheckReport], Path | None]:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    out_dir = Path(cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir: cannot create {out_dir}: {exc}") from exc
    reports: list[CheckReport] = []
    for n in names:
        reports += SUITE_FUNCS[n](replace(cfg, suite=n))
    path = write_report(reports, out_dir / "report.json", asdict(cfg))
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    return code, reports, path


# --- dump --------------------------------------------------------------------

def _dump_meta(obj: str, cfg: SuiteConfig, spec: qops.ChainSpec | None = None) -> dict:
    meta = {"object": obj, "q": cfg.q, "mu": cfg.mu, "x": cfg.x, "D": cfg.D}
    if spec is not None:
        meta.update(q=spec.q, x=spec.x, D=spec.D, N=spec.N, phi=spec.phi)
    return {k: v for k, v in meta.items() if v is not None}


def _dump_object(obj: str, cfg: SuiteConfig, spec: qops.ChainSpec | None = None) -> Operator:
    mu = cfg.pick("mu", 0.7321)
    if obj in ("T", "Q1", "Q2"):
        spec = spec or _chain_specs(cfg)[-1]
        if obj == "T":
            return qops.t_operator(mu, spec)
        return qops.q_operator(int(obj[1]), spec)
    p = _qp(cfg, 1.3)
    if obj == "L":
        return lops.build_L(reps.verma_rep(mu, cfg.pick("D", 8), p), cfg.pick("x", 0.4)).op
    if obj == "O":
        D = cfg.pick("D", 4)
        return factor.build_O(D, D, p).op
    raise ConfigError(f"object: unknown object {obj!r} (choose from {', '.join(DUMPABLE)})")


def dump(obj: str, cfg: SuiteConfig, path: str | Path) -> tuple[Path, Path]:
    spec = _chain_specs(cfg)[-1] if obj in ("T", "Q1", "Q2") else None
    op = _dump_object(obj, cfg, spec)
    path = Path(path)
    if not path.parent.is_dir():
        raise ConfigError(f"out: directory {path.parent} does not exist")
    if spec is not None:
        cfg_eff = cfg
    elif obj == "O":
        cfg_eff = replace(cfg, q=cfg.pick("q", 1.3), D=cfg.pick("D", 4), mu=None, x=None)
    else:
        cfg_eff = replace(cfg, q=cfg.pick("q", 1.3), D=cfg.pick("D", 8), mu=cfg.pick("mu", 0.7321),
                          x=cfg.pick("x", 0.4))
    return qops.dump_operator(op, path, _dump_meta(obj, cfg_eff, spec))


# --- argument parsing ----------------------------------------------------------

def _common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--q", type=float)
    ap.add_argument("--mu", type=float)
    ap.add_argument("--x", type=float)
    ap.add_argument("--y", type=float)
    ap.add_argument("--phi", type=float)
    ap.add_argument("--sites", type=int, dest="N")
    ap.add_argument("--cutoff", type=int, dest="D")
    ap.add_argument("--config", help="JSON or key=value file with SuiteConfig fields; flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfactor", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="run verification suites")
    chk.add_argument("suite_pos", nargs="?", metavar="suite")
    chk.add_argument("--suite")
    _common(chk)
    chk.add_argument("--tol", type=float)
    chk.add_argument("--seed", type=int)
    chk.add_argument("--out", dest="output_dir")
    chk.add_argument("--dump", action="store_true", help="also dump T/Q matrices of the qops suite")
    dmp = sub.add_parser("dump", help="write one operator in the binary dump format")
    dmp.add_argument("object", choices=DUMPABLE)
    dmp.add_argument("--out", required=True)
    _common(dmp)
    return ap


def _config(ns: argparse.Namespace) -> SuiteConfig:
    keys = ("q", "mu", "x", "y", "phi", "N", "D", "tol", "seed", "output_dir")
    over = {k: getattr(ns, k, None) for k in keys}
    if ns.command == "check":
        if ns.suite and ns.suite_pos and ns.suite != ns.suite_pos:
            raise ConfigError(f"suite: conflicting values {ns.suite_pos!r} and {ns.suite!r}")
        over["suite"] = ns.suite or ns.suite_pos
        over["dump"] = ns.dump or None
    if ns.config:
        return SuiteConfig.from_file(ns.config, **over)
    return SuiteConfig(**{k: v for k, v in over.items() if v is not None})


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config(ns)
        if ns.command == "dump":
            bin_path, side = dump(ns.object, cfg, ns.out)
            print(f"wrote {bin_path} and {side}")
            return EXIT_OK
        code, reports, path = run(cfg)
    except ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for r in reports:
        print(r.line())
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports)} checks, {failed} failed; report: {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
