"""Trace-built T- and Q-operators on a twisted chain of spin-1/2 sites.

The L-operators of :mod:`qfactor.lops` already carry the Cartan prefactor
``q^{H (x) h / 2}``: at ``x = 0`` the N-site monodromy is ``q^{H m / 2}`` with
``m`` the total magnetisation. Weighting the auxiliary trace by ``q^{phi H}``
therefore yields the sector weight ``z^H`` with ``z = q^{m/2 + phi}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .lops import build_L
from .qnum import QParams, qpow
from .report import CheckReport, timed
from .reps import RepHandle, osc_rep, q_cartan, verma_rep
from .tensor import Kind, Operator, Space, embed, partial_trace_weighted, residual, write_dump, write_sidecar

__all__ = [
    "ChainSpec", "TwistOperators", "DivergentTrace", "twist_operators", "monodromy",
    "t_operator", "q_operator", "theorem2_sides", "theorem2_check", "character_check",
    "q_zero_check", "convergence_probe", "trace_probe", "commutator_check", "weight_check",
    "cutoff_stability_check", "dump_operator", "MAX_SITES",
]

MAX_SITES = 6


class DivergentTrace(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    N: int
    q: float
    x: complex
    phi: float
    D: int = 40
    allow_undertwist: bool = False

    def __post_init__(self):
        if not 1 <= self.N <= MAX_SITES:
            raise ValueError(f"N must be in 1..{MAX_SITES}, got {self.N}")
        if self.D < 2:
            raise ValueError("D must be >= 2")
        if not self.allow_undertwist and not self.phi > self.N:
            raise ValueError(f"phi={self.phi} must exceed N={self.N} (set allow_undertwist to probe anyway)")

    @property
    def p(self) -> QParams:
        return QParams(self.q)

    @property
    def sites(self) -> tuple[Space, ...]:
        return tuple(Space(f"s{k}", 2, Kind.SPIN_SITE) for k in range(1, self.N + 1))

    def with_(self, **kw) -> "ChainSpec":
        d = {k: getattr(self, k) for k in ("N", "q", "x", "phi", "D", "allow_undertwist")}
        d.update(kw)
        return ChainSpec(**d)


@dataclass(frozen=True, eq=False)
class TwistOperators:
    z_quantum: Operator
    chi_inv: Operator
    magnetization: np.ndarray = field(repr=False)

    def z_pow(self, c: complex) -> Operator:
        z = self.z_quantum
        return Operator(z.spaces, np.diag(z.diag() ** c))


def twist_operators(spec: ChainSpec) -> TwistOperators:
    sites = spec.sites
    m = np.zeros(1)
    for _ in sites:
        m = np.add.outer(m, np.array([1.0, -1.0])).ravel()
    z = np.exp((m / 2 + spec.phi) * np.log(complex(spec.q)))
    return TwistOperators(Operator(sites, np.diag(z)), Operator(sites, np.diag(1 - z**-2.0)), m)


def monodromy(aux: RepHandle, x: complex, spec: ChainSpec) -> Operator:
    """``L_1(x) L_2(x) ... L_N(x)`` on legs ``[aux, s1, ..., sN]``."""
    legs = (aux.space,) + spec.sites
    out = None
    for s in spec.sites:
        L = embed(build_L(aux, x, s).op, legs)
        out = L if out is None else out @ L
    return out


def _aux_trace(aux: RepHandle, x: complex, spec: ChainSpec, cartan: str) -> Operator:
    weight = q_cartan(aux.p, spec.phi, aux[cartan])
    return partial_trace_weighted(monodromy(aux, x, spec), aux.space.label, weight)


def t_operator(mu: complex, spec: ChainSpec, x: complex | None = None, D: int | None = None) -> Operator:
    aux = verma_rep(mu, D or spec.D, spec.p)
    return _aux_trace(aux, spec.x if x is None else x, spec, "H")


def q_operator(i: int, spec: ChainSpec, x: complex | None = None, D: int | None = None) -> Operator:
    aux = osc_rep(i, D or spec.D, spec.p)
    raw = _aux_trace(aux, spec.x if x is None else x, spec, "h")
    return twist_operators(spec).chi_inv @ raw


def theorem2_sides(mu: complex, spec: ChainSpec, D: int | None = None) -> tuple[Operator, Operator]:
    tw = twist_operators(spec)
    q = spec.q
    lhs = t_operator(mu, spec, D=D)
    pref = tw.z_pow(mu) @ tw.chi_inv.inv()
    rhs = pref @ q_operator(1, spec, spec.x * qpow(q, mu), D) @ q_operator(2, spec, spec.x * qpow(q, -mu), D)
    return lhs, rhs


def theorem2_check(mu: complex, spec: ChainSpec, tol: float = 1e-8) -> CheckReport:
    with timed() as t:
        lhs, rhs = theorem2_sides(mu, spec)
        r = residual(lhs, rhs)
    return CheckReport(f"theorem2:N={spec.N}", _params(spec, mu=mu), r, tol, "full", {}, t[0])


def character_check(mu: complex, spec: ChainSpec, tol: float = 1e-10) -> CheckReport:
    with timed() as t:
        tw = twist_operators(spec)
        T0 = t_operator(mu, spec, x=0)
        closed = tw.z_pow(mu) @ tw.chi_inv.inv()
        r = residual(T0, closed)
    return CheckReport(f"character:N={spec.N}", _params(spec, mu=mu, x=0), r, tol, "full", {}, t[0])


def q_zero_check(i: int, spec: ChainSpec, tol: float = 1e-8) -> CheckReport:
    with timed() as t:
        Q0 = q_operator(i, spec, x=0)
        r = residual(Q0, Operator(Q0.spaces, np.eye(Q0.data.shape[0])))
    return CheckReport(f"q_zero:Q{i}:N={spec.N}", _params(spec, x=0), r, tol, "full", {}, t[0])


def _params(spec: ChainSpec, **extra) -> dict:
    d = {"N": spec.N, "q": spec.q, "x": spec.x, "phi": spec.phi, "D": spec.D}
    d.update(extra)
    return d


# --- convergence --------------------------------------------------------------

def convergence_probe(builder: Callable[[int], Operator | np.ndarray | complex], D_schedule: Sequence[int],
                      tol: float = 1e-9, name: str = "probe",
                      sectors: np.ndarray | None = None) -> CheckReport:
    """Evaluate ``builder`` at increasing cutoffs and certify geometric settling.

    Raises :class:`DivergentTrace` when the successive differences fail to
    shrink; ``sectors`` (the magnetisation of each quantum basis state) lets
    the message name the worst sector.
    """
    if len(D_schedule) < 2:
        raise ValueError("need at least two cutoffs")
    with timed() as t:
        vals = []
        for D in D_schedule:
            v = builder(D)
            vals.append(np.atleast_1d(v.data if isinstance(v, Operator) else np.asarray(v, dtype=complex)))
        diffs, cols = [], []
        for a, b in zip(vals, vals[1:]):
            d = np.abs(b - a)
            scale = 1 + np.abs(b).max()
            diffs.append(float(d.max() / scale))
            cols.append(d.max(axis=0) if d.ndim == 2 else d)
        floor = 1e-14
        ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > floor]
        shrinking = all(b < a or b < floor for a, b in zip(diffs, diffs[1:]))
    if not shrinking or not np.all(np.isfinite(diffs)):
        msg = f"divergent trace in {name}: successive differences {['%.2e' % d for d in diffs]}"
        if sectors is not None:
            worst = int(np.argmax(cols[-1]))
            msg += f"; worst sector m={sectors[worst]:+g}"
        raise DivergentTrace(msg)
    ratio = max(ratios) if ratios else 0.0
    return CheckReport(f"convergence:{name}", {"D_schedule": list(D_schedule)}, diffs[-1], tol,
                       "full", {"diffs": diffs, "decay_ratio": ratio}, t[0])


def trace_probe(kind: str, spec: ChainSpec, mu: complex = 0.0, D_schedule: Sequence[int] | None = None,
                tol: float = 1e-9) -> CheckReport:
    """Convergence probe of ``T`` (kind "T") or ``Q1``/``Q2`` at the chain's ``x``."""
    sched = list(D_schedule or (spec.D // 2, spec.D, 2 * spec.D))
    if kind == "T":
        builder = lambda D: t_operator(mu, spec, D=D)
    elif kind in ("Q1", "Q2"):
        builder = lambda D: q_operator(int(kind[1]), spec, D=D)
    else:
        raise ValueError(f"unknown trace kind {kind!r}")
    rep = convergence_probe(builder, sched, tol, f"{kind}:N={spec.N}", twist_operators(spec).magnetization)
    rep.params.update(_params(spec, mu=mu) if kind == "T" else _params(spec))
    return rep


def cutoff_stability_check(mu: complex, spec: ChainSpec, tol: float = 1e-9) -> CheckReport:
    """Theorem-2 residual at ``D`` against ``2D``."""
    with timed() as t:
        r1 = residual(*theorem2_sides(mu, spec))
        r2 = residual(*theorem2_sides(mu, spec, D=2 * spec.D))
    return CheckReport(f"theorem2_stability:N={spec.N}", _params(spec, mu=mu), abs(r1 - r2), tol,
                       "full", {"residual_D": r1, "residual_2D": r2}, t[0])


# --- structural checks --------------------------------------------------------

def _named_ops(mu: complex, spec: ChainSpec, points: Sequence[complex]) -> list[tuple[str, Operator]]:
    ops = []
    for x in points:
        ops.append((f"T({x:g})", t_operator(mu, spec, x=x)))
        ops.append((f"Q1({x:g})", q_operator(1, spec, x=x)))
        ops.append((f"Q2({x:g})", q_operator(2, spec, x=x)))
    return ops


def commutator_check(mu: complex, spec: ChainSpec, points: Sequence[complex] = (0.2, 0.11, 0.3),
                     tol: float = 1e-8) -> CheckReport:
    """Largest normalised commutator among T, Q1, Q2 at the sample points."""
    with timed() as t:
        ops = _named_ops(mu, spec, points)
        worst, pair = 0.0, None
        for i, (na, a) in enumerate(ops):
            for nb, b in ops[i + 1:]:
                c = np.abs((a @ b - b @ a).data).max() / (1 + np.abs(a.data).max() * np.abs(b.data).max())
                if c >= worst:
                    worst, pair = float(c), (na, nb)
    return CheckReport(f"commuting_family:N={spec.N}", _params(spec, mu=mu, points=list(points)), worst, tol,
                       "full", {"worst_pair": list(pair)}, t[0])


def weight_check(mu: complex, spec: ChainSpec, tol: float = 1e-12) -> CheckReport:
    """Every T/Q commutes with the total magnetisation."""
    with timed() as t:
        m = twist_operators(spec).magnetization
        worst = 0.0
        for _, a in _named_ops(mu, spec, (spec.x,)):
            off = a.data[m[:, None] != m[None, :]]
            if off.size:
                worst = max(worst, float(np.abs(off).max() / (1 + np.abs(a.data).max())))
    return CheckReport(f"weight_conservation:N={spec.N}", _params(spec, mu=mu), worst, tol, "full", {}, t[0])


def dump_operator(op: Operator, path: str | Path, meta: dict) -> tuple[Path, Path]:
    """Binary dump plus ``key=value`` sidecar next to it."""
    path = Path(path)
    side = path.with_suffix(path.suffix + ".meta")
    legs = {f"leg{i}.kind": s.kind.value for i, s in enumerate(op.spaces)}
    return write_dump(op, path), write_sidecar({**meta, **legs}, side)
