"""Truncated representations of U_q(sl2), the q-oscillator algebras and the
Borel-subalgebra maps built on them, plus relation checkers.

Fock basis ``v_0 .. v_{D-1}``; a raising operator ``f`` maps ``v_n`` to
``v_{n+1}`` (lower shift), ``v_{D-1}`` to zero. Checks only look at columns
``n <= D-1-margin`` so dropped overflow never enters a comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .qnum import QParams, q_number, qpow
from .report import CheckReport, timed
from .tensor import IndexMask, Kind, Operator, Space, identity, residual

__all__ = [
    "RepHandle", "MapId", "BorelMapSpec", "UndefinedGenerator", "osc_rep", "verma_rep",
    "fund_rep", "findim_rep", "sl2_from_osc", "borel_map", "q_cartan",
    "relations_check", "contraction_limit_check", "CARTAN",
]

CARTAN = np.array([[2, -2], [-2, 2]])
E_GENS = ("e0", "e1")
F_GENS = ("f0", "f1")
H_GENS = ("h0", "h1")


class UndefinedGenerator(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class RepHandle:
    space: Space
    gens: Mapping[str, Operator]
    params: Mapping[str, object] = field(default_factory=dict)
    name: str = ""

    def __getitem__(self, gen: str) -> Operator:
        try:
            return self.gens[gen]
        except KeyError:
            raise UndefinedGenerator(f"generator {gen!r} is not defined for {self.name or self.space.label}") from None

    def __contains__(self, gen: str) -> bool:
        return gen in self.gens

    @property
    def p(self) -> QParams:
        return self.params["p"]

    @property
    def cutoff(self) -> int:
        return self.space.dim

    def one(self) -> Operator:
        return identity([self.space])


def q_cartan(p: QParams, coeff: complex, h: Operator) -> Operator:
    """``q**(coeff*h)`` for diagonal ``h`` (principal branch)."""
    if not h.is_diagonal():
        raise ValueError("Cartan exponent must be diagonal")
    d = np.exp(coeff * h.diag() * np.log(p.q))
    return Operator(h.spaces, np.diag(d))


def _op(space: Space, mat: np.ndarray) -> Operator:
    return Operator((space,), mat)


def osc_rep(kind: int, D: int, p: QParams, label: str | None = None) -> RepHandle:
    if kind not in (1, 2):
        raise ValueError("oscillator kind must be 1 or 2")
    if D < 2:
        raise ValueError("cutoff D must be >= 2")
    space = Space(label or f"W{kind}", D, Kind.OSC1 if kind == 1 else Kind.OSC2, (("D", D),))
    q, lam = p.q, p.lam
    n = np.arange(D)
    h = np.diag(-2.0 * n).astype(complex)
    e = np.zeros((D, D), dtype=complex)
    f = np.zeros((D, D), dtype=complex)
    for k in range(1, D):
        if kind == 1:
            e[k - 1, k] = q_number(k, p) * q ** (1 - k) / lam
        else:
            e[k - 1, k] = -q_number(k, p) * q ** (k - 1) / lam
        f[k, k - 1] = 1
    return RepHandle(space, {"h": _op(space, h), "e": _op(space, e), "f": _op(space, f)},
                     {"p": p, "D": D, "kind": kind}, f"osc{kind}")


def verma_rep(mu: complex, D: int, p: QParams, label: str = "V") -> RepHandle:
    if D < 2:
        raise ValueError("cutoff D must be >= 2")
    space = Space(label, D, Kind.VERMA, (("mu", mu), ("D", D)))
    n = np.arange(D)
    H = np.diag(mu - 2.0 * n).astype(complex)
    E = np.zeros((D, D), dtype=complex)
    F = np.zeros((D, D), dtype=complex)
    for k in range(1, D):
        E[k - 1, k] = q_number(k, p) * _q_bracket(mu - k + 1, p)
        F[k, k - 1] = 1
    return RepHandle(space, {"H": _op(space, H), "E": _op(space, E), "F": _op(space, F)},
                     {"p": p, "D": D, "mu": mu}, "verma")


def _q_bracket(a: complex, p: QParams) -> complex:
    """``[a]_q`` for non-integer ``a``."""
    if a == 0:
        return 0j
    return (qpow(p.q, a) - qpow(p.q, -a)) / p.lam


def fund_rep(p: QParams, label: str = "C") -> RepHandle:
    space = Space(label, 2, Kind.FUNDAMENTAL)
    E = np.array([[0, 1], [0, 0]], dtype=complex)
    F = E.T.copy()
    H = np.diag([1.0, -1.0]).astype(complex)
    return RepHandle(space, {"H": _op(space, H), "E": _op(space, E), "F": _op(space, F)},
                     {"p": p, "D": 2, "mu": 1}, "fund")


def findim_rep(m: int, p: QParams, label: str = "V") -> RepHandle:
    """Irreducible (m+1)-dimensional quotient of the Verma module of weight m."""
    if m < 0 or int(m) != m:
        raise ValueError("findim_rep needs a non-negative integer weight")
    if m == 0:
        space = Space(label, 1, Kind.VERMA, (("mu", 0), ("D", 1)))
        z = _op(space, np.zeros((1, 1)))
        return RepHandle(space, {"H": z, "E": z, "F": z}, {"p": p, "D": 1, "mu": 0}, "findim")
    v = verma_rep(m, m + 1, p, label)
    return RepHandle(v.space, v.gens, {**v.params, "findim": True}, "findim")


def sl2_from_osc(carrier: RepHandle, mu: complex, tilde: bool = False) -> RepHandle:
    """The U_q(sl2)-type elements ``E_i, F_i, H_i`` built from one oscillator.

    kind 1: ``E1 = (q^mu - q^{-mu-h}) e``, ``F1 = f``, ``H1 = h + mu``;
    kind 2: ``E2 = e``, ``F2 = f (q^mu - q^{-mu+h})``, ``H2 = h - mu``.
    The tilde variants are the same with ``mu -> -mu``.
    """
    kind = carrier.params["kind"]
    p = carrier.p
    m = -mu if tilde else mu
    h, e, f = carrier["h"], carrier["e"], carrier["f"]
    one = carrier.one()
    if kind == 1:
        E = (qpow(p.q, m) * one - qpow(p.q, -m) * q_cartan(p, -1, h)) @ e
        F = f
        H = h + m * one
    else:
        E = e
        F = f @ (qpow(p.q, m) * one - qpow(p.q, -m) * q_cartan(p, 1, h))
        H = h - m * one
    return RepHandle(carrier.space, {"E": E, "F": F, "H": H},
                     {**carrier.params, "mu": mu, "tilde": tilde},
                     f"sl2[{'~' if tilde else ''}osc{kind}]")


class MapId(str, Enum):
    EV_X = "ev_x"
    RHO1_PLUS = "rho1_plus"
    RHO2_PLUS = "rho2_plus"
    RHO1_MINUS = "rho1_minus"
    RHO2_MINUS = "rho2_minus"
    EV1_PLUS = "ev1_plus"
    EV2_PLUS = "ev2_plus"
    EV1_MINUS = "ev1_minus"
    EV2_MINUS = "ev2_minus"
    EV1_TILDE = "ev1_tilde"
    EV2_TILDE = "ev2_tilde"


@dataclass(frozen=True)
class BorelMapSpec:
    id: MapId
    x: complex = 1.0
    mu: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "id", MapId(self.id))

    @property
    def osc_kind(self) -> int | None:
        v = self.id.value
        if v == "ev_x":
            return None
        return 1 if "1" in v else 2


def borel_map(spec: BorelMapSpec, carrier: RepHandle) -> RepHandle:
    """Images of the affine generators under one of the Borel maps."""
    x = complex(spec.x)
    mid = spec.id
    if mid is MapId.EV_X:
        if "E" not in carrier:
            raise ValueError("ev_x needs a U_q(sl2) carrier")
        E, F, H = carrier["E"], carrier["F"], carrier["H"]
        gens = {"e0": F, "f0": E, "h0": -H, "e1": x * E, "f1": F / x, "h1": H}
    else:
        if "h" not in carrier:
            raise ValueError(f"{mid.value} needs an oscillator carrier")
        if carrier.params["kind"] != spec.osc_kind:
            raise ValueError(f"{mid.value} needs an osc{spec.osc_kind} carrier, got osc{carrier.params['kind']}")
        h, e, f = carrier["h"], carrier["e"], carrier["f"]
        zero = 0 * carrier.one()
        if mid in (MapId.RHO1_PLUS, MapId.RHO2_PLUS):
            gens = {"e0": f, "e1": x * e, "h0": -h, "h1": h}
        elif mid in (MapId.RHO1_MINUS, MapId.RHO2_MINUS):
            gens = {"f0": e, "f1": f / x, "h0": -h, "h1": h}
        else:
            s = sl2_from_osc(carrier, spec.mu, tilde=mid in (MapId.EV1_TILDE, MapId.EV2_TILDE))
            E, F, H = s["E"], s["F"], s["H"]
            cartan = {"h0": -H, "h1": H}
            gens = {
                MapId.EV1_PLUS: {"e0": F, "e1": x * E},
                MapId.EV2_PLUS: {"e0": zero, "e1": x * E},
                MapId.EV1_MINUS: {"f0": zero, "f1": F / x},
                MapId.EV2_MINUS: {"f0": E, "f1": F / x},
                MapId.EV1_TILDE: {"e0": F, "e1": zero, "f0": E, "f1": F / x},
                MapId.EV2_TILDE: {"e0": F, "e1": x * E, "f0": E, "f1": zero},
            }[mid]
            gens = {**gens, **cartan}
    return RepHandle(carrier.space, gens, {**carrier.params, "x": x, "mu": spec.mu, "map": mid.value},
                     mid.value)


# --- relation checks --------------------------------------------------------

def _serre(a: Operator, b: Operator, c: complex) -> tuple[Operator, Operator]:
    """Both sides of ``[a,[a,[a,b]_{c}]]_{1/c} = 0`` with c = q^{+-2}.

    Expanded: ``a^3 b + k a b a^2 = k a^2 b a + b a^3`` where ``k = c + 1 + 1/c``.
    """
    k = c + 1 + 1 / c
    lhs = a @ a @ a @ b + k * (a @ b @ a @ a)
    rhs = k * (a @ a @ b @ a) + b @ a @ a @ a
    return lhs, rhs


def _relations(rep: RepHandle, relation_set: str) -> list[tuple[str, Operator, Operator, int]]:
    p = rep.p
    q, lam = p.q, p.lam
    one = rep.one()
    out = []
    if relation_set == "osc":
        kind = rep.params["kind"]
        h, e, f = rep["h"], rep["e"], rep["f"]
        out.append(("[h,e]=2e", h @ e, e @ h + 2 * e, 2))
        out.append(("[h,f]=-2f", h @ f, f @ h - 2 * f, 2))
        if kind == 1:
            out.append(("fe", f @ e, q * (one - q_cartan(p, 1, h)) / lam**2, 2))
            out.append(("ef", e @ f, q * (one - q_cartan(p, 1, h) * q**-2) / lam**2, 2))
            out.append(("[e,f]=q^h/lam", e @ f, f @ e + q_cartan(p, 1, h) / lam, 2))
            out.append(("[e,f]_{q^-2}=1/lam", e @ f, q**-2 * (f @ e) + one / lam, 2))
        else:
            out.append(("fe", f @ e, (one - q_cartan(p, -1, h)) / (q * lam**2), 2))
            out.append(("ef", e @ f, (one - q_cartan(p, -1, h) * q**2) / (q * lam**2), 2))
            out.append(("[e,f]=-q^-h/lam", e @ f, f @ e - q_cartan(p, -1, h) / lam, 2))
            out.append(("[e,f]_{q^2}=-1/lam", e @ f, q**2 * (f @ e) - one / lam, 2))
    elif relation_set == "sl2":
        H, E, F = rep["H"], rep["E"], rep["F"]
        out.append(("[H,E]=2E", H @ E, E @ H + 2 * E, 2))
        out.append(("[H,F]=-2F", H @ F, F @ H - 2 * F, 2))
        out.append(("[E,F]", E @ F, F @ E + (q_cartan(p, 1, H) - q_cartan(p, -1, H)) / lam, 2))
    elif relation_set == "casimir":
        H, E, F = rep["H"], rep["E"], rep["F"]
        # EF ~ -al and FE ~ -ar are O(q^{2n}) while the Casimir is O(1):
        # Cartan terms are moved across so neither side cancels internally
        ar = (q * q_cartan(p, 1, H) + q_cartan(p, -1, H) / q) / lam**2
        al = (q_cartan(p, 1, H) / q + q * q_cartan(p, -1, H)) / lam**2
        out.append(("C(r)=C(l)", F @ E - al, E @ F - ar, 2))
        out.append(("[C(l),E]=0", E @ F @ E - E @ al, E @ E @ F - al @ E, 3))
        out.append(("[C(l),F]=0", E @ F @ F - F @ al, F @ E @ F - al @ F, 3))
    elif relation_set in ("borel", "affine"):
        hs = [g for g in H_GENS if g in rep]
        if len(hs) == 2:
            out.append(("h0+h1=0", rep["h0"] + rep["h1"], 0 * one, 0))
            out.append(("[h0,h1]=0", rep["h0"] @ rep["h1"], rep["h1"] @ rep["h0"], 0))
        for i in range(2):
            hi = f"h{i}"
            if hi not in rep:
                continue
            for j in range(2):
                a = CARTAN[i, j]
                if f"e{j}" in rep:
                    ej = rep[f"e{j}"]
                    out.append((f"[h{i},e{j}]={a}e{j}", rep[hi] @ ej, ej @ rep[hi] + a * ej, 2))
                if f"f{j}" in rep:
                    fj = rep[f"f{j}"]
                    out.append((f"[h{i},f{j}]={-a}f{j}", rep[hi] @ fj, fj @ rep[hi] - a * fj, 2))
        for i, j in ((0, 1), (1, 0)):
            if f"e{i}" in rep and f"e{j}" in rep:
                lhs, rhs = _serre(rep[f"e{i}"], rep[f"e{j}"], q**2)
                out.append((f"serre e{i}^3 e{j}", lhs, rhs, 4))
            if f"f{i}" in rep and f"f{j}" in rep:
                lhs, rhs = _serre(rep[f"f{i}"], rep[f"f{j}"], q**-2)
                out.append((f"serre f{i}^3 f{j}", lhs, rhs, 4))
        if relation_set == "affine":
            for i in range(2):
                for j in range(2):
                    e, f = rep[f"e{i}"], rep[f"f{j}"]
                    rhs = f @ e
                    if i == j:
                        h = rep[f"h{i}"]
                        rhs = rhs + (q_cartan(p, 1, h) - q_cartan(p, -1, h)) / lam
                    out.append((f"[e{i},f{j}]", e @ f, rhs, 2))
    else:
        raise ValueError(f"unknown relation set {relation_set!r}")
    return out


def relations_check(rep: RepHandle, relation_set: str, margin: int | None = None,
                    tol: float = 1e-12, name: str | None = None) -> CheckReport:
    """Worst normalised residual over a relation family on interior columns.

    ``margin=None`` uses each relation's own required margin; an explicit
    margin is applied uniformly and must cover every relation.
    """
    with timed() as t:
        rels = _relations(rep, relation_set)
        D = rep.space.dim
        per = {}
        worst = 0.0
        used = 0
        for rname, lhs, rhs, need in rels:
            m = need if margin is None else margin
            if margin is not None and margin < need:
                raise ValueError(f"margin {margin} < required {need} for relation {rname!r}")
            if rep.params.get("findim") or rep.space.kind is Kind.FUNDAMENTAL:
                m = 0  # exact finite-dimensional representation
            if D - 1 - m < 0:
                raise ValueError(f"cutoff D={D} too small for margin {m}")
            used = max(used, m)
            r = residual(lhs, rhs, IndexMask.fock_max(rep.space.label, D - 1 - m))
            per[rname] = r
            worst = max(worst, r)
    return CheckReport(
        name or f"relations[{relation_set}]:{rep.name}",
        {"q": rep.p.q, "D": D, **{k: v for k, v in rep.params.items() if k in ("mu", "x", "kind", "map")}},
        worst, tol, f"fock<=D-1-{used}", {"per_relation": per}, t[0])


def contraction_limit_check(mu_grid, D: int, p: QParams, tol: float = 1e-6,
                            kind: int = 1, margin: int = 1) -> CheckReport:
    """Verma generators approach the oscillator ones as ``q^{-mu} -> 0`` (kind 1)
    or ``q^{mu} -> 0`` (kind 2, grid taken as ``-mu``)."""
    if not (p.q.imag == 0 and p.q.real > 1):
        raise ValueError("contraction check needs real q > 1")
    grid = [float(m) for m in mu_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("mu grid must be increasing")
    with timed() as t:
        osc = osc_rep(kind, D, p, label="A")
        sign = 1 if kind == 1 else -1
        mask = IndexMask.fock_max("A", D - 1 - margin)
        rs = []
        for m in grid:
            mu = sign * m
            v = verma_rep(mu, D, p, label="A")
            one = v.one()
            r = max(
                residual(v["H"] - mu * one, osc["h"], mask),
                residual(v["E"] * qpow(p.q, -sign * mu), osc["e"], mask),
                residual(v["F"], osc["f"], mask),
            )
            rs.append(r)
        offending = [(grid[i], grid[i + 1]) for i in range(len(rs) - 1) if not rs[i + 1] < rs[i]]
        rates = [float(np.log(rs[i + 1] / rs[i]) / (grid[i + 1] - grid[i]) / np.log(p.q.real))
                 for i in range(len(rs) - 1) if rs[i] > 0 and rs[i + 1] > 0]
        res = rs[-1] if not offending else float("inf")
    notes = {"residuals": rs, "log_q_decay_rates": rates}
    if offending:
        notes["non_monotone"] = offending
    return CheckReport(f"contraction[osc{kind}]", {"q": p.q, "D": D, "mu_grid": [sign * m for m in grid]},
                       res, tol, f"fock<=D-1-{margin}", notes, t[0])
