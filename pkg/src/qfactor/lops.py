"""L-operators with a two-dimensional quantum leg.

The operator is stored as a 2x2 block matrix over the auxiliary
space, i.e. without the scalar normalisation phi; identities that involve phi
are checked separately as scalar series identities.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qnum import QParams, SeriesBudget, phi_i_series, phi_series, qpow
from .report import CheckReport, timed
from .reps import RepHandle, fund_rep, q_cartan
from .tensor import IndexMask, Kind, Operator, Space, embed, residual

__all__ = ["Family", "LOperator", "build_L", "qdet_sides", "qdet_check", "rll_sides",
           "rll_check", "phi_factor_check", "phi_qdet_check", "ResonantRatio"]


class Family(str, Enum):
    GENERIC_VERMA = "generic_verma"
    OSC1_DEG = "osc1_deg"
    OSC2_DEG = "osc2_deg"
    FUNDAMENTAL_AUX = "fundamental_aux"


class ResonantRatio(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LOperator:
    aux: Space
    quantum: Space
    blocks: tuple[tuple[Operator, Operator], tuple[Operator, Operator]]
    x: complex
    family: Family

    @property
    def op(self) -> Operator:
        data = sum(np.kron(self.blocks[i][j].data, _unit(i, j)) for i in range(2) for j in range(2))
        return Operator((self.aux, self.quantum), data)

    def block(self, i: int, j: int) -> Operator:
        """Block (i, j), 1-based."""
        return self.blocks[i - 1][j - 1]


def _unit(i: int, j: int) -> np.ndarray:
    u = np.zeros((2, 2))
    u[i, j] = 1
    return u


def build_L(rep: RepHandle, x: complex, quantum: str | Space = "s") -> LOperator:
    """The L-operator of ``rep`` at spectral parameter ``x``.

    U_q(sl2) carriers (Verma, fundamental, finite-dimensional) give the generic
    form; oscillator carriers give the two degenerate forms, whose upper-left
    (kind 1) or lower-right (kind 2) entry has no x-term.
    """
    p = rep.p
    q, lam = p.q, p.lam
    qs = quantum if isinstance(quantum, Space) else Space(quantum, 2, Kind.FUNDAMENTAL)
    if "H" in rep:
        H, E, F = rep["H"], rep["E"], rep["F"]
        kind = None
    else:
        H, E, F = rep["h"], rep["e"], rep["f"]
        kind = rep.params["kind"]
    up, down = q_cartan(p, 0.5, H), q_cartan(p, -0.5, H)
    l11 = up - (x / q) * down
    l12 = lam * (F @ down)
    l21 = (lam * x) * (E @ up)
    l22 = down - (x / q) * up
    if kind == 1:
        l11, family = up, Family.OSC1_DEG
    elif kind == 2:
        l22, family = down, Family.OSC2_DEG
    else:
        family = Family.FUNDAMENTAL_AUX if rep.space.kind is Kind.FUNDAMENTAL else Family.GENERIC_VERMA
    return LOperator(rep.space, qs, ((l11, l12), (l21, l22)), complex(x), family)


def _casimir_l(rep: RepHandle) -> Operator:
    p = rep.p
    q, lam = p.q, p.lam
    H, E, F = rep["H"], rep["E"], rep["F"]
    return E @ F + (q_cartan(p, 1, H) / q + q * q_cartan(p, -1, H)) / lam**2


def qdet_sides(rep: RepHandle, x: complex) -> tuple[Operator, Operator]:
    p = rep.p
    q, lam = p.q, p.lam
    L, Ls = build_L(rep, x), build_L(rep, x / q**2)
    lhs = L.block(1, 1) @ Ls.block(2, 2) - (1 / q) * (L.block(2, 1) @ Ls.block(1, 2))
    one = rep.one()
    rhs = one - (lam**2 * x / q**2) * _casimir_l(rep) + (x**2 / q**4) * one
    return lhs, rhs


def qdet_check(rep: RepHandle, x: complex, tol: float = 1e-10, margin: int = 2) -> CheckReport:
    with timed() as t:
        lhs, rhs = qdet_sides(rep, x)
        D = rep.space.dim
        exact = rep.space.kind is Kind.FUNDAMENTAL or rep.params.get("findim")
        m = 0 if exact else margin
        r = residual(lhs, rhs, IndexMask.fock_max(rep.space.label, D - 1 - m))
    return CheckReport(f"qdet:{rep.name}", {"q": rep.p.q, "x": x, "mu": rep.params.get("mu"), "D": D},
                       r, tol, f"fock<=D-1-{m}", {}, t[0])


def _r_matrix(p: QParams, u: complex, a: Space, b: Space) -> Operator:
    """Fundamental-fundamental R on legs (a, b): the L-operator of fund_rep at u."""
    R = build_L(fund_rep(p, a.label), u, b).op
    if abs(np.linalg.det(R.data)) < 1e-12:
        raise ResonantRatio(f"resonant ratio: R({u}) is singular")
    return R


def rll_sides(aux: RepHandle, x: complex, y: complex, ordering: str = "rll") -> tuple[Operator, Operator]:
    """Both sides of the RLL relation on legs ``(aux, a, b)``.

    ``"rll"``: ``R(x/y) L_a(x) L_b(y) = L_b(y) L_a(x) R(x/y)``, with the
    fundamental R built as the L-operator of ``fund_rep`` on leg ``b`` and
    quantum leg ``a``.
    ``"llr"``: ``L_a(x) L_b(y) R'(y/x) = R'(y/x) L_b(y) L_a(x)`` with the roles
    of ``a`` and ``b`` in R' exchanged. Both hold; the pair guards against
    spectral-parameter convention drift.
    """
    a = Space("a", 2, Kind.FUNDAMENTAL)
    b = Space("b", 2, Kind.FUNDAMENTAL)
    legs = (aux.space, a, b)
    La = embed(build_L(aux, x, a).op, legs)
    Lb = embed(build_L(aux, y, b).op, legs)
    if ordering == "rll":
        R = embed(_r_matrix(aux.p, x / y, b, a), legs)
        return R @ La @ Lb, Lb @ La @ R
    if ordering == "llr":
        R = embed(_r_matrix(aux.p, y / x, a, b), legs)
        return La @ Lb @ R, R @ Lb @ La
    raise ValueError(f"unknown ordering {ordering!r}")


def rll_check(aux: RepHandle, x: complex, y: complex, tol: float = 1e-10, margin: int = 2,
              ordering: str = "rll") -> CheckReport:
    if x == 0 or y == 0:
        raise ValueError("rll_check needs nonzero spectral parameters")
    with timed() as t:
        lhs, rhs = rll_sides(aux, x, y, ordering)
        D = aux.space.dim
        exact = aux.space.kind is Kind.FUNDAMENTAL or aux.params.get("findim")
        m = 0 if exact else margin
        r = residual(lhs, rhs, IndexMask.fock_max(aux.space.label, D - 1 - m))
    return CheckReport(f"rll[{ordering}]:{aux.name}",
                       {"q": aux.p.q, "x": x, "y": y, "D": D, "mu": aux.params.get("mu")},
                       r, tol, f"fock<=D-1-{m}", {}, t[0])


def phi_factor_check(mu: complex, x: complex, p: QParams, b: SeriesBudget = SeriesBudget(),
                     tol: float = 1e-10) -> CheckReport:
    """``phi(x)`` on the Verma module equals ``phi1(q^mu x) phi2(q^-mu x)``."""
    with timed() as t:
        lhs, s0 = phi_series(x, mu, p, b, info=True)
        f1, s1 = phi_i_series(1, qpow(p.q, mu) * x, p, b, info=True)
        f2, s2 = phi_i_series(2, qpow(p.q, -mu) * x, p, b, info=True)
        r = abs(lhs - f1 * f2)
    return CheckReport("phi_factor", {"q": p.q, "mu": mu, "x": x}, r, tol, "scalar",
                       {"phi": lhs, "stops": [s0.stop, s1.stop, s2.stop], "terms": [s0.terms, s1.terms, s2.terms]},
                       t[0])


def phi_qdet_check(mu: complex, x: complex, p: QParams, b: SeriesBudget = SeriesBudget(),
                   tol: float = 1e-10) -> CheckReport:
    """Scalar companion of the quantum determinant: ``phi(x) phi(q^-2 x)`` against
    ``1 - q^-2 lam^2 C x + q^-4 x^2`` with the Verma Casimir eigenvalue."""
    with timed() as t:
        q, lam = p.q, p.lam
        C = (qpow(q, mu + 1) + qpow(q, -mu - 1)) / lam**2
        lhs = phi_series(x, mu, p, b) * phi_series(x / q**2, mu, p, b)
        rhs = 1 - lam**2 * C * x / q**2 + x**2 / q**4
        r = abs(lhs - rhs)
    return CheckReport("phi_qdet", {"q": q, "mu": mu, "x": x}, r, tol, "scalar", {}, t[0])
