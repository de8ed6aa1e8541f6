"""The intertwiner ``O = exp_{q^-2}(lam e1 (x) f2)`` and the identities built on it.

``O`` preserves the total degree ``s = n + m`` on ``W1 (x) W2``; on blocks with
``s <= min(D1, D2) - 1`` the truncated matrices are exact, so every comparison
here is masked by total degree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .qnum import (QParams, SeriesBudget, exp_q_coeffs, inv_exp_q_coeffs, nilpotent_power_series,
                   pochhammer_ratio_coeffs, pochhammer_ratio_coeffs_division, q_binomial, qpow)
from .report import CheckReport, timed
from .reps import BorelMapSpec, MapId, RepHandle, borel_map, osc_rep, q_cartan, sl2_from_osc
from .lops import build_L
from .tensor import IndexMask, Kind, Operator, Space, embed, residual

__all__ = [
    "OMatrix", "build_O", "o_column_sides", "o_column_check", "o_inverse_check",
    "coproduct_image", "intertwiner_check", "corollary_sides", "corollary_check",
    "corollary_stability_check", "HADAMARD_IDS", "ROUNDTRIP_GENS", "hadamard_sides",
    "hadamard_check", "hadamard_roundtrip_check", "ConvergenceDomain",
]


class ConvergenceDomain(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OMatrix:
    op: Operator
    inv: Operator
    D1: int
    D2: int
    p: QParams
    inv_route: str = "block"

    @property
    def legs(self) -> tuple[str, str]:
        return self.op.labels


def _total_degree_blocks(dims: Sequence[int]) -> dict[int, np.ndarray]:
    grids = np.indices(dims).reshape(len(dims), -1)
    s = grids.sum(axis=0)
    return {int(k): np.flatnonzero(s == k) for k in np.unique(s)}


def _block_inverse(op: Operator) -> Operator:
    """Invert a total-degree-preserving operator block by block."""
    out = np.zeros_like(op.data)
    for idx in _total_degree_blocks(op.dims).values():
        off = np.ones(op.data.shape[0], dtype=bool)
        off[idx] = False
        if op.data[np.ix_(off, idx)].any():
            raise ValueError("operator does not preserve total degree")
        out[np.ix_(idx, idx)] = np.linalg.inv(op.data[np.ix_(idx, idx)])
    return Operator(op.spaces, out)


def build_O(D1: int, D2: int, p: QParams, order: str = "12",
            labels: tuple[str, str] = ("W1", "W2")) -> OMatrix:
    """``O`` on ``W1(D1) (x) W2(D2)`` (``order="12"``) or on ``W2 (x) W1`` (``"21"``)."""
    if D1 < 2 or D2 < 2:
        raise ValueError("cutoffs must be >= 2")
    w1 = osc_rep(1, D1, p, labels[0])
    w2 = osc_rep(2, D2, p, labels[1])
    legs = (w1.space, w2.space) if order == "12" else (w2.space, w1.space)
    N = p.lam * (embed(w1["e"], legs) @ embed(w2["f"], legs))
    nt = max(D1, D2) + 1
    O = nilpotent_power_series(exp_q_coeffs(nt, p.q**-2), N)
    try:
        return OMatrix(O, _block_inverse(O), D1, D2, p, "block")
    except np.linalg.LinAlgError:
        # blocks are unit-triangular but can overflow LU at |q| < 1;
        # exp_{q^2}(-lam N) terminates on the truncated space, so it is exact too
        return OMatrix(O, nilpotent_power_series(inv_exp_q_coeffs(nt, p.q**-2), N), D1, D2, p, "series")


def o_column_sides(D: int, p: QParams) -> tuple[Operator, Operator]:
    """``O`` and its closed form ``O(v_n (x) v_m) = sum_k [n, k]_{q^-2} v_{n-k} (x) v_{m+k}``
    (Gaussian binomial in base ``q^-2``, no dependence on ``lam``)."""
    O = build_O(D, D, p).op
    closed = np.zeros((D * D, D * D), dtype=complex)
    for n in range(D):
        for m in range(D):
            for k in range(min(n, D - 1 - m) + 1):
                closed[(n - k) * D + m + k, n * D + m] = q_binomial(n, k, p.q**-2)
    return O, Operator(O.spaces, closed)


def o_column_check(D: int, p: QParams, tol: float = 1e-13) -> CheckReport:
    with timed() as t:
        O, closed = o_column_sides(D, p)
        r = residual(O, closed)
    return CheckReport("O:columns", {"q": p.q, "D": D}, r, tol, "full", {}, t[0])


def o_inverse_check(D: int, p: QParams, tol: float = 1e-13, order: str = "12") -> CheckReport:
    with timed() as t:
        O = build_O(D, D, p, order=order)
        I = Operator(O.op.spaces, np.eye(D * D))
        r = max(residual(O.op @ O.inv, I), residual(O.inv @ O.op, I))
    return CheckReport(f"O:block_inverse[{order}]", {"q": p.q, "D": D}, r, tol, "full",
                       {"route": O.inv_route}, t[0])


def _maps(variant: str, mu: complex, x: complex, D: int, p: QParams):
    """(LHS map pair, RHS map pair, legs, extra) for one intertwiner variant."""
    w1 = osc_rep(1, D, p)
    w2 = osc_rep(2, D, p)
    x1, x2 = x * qpow(p.q, mu), x * qpow(p.q, -mu)
    bm = lambda mid, c, xx: borel_map(BorelMapSpec(mid, xx, mu), c)
    if variant == "Bplus":
        lhs = (bm(MapId.RHO1_PLUS, w1, x1), bm(MapId.RHO2_PLUS, w2, x2))
        rhs = (bm(MapId.EV1_PLUS, w1, x), bm(MapId.EV2_PLUS, w2, x))
        return {"+": (lhs, rhs)}, (w1.space, w2.space)
    if variant == "Bminus":
        lhs = (bm(MapId.RHO1_MINUS, w1, x1), bm(MapId.RHO2_MINUS, w2, x2))
        rhs = (bm(MapId.EV1_MINUS, w1, x), bm(MapId.EV2_MINUS, w2, x))
        return {"-": (lhs, rhs)}, (w1.space, w2.space)
    if variant == "opposite":
        tilde = (bm(MapId.EV2_TILDE, w2, x), bm(MapId.EV1_TILDE, w1, x))
        plus = (bm(MapId.RHO2_PLUS, w2, x2), bm(MapId.RHO1_PLUS, w1, x1))
        minus = (bm(MapId.RHO2_MINUS, w2, x2), bm(MapId.RHO1_MINUS, w1, x1))
        return {"+": (plus, tilde), "-": (minus, tilde)}, (w2.space, w1.space)
    raise ValueError(f"unknown intertwiner variant {variant!r}")


def coproduct_image(map_pair: tuple[RepHandle, RepHandle], gen: str) -> Operator:
    """``(a (x) b) Delta(gen)`` for the Drinfeld-Jimbo co-product used here."""
    a, b = map_pair
    p = a.p
    legs = (a.space, b.space)
    i = gen[1]
    A = lambda op: embed(op, legs)
    if gen.startswith("h"):
        return A(a[gen]) + A(b[gen])
    if gen.startswith("e"):
        return A(a[gen]) + A(q_cartan(p, -1, a[f"h{i}"])) @ A(b[gen])
    if gen.startswith("f"):
        return A(a[gen]) @ A(q_cartan(p, 1, b[f"h{i}"])) + A(b[gen])
    raise ValueError(f"unknown generator {gen!r}")


def _opposite_twist(p: QParams, mu: complex, w2: RepHandle, w1: RepHandle) -> Operator:
    """``q^{-mu (1 (x) h1 - h2 (x) 1) / 2}`` on ``W2 (x) W1``."""
    legs = (w2.space, w1.space)
    d = -0.5 * mu * (embed(w1["h"], legs).diag() - embed(w2["h"], legs).diag())
    return Operator(legs, np.diag(np.exp(d * np.log(p.q))))


def intertwiner_check(variant: str, mu: complex, x: complex, D: int, p: QParams,
                      tol: float = 1e-11, gens: Sequence[str] | None = None,
                      margin: int = 2) -> list[CheckReport]:
    """One report per generator: ``O^-1 (lhs maps) Delta(a) O`` vs ``(rhs maps) Delta(a)``."""
    if D - 1 - margin < 0:
        raise ValueError(f"cutoff D={D} too small for margin {margin}")
    pairs, legs = _maps(variant, mu, x, D, p)
    O = build_O(D, D, p, order="12" if variant != "opposite" else "21")
    Oop, Oinv = O.op, O.inv
    if variant == "opposite":
        w2, w1 = osc_rep(2, D, p), osc_rep(1, D, p)
        K = _opposite_twist(p, mu, w2, w1)
        Oop = K.inv() @ Oop  # conjugation by K then O, as one similarity
        Oinv = Oinv @ K
    default = {"Bplus": ("e0", "e1", "h0", "h1"),
               "Bminus": ("f0", "f1", "h0", "h1"),
               "opposite": ("e0", "e1", "h0", "h1", "f0", "f1")}[variant]
    mask = IndexMask.total_degree([s.label for s in legs], D - 1 - margin)
    out = []
    for g in gens or default:
        with timed() as t:
            sign = "-" if g.startswith("f") else "+"
            lhs_pair, rhs_pair = pairs.get(sign) or next(iter(pairs.values()))
            lhs = Oinv @ coproduct_image(lhs_pair, g) @ Oop
            rhs = coproduct_image(rhs_pair, g)
            r = residual(lhs, rhs, mask)
        out.append(CheckReport(f"intertwiner[{variant}]:{g}",
                               {"q": p.q, "mu": mu, "x": x, "D": D}, r, tol, mask.description, {}, t[0]))
    return out


def corollary_sides(mu: complex, x: complex, D: int, p: QParams) -> tuple[Operator, Operator]:
    """Both sides of the L-operator factorisation on ``W1 (x) W2 (x) C^2``."""
    q, lam = p.q, p.lam
    w1, w2 = osc_rep(1, D, p), osc_rep(2, D, p)
    s = Space("s", 2, Kind.FUNDAMENTAL)
    legs = (w1.space, w2.space, s)
    O = build_O(D, D, p)
    Oe, Oi = embed(O.op, legs), embed(O.inv, legs)
    L1 = embed(build_L(w1, x * qpow(q, mu), s).op, legs)
    L2 = embed(build_L(w2, x * qpow(q, -mu), s).op, legs)
    lhs = Oi @ L1 @ L2 @ Oe

    verma_like = sl2_from_osc(w1, mu)
    first = embed(build_L(verma_like, x, s).op, legs)
    h2 = w2["h"]
    one2 = w2.one()
    mid = _blocks_op(w2.space, s, ((one2, 0 * one2), ((lam * x) * w2["e"], one2)))
    last = _blocks_op(w2.space, s, ((q_cartan(p, 0.5, h2) * qpow(q, -mu / 2), 0 * one2),
                                    (0 * one2, q_cartan(p, -0.5, h2) * qpow(q, mu / 2))))
    rhs = first @ embed(mid, legs) @ embed(last, legs)
    return lhs, rhs


def _blocks_op(aux: Space, s: Space, blocks) -> Operator:
    data = sum(np.kron(blocks[i][j].data, np.eye(2)[[i]].T @ np.eye(2)[[j]])
               for i in range(2) for j in range(2))
    return Operator((aux, s), data)


def corollary_check(mu: complex, x: complex, D: int, p: QParams, tol: float = 1e-10,
                    margin: int = 3, smax: int | None = None) -> CheckReport:
    """``smax`` overrides the compared total degree (default ``D - 1 - margin``)."""
    if D < 8:
        raise ValueError("corollary check needs D >= 8")
    smax = D - 1 - margin if smax is None else smax
    if smax > D - 1 - margin:
        raise ValueError(f"smax={smax} reaches into the truncation margin of D={D}")
    with timed() as t:
        lhs, rhs = corollary_sides(mu, x, D, p)
        mask = IndexMask.total_degree(["W1", "W2"], smax)
        r = residual(lhs, rhs, mask)
    return CheckReport("corollary", {"q": p.q, "mu": mu, "x": x, "D": D}, r, tol, mask.description, {}, t[0])


def corollary_stability_check(mu: complex, x: complex, D: int, p: QParams, tol: float = 1e-13,
                              margin: int = 3) -> CheckReport:
    """The corollary residual on the columns ``s <= D-1-margin`` at cutoffs ``D`` and ``2D``."""
    with timed() as t:
        smax = D - 1 - margin
        r1 = corollary_check(mu, x, D, p, margin=margin).residual
        r2 = corollary_check(mu, x, 2 * D, p, margin=margin, smax=smax).residual
    return CheckReport("corollary_stability", {"q": p.q, "mu": mu, "x": x, "D": D}, abs(r1 - r2), tol,
                       f"W1+W2 <= {smax}", {"residual_D": r1, "residual_2D": r2}, t[0])


# --- q-Hadamard identities ----------------------------------------------------
#
# At |q| < 1 the entries of O^-1 grow like prod [k]_q^2 while the conjugated
# operators stay moderate, so O^-1 X O cancels through ~20 orders of magnitude
# at D = 14. Every operator involved is a weighted shift on the (n, m) lattice,
# so the identities are evaluated column by column on sparse vectors in
# extended precision and only the results are rounded to complex128.

HADAMARD_IDS = (
    "e1", "e2", "f1", "f2", "qh1", "qh2", "qh1+h2", "qdiff+", "qdiff-",
    "inv_e1", "inv_e2", "inv_f1", "inv_f2", "inv_qh1", "inv_qh2",
)
HP_DPS = 60

Vec = dict  # (n, m) -> mpc


def _add(out: Vec, key, c) -> None:
    out[key] = out.get(key, 0) + c


class _Lattice:
    """Oscillator pair on ``W1 (x) W2`` acting on sparse vectors, truncated at ``D``."""

    def __init__(self, D: int, p: QParams, b: SeriesBudget = SeriesBudget()):
        self.D, self.p, self.b = D, p, b
        q = self.q = mpmath.mpc(p.q)
        self.lam = q - 1 / q
        qn = lambda k: (q**k - q**-k) / (q - 1 / q)
        self.a1 = [0] + [qn(k) * q ** (1 - k) / self.lam for k in range(1, D)]
        self.a2 = [0] + [-qn(k) * q ** (k - 1) / self.lam for k in range(1, D)]

    # elementary generators, as maps on vectors
    def e(self, leg: int, v: Vec) -> Vec:
        out: Vec = {}
        a = self.a1 if leg == 1 else self.a2
        for (n, m), c in v.items():
            k = n if leg == 1 else m
            if k:
                _add(out, (n - 1, m) if leg == 1 else (n, m - 1), a[k] * c)
        return out

    def f(self, leg: int, v: Vec) -> Vec:
        out: Vec = {}
        for (n, m), c in v.items():
            key = (n + 1, m) if leg == 1 else (n, m + 1)
            if max(key) < self.D:
                _add(out, key, c)
        return out

    def qh(self, c1, c2, v: Vec) -> Vec:
        """``q^{c1 h1 + c2 h2}`` with ``h = diag(-2n)``."""
        q = self.q
        return {(n, m): c * q ** (-2 * (c1 * n + c2 * m)) for (n, m), c in v.items()}

    def N(self, v: Vec) -> Vec:
        return self.e(1, self.f(2, v))

    def series(self, coeffs, v: Vec) -> Vec:
        out = {k: coeffs[0] * c for k, c in v.items()}
        acc, k = v, 0
        while True:
            acc, k = self.N(acc), k + 1
            if not acc:
                return out
            for key, c in acc.items():
                _add(out, key, coeffs[k] * c)

    # coefficient sequences, index k multiplies N^k
    def exp_coeffs(self, sign: int) -> list:
        """``O`` (sign=+1) or ``O^-1 = exp_{q^2}(-lam N)`` (sign=-1)."""
        base = self.q ** (-2 * sign)
        out, acc = [], mpmath.mpc(1)
        for k in range(self.D + 1):
            if k:
                acc *= sign * self.lam * (1 - base) / (1 - base**k)
            out.append(acc)
        return out

    def geometric(self, ratio) -> list:
        return [ratio**k for k in range(self.D + 1)]

    def poch_ratio(self, a, b, base) -> list:
        """Coefficients of the formal ratio ``(a y; base)_inf / (b y; base)_inf``.

        From ``f(y) (1 - b y) = f(base y) (1 - a y)``; every coefficient keeps full
        relative precision. Dividing the two product expansions instead leaves
        absolute errors ~1e-17 on coefficients that are ~1e-40 by k = 13, which
        N^k (entries up to ~1e36 at q = 0.6) turns into O(1e19) errors.
        """
        out = [mpmath.mpc(1)]
        for k in range(1, self.D + 1):
            out.append(out[-1] * (b - a * base ** (k - 1)) / (1 - base**k))
        return out

    def O(self, v: Vec) -> Vec:
        return self.series(self.exp_coeffs(1), v)

    def Oinv(self, v: Vec) -> Vec:
        return self.series(self.exp_coeffs(-1), v)

    # closed forms: each entry is (X, image) as vector maps
    def forward(self, key: str, alpha=0):
        q, lam, L = self.q, self.lam, self
        geo = lambda v: L.series(L.geometric(q * lam**2), v)
        ratio = lambda a: (lambda v: L.series(L.poch_ratio(a, q * lam**2, q**2), v))
        al = mpmath.mpmathify(alpha)
        table = {
            "e1": (lambda v: L.e(1, v), lambda v: L.e(1, v)),
            "e2": (lambda v: L.e(2, v),
                   lambda v: _lin(L.e(2, v), -1, geo(L.e(1, L.qh(0, -1, v))))),
            "f1": (lambda v: L.f(1, v),
                   lambda v: _lin(L.f(1, v), -1, geo(L.f(2, L.qh(1, 0, v))))),
            "f2": (lambda v: L.f(2, v), lambda v: L.f(2, v)),
            "qh1": (lambda v: L.qh(al, 0, v),
                    lambda v: ratio(q ** (2 * al + 1) * lam**2)(L.qh(al, 0, v))),
            "qh2": (lambda v: L.qh(0, al, v),
                    lambda v: ratio(q ** (-2 * al + 1) * lam**2)(L.qh(0, al, v))),
            "qh1+h2": (lambda v: L.qh(al, al, v), lambda v: L.qh(al, al, v)),
            "qdiff+": (lambda v: L.qh(0.5, -0.5, v), lambda v: geo(L.qh(0.5, -0.5, v))),
            "qdiff-": (lambda v: L.qh(-0.5, 0.5, v),
                       lambda v: _lin(L.qh(-0.5, 0.5, v), -lam**2 / q, L.N(L.qh(-0.5, 0.5, v)))),
        }
        return table[key]

    def inverse(self, key: str, alpha=0):
        q, lam, L = self.q, self.lam, self
        ratio = lambda a: (lambda v: L.series(L.poch_ratio(a, lam**2 / q, q**-2), v))
        al = mpmath.mpmathify(alpha)
        table = {
            "e1": (lambda v: L.e(1, v), lambda v: L.e(1, v)),
            "e2": (lambda v: L.e(2, v), lambda v: _lin(L.e(2, v), 1, L.e(1, L.qh(0, -1, v)))),
            "f1": (lambda v: L.f(1, v), lambda v: _lin(L.f(1, v), 1, L.f(2, L.qh(1, 0, v)))),
            "f2": (lambda v: L.f(2, v), lambda v: L.f(2, v)),
            "qh1": (lambda v: L.qh(al, 0, v),
                    lambda v: ratio(q ** (2 * al - 1) * lam**2)(L.qh(al, 0, v))),
            "qh2": (lambda v: L.qh(0, al, v),
                    lambda v: ratio(q ** (-2 * al - 1) * lam**2)(L.qh(0, al, v))),
        }
        return table[key]

    def to_operator(self, fn) -> Operator:
        D = self.D
        data = np.zeros((D * D, D * D), dtype=complex)
        for n in range(D):
            for m in range(D):
                for (i, j), c in fn({(n, m): mpmath.mpc(1)}).items():
                    data[i * D + j, n * D + m] = complex(c)
        w1, w2 = osc_rep(1, D, self.p).space, osc_rep(2, D, self.p).space
        return Operator((w1, w2), data)


def _lin(u: Vec, c, v: Vec) -> Vec:
    """``u + c v``."""
    out = dict(u)
    for k, x in v.items():
        _add(out, k, c * x)
    return out


def _require_disc(p: QParams) -> None:
    if not abs(p.q) < 1:
        raise ConvergenceDomain(
            f"convergence domain: the Pochhammer-ratio series need |q| < 1, got q={p.q}")


_MARGIN = {"e2": 1, "f1": 1, "f2": 1}


def _route_gap(p: QParams, D: int, b: SeriesBudget, alpha: complex) -> float:
    """Gap between product-division and functional-equation coefficients, scaled
    by ``1 + |c_k|`` (the division route is only absolutely accurate)."""
    q, lam = p.q, p.lam
    a = qpow(q, 2 * alpha + 1) * lam**2
    div = pochhammer_ratio_coeffs_division(a, q * lam**2, q**2, D, b)
    rec = pochhammer_ratio_coeffs(a, q * lam**2, q**2, D)
    return float(np.max(np.abs(div - rec) / (1 + np.abs(rec))))


def hadamard_sides(identity_id: str, alpha: complex, D: int, p: QParams,
                   b: SeriesBudget = SeriesBudget()) -> tuple[Operator, Operator, int]:
    """(exact conjugation, closed form, margin) for one identity."""
    if identity_id not in HADAMARD_IDS:
        raise ValueError(f"unknown Hadamard identity {identity_id!r}")
    _require_disc(p)
    with mpmath.workdps(HP_DPS):
        L = _Lattice(D, p, b)
        if identity_id.startswith("inv_"):
            key = identity_id[4:]
            X, closed = L.inverse(key, alpha)
            conj = lambda v: L.O(X(L.Oinv(v)))
        else:
            key = identity_id
            X, closed = L.forward(key, alpha)
            conj = lambda v: L.Oinv(X(L.O(v)))
        return L.to_operator(conj), L.to_operator(closed), _MARGIN.get(key, 0)


def hadamard_check(identity_id: str, alpha: complex, D: int, p: QParams,
                   b: SeriesBudget = SeriesBudget(), tol: float = 1e-9) -> CheckReport:
    with timed() as t:
        lhs, rhs, margin = hadamard_sides(identity_id, alpha, D, p, b)
        mask = IndexMask.total_degree(["W1", "W2"], D - 1 - margin)
        r = residual(lhs, rhs, mask)
        notes = {"dps": HP_DPS}
        if identity_id in ("qh1", "qh2"):
            notes["coeff_route_gap"] = _route_gap(p, D, b, alpha if identity_id == "qh1" else -alpha)
    return CheckReport(f"hadamard:{identity_id}", {"q": p.q, "alpha": alpha, "D": D}, r, tol,
                       mask.description, notes, t[0])


ROUNDTRIP_GENS = ("e2", "f1", "qh1", "qh2")


def hadamard_roundtrip_check(gen: str, alpha: complex, D: int, p: QParams,
                             b: SeriesBudget = SeriesBudget(), tol: float = 1e-9) -> CheckReport:
    """Substitute the inverse closed forms into the forward closed form.

    ``X -> O X O^-1`` is an algebra map fixing series in ``e1 f2``, so pushing
    every generator of the forward expression for ``O^-1 G O`` through the
    inverse formulas must give back ``G``. The matrix ``O`` is never used.
    """
    if gen not in ROUNDTRIP_GENS:
        raise ValueError(f"no round trip defined for {gen!r}")
    _require_disc(p)
    with timed() as t:
        with mpmath.workdps(HP_DPS):
            L = _Lattice(D, p, b)
            q, lam = L.q, L.lam
            geo = lambda v: L.series(L.geometric(q * lam**2), v)
            if gen == "e2":
                G = L.inverse("e2")[0]
                back = lambda v: _lin(L.inverse("e2")[1](v), -1, geo(L.e(1, L.inverse("qh2", -1)[1](v))))
            elif gen == "f1":
                G = L.inverse("f1")[0]
                back = lambda v: _lin(L.inverse("f1")[1](v), -1, geo(L.f(2, L.inverse("qh1", 1)[1](v))))
            else:
                al = mpmath.mpmathify(alpha)
                a = q ** (2 * al + 1) * lam**2 if gen == "qh1" else q ** (-2 * al + 1) * lam**2
                G = L.forward(gen, alpha)[0]
                inv = L.inverse(gen, alpha)[1]
                back = lambda v: L.series(L.poch_ratio(a, q * lam**2, q**2), inv(v))
            lhs, rhs = L.to_operator(back), L.to_operator(G)
        mask = IndexMask.total_degree(["W1", "W2"], D - 2)
        r = residual(lhs, rhs, mask)
    return CheckReport(f"hadamard_roundtrip:{gen}", {"q": p.q, "alpha": alpha, "D": D}, r, tol,
                       mask.description, {"dps": HP_DPS}, t[0])
