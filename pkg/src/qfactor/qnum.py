"""Scalar q-arithmetic: q-numbers, q-binomials, q-exponential coefficients,
Pochhammer-ratio series and the normalisation series phi, phi1, phi2.

Everything here works on python/numpy complex scalars. Power series in a
locally nilpotent operator are summed by :func:`nilpotent_power_series`,
which is exact once the nilpotency bound is reached.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QParams", "SeriesBudget", "SeriesSum", "DegenerateBase", "SeriesDivergence",
    "InsufficientCoefficients", "qpow", "q_number", "q_int", "q_factorial",
    "q_binomial", "exp_q_coeffs", "inv_exp_q_coeffs", "geometric_coeffs",
    "pochhammer_product_coeffs", "pochhammer_ratio_coeffs",
    "pochhammer_ratio_coeffs_division", "series_sum", "phi_series",
    "phi_i_series", "nilpotent_power_series",
]

ROOT_OF_UNITY_ORDER = 64
ROOT_OF_UNITY_TOL = 1e-6


class DegenerateBase(ValueError):
    """Base of a q-bracket equals 1 (classical limit)."""


class SeriesDivergence(ArithmeticError):
    def __init__(self, k: int, message: str = ""):
        self.k = k
        super().__init__(message or f"series divergence: terms stop decaying at k={k}")


class InsufficientCoefficients(ValueError):
    pass


def qpow(q: complex, a: complex) -> complex:
    """``q**a`` through the principal logarithm."""
    return complex(cmath.exp(a * cmath.log(q)))


@dataclass(frozen=True)
class QParams:
    q: complex
    lam: complex = field(init=False)

    def __post_init__(self):
        q = complex(self.q)
        if q == 0:
            raise ValueError("q must be nonzero")
        for k in range(1, ROOT_OF_UNITY_ORDER + 1):
            if abs(q**k - 1) <= ROOT_OF_UNITY_TOL:
                raise DegenerateBase(f"q is (numerically) a root of unity of order {k}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lam", q - 1 / q)

    @property
    def is_positive_real(self) -> bool:
        return self.q.imag == 0 and self.q.real > 0

    def pow(self, a: complex) -> complex:
        return qpow(self.q, a)

    def inverse(self) -> "QParams":
        return QParams(1 / self.q)


@dataclass(frozen=True)
class SeriesBudget:
    max_terms: int = 200
    tail_tol: float = 1e-16

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")
        if self.tail_tol < 0:
            raise ValueError("tail_tol must be >= 0")


@dataclass(frozen=True)
class SeriesSum:
    value: complex
    terms: int
    stop: str  # "tail_tol" or "max_terms"


def q_number(n: int, p: QParams) -> complex:
    if n == 0:
        return 0j
    q = p.q
    return (q**n - q ** (-n)) / p.lam


def q_int(k: int, base: complex) -> complex:
    """``(k)_base = (1 - base**k) / (1 - base)``."""
    if base == 1:
        raise DegenerateBase("degenerate base 1; use the classical value k")
    if k == 0:
        return 0j
    if k == 1:
        return 1 + 0j
    return (1 - base**k) / (1 - base)


def q_factorial(k: int, base: complex) -> complex:
    out = 1 + 0j
    for j in range(1, k + 1):
        out *= q_int(j, base)
    return out


def q_binomial(n: int, k: int, base: complex) -> complex:
    if base == 1:
        raise DegenerateBase("degenerate base 1")
    if k < 0 or k > n:
        return 0j
    if k == 0 or k == n:
        return 1 + 0j
    k = min(k, n - k)
    out = 1 + 0j
    # multiplicative recurrence: prod_{j=1..k} (1 - b^{n-k+j}) / (1 - b^j)
    for j in range(1, k + 1):
        out *= (1 - base ** (n - k + j)) / (1 - base**j)
    return out


def exp_q_coeffs(n_terms: int, base: complex) -> np.ndarray:
    """Coefficients ``1/(k)_base!`` of ``exp_base``."""
    c = np.empty(n_terms, dtype=complex)
    acc = 1 + 0j
    for k in range(n_terms):
        if k:
            acc /= q_int(k, base)
        c[k] = acc
    return c


def inv_exp_q_coeffs(n_terms: int, base: complex) -> np.ndarray:
    """Coefficients of ``exp_base(y)**-1 = exp_{1/base}(-y)``."""
    c = exp_q_coeffs(n_terms, 1 / base)
    return c * (-1.0) ** np.arange(n_terms)


def geometric_coeffs(n_terms: int, ratio: complex, power: int = -1) -> np.ndarray:
    """Coefficients of ``(1 - ratio*y)**power`` for power in {-1, +1}."""
    if power == -1:
        return ratio ** np.arange(n_terms, dtype=complex)
    if power == 1:
        c = np.zeros(n_terms, dtype=complex)
        c[0] = 1
        if n_terms > 1:
            c[1] = -ratio
        return c
    raise ValueError("power must be +1 or -1")


def pochhammer_product_coeffs(a: complex, base: complex, n_terms: int,
                              budget: SeriesBudget = SeriesBudget()) -> tuple[np.ndarray, int, str]:
    """Power-series coefficients of ``(a*y; base)_inf`` up to ``y**(n_terms-1)``.

    Multiplies factors ``(1 - a*base**j*y)`` until ``|a*base**j|`` drops below
    ``budget.tail_tol``. Only meaningful for ``|base| < 1``.
    """
    if abs(base) >= 1:
        raise SeriesDivergence(0, "convergence domain: infinite Pochhammer product needs |base| < 1")
    c = np.zeros(n_terms, dtype=complex)
    c[0] = 1
    factor = complex(a)
    j = 0
    stop = "max_terms"
    while j < budget.max_terms:
        if abs(factor) < budget.tail_tol:
            stop = "tail_tol"
            break
        c[1:] = c[1:] - factor * c[:-1]
        factor *= base
        j += 1
    if stop == "max_terms" and abs(factor) >= budget.tail_tol:
        raise SeriesDivergence(j, f"series divergence: Pochhammer factor still {abs(factor):.3e} at k={j}")
    return c, j, stop


def pochhammer_ratio_coeffs_division(a: complex, b: complex, base: complex, n_terms: int,
                                     budget: SeriesBudget = SeriesBudget()) -> np.ndarray:
    """``(a*y;base)_inf / (b*y;base)_inf`` by power-series division of the two products."""
    num, _, _ = pochhammer_product_coeffs(a, base, n_terms, budget)
    den, _, _ = pochhammer_product_coeffs(b, base, n_terms, budget)
    out = np.zeros(n_terms, dtype=complex)
    for k in range(n_terms):
        out[k] = (num[k] - np.dot(den[1:k + 1], out[k - 1::-1][:k])) / den[0]
    return out


def pochhammer_ratio_coeffs(a: complex, b: complex, base: complex, n_terms: int) -> np.ndarray:
    """Formal power series ``f(y)`` with ``f(0)=1`` and ``f(y)/f(base*y) = (1-a*y)/(1-b*y)``.

    For ``|base| < 1`` this is ``(a*y;base)_inf / (b*y;base)_inf``; for other
    non-root-of-unity bases it is the formal continuation of that ratio.
    """
    c = np.zeros(n_terms, dtype=complex)
    c[0] = 1
    for k in range(1, n_terms):
        denom = 1 - base**k
        if abs(denom) < ROOT_OF_UNITY_TOL:
            raise DegenerateBase(f"base**{k} == 1")
        c[k] = c[k - 1] * (b - a * base ** (k - 1)) / denom
    return c


def series_sum(term: Callable[[int], complex], budget: SeriesBudget, start: int = 1) -> SeriesSum:
    """Sum ``term(k)`` for ``k >= start`` until ``|term| < tail_tol`` or the budget runs out."""
    total = 0j
    prev = None
    first_bad = None
    n = 0
    for k in range(start, start + budget.max_terms):
        t = term(k)
        if abs(t) < budget.tail_tol:
            return SeriesSum(total, n, "tail_tol")
        if prev is not None and abs(t) >= abs(prev) and first_bad is None:
            first_bad = k
        elif prev is not None and abs(t) < abs(prev):
            first_bad = None
        total += t
        prev = t
        n += 1
    # exhausted: accept only if the tail is already negligible relative to the sum
    if prev is not None and abs(prev) <= 1e-15 * max(1.0, abs(total)):
        return SeriesSum(total, n, "max_terms")
    raise SeriesDivergence(first_bad if first_bad is not None else start + budget.max_terms)


def _exp_series(coef: Callable[[int], complex], x: complex, budget: SeriesBudget) -> tuple[complex, SeriesSum]:
    if x == 0:
        return 1 + 0j, SeriesSum(0j, 0, "tail_tol")
    s = series_sum(lambda k: coef(k) * x**k / k, budget)
    return complex(np.exp(s.value)), s


def phi_series(x: complex, mu: complex, p: QParams, b: SeriesBudget = SeriesBudget(),
               *, info: bool = False):
    """Verma image of the L-operator normalisation ``phi(x)``."""
    q = p.q
    a, c = qpow(q, mu + 1), qpow(q, -(mu + 1))
    val, s = _exp_series(lambda k: -(a**k + c**k) / (1 + q ** (2 * k)), x, b)
    return (val, s) if info else val


def phi_i_series(i: int, x: complex, p: QParams, b: SeriesBudget = SeriesBudget(),
                 *, info: bool = False):
    q = p.q
    if i == 1:
        coef = lambda k: -(q**k) / (1 + q ** (2 * k))
    elif i == 2:
        coef = lambda k: -(q ** (-k)) / (1 + q ** (2 * k))
    else:
        raise ValueError("i must be 1 or 2")
    val, s = _exp_series(coef, x, b)
    return (val, s) if info else val


def nilpotent_power_series(coeffs: Sequence[complex], N):
    """``sum_k coeffs[k] N**k`` for nilpotent ``N`` (ndarray or tensor.Operator)."""
    from .tensor import Operator  # local: tensor imports nothing from here at module level

    wrap = isinstance(N, Operator)
    mat = N.data if wrap else np.asarray(N)
    dim = mat.shape[0]
    out = coeffs[0] * np.eye(dim, dtype=complex)
    power = np.eye(dim, dtype=complex)
    k = 0
    while True:
        k += 1
        power = power @ mat
        if not power.any():
            break
        if k >= dim:
            raise ValueError("operator is not nilpotent")
        if k >= len(coeffs):
            raise InsufficientCoefficients(
                f"insufficient coefficients: need more than {len(coeffs)} for nilpotency index > {k}")
        out = out + coeffs[k] * power
    return Operator(N.spaces, out) if wrap else out
