"""Closed-form asymptotic formulas for p_n and S_n = p_1 + ... + p_n.

Everything is expressed through ``L = ln n`` and ``LL = ln ln n``. The
truncated expansions used here are

    p_n ~ n [L + LL - 1 + P1(LL)/L - P2(LL)/L^2]
    S_n ~ n^2/2 [L + LL - 3/2 + S1(LL)/L - S2(LL)/L^2]

with the sign of each correction fixed explicitly (first order added, second
order subtracted) rather than through a (-1)^r factor.

Two coefficient sets exist for the sum polynomials. ``"printed"`` is the
published one (S1 = x - 3, S2 = x^2/2 - 7x/2 + 27/4). ``"corrected"``
(S1 = x - 5/2, S2 = x^2/2 - 7x/2 + 29/4) comes from redoing the term-by-term
integration with the x lnln(x)/ln(x) term integrated to second order; it is
the one that tracks real prime sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Literal, Sequence

import mpmath
import numpy as np

from .errors import DomainError

SumCoefficients = Literal["printed", "corrected"]
ORDERS = (0, 1, 2)
HIGH_PRECISION_DPS = 40

ROBIN_COEFFICIENT = (2 * math.log(2) - 1) / 4


class RationalPoly:
    """Polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Fraction | int | str]):
        cs = [Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    def __call__(self, x):
        # Horner; exact for Fraction/int arguments, float arithmetic otherwise
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if isinstance(x, mpmath.mpf):
            acc = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
            return acc
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"


CIPOLLA_P = {
    1: RationalPoly([-2, 1]),
    2: RationalPoly([Fraction(11, 2), -3, Fraction(1, 2)]),
}

SUM_S: dict[str, dict[int, RationalPoly]] = {
    "printed": {
        1: RationalPoly([-3, 1]),
        2: RationalPoly([Fraction(27, 4), Fraction(-7, 2), Fraction(1, 2)]),
    },
    "corrected": {
        1: RationalPoly([Fraction(-5, 2), 1]),
        2: RationalPoly([Fraction(29, 4), Fraction(-7, 2), Fraction(1, 2)]),
    },
}


class Lemma31Constant(Enum):
    """Coefficient of n^2/L^2 in the S_n - n p_n/2 expansion.

    PAPER is the published -49/8; DERIVED is -5/8, obtained by subtracting the
    second-order Cipolla expansion of n p_n / 2 from the printed sum expansion.
    """

    PAPER = Fraction(-49, 8)
    DERIVED = Fraction(-5, 8)

    @classmethod
    def parse(cls, choice: str | Lemma31Constant) -> Lemma31Constant:
        if isinstance(choice, cls):
            return choice
        try:
            return cls[choice.upper()]
        except KeyError:
            raise ValueError(f"unknown Lemma 3.1 constant {choice!r}") from None


@dataclass(frozen=True)
class LogPair:
    n: int
    L: float
    LL: float

    @classmethod
    def of(cls, n: int) -> LogPair:
        _require(n, 3)
        L = math.log(n)
        return cls(n, L, math.log(L))


def _require(n: int, n_min: int) -> None:
    if n < n_min:
        raise DomainError(f"n must be >= {n_min}, got {n}")


def _check_order(m: int) -> None:
    if m not in ORDERS:
        raise ValueError(f"expansion order must be one of {ORDERS}, got {m}")


def _sum_polys(coefficients: SumCoefficients) -> dict[int, RationalPoly]:
    try:
        return SUM_S[coefficients]
    except KeyError:
        raise ValueError(f"unknown coefficient set {coefficients!r}") from None


def cipolla_bracket(lp: LogPair, m: int) -> float:
    """p_n / n truncated at order m."""
    _check_order(m)
    val = lp.L + lp.LL - 1.0
    if m >= 1:
        val += CIPOLLA_P[1](lp.LL) / lp.L
    if m >= 2:
        val -= CIPOLLA_P[2](lp.LL) / lp.L**2
    return val


def cipolla_p(n: int, m: int) -> float:
    """Cipolla approximation to the n-th prime, truncated at order m."""
    return n * cipolla_bracket(LogPair.of(n), m)


def sum_bracket(lp: LogPair, m: int, coefficients: SumCoefficients = "printed") -> float:
    """S_n / (n^2/2) truncated at order m."""
    _check_order(m)
    polys = _sum_polys(coefficients)
    val = lp.L + lp.LL - 1.5
    if m >= 1:
        val += polys[1](lp.LL) / lp.L
    if m >= 2:
        val -= polys[2](lp.LL) / lp.L**2
    return val


def sum_expansion(n: int, m: int, coefficients: SumCoefficients = "printed") -> float:
    """Asymptotic approximation to S_n truncated at order m.

    ``m=0`` is n^2/2 (ln n + ln ln n - 3/2).
    """
    return n * n / 2 * sum_bracket(LogPair.of(n), m, coefficients)


def mandl_rhs_refined(n: int, p_n: int, loglog_power: int = 2) -> float:
    """n p_n/2 - n^2/4 - n^2/(2L) + n^2 LL/(4 L^k) with k = ``loglog_power``.

    k=2 is the form printed alongside the n >= 835 claim. k=1 is the form
    that actually reproduces that threshold (see ``inequalities``).
    """
    lp = LogPair.of(n)
    n2 = float(n * n)
    return n * p_n / 2 - n2 / 4 - n2 / (2 * lp.L) + n2 * lp.LL / (4 * lp.L**loglog_power)


def mandl_rhs_refined_mp(n: int, p_n: int, loglog_power: int = 2, dps: int = HIGH_PRECISION_DPS):
    """:func:`mandl_rhs_refined` evaluated with ``dps`` significant digits."""
    _require(n, 3)
    with mpmath.workdps(dps):
        L = mpmath.log(n)
        LL = mpmath.log(L)
        n2 = mpmath.mpf(n * n)
        return (
            mpmath.mpf(n * p_n) / 2
            - n2 / 4
            - n2 / (2 * L)
            + n2 * LL / (4 * L**loglog_power)
        )


def mandl_rhs_refined_array(n: np.ndarray, p_n: np.ndarray, loglog_power: int = 2) -> np.ndarray:
    """Vectorised :func:`mandl_rhs_refined` in float64."""
    n = np.asarray(n)
    if n.size and n.min() < 3:
        raise DomainError("n must be >= 3")
    nf = n.astype(np.float64)
    L = np.log(nf)
    LL = np.log(L)
    n2 = nf * nf
    half_np = (n.astype(np.int64) * np.asarray(p_n, dtype=np.int64)).astype(np.float64) / 2
    return half_np - n2 / 4 - n2 / (2 * L) + n2 * LL / (4 * L**loglog_power)


def lemma31_prediction(n: int, p_n: int, c: Lemma31Constant | str = Lemma31Constant.DERIVED) -> float:
    """mandl_rhs_refined(n) + c * n^2 / L^2."""
    c = Lemma31Constant.parse(c)
    lp = LogPair.of(n)
    return mandl_rhs_refined(n, p_n) + float(c.value) * n * n / lp.L**2


def robin_gap_prediction(n: int) -> float:
    """Leading-order prediction (2 ln 2 - 1) n^2 / 4 for S_{n-1} - n p_{[n/2]}."""
    _require(n, 4)
    return ROBIN_COEFFICIENT * n * n
