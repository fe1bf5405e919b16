"""Residual tables and trend classification for the asymptotic formulas.

Every residual is (exact - approximation) divided by the error scale of the
claim being tested. All the claims are o(...) or O(...) with no explicit
constants, so the verdicts look at how the scaled residual trends with n,
not at absolute bounds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .asymptotics import (
    Lemma31Constant,
    LogPair,
    SumCoefficients,
    cipolla_p,
    lemma31_prediction,
    robin_gap_prediction,
    sum_expansion,
)
from .errors import DegenerateResidualWarning, OutOfRangeError
from .prime_engine import PrimeStore

TARGETS = (
    "sum_m0",
    "sum_m1",
    "sum_m2",
    "pn_m2",
    "lemma31_paper",
    "lemma31_derived",
    "robin_gap",
)
Target = Literal[
    "sum_m0", "sum_m1", "sum_m2", "pn_m2", "lemma31_paper", "lemma31_derived", "robin_gap"
]

BOUNDED_SLOPE = 0.05


@dataclass(frozen=True)
class GridSpec:
    """Geometric grid of ``points`` integers from n_min to n_max."""

    n_min: int = 10**4
    n_max: int = 10**7
    points: int = 13

    def __post_init__(self) -> None:
        if self.n_min < 10:
            raise ValueError(f"n_min must be >= 10, got {self.n_min}")
        if self.n_max <= self.n_min:
            raise ValueError("n_max must exceed n_min")
        if self.points < 3:
            raise ValueError(f"need at least 3 grid points, got {self.points}")

    def values(self) -> list[int]:
        raw = np.geomspace(self.n_min, self.n_max, self.points)
        vals = sorted({int(round(v)) for v in raw})
        vals[0], vals[-1] = self.n_min, self.n_max
        return vals


@dataclass(frozen=True)
class ResidualRow:
    n: int
    exact: int
    approx: float
    abs_err: float
    scaled_err: float
    conversion_noise: float  # half an ulp of abs_err, the only rounding in the row


def _exact_and_approx(target: str, n: int, store: PrimeStore, coefficients: SumCoefficients):
    lp = LogPair.of(n)
    if target.startswith("sum_m"):
        m = int(target[-1])
        return store.prefix_sum(n), sum_expansion(n, m, coefficients), n * n / (2 * lp.L**m)
    if target == "pn_m2":
        return store.nth_prime(n), cipolla_p(n, 2), n / lp.L**2
    if target.startswith("lemma31_"):
        c = Lemma31Constant.parse(target.split("_", 1)[1])
        approx = lemma31_prediction(n, store.nth_prime(n), c)
        return store.prefix_sum(n), approx, n * n / lp.L**2
    if target == "robin_gap":
        gap = store.prefix_sum(n - 1) - n * store.nth_prime(n // 2)
        return gap, robin_gap_prediction(n), n * n * lp.LL / lp.L
    raise ValueError(f"unknown residual target {target!r}")


def residual_table(
    target: Target,
    grid: GridSpec | Sequence[int],
    store: PrimeStore,
    coefficients: SumCoefficients = "printed",
) -> list[ResidualRow]:
    """One row per grid point, ascending in n.

    ``coefficients`` selects the sum polynomials for the ``sum_m*`` targets.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown residual target {target!r}")
    ns = grid.values() if isinstance(grid, GridSpec) else sorted(grid)
    if not ns or not store.covers(ns[-1]):
        raise OutOfRangeError(f"grid reaches {ns[-1] if ns else None}, store holds {store.count}")
    rows = []
    for n in ns:
        exact, approx, scale = _exact_and_approx(target, n, store, coefficients)
        abs_err = float(exact - Fraction(approx))
        rows.append(ResidualRow(n, exact, approx, abs_err, abs_err / scale, math.ulp(abs_err) / 2))
    return rows


@dataclass(frozen=True)
class TrendVerdict:
    verdict: Literal["decreasing", "bounded", "diverging"]
    slope: float
    excluded: tuple[int, ...] = ()


def trend_verdict(rows: Sequence[ResidualRow]) -> TrendVerdict:
    """Least-squares slope of log|scaled_err| against log log n.

    |slope| < 0.05 is "bounded"; below that "decreasing", above "diverging".
    Rows with a zero scaled error are left out of the fit and reported in
    ``excluded``.
    """
    keep = [r for r in rows if r.scaled_err != 0]
    excluded = tuple(r.n for r in rows if r.scaled_err == 0)
    if excluded:
        warnings.warn(f"zero scaled residual at n={list(excluded)}", DegenerateResidualWarning)
    if len(keep) < 3:
        raise ValueError(f"need at least 3 nonzero residuals, have {len(keep)}")
    x = np.log(np.log([float(r.n) for r in keep]))
    y = np.log(np.abs([r.scaled_err for r in keep]))
    slope = float(np.polyfit(x, y, 1)[0])
    if slope < -BOUNDED_SLOPE:
        verdict = "decreasing"
    elif slope > BOUNDED_SLOPE:
        verdict = "diverging"
    else:
        verdict = "bounded"
    return TrendVerdict(verdict, slope, excluded)


def lemma31_c_hat(n: int, store: PrimeStore) -> float:
    """Empirical value of 8 x (coefficient of n^2/L^2) in S_n - n p_n/2.

    Computed as (S_n - n p_n/2 + n^2/4 + n^2/(2L) - n^2 LL/(4L^2)) * 8L^2/n^2,
    so -49 and -5 are the two published/derived candidates.
    """
    lp = LogPair.of(n)
    exact_part = Fraction(2 * store.prefix_sum(n) - n * store.nth_prime(n), 2) + Fraction(n * n, 4)
    resid = float(exact_part) + n * n / (2 * lp.L) - n * n * lp.LL / (4 * lp.L**2)
    return resid * 8 * lp.L**2 / (n * n)


@dataclass(frozen=True)
class Lemma31Estimate:
    points: tuple[tuple[int, float], ...]
    nearer: Lemma31Constant

    @property
    def final(self) -> float:
        return self.points[-1][1]


def lemma31_constant_estimate(grid: GridSpec | Sequence[int], store: PrimeStore) -> Lemma31Estimate:
    ns = grid.values() if isinstance(grid, GridSpec) else sorted(grid)
    if ns[0] < 10**4:
        raise ValueError("grid must start at n >= 10^4")
    if not store.covers(ns[-1]):
        raise OutOfRangeError(f"grid reaches {ns[-1]}, store holds {store.count}")
    points = tuple((n, lemma31_c_hat(n, store)) for n in ns)
    last = points[-1][1]
    nearer = min(Lemma31Constant, key=lambda c: abs(last - 8 * float(c.value)))
    return Lemma31Estimate(points, nearer)


def expansion_relative_errors(
    n: int, store: PrimeStore, coefficients: SumCoefficients = "printed"
) -> list[float]:
    """|S_n - sum_expansion(n, m)| / S_n for m = 0, 1, 2."""
    exact = store.prefix_sum(n)
    return [abs(float(exact - Fraction(sum_expansion(n, m, coefficients)))) / exact for m in (0, 1, 2)]
