"""Adaptive Simpson quadrature and numerical checks of the term-by-term integrals.

The integral of the truncated Cipolla expansion splits into eight pieces,
``x ln x + x lnln x - x + (x lnln x - 2x)/ln x - (x lnln^2 x - 6x lnln x + 11x)/(2 ln^2 x)``,
each with a claimed asymptotic antiderivative. :func:`verify_term_expansion`
integrates each piece numerically from 3 and divides what is left after
removing the claimed main terms by the claimed error scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import DomainError, QuadratureError

DEFAULT_TOL = 1e-10
VERIFY_TOL = 1e-13
MAX_DEPTH = 50
LOWER_LIMIT = 3


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = MAX_DEPTH,
) -> tuple[float, float]:
    """Integrate f over [a, b]; returns (value, error_estimate).

    ``tol`` is relative: the target absolute error is ``tol * (1 + |I|)``,
    with |I| taken from a 16-panel composite Simpson pass. Each accepted
    panel gets the Richardson correction ``(S2 - S1) / 15``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if a == b:
        return 0.0, 0.0
    if a > b:
        val, err = adaptive_simpson(f, b, a, tol, max_depth)
        return -val, err

    panels = 16
    h = (b - a) / panels
    xs = [a + k * h for k in range(panels + 1)]
    xs[-1] = b
    fs = [f(x) for x in xs]
    rough = h / 3 * (fs[0] + fs[-1] + 4 * sum(fs[1:-1:2]) + 2 * sum(fs[2:-1:2]))
    eps = tol * (1 + abs(rough)) / (panels // 2)

    pieces: list[float] = []
    err_total = 0.0
    # each stack entry: (a, b, fa, fm, fb, whole, eps, depth); processed left to right
    stack = []
    for k in range(panels - 2, -1, -2):
        x0, x2 = xs[k], xs[k + 2]
        whole = (x2 - x0) / 6 * (fs[k] + 4 * fs[k + 1] + fs[k + 2])
        stack.append((x0, x2, fs[k], fs[k + 1], fs[k + 2], whole, eps, 0))
    while stack:
        lo, hi, flo, fmid, fhi, whole, e, depth = stack.pop()
        mid = (lo + hi) / 2
        lm = (lo + mid) / 2
        rm = (mid + hi) / 2
        flm = f(lm)
        frm = f(rm)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - whole
        if abs(delta) <= 15 * e:
            pieces.append(left + right + delta / 15)
            err_total += abs(delta) / 15
            continue
        if depth >= max_depth or not lo < lm < mid < rm < hi:
            raise QuadratureError(
                f"no convergence on [{lo}, {hi}] at depth {depth} (|delta|={abs(delta):.3g})"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, e / 2, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, e / 2, depth + 1))
    return math.fsum(pieces), err_total


# -- integrand terms -----------------------------------------------------------


def _lnln(x: float) -> float:
    return math.log(math.log(x))


class IntegrandTerm(Enum):
    """One piece of the truncated Cipolla integrand, with its printed multiplier."""

    X_LN_X = ("x_ln_x", Fraction(1), lambda x: x * math.log(x))
    X_LNLN_X = ("x_lnln_x", Fraction(1), lambda x: x * _lnln(x))
    X = ("x", Fraction(-1), lambda x: x)
    X_LNLN_OVER_LN = ("x_lnln_over_ln", Fraction(1), lambda x: x * _lnln(x) / math.log(x))
    X_OVER_LN = ("x_over_ln", Fraction(-2), lambda x: x / math.log(x))
    X_LNLN_SQ_OVER_LN2 = (
        "x_lnln_sq_over_ln2",
        Fraction(-1, 2),
        lambda x: x * _lnln(x) ** 2 / math.log(x) ** 2,
    )
    X_LNLN_OVER_LN2 = ("x_lnln_over_ln2", Fraction(3), lambda x: x * _lnln(x) / math.log(x) ** 2)
    X_OVER_LN2 = ("x_over_ln2", Fraction(-11, 2), lambda x: x / math.log(x) ** 2)

    def __init__(self, term_id: str, multiplier: Fraction, fn: Callable[[float], float]):
        self.term_id = term_id
        self.multiplier = multiplier
        self.fn = fn

    @classmethod
    def from_id(cls, term_id: str) -> IntegrandTerm:
        for term in cls:
            if term.term_id == term_id:
                return term
        raise ValueError(f"unknown integrand term {term_id!r}")


def integrand_sum(x: float) -> float:
    """The full second-order integrand: sum of multiplier * term over all eight."""
    return sum(float(t.multiplier) * t.fn(x) for t in IntegrandTerm)


# (coefficient, power of n, power of ln n, power of ln ln n)
Monomial = tuple[Fraction, int, int, int]


@dataclass(frozen=True)
class ExpansionClaim:
    """Asymptotic value claimed for multiplier * integral_3^n term(x) dx.

    ``main_terms`` carry the multiplier, as printed. ``error_scale`` is the
    (n, ln n, ln ln n) exponent triple of the O(...) remainder; (0, 0, 0) is O(1).
    """

    term: IntegrandTerm
    main_terms: tuple[Monomial, ...]
    error_scale: tuple[int, int, int]

    @property
    def error_exponent(self) -> int:
        """Power of ln n in the denominator of the error scale."""
        return -self.error_scale[1]

    def main_value(self, n: float) -> float:
        return _evaluate(self.main_terms, n)

    def scale_value(self, n: float) -> float:
        return _evaluate(((Fraction(1),) + self.error_scale,), n)


def _evaluate(monomials: Iterable[Monomial], n: float) -> float:
    L = math.log(n)
    LL = math.log(L)
    return math.fsum(float(c) * n**a * L**b * LL**k for c, a, b, k in monomials)


F = Fraction
CLAIMS: dict[IntegrandTerm, ExpansionClaim] = {
    c.term: c
    for c in (
        ExpansionClaim(IntegrandTerm.X_LN_X, ((F(1, 2), 2, 1, 0), (F(-1, 4), 2, 0, 0)), (0, 0, 0)),
        ExpansionClaim(
            IntegrandTerm.X_LNLN_X,
            ((F(1, 2), 2, 0, 1), (F(-1, 4), 2, -1, 0), (F(-1, 8), 2, -2, 0)),
            (2, -3, 0),
        ),
        ExpansionClaim(IntegrandTerm.X, ((F(-1, 2), 2, 0, 0),), (0, 0, 0)),
        ExpansionClaim(
            IntegrandTerm.X_LNLN_OVER_LN,
            ((F(1, 2), 2, -1, 1), (F(1, 4), 2, -2, 1), (F(-1, 4), 2, -1, 0)),
            (2, -3, 1),
        ),
        ExpansionClaim(IntegrandTerm.X_OVER_LN, ((F(-1), 2, -1, 0), (F(-1, 2), 2, -2, 0)), (2, -3, 0)),
        ExpansionClaim(IntegrandTerm.X_LNLN_SQ_OVER_LN2, ((F(-1, 4), 2, -2, 2),), (2, -3, 2)),
        ExpansionClaim(IntegrandTerm.X_LNLN_OVER_LN2, ((F(3, 2), 2, -2, 1),), (2, -3, 2)),
        # printed remainder O(n^2 ln n / ln^3 n) is O(n^2 / ln^2 n), the main term's own order
        ExpansionClaim(IntegrandTerm.X_OVER_LN2, ((F(-11, 4), 2, -2, 0),), (2, -2, 0)),
    )
}
del F


def integrate(term: IntegrandTerm, a: float, b: float, tol: float = DEFAULT_TOL) -> float:
    """Integral of the (unsigned) term over [a, b]; requires 3 <= a < b."""
    if a < LOWER_LIMIT:
        raise DomainError(f"lower limit must be >= {LOWER_LIMIT}, got {a}")
    if not b > a:
        raise DomainError(f"need b > a, got a={a}, b={b}")
    value, _ = adaptive_simpson(term.fn, a, b, tol)
    return value


@dataclass(frozen=True)
class TermResidual:
    term: IntegrandTerm
    n: int
    numeric: float
    closed_form: float
    scaled_residual: float


def verify_term_expansion(
    term: IntegrandTerm,
    n_grid: Sequence[int],
    tol: float = VERIFY_TOL,
    claim: ExpansionClaim | None = None,
) -> list[TermResidual]:
    """Numeric integral over [3, n] against the claimed main terms, per n.

    Residuals are formed on the unsigned integrand: the claimed main terms are
    divided by the multiplier first. Grid points are integrated cumulatively,
    [3, n_1] + [n_1, n_2] + ..., so each piece is integrated once.
    """
    claim = claim or CLAIMS[term]
    if any(n < 10 for n in n_grid):
        raise DomainError("grid points must be >= 10")
    mult = float(term.multiplier)
    out = []
    acc: list[float] = []
    prev = LOWER_LIMIT
    for n in sorted(n_grid):
        if n > prev:
            acc.append(integrate(term, prev, n, tol))
            prev = n
        numeric = math.fsum(acc)
        closed = claim.main_value(n) / mult
        out.append(TermResidual(term, n, numeric, closed, (numeric - closed) / claim.scale_value(n)))
    return out


def residual_spread(rows: Sequence[TermResidual]) -> float:
    """max |scaled residual| / min |scaled residual| over the rows."""
    mags = [abs(r.scaled_residual) for r in rows]
    if min(mags) == 0:
        return math.inf
    return max(mags) / min(mags)


# -- sum versus integral for monotone functions ----------------------------------

EULER_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sqrt": math.sqrt,
    "ln": math.log,
    "x_ln_x": lambda x: x * math.log(x),
}


@dataclass(frozen=True)
class EulerCheck:
    f_id: str
    n: int
    total: float
    integral: float
    bound_ratio: float


def euler_sum_check(f_id: str, n: int, tol: float = DEFAULT_TOL) -> EulerCheck:
    """Compare f(1) + ... + f(n) with the integral of f over [1, n].

    ``bound_ratio`` is |sum - integral| / (|f(n)| + |f(1)|), at most 1 for
    monotone f.
    """
    try:
        f = EULER_FUNCTIONS[f_id]
    except KeyError:
        raise ValueError(f"unknown test function {f_id!r}") from None
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    total = math.fsum(f(float(r)) for r in range(1, n + 1))
    integral, _ = adaptive_simpson(f, 1.0, float(n), tol)
    gap = abs(total - integral)
    denom = abs(f(float(n))) + abs(f(1.0))
    ratio = 0.0 if gap == 0 else gap / denom
    return EulerCheck(f_id, n, total, integral, ratio)
