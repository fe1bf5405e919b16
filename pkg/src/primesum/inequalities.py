"""Exact checks and threshold scans for the prime-sum inequalities.

    Mandl          S_n < n p_n / 2                 decided as 2 S_n < n p_n
    Hassani        S_n < n p_n / 2 - n^2 / 14      decided as 28 S_n < 14 n p_n - 2 n^2
    MandlRefined   S_n < n p_n/2 - n^2/4 - n^2/(2 ln n) + n^2 lnln n / (4 ln^k n)
    Robin          n p_[n/2] < S_{n-1}

Three of the four are integer comparisons. The refined bound is irrational
and is decided in float64, with anything within 64 ulps of equality
re-decided at 40 significant digits.

The refined bound's last term is printed with ln^2 n in the denominator
(``refined_form="ln2"``), but that version is violated at every n checked
up to 10^6. With ln n instead (``refined_form="ln"``, the default) the last
violation is exactly n = 834, which is the published threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np

from .asymptotics import mandl_rhs_refined, mandl_rhs_refined_array, mandl_rhs_refined_mp
from .errors import DomainError, NoThresholdError, OutOfRangeError
from .prime_engine import PrimeStore

GUARD_ULPS = 64
CHUNK = 1 << 20
REFINED_FORMS = {"ln": 1, "ln2": 2}
DEFAULT_REFINED_FORM = "ln"

_SAFE_INT64 = 1 << 62


class InequalityKind(Enum):
    MANDL = "mandl"
    HASSANI = "hassani"
    MANDL_REFINED = "mandl-refined"
    ROBIN = "robin"

    @property
    def min_n(self) -> int:
        return {"mandl-refined": 3, "robin": 4}.get(self.value, 1)

    @property
    def claimed_from(self) -> int | None:
        """Start of the range the literature claims is violation-free, if it states one."""
        return {"hassani": 10, "mandl-refined": 835}.get(self.value)

    @property
    def exact(self) -> bool:
        return self is not InequalityKind.MANDL_REFINED

    @classmethod
    def parse(cls, kind: str | InequalityKind) -> InequalityKind:
        if isinstance(kind, cls):
            return kind
        try:
            return cls(kind.lower().replace("_", "-"))
        except ValueError:
            raise ValueError(f"unknown inequality {kind!r}") from None


@dataclass(frozen=True)
class VerificationRecord:
    n: int
    kind: InequalityKind
    holds: bool
    margin: int | float
    guarded: bool = False


@dataclass
class ScanReport:
    kind: InequalityKind
    n_lo: int
    n_hi: int
    violations: list[int] = field(default_factory=list)
    guarded: list[int] = field(default_factory=list)
    flipped: list[int] = field(default_factory=list)

    @property
    def largest_violation(self) -> int | None:
        return self.violations[-1] if self.violations else None

    @property
    def threshold(self) -> int:
        if self.violations:
            return self.violations[-1] + 1
        return self.n_lo

    def violations_in_claimed_range(self) -> list[int]:
        start = self.kind.claimed_from
        if start is None:
            return []
        return [n for n in self.violations if n >= start]


def _power(refined_form: str) -> int:
    try:
        return REFINED_FORMS[refined_form]
    except KeyError:
        raise ValueError(f"unknown refined form {refined_form!r}") from None


def _needed_range(kind: InequalityKind, n_lo: int, n_hi: int, store: PrimeStore) -> None:
    if n_lo < 1 or n_lo > n_hi:
        raise OutOfRangeError(f"bad range {n_lo}..{n_hi}")
    if not store.covers(n_hi):
        raise OutOfRangeError(f"store holds {store.count} primes, need {n_hi}")
    if kind is InequalityKind.ROBIN and n_lo < 4:
        raise DomainError("Robin's inequality needs n >= 4")


def _refined_margin_hp(n: int, p: int, s: int, power: int) -> float:
    return float(mandl_rhs_refined_mp(n, p, power) - s)


def check(
    kind: InequalityKind | str,
    n: int,
    store: PrimeStore,
    refined_form: str = DEFAULT_REFINED_FORM,
) -> VerificationRecord:
    """Decide one inequality at one n. ``margin`` is RHS - LHS (denominators cleared)."""
    kind = InequalityKind.parse(kind)
    if n < kind.min_n:
        if kind is InequalityKind.ROBIN:
            raise DomainError("Robin's inequality needs n >= 4")
        raise DomainError(f"{kind.value} needs n >= {kind.min_n}")
    _needed_range(kind, n, n, store)
    p = store.nth_prime(n)
    s = store.prefix_sum(n)
    guarded = False
    if kind is InequalityKind.MANDL:
        margin = n * p - 2 * s
    elif kind is InequalityKind.HASSANI:
        margin = 14 * n * p - 2 * n * n - 28 * s
    elif kind is InequalityKind.ROBIN:
        margin = store.prefix_sum(n - 1) - n * store.nth_prime(n // 2)
    else:
        power = _power(refined_form)
        rhs = mandl_rhs_refined(n, p, power)
        margin = rhs - s
        if abs(margin) <= GUARD_ULPS * math.ulp(max(abs(rhs), float(s))):
            margin = _refined_margin_hp(n, p, s, power)
            guarded = True
    return VerificationRecord(n, kind, margin > 0, margin, guarded)


@dataclass(frozen=True)
class MarginChunk:
    """Margins for a contiguous block of indices, as produced by :func:`iter_margins`."""

    n: np.ndarray
    margin: np.ndarray  # int64, object (exact ints) or float64
    guarded: np.ndarray  # bool
    flipped: np.ndarray  # bool: high-precision verdict differs from the float one


def _exact_arrays(*arrays: np.ndarray, bound: int) -> tuple[np.ndarray, ...]:
    if bound < _SAFE_INT64:
        return tuple(a.astype(np.int64) for a in arrays)
    return tuple(a.astype(object) for a in arrays)


def iter_margins(
    kind: InequalityKind | str,
    n_lo: int,
    n_hi: int,
    store: PrimeStore,
    refined_form: str = DEFAULT_REFINED_FORM,
    chunk: int = CHUNK,
) -> Iterator[MarginChunk]:
    """Vectorised margins over [n_lo, n_hi] in ascending blocks of ``chunk`` indices."""
    kind = InequalityKind.parse(kind)
    _needed_range(kind, n_lo, n_hi, store)
    n_lo = max(n_lo, kind.min_n)
    power = _power(refined_form)
    primes, sums = store.primes, store.prefix_sums
    p_top = int(primes[n_hi - 1])
    for a in range(n_lo, n_hi + 1, chunk):
        b = min(a + chunk - 1, n_hi)
        n = np.arange(a, b + 1, dtype=np.int64)
        p = primes[a - 1 : b]
        s = sums[a - 1 : b]
        no_guard = np.zeros(n.size, dtype=bool)
        if kind is InequalityKind.MANDL:
            n_, p_, s_ = _exact_arrays(n, p, s, bound=2 * n_hi * p_top)
            yield MarginChunk(n, n_ * p_ - 2 * s_, no_guard, no_guard)
        elif kind is InequalityKind.HASSANI:
            n_, p_, s_ = _exact_arrays(n, p, s, bound=28 * n_hi * p_top)
            yield MarginChunk(n, 14 * n_ * p_ - 2 * n_ * n_ - 28 * s_, no_guard, no_guard)
        elif kind is InequalityKind.ROBIN:
            half = primes[n // 2 - 1]
            prev = sums[n - 2]
            n_, h_, s_ = _exact_arrays(n, half, prev, bound=2 * n_hi * p_top)
            yield MarginChunk(n, s_ - n_ * h_, no_guard, no_guard)
        else:
            rhs = mandl_rhs_refined_array(n, p, power)
            s_f = s.astype(np.float64)
            margin = rhs - s_f
            band = GUARD_ULPS * np.spacing(np.maximum(np.abs(rhs), s_f))
            guarded = np.abs(margin) <= band
            flipped = np.zeros(n.size, dtype=bool)
            for k in np.flatnonzero(guarded):
                hp = _refined_margin_hp(int(n[k]), int(p[k]), int(s[k]), power)
                flipped[k] = (hp > 0) != (margin[k] > 0)
                margin[k] = hp
            yield MarginChunk(n, margin, guarded, flipped)


def scan(
    kind: InequalityKind | str,
    n_lo: int,
    n_hi: int,
    store: PrimeStore,
    refined_form: str = DEFAULT_REFINED_FORM,
    chunk: int = CHUNK,
    on_block: Callable[[MarginChunk], None] | None = None,
) -> ScanReport:
    """Every violation in [n_lo, n_hi], ascending.

    Indices below the kind's domain (n < 3 for the refined bound) are skipped;
    Robin requires n_lo >= 4. ``on_block`` sees each block of margins in order.
    """
    kind = InequalityKind.parse(kind)
    _needed_range(kind, n_lo, n_hi, store)
    report = ScanReport(kind, max(n_lo, kind.min_n), n_hi)
    for blk in iter_margins(kind, n_lo, n_hi, store, refined_form, chunk):
        if on_block is not None:
            on_block(blk)
        bad = np.asarray(blk.margin <= 0, dtype=bool)
        report.violations.extend(blk.n[bad].tolist())
        report.guarded.extend(blk.n[blk.guarded].tolist())
        report.flipped.extend(blk.n[blk.flipped].tolist())
    return report


def find_threshold(
    kind: InequalityKind | str,
    n_hi: int,
    store: PrimeStore,
    n_lo: int | None = None,
    refined_form: str = DEFAULT_REFINED_FORM,
) -> int:
    """Smallest N such that the inequality holds for all N <= n <= n_hi."""
    kind = InequalityKind.parse(kind)
    report = scan(kind, kind.min_n if n_lo is None else n_lo, n_hi, store, refined_form)
    if report.largest_violation == n_hi:
        raise NoThresholdError(f"{kind.value} fails at n_hi = {n_hi}")
    return report.threshold
