"""Segmented sieve producing the first N primes together with exact prefix sums.

The store is built once and never mutated. Primes are 1-indexed through the
public accessors (``store.nth_prime(1) == 2``) while the backing numpy arrays
are 0-indexed.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .errors import CacheFormatError, MemoryBudgetError, OutOfRangeError

DEFAULT_SEGMENT_SIZE = 1 << 20  # integers per window; the odd-only mask is half that in bytes
DEFAULT_MAX_PRIMES = 10**8
CACHE_MAGIC = b"PSUMv1"

_INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class SieveConfig:
    n_target: int
    segment_size: int = DEFAULT_SEGMENT_SIZE
    bound_slack: float = 1.0
    max_primes: int = DEFAULT_MAX_PRIMES

    def __post_init__(self) -> None:
        if self.n_target < 1:
            raise ValueError(f"n_target must be >= 1, got {self.n_target}")
        if self.segment_size < 2:
            raise ValueError(f"segment_size must be >= 2, got {self.segment_size}")
        if not self.bound_slack >= 1:
            raise ValueError(f"bound_slack must be >= 1, got {self.bound_slack}")


def upper_bound_estimate(n: int, slack: float = 1.0) -> int:
    """Over-estimate of p_n used to size the sieve: n(ln n + ln ln n) for n >= 6."""
    if n < 6:
        return 15
    return int(math.ceil(n * (math.log(n) + math.log(math.log(n))) * slack))


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit, plain (unsegmented) sieve."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _odd_segments(lo: int, hi: int, segment_size: int) -> Iterator[np.ndarray]:
    """Yield the odd primes in [lo, hi) one sieving window at a time."""
    if lo % 2 == 0:
        lo += 1
    span = max(2, segment_size - segment_size % 2)
    base = simple_sieve(math.isqrt(max(hi - 1, 0)))[1:]  # drop 2
    low = lo
    while low < hi:
        high = min(low + span, hi)
        mask = np.ones((high - low + 1) // 2, dtype=bool)
        if low == 1:
            mask[0] = False
        for p in base.tolist():
            sq = p * p
            if sq >= high:
                break
            start = max(sq, -(-low // p) * p)
            if start % 2 == 0:
                start += p
            if start < high:
                mask[(start - low) // 2 :: p] = False
        yield low + 2 * np.flatnonzero(mask).astype(np.int64)
        low = high


def _exact_cumsum(primes: np.ndarray) -> np.ndarray:
    # int64 suffices whenever count * p_count < 2**63; beyond that fall back to Python ints.
    if primes.size == 0:
        return primes.copy()
    if int(primes.size) * int(primes[-1]) < _INT64_MAX:
        return np.cumsum(primes, dtype=np.int64)
    return np.cumsum(primes.astype(object))


@dataclass(frozen=True, eq=False)
class PrimeStore:
    """Immutable table of p_1..p_count and S_1..S_count.

    ``primes[k]`` holds p_{k+1}; ``prefix_sums[k]`` holds S_{k+1} exactly,
    either as int64 (when no overflow is possible) or as Python ints.
    """

    primes: np.ndarray
    prefix_sums: np.ndarray

    @classmethod
    def from_primes(cls, primes: np.ndarray) -> PrimeStore:
        primes = np.ascontiguousarray(primes, dtype=np.int64)
        sums = _exact_cumsum(primes)
        primes.setflags(write=False)
        sums.setflags(write=False)
        return cls(primes, sums)

    @property
    def count(self) -> int:
        return int(self.primes.size)

    def _check(self, n: int) -> None:
        if not 1 <= n <= self.count:
            raise OutOfRangeError(f"index {n} outside 1..{self.count}")

    def nth_prime(self, n: int) -> int:
        self._check(n)
        return int(self.primes[n - 1])

    def prefix_sum(self, n: int) -> int:
        """S_n = p_1 + ... + p_n as an exact Python int."""
        self._check(n)
        return int(self.prefix_sums[n - 1])

    def stream_triples(self, n_lo: int, n_hi: int) -> Iterator[tuple[int, int, int]]:
        if n_lo > n_hi:
            raise OutOfRangeError(f"empty range {n_lo}..{n_hi}")
        self._check(n_lo)
        self._check(n_hi)
        for k in range(n_lo - 1, n_hi):
            yield k + 1, int(self.primes[k]), int(self.prefix_sums[k])

    def covers(self, n: int) -> bool:
        return 1 <= n <= self.count


def build_store(
    config: SieveConfig,
    progress: Callable[[str], None] | None = None,
) -> PrimeStore:
    """Sieve until at least ``config.n_target`` primes are found.

    The sieve limit starts from :func:`upper_bound_estimate` and is extended
    by 25% whenever it falls short. The result holds exactly ``n_target`` primes.
    """
    n = config.n_target
    if n > config.max_primes:
        raise MemoryBudgetError(
            f"{n} primes requested, memory budget allows {config.max_primes}"
        )
    limit = upper_bound_estimate(n, config.bound_slack)
    chunks = [np.array([2], dtype=np.int64)]
    found = 1
    lo = 3
    while found < n:
        if progress:
            progress(f"sieving [{lo}, {limit}]")
        for seg in _odd_segments(lo, limit + 1, config.segment_size):
            chunks.append(seg)
            found += seg.size
            if found >= n:
                break
        lo = limit + 1
        limit = int(limit * 1.25) + 1
    primes = np.concatenate(chunks)[:n]
    if progress:
        progress(f"{n} primes, p_n = {int(primes[-1])}")
    return PrimeStore.from_primes(primes)


def store_for(n: int, **kwargs) -> PrimeStore:
    """Convenience: ``build_store(SieveConfig(n, ...))``."""
    return build_store(SieveConfig(n_target=n, **kwargs))


# -- cache file ---------------------------------------------------------------
# layout: b"PSUMv1" | u64 count | count * u64 primes | u128 S_count (all little-endian)


def save_store(store: PrimeStore, path: str | Path) -> None:
    checksum = store.prefix_sum(store.count)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<Q", store.count))
        fh.write(store.primes.astype("<u8").tobytes())
        fh.write(checksum.to_bytes(16, "little"))


def load_store(path: str | Path) -> PrimeStore:
    data = Path(path).read_bytes()
    head = len(CACHE_MAGIC) + 8
    if len(data) < head or data[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CacheFormatError(f"{path}: missing PSUMv1 header")
    (count,) = struct.unpack_from("<Q", data, len(CACHE_MAGIC))
    if count < 1 or len(data) != head + 8 * count + 16:
        raise CacheFormatError(f"{path}: size does not match count {count}")
    primes = np.frombuffer(data, dtype="<u8", count=count, offset=head).astype(np.int64)
    stored = int.from_bytes(data[head + 8 * count :], "little")
    store = PrimeStore.from_primes(primes)
    if store.prefix_sum(count) != stored:
        raise CacheFormatError(f"{path}: checksum mismatch")
    return store
