import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import is_prime_trial, running_sums, trial_division_primes
from primesum.errors import CacheFormatError, MemoryBudgetError, OutOfRangeError
from primesum.prime_engine import (
    PrimeStore,
    SieveConfig,
    build_store,
    load_store,
    save_store,
    simple_sieve,
    store_for,
    upper_bound_estimate,
)


def test_first_prime():
    store = store_for(1)
    assert store.count == 1
    assert store.nth_prime(1) == 2
    assert store.prefix_sum(1) == 2


def test_25th_prime_matches_trial_division():
    store = store_for(25)
    below_100 = [k for k in range(100) if is_prime_trial(k)]
    assert len(below_100) == 25
    assert store.nth_prime(25) == 97 == below_100[-1]


@pytest.mark.parametrize("n, expected", [(1, 2), (10, 29), (100, 541)])
def test_nth_prime_examples(n, expected):
    store = store_for(200)
    assert store.nth_prime(n) == expected == trial_division_primes(n)[-1]


@pytest.mark.parametrize("n, expected", [(1, 2), (9, 100), (10, 129)])
def test_prefix_sum_examples(n, expected):
    store = store_for(50)
    assert store.prefix_sum(n) == expected == sum(trial_division_primes(n))


def test_stream_triples():
    store = store_for(20)
    assert list(store.stream_triples(1, 3)) == [(1, 2, 2), (2, 3, 5), (3, 5, 10)]
    assert list(store.stream_triples(10, 10)) == [(10, 29, 129)]
    for n in (1, 7, 20):
        assert list(store.stream_triples(n, n)) == [(n, store.nth_prime(n), store.prefix_sum(n))]


def test_out_of_range():
    store = store_for(10)
    for bad in (0, 11, -3):
        with pytest.raises(OutOfRangeError):
            store.nth_prime(bad)
        with pytest.raises(OutOfRangeError):
            store.prefix_sum(bad)
    with pytest.raises(OutOfRangeError):
        list(store.stream_triples(5, 11))
    with pytest.raises(OutOfRangeError):
        list(store.stream_triples(6, 5))


def test_config_validation():
    with pytest.raises(ValueError):
        SieveConfig(0)
    with pytest.raises(ValueError):
        SieveConfig(10, segment_size=1)
    with pytest.raises(ValueError):
        SieveConfig(10, bound_slack=0.5)


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        build_store(SieveConfig(1001, max_primes=1000))


@pytest.mark.parametrize("n", [1, 2, 5, 6, 7, 100, 5000])
def test_upper_bound_covers_p_n(n):
    assert upper_bound_estimate(n) >= trial_division_primes(n)[-1]


def test_tiny_segments_and_extension():
    # a slack-free estimate with a 2-integer window still reaches the target
    ref = trial_division_primes(3000)
    store = build_store(SieveConfig(3000, segment_size=2))
    assert store.primes.tolist() == list(ref)
    store = build_store(SieveConfig(3000, segment_size=97))
    assert store.primes.tolist() == list(ref)


def test_extension_loop_when_estimate_falls_short(monkeypatch):
    import primesum.prime_engine as pe

    monkeypatch.setattr(pe, "upper_bound_estimate", lambda n, slack=1.0: 20)
    store = pe.build_store(SieveConfig(1000, segment_size=64))
    assert store.primes.tolist() == list(trial_division_primes(1000))


@pytest.mark.parametrize("segment_size", [2, 3, 64, 1000, 1 << 16])
@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=2500))
def test_segment_size_does_not_change_result(segment_size, n):
    store = build_store(SieveConfig(n, segment_size=segment_size))
    assert store.primes.tolist() == list(trial_division_primes(n))


def test_oracle_equivalence_1e5(small_store):
    ref = trial_division_primes(10**5)
    assert small_store.primes.tolist() == list(ref)
    assert small_store.prefix_sums.tolist() == running_sums(ref)


def test_store_invariants(small_store):
    p = small_store.primes
    s = small_store.prefix_sums
    assert p[0] == 2 and p[1] == 3
    assert np.all(np.diff(p) > 0)
    assert s[0] == 2
    assert np.array_equal(np.diff(s), p[1:])
    # Bertrand
    assert np.all(p[1:] < 2 * p[:-1])


def test_random_samples_are_prime(small_store):
    rng = random.Random(1234)
    for n in rng.sample(range(1, small_store.count + 1), 300):
        assert is_prime_trial(small_store.nth_prime(n))


def test_store_is_immutable(small_store):
    with pytest.raises(ValueError):
        small_store.primes[0] = 4
    with pytest.raises(ValueError):
        small_store.prefix_sums[0] = 4


def test_large_values_fall_back_to_python_ints():
    # synthetic "primes" big enough that int64 accumulation could overflow
    big = np.array([2**61, 2**61 + 1, 2**61 + 3, 2**61 + 7], dtype=np.int64)
    store = PrimeStore.from_primes(big)
    assert store.prefix_sum(4) == 4 * 2**61 + 11
    assert store.prefix_sum(4) > 2**63


@pytest.mark.slow
def test_millionth_prime(store_1e6):
    assert store_1e6.nth_prime(10**6) == 15485863
    # independent sieve over the whole interval
    ref = simple_sieve(15485863)
    assert ref.size == 10**6
    assert np.array_equal(ref, store_1e6.primes)
    assert store_1e6.prefix_sum(10**6) == int(ref.astype(object).sum())


def test_cache_round_trip(tmp_path):
    store = store_for(1234)
    path = tmp_path / "p.bin"
    save_store(store, path)
    raw = path.read_bytes()
    assert raw[:6] == b"PSUMv1"
    assert int.from_bytes(raw[6:14], "little") == 1234
    assert len(raw) == 6 + 8 + 8 * 1234 + 16
    assert int.from_bytes(raw[-16:], "little") == store.prefix_sum(1234)
    loaded = load_store(path)
    assert np.array_equal(loaded.primes, store.primes)
    assert np.array_equal(loaded.prefix_sums, store.prefix_sums)


def test_cache_rejects_corruption(tmp_path):
    store = store_for(100)
    path = tmp_path / "p.bin"
    save_store(store, path)
    raw = bytearray(path.read_bytes())
    raw[20] ^= 0x01  # flip a bit inside p_1 or p_2
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheFormatError):
        load_store(path)
    path.write_bytes(b"NOPE" + bytes(raw[4:]))
    with pytest.raises(CacheFormatError):
        load_store(path)
    path.write_bytes(bytes(raw[:-3]))
    with pytest.raises(CacheFormatError):
        load_store(path)
