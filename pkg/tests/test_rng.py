from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ntsearch import _accel
from ntsearch.rng import RNG_ALGORITHM, Rng
from tests.oracles import chi_square_uniform

needs_kernels = pytest.mark.skipif(not _accel.HAVE_KERNELS, reason="compiled kernels not built")


def test_same_seed_same_stream():
    a, b = Rng(42), Rng(42)
    assert [a.next64() for _ in range(50)] == [b.next64() for _ in range(50)]
    assert Rng(1).next64() != Rng(2).next64()


def test_stream_is_numpy_pcg64():
    raw = np.random.PCG64(5).random_raw(10).tolist()
    rng = Rng(5)
    assert [rng.next64() for _ in range(10)] == raw
    assert RNG_ALGORITHM.startswith("numpy.PCG64")


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        Rng(-1)


@given(st.integers(1, 2**63), st.integers(0, 2**32))
@settings(max_examples=200, deadline=None)
def test_randbelow_in_range(n, seed):
    assert 0 <= Rng(seed).randbelow(n) < n


def test_randbelow_rejects_zero():
    with pytest.raises(ValueError):
        Rng(0).randbelow(0)


def test_randbelow_uniform():
    rng = Rng(3)
    counts = Counter(rng.randbelow(7) for _ in range(14_000))
    assert chi_square_uniform([counts[i] for i in range(7)])


def test_random_in_unit_interval():
    rng = Rng(9)
    xs = [rng.random() for _ in range(10_000)]
    assert min(xs) >= 0.0 and max(xs) < 1.0
    assert abs(np.mean(xs) - 0.5) < 0.02


def test_shuffle_uniform_over_permutations():
    rng = Rng(11)
    counts = Counter()
    for _ in range(6_000):
        items = [0, 1, 2]
        rng.shuffle(items)
        counts[tuple(items)] += 1
    assert len(counts) == 6
    assert chi_square_uniform(counts.values())


@given(st.integers(0, 60), st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_permutation_stream_is_a_permutation(m, seed):
    assert sorted(Rng(seed).permutation_stream(m)) == list(range(m))


def test_permutation_stream_first_item_uniform():
    rng = Rng(4)
    counts = Counter(next(iter(rng.permutation_stream(5))) for _ in range(10_000))
    assert chi_square_uniform([counts[i] for i in range(5)])


@needs_kernels
@pytest.mark.parametrize("n", [1, 2, 3, 7, 1000, 2**40 + 3, 2**63 + 5])
def test_kernel_randbelow_matches(n):
    a, b = Rng(77), Rng(77)
    k = _accel.kernels
    assert [k.randbelow_py(a.capsule, n) for _ in range(200)] == [b.randbelow(n) for _ in range(200)]


@needs_kernels
@pytest.mark.parametrize("m,count", [(1, 1), (10, 10), (500, 37), (10_000, 10_000)])
def test_kernel_permutation_prefix_matches(m, count):
    a, b = Rng(8), Rng(8)
    stream = b.permutation_stream(m)
    expected = [next(stream) for _ in range(count)]
    assert list(_accel.kernels.permutation_prefix(a.capsule, m, count)) == expected
    assert a.next64() == b.next64()
