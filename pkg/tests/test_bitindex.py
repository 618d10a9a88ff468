import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmarginals.bitindex import (
    all_pairs,
    canonical_pair,
    coverage_graph_connected,
    enumerate_suffixes,
    from_bits,
    least_suffix,
    single_one_index,
    star_pairs,
    to_bits,
)


def brute_suffixes(positions, bits, n):
    """Filter every index 0..2**n-1 on the bit pattern."""
    return [i for i in range(1 << n) if all(to_bits(i, n)[p - 1] == t for p, t in zip(positions, bits))]


@pytest.mark.parametrize("i, n, expected", [(0, 3, (0, 0, 0)), (2, 3, (0, 1, 0)), (7, 3, (1, 1, 1))])
def test_to_bits(i, n, expected):
    assert to_bits(i, n) == expected
    assert from_bits(expected) == i


@pytest.mark.parametrize("i, n", [(-1, 3), (8, 3), (0, 0), (1, 63)])
def test_to_bits_rejects(i, n):
    with pytest.raises(ValueError):
        to_bits(i, n)


def test_round_trip_exhaustive():
    for n in range(1, 11):
        for i in range(1 << n):
            assert from_bits(to_bits(i, n)) == i


@given(st.integers(11, 20).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
def test_round_trip_large(args):
    n, i = args
    assert from_bits(to_bits(i, n)) == i


@pytest.mark.parametrize("j, n, expected", [(1, 4, 8), (4, 4, 1), (2, 5, 8)])
def test_single_one_index(j, n, expected):
    assert single_one_index(j, n) == expected


@pytest.mark.parametrize("j, n", [(0, 4), (5, 4)])
def test_single_one_index_rejects(j, n):
    with pytest.raises(ValueError):
        single_one_index(j, n)


@pytest.mark.parametrize(
    "positions, bits, n, expected",
    [([2, 4], [1, 1], 5, 10), ([1, 2], [0, 0], 7, 0), ([3], [1], 3, 1)],
)
def test_least_suffix(positions, bits, n, expected):
    assert least_suffix(positions, bits, n) == expected


@pytest.mark.parametrize(
    "positions, bits",
    [([2, 2], [1, 1]), ([3, 1], [0, 0]), ([0], [1]), ([6], [1]), ([1], [2]), ([1, 2], [1])],
)
def test_least_suffix_rejects(positions, bits):
    with pytest.raises(ValueError):
        least_suffix(positions, bits, 5)


def test_pair_suffix_formula():
    for n in range(2, 13):
        for j, k in all_pairs(n):
            assert least_suffix([j, k], [1, 1], n) == 2 ** (n - j) + 2 ** (n - k)


@pytest.mark.parametrize(
    "positions, bits, n, expected",
    [
        ([1, 2], [0, 0], 3, [0, 1]),
        ([1, 2], [1, 1], 5, [24, 25, 26, 27, 28, 29, 30, 31]),
        ([2], [1], 3, [2, 3, 6, 7]),
    ],
)
def test_enumerate_suffixes_examples(positions, bits, n, expected):
    assert brute_suffixes(positions, bits, n) == expected
    assert enumerate_suffixes(positions, bits, n).tolist() == expected


def test_enumerate_suffixes_matches_brute_force():
    for n in range(1, 7):
        for m in range(1, n + 1):
            for positions in itertools.combinations(range(1, n + 1), m):
                for bits in itertools.product((0, 1), repeat=m):
                    got = enumerate_suffixes(positions, bits, n)
                    assert got.tolist() == brute_suffixes(positions, bits, n)


@settings(max_examples=200)
@given(st.data())
def test_enumerate_suffixes_properties(data):
    n = data.draw(st.integers(1, 14))
    positions = sorted(data.draw(st.sets(st.integers(1, n), min_size=1, max_size=n)))
    bits = data.draw(st.lists(st.integers(0, 1), min_size=len(positions), max_size=len(positions)))
    got = enumerate_suffixes(positions, bits, n)
    assert got.size == 2 ** (n - len(positions))
    assert np.unique(got).size == got.size
    assert np.all(np.diff(got) > 0)
    assert got[0] == least_suffix(positions, bits, n)
    for i in got[:: max(1, got.size // 16)]:
        b = to_bits(int(i), n)
        assert [b[p - 1] for p in positions] == bits


def test_canonical_pair():
    assert canonical_pair(4, 2, 5) == (2, 4)
    with pytest.raises(ValueError):
        canonical_pair(3, 3, 5)


@pytest.mark.parametrize(
    "pairs, n, connected, components",
    [
        ([(1, 2), (1, 3), (1, 4)], 4, True, [{1, 2, 3, 4}]),
        ([(1, 2), (1, 3), (2, 3), (3, 4)], 5, False, [{1, 2, 3, 4}, {5}]),
        ([(1, 2), (3, 4)], 4, False, [{1, 2}, {3, 4}]),
    ],
)
def test_coverage(pairs, n, connected, components):
    ok, comps = coverage_graph_connected(pairs, n)
    assert ok is connected
    assert [set(c) for c in comps] == components


def test_coverage_full_and_star():
    for n in range(2, 15):
        assert coverage_graph_connected(all_pairs(n), n)[0]
        assert coverage_graph_connected(star_pairs(n), n)[0]


@pytest.mark.parametrize("pair", [(1,), (1, 1), (0, 2), (1, 9)])
def test_coverage_rejects_malformed(pair):
    with pytest.raises(ValueError):
        coverage_graph_connected([pair], 4)
