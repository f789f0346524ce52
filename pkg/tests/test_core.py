import itertools
from collections import Counter
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadic_pd.core import (
    DyadicDataset,
    LatentTruth,
    combinations4,
    common_count,
    ordered_tetrads,
    pairs_with_q_common,
    permutations,
)
from dyadic_pd.errors import DegenerateSize


def test_combinations_n5_lists_five_sets():
    got = list(combinations4(5))
    assert len(got) == 5
    assert {frozenset(c) for c in got} == {
        frozenset({1, 2, 3, 4}),
        frozenset({0, 2, 3, 4}),
        frozenset({0, 1, 3, 4}),
        frozenset({0, 1, 2, 4}),
        frozenset({0, 1, 2, 3}),
    }
    assert got == sorted(got)


@pytest.mark.parametrize("n, expected", [(4, 1), (5, 5), (10, 210)])
def test_combination_counts(n, expected):
    assert sum(1 for _ in combinations4(n)) == expected


@pytest.mark.parametrize("n", [0, 1, 3])
def test_too_few_nodes(n):
    with pytest.raises(DegenerateSize):
        combinations4(n)
    with pytest.raises(DegenerateSize):
        pairs_with_q_common(n, 0)


def test_permutations_first_is_identity_and_all_distinct():
    perms = list(permutations((3, 1, 2, 0)))
    assert len(perms) == 24 == len(set(perms))
    assert perms[0] == (0, 1, 2, 3)


def test_permutations_reject_repeats():
    with pytest.raises(ValueError):
        list(permutations((1, 1, 2, 3)))


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_enumeration_equals_all_ordered_tuples(n):
    from_combos = Counter(p for c in combinations4(n) for p in permutations(c))
    direct = Counter(t for t in itertools.product(range(n), repeat=4) if len(set(t)) == 4)
    assert from_combos == direct
    assert sum(from_combos.values()) == n * (n - 1) * (n - 2) * (n - 3)
    assert Counter(map(tuple, ordered_tetrads(n))) == direct


def test_n5_has_120_tetrads():
    assert sum(1 for c in combinations4(5) for _ in permutations(c)) == 120


def test_streams_replay_identically():
    assert list(combinations4(7)) == list(combinations4(7))
    assert list(permutations((0, 4, 2, 9))) == list(permutations((0, 4, 2, 9)))


@pytest.mark.parametrize(
    "c1, c2, q",
    [((0, 1, 2, 3), (0, 1, 4, 5), 2), ((0, 1, 2, 3), (0, 1, 2, 3), 4), ((0, 1, 2, 3), (4, 5, 6, 7), 0)],
)
def test_common_count(c1, c2, q):
    assert common_count(c1, c2) == q


def test_pairs_with_q_common_n5():
    assert [pairs_with_q_common(5, q) for q in range(5)] == [0, 0, 0, 4, 1]


@pytest.mark.parametrize("n", [4, 5, 6, 8, 9])
def test_pairs_with_q_common_matches_exhaustive_count(n):
    combos = list(combinations4(n))
    first = combos[0]
    counts = Counter(common_count(first, c) for c in combos)
    for q in range(5):
        assert pairs_with_q_common(n, q) == counts.get(q, 0)


def test_pairs_with_q_common_n8_q2_exhaustive():
    # every first set, not only the first one
    combos = list(combinations4(8))
    hits = sum(1 for c1 in combos for c2 in combos if common_count(c1, c2) == 2)
    assert hits == len(combos) * 36
    assert pairs_with_q_common(8, 2) == 36


@given(st.integers(min_value=4, max_value=60))
def test_vandermonde(n):
    assert sum(pairs_with_q_common(n, q) for q in range(5)) == comb(n, 4)


def test_dataset_rejects_non_finite_off_diagonal():
    y = np.zeros((4, 4))
    y[0, 1] = np.nan
    with pytest.raises(ValueError):
        DyadicDataset(y=y, x=np.ones((4, 4)))


def test_dataset_ignores_diagonal_and_is_read_only():
    y = np.ones((4, 4))
    y[2, 2] = np.inf
    d = DyadicDataset(y=y, x=np.arange(16.0).reshape(4, 4))
    assert d.y[2, 2] == 0.0
    with pytest.raises(ValueError):
        d.y[0, 1] = 5.0


def test_dataset_needs_four_nodes():
    with pytest.raises(DegenerateSize):
        DyadicDataset(y=np.zeros((3, 3)), x=np.zeros((3, 3)))


def test_latent_truth_identity_from_generator():
    from dyadic_pd.simulate import generate

    d = generate("d2", 9, 0.3, 17)
    lat = d.latent
    assert isinstance(lat, LatentTruth)
    rebuilt = lat.beta1 * d.x + lat.theta[:, None] + lat.xi[None, :] + lat.u
    off = ~np.eye(9, dtype=bool)
    np.testing.assert_allclose(d.y[off], rebuilt[off], rtol=1e-12, atol=1e-12)
