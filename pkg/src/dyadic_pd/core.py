"""Dyadic datasets and the index combinatorics over 4-node sets.

Nodes are 0-based everywhere inside the package. Matrices are dense N x N
arrays whose diagonal is never read.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateSize

Tetrad = Tuple[int, int, int, int]
Combination = Tuple[int, int, int, int]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


@dataclass(frozen=True)
class LatentTruth:
    """Simulation ground truth behind ``y = beta1*x + theta_i + xi_j + u``."""

    a: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    xi: np.ndarray
    u: np.ndarray
    beta1: float

    def __post_init__(self):
        for name in ("a", "b", "theta", "xi", "u"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "beta1", float(self.beta1))


@dataclass(frozen=True)
class DyadicDataset:
    """Complete directed network: ``y[i, j]`` and ``x[i, j]`` for every i != j.

    Arrays are copied and made read-only on construction; the diagonal is
    zeroed so that accidental reads cannot leak garbage into sums.
    """

    y: np.ndarray
    x: np.ndarray
    latent: Optional[LatentTruth] = field(default=None, compare=False)

    def __post_init__(self):
        y = np.array(self.y, dtype=float, copy=True)
        x = np.array(self.x, dtype=float, copy=True)
        if y.ndim != 2 or y.shape[0] != y.shape[1] or x.shape != y.shape:
            raise ValueError(f"y and x must be matching square matrices, got {y.shape} and {x.shape}")
        n = y.shape[0]
        if n < 4:
            raise DegenerateSize(f"need at least 4 nodes, got {n}")
        off = offdiag_mask(n)
        if not (np.all(np.isfinite(y[off])) and np.all(np.isfinite(x[off]))):
            raise ValueError("off-diagonal entries of y and x must be finite")
        np.fill_diagonal(y, 0.0)
        np.fill_diagonal(x, 0.0)
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "x", _frozen(x))

    @property
    def n_nodes(self) -> int:
        return self.y.shape[0]

    def has_latent(self) -> bool:
        return self.latent is not None


def combinations4(n_nodes: int) -> Iterator[Combination]:
    """Yield the C(n, 4) sorted 4-sets of ``range(n_nodes)`` in lexicographic order.

    Every call returns a fresh iterator, so the stream can be replayed.
    """
    if n_nodes < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n_nodes}")
    return itertools.combinations(range(n_nodes), 4)


def permutations(c: Sequence[int]) -> Iterator[Tetrad]:
    """All 24 orderings of a 4-set, in ``itertools`` order of the sorted input."""
    members = tuple(sorted(int(v) for v in c))
    if len(members) != 4 or len(set(members)) != 4:
        raise ValueError(f"expected 4 distinct nodes, got {tuple(c)}")
    return itertools.permutations(members)


def common_count(c1: Sequence[int], c2: Sequence[int]) -> int:
    return len(set(c1) & set(c2))


def pairs_with_q_common(n_nodes: int, q: int) -> int:
    """Number of 4-sets sharing exactly ``q`` members with a fixed 4-set."""
    if n_nodes < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n_nodes}")
    if not 0 <= q <= 4:
        raise ValueError(f"q must lie in 0..4, got {q}")
    # math.comb returns 0 when k > n, which covers the small-N cases.
    return comb(4, q) * comb(n_nodes - 4, 4 - q)


_PERM24 = np.array(list(itertools.permutations(range(4))), dtype=np.intp)
_TUPLE_CACHE: dict = {}


def ordered_tetrads(n_nodes: int) -> np.ndarray:
    """All N(N-1)(N-2)(N-3) tetrads as an (M, 4) int array.

    Rows are grouped by combination (lexicographic) and, within each block of
    24, by the permutation order of :func:`permutations`. This is the fixed
    summation order used by every naive path.
    """
    if n_nodes < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n_nodes}")
    cached = _TUPLE_CACHE.get(n_nodes)
    if cached is None:
        combos = np.array(list(itertools.combinations(range(n_nodes), 4)), dtype=np.intp)
        cached = combos[:, _PERM24].reshape(-1, 4)
        cached.setflags(write=False)
        if n_nodes <= 40:
            _TUPLE_CACHE[n_nodes] = cached
    return cached


def n_ordered_tetrads(n_nodes: int) -> int:
    return n_nodes * (n_nodes - 1) * (n_nodes - 2) * (n_nodes - 3)
