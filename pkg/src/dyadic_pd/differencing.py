"""Tetrad difference transform and the permutation-symmetric score kernel.

``tilde(v, (i, j, k, l)) = (v[i, j] - v[i, k]) - (v[l, j] - v[l, k])``.
Any matrix of the form ``a_i + b_j`` is mapped to zero, which is how the
two-way fixed effects disappear from the estimating equation.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import DyadicDataset, n_ordered_tetrads, ordered_tetrads, permutations
from .errors import DegenerateSize, OracleInputError


def tilde(v: np.ndarray, t: Sequence[int]) -> float:
    i, j, k, l = t
    return float((v[i, j] - v[i, k]) - (v[l, j] - v[l, k]))


def tilde_many(v: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    """Vectorised :func:`tilde` over an (M, 4) array of tetrads."""
    i, j, k, l = tuples[:, 0], tuples[:, 1], tuples[:, 2], tuples[:, 3]
    return (v[i, j] - v[i, k]) - (v[l, j] - v[l, k])


def _xu(data_or_x, u):
    if isinstance(data_or_x, DyadicDataset):
        if u is not None:
            return data_or_x.x, np.asarray(u, dtype=float)
        if data_or_x.latent is None:
            raise OracleInputError("kernel needs the error matrix u; dataset has no latent truth")
        return data_or_x.x, data_or_x.latent.u
    if u is None:
        raise ValueError("pass either a dataset with latent truth or both x and u")
    return np.asarray(data_or_x, dtype=float), np.asarray(u, dtype=float)


def kernel_s(data_or_x, c: Sequence[int], u: np.ndarray | None = None) -> float:
    """Average of ``tilde(x, p) * tilde(u, p)`` over the 24 orderings ``p`` of ``c``.

    Accepts either a dataset carrying latent truth or an ``x`` matrix together
    with ``u=``. Summation always runs in the canonical permutation order of
    the sorted combination, so the result does not depend on how ``c`` is
    listed.
    """
    x, u = _xu(data_or_x, u)
    total = 0.0
    for p in permutations(c):
        total += tilde(x, p) * tilde(u, p)
    return total / 24.0


def kernel_s_on_residuals(x: np.ndarray, u_hat: np.ndarray, c: Sequence[int]) -> float:
    return kernel_s(x, c, u=u_hat)


def kernel_values(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Kernel for every 4-set of the network, in lexicographic combination order."""
    n = x.shape[0]
    tuples = ordered_tetrads(n)
    prod = tilde_many(x, tuples) * tilde_many(u, tuples)
    return prod.reshape(-1, 24).sum(axis=1) / 24.0


def statistic_naive(x: np.ndarray, u: np.ndarray) -> float:
    """The score statistic: mean kernel value over all 4-sets."""
    return float(np.mean(kernel_values(x, u)))


def _zero_diag(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def tetrad_sum_naive(v: np.ndarray, w: np.ndarray) -> float:
    """Sum of ``tilde(v, t) * tilde(w, t)`` over every ordered tetrad ``t``."""
    tuples = ordered_tetrads(v.shape[0])
    return float(np.sum(tilde_many(v, tuples) * tilde_many(w, tuples)))


def tetrad_sum_reduced(v: np.ndarray, w: np.ndarray) -> float:
    """Same quantity as :func:`tetrad_sum_naive` in O(N^2).

    Write the tetrad as ``(i, j, k, l)`` and ``dv = v[:, j] - v[:, k]``.
    Summing over the outer pair ``(i, l)`` first, then the inner pair
    ``(j, k)``, leaves only row/column sums and a handful of elementwise
    products of the two matrices.
    """
    n = v.shape[0]
    if n < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n}")
    v = _zero_diag(v)
    w = _zero_diag(w)

    # Inner sum over ordered j != k, both outside {i, l}, of
    # (v[i,j]-v[i,k])(w[m,j]-w[m,k]) for fixed rows i, m (m may equal i).
    # For distinct rows i != l the admissible columns exclude i and l; we get
    # at these through the row-pair cross products below.
    vw = v @ w.T  # vw[i, m] = sum_j v[i, j] w[m, j] (diagonal zeros drop j=i, j=m)
    rv = v.sum(axis=1)
    rw = w.sum(axis=1)

    # For rows p, q and the column set C = all \ {i, l}:
    #   sum_{j != k in C} (v[p,j]-v[p,k])(w[q,j]-w[q,k])
    #     = 2 * (|C| * <v_p, w_q>_C - (sum_C v_p)(sum_C w_q))
    m = n - 2
    idx = np.arange(n)
    i_idx, l_idx = np.nonzero(idx[:, None] != idx[None, :])

    def restricted_inner(p, q):
        # <v_p, w_q> over columns other than i, l
        dot = vw[p, q] - v[p, i_idx] * w[q, i_idx] - v[p, l_idx] * w[q, l_idx]
        sv = rv[p] - v[p, i_idx] - v[p, l_idx]
        sw = rw[q] - w[q, i_idx] - w[q, l_idx]
        return 2.0 * (m * dot - sv * sw)

    # tilde(v) = dv_i - dv_l with dv_r = v[r,j] - v[r,k]; expand the product.
    total = (
        restricted_inner(i_idx, i_idx)
        - restricted_inner(i_idx, l_idx)
        - restricted_inner(l_idx, i_idx)
        + restricted_inner(l_idx, l_idx)
    )
    return float(np.sum(total))


def tetrad_mean(v: np.ndarray, w: np.ndarray, reduced: bool = True) -> float:
    n = v.shape[0]
    s = tetrad_sum_reduced(v, w) if reduced else tetrad_sum_naive(v, w)
    return s / n_ordered_tetrads(n)
