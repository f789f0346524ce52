"""Plug-in asymptotic variances built from estimated dyad-level kernel projections.

For a directed dyad ``(i, j)`` the estimated projection ``s_bar[i, j]``
averages, over the other node pairs ``{k, l}``, every kernel summand whose
error difference involves ``u[i, j]``. Each such summand is one of
``(i, j, k, l)``, ``(i, k, j, l)``, ``(l, j, k, i)``, ``(l, k, j, i)`` and
their ``k <-> l`` swaps; the four shapes carry identical products, so

    s_bar[i, j] = G[i, j] / (6 * C(N-2, 2)),
    G[i, j] = sum over ordered k != l outside {i, j} of
              tilde(x, (i, j, k, l)) * tilde(u, (i, j, k, l)).

The unordered-pair version adds the summands that involve ``u[j, i]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from .core import ordered_tetrads
from .differencing import tilde_many
from .errors import DegenerateSize, DegenerateVariance
from .estimator import FitResult, Path

Z_975 = 1.959963984540054


def _require_n(n: int) -> None:
    if n < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n}")


def s_bar_matrix_naive(x: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
    """All ``s_bar[i, j]`` by selecting kernel summands term by term.

    Walks every ordered tetrad ``(a, b, c, d)``; its summand
    ``tilde(x) * tilde(u) / 24`` involves the error entries at
    ``(a, b), (a, c), (d, b), (d, c)`` and is credited to each of them.
    """
    n = x.shape[0]
    _require_n(n)
    t = ordered_tetrads(n)
    term = tilde_many(x, t) * tilde_many(u_hat, t) / 24.0
    a, b, c, d = t[:, 0], t[:, 1], t[:, 2], t[:, 3]
    acc = np.zeros(n * n)
    for r, q in ((a, b), (a, c), (d, b), (d, c)):
        acc += np.bincount(r * n + q, weights=term, minlength=n * n)
    out = acc.reshape(n, n) / comb(n - 2, 2)
    np.fill_diagonal(out, 0.0)
    return out


def s_bar_matrix_reduced(x: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
    """All ``s_bar[i, j]`` from row/column aggregates and a few matrix products."""
    n = x.shape[0]
    _require_n(n)
    x = np.array(x, dtype=float, copy=True)
    u = np.array(u_hat, dtype=float, copy=True)
    np.fill_diagonal(x, 0.0)
    np.fill_diagonal(u, 0.0)
    m = n - 2

    rx, cx = x.sum(axis=1), x.sum(axis=0)
    ru, cu = u.sum(axis=1), u.sum(axis=0)
    tx, tu = rx.sum(), ru.sum()
    xu = x * u
    xu_row, xu_col = xu.sum(axis=1), xu.sum(axis=0)
    xu_total = xu_row.sum()

    x_u = x @ u
    u_x = u @ x
    x_ut = x @ u.T
    ut_x = u.T @ x
    u_xt = u @ x.T
    xt_u = x.T @ u

    rx_i, cx_j = rx[:, None], cx[None, :]
    ru_i, cu_j = ru[:, None], cu[None, :]
    # restricted sums over k outside {i, j}
    row_x = rx_i - x           # sum_k x[i,k]
    col_x = cx_j - x           # sum_k x[k,j]
    row_u = ru_i - u
    col_u = cu_j - u
    row_xu = xu_row[:, None] - xu
    col_xu = xu_col[None, :] - xu
    # sums over k != l both outside {i, j} of the inner block
    inner_u = tu - ru_i - cu[:, None] - ru[None, :] - cu_j + u + u.T
    inner_x = tx - rx_i - cx[:, None] - rx[None, :] - cx_j + x + x.T
    inner_xu = (
        xu_total - xu_row[:, None] - xu_col[:, None] - xu_row[None, :] - xu_col[None, :] + xu + xu.T
    )

    g = (
        m * (m - 1) * x * u
        - (m - 1) * x * (row_u + col_u)
        + x * inner_u
        - (m - 1) * u * (row_x + col_x)
        + u * inner_x
        + (m - 1) * (row_xu + col_xu)
        + (row_x * col_u - x_u)
        + (col_x * row_u - u_x)
        - ((x @ cu)[:, None] - x * cu_j - row_xu - x_ut)
        - ((ru @ x)[None, :] - ru_i * x - ut_x - col_xu)
        - ((u @ cx)[:, None] - u * cx_j - row_xu - u_xt)
        - ((rx @ u)[None, :] - rx_i * u - xt_u - col_xu)
        + inner_xu
    )
    out = g / (6.0 * comb(n - 2, 2))
    np.fill_diagonal(out, 0.0)
    return out


def s_bar_matrix(x: np.ndarray, u_hat: np.ndarray, path="reduced") -> np.ndarray:
    path = Path.parse(path)
    if path is Path.NAIVE:
        return s_bar_matrix_naive(x, u_hat)
    return s_bar_matrix_reduced(x, u_hat)


def s_bar_directed(x: np.ndarray, u_hat: np.ndarray, i: int, j: int) -> float:
    """Estimated projection on the directed dyad ``(i, j)``.

    Evaluated straight from its definition over node pairs outside ``{i, j}``.
    """
    n = x.shape[0]
    _require_n(n)
    if i == j:
        raise ValueError("a dyad needs two distinct nodes")
    others = np.array([k for k in range(n) if k not in (i, j)], dtype=np.intp)
    kk, ll = np.meshgrid(others, others, indexing="ij")
    keep = kk != ll
    k, l = kk[keep], ll[keep]
    t = np.column_stack([np.full_like(k, i), np.full_like(k, j), k, l])
    g = float(np.sum(tilde_many(x, t) * tilde_many(u_hat, t)))
    return g / (6.0 * comb(n - 2, 2))


def s_bar_pair(x: np.ndarray, u_hat: np.ndarray, i: int, j: int) -> float:
    """Estimated projection on the unordered pair ``{i, j}``.

    Collects the 16 kernel summands per outside pair whose error difference
    involves ``u[i, j]`` or ``u[j, i]``.
    """
    n = x.shape[0]
    _require_n(n)
    if i == j:
        raise ValueError("a dyad needs two distinct nodes")
    others = [k for k in range(n) if k not in (i, j)]
    total = 0.0
    for ego, alter in ((i, j), (j, i)):
        for k in others:
            for l in others:
                if k == l:
                    continue
                # the four tetrad shapes whose error difference contains u[ego, alter]
                for t in ((ego, alter, k, l), (ego, k, alter, l), (l, alter, k, ego), (l, k, alter, ego)):
                    t = np.array([t])
                    total += float(tilde_many(x, t)[0] * tilde_many(u_hat, t)[0])
    return total / (24.0 * comb(n - 2, 2))


def s_bar_pair_matrix(s_bar: np.ndarray) -> np.ndarray:
    """Unordered-pair projections ``s_bar[i, j] + s_bar[j, i]``; upper triangle filled."""
    out = np.triu(s_bar + s_bar.T, k=1)
    return out


def delta2_hat(s_bar: np.ndarray) -> float:
    n = s_bar.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return float(np.sum(s_bar[mask] ** 2) / (n * (n - 1)))


def Delta2_hat(s_bar2: np.ndarray) -> float:
    n = s_bar2.shape[0]
    iu = np.triu_indices(n, k=1)
    return float(2.0 * np.sum(s_bar2[iu] ** 2) / (n * (n - 1)))


@dataclass(frozen=True)
class AvarResult:
    delta2_hat: float
    Delta2_hat: float
    avar_delta: float
    avar_Delta: float
    t_delta: float
    t_Delta: float
    beta_null: float = 0.0

    def to_dict(self) -> dict:
        return {
            "delta2_hat": self.delta2_hat,
            "Delta2_hat": self.Delta2_hat,
            "avar_delta2": self.avar_delta,
            "avar_Delta2": self.avar_Delta,
            "t_delta2": self.t_delta,
            "t_Delta2": self.t_Delta,
            "beta_null": self.beta_null,
        }


def avar_and_tstats(fit: FitResult, delta2: float, Delta2: float, beta_null: float = 0.0) -> AvarResult:
    n = fit.n_nodes
    denom = n * (n - 1) * fit.gamma_hat**2
    avar_d = 144.0 * delta2 / denom
    avar_D = 72.0 * Delta2 / denom
    for name, val in (("delta2", avar_d), ("Delta2", avar_D)):
        if not (np.isfinite(val) and val > 0.0):
            raise DegenerateVariance(f"asymptotic variance from {name} is {val!r}; residual kernel is degenerate")
    diff = fit.beta_hat - beta_null
    return AvarResult(
        delta2_hat=delta2,
        Delta2_hat=Delta2,
        avar_delta=avar_d,
        avar_Delta=avar_D,
        t_delta=diff / sqrt(avar_d),
        t_Delta=diff / sqrt(avar_D),
        beta_null=beta_null,
    )


def estimate_avar(data, fit: FitResult, beta_null: float = 0.0, path=None) -> AvarResult:
    """Residuals, projections, both variance estimates and t-statistics for one fit."""
    from .estimator import residual_matrix

    resid = residual_matrix(data, fit.beta_hat)
    s = s_bar_matrix(data.x, resid, fit.path if path is None else path)
    return avar_and_tstats(fit, delta2_hat(s), Delta2_hat(s_bar_pair_matrix(s)), beta_null)


def rejects(t_stat: float) -> bool:
    return abs(t_stat) > Z_975
