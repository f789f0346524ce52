"""Pairwise-differences least squares for a scalar regressor."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DyadicDataset, n_ordered_tetrads, offdiag_mask
from .differencing import tetrad_sum_naive, tetrad_sum_reduced
from .errors import DegenerateHessian

# Relative floor for the Hessian. Purely additive x gives an exact zero, so
# anything below this is rounding noise on top of a degenerate design.
HESSIAN_RTOL = 1e-12


class Path(str, enum.Enum):
    NAIVE = "naive"
    REDUCED = "reduced"

    @classmethod
    def parse(cls, value) -> "Path":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown path {value!r}; expected 'naive' or 'reduced'") from None


def _tetrad_sum(path: Path):
    return tetrad_sum_naive if path is Path.NAIVE else tetrad_sum_reduced


def _check_hessian(gamma: float, x: np.ndarray) -> float:
    scale = float(np.mean(x[offdiag_mask(x.shape[0])] ** 2))
    if not gamma > HESSIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise DegenerateHessian(
            f"Hessian {gamma:.3e} is not positive relative to mean(x^2)={scale:.3e}; "
            "x has no variation beyond additive row/column effects"
        )
    return gamma


def _hessian(data: DyadicDataset, path: Path) -> float:
    x = data.x
    gamma = _tetrad_sum(path)(x, x) / n_ordered_tetrads(data.n_nodes)
    return _check_hessian(gamma, x)


def hessian_naive(data: DyadicDataset) -> float:
    """Mean squared tetrad difference of x, by full enumeration."""
    return _hessian(data, Path.NAIVE)


def hessian_reduced(data: DyadicDataset) -> float:
    """Same as :func:`hessian_naive` using row/column aggregates, O(N^2)."""
    return _hessian(data, Path.REDUCED)


@dataclass(frozen=True)
class FitResult:
    beta_hat: float
    gamma_hat: float
    score_hat: float  # mean of tilde(x) * tilde(y) over tetrads
    n_nodes: int
    path: Path

    def to_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "gamma_hat": self.gamma_hat,
            "score_hat": self.score_hat,
            "n_nodes": self.n_nodes,
            "path": self.path.value,
        }


def fit(data: DyadicDataset, path="reduced") -> FitResult:
    path = Path.parse(path)
    tsum = _tetrad_sum(path)
    n_tuples = n_ordered_tetrads(data.n_nodes)
    sxx = tsum(data.x, data.x)
    gamma = _check_hessian(sxx / n_tuples, data.x)
    sxy = tsum(data.x, data.y)
    return FitResult(
        beta_hat=sxy / sxx,
        gamma_hat=gamma,
        score_hat=sxy / n_tuples,
        n_nodes=data.n_nodes,
        path=path,
    )


def residual_matrix(data: DyadicDataset, beta_hat: float) -> np.ndarray:
    """Dyad-level residual ``y - beta_hat * x``.

    Fixed effects are left in; they vanish under every tetrad difference.
    """
    resid = data.y - beta_hat * data.x
    np.fill_diagonal(resid, 0.0)
    return resid


def two_way_fe_ols(data: DyadicDataset) -> float:
    """Slope from OLS of y on x with sender and receiver dummies (diagnostic only)."""
    n = data.n_nodes
    rows, cols = np.nonzero(offdiag_mask(n))
    m = rows.size
    design = np.zeros((m, 1 + n + n - 1))
    design[:, 0] = data.x[rows, cols]
    design[np.arange(m), 1 + rows] = 1.0
    # drop one receiver dummy to avoid collinearity with the sender block
    keep = cols > 0
    design[np.arange(m)[keep], n + cols[keep]] = 1.0
    coef, *_ = np.linalg.lstsq(design, data.y[rows, cols], rcond=None)
    return float(coef[0])
