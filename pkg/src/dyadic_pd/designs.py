"""The four simulation designs and their exact conditional means of x.

Node characteristics: ``a = V - 1/2`` (ego), ``b = V' - 1/2`` (alter) with
independent ``V, V' ~ Beta(2, 2)``, plus standard-normal fixed effects
``theta`` (ego) and ``xi`` (alter).

    d1  x = -|a_i - b_j|
    d2  x = -|a_i - b_j| + theta_i + xi_j
    d3  x = 1{a_i - b_j > 0}
    d4  x = 1{a_i - b_j + theta_i + xi_j > 0}
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import ndtr


class Design(str, enum.Enum):
    D1 = "d1"
    D2 = "d2"
    D3 = "d3"
    D4 = "d4"

    @classmethod
    def parse(cls, value) -> "Design":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown design {value!r}; expected one of d1, d2, d3, d4") from None


def regressor(design: Design, a, b, theta, xi) -> np.ndarray:
    """x for ego characteristics ``(a, theta)`` and alter characteristics ``(b, xi)``.

    Arguments broadcast, so ``a[:, None]`` against ``b[None, :]`` gives the
    full matrix.
    """
    design = Design.parse(design)
    if design is Design.D1:
        return -np.abs(a - b)
    if design is Design.D2:
        return -np.abs(a - b) + theta + xi
    if design is Design.D3:
        return np.asarray(a - b > 0, dtype=float)
    return np.asarray(a - b + theta + xi > 0, dtype=float)


def sample_shifted_beta(rng: np.random.Generator, size) -> np.ndarray:
    return rng.beta(2.0, 2.0, size=size) - 0.5


# --- exact moments of the shifted Beta(2, 2) law on [-1/2, 1/2] ---------------

def shifted_beta_pdf(v):
    v = np.asarray(v, dtype=float)
    return np.where(np.abs(v) <= 0.5, 1.5 - 6.0 * v * v, 0.0)


def shifted_beta_cdf(v):
    v = np.clip(np.asarray(v, dtype=float), -0.5, 0.5)
    return 0.5 + 1.5 * v - 2.0 * v**3


QUAD_NODES = 48


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _integrate(fn: Callable[[np.ndarray], np.ndarray], lo, hi, n_nodes: int) -> np.ndarray:
    """Gauss-Legendre integral of ``fn`` on ``[lo, hi]``; ``lo``/``hi`` may be arrays."""
    nodes, weights = _gauss_legendre(n_nodes)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    pts = lo + half * (nodes + 1.0)
    return np.sum(weights * fn(pts), axis=-1) * half[..., 0]


def expected_abs_gap(a, n_nodes: int = QUAD_NODES) -> np.ndarray:
    """E|a - B| for B from the shifted Beta(2, 2) law, split at the kink."""
    a = np.clip(np.asarray(a, dtype=float), -0.5, 0.5)
    left = _integrate(lambda b: (a[..., None] - b) * shifted_beta_pdf(b), -0.5, a, n_nodes)
    right = _integrate(lambda b: (b - a[..., None]) * shifted_beta_pdf(b), a, 0.5, n_nodes)
    return left + right


def mean_abs_gap(n_nodes: int = QUAD_NODES) -> float:
    """E|A - B| for two independent shifted Beta(2, 2) draws."""
    return float(_integrate(lambda a: shifted_beta_pdf(a) * expected_abs_gap(a, n_nodes), -0.5, 0.5, n_nodes))


def probit_mean_over_beta(shift, sign: float, n_nodes: int = QUAD_NODES) -> np.ndarray:
    """E[Phi(shift + sign * V)] for V from the shifted Beta(2, 2) law."""
    shift = np.asarray(shift, dtype=float)
    return _integrate(
        lambda v: ndtr(shift[..., None] + sign * v) * shifted_beta_pdf(v), -0.5, 0.5, n_nodes
    )


@dataclass(frozen=True)
class CondMeanSpec:
    """Conditional means of x given the ego's or the alter's characteristics.

    ``mean_given_a(a, theta)`` is E[x_ij | ego i]; ``mean_given_b(b, xi)`` is
    E[x_ij | alter j]. Designs without fixed effects in x ignore the second
    argument.
    """

    design: Design
    mean_given_a: Callable
    mean_given_b: Callable
    grand_mean: float

    def centred(self, x: np.ndarray, a, b, theta, xi) -> np.ndarray:
        """x minus both conditional means plus the grand mean, entrywise."""
        return (
            x
            - self.mean_given_a(a, theta)[:, None]
            - self.mean_given_b(b, xi)[None, :]
            + self.grand_mean
        )


def cond_mean_spec(design, n_nodes: int = QUAD_NODES) -> CondMeanSpec:
    design = Design.parse(design)
    if design in (Design.D1, Design.D2):
        grand = -mean_abs_gap(n_nodes)
        with_fe = design is Design.D2

        def given_a(a, theta=None):
            base = -expected_abs_gap(a, n_nodes)
            return base + np.asarray(theta, dtype=float) if with_fe else base

        def given_b(b, xi=None):
            # A and B share a law, so E|A - b| has the same form
            base = -expected_abs_gap(b, n_nodes)
            return base + np.asarray(xi, dtype=float) if with_fe else base

        return CondMeanSpec(design, given_a, given_b, grand)

    if design is Design.D3:
        return CondMeanSpec(
            design,
            lambda a, theta=None: shifted_beta_cdf(a),
            lambda b, xi=None: 1.0 - shifted_beta_cdf(b),
            0.5,
        )

    # d4: the other node's normal fixed effect integrates to Phi exactly,
    # leaving one smooth integral over its Beta component.
    def given_a(a, theta):
        # P(a - B + theta + xi > 0) = E_B[Phi(a + theta - B)]
        return probit_mean_over_beta(np.asarray(a) + np.asarray(theta), -1.0, n_nodes)

    def given_b(b, xi):
        # P(A - b + theta + xi > 0) = E_A[Phi(A - b + xi)]
        return probit_mean_over_beta(np.asarray(xi) - np.asarray(b), 1.0, n_nodes)

    return CondMeanSpec(design, given_a, given_b, 0.5)
