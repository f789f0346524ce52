"""Monte Carlo checks of the variance theory behind the estimator.

All expectations here are Monte Carlo estimates with standard errors. Draws
come in fixed-size blocks, block ``k`` seeded by ``derive(seed, k)``, so
results depend only on ``(seed, n_draws)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, sqrt
from typing import Dict, Sequence, Tuple

import numpy as np

from .core import DyadicDataset, n_ordered_tetrads, pairs_with_q_common
from .designs import CondMeanSpec, Design, cond_mean_spec, regressor, sample_shifted_beta
from .differencing import kernel_values, tetrad_sum_reduced
from .errors import DegenerateSize, OracleInputError
from .simulate import derive

BLOCK = 10_000

# Second 4-set compared against {0, 1, 2, 3}, indexed by the overlap size q.
# "2b" is a second overlap pattern for q = 2.
PARTNER_SETS: Dict[object, Tuple[int, int, int, int]] = {
    0: (4, 5, 6, 7),
    1: (3, 4, 5, 6),
    2: (0, 1, 4, 5),
    "2b": (2, 3, 6, 7),
    3: (1, 2, 3, 4),
    4: (0, 1, 2, 3),
}
BASE_SET = (0, 1, 2, 3)

_PERMS = list(itertools.permutations(range(4)))


@dataclass(frozen=True)
class NodeDraws:
    a: np.ndarray  # (B, n)
    b: np.ndarray
    theta: np.ndarray
    xi: np.ndarray
    x: np.ndarray  # (B, n, n)
    u: np.ndarray


def draw_networks(design, n_nodes: int, batch: int, rng: np.random.Generator, u_scale: float = 1.0) -> NodeDraws:
    """``batch`` independent networks, same draw order per node as ``simulate.generate``."""
    design = Design.parse(design)
    a = sample_shifted_beta(rng, (batch, n_nodes))
    b = sample_shifted_beta(rng, (batch, n_nodes))
    theta = rng.standard_normal((batch, n_nodes))
    xi = rng.standard_normal((batch, n_nodes))
    u = rng.standard_normal((batch, n_nodes, n_nodes)) * u_scale
    x = regressor(design, a[:, :, None], b[:, None, :], theta[:, :, None], xi[:, None, :])
    idx = np.arange(n_nodes)
    x[:, idx, idx] = 0.0
    u[:, idx, idx] = 0.0
    return NodeDraws(a, b, theta, xi, x, u)


def _blocks(n_draws: int, block: int = BLOCK):
    start = 0
    k = 0
    while start < n_draws:
        size = min(block, n_draws - start)
        yield k, size
        start += size
        k += 1


def batch_tilde(v: np.ndarray, t) -> np.ndarray:
    i, j, k, l = t
    return (v[:, i, j] - v[:, i, k]) - (v[:, l, j] - v[:, l, k])


def batch_kernel(x: np.ndarray, u: np.ndarray, c: Sequence[int]) -> np.ndarray:
    """Kernel on 4-set ``c`` for each network in a batch."""
    members = sorted(c)
    total = np.zeros(x.shape[0])
    for p in _PERMS:
        t = [members[q] for q in p]
        total += batch_tilde(x, t) * batch_tilde(u, t)
    return total / 24.0


def _mean_se(z: np.ndarray) -> Tuple[float, float]:
    return float(np.mean(z)), float(np.std(z, ddof=1) / sqrt(z.size))


# --- covariances of kernels on overlapping 4-sets ------------------------------

@dataclass(frozen=True)
class DeltaQReport:
    """Kernel covariances by overlap size, with Monte Carlo standard errors."""

    delta_q: np.ndarray  # length 5
    se: np.ndarray
    draws: int
    seed: int
    design: Design
    delta2_alt: float = float("nan")  # q = 2 with a second overlap pattern
    delta2_alt_se: float = float("nan")
    # per-draw centred products, columns q = 0..4; kept for combined SEs
    terms: np.ndarray = field(default=None, repr=False, compare=False)

    def combination(self, weights: Sequence[float]) -> Tuple[float, float]:
        """Estimate and SE of ``sum_q w_q * Delta_q`` from the same draws."""
        z = self.terms @ np.asarray(weights, dtype=float)
        return _mean_se(z)

    def to_dict(self) -> dict:
        return {
            "design": self.design.value,
            "draws": self.draws,
            "seed": self.seed,
            "delta_q": [float(v) for v in self.delta_q],
            "se": [float(v) for v in self.se],
            "delta2_alt": self.delta2_alt,
            "delta2_alt_se": self.delta2_alt_se,
        }


def estimate_delta_q(design, n_draws: int, seed: int, u_scale: float = 1.0) -> DeltaQReport:
    """Covariance of the kernel on ``{0,1,2,3}`` with the kernel on a set sharing q nodes.

    Each draw is a fresh 8-node network. The kernel has mean zero, so the
    covariance is estimated by the mean product, with centring by the
    sample means to keep the estimator unbiased.
    """
    design = Design.parse(design)
    if n_draws < 2:
        raise ValueError("need at least two draws")
    keys = [0, 1, 2, 3, 4, "2b"]
    base_parts = []
    partner_parts = {k: [] for k in keys}
    for k, size in _blocks(n_draws):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, 8, size, rng, u_scale)
        base = batch_kernel(d.x, d.u, BASE_SET)
        base_parts.append(base)
        for key in keys:
            partner_parts[key].append(base if key == 4 else batch_kernel(d.x, d.u, PARTNER_SETS[key]))
    base = np.concatenate(base_parts)
    centred = base - base.mean()
    cols = {}
    for key in keys:
        other = np.concatenate(partner_parts[key])
        cols[key] = centred * (other - other.mean()) * n_draws / (n_draws - 1)
    terms = np.column_stack([cols[q] for q in range(5)])
    est = terms.mean(axis=0)
    se = terms.std(axis=0, ddof=1) / sqrt(n_draws)
    alt, alt_se = _mean_se(cols["2b"])
    return DeltaQReport(est, se, n_draws, seed, design, alt, alt_se, terms)


def hoeffding_variance(delta_q: Sequence[float], n_nodes: int) -> float:
    """Exact variance of the score statistic from the kernel covariances."""
    if n_nodes < 4:
        raise DegenerateSize(f"need at least 4 nodes, got {n_nodes}")
    total = sum(pairs_with_q_common(n_nodes, q) * float(delta_q[q]) for q in range(5))
    return total / comb(n_nodes, 4)


def hoeffding_weights(n_nodes: int) -> np.ndarray:
    return np.array([pairs_with_q_common(n_nodes, q) for q in range(5)], dtype=float) / comb(n_nodes, 4)


@dataclass(frozen=True)
class HoeffdingCheck:
    n_nodes: int
    direct_var: float
    direct_se: float
    assembled_var: float
    assembled_se: float

    @property
    def z(self) -> float:
        return (self.direct_var - self.assembled_var) / sqrt(self.direct_se**2 + self.assembled_se**2)

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "direct_var": self.direct_var,
            "direct_se": self.direct_se,
            "assembled_var": self.assembled_var,
            "assembled_se": self.assembled_se,
            "z": self.z,
        }


def direct_statistic_draws(design, n_nodes: int, n_draws: int, seed: int, u_scale: float = 1.0) -> np.ndarray:
    """Score statistic on ``n_draws`` fresh networks, by full 4-set enumeration."""
    combos = list(itertools.combinations(range(n_nodes), 4))
    out = []
    for k, size in _blocks(n_draws):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, n_nodes, size, rng, u_scale)
        out.append(np.mean([batch_kernel(d.x, d.u, c) for c in combos], axis=0))
    return np.concatenate(out)


def hoeffding_check(design, n_nodes: int, n_draws: int, seed: int) -> HoeffdingCheck:
    """Direct variance of the statistic against the assembled kernel covariances.

    The two sides use independent seeds so their errors are independent.
    """
    stats = direct_statistic_draws(design, n_nodes, n_draws, derive(seed, 1))
    centred = stats - stats.mean()
    direct, direct_se = _mean_se(centred**2 * n_draws / (n_draws - 1))
    report = estimate_delta_q(design, n_draws, derive(seed, 2))
    assembled, assembled_se = report.combination(hoeffding_weights(n_nodes))
    return HoeffdingCheck(n_nodes, direct, direct_se, assembled, assembled_se)


# --- dyad-level projections ----------------------------------------------------

def centred_regressor(spec: CondMeanSpec, d: NodeDraws) -> np.ndarray:
    """x minus its ego and alter conditional means plus the grand mean, per draw."""
    ego = spec.mean_given_a(d.a, d.theta)
    alter = spec.mean_given_b(d.b, d.xi)
    h = d.x - ego[:, :, None] - alter[:, None, :] + spec.grand_mean
    n = d.x.shape[1]
    idx = np.arange(n)
    h[:, idx, idx] = 0.0
    return h


def estimate_delta2_projection(design, n_draws: int, seed: int, sigma_u2: float = 1.0) -> Tuple[float, float]:
    """delta_2 = E[s_bar^2] with s_bar = h * U / 3 on one directed dyad.

    ``h`` is x centred by its exact conditional means.
    """
    spec = cond_mean_spec(design)
    vals = []
    for k, size in _blocks(n_draws):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, 2, size, rng, sqrt(sigma_u2))
        h = centred_regressor(spec, d)
        vals.append((h[:, 0, 1] * d.u[:, 0, 1] / 3.0) ** 2)
    return _mean_se(np.concatenate(vals))


def conditional_kernel_mean_mc(
    design, ego: Tuple[float, float], alter: Tuple[float, float], u_ij: float, n_draws: int, seed: int
) -> Tuple[float, float]:
    """E[kernel | characteristics of ego 0, alter 1, and u[0, 1]] by brute force.

    Nodes 0 and 1 are pinned; everything else, including the other errors on
    dyads between them, is redrawn. The kernel is taken on ``{0, 1, 2, 3}``.
    """
    design = Design.parse(design)
    vals = []
    for k, size in _blocks(n_draws):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, 4, size, rng)
        a, b, th, xi = d.a.copy(), d.b.copy(), d.theta.copy(), d.xi.copy()
        a[:, 0], th[:, 0] = ego
        b[:, 1], xi[:, 1] = alter
        x = regressor(design, a[:, :, None], b[:, None, :], th[:, :, None], xi[:, None, :])
        idx = np.arange(4)
        x[:, idx, idx] = 0.0
        u = d.u.copy()
        u[:, 0, 1] = u_ij
        vals.append(batch_kernel(x, u, BASE_SET))
    return _mean_se(np.concatenate(vals))


@dataclass(frozen=True)
class ProjectionValue:
    u_n: float
    hajek1: float
    hajek2: float
    term_magnitude: float = float("nan")  # scaled sum of |h * u| over dyads


def _hajek_terms(h: np.ndarray, u: np.ndarray) -> Tuple[float, float, float]:
    """Both projections plus the summed absolute terms (the rounding scale)."""
    n = h.shape[0]
    scale = 4.0 / (n * (n - 1))
    hu = h * u
    off = ~np.eye(n, dtype=bool)
    first = scale * float(np.sum(hu[off]))
    iu = np.triu_indices(n, k=1)
    second = scale * float(np.sum(hu[iu] + hu.T[iu]))
    return first, second, scale * float(np.sum(np.abs(hu[off])))


def regrouping_gap(first, second, magnitude) -> np.ndarray:
    """|first - second| relative to the size of the terms being summed.

    The two projections add the same dyad terms in a different grouping, so
    rounding error scales with the term magnitudes, not with the (possibly
    cancelling) total.
    """
    return np.abs(np.asarray(first) - np.asarray(second)) / np.maximum(np.asarray(magnitude), np.finfo(float).tiny)


def hajek_projections(data: DyadicDataset, spec: CondMeanSpec, enumerate_all: bool = True) -> ProjectionValue:
    """Score statistic and its two projections on one dataset with latent truth.

    The first projection sums over directed dyads; the second sums the same
    dyad terms pair by pair.
    """
    if data.latent is None:
        raise OracleInputError("projections need the latent characteristics and errors")
    lat = data.latent
    n = data.n_nodes
    h = data.x - spec.mean_given_a(lat.a, lat.theta)[:, None] - spec.mean_given_b(lat.b, lat.xi)[None, :] + spec.grand_mean
    np.fill_diagonal(h, 0.0)
    if enumerate_all:
        u_n = float(np.mean(kernel_values(data.x, lat.u)))
    else:
        u_n = tetrad_sum_reduced(data.x, lat.u) / n_ordered_tetrads(n)
    first, second, magnitude = _hajek_terms(h, lat.u)
    return ProjectionValue(u_n, first, second, magnitude)


@dataclass(frozen=True)
class ProjectionDraws:
    n_nodes: int
    u_n: np.ndarray
    hajek1: np.ndarray
    hajek2: np.ndarray
    term_magnitude: np.ndarray

    def regrouping_gap(self) -> np.ndarray:
        return regrouping_gap(self.hajek1, self.hajek2, self.term_magnitude)


def projection_draws(
    design, n_nodes: int, n_draws: int, seed: int, u_scale: float = 1.0, enumerate_all: bool = False
) -> ProjectionDraws:
    """Statistic and both projections over independent networks.

    With ``enumerate_all`` False the statistic comes from the reduced tetrad
    sum, which equals full enumeration up to rounding.
    """
    spec = cond_mean_spec(design)
    u_n, first, second, magnitude = [], [], [], []
    norm = n_ordered_tetrads(n_nodes)
    for k, size in _blocks(n_draws, 2000):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, n_nodes, size, rng, u_scale)
        h = centred_regressor(spec, d)
        for r in range(size):
            f, s, m = _hajek_terms(h[r], d.u[r])
            first.append(f)
            second.append(s)
            magnitude.append(m)
            if enumerate_all:
                u_n.append(float(np.mean(kernel_values(d.x[r], d.u[r]))))
            else:
                u_n.append(tetrad_sum_reduced(d.x[r], d.u[r]) / norm)
    return ProjectionDraws(n_nodes, np.array(u_n), np.array(first), np.array(second), np.array(magnitude))


def _var_se(z: np.ndarray) -> Tuple[float, float]:
    c = z - z.mean()
    return _mean_se(c**2 * z.size / (z.size - 1))


@dataclass(frozen=True)
class ProjectionCheck:
    design: Design
    n_nodes: int
    draws: int
    var_hajek1: Tuple[float, float]  # Var(sqrt(N(N-1)) * first projection), SE
    var_hajek2: Tuple[float, float]
    var_statistic: Tuple[float, float]
    target_delta: Tuple[float, float]  # 144 * delta_2, SE
    target_Delta: Tuple[float, float]  # 72 * Delta_2, SE
    max_rel_gap_12: float  # worst regrouping_gap over draws
    cov_stat_hajek1: Tuple[float, float]  # N(N-1) * Cov(U_N, first), SE
    scaled_mse: Tuple[float, float]  # N(N-1) * E[(first - U_N)^2], SE

    @staticmethod
    def z(a: Tuple[float, float], b: Tuple[float, float]) -> float:
        return (a[0] - b[0]) / sqrt(a[1] ** 2 + b[1] ** 2)

    def to_dict(self) -> dict:
        out = {"design": self.design.value, "n_nodes": self.n_nodes, "draws": self.draws}
        for name in (
            "var_hajek1", "var_hajek2", "var_statistic", "target_delta", "target_Delta",
            "cov_stat_hajek1", "scaled_mse",
        ):
            est, se = getattr(self, name)
            out[name] = {"estimate": est, "se": se}
        out["max_rel_gap_12"] = self.max_rel_gap_12
        out["z_hajek1_vs_delta"] = self.z(self.var_hajek1, self.target_delta)
        out["z_hajek2_vs_Delta"] = self.z(self.var_hajek2, self.target_Delta)
        return out


def projection_variance_check(
    design, n_nodes: int, n_draws: int, seed: int, u_scale: float = 1.0, target_draws: int = None
) -> ProjectionCheck:
    """Projection variances against 144 * delta_2 and 72 * Delta_2."""
    design = Design.parse(design)
    target_draws = n_draws if target_draws is None else target_draws
    pd = projection_draws(design, n_nodes, n_draws, derive(seed, 1), u_scale)
    scale = n_nodes * (n_nodes - 1)
    v1 = _var_se(sqrt(scale) * pd.hajek1)
    v2 = _var_se(sqrt(scale) * pd.hajek2)
    vs = _var_se(sqrt(scale) * pd.u_n)
    d2, d2_se = estimate_delta2_projection(design, target_draws, derive(seed, 2), u_scale**2)
    rep = estimate_delta_q(design, target_draws, derive(seed, 3), u_scale)
    gap = np.max(pd.regrouping_gap())
    c1 = (pd.u_n - pd.u_n.mean()) * (pd.hajek1 - pd.hajek1.mean()) * scale
    diff = (pd.hajek1 - pd.u_n) ** 2 * scale
    return ProjectionCheck(
        design=design,
        n_nodes=n_nodes,
        draws=n_draws,
        var_hajek1=v1,
        var_hajek2=v2,
        var_statistic=vs,
        target_delta=(144.0 * d2, 144.0 * d2_se),
        target_Delta=(72.0 * rep.delta_q[2], 72.0 * rep.se[2]),
        max_rel_gap_12=float(gap),
        cov_stat_hajek1=_mean_se(c1),
        scaled_mse=_mean_se(diff),
    )


# --- closed form for Delta_2 ------------------------------------------------

# (first tetrad, second tetrad, coefficient) over six nodes, 1-based labels.
CLOSED_FORM_TERMS = (
    ((1, 2, 3, 4), (1, 2, 5, 6), 8),
    ((1, 2, 3, 4), (1, 5, 2, 6), -16),
    ((1, 2, 3, 4), (5, 2, 6, 1), -16),
    ((1, 2, 3, 4), (6, 5, 2, 1), 16),
    ((1, 3, 2, 4), (1, 5, 2, 6), 8),
    ((1, 3, 2, 4), (5, 2, 6, 1), 16),
    ((1, 3, 2, 4), (6, 5, 2, 1), -16),
    ((3, 2, 4, 1), (5, 2, 6, 1), 8),
    ((3, 2, 4, 1), (6, 5, 2, 1), -16),
    ((4, 3, 2, 1), (6, 5, 2, 1), 8),
)


@dataclass(frozen=True)
class ClosedFormDelta2:
    value: float
    se: float
    moments: Tuple[Tuple[float, float], ...]  # each E[x~ x~] with its SE
    draws: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "se": self.se,
            "draws": self.draws,
            "moments": [{"estimate": m, "se": s} for m, s in self.moments],
        }


def closed_form_delta2(design, sigma_u2: float = 1.0, n_draws: int = 1_000_000, seed: int = 0) -> ClosedFormDelta2:
    """Delta_2 from ten regressor-only moments over six nodes, times the error variance."""
    design = Design.parse(design)
    per_term = [[] for _ in CLOSED_FORM_TERMS]
    for k, size in _blocks(n_draws, 50_000):
        rng = np.random.default_rng(derive(seed, k))
        d = draw_networks(design, 6, size, rng)
        for m, (t1, t2, _) in enumerate(CLOSED_FORM_TERMS):
            a = batch_tilde(d.x, [v - 1 for v in t1])
            b = batch_tilde(d.x, [v - 1 for v in t2])
            per_term[m].append(a * b)
    cols = np.column_stack([np.concatenate(p) for p in per_term])
    coefs = np.array([c for _, _, c in CLOSED_FORM_TERMS], dtype=float)
    combined = cols @ coefs * (sigma_u2 / 24.0**2)
    value, se = _mean_se(combined)
    moments = tuple(_mean_se(cols[:, m]) for m in range(cols.shape[1]))
    return ClosedFormDelta2(value, se, moments, n_draws)


def cond_mean_consistency(design, n_draws: int, seed: int) -> Dict[str, Tuple[float, float]]:
    """MC averages of both conditional means, to compare with the grand mean."""
    spec = cond_mean_spec(design)
    rng = np.random.default_rng(derive(seed, 0))
    d = draw_networks(design, 1, n_draws, rng)
    ego = spec.mean_given_a(d.a[:, 0], d.theta[:, 0])
    alter = spec.mean_given_b(d.b[:, 0], d.xi[:, 0])
    return {"ego": _mean_se(ego), "alter": _mean_se(alter), "grand_mean": (spec.grand_mean, 0.0)}
