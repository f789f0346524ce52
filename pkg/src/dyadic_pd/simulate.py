"""Data generation for the four designs and a reproducible Monte Carlo runner.

Every replication draws from its own generator seeded by
``derive(seed, rep)``, so results do not depend on how reps are scheduled
across worker processes.
"""
from __future__ import annotations

import csv
import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .core import DyadicDataset, LatentTruth
from .dataio import fmt
from .designs import Design, regressor, sample_shifted_beta
from .errors import DegenerateHessian, DegenerateVariance
from .estimator import Path as FitPath
from .estimator import fit
from .variance import Z_975, estimate_avar

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive(seed: int, index: int) -> int:
    """Per-replication seed: a SplitMix64 step at counter ``index``.

    For a fixed ``seed`` the map is a bijection of ``index mod 2**64``.
    """
    base = _mix64(int(seed) & MASK64)
    return _mix64((base + (int(index) + 1) * GOLDEN) & MASK64)


class AvarMode(str, enum.Enum):
    DELTA2 = "delta2"
    BIG_DELTA2 = "Delta2"
    BOTH = "both"

    @classmethod
    def parse(cls, value) -> "AvarMode":
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value == value:
                return member
        raise ValueError(f"unknown avar mode {value!r}; expected delta2, Delta2 or both")

    @property
    def uses_delta(self) -> bool:
        return self is not AvarMode.BIG_DELTA2

    @property
    def uses_Delta(self) -> bool:
        return self is not AvarMode.DELTA2


def default_path(n_nodes: int) -> FitPath:
    return FitPath.REDUCED if n_nodes > 40 else FitPath.NAIVE


@dataclass(frozen=True)
class McConfig:
    design: Design
    n_nodes: int
    n_reps: int
    seed: int = 0
    beta1: float = 0.0
    avar_mode: AvarMode = AvarMode.BOTH
    path: Optional[FitPath] = None  # None picks by network size
    u_scale: float = 1.0  # 0 gives exact-fit data

    def __post_init__(self):
        object.__setattr__(self, "design", Design.parse(self.design))
        object.__setattr__(self, "avar_mode", AvarMode.parse(self.avar_mode))
        if self.path is not None:
            object.__setattr__(self, "path", FitPath.parse(self.path))
        if self.n_nodes < 4:
            raise ValueError(f"n_nodes must be at least 4, got {self.n_nodes}")
        if self.n_reps < 1:
            raise ValueError(f"n_reps must be positive, got {self.n_reps}")

    @property
    def fit_path(self) -> FitPath:
        return self.path if self.path is not None else default_path(self.n_nodes)


def generate(design, n_nodes: int, beta1: float, rep_seed: int, u_scale: float = 1.0) -> DyadicDataset:
    design = Design.parse(design)
    rng = np.random.default_rng(rep_seed)
    a = sample_shifted_beta(rng, n_nodes)
    b = sample_shifted_beta(rng, n_nodes)
    theta = rng.standard_normal(n_nodes)
    xi = rng.standard_normal(n_nodes)
    u = rng.standard_normal((n_nodes, n_nodes)) * u_scale
    np.fill_diagonal(u, 0.0)
    x = regressor(design, a[:, None], b[None, :], theta[:, None], xi[None, :])
    np.fill_diagonal(x, 0.0)
    y = beta1 * x + theta[:, None] + xi[None, :] + u
    latent = LatentTruth(a=a, b=b, theta=theta, xi=xi, u=u, beta1=beta1)
    return DyadicDataset(y=y, x=x, latent=latent)


REP_FIELDS = ("beta_hat", "avar_delta2", "avar_Delta2", "t_delta2", "t_Delta2", "failed")


@dataclass(frozen=True)
class RepRecord:
    rep: int
    rep_seed: int
    beta_hat: float
    avar_delta2: float
    avar_Delta2: float
    t_delta2: float
    t_Delta2: float
    failed: str = ""  # empty, "hessian" or "variance"


@dataclass(frozen=True)
class McTableRow:
    design: Design
    S: int
    N: int
    bias: float
    var_beta: float
    mean_avar_delta: float
    mean_avar_Delta: float
    size_delta: float
    size_Delta: float
    failures: int = 0

    def csv_fields(self) -> list:
        return [
            self.design.value,
            str(self.S),
            str(self.N),
            fmt(self.bias),
            fmt(self.var_beta),
            fmt(self.mean_avar_delta),
            fmt(self.mean_avar_Delta),
            fmt(self.size_delta),
            fmt(self.size_Delta),
            str(self.failures),
        ]


TABLE_HEADER = (
    "design", "S", "N", "bias", "var_beta",
    "mean_avar_delta2", "mean_avar_Delta2", "size_delta2", "size_Delta2", "failures",
)


@dataclass(frozen=True)
class McResult:
    config: McConfig
    per_rep: List[RepRecord]
    summary: McTableRow

    def betas(self) -> np.ndarray:
        return np.array([r.beta_hat for r in self.per_rep if r.failed != "hessian"])


def run_rep(config: McConfig, rep: int) -> RepRecord:
    rep_seed = derive(config.seed, rep)
    data = generate(config.design, config.n_nodes, config.beta1, rep_seed, config.u_scale)
    nan = float("nan")
    try:
        result = fit(data, config.fit_path)
    except DegenerateHessian:
        return RepRecord(rep, rep_seed, nan, nan, nan, nan, nan, "hessian")
    try:
        av = estimate_avar(data, result, beta_null=config.beta1)
    except DegenerateVariance:
        return RepRecord(rep, rep_seed, result.beta_hat, nan, nan, nan, nan, "variance")
    return RepRecord(rep, rep_seed, result.beta_hat, av.avar_delta, av.avar_Delta, av.t_delta, av.t_Delta)


def _run_chunk(args) -> List[RepRecord]:
    config, reps = args
    return [run_rep(config, r) for r in reps]


def summarize(config: McConfig, per_rep: Sequence[RepRecord]) -> McTableRow:
    """Table row from per-rep records, reduced in rep-index order."""
    nan = float("nan")
    fitted = [r for r in per_rep if r.failed != "hessian"]
    with_var = [r for r in fitted if not r.failed]
    betas = np.array([r.beta_hat for r in fitted])
    bias = float(np.mean(betas) - config.beta1) if betas.size else nan
    var_beta = float(np.var(betas, ddof=1)) if betas.size > 1 else nan

    def col(name, used):
        vals = np.array([getattr(r, name) for r in with_var])
        if not used or vals.size == 0:
            return nan
        return float(np.mean(vals))

    def size(name, used):
        vals = np.array([getattr(r, name) for r in with_var])
        if not used or vals.size == 0:
            return nan
        return float(np.mean(np.abs(vals) > Z_975))

    mode = config.avar_mode
    return McTableRow(
        design=config.design,
        S=config.n_reps,
        N=config.n_nodes,
        bias=bias,
        var_beta=var_beta,
        mean_avar_delta=col("avar_delta2", mode.uses_delta),
        mean_avar_Delta=col("avar_Delta2", mode.uses_Delta),
        size_delta=size("t_delta2", mode.uses_delta),
        size_Delta=size("t_Delta2", mode.uses_Delta),
        failures=len(per_rep) - len(with_var),
    )


def resolve_workers(workers: int) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def run_mc(config: McConfig, workers: int = 1, rep_order: Optional[Sequence[int]] = None) -> McResult:
    """Run every replication and summarise.

    ``workers`` > 1 spreads reps over processes; ``rep_order`` changes the
    execution order. Neither affects any output value.
    """
    order = list(range(config.n_reps)) if rep_order is None else list(rep_order)
    if sorted(order) != list(range(config.n_reps)):
        raise ValueError("rep_order must be a permutation of range(n_reps)")
    workers = resolve_workers(workers)
    if workers == 1:
        records = [run_rep(config, r) for r in order]
    else:
        chunks = [order[k::workers] for k in range(workers) if order[k::workers]]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            records = [rec for part in pool.map(_run_chunk, [(config, c) for c in chunks]) for rec in part]
    records.sort(key=lambda r: r.rep)
    return McResult(config=config, per_rep=records, summary=summarize(config, records))


# --- exports -------------------------------------------------------------------

def write_table(path, rows: Sequence[McTableRow]) -> None:
    with Path(path).open("w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for row in rows:
            w.writerow(row.csv_fields())


def write_reps(path, result: McResult) -> None:
    with Path(path).open("w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(("rep", "rep_seed") + REP_FIELDS)
        for r in result.per_rep:
            w.writerow([r.rep, r.rep_seed] + [fmt(getattr(r, f)) for f in REP_FIELDS[:-1]] + [r.failed])


@dataclass(frozen=True)
class DistributionExport:
    betas: np.ndarray
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    qq_theoretical: np.ndarray
    qq_empirical: np.ndarray

    def max_qq_gap(self) -> float:
        return float(np.max(np.abs(self.qq_empirical - self.qq_theoretical)))


def empirical_distribution_export(result: McResult, bins: int = 40) -> DistributionExport:
    """Histogram of the estimates and QQ pairs of their standardised values."""
    betas = result.betas()
    counts, edges = np.histogram(betas, bins=bins)
    s = betas.size
    standardized = np.sort((betas - betas.mean()) / betas.std(ddof=1))
    theoretical = norm.ppf((np.arange(1, s + 1) - 0.5) / s)
    return DistributionExport(betas, edges, counts, theoretical, standardized)


def write_hist(path, export: DistributionExport) -> None:
    with Path(path).open("w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(("bin_left", "bin_right", "count"))
        for k, c in enumerate(export.hist_counts):
            w.writerow((fmt(export.hist_edges[k]), fmt(export.hist_edges[k + 1]), int(c)))


def write_qq(path, export: DistributionExport) -> None:
    with Path(path).open("w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(("theoretical", "empirical"))
        for t, e in zip(export.qq_theoretical, export.qq_empirical):
            w.writerow((fmt(t), fmt(e)))


@dataclass(frozen=True)
class GridCell:
    design: Design
    S: int
    N: int


def emit_tables(
    cells: Sequence[GridCell],
    seed: int = 0,
    beta1: float = 0.0,
    path: Optional[FitPath] = None,
    workers: int = 1,
) -> List[McTableRow]:
    """One summary row per (design, S, N) cell, all seeded with ``seed``."""
    rows = []
    for cell in cells:
        cfg = McConfig(design=cell.design, n_nodes=cell.N, n_reps=cell.S, seed=seed, beta1=beta1, path=path)
        rows.append(run_mc(cfg, workers=workers).summary)
    return rows
