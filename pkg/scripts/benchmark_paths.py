"""Wall-clock comparison of full tetrad enumeration and the reduced sums.

    python scripts/benchmark_paths.py --sizes 10 20 30 40
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from typing import List

from dyadic_pd.estimator import fit, residual_matrix
from dyadic_pd.simulate import generate
from dyadic_pd.variance import s_bar_matrix


@dataclass
class BenchConfig:
    sizes: List[int] = field(default_factory=lambda: [10, 20, 30])
    repeats: int = 3
    seed: int = 7


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def main(cfg: BenchConfig) -> None:
    print(f"{'N':>4}{'fit naive':>12}{'fit reduced':>13}{'speedup':>9}{'proj naive':>12}{'proj reduced':>14}{'rel gap':>10}")
    for n in cfg.sizes:
        d = generate("d1", n, 0.0, cfg.seed)
        fit(d, "naive")  # builds the tetrad index cache outside the timing
        tn, a = timed(lambda: fit(d, "naive"), cfg.repeats)
        tr, b = timed(lambda: fit(d, "reduced"), cfg.repeats)
        resid = residual_matrix(d, b.beta_hat)
        pn, sa = timed(lambda: s_bar_matrix(d.x, resid, "naive"), cfg.repeats)
        pr, sb = timed(lambda: s_bar_matrix(d.x, resid, "reduced"), cfg.repeats)
        gap = max(abs(a.beta_hat - b.beta_hat) / abs(a.beta_hat), float(abs(sa - sb).max() / abs(sa).max()))
        print(f"{n:>4}{tn * 1e3:>10.2f}ms{tr * 1e3:>11.3f}ms{tn / tr:>8.0f}x{pn * 1e3:>10.2f}ms{pr * 1e3:>12.3f}ms{gap:>10.1e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    main(BenchConfig(**vars(ap.parse_args())))
