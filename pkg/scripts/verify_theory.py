"""Run every variance-theory check for one design and print z-scores.

    python scripts/verify_theory.py --design d1 --draws 50000
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass
from math import sqrt

import numpy as np

from dyadic_pd.oracles import (
    closed_form_delta2,
    estimate_delta2_projection,
    estimate_delta_q,
    hoeffding_check,
    projection_draws,
    projection_variance_check,
)


@dataclass
class TheoryConfig:
    design: str = "d1"
    draws: int = 50_000
    seed: int = 1
    out: str = ""


def z(a, b):
    return (a[0] - b[0]) / sqrt(a[1] ** 2 + b[1] ** 2)


def main(cfg: TheoryConfig) -> dict:
    out = {"config": asdict(cfg)}
    rep = estimate_delta_q(cfg.design, cfg.draws, cfg.seed)
    out["delta_q"] = rep.to_dict()
    print("kernel covariances by overlap:")
    for q in range(5):
        print(f"  q={q}: {rep.delta_q[q]: .6f} ± {rep.se[q]:.6f}  (z vs 0: {rep.delta_q[q] / rep.se[q]: .2f})")

    h = hoeffding_check(cfg.design, 5, 4 * cfg.draws, cfg.seed + 1)
    out["hoeffding_n5"] = h.to_dict()
    print(f"N=5 variance: direct {h.direct_var:.5f} vs assembled {h.assembled_var:.5f}, z={h.z:.2f}")

    closed = closed_form_delta2(cfg.design, 1.0, 20 * cfg.draws, cfg.seed + 2)
    d2, d2_se = estimate_delta2_projection(cfg.design, 20 * cfg.draws, cfg.seed + 3)
    cov = (rep.delta_q[2], rep.se[2])
    pairs = {
        "covariance_vs_closed": z(cov, (closed.value, closed.se)),
        "covariance_vs_twice_delta2": z(cov, (2 * d2, 2 * d2_se)),
        "closed_vs_twice_delta2": z((closed.value, closed.se), (2 * d2, 2 * d2_se)),
    }
    out["delta2_triangle"] = {"closed": closed.value, "twice_delta2": 2 * d2, **pairs}
    print(f"Delta_2: covariance {cov[0]:.6f}, closed form {closed.value:.6f}, 2 delta_2 {2 * d2:.6f}")
    print("  z: " + ", ".join(f"{k}={v:.2f}" for k, v in pairs.items()))

    pc = projection_variance_check(cfg.design, 10, max(cfg.draws // 5, 2000), cfg.seed + 4)
    out["projection_n10"] = pc.to_dict()
    print(f"N=10 projection variance vs 144 delta_2: z={pc.z(pc.var_hajek1, pc.target_delta):.2f}; "
          f"vs 72 Delta_2: z={pc.z(pc.var_hajek2, pc.target_Delta):.2f}")

    mse = {}
    for n in (8, 12, 16):
        pd = projection_draws(cfg.design, n, 2000, cfg.seed + 10 + n)
        mse[n] = float(n * (n - 1) * np.mean((pd.hajek1 - pd.u_n) ** 2))
    out["scaled_projection_mse"] = mse
    print("N(N-1) E[(projection - statistic)^2]: " + ", ".join(f"N={n}: {v:.4f}" for n, v in mse.items()))

    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(out, fh, indent=2, default=float)
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--design", default="d1")
    ap.add_argument("--draws", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="")
    main(TheoryConfig(**vars(ap.parse_args())))
