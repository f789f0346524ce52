"""Command-line entry point: ``estimate``, ``simulate`` and ``verify``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import oracles
from .dataio import read_dyads, write_dyads
from .designs import Design
from .errors import DyadicError
from .estimator import Path as FitPath
from .estimator import fit
from .simulate import (
    AvarMode,
    GridCell,
    McConfig,
    emit_tables,
    empirical_distribution_export,
    generate,
    run_mc,
    write_hist,
    write_qq,
    write_reps,
    write_table,
)
from .variance import estimate_avar

PROG = "dyadic-pd"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _design(value: str) -> Design:
    try:
        return Design.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Pairwise-differences estimation for directed dyadic data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="fit one dataset from a dyad CSV")
    est.add_argument("--input", required=True, help="CSV with header i,j,y,x (1-based nodes)")
    est.add_argument("--path", choices=[p.value for p in FitPath], default="reduced")
    est.add_argument("--out", help="fit.json destination (default: stdout)")
    est.add_argument("--avar", choices=[m.value for m in AvarMode], default="both")
    est.add_argument("--beta-null", type=float, default=0.0)

    sim = sub.add_parser("simulate", help="Monte Carlo summary for one design or a grid")
    sim.add_argument("--design", type=_design)
    sim.add_argument("--n", type=int, help="number of nodes")
    sim.add_argument("--reps", type=int, help="number of replications S")
    sim.add_argument("--grid", help="JSON file listing {design, S, N} cells")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--beta1", type=float, default=0.0)
    sim.add_argument("--avar", choices=[m.value for m in AvarMode], default="both")
    sim.add_argument("--path", choices=["auto"] + [p.value for p in FitPath], default="auto")
    sim.add_argument("--out", required=True, help="summary table CSV")
    sim.add_argument("--dump-reps", help="per-replication CSV")
    sim.add_argument("--dump-data", help="directory for per-replication dyad CSVs")
    sim.add_argument("--hist", help="histogram CSV of the estimates")
    sim.add_argument("--qq", help="QQ-plot CSV of the standardised estimates")
    sim.add_argument("--bins", type=int, default=40)
    sim.add_argument("--threads", type=int, default=1, help="worker processes, 0 = all cores")

    ver = sub.add_parser("verify", help="Monte Carlo checks of the variance theory")
    ver.add_argument(
        "--check",
        choices=["deltaq", "hoeffding", "projection", "delta2-closed", "all"],
        default="all",
    )
    ver.add_argument("--design", type=_design, default=Design.D1)
    ver.add_argument("--draws", type=int, default=50_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--n", type=int, default=10, help="network size for the projection check")
    ver.add_argument("--out", help="report.json destination (default: stdout)")
    ver.add_argument("--threads", type=int, default=1, help="accepted for symmetry; checks run in one process")
    return parser


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _emit_json(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(_clean(payload), indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _check_writable(path: Optional[str], flag: str) -> None:
    if not path:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"{flag}: directory {parent} does not exist or is not writable")


def _cmd_estimate(args) -> int:
    _check_writable(args.out, "--out")
    data = read_dyads(args.input)
    result = fit(data, args.path)
    payload = result.to_dict()
    mode = AvarMode.parse(args.avar)
    av = estimate_avar(data, result, beta_null=args.beta_null)
    full = av.to_dict()
    payload["beta_null"] = args.beta_null
    if mode.uses_delta:
        for key in ("delta2_hat", "avar_delta2", "t_delta2"):
            payload[key] = full[key]
    if mode.uses_Delta:
        for key in ("Delta2_hat", "avar_Delta2", "t_Delta2"):
            payload[key] = full[key]
    _emit_json(payload, args.out)
    return 0


def _load_grid(path: str) -> List[GridCell]:
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"--grid: cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--grid: {path} is not valid JSON: {exc}") from None
    cells = spec.get("cells") if isinstance(spec, dict) else spec
    if not isinstance(cells, list) or not cells:
        raise UsageError(f"--grid: {path} must hold a non-empty list of cells")
    out = []
    for cell in cells:
        try:
            out.append(GridCell(Design.parse(cell["design"]), int(cell["S"]), int(cell["N"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"--grid: bad cell {cell!r}: {exc}") from None
        if out[-1].S < 1 or out[-1].N < 4:
            raise UsageError(f"--grid: cell {cell!r} needs S >= 1 and N >= 4")
    return out


def _cmd_simulate(args) -> int:
    for flag in ("out", "dump_reps", "hist", "qq"):
        _check_writable(getattr(args, flag), "--" + flag.replace("_", "-"))
    path = None if args.path == "auto" else FitPath.parse(args.path)
    if args.bins < 1:
        raise UsageError("--bins must be positive")

    if args.grid:
        if any(v is not None for v in (args.design, args.n, args.reps)):
            raise UsageError("--grid conflicts with --design/--n/--reps")
        if args.dump_reps or args.dump_data or args.hist or args.qq:
            raise UsageError("--grid cannot be combined with per-replication exports")
        cells = _load_grid(args.grid)
        rows = emit_tables(cells, seed=args.seed, beta1=args.beta1, path=path, workers=args.threads)
        write_table(args.out, rows)
        return 0

    missing = [f"--{n}" for n, v in (("design", args.design), ("n", args.n), ("reps", args.reps)) if v is None]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or pass --grid)")
    try:
        config = McConfig(
            design=args.design, n_nodes=args.n, n_reps=args.reps, seed=args.seed,
            beta1=args.beta1, avar_mode=args.avar, path=path,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.dump_data:
        os.makedirs(args.dump_data, exist_ok=True)

    result = run_mc(config, workers=args.threads)
    write_table(args.out, [result.summary])
    if args.dump_reps:
        write_reps(args.dump_reps, result)
    if args.hist or args.qq:
        export = empirical_distribution_export(result, bins=args.bins)
        if args.hist:
            write_hist(args.hist, export)
        if args.qq:
            write_qq(args.qq, export)
    if args.dump_data:
        for rec in result.per_rep:
            data = generate(config.design, config.n_nodes, config.beta1, rec.rep_seed, config.u_scale)
            write_dyads(Path(args.dump_data) / f"rep_{rec.rep:06d}.csv", data)
    return 0


def _cmd_verify(args) -> int:
    _check_writable(args.out, "--out")
    if args.draws < 2:
        raise UsageError("--draws must be at least 2")
    if args.n < 4:
        raise UsageError("--n must be at least 4")
    checks = ["deltaq", "hoeffding", "projection", "delta2-closed"] if args.check == "all" else [args.check]
    report = {"design": args.design.value, "draws": args.draws, "seed": args.seed}
    for check in checks:
        if check == "deltaq":
            report["deltaq"] = oracles.estimate_delta_q(args.design, args.draws, args.seed).to_dict()
        elif check == "hoeffding":
            report["hoeffding"] = oracles.hoeffding_check(args.design, 5, args.draws, args.seed).to_dict()
        elif check == "projection":
            report["projection"] = oracles.projection_variance_check(
                args.design, args.n, args.draws, args.seed
            ).to_dict()
        elif check == "delta2-closed":
            closed = oracles.closed_form_delta2(args.design, 1.0, args.draws, args.seed)
            d2, d2_se = oracles.estimate_delta2_projection(args.design, args.draws, args.seed + 1)
            report["delta2_closed"] = closed.to_dict()
            report["delta2_closed"]["twice_delta2"] = {"estimate": 2 * d2, "se": 2 * d2_se}
    _emit_json(report, args.out)
    return 0


COMMANDS = {"estimate": _cmd_estimate, "simulate": _cmd_simulate, "verify": _cmd_verify}


def parse_and_dispatch(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 2
    except DyadicError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch())
