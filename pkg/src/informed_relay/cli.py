"""Command-line front end: single-point reports, sweeps and discrete runs."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import gaussian as g
from .dm import DiscreteChannelSpec, LowerFactorization, SpecError, UpperFactorization, dm_search, is_degraded
from .optimize import BoundResult, GridSpec
from .sweep import BOUND_FUNCS, BOUND_ORDER, AXES, SweepSpec, db_to_linear, run_sweep, to_csv, write_outputs

EXIT_OK = 0
EXIT_INPUT = 2

PARAMS = ("p1", "p2", "q", "n2", "n3")
DEFAULT_DB = 10.0


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def _add_channel_args(p: argparse.ArgumentParser) -> None:
    grp = p.add_argument_group("channel", f"linear values or dB variants; default {DEFAULT_DB:g} dB each")
    for name in PARAMS:
        ex = grp.add_mutually_exclusive_group()
        ex.add_argument(f"--{name}", type=float, metavar="LIN", help=f"{name.upper()} (linear)")
        ex.add_argument(f"--{name}db", f"--{name}-db", dest=f"{name}db", type=float, metavar="DB", help=f"{name.upper()} in dB")
    grp.add_argument("--degraded", action="store_true", help="destination sees a noisier copy of the relay observation")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-points", type=int, default=GridSpec.coarse_points, help="points per axis per round (default %(default)s)")
    p.add_argument("--refine", type=int, default=GridSpec.refine_rounds, help="refinement rounds (default %(default)s)")


def _channel_values(args: argparse.Namespace) -> dict[str, float]:
    vals = {}
    for name in PARAMS:
        lin, db = getattr(args, name), getattr(args, f"{name}db")
        if lin is not None:
            vals[name] = lin
        else:
            db = DEFAULT_DB if db is None else db
            if not math.isfinite(db):
                raise InputError(f"{name}db must be finite, got {db!r}")
            vals[name] = db_to_linear(db)
    return vals


def _channel(args: argparse.Namespace) -> g.ChannelParams:
    try:
        return g.ChannelParams(**_channel_values(args), degraded=args.degraded)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _grid(args: argparse.Namespace) -> GridSpec:
    try:
        return GridSpec(coarse_points=args.grid_points, refine_rounds=args.refine)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _result_dict(res: BoundResult) -> dict:
    return {
        "rate": res.rate,
        "argmax": _jsonable(res.argmax),
        "grid_tolerance": res.grid_tolerance,
        "evaluations": res.evaluations,
    }


# -- bounds --------------------------------------------------------------------


def bounds_report(ch: g.ChannelParams, grid: GridSpec) -> dict:
    """Every applicable bound plus the capacity statements that hold for ``ch``."""
    names = [b for b in BOUND_ORDER if ch.degraded or b != "upper_equiv"]
    report: dict[str, Any] = {
        "params": {"p1": ch.p1, "p2": ch.p2, "q": ch.q, "n2": ch.n2, "n3": ch.n3, "degraded": ch.degraded},
        "bounds": {b: _result_dict(BOUND_FUNCS[b](ch, grid)) for b in names},
        "threshold_n2": g.capacity_condition_threshold(ch, grid),
    }
    # the capacity statements below are proved for the degraded model only
    report["capacity_known"] = g.capacity_known(ch, grid) if ch.degraded else None
    ext = g.extreme_cases(ch, grid) if ch.degraded else None
    if ext is None and ch.p2 == 0:
        # a silent relay leaves a plain state-interfered link in either model
        ext = g.ExtremeCase("zero_relay_power", 0.5 * math.log2(1.0 + ch.p1 / (ch.q + ch.n3)))
    report["extreme_case"] = None if ext is None else {"name": ext.name, "capacity": ext.capacity}
    return report


def _format_bounds(rep: dict) -> str:
    p = rep["params"]
    lines = [
        "channel: " + ", ".join(f"{k.upper()}={p[k]:.6g}" for k in PARAMS) + (" (degraded)" if p["degraded"] else " (general)"),
        "",
    ]
    for name, r in rep["bounds"].items():
        arg = ", ".join(f"{k}={v:.6g}" for k, v in r["argmax"].items())
        lines.append(f"{name:<14} {r['rate']:.6f} bits  (+/- {r['grid_tolerance']:.1e})  at {arg}")
    lines.append("")
    lines.append(f"capacity threshold on N2: {rep['threshold_n2']:.6g}")
    if not p["degraded"]:
        lines.append("capacity known: not established for the general model")
    elif rep["capacity_known"] is None:
        lines.append("capacity known: no (N2 below threshold)")
    else:
        lines.append(f"capacity known: {rep['capacity_known']:.6g} bits")
    ext = rep["extreme_case"]
    if ext is not None:
        lines.append(f"extreme case {ext['name']}: capacity {ext['capacity']:.6g} bits")
    return "\n".join(lines)


def cmd_bounds(args: argparse.Namespace) -> int:
    rep = bounds_report(_channel(args), _grid(args))
    print(json.dumps(rep, indent=2) if args.json else _format_bounds(rep))
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------


def _sweep_spec(args: argparse.Namespace) -> SweepSpec:
    vals = _channel_values(args)
    bounds = None if args.bounds == "all" else tuple(b.strip() for b in args.bounds.split(",") if b.strip())
    try:
        spec = SweepSpec(
            **vals,
            degraded=args.degraded,
            axis=args.axis,
            lo_db=args.lo,
            hi_db=args.hi,
            points=args.points,
            bounds=bounds,
            emit=args.format,
        )
        # fixed parameters are checked once here instead of mid-sweep
        spec.channel_at(spec.lo_db)
        spec.channel_at(spec.hi_db)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    return spec


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = _sweep_spec(args)
    grid = _grid(args)
    if args.out is None:
        if spec.emit != "csv":
            raise InputError("--out is required for svg output")
        rows = run_sweep(spec, grid, workers=args.workers)
        sys.stdout.write(to_csv(spec, rows))
        return EXIT_OK
    out = Path(args.out)
    if not out.parent.is_dir():
        raise InputError(f"--out: directory {str(out.parent)!r} does not exist")
    rows = run_sweep(spec, grid, workers=args.workers)
    try:
        written = write_outputs(spec, rows, out, grid)
    except OSError as exc:
        raise InputError(f"--out: cannot write output: {exc}") from None
    for path in written:
        print(path, file=sys.stderr)
    return EXIT_OK


# -- dm ------------------------------------------------------------------------


def _factorization_summary(f: Any) -> dict[str, list]:
    if isinstance(f, LowerFactorization):
        fields = ("p_u1", "p_x1_u1", "p_u2_u1s", "p_x2_u1u2s")
    elif isinstance(f, UpperFactorization):
        fields = ("p_x1", "p_x2_x1s")
    else:
        return {}
    return {k: np.round(getattr(f, k), 4).tolist() for k in fields}


def cmd_dm(args: argparse.Namespace) -> int:
    try:
        spec = DiscreteChannelSpec.load(args.spec)
    except OSError as exc:
        raise InputError(f"cannot read {args.spec}: {exc.strerror or exc}") from None
    except SpecError as exc:
        raise InputError(f"{args.spec}: {exc}") from None
    if args.budget < 1:
        raise InputError(f"--budget must be at least 1, got {args.budget}")
    if args.aux_u1 < 1 or args.aux_u2 < 1:
        raise InputError("--aux-u1 and --aux-u2 must be at least 1")
    degraded = is_degraded(spec)
    modes = ("lower", "upper", "trivial") if args.mode == "all" else (args.mode,)
    results = {}
    for m in modes:
        res = dm_search(spec, m, restarts=args.budget, aux_sizes=(args.aux_u1, args.aux_u2), seed=args.seed, degraded=degraded)
        results[m] = {
            "rate": res.rate,
            "evaluations": res.evaluations,
            "restart_values": res.details["restart_values"],
            "factorization": _factorization_summary(res.argmax["factorization"]),
        }
    rep = {"spec": str(args.spec), "alphabet_sizes": spec.sizes, "is_degraded": degraded, "seed": args.seed, "results": results}
    if args.json:
        print(json.dumps(rep, indent=2))
        return EXIT_OK
    print(f"channel {args.spec}: sizes " + " ".join(f"|{k}|={v}" for k, v in spec.sizes.items()))
    print(f"physically degraded: {'yes' if degraded else 'no'}")
    for m, r in results.items():
        print(f"\n{m:<8} {r['rate']:.6f} bits  ({args.budget} restarts, seed {args.seed})")
        for k, v in r["factorization"].items():
            print(f"  {k} = {v}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="informed-relay",
        description="Capacity bounds for the relay channel with state known at the relay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="all bounds at one channel point")
    _add_channel_args(p)
    _add_grid_args(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="rate curves versus one parameter")
    _add_channel_args(p)
    _add_grid_args(p)
    p.add_argument("--axis", choices=AXES, default="snr", help="swept quantity; snr varies N2 (default %(default)s)")
    p.add_argument("--lo", type=float, default=-10.0, help="axis start in dB (default %(default)s)")
    p.add_argument("--hi", type=float, default=30.0, help="axis end in dB (default %(default)s)")
    p.add_argument("--points", type=int, default=50, help="number of axis points (default %(default)s)")
    p.add_argument("--bounds", default="all", help="comma list from " + ",".join(BOUND_ORDER) + " or 'all'")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    p.add_argument("--out", help="output path; suffix is replaced per format. CSV goes to stdout if omitted")
    p.add_argument("--seed", type=int, default=0, help="accepted for interface symmetry; the sweep is deterministic")
    p.add_argument("--workers", type=int, default=1, help="parallel processes for sweep points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dm", help="bounds for a discrete channel given as JSON")
    p.add_argument("spec", help="channel JSON file")
    p.add_argument("--mode", choices=("lower", "upper", "trivial", "all"), default="all")
    p.add_argument("--budget", type=int, default=8, help="random restarts (default %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--aux-u1", type=int, default=2, help="|U1| for the lower bound (default %(default)s)")
    p.add_argument("--aux-u2", type=int, default=2, help="|U2| for the lower bound (default %(default)s)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_dm)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
