"""Command line entry point: ``oride-attack <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import harness
from .experiment import load_config, substream
from .polyrecover import (
    AmbiguityLimitExceeded,
    Inconsistent,
    NoiseModel,
    evaluate,
    recover_inputs,
    sample_monotone_poly,
)
from .roadnet import generate_barrier_grid, generate_manhattan_grid, ingest, write_csv


def _globals(default=None):
    # subcommands repeat the flags with SUPPRESS so they don't clobber values given before them
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="master seed (64-bit)")
    p.add_argument("--config", default=default, help="flat key = value config file")
    p.add_argument("--out", default=default, help="output file")
    return p


def _experiment_flags(p, drivers_default=None):
    p.add_argument("--roads", help="planar CSV, GeoJSON, or grid:ROWSxCOLS:SPACING")
    p.add_argument("--zone-side", type=int, help="zone side in metres")
    p.add_argument("--trials", type=int, help="trials per zone size")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None, help="on-road threshold (m)")
    if drivers_default is not None:
        p.add_argument("--drivers", type=int, default=None)


def _build_parser():
    parser = argparse.ArgumentParser(prog="oride-attack", description=__doc__, parents=[_globals()])
    g = _globals(argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-roads", parents=[g], help="write a synthetic Manhattan grid")
    p.add_argument("--grid", required=True, help="ROWSxCOLS blocks")
    p.add_argument("--spacing", type=int, required=True, help="block side (m)")
    p.add_argument("--origin", default="0,0")
    p.add_argument("--barrier", type=int, default=None, help="barrier line every N metres")
    p.add_argument("--crossing", type=int, default=None, help="gap in each barrier every N metres")
    p.add_argument("--axes", choices=["x", "xy"], default="xy")

    p = sub.add_parser("ingest", parents=[g], help="convert a road file to planar CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=["csv", "geojson"], default=None)
    p.add_argument("--pin-zone", default=None, help="'centroid' or a signed UTM zone")

    p = sub.add_parser("attack", parents=[g], help="location-harvesting attack")
    _experiment_flags(p, drivers_default=1)
    p.add_argument("--pnorm", type=int, default=None, help="even p for the p-norm variant")

    p = sub.add_parser("mitigate", parents=[g], help="attack against obfuscated drivers")
    _experiment_flags(p)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--edge-policy", choices=["pad", "drop", "keep"], default=None)

    p = sub.add_parser("accuracy", parents=[g], help="ride-matching accuracy")
    _experiment_flags(p, drivers_default=400)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--mode", choices=["oride", "mitigated"], default="oride")
    p.add_argument("--speed", type=float, default=None, help="travel speed (m/s)")

    p = sub.add_parser("polyrecover", parents=[g], help="invert monotone polynomial noise")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--outputs", type=int, default=5, help="outputs per instance")

    p = sub.add_parser("sweep", parents=[g], help="full Monte Carlo sweep")
    p.add_argument("--roads", default=None)
    p.add_argument("--zone-sides", default=None, help="comma-separated metres")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--mode", choices=["attack", "pnorm", "mitigated", "accuracy"], default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--pnorm", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timings", default=None, help="write per-trial wall-clock times here")
    return parser


def _config(args, **extra):
    overrides = dict(
        master_seed=args.seed,
        output_path=args.out,
        road_source=getattr(args, "roads", None),
        trials_per_size=getattr(args, "trials", None),
        workers=getattr(args, "workers", None),
        on_road_threshold_m=getattr(args, "threshold", None),
    )
    if getattr(args, "zone_side", None) is not None:
        overrides["zone_sides_m"] = (args.zone_side,)
    overrides.update(extra)
    return load_config(args.config, **overrides)


def _write(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_gen_roads(args):
    rows, cols = (int(v) for v in args.grid.lower().split("x"))
    ox, oy = (int(v) for v in args.origin.split(","))
    if (args.barrier is None) != (args.crossing is None):
        raise SystemExit("--barrier and --crossing go together")
    if args.barrier is None:
        segments = generate_manhattan_grid(args.spacing, rows, cols, (ox, oy))
    else:
        segments = generate_barrier_grid(args.spacing, rows, cols, args.barrier, args.crossing,
                                         (ox, oy), axes=args.axes)
    out = args.out or "roads.csv"
    write_csv(segments, out)
    print(f"wrote {len(segments)} segments to {out}", file=sys.stderr)


def _cmd_ingest(args):
    segments = ingest(args.infile, args.format, pin_zone=args.pin_zone)
    out = args.out or "roads.csv"
    write_csv(segments, out)
    print(f"wrote {len(segments)} segments to {out}", file=sys.stderr)


def _summary(rows):
    for r in rows:
        parts = [f"{k}={harness._fmt(r[k])}" for k in ("zone_side", "mode", "ok", "failed",
                 "avg", "exact_pct", "mean_anonymity", "accuracy_pct") if r.get(k) is not None]
        print(" ".join(parts), file=sys.stderr)


def _cmd_attack(args):
    extra = {"drivers_per_trial": args.drivers}
    if args.pnorm is not None:
        extra.update(mode="pnorm", pnorm_p=args.pnorm)
    else:
        extra["mode"] = "attack"
    cfg = _config(args, **extra)
    report = harness.run_sweep(cfg)
    rows = [
        {"trial": r.trial, "driver": r.driver, "candidates": r.candidates, "hit": r.hit,
         "exact": r.exact}
        for r in report.records if r.status == "ok"
    ]
    _write(harness.format_rows(rows, ["trial", "driver", "candidates", "hit", "exact"]), args.out)
    _summary(report.rows)


def _cmd_mitigate(args):
    cfg = _config(args, mode="mitigated", obfuscation_radius_m=args.radius, edge_policy=args.edge_policy)
    report = harness.run_sweep(cfg)
    rows = [
        {"trial": r.trial, "candidates": r.candidates, "hit": r.hit}
        for r in report.records if r.status == "ok"
    ]
    _write(harness.format_rows(rows, ["trial", "candidates", "hit"]), args.out)
    _summary(report.rows)


def _cmd_accuracy(args):
    cfg = _config(
        args, mode="accuracy", accuracy_mode=args.mode, obfuscation_radius_m=args.radius,
        drivers_per_trial=args.drivers if args.drivers is not None else 400,
        speed_mps=args.speed,
    )
    report = harness.run_sweep(cfg)
    rows = [
        {"trial": r.trial, "selected": r.driver, "t_m": r.t_m, "t_t": r.t_t, "within": r.within}
        for r in report.records if r.status == "ok"
    ]
    _write(harness.format_rows(rows, ["trial", "selected", "t_m", "t_t", "within"]), args.out)
    _summary(report.rows)


def _cmd_polyrecover(args):
    model = NoiseModel(args.degree, args.alpha, args.beta)
    seed = args.seed or 0
    rows = []
    found = unique = 0
    for t in range(args.trials):
        rng = substream(seed, "polyrecover", t)
        coeffs = sample_monotone_poly(model, rng)
        inputs = tuple(int(x) for x in rng.integers(0, model.max_input + 1, size=args.outputs))
        outputs = [evaluate(coeffs, x) for x in inputs]
        row = {"trial": t, "inputs": " ".join(map(str, inputs))}
        try:
            res = recover_inputs(outputs, model)
        except (Inconsistent, AmbiguityLimitExceeded) as exc:
            row.update(status=type(exc).__name__, found=False)
        else:
            row.update(
                status="ok",
                found=inputs in res.explanations,
                unique=res.unique,
                explanations=len(res.explanations),
                polynomials=res.candidate_polynomials,
                recovered=" ".join(map(str, res.recovered_inputs)) if res.unique else "",
            )
            unique += res.unique
        found += bool(row["found"])
        rows.append(row)
    cols = ["trial", "status", "inputs", "recovered", "found", "unique", "explanations", "polynomials"]
    _write(harness.format_rows(rows, cols), args.out)
    print(
        f"found={found}/{args.trials} unique_rate={float(Fraction(100 * unique, args.trials))}",
        file=sys.stderr,
    )


def _cmd_sweep(args):
    extra = {}
    if args.zone_sides:
        extra["zone_sides_m"] = args.zone_sides
    if args.mode:
        extra["mode"] = args.mode
    if args.radius is not None:
        extra["obfuscation_radius_m"] = args.radius
    if args.pnorm is not None:
        extra["pnorm_p"] = args.pnorm
    cfg = _config(args, **extra)
    report = harness.run_sweep(cfg)
    out = cfg.output_path or "sweep.csv"
    trials = harness.write_report(report, out, args.timings)
    print(f"wrote {out} and {trials}", file=sys.stderr)
    _summary(report.rows)


COMMANDS = {
    "gen-roads": _cmd_gen_roads,
    "ingest": _cmd_ingest,
    "attack": _cmd_attack,
    "mitigate": _cmd_mitigate,
    "accuracy": _cmd_accuracy,
    "polyrecover": _cmd_polyrecover,
    "sweep": _cmd_sweep,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    COMMANDS[args.command](args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
