"""Seeded Monte Carlo sweeps over zone sizes, with CSV reports.

Per-trial records are the primary output; the aggregate table is derived
from them and can be recomputed from the trials file alone.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List

from .attack import InvalidSnapshot, RideSnapshot, predict_driver
from .experiment import (
    ExperimentConfig,
    TrialRecord,
    load_roads,
    map_name,
    parse_points,
    sample_in_zone,
    sample_zone,
    trial_rngs,
)
from .geometry import pnorm_value
from .matching import accuracy_trial
from .mitigation import mitigated_trial
from .roadnet import NoRoadInZone, RoadNetwork, RoadSampler

TRIAL_COLUMNS = [
    "map", "mode", "zone_side", "trial", "driver", "status",
    "candidates", "hit", "exact", "t_m", "t_t", "within",
]
AGGREGATE_COLUMNS = [
    "map", "zone_area_km2", "zone_side", "mode", "trials", "ok", "failed",
    "avg", "exact_pct", "mean_anonymity", "accuracy_pct", "status",
]


def attack_trial(net: RoadNetwork, config: ExperimentConfig, zone_side: int, trial: int) -> List[TrialRecord]:
    """Unmitigated attack (Euclidean or p-norm) against the trial's drivers."""
    p = config.pnorm_p if config.mode == "pnorm" else 2
    mode = "pnorm" if p != 2 else "attack"
    rngs = trial_rngs(config, zone_side, trial)
    zone = sample_zone(net.bounds, zone_side, rngs["zone"], net, config.zone_retries)
    if config.rider_xy is not None:
        rider = parse_points(config.rider_xy, net.utm_zone)[0]
        drivers = parse_points(config.drivers_xy, net.utm_zone)
        RideSnapshot.from_drivers(zone, rider, drivers, p).validate(net, config.on_road_threshold_m)
    else:
        rider = sample_in_zone(zone, rngs["rider"])
        sampler = RoadSampler(net, zone, config.on_road_threshold_m)
        drivers = [sampler.sample(rngs["driver"]) for _ in range(config.drivers_per_trial)]
    records = []
    for i, d in enumerate(drivers):
        started = time.perf_counter()
        disclosed = pnorm_value(p, d[0] - rider[0], d[1] - rider[1])
        cands = predict_driver(zone, rider, disclosed, net, config.on_road_threshold_m, p)
        elapsed = time.perf_counter() - started
        rec = TrialRecord(mode, zone_side, trial, driver=i)
        rec.candidates = len(cands)
        rec.hit = d in cands
        rec.exact = rec.candidates == 1
        rec.seconds = elapsed
        records.append(rec)
    return records


def run_trial(net: RoadNetwork, config: ExperimentConfig, zone_side: int, trial: int) -> List[TrialRecord]:
    """Dispatch on ``config.mode``; failures become a record, not an exception."""
    try:
        if config.mode in ("attack", "pnorm"):
            return attack_trial(net, config, zone_side, trial)
        if config.mode == "mitigated":
            return [mitigated_trial(net, config, zone_side, trial)]
        return [accuracy_trial(net, config, zone_side, trial)]
    except (NoRoadInZone, InvalidSnapshot, ValueError) as exc:
        mode = config.mode if config.mode != "accuracy" else "accuracy-" + config.accuracy_mode
        return [TrialRecord(mode, zone_side, trial, status=f"failed:{type(exc).__name__}")]


# -- parallel execution ---------------------------------------------------

_worker_state: Dict[str, object] = {}


def _init_worker(config):
    _worker_state["config"] = config
    _worker_state["net"] = load_roads(config.road_source, config.cell_size_m)


def _run_task(task):
    side, trial = task
    return run_trial(_worker_state["net"], _worker_state["config"], side, trial)


@dataclass
class SweepReport:
    config: ExperimentConfig
    records: List[TrialRecord]
    rows: List[dict] = field(default_factory=list)

    def trials_csv(self) -> str:
        return format_trials(self.records, map_name(self.config.road_source))

    def aggregate_csv(self) -> str:
        return format_rows(self.rows, AGGREGATE_COLUMNS)


def run_sweep(config: ExperimentConfig, net: RoadNetwork | None = None) -> SweepReport:
    """Every (zone size x trial) cell of the config, in a fixed order.

    Results are identical for any ``config.workers``: each trial draws from
    its own seeded substreams and records are reassembled in task order.
    """
    tasks = [(side, t) for side in config.zone_sides_m for t in range(config.trials_per_size)]
    if config.workers > 1:
        with ProcessPoolExecutor(
            max_workers=config.workers, initializer=_init_worker, initargs=(config,)
        ) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        net = net or load_roads(config.road_source, config.cell_size_m)
        chunks = [run_trial(net, config, side, t) for side, t in tasks]
    records = [r for chunk in chunks for r in chunk]
    report = SweepReport(config, records)
    report.rows = aggregate(read_trials(io.StringIO(report.trials_csv())))
    return report


# -- CSV ------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    return str(v)


def format_rows(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def record_row(rec: TrialRecord, mapname: str) -> dict:
    ok = rec.status == "ok"
    acc = rec.mode.startswith("accuracy")
    return {
        "map": mapname,
        "mode": rec.mode,
        "zone_side": rec.zone_side,
        "trial": rec.trial,
        "driver": rec.driver,
        "status": rec.status,
        "candidates": rec.candidates if ok and not acc else None,
        "hit": rec.hit if ok and not acc else None,
        "exact": rec.exact if ok and not acc else None,
        "t_m": rec.t_m if ok and acc else None,
        "t_t": rec.t_t if ok and acc else None,
        "within": rec.within if ok and acc else None,
    }


def format_trials(records, mapname: str) -> str:
    return format_rows([record_row(r, mapname) for r in records], TRIAL_COLUMNS)


def read_trials(fh) -> List[dict]:
    return list(csv.DictReader(fh))


def aggregate(trial_rows: List[dict]) -> List[dict]:
    """One row per (map, zone side, mode), computed from per-trial rows only.

    Means use exact fractions and a single final division.
    """
    cells: Dict[tuple, List[dict]] = {}
    for r in trial_rows:
        cells.setdefault((r["map"], int(r["zone_side"]), r["mode"]), []).append(r)
    rows = []
    for (mapname, side, mode), rs in cells.items():
        ok = [r for r in rs if r["status"] == "ok"]
        failed = [r for r in rs if r["status"].startswith("failed")]
        row = {
            "map": mapname,
            "zone_area_km2": side * side / 1e6,
            "zone_side": side,
            "mode": mode,
            "trials": len({r["trial"] for r in rs}),
            "ok": len(ok),
            "failed": len(failed),
            "status": "ok" if not failed else ("failed" if not ok else "partial"),
        }
        if ok and mode.startswith("accuracy"):
            row["accuracy_pct"] = Fraction(100 * sum(int(r["within"]) for r in ok), len(ok))
        elif ok:
            total = sum(int(r["candidates"]) for r in ok)
            if mode == "mitigated":
                row["mean_anonymity"] = Fraction(total, len(ok))
            else:
                row["avg"] = Fraction(total, len(ok))
                row["exact_pct"] = Fraction(100 * sum(int(r["exact"]) for r in ok), len(ok))
        rows.append(row)
    return rows


def write_report(report: SweepReport, out_path, timings_path=None) -> Path:
    """Aggregate CSV at ``out_path``; per-trial CSV next to it.

    Wall-clock timings go to a separate file so the two report files stay
    byte-identical between reruns.
    """
    out = Path(out_path)
    trials = out.with_name(out.stem + ".trials.csv")
    out.write_text(report.aggregate_csv(), encoding="utf-8")
    trials.write_text(report.trials_csv(), encoding="utf-8")
    if timings_path is not None:
        rows = [
            {"mode": r.mode, "zone_side": r.zone_side, "trial": r.trial, "driver": r.driver,
             "seconds": r.seconds}
            for r in report.records
        ]
        Path(timings_path).write_text(
            format_rows(rows, ["mode", "zone_side", "trial", "driver", "seconds"]), encoding="utf-8"
        )
    return trials
