"""Configuration, seeding and zone placement shared by every experiment mode."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .projection import PlanarPoint
from .roadnet import (
    DEFAULT_CELL_SIZE,
    NoRoadInZone,
    RoadNetwork,
    Zone,
    generate_barrier_grid,
    generate_manhattan_grid,
    load_network,
)

TABLE1_ZONE_SIDES = (1000, 1414, 2000, 3000, 5000, 10000, 20000, 30000)
MODES = ("attack", "pnorm", "mitigated", "accuracy")


@dataclass(frozen=True)
class ExperimentConfig:
    road_source: str = "grid:300x300:100"
    zone_sides_m: Tuple[int, ...] = TABLE1_ZONE_SIDES
    trials_per_size: int = 30
    master_seed: int = 0
    mode: str = "attack"
    obfuscation_radius_m: Optional[float] = None
    pnorm_p: Optional[int] = None
    output_path: Optional[str] = None
    drivers_per_trial: int = 1
    on_road_threshold_m: float = 3.0
    road_tolerance_m: float = 0.0
    edge_policy: str = "pad"
    accuracy_mode: str = "oride"
    speed_mps: float = 8.33
    match_window_s: float = 60.0
    cell_size_m: float = DEFAULT_CELL_SIZE
    zone_retries: int = 100
    workers: int = 1
    # Replay a fixed scene instead of sampling rider and drivers: "x,y" and
    # "x,y;x,y;...". Used to re-run hand-built examples through the sweep.
    rider_xy: Optional[str] = None
    drivers_xy: Optional[str] = None

    def __post_init__(self):
        if not self.zone_sides_m or any(s <= 0 for s in self.zone_sides_m):
            raise ValueError("zone sides must be positive")
        if self.trials_per_size < 1:
            raise ValueError("trials_per_size must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "pnorm" and (self.pnorm_p is None or self.pnorm_p <= 0 or self.pnorm_p % 2):
            raise ValueError("pnorm mode needs an even pnorm_p >= 2")
        if self.obfuscation_radius_m is not None and self.obfuscation_radius_m < 0:
            raise ValueError("obfuscation radius must be >= 0")
        if self.edge_policy not in ("pad", "drop", "keep"):
            raise ValueError("edge_policy must be pad, drop or keep")
        if self.accuracy_mode not in ("oride", "mitigated"):
            raise ValueError("accuracy_mode must be oride or mitigated")
        if self.drivers_per_trial < 1:
            raise ValueError("drivers_per_trial must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if (self.rider_xy is None) != (self.drivers_xy is None):
            raise ValueError("rider_xy and drivers_xy must be given together")
        if self.rider_xy is not None:
            parse_points(self.rider_xy)
            parse_points(self.drivers_xy)

    @property
    def radius(self) -> float:
        return self.obfuscation_radius_m or 0.0

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


_LIST_KEYS = {"zone_sides_m"}


def parse_points(text: str, utm_zone: int = 0):
    """``"x,y;x,y"`` -> list of integer PlanarPoints."""
    pts = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            x, y = (int(v) for v in chunk.split(","))
        except ValueError:
            raise ValueError(f"bad point {chunk!r}; expected x,y in whole metres") from None
        pts.append(PlanarPoint(x, y, utm_zone))
    if not pts:
        raise ValueError("no points given")
    return pts


def _coerce(name, raw):
    ftype = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if name in _LIST_KEYS:
        if isinstance(raw, str):
            raw = [r for r in raw.replace(";", ",").split(",") if r.strip()]
        return tuple(int(r) for r in raw)
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
        return None
    if "int" in ftype and "Optional" not in ftype:
        return int(raw)
    if ftype == "Optional[int]":
        return int(raw)
    if "float" in ftype:
        return float(raw)
    return str(raw).strip()


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, **overrides) -> ExperimentConfig:
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    for k, v in overrides.items():
        if v is not None:
            values[k] = _coerce(k, v) if isinstance(v, str) else v
    return ExperimentConfig(**values)


def substream(master_seed: int, *keys) -> np.random.Generator:
    """Independent generator for one named purpose.

    Keys are ints or strings (hashed with CRC32); the same keys always give
    the same stream, and adding new keys elsewhere never shifts this one.
    """
    spawn_key = tuple(
        k if isinstance(k, int) else zlib.crc32(str(k).encode("utf-8")) for k in keys
    )
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key))


def trial_rngs(config: ExperimentConfig, zone_side: int, trial: int):
    """Per-role generators for one trial, keyed by (zone side, trial, role).

    Modes share the keys so that the same seed places the same zone, rider
    and drivers whatever pipeline runs on them.
    """
    roles = ("zone", "rider", "driver", "obfuscate")
    return {r: substream(config.master_seed, int(zone_side), int(trial), r) for r in roles}


def parse_grid_source(source: str):
    """``grid:ROWSxCOLS:SPACING[:BARRIER:CROSSING[:AXES]]`` -> (rows, cols, spacing, *barrier args).

    AXES is ``x`` (north-south barriers only) or ``xy`` (default).
    """
    try:
        parts = source.split(":")[1:]
        rows, cols = parts[0].lower().split("x")
        axes = []
        if len(parts) == 5:
            if parts[4] not in ("x", "xy"):
                raise ValueError
            axes = [parts.pop()]
        rest = [int(v) for v in parts[1:]]
        if len(rest) not in (1, 3):
            raise ValueError
        return (int(rows), int(cols), *rest, *axes)
    except ValueError:
        raise ValueError(
            f"bad synthetic road source {source!r}; expected grid:ROWSxCOLS:SPACING"
            " or grid:ROWSxCOLS:SPACING:BARRIER:CROSSING[:x|xy]"
        ) from None


@lru_cache(maxsize=8)
def load_roads(source: str, cell_size: float = DEFAULT_CELL_SIZE) -> RoadNetwork:
    if source.startswith("grid:"):
        rows, cols, spacing, *barriers = parse_grid_source(source)
        if barriers:
            barrier, crossing, *axes = barriers
            segments = generate_barrier_grid(spacing, rows, cols, barrier, crossing, axes=axes[0] if axes else "xy")
        else:
            segments = generate_manhattan_grid(spacing, rows, cols)
        return RoadNetwork(segments, cell_size=cell_size)
    return load_network(source, cell_size=cell_size)


def map_name(source: str) -> str:
    return source if source.startswith("grid:") else Path(source).stem


def sample_zone(map_bounds, side_m: int, rng: np.random.Generator, net: RoadNetwork | None = None,
                retries: int = 100) -> Zone:
    """Square zone placed uniformly inside ``map_bounds`` (minx, miny, maxx, maxy).

    With ``net`` given, redraws until the zone contains some length of road.
    """
    minx, miny, maxx, maxy = map_bounds
    lo_x, lo_y = math.ceil(minx), math.ceil(miny)
    hi_x, hi_y = math.floor(maxx) - side_m, math.floor(maxy) - side_m
    if hi_x < lo_x or hi_y < lo_y:
        raise ValueError(f"zone side {side_m} m does not fit in map bounds {map_bounds}")
    zone_id = net.utm_zone if net is not None else 0
    for _ in range(max(1, retries)):
        x = int(rng.integers(lo_x, hi_x + 1))
        y = int(rng.integers(lo_y, hi_y + 1))
        zone = Zone(PlanarPoint(x, y, zone_id), int(side_m))
        if net is None:
            return zone
        idx, t0, t1 = net.clip_to_zone(zone)
        if len(idx) and float(((t1 - t0) * net.lengths[idx]).sum()) > 0:
            return zone
    raise NoRoadInZone(f"no zone of side {side_m} m with roads after {retries} tries")


def sample_in_zone(zone: Zone, rng: np.random.Generator) -> PlanarPoint:
    """Uniform integer point of the closed zone."""
    x = int(rng.integers(zone.min_x, zone.max_x + 1))
    y = int(rng.integers(zone.min_y, zone.max_y + 1))
    return PlanarPoint(x, y, zone.min_corner.utm_zone)


@dataclass
class TrialRecord:
    mode: str
    zone_side: int
    trial: int
    driver: int = 0
    status: str = "ok"
    candidates: int = 0
    hit: bool = False
    exact: bool = False
    t_m: float = math.nan
    t_t: float = math.nan
    within: bool = False
    seconds: float = field(default=0.0, compare=False)
