"""Driver-side location obfuscation and the rider's best response to it.

Each driver discloses a random point L' within radius R of her location.
The rider can no longer ask "is this lattice point on a road?", only "is
there a road within R of it?". The number of lattice points surviving that
test is the driver's anonymity.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List

import numpy as np

from .experiment import TrialRecord, load_roads, sample_in_zone, sample_zone, trial_rngs
from .geometry import enumerate_circle, pnorm_value
from .projection import PlanarPoint
from .roadnet import RoadNetwork, RoadSampler, Zone


@dataclass(frozen=True)
class ObfuscationParams:
    radius_m: float
    # Extra slack added to R in the rider's road filter. Use the on-road
    # threshold when drivers may sit off the centreline (diagonal roads).
    road_tolerance_m: float = 0.0

    def __post_init__(self):
        if self.radius_m < 0 or not math.isfinite(self.radius_m):
            raise ValueError(f"obfuscation radius must be finite and >= 0, got {self.radius_m}")
        if self.road_tolerance_m < 0:
            raise ValueError("road tolerance must be >= 0")


@dataclass
class AnonymityReport:
    per_driver_candidates: List[int]
    hits: List[bool] = field(default_factory=list)

    @property
    def mean_anonymity_exact(self) -> Fraction:
        if not self.per_driver_candidates:
            return Fraction(0)
        return Fraction(sum(self.per_driver_candidates), len(self.per_driver_candidates))

    @property
    def mean_anonymity(self) -> float:
        return float(self.mean_anonymity_exact)

    @property
    def std_error(self) -> float:
        n = len(self.per_driver_candidates)
        if n < 2:
            return 0.0
        return float(np.std(self.per_driver_candidates, ddof=1) / math.sqrt(n))


def obfuscate(true_loc: PlanarPoint, params: ObfuscationParams, rng: np.random.Generator) -> PlanarPoint:
    """Uniform random point of the closed disk of radius R, in whole metres.

    Draws from the bounding square until the point lands in the disk, rounds,
    and redraws if rounding pushed it outside. The result is therefore never
    more than R from ``true_loc``.
    """
    r = params.radius_m
    if r == 0:
        return true_loc
    r2 = r * r
    while True:
        dx, dy = rng.uniform(-r, r, size=2)
        if dx * dx + dy * dy > r2:
            continue
        ix, iy = int(round(dx)), int(round(dy))
        if ix * ix + iy * iy <= r2:
            return PlanarPoint(true_loc[0] + ix, true_loc[1] + iy, true_loc[2])


def predict_driver_mitigated(
    zone: Zone,
    rider: PlanarPoint,
    d: int,
    net: RoadNetwork,
    params: ObfuscationParams,
) -> FrozenSet[PlanarPoint]:
    """Lattice points at squared distance ``d`` that are in the zone and have a
    road centreline within R (plus tolerance)."""
    reach = params.radius_m + params.road_tolerance_m
    out = set()
    for dx, dy in enumerate_circle(d):
        p = PlanarPoint(rider[0] + dx, rider[1] + dy, rider[2])
        if zone.contains(p) and net.has_road_within(p, reach):
            out.add(p)
    return frozenset(out)


def disclosed_distance(rider: PlanarPoint, disclosed_loc: PlanarPoint) -> int:
    return pnorm_value(2, disclosed_loc[0] - rider[0], disclosed_loc[1] - rider[1])


def padding_for(params: ObfuscationParams) -> int:
    """Margin that keeps L' inside the zone when the driver is sampled inside
    the zone shrunk by it."""
    return int(math.ceil(params.radius_m))


def mitigated_trial(net: RoadNetwork, config, zone_side: int, trial: int):
    """One rider, one obfuscating driver, one run of the modified attack."""
    params = ObfuscationParams(config.radius, config.road_tolerance_m)
    rngs = trial_rngs(config, zone_side, trial)
    rec = TrialRecord("mitigated", zone_side, trial)
    started = time.perf_counter()
    zone = sample_zone(net.bounds, zone_side, rngs["zone"], net, config.zone_retries)
    rider = sample_in_zone(zone, rngs["rider"])
    driver_zone = zone.shrink(padding_for(params)) if config.edge_policy == "pad" else zone
    driver = RoadSampler(net, driver_zone, config.on_road_threshold_m).sample(rngs["driver"])
    shown = obfuscate(driver, params, rngs["obfuscate"])
    if config.edge_policy == "drop" and not zone.contains(shown):
        rec.status = "dropped"
        return rec
    candidates = predict_driver_mitigated(zone, rider, disclosed_distance(rider, shown), net, params)
    rec.candidates = len(candidates)
    rec.hit = shown in candidates
    rec.exact = rec.candidates == 1
    rec.seconds = time.perf_counter() - started
    return rec


def run_mitigated_experiment(config, zone_side: int | None = None,
                             net: RoadNetwork | None = None) -> AnonymityReport:
    """Anonymity over ``config.trials_per_size`` seeded trials at one zone size.

    Trials whose obfuscated point was dropped (edge_policy "drop") are left
    out of the statistics.
    """
    net = net or load_roads(config.road_source, config.cell_size_m)
    side = zone_side or config.zone_sides_m[0]
    records = [mitigated_trial(net, config, side, t) for t in range(config.trials_per_size)]
    ok = [r for r in records if r.status == "ok"]
    return AnonymityReport([r.candidates for r in ok], [r.hit for r in ok])
