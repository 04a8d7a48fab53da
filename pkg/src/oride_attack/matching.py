"""Ride-matching accuracy under a constant-speed road-graph travel model.

A driver is selected by smallest squared Euclidean distance to the rider,
computed from true or obfuscated locations. The selection counts as
accurate when its travel time is within a minute of the time-wise closest
driver's.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import List, Optional

from .experiment import (
    ExperimentConfig,
    TrialRecord,
    load_roads,
    sample_in_zone,
    sample_zone,
    trial_rngs,
)
from .mitigation import ObfuscationParams, obfuscate
from .roadnet import RoadNetwork, RoadSampler


class Unreachable(RuntimeError):
    pass


@dataclass(frozen=True)
class TravelModel:
    speed_mps: float = 8.33
    # None: an off-graph point pays (distance to its entry point) / speed
    access_penalty_s: Optional[float] = None

    def __post_init__(self):
        if not self.speed_mps > 0:
            raise ValueError("speed must be positive")

    def access(self, offset_m: float) -> float:
        if self.access_penalty_s is None:
            return offset_m / self.speed_mps
        return self.access_penalty_s if offset_m > 0 else 0.0


@dataclass
class AccuracyReport:
    trials: int
    within: int
    records: List[TrialRecord]

    @property
    def within_one_minute_pct(self) -> float:
        return 100.0 * self.within / self.trials if self.trials else 0.0


class _Entry:
    """Where an arbitrary point joins the graph: its nearest segment."""

    __slots__ = ("offset", "seg", "t", "length", "u", "v")

    def __init__(self, net: RoadNetwork, p):
        self.offset, self.seg, self.t = net.nearest(p)
        self.length = float(net.lengths[self.seg])
        self.u, self.v = net.segment_nodes[self.seg]

    def node_costs(self):
        return ((self.u, self.t * self.length), (self.v, (1.0 - self.t) * self.length))


def _dijkstra(net: RoadNetwork, sources):
    dist = {}
    heap = [(d, n) for n, d in sources]
    heapq.heapify(heap)
    while heap:
        d, n = heapq.heappop(heap)
        if n in dist:
            continue
        dist[n] = d
        for m, w in net.adjacency[n]:
            if m not in dist:
                heapq.heappush(heap, (d + w, m))
    return dist


def _path_length(dist, origin: _Entry, target: _Entry) -> float:
    best = math.inf
    for n, extra in target.node_costs():
        if n in dist:
            best = min(best, dist[n] + extra)
    if origin.seg == target.seg:
        best = min(best, abs(origin.t - target.t) * origin.length)
    return best


def travel_times_from(net: RoadNetwork, origin, targets, model: TravelModel) -> List[float]:
    """Travel time from ``origin`` to each target; inf where unreachable."""
    start = _Entry(net, origin)
    dist = _dijkstra(net, start.node_costs())
    out = []
    for p in targets:
        end = _Entry(net, p)
        length = _path_length(dist, start, end)
        out.append(
            length / model.speed_mps + model.access(start.offset) + model.access(end.offset)
        )
    return out


def travel_time(net: RoadNetwork, a, b, model: TravelModel = TravelModel()) -> float:
    """Seconds to drive from ``a`` to ``b``: shortest road path between their
    graph entry points at constant speed, plus access penalties."""
    # canonical direction so the float sum is identical both ways round
    if (b[0], b[1]) < (a[0], a[1]):
        a, b = b, a
    t = travel_times_from(net, a, [b], model)[0]
    if math.isinf(t):
        raise Unreachable(f"{tuple(a)} and {tuple(b)} are in disconnected components")
    return t


def select_driver(rider, locations) -> int:
    """Index of the smallest squared Euclidean distance; ties go to the lowest index."""
    best, best_i = None, -1
    for i, p in enumerate(locations):
        d = (p[0] - rider[0]) ** 2 + (p[1] - rider[1]) ** 2
        if best is None or d < best:
            best, best_i = d, i
    return best_i


def accuracy_trial(net: RoadNetwork, config: ExperimentConfig, zone_side: int, trial: int,
                   mode: str | None = None) -> TrialRecord:
    mode = mode or config.accuracy_mode
    rngs = trial_rngs(config, zone_side, trial)
    rec = TrialRecord("accuracy-" + mode, zone_side, trial)
    started = time.perf_counter()
    zone = sample_zone(net.bounds, zone_side, rngs["zone"], net, config.zone_retries)
    rider = sample_in_zone(zone, rngs["rider"])
    sampler = RoadSampler(net, zone, config.on_road_threshold_m)
    drivers = [sampler.sample(rngs["driver"]) for _ in range(config.drivers_per_trial)]
    if mode == "mitigated":
        params = ObfuscationParams(config.radius)
        shown = [obfuscate(d, params, rngs["obfuscate"]) for d in drivers]
    else:
        shown = drivers
    selected = select_driver(rider, shown)
    times = travel_times_from(net, rider, drivers, TravelModel(config.speed_mps))
    rec.driver = selected
    rec.t_m = times[selected]
    rec.t_t = min(times)
    rec.within = abs(rec.t_m - rec.t_t) <= config.match_window_s
    rec.seconds = time.perf_counter() - started
    return rec


def evaluate_accuracy(config: ExperimentConfig, mode: str = "oride", zone_side: int | None = None,
                      net: RoadNetwork | None = None) -> AccuracyReport:
    """Share of trials whose Euclidean pick is within the match window of the
    fastest driver."""
    if mode not in ("oride", "mitigated"):
        raise ValueError("mode must be 'oride' or 'mitigated'")
    net = net or load_roads(config.road_source, config.cell_size_m)
    side = zone_side or config.zone_sides_m[0]
    records = [accuracy_trial(net, config, side, t, mode) for t in range(config.trials_per_size)]
    return AccuracyReport(len(records), sum(r.within for r in records), records)
