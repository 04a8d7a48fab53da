"""The rider-side location-harvesting attack.

For every disclosed squared distance the rider enumerates the lattice
points on that circle around herself, keeps the ones inside her zone, and
keeps of those the ones that sit on a road.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List, Sequence, Tuple

from .geometry import InvalidExponent, enumerate_circle, enumerate_pnorm, pnorm_value
from .projection import PlanarPoint
from .roadnet import ON_ROAD_THRESHOLD_M, RoadNetwork, Zone


class InvalidSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class RideSnapshot:
    """One ride request as seen by an omniscient observer.

    ``drivers`` is ground truth and only used for scoring; the attack itself
    reads ``zone``, ``rider`` and ``disclosed``.
    """

    zone: Zone
    rider: PlanarPoint
    drivers: Tuple[PlanarPoint, ...]
    disclosed: Tuple[int, ...]
    norm_exponent: int = 2

    @classmethod
    def from_drivers(cls, zone, rider, drivers, p=2):
        drivers = tuple(drivers)
        disclosed = tuple(
            pnorm_value(p, d[0] - rider[0], d[1] - rider[1]) for d in drivers
        )
        return cls(zone, rider, drivers, disclosed, p)

    def validate(self, net: RoadNetwork, threshold_m: float = ON_ROAD_THRESHOLD_M):
        if len(self.drivers) != len(self.disclosed):
            raise InvalidSnapshot("drivers and disclosed values differ in length")
        if not self.zone.contains(self.rider):
            raise InvalidSnapshot(f"rider {self.rider} is outside the zone")
        for i, (d, n) in enumerate(zip(self.drivers, self.disclosed)):
            if not self.zone.contains(d):
                raise InvalidSnapshot(f"driver {i} at {d} is outside the zone")
            if not net.is_on_road(d, threshold_m):
                raise InvalidSnapshot(f"driver {i} at {d} is not on a road")
            expected = pnorm_value(self.norm_exponent, d[0] - self.rider[0], d[1] - self.rider[1])
            if n != expected:
                raise InvalidSnapshot(f"disclosed[{i}]={n} but the true norm is {expected}")


@dataclass(frozen=True)
class PredictionSet:
    driver_index: int
    candidates: FrozenSet[PlanarPoint]

    def __len__(self):
        return len(self.candidates)


@dataclass
class AttackReport:
    predictions: List[PredictionSet]
    hit: List[bool]
    total_candidates: int = 0
    exact_count: int = 0
    avg_exact: Fraction = field(default=Fraction(0))
    exact_pct_exact: Fraction = field(default=Fraction(0))

    @property
    def avg(self) -> float:
        return float(self.avg_exact)

    @property
    def exact_pct(self) -> float:
        return float(self.exact_pct_exact)


def _filter_offsets(offsets, zone, rider, net, keep):
    out = set()
    for dx, dy in offsets:
        p = PlanarPoint(rider[0] + dx, rider[1] + dy, rider[2])
        if zone.contains(p) and keep(p):
            out.add(p)
    return frozenset(out)


def predict_driver(
    zone: Zone,
    rider: PlanarPoint,
    d: int,
    net: RoadNetwork,
    threshold_m: float = ON_ROAD_THRESHOLD_M,
    p: int = 2,
) -> FrozenSet[PlanarPoint]:
    """Candidate locations of a driver at squared distance ``d`` (or p-norm
    value ``d`` when ``p != 2``) from the rider."""
    offsets = enumerate_circle(d) if p == 2 else enumerate_pnorm(p, d)
    return _filter_offsets(
        offsets, zone, rider, net, lambda q: net.is_on_road(q, threshold_m)
    )


def summarize(predictions: Sequence[PredictionSet], truths: Sequence) -> AttackReport:
    n = len(predictions)
    total = sum(len(ps) for ps in predictions)
    exact = sum(1 for ps in predictions if len(ps) == 1)
    hit = [truth in ps.candidates for ps, truth in zip(predictions, truths)]
    if n == 0:
        return AttackReport(list(predictions), hit)
    return AttackReport(
        list(predictions),
        hit,
        total,
        exact,
        Fraction(total, n),
        Fraction(100 * exact, n),
    )


def run_attack(
    snapshot: RideSnapshot,
    net: RoadNetwork,
    threshold_m: float = ON_ROAD_THRESHOLD_M,
    validate: bool = True,
) -> AttackReport:
    if validate:
        snapshot.validate(net, threshold_m)
    predictions = [
        PredictionSet(
            i,
            predict_driver(
                snapshot.zone, snapshot.rider, d, net, threshold_m, snapshot.norm_exponent
            ),
        )
        for i, d in enumerate(snapshot.disclosed)
    ]
    return summarize(predictions, snapshot.drivers)


def run_attack_pnorm(
    snapshot: RideSnapshot,
    p: int,
    net: RoadNetwork,
    threshold_m: float = ON_ROAD_THRESHOLD_M,
    validate: bool = True,
) -> AttackReport:
    """The attack against an SP that discloses |dx|^p + |dy|^p instead."""
    if p <= 0 or p % 2:
        raise InvalidExponent(f"p must be a positive even integer, got {p}")
    if snapshot.norm_exponent != p:
        raise InvalidSnapshot(
            f"snapshot discloses {snapshot.norm_exponent}-norm values, not {p}-norm"
        )
    return run_attack(snapshot, net, threshold_m, validate)
