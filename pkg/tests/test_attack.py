import json
import math
import random
import time

import numpy as np
import pytest

from oride_attack.attack import (
    InvalidSnapshot,
    PredictionSet,
    RideSnapshot,
    predict_driver,
    run_attack,
    run_attack_pnorm,
)
from oride_attack.experiment import load_roads, sample_in_zone, sample_zone, substream
from oride_attack.geometry import InvalidExponent, enumerate_circle
from oride_attack.projection import PlanarPoint
from oride_attack.roadnet import RoadSampler, RoadSegment, Zone, build, generate_manhattan_grid

from conftest import DATA
from oracles import seg_distance_all, zone_scan

P = PlanarPoint


@pytest.fixture(scope="module")
def worked_example():
    return load_roads(str(DATA / "worked_example_roads.csv"))


WE_ZONE = Zone(P(-10, -10), 20)
WE_CANDIDATES = {(-4, 3), (4, 3), (5, 0), (0, -5)}


def test_worked_example_prediction_set(worked_example):
    start = time.perf_counter()
    snap = RideSnapshot.from_drivers(WE_ZONE, P(0, 0), [P(4, 3)])
    assert snap.disclosed == (25,)
    report = run_attack(snap, worked_example, threshold_m=0.5)
    assert time.perf_counter() - start < 1.0
    assert {c.xy for c in report.predictions[0].candidates} == WE_CANDIDATES
    assert report.avg_exact == 4 and report.exact_pct_exact == 0
    assert report.hit == [True]


def test_zero_distance(worked_example):
    on = P(0, 3)
    assert predict_driver(WE_ZONE, on, 0, worked_example, 0.5) == {on}
    off = P(2, 0)
    assert predict_driver(WE_ZONE, off, 0, worked_example, 0.5) == frozenset()


def test_unique_candidate_gives_exact_100():
    net = build([RoadSegment("r", P(0, 0), P(0, 10))])
    zone = Zone(P(0, 0), 10)
    # from (0, 0) the only lattice point at distance 10 inside the zone on the road is (0, 10)
    snap = RideSnapshot.from_drivers(zone, P(0, 0), [P(0, 10)])
    report = run_attack(snap, net, threshold_m=0.0)
    assert report.avg == 1.0 and report.exact_pct == 100.0


def _scene(rng, net, side):
    zone = sample_zone(net.bounds, side, rng, net)
    rider = sample_in_zone(zone, rng)
    driver = RoadSampler(net, zone).sample(rng)
    return zone, rider, driver


def _diagonal_network(rng, n=80, extent=1500):
    segs = []
    for i in range(n):
        a = rng.integers(0, extent, 2)
        b = a + rng.integers(-400, 401, 2)
        if (a == b).all():
            b[0] += 3
        segs.append(RoadSegment(f"d{i:03d}", P(int(a[0]), int(a[1])), P(int(b[0]), int(b[1]))))
    return segs


def test_matches_exhaustive_zone_scan():
    rng = np.random.default_rng(2024)
    grid = build(generate_manhattan_grid(50, 30, 30))
    diag_segs = _diagonal_network(rng)
    diag = build(diag_segs)
    diag_arr = [(s.a[0], s.a[1], s.b[0], s.b[1]) for s in diag_segs]
    for k in range(100):
        net, arr = (grid, None) if k % 2 else (diag, diag_arr)
        side = int(rng.integers(50, 1001))
        zone, rider, driver = _scene(rng, net, side)
        d = (driver[0] - rider[0]) ** 2 + (driver[1] - rider[1]) ** 2
        if arr is None:
            def ok(x, y):
                return min(x % 50, 50 - x % 50, y % 50, 50 - y % 50) <= 3 and 0 <= x <= 1500 and 0 <= y <= 1500
        else:
            def ok(x, y):
                return seg_distance_all(x, y, arr) <= 3
        expected = zone_scan((zone.min_x, zone.min_y), side, rider, d, ok)
        got = {c.xy for c in predict_driver(zone, rider, d, net)}
        assert got == expected, k
        assert driver.xy in got


def test_report_statistics_match_per_driver_calls():
    net = build(generate_manhattan_grid(25, 40, 40))
    rng = np.random.default_rng(9)
    zone = Zone(P(100, 100), 800)
    rider = sample_in_zone(zone, rng)
    sampler = RoadSampler(net, zone)
    drivers = [sampler.sample(rng) for _ in range(50)]
    report = run_attack(RideSnapshot.from_drivers(zone, rider, drivers), net)
    sizes = []
    for i, drv in enumerate(drivers):
        d = (drv[0] - rider[0]) ** 2 + (drv[1] - rider[1]) ** 2
        cands = predict_driver(zone, rider, d, net)
        assert report.predictions[i] == PredictionSet(i, cands)
        sizes.append(len(cands))
    assert report.avg == sum(sizes) / 50
    assert report.exact_pct == 100 * sum(s == 1 for s in sizes) / 50
    assert all(report.hit)

    order = list(range(50))
    random.Random(3).shuffle(order)
    shuffled = run_attack(RideSnapshot.from_drivers(zone, rider, [drivers[i] for i in order]), net)
    for j, i in enumerate(order):
        assert shuffled.predictions[j].candidates == report.predictions[i].candidates
    assert shuffled.avg_exact == report.avg_exact
    assert shuffled.exact_pct_exact == report.exact_pct_exact


def test_completeness_on_grids():
    for spacing in (25, 100, 500):
        net = build(generate_manhattan_grid(spacing, 3000 // spacing, 3000 // spacing))
        rng = np.random.default_rng(spacing)
        for _ in range(300):
            zone, rider, driver = _scene(rng, net, 2000)
            d = (driver[0] - rider[0]) ** 2 + (driver[1] - rider[1]) ** 2
            assert driver in predict_driver(zone, rider, d, net)


def test_snapshot_validation(worked_example):
    with pytest.raises(InvalidSnapshot, match="not on a road"):
        run_attack(RideSnapshot.from_drivers(WE_ZONE, P(0, 0), [P(2, 2)]), worked_example, 0.5)
    with pytest.raises(InvalidSnapshot, match="outside"):
        run_attack(RideSnapshot.from_drivers(WE_ZONE, P(0, 0), [P(30, 3)]), worked_example, 0.5)
    bad = RideSnapshot(WE_ZONE, P(0, 0), (P(4, 3),), (24,))
    with pytest.raises(InvalidSnapshot, match="true norm"):
        run_attack(bad, worked_example, 0.5)


def test_pnorm_p2_is_the_plain_attack():
    net = build(generate_manhattan_grid(25, 40, 40))
    rng = np.random.default_rng(1)
    zone = Zone(P(0, 0), 1000)
    rider = sample_in_zone(zone, rng)
    sampler = RoadSampler(net, zone)
    snap = RideSnapshot.from_drivers(zone, rider, [sampler.sample(rng) for _ in range(30)])
    assert run_attack_pnorm(snap, 2, net).predictions == run_attack(snap, net).predictions


def test_pnorm_candidates_are_pnorm_offsets():
    net = build([RoadSegment("wide", P(-100, 0), P(100, 0))])
    zone = Zone(P(-10, -10), 20)
    rider = P(0, 0)
    snap = RideSnapshot.from_drivers(zone, rider, [P(1, 2)], p=4)
    assert snap.disclosed == (17,)
    report = run_attack_pnorm(snap, 4, net, threshold_m=50, validate=False)
    offsets = {(a * sa, b * sb) for a, b in ((1, 2), (2, 1)) for sa in (1, -1) for sb in (1, -1)}
    assert {c.xy for c in report.predictions[0].candidates} == offsets
    with pytest.raises(InvalidExponent):
        run_attack_pnorm(snap, 3, net)
    with pytest.raises(InvalidSnapshot):
        run_attack_pnorm(snap, 6, net)


def test_pnorm_sets_are_smaller_on_average():
    net = build(generate_manhattan_grid(25, 40, 40))
    rng = np.random.default_rng(77)
    sizes = {2: [], 4: []}
    for _ in range(1000):
        zone, rider, driver = _scene(rng, net, 600)
        for p in (2, 4):
            snap = RideSnapshot.from_drivers(zone, rider, [driver], p=p)
            rep = run_attack_pnorm(snap, p, net)
            assert rep.hit == [True]
            sizes[p].append(len(rep.predictions[0]))
    assert np.mean(sizes[4]) < np.mean(sizes[2])


def test_prefilter_cardinality_within_census_band(data_dir):
    """Mean number of lattice solutions before filtering, against scripts/census.py."""
    census = json.loads((data_dir / "census.json").read_text())
    net = load_roads("grid:300x300:100")
    for side, trials in ((1000, 400), (5000, 400), (30000, 150)):
        ref = next(r for r in census if r["spacing"] == 100 and r["side"] == side
                   and r["radius"] is None and r["threshold"] == 3.0 and r["extent"] == 30000)
        counts = []
        for t in range(trials):
            rng = substream(31337, side, t, "census")
            zone, rider, driver = _scene(rng, net, side)
            d = (driver[0] - rider[0]) ** 2 + (driver[1] - rider[1]) ** 2
            counts.append(len(enumerate_circle(d)))
        se = ref["pre_sd"] * math.sqrt(1 / len(counts) + 1 / ref["scenes"])
        assert abs(np.mean(counts) - ref["pre_mean"]) <= 4 * se, side
