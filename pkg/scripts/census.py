"""Brute-force census of attack statistics on synthetic grid maps.

Run once, before trusting the package, to get the reference bands the
statistical tests compare against. Nothing here imports oride_attack:
lattice points come from a float-guess-then-exact-check column scan, road
distance from the closed form for a full axis-aligned grid, and scenes
from this script's own sampler.

    python3 scripts/census.py --scenes 20000 > tests/data/census.json
"""
import argparse
import json
import math

import numpy as np


def circle_points(n):
    """All integer (dx, dy) with dx^2 + dy^2 == n, by scanning dx."""
    r = math.isqrt(n) + 1
    dx = np.arange(-r, r + 1, dtype=np.int64)
    rem = n - dx * dx
    ok = rem >= 0
    dx, rem = dx[ok], rem[ok]
    guess = np.rint(np.sqrt(rem.astype(np.float64))).astype(np.int64)
    pts = set()
    for delta in (-1, 0, 1):
        g = guess + delta
        hit = (g >= 0) & (g * g == rem)
        for x, y in zip(dx[hit].tolist(), g[hit].tolist()):
            pts.add((x, y))
            pts.add((x, -y))
    return pts


def grid_distance(x, y, spacing):
    """Distance to the nearest line of a full grid (point inside the map)."""
    fx, fy = x % spacing, y % spacing
    return min(fx, spacing - fx, fy, spacing - fy)


class GridMap:
    def __init__(self, spacing, blocks):
        self.s = spacing
        self.extent = spacing * blocks

    def lines_in(self, lo_x, lo_y, hi_x, hi_y):
        """(orientation, coordinate, length) of grid lines crossing the box."""
        out = []
        for k in range(math.ceil(lo_x / self.s), math.floor(hi_x / self.s) + 1):
            out.append(("v", k * self.s, hi_y - lo_y))
        for k in range(math.ceil(lo_y / self.s), math.floor(hi_y / self.s) + 1):
            out.append(("h", k * self.s, hi_x - lo_x))
        return out

    def sample_road_point(self, rng, box):
        lo_x, lo_y, hi_x, hi_y = box
        lines = self.lines_in(*box)
        w = np.array([l[2] for l in lines], dtype=float)
        while True:
            o, c, _ = lines[rng.choice(len(lines), p=w / w.sum())]
            if o == "v":
                x, y = c, int(round(rng.uniform(lo_y, hi_y)))
            else:
                x, y = int(round(rng.uniform(lo_x, hi_x))), c
            if lo_x <= x <= hi_x and lo_y <= y <= hi_y:
                return x, y


def disk_point(rng, r):
    if r == 0:
        return 0, 0
    while True:
        dx, dy = rng.uniform(-r, r, 2)
        if dx * dx + dy * dy > r * r:
            continue
        ix, iy = int(round(dx)), int(round(dy))
        if ix * ix + iy * iy <= r * r:
            return ix, iy


def scene_stats(gm, side, rng, threshold, radius=None):
    """One scene; returns (pre-filter count, filtered count, driver hit)."""
    cx = int(rng.integers(0, gm.extent - side + 1))
    cy = int(rng.integers(0, gm.extent - side + 1))
    zone = (cx, cy, cx + side, cy + side)
    rx = int(rng.integers(cx, cx + side + 1))
    ry = int(rng.integers(cy, cy + side + 1))
    pad = 0 if radius is None else math.ceil(radius)
    dx0, dy0 = gm.sample_road_point(rng, (cx + pad, cy + pad, cx + side - pad, cy + side - pad))
    reach = threshold
    if radius is not None:
        ox, oy = disk_point(rng, radius)
        dx0, dy0 = dx0 + ox, dy0 + oy
        reach = radius
    n = (dx0 - rx) ** 2 + (dy0 - ry) ** 2
    pts = circle_points(n)
    kept = [
        (rx + a, ry + b) for a, b in pts
        if cx <= rx + a <= cx + side and cy <= ry + b <= cy + side
        and grid_distance(rx + a, ry + b, gm.s) <= reach
    ]
    return len(pts), len(kept), (dx0, dy0) in kept


def census(gm, side, scenes, seed, threshold=3.0, radius=None):
    rng = np.random.default_rng(seed)
    pre, post, hits = [], [], 0
    for _ in range(scenes):
        a, b, h = scene_stats(gm, side, rng, threshold, radius)
        pre.append(a)
        post.append(b)
        hits += h
    post = np.array(post, dtype=float)
    pre = np.array(pre, dtype=float)
    exact = (post == 1).astype(float)
    return {
        "spacing": gm.s, "extent": gm.extent, "side": side, "scenes": scenes,
        "threshold": threshold, "radius": radius, "hits": hits,
        "pre_mean": pre.mean(), "pre_sd": pre.std(ddof=1),
        "mean": post.mean(), "sd": post.std(ddof=1),
        "exact_pct": 100 * exact.mean(), "exact_sd": 100 * exact.std(ddof=1),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenes", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    rows = []
    big = GridMap(100, 300)
    for side in (1000, 2000, 3000, 5000, 10000, 20000, 30000):
        rows.append(census(big, side, args.scenes, args.seed))
    for spacing, blocks in ((25, 120), (100, 30), (500, 6)):
        gm = GridMap(spacing, blocks)
        rows.append(census(gm, 2000, args.scenes, args.seed))
        rows.append(census(gm, 2000, args.scenes, args.seed, threshold=0.0))
        for r in (0, 10, 50, 150):
            rows.append(census(gm, 2000, args.scenes, args.seed, radius=r))
    print(json.dumps(rows, indent=1))


if __name__ == "__main__":
    main()
