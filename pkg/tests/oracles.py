"""Slow, obviously-correct reference implementations used only by tests.

None of these share code with the package: lattice points come from
exhaustive squares or float-guess-then-verify column scans, distances from
numpy over every segment, paths from networkx.
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np


def circle_table(limit):
    """{n: set of (x, y)} for every n <= limit, from the full square."""
    r = math.isqrt(limit) + 1
    xs = np.arange(-r, r + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    V = X * X + Y * Y
    keep = V <= limit
    table = defaultdict(set)
    for x, y, v in zip(X[keep].tolist(), Y[keep].tolist(), V[keep].tolist()):
        table[v].add((x, y))
    return table


def circle_scan(n):
    """Integer points on x^2 + y^2 = n by scanning every column x."""
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


def r2(n):
    """Number of representations as a sum of two squares, 4 * (d1(n) - d3(n))."""
    if n == 0:
        return 1
    d = np.arange(1, math.isqrt(n) + 1, dtype=np.int64)
    d = d[n % d == 0]
    divisors = np.union1d(d, n // d)
    return int(4 * ((divisors % 4 == 1).sum() - (divisors % 4 == 3).sum()))


def pnorm_brute(p, n):
    r = 0
    while (r + 1) ** p <= n:
        r += 1
    xs = np.arange(-r, r + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    hit = np.abs(X) ** p + np.abs(Y) ** p == n
    return {(int(x), int(y)) for x, y in zip(X[hit], Y[hit])}


def seg_distance_all(px, py, segs):
    """Exact min distance from (px, py) to an (m, 4) array of segments."""
    segs = np.asarray(segs, dtype=float)
    ax, ay, bx, by = segs.T
    vx, vy = bx - ax, by - ay
    t = ((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy)
    t = np.clip(t, 0.0, 1.0)
    return float(np.hypot(ax + t * vx - px, ay + t * vy - py).min())


def zone_scan(zone_min, side, rider, d, road_ok):
    """Every integer point of the closed zone at squared distance d from the
    rider that passes ``road_ok(x, y)``."""
    x0, y0 = zone_min
    xs = np.arange(x0, x0 + side + 1, dtype=np.int64)
    ys = np.arange(y0, y0 + side + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    hit = (X - rider[0]) ** 2 + (Y - rider[1]) ** 2 == d
    return {(x, y) for x, y in zip(X[hit].tolist(), Y[hit].tolist()) if road_ok(x, y)}
