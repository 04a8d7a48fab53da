"""Offline road network: polylines in integer metres behind a uniform grid.

Queries are exact. The grid only decides which segments get looked at; the
answer is always the true minimum point-to-segment distance.
"""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .projection import GeoPoint, PlanarPoint, project, zone_for

DEFAULT_CELL_SIZE = 250.0
ON_ROAD_THRESHOLD_M = 3.0
MAX_REJECTIONS = 10**6


class EmptyNetwork(ValueError):
    pass


class DuplicateSegmentId(ValueError):
    pass


class NoRoadInZone(RuntimeError):
    pass


class ParseError(ValueError):
    pass


class MixedUtmZones(ValueError):
    pass


@dataclass(frozen=True)
class RoadSegment:
    id: str
    a: PlanarPoint
    b: PlanarPoint

    def __post_init__(self):
        if self.a.xy == self.b.xy:
            raise ValueError(f"segment {self.id!r} has zero length")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])


@dataclass(frozen=True)
class Zone:
    """Closed axis-aligned square: points on the boundary are inside."""

    min_corner: PlanarPoint
    side_m: int

    def __post_init__(self):
        if self.side_m <= 0:
            raise ValueError("zone side must be positive")

    @property
    def min_x(self):
        return self.min_corner[0]

    @property
    def min_y(self):
        return self.min_corner[1]

    @property
    def max_x(self):
        return self.min_corner[0] + self.side_m

    @property
    def max_y(self):
        return self.min_corner[1] + self.side_m

    def contains(self, p) -> bool:
        return self.min_x <= p[0] <= self.max_x and self.min_y <= p[1] <= self.max_y

    def shrink(self, margin: int) -> "Zone":
        """Zone with ``margin`` metres trimmed from every side."""
        side = self.side_m - 2 * margin
        if side <= 0:
            raise ValueError(f"margin {margin} leaves nothing of a {self.side_m} m zone")
        return Zone(
            PlanarPoint(self.min_x + margin, self.min_y + margin, self.min_corner.utm_zone),
            side,
        )


def _point_segment_distance(x, y, ax, ay, bx, by):
    """Vectorised Euclidean distance from (x, y) to segments a-b.

    Returns (distance, t) with t the clamped projection parameter along a->b.
    """
    dx = bx - ax
    dy = by - ay
    t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(x - (ax + t * dx), y - (ay + t * dy)), t


class RoadNetwork:
    """Immutable set of road segments with a grid index and an endpoint graph.

    Segments are sorted by id before indexing, so two networks built from the
    same segments in any order answer every query identically.
    """

    def __init__(self, segments, cell_size: float = DEFAULT_CELL_SIZE, utm_zone: int = 0):
        segments = sorted(segments, key=lambda s: s.id)
        if not segments:
            raise EmptyNetwork("a road network needs at least one segment")
        ids = [s.id for s in segments]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DuplicateSegmentId(f"duplicate segment ids: {dupes[:5]}")
        if cell_size <= 0:
            raise ValueError("cell size must be positive")

        self.segments = tuple(segments)
        self.cell_size = float(cell_size)
        self.utm_zone = utm_zone
        coords = np.array([(s.a[0], s.a[1], s.b[0], s.b[1]) for s in segments], dtype=float)
        if not np.all(np.isfinite(coords)):
            raise ValueError("segment coordinates must be finite")
        self._ax, self._ay, self._bx, self._by = (coords[:, i].copy() for i in range(4))
        for arr in (self._ax, self._ay, self._bx, self._by):
            arr.setflags(write=False)
        self.lengths = np.hypot(self._bx - self._ax, self._by - self._ay)
        self.lengths.setflags(write=False)

        self.bounds = (
            float(min(self._ax.min(), self._bx.min())),
            float(min(self._ay.min(), self._by.min())),
            float(max(self._ax.max(), self._bx.max())),
            float(max(self._ay.max(), self._by.max())),
        )
        self._build_index()
        self._build_graph()

    # -- construction -----------------------------------------------------

    def _build_index(self):
        cs = self.cell_size
        ox, oy = self.bounds[0], self.bounds[1]
        self._origin = (ox, oy)
        self._nx = int((self.bounds[2] - ox) // cs) + 1
        self._ny = int((self.bounds[3] - oy) // cs) + 1
        lo_i = ((np.minimum(self._ax, self._bx) - ox) // cs).astype(int)
        hi_i = ((np.maximum(self._ax, self._bx) - ox) // cs).astype(int)
        lo_j = ((np.minimum(self._ay, self._by) - oy) // cs).astype(int)
        hi_j = ((np.maximum(self._ay, self._by) - oy) // cs).astype(int)
        cells = defaultdict(list)
        for k in range(len(self.segments)):
            for i in range(lo_i[k], hi_i[k] + 1):
                for j in range(lo_j[k], hi_j[k] + 1):
                    cells[(i, j)].append(k)
        self._cells = {c: np.array(v, dtype=np.int64) for c, v in cells.items()}

    def _build_graph(self):
        # Coordinates are whole metres, so endpoints within 0.5 m of each
        # other are exactly equal and snapping is a dictionary lookup.
        node_ids = {}
        adjacency = []
        for k, seg in enumerate(self.segments):
            ends = []
            for p in (seg.a, seg.b):
                key = (p[0], p[1])
                if key not in node_ids:
                    node_ids[key] = len(node_ids)
                    adjacency.append([])
                ends.append(node_ids[key])
            u, v = ends
            w = float(self.lengths[k])
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        self.node_ids = node_ids
        self.node_coords = tuple(node_ids)
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self.segment_nodes = tuple(
            (node_ids[(s.a[0], s.a[1])], node_ids[(s.b[0], s.b[1])]) for s in self.segments
        )

    # -- queries ----------------------------------------------------------

    @property
    def n_nodes(self):
        return len(self.node_ids)

    @property
    def n_edges(self):
        return len(self.segments)

    def _cell_of(self, x, y):
        cs = self.cell_size
        return (
            int(math.floor((x - self._origin[0]) / cs)),
            int(math.floor((y - self._origin[1]) / cs)),
        )

    def _gather(self, cells):
        found = [self._cells[c] for c in cells if c in self._cells]
        if not found:
            return None
        return np.unique(np.concatenate(found))

    def _ring(self, ci, cj, k):
        if k == 0:
            return [(ci, cj)]
        lo_i, hi_i = max(ci - k, 0), min(ci + k, self._nx - 1)
        lo_j, hi_j = max(cj - k, 0), min(cj + k, self._ny - 1)
        out = []
        for j in (cj - k, cj + k):
            if 0 <= j < self._ny:
                out.extend((i, j) for i in range(lo_i, hi_i + 1))
        for i in (ci - k, ci + k):
            if 0 <= i < self._nx:
                out.extend((i, j) for j in range(max(lo_j, cj - k + 1), min(hi_j, cj + k - 1) + 1))
        return out

    def nearest(self, p):
        """(distance, segment index, t) of the closest segment to ``p``.

        Ties go to the lowest segment index (segments are sorted by id).
        """
        x, y = float(p[0]), float(p[1])
        ci, cj = self._cell_of(x, y)
        first = max(0, -ci, ci - (self._nx - 1), -cj, cj - (self._ny - 1))
        last = max(ci, self._nx - 1 - ci, cj, self._ny - 1 - cj)
        best = (math.inf, -1, 0.0)
        for k in range(first, last + 1):
            if best[0] < (k - 1) * self.cell_size:
                break
            idx = self._gather(self._ring(ci, cj, k))
            if idx is None:
                continue
            d, t = _point_segment_distance(
                x, y, self._ax[idx], self._ay[idx], self._bx[idx], self._by[idx]
            )
            m = int(np.argmin(d))
            cand = (float(d[m]), int(idx[m]), float(t[m]))
            if cand[:2] < best[:2]:
                best = cand
        return best

    def distance_to_road(self, p) -> float:
        return self.nearest(p)[0]

    def _within(self, p, radius) -> bool:
        x, y = float(p[0]), float(p[1])
        lo = self._cell_of(x - radius, y - radius)
        hi = self._cell_of(x + radius, y + radius)
        cells = [
            (i, j)
            for i in range(max(lo[0], 0), min(hi[0], self._nx - 1) + 1)
            for j in range(max(lo[1], 0), min(hi[1], self._ny - 1) + 1)
        ]
        idx = self._gather(cells)
        if idx is None:
            return False
        d, _ = _point_segment_distance(
            x, y, self._ax[idx], self._ay[idx], self._bx[idx], self._by[idx]
        )
        return bool(d.min() <= radius)

    def is_on_road(self, p, threshold_m: float = ON_ROAD_THRESHOLD_M) -> bool:
        if threshold_m < 0:
            raise ValueError("threshold must be non-negative")
        return self._within(p, threshold_m)

    def has_road_within(self, p, r_m: float) -> bool:
        """True if some road centreline lies within ``r_m`` of ``p``."""
        if r_m < 0:
            raise ValueError("radius must be non-negative")
        return self._within(p, r_m)

    def segments_near_zone(self, zone: Zone):
        lo = self._cell_of(zone.min_x, zone.min_y)
        hi = self._cell_of(zone.max_x, zone.max_y)
        cells = [
            (i, j)
            for i in range(max(lo[0], 0), min(hi[0], self._nx - 1) + 1)
            for j in range(max(lo[1], 0), min(hi[1], self._ny - 1) + 1)
        ]
        idx = self._gather(cells)
        return np.empty(0, dtype=np.int64) if idx is None else idx

    def clip_to_zone(self, zone: Zone):
        """Segment indices with in-zone pieces, and those pieces' end parameters.

        Liang-Barsky clipping; returns (indices, t0, t1) with t0 < t1.
        """
        idx = self.segments_near_zone(zone)
        ax, ay, bx, by = self._ax[idx], self._ay[idx], self._bx[idx], self._by[idx]
        dx, dy = bx - ax, by - ay
        t0 = np.zeros(len(idx))
        t1 = np.ones(len(idx))
        keep = np.ones(len(idx), dtype=bool)
        for pk, qk in (
            (-dx, ax - zone.min_x),
            (dx, zone.max_x - ax),
            (-dy, ay - zone.min_y),
            (dy, zone.max_y - ay),
        ):
            parallel = pk == 0
            keep &= ~(parallel & (qk < 0))
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(parallel, 0.0, qk / np.where(parallel, 1.0, pk))
            entering = (pk < 0) & ~parallel
            leaving = (pk > 0) & ~parallel
            t0 = np.where(entering, np.maximum(t0, r), t0)
            t1 = np.where(leaving, np.minimum(t1, r), t1)
        keep &= t0 < t1
        return idx[keep], t0[keep], t1[keep]

    def point_at(self, seg_index: int, t: float):
        return (
            self._ax[seg_index] + t * (self._bx[seg_index] - self._ax[seg_index]),
            self._ay[seg_index] + t * (self._by[seg_index] - self._ay[seg_index]),
        )


def build(segments, cell_size: float = DEFAULT_CELL_SIZE, utm_zone: int = 0) -> RoadNetwork:
    return RoadNetwork(segments, cell_size=cell_size, utm_zone=utm_zone)


def distance_to_road(net: RoadNetwork, p) -> float:
    return net.distance_to_road(p)


def is_on_road(net: RoadNetwork, p, threshold_m: float = ON_ROAD_THRESHOLD_M) -> bool:
    return net.is_on_road(p, threshold_m)


def has_road_within(net: RoadNetwork, p, r_m: float) -> bool:
    return net.has_road_within(p, r_m)


class RoadSampler:
    """Length-weighted random points on the roads inside one zone.

    Clipping is done once up front, so drawing many drivers in the same
    zone stays cheap.
    """

    def __init__(self, net: RoadNetwork, zone: Zone, threshold_m: float = ON_ROAD_THRESHOLD_M,
                 max_rejections: int = MAX_REJECTIONS):
        self.net = net
        self.zone = zone
        self.threshold_m = threshold_m
        self.max_rejections = max_rejections
        self._idx, self._t0, self._t1 = net.clip_to_zone(zone)
        weights = (self._t1 - self._t0) * net.lengths[self._idx]
        self._total = float(weights.sum())
        if len(self._idx) == 0 or self._total <= 0:
            raise NoRoadInZone(f"no road inside zone {zone}")
        self._cumulative = np.cumsum(weights)

    def sample(self, rng: np.random.Generator) -> PlanarPoint:
        net, zone = self.net, self.zone
        for _ in range(self.max_rejections):
            u = rng.random() * self._total
            k = min(int(np.searchsorted(self._cumulative, u, side="right")), len(self._idx) - 1)
            t = self._t0[k] + rng.random() * (self._t1[k] - self._t0[k])
            x, y = net.point_at(self._idx[k], t)
            p = PlanarPoint(int(round(x)), int(round(y)), net.utm_zone)
            if zone.contains(p) and net.is_on_road(p, self.threshold_m):
                return p
        raise NoRoadInZone(
            f"gave up after {self.max_rejections} rejected samples in zone {zone}"
        )


def sample_on_road(
    net: RoadNetwork,
    zone: Zone,
    rng: np.random.Generator,
    threshold_m: float = ON_ROAD_THRESHOLD_M,
    max_rejections: int = MAX_REJECTIONS,
) -> PlanarPoint:
    """Random on-road point of ``zone``, rounded to whole metres.

    The point is drawn uniformly by length over the in-zone parts of all
    segments. A rounded point that leaves the zone or ends up more than
    ``threshold_m`` from every road is redrawn.
    """
    return RoadSampler(net, zone, threshold_m, max_rejections).sample(rng)


def generate_manhattan_grid(spacing_m: int, rows: int, cols: int, origin=(0, 0)):
    """Streets of a ``rows`` x ``cols`` block grid, one segment per block side."""
    if spacing_m <= 0 or int(spacing_m) != spacing_m:
        raise ValueError(f"spacing must be a positive whole number of metres, got {spacing_m}")
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be at least 1")
    s = int(spacing_m)
    ox, oy = int(origin[0]), int(origin[1])
    segments = []
    for r in range(rows + 1):
        for c in range(cols):
            a = PlanarPoint(ox + c * s, oy + r * s)
            b = PlanarPoint(ox + (c + 1) * s, oy + r * s)
            segments.append(RoadSegment(f"h{r:05d}-{c:05d}", a, b))
    for c in range(cols + 1):
        for r in range(rows):
            a = PlanarPoint(ox + c * s, oy + r * s)
            b = PlanarPoint(ox + c * s, oy + (r + 1) * s)
            segments.append(RoadSegment(f"v{c:05d}-{r:05d}", a, b))
    return segments


def generate_barrier_grid(spacing_m: int, rows: int, cols: int, barrier_every_m: int,
                          crossing_every_m: int, origin=(0, 0), axes: str = "xy"):
    """Manhattan grid cut by straight barriers (freeways, rivers, rail lines).

    Barriers run midway between two street lines every ``barrier_every_m``,
    north-south only (``axes="x"``) or in both directions (``"xy"``). A
    street crosses a barrier only at offsets of
    ``crossing_every_m / 2 + k * crossing_every_m`` along it, so every
    barrier stretch gets its crossings away from the corners; other block
    sides spanning a barrier are removed. The detours this forces are what
    make Euclidean driver selection err. Raises ValueError if the result
    would not be connected.
    """
    for name, v in (("barrier", barrier_every_m), ("crossing", crossing_every_m)):
        if v <= 0 or v % spacing_m:
            raise ValueError(f"{name} spacing must be a positive multiple of the street spacing")
    if axes not in ("x", "xy"):
        raise ValueError("axes must be 'x' or 'xy'")
    ox, oy = int(origin[0]), int(origin[1])
    half = (crossing_every_m // 2) // spacing_m * spacing_m

    def is_crossing(along):
        return (along - half) % crossing_every_m == 0

    kept = []
    for seg in generate_manhattan_grid(spacing_m, rows, cols, origin):
        (ax, ay), (bx, by) = seg.a.xy, seg.b.xy
        if ay == by:  # horizontal block side: spans a north-south barrier?
            spans = (max(ax, bx) - ox) % barrier_every_m == 0
            along = ay - oy
        else:
            spans = axes == "xy" and (max(ay, by) - oy) % barrier_every_m == 0
            along = ax - ox
        if spans and not is_crossing(along):
            continue
        kept.append(seg)
    if not _connected(kept):
        raise ValueError("barrier layout leaves parts of the grid unreachable")
    return kept


def _connected(segments) -> bool:
    parent = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in segments:
        parent[find(s.a.xy)] = find(s.b.xy)
    return len({find(n) for n in list(parent)}) <= 1


# -- file formats ---------------------------------------------------------

CSV_HEADER = ["road_id", "x1", "y1", "x2", "y2"]


def write_csv(segments, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in segments:
            w.writerow([s.id, s.a[0], s.a[1], s.b[0], s.b[1]])


def _read_csv(path, utm_zone=0):
    segments = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise ParseError(f"{path}: line 1: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise ParseError(f"{path}: line {lineno}: expected 5 fields, got {len(row)}")
            try:
                x1, y1, x2, y2 = (int(c) for c in row[1:])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            try:
                segments.append(
                    RoadSegment(
                        row[0],
                        PlanarPoint(x1, y1, utm_zone),
                        PlanarPoint(x2, y2, utm_zone),
                    )
                )
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
    return segments


def _read_geojson(path, pin_zone=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a FeatureCollection")

    lines = []
    for n, feat in enumerate(doc.get("features", [])):
        geom = (feat or {}).get("geometry") or {}
        if geom.get("type") != "LineString":
            raise ParseError(f"{path}: feature {n}: expected LineString, got {geom.get('type')}")
        fid = str((feat.get("properties") or {}).get("id", n))
        try:
            pts = [GeoPoint(float(c[1]), float(c[0])) for c in geom["coordinates"]]
        except (KeyError, TypeError, ValueError, IndexError):
            raise ParseError(f"{path}: feature {n} ({fid}): malformed coordinates") from None
        if len(pts) < 2:
            raise ParseError(f"{path}: feature {n} ({fid}): fewer than two vertices")
        lines.append((fid, pts))

    all_pts = [p for _, pts in lines for p in pts]
    if not all_pts:
        raise ParseError(f"{path}: no features")
    zones = {zone_for(p) for p in all_pts}
    if pin_zone is None:
        if len(zones) > 1:
            raise MixedUtmZones(f"{path}: features span UTM zones {sorted(zones)}")
        zone = zones.pop()
    elif pin_zone == "centroid":
        zone = zone_for(
            GeoPoint(
                sum(p.latitude_deg for p in all_pts) / len(all_pts),
                sum(p.longitude_deg for p in all_pts) / len(all_pts),
            )
        )
    else:
        zone = int(pin_zone)

    segments = []
    for fid, pts in lines:
        planar = [project(p, zone) for p in pts]
        k = 0
        for a, b in zip(planar, planar[1:]):
            # vertices closer than a metre collapse after rounding
            if a.xy == b.xy:
                continue
            segments.append(RoadSegment(f"{fid}#{k}", a, b))
            k += 1
    return segments, zone


def ingest(path, format: str | None = None, pin_zone=None):
    """Read road segments from a planar CSV or a WGS84 GeoJSON file.

    GeoJSON is projected to UTM. Features falling in different UTM zones
    raise MixedUtmZones unless ``pin_zone`` is given ("centroid" or a signed
    zone number). Returns the list of segments.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format is None:
        format = "geojson" if path.suffix.lower() in (".geojson", ".json") else "csv"
    if format == "csv":
        return _read_csv(path)
    if format == "geojson":
        return _read_geojson(path, pin_zone)[0]
    raise ValueError(f"unknown road file format {format!r}")


def load_network(path, format=None, cell_size=DEFAULT_CELL_SIZE, pin_zone=None) -> RoadNetwork:
    path = Path(path)
    if format is None:
        format = "geojson" if path.suffix.lower() in (".geojson", ".json") else "csv"
    if format == "geojson":
        segments, zone = _read_geojson(path, pin_zone)
        return RoadNetwork(segments, cell_size=cell_size, utm_zone=zone)
    return RoadNetwork(ingest(path, format), cell_size=cell_size)
