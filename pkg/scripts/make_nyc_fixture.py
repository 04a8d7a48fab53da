#!/usr/bin/env python3
"""Regenerate the Upper West Side road extract used by the test suite.

The source is the OSMnx graph bundled with the ``momepy`` wheel
(``momepy/datasets/nyc_graph.graphml``, OpenStreetMap data, ODbL). Edge
geometries there are stored in UTM zone 18N; we convert them to WGS84 with
the third-party ``utm`` package so our own projection can be checked
against the original planar coordinates.

Usage:
    python scripts/make_nyc_fixture.py path/to/nyc_graph.graphml tests/data
"""
import csv
import json
import sys
from pathlib import Path

import networkx as nx
import utm


def main(graphml, outdir):
    g = nx.read_graphml(graphml)
    outdir = Path(outdir)
    seen = set()
    features = []
    rows = []
    for u, v, data in g.edges(data=True):
        key = tuple(sorted((u, v))) + (data["geometry"],)
        if key in seen or (v, u, data["geometry"]) in seen:
            continue
        seen.add(key)
        coords = [
            tuple(map(float, pair.split()))
            for pair in data["geometry"][len("LINESTRING ("):-1].split(", ")
        ]
        fid = f"{u}-{v}"
        lonlat = []
        for x, y in coords:
            lat, lon = utm.to_latlon(x, y, 18, northern=True)
            lonlat.append([round(lon, 9), round(lat, 9)])
        features.append(
            {
                "type": "Feature",
                "properties": {"id": fid, "name": data.get("name", "")},
                "geometry": {"type": "LineString", "coordinates": lonlat},
            }
        )
        for i, ((x1, y1), (x2, y2)) in enumerate(zip(coords, coords[1:])):
            rows.append((f"{fid}#{i}", x1, y1, x2, y2))

    with open(outdir / "nyc_uws.geojson", "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh, indent=1)
    with open(outdir / "nyc_uws_utm_reference.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["road_id", "x1", "y1", "x2", "y2"])
        w.writerows(rows)
    print(f"{len(features)} features, {len(rows)} segments")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
