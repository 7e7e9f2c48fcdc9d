"""Generate the imported-geometry test fixtures.

Writes segment-list JSON files used by the integration tests:

    crates/core/tests/fixtures/voronoi.json   Voronoi cells of 40 seeded points, cropped to 10x10 mm
    crates/core/tests/fixtures/penrose.json   Penrose rhomb tiling (5 deflations of a sun), ~10 mm across

Coordinates are rounded to 1e-5 mm so emitted G-code reproduces them exactly.

Usage: python3 scripts/make_fixtures.py
"""

import cmath
import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial import Voronoi
from shapely.geometry import LineString, box

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"
GOLDEN = (1 + math.sqrt(5)) / 2


def q(x):
    return round(float(x), 5)


def write(name, label, segments):
    points, index, pairs = [], {}, set()
    for a, b in segments:
        ids = []
        for p in (a, b):
            key = (q(p[0]), q(p[1]))
            if key not in index:
                index[key] = len(points)
                points.append([key[0], key[1], 0.0])
            ids.append(index[key])
        if ids[0] != ids[1]:
            pairs.add((min(ids), max(ids)))
    doc = {
        "label": label,
        "points": points,
        "segments": [list(p) for p in sorted(pairs)],
        "units": "mm",
        "z": 0.0,
    }
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{name}: {len(points)} points, {len(pairs)} segments")


def voronoi():
    rng = np.random.default_rng(7)
    seeds = rng.uniform(0.0, 10.0, size=(40, 2))
    # mirror the seeds so every cell touching the box is finite
    mirrored = [seeds]
    for axis in (0, 1):
        for edge in (0.0, 10.0):
            m = seeds.copy()
            m[:, axis] = 2 * edge - m[:, axis]
            mirrored.append(m)
    vor = Voronoi(np.vstack(mirrored))
    frame = box(0.0, 0.0, 10.0, 10.0)
    segments = []
    for a, b in vor.ridge_vertices:
        if a < 0 or b < 0:
            continue
        piece = LineString([vor.vertices[a], vor.vertices[b]]).intersection(frame)
        if piece.is_empty or piece.geom_type != "LineString" or piece.length < 1e-4:
            continue
        (x0, y0), (x1, y1) = piece.coords[0], piece.coords[-1]
        segments.append(((x0, y0), (x1, y1)))
    write("voronoi.json", "voronoi", segments)


def penrose():
    # Robinson triangles: (kind, apex, left, right); kind 0 = thin, 1 = thick
    triangles = []
    for i in range(10):
        b = cmath.rect(1, (2 * i - 1) * math.pi / 10)
        c = cmath.rect(1, (2 * i + 1) * math.pi / 10)
        if i % 2 == 0:
            b, c = c, b
        triangles.append((0, 0j, b, c))
    for _ in range(5):
        nxt = []
        for kind, a, b, c in triangles:
            if kind == 0:
                p = a + (b - a) / GOLDEN
                nxt += [(0, c, p, b), (1, p, c, a)]
            else:
                qq = b + (a - b) / GOLDEN
                r = b + (c - b) / GOLDEN
                nxt += [(1, r, c, a), (1, qq, r, b), (0, r, qq, a)]
        triangles = nxt
    scale, shift = 5.0, complex(5.0, 5.0)
    segments = []
    for _, a, b, c in triangles:
        # rhomb edges are the two legs from the apex's opposite corners
        for u, v in ((a, b), (c, a)):
            u, v = u * scale + shift, v * scale + shift
            segments.append(((u.real, u.imag), (v.real, v.imag)))
    write("penrose.json", "penrose", segments)


if __name__ == "__main__":
    voronoi()
    penrose()
