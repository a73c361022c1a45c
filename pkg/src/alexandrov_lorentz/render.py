"""SVG pictures: cellulations in the Klein disk, dual polygons laid out flat."""

from __future__ import annotations

import colorsys

import numpy as np

from .cellulation import WeightedCellulation, dual_polygons
from .minkowski import klein

HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _colour(i, n):
    r, g, b = colorsys.hsv_to_rgb((i / max(n, 1)) % 1.0, 0.75, 0.8)
    return f"#{int(255 * r):02x}{int(255 * g):02x}{int(255 * b):02x}"


def _svg(body, size, view):
    return (HEADER + f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
            f'height="{size}" viewBox="{view}">\n' + "".join(body) + "</svg>\n")


def cellulation_svg(cell: WeightedCellulation, size: int = 600, copies: int = 1) -> str:
    """Edges are straight chords in the Klein disk; colour per quotient edge.

    copies > 0 also draws the translates by each generator and its inverse.
    """
    hol = cell.hol
    letters = [()] + ([(k,) for k in range(1, 2 * hol.genus + 1)] + [(-k,) for k in range(1, 2 * hol.genus + 1)]
                      if copies else [])
    body = ['<circle cx="0" cy="0" r="1" fill="none" stroke="#444" stroke-width="0.004"/>\n']
    nE = len(cell.edges)
    for g in letters:
        G = hol.mat(g)
        for ei, e in enumerate(cell.edges):
            a = klein(G @ cell.points[e.a])
            b = klein(G @ hol.mat(e.word) @ cell.points[e.b])
            w = 0.002 + 0.004 * min(1.0, e.weight / max(x.weight for x in cell.edges))
            op = "1" if g == () else "0.35"
            body.append(f'<line x1="{a[0]:.6f}" y1="{-a[1]:.6f}" x2="{b[0]:.6f}" y2="{-b[1]:.6f}" '
                        f'stroke="{_colour(ei, nE)}" stroke-width="{w:.4f}" opacity="{op}"/>\n')
    for v, p in enumerate(cell.points):
        k = klein(p)
        body.append(f'<circle cx="{k[0]:.6f}" cy="{-k[1]:.6f}" r="0.008" fill="#000">'
                    f'<title>{cell.vertex_labels[v]}</title></circle>\n')
    return _svg(body, size, "-1.05 -1.05 2.1 2.1")


def polygons_svg(cell: WeightedCellulation, size: int = 600) -> str:
    """Dual polygons side by side; glued sides share a colour."""
    polys = dual_polygons(cell)
    nE = len(cell.edges)
    body = []
    x0 = 0.0
    boxes = []
    for v, P in enumerate(polys):
        P = P - P.min(axis=0)
        P[:, 0] += x0
        boxes.append(P)
        x0 = P[:, 0].max() + 0.2 * max(1.0, np.ptp(P[:, 1]))
    allp = np.vstack(boxes)
    span = max(np.ptp(allp[:, 0]), np.ptp(allp[:, 1]), 1e-9)
    sw = 0.006 * span
    for v, P in enumerate(boxes):
        m = len(P)
        for s in range(m):
            ei = cell.rotation[v][s][0]
            a, b = P[s], P[(s + 1) % m]
            body.append(f'<line x1="{a[0]:.6f}" y1="{-a[1]:.6f}" x2="{b[0]:.6f}" y2="{-b[1]:.6f}" '
                        f'stroke="{_colour(ei, nE)}" stroke-width="{sw:.5f}"/>\n')
    lo = allp.min(axis=0)
    view = f"{lo[0] - 0.05 * span:.6f} {-allp[:, 1].max() - 0.05 * span:.6f} {1.1 * span:.6f} {1.1 * span:.6f}"
    return _svg(body, size, view)
