"""Flat metrics with cone singularities given by edge lengths of a triangulation.

A triangle lists three vertex ids (counter-clockwise); side ``k`` runs from
corner ``k`` to corner ``k+1`` and carries an edge id.  Every edge id is used by
exactly two sides, glued with opposite orientation.  Optional ``corner_words``
record, per corner, the group element placing that corner's marked point in a
common frame for the triangle (used by the realization solver).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CorridorEscape, FlipLimitExceeded, InvalidMetric, TriangleInequalityViolated
from .surface_group import inverse_word, word_mul

TWO_PI = 2.0 * np.pi


def _corner_angle(a, b, c):
    """Angle between sides a and b, opposite side c."""
    x = (a * a + b * b - c * c) / (2.0 * a * b)
    return np.arccos(np.clip(x, -1.0, 1.0))


@dataclass(eq=False)
class FlatConeMetric:
    genus: int
    labels: tuple
    triangles: np.ndarray
    tri_edges: np.ndarray
    lengths: np.ndarray
    corner_words: list | None = None

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.triangles = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        self.tri_edges = np.asarray(self.tri_edges, dtype=int).reshape(-1, 3)
        self.lengths = np.asarray(self.lengths, dtype=float).copy()
        if self.corner_words is not None:
            self.corner_words = [tuple(tuple(w) for w in ws) for ws in self.corner_words]

    # ------------------------------------------------------------ structure
    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def copy(self) -> "FlatConeMetric":
        return FlatConeMetric(self.genus, self.labels, self.triangles.copy(), self.tri_edges.copy(),
                              self.lengths.copy(),
                              None if self.corner_words is None else list(self.corner_words))

    def with_lengths(self, lengths) -> "FlatConeMetric":
        m = self.copy()
        m.lengths = np.asarray(lengths, dtype=float).copy()
        return m

    def sides_of_edge(self):
        """edge id -> [(t, k), (t', k')]."""
        out = [[] for _ in range(self.n_edges)]
        for t in range(self.n_triangles):
            for k in range(3):
                out[self.tri_edges[t, k]].append((t, k))
        return out

    def side_lengths(self) -> np.ndarray:
        return self.lengths[self.tri_edges]

    def corner_angles(self) -> np.ndarray:
        """(T, 3) angles; corner k lies between side k and side k-1."""
        L = self.side_lengths()
        a, b, c = L[:, 0], L[:, 1], L[:, 2]
        # corner 0: sides 0 (a) and 2 (c), opposite b; corner 1: a, b opp c; corner 2: b, c opp a
        return np.column_stack([_corner_angle(a, c, b), _corner_angle(a, b, c), _corner_angle(b, c, a)])

    def triangle_slack(self) -> np.ndarray:
        L = self.side_lengths()
        per = L.sum(axis=1)
        return (per - 2.0 * L.max(axis=1)) / per

    def validate(self, slack: float = 1e-12, check_topology: bool = True) -> "FlatConeMetric":
        if np.any(~np.isfinite(self.lengths)) or np.any(self.lengths <= 0):
            raise InvalidMetric("edge lengths must be positive")
        s = self.triangle_slack()
        if np.any(s < slack):
            t = int(np.argmin(s))
            raise TriangleInequalityViolated("triangle inequality violated", triangle=t,
                                             slack=float(s[t]))
        if check_topology:
            self._check_topology()
        return self

    def _check_topology(self):
        sides = self.sides_of_edge()
        if any(len(s) != 2 for s in sides):
            raise InvalidMetric("every edge must be shared by exactly two sides")
        for (t1, k1), (t2, k2) in sides:
            a, b = self.triangles[t1, k1], self.triangles[t1, (k1 + 1) % 3]
            c, d = self.triangles[t2, k2], self.triangles[t2, (k2 + 1) % 3]
            if (a, b) != (d, c):
                raise InvalidMetric("glued sides have inconsistent endpoint labels")
        classes = self.vertex_classes()
        if len(classes) != self.n_vertices:
            raise InvalidMetric("vertex classes do not match labels",
                                classes=len(classes), labels=self.n_vertices)
        chi = self.n_vertices - self.n_edges + self.n_triangles
        if chi != 2 - 2 * self.genus:
            raise InvalidMetric("Euler characteristic mismatch", chi=chi)

    def vertex_classes(self):
        """Corners grouped by the gluing; each group must carry one label."""
        parent = list(range(3 * self.n_triangles))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for (t1, k1), (t2, k2) in self.sides_of_edge():
            for x, y in ((3 * t1 + k1, 3 * t2 + (k2 + 1) % 3), (3 * t1 + (k1 + 1) % 3, 3 * t2 + k2)):
                parent[find(x)] = find(y)
        groups: dict = {}
        for c in range(3 * self.n_triangles):
            groups.setdefault(find(c), []).append(c)
        labels_of = {}
        for root, cs in groups.items():
            labs = {int(self.triangles[c // 3, c % 3]) for c in cs}
            if len(labs) != 1:
                raise InvalidMetric("a vertex class carries several labels")
            labels_of[labs.pop()] = cs
        return labels_of

    # ------------------------------------------------------------ geometry
    def area(self) -> float:
        L = self.side_lengths()
        s = L.sum(axis=1) / 2
        return float(np.sum(np.sqrt(np.maximum(s * (s - L[:, 0]) * (s - L[:, 1]) * (s - L[:, 2]), 0))))

    def to_dict(self) -> dict:
        d = {"genus": self.genus,
             "vertices": list(self.labels),
             "triangles": [[self.labels[v] for v in tri] for tri in self.triangles],
             "triangle_edges": [[f"e{e}" for e in te] for te in self.tri_edges],
             "edge_sq_lengths": {f"e{e}": float(self.lengths[e] ** 2) for e in range(self.n_edges)}}
        if self.corner_words is not None:
            d["corner_words"] = [[list(w) for w in ws] for ws in self.corner_words]
        return d

    @classmethod
    def from_dict(cls, d: dict, validate: bool = True) -> "FlatConeMetric":
        labels = [str(x) for x in d["vertices"]]
        idx = {lab: i for i, lab in enumerate(labels)}
        tris = np.array([[idx[str(x)] for x in tri] for tri in d["triangles"]], dtype=int)
        sq = d["edge_sq_lengths"]
        if any(float(v) <= 0 for v in sq.values()):
            raise InvalidMetric("squared lengths must be positive")
        if "triangle_edges" in d:
            names = sorted(sq, key=_edge_sort_key)
            eidx = {n: i for i, n in enumerate(names)}
            te = np.array([[eidx[str(e)] for e in row] for row in d["triangle_edges"]], dtype=int)
            lengths = np.sqrt(np.array([float(sq[n]) for n in names]))
        else:
            te, lengths = _infer_gluing(tris, sq, labels)
        words = d.get("corner_words")
        m = cls(int(d["genus"]), labels, tris, te, lengths,
                None if words is None else [[tuple(w) for w in ws] for ws in words])
        return m.validate() if validate else m


def _edge_sort_key(name):
    s = str(name)
    return (0, int(s[1:])) if s[:1] == "e" and s[1:].isdigit() else (1, s)


def _infer_gluing(tris, sq, labels):
    """Glue sides by endpoint labels when that is unambiguous; edge keys are 'a-b'."""
    by_pair: dict = {}
    for t, tri in enumerate(tris):
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            by_pair.setdefault(frozenset((a, b)), []).append((t, k))
    te = np.zeros_like(tris)
    lengths = []
    for e, (pair, sides) in enumerate(sorted(by_pair.items(), key=lambda kv: sorted(kv[0]))):
        if len(sides) != 2:
            raise InvalidMetric("gluing is ambiguous without triangle_edges")
        ends = sorted(pair)
        a, b = labels[ends[0]], labels[ends[-1]]
        key = f"{a}-{b}" if f"{a}-{b}" in sq else f"{b}-{a}"
        if key not in sq:
            raise InvalidMetric("missing squared length", edge=key)
        for t, k in sides:
            te[t, k] = e
        lengths.append(np.sqrt(float(sq[key])))
    return te, np.array(lengths)


# ---------------------------------------------------------------- cone data

def cone_data(m: FlatConeMetric) -> dict:
    """label -> (cone angle, curvature 2*pi - angle)."""
    ang = m.corner_angles()
    theta = np.zeros(m.n_vertices)
    np.add.at(theta, m.triangles.ravel(), ang.ravel())
    return {m.labels[v]: (float(theta[v]), float(TWO_PI - theta[v])) for v in range(m.n_vertices)}


def cone_angles(m: FlatConeMetric) -> np.ndarray:
    ang = m.corner_angles()
    theta = np.zeros(m.n_vertices)
    np.add.at(theta, m.triangles.ravel(), ang.ravel())
    return theta


# ---------------------------------------------------------------- flips

def _place_apex(p, q, lp, lq):
    """Point at distance lp from p and lq from q, to the left of p->q."""
    d = q - p
    L = np.hypot(*d)
    x = (lp * lp - lq * lq + L * L) / (2 * L)
    y = np.sqrt(max(lp * lp - x * x, 0.0))
    u = d / L
    return p + x * u + y * np.array([-u[1], u[0]])


def opposite_angle_sum(m: FlatConeMetric, e: int, sides=None, ang=None) -> float:
    sides = sides or m.sides_of_edge()
    ang = m.corner_angles() if ang is None else ang
    (t1, k1), (t2, k2) = sides[e]
    return float(ang[t1, (k1 + 2) % 3] + ang[t2, (k2 + 2) % 3])


def flip(m: FlatConeMetric, e: int, inplace: bool = False) -> FlatConeMetric:
    """Intrinsic flip of edge ``e``; the new diagonal length comes from unfolding."""
    if not inplace:
        m = m.copy()
    sides = [(t, k) for t in range(m.n_triangles) for k in range(3) if m.tri_edges[t, k] == e]
    (t1, k1), (t2, k2) = sides
    if t1 == t2:
        raise InvalidMetric("cannot flip an edge glued to its own triangle", edge=e)
    r1 = [(k1 + i) % 3 for i in range(3)]
    r2 = [(k2 + i) % 3 for i in range(3)]
    a, b, c = m.triangles[t1, r1]
    b2, a2, d = m.triangles[t2, r2]
    e_ab, e_bc, e_ca = m.tri_edges[t1, r1]
    _, e_ad, e_db = m.tri_edges[t2, r2]
    lab, lbc, lca = m.lengths[[e_ab, e_bc, e_ca]]
    lad, ldb = m.lengths[[e_ad, e_db]]
    P, Q = np.zeros(2), np.array([lab, 0.0])
    C = _place_apex(P, Q, lca, lbc)
    D = _place_apex(Q, P, ldb, lad)
    # the new diagonal must cross the old one for the quad to be convex
    if not (_orient(C, D, P) * _orient(C, D, Q) < 0):
        raise InvalidMetric("flip of a non-convex quadrilateral", edge=e)
    m.lengths[e] = float(np.hypot(*(C - D)))
    m.triangles[t1] = [a, d, c]
    m.tri_edges[t1] = [e_ad, e, e_ca]
    m.triangles[t2] = [d, b, c]
    m.tri_edges[t2] = [e_db, e_bc, e]
    if m.corner_words is not None:
        wa, wb, wc = (m.corner_words[t1][i] for i in r1)
        _, wa2, wd = (m.corner_words[t2][i] for i in r2)
        h = word_mul(wa, inverse_word(wa2))
        wd1 = word_mul(h, wd)
        words = list(m.corner_words)
        words[t1] = (wa, wd1, wc)
        words[t2] = (wd1, wb, wc)
        m.corner_words = words
    return m


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


@dataclass(eq=False)
class DelaunayForm:
    metric: FlatConeMetric
    flips: int

    @property
    def canonical_lengths(self) -> np.ndarray:
        return np.sort(self.metric.lengths)


def delaunay(m: FlatConeMetric, eps: float = 1e-12, max_flips: int = 10 ** 6) -> DelaunayForm:
    """Flip locally non-Delaunay edges until opposite angles sum to at most pi + eps."""
    m = m.copy()
    sides = m.sides_of_edge()
    queue = deque(range(m.n_edges))
    queued = set(queue)
    flips = 0
    while queue:
        e = queue.popleft()
        queued.discard(e)
        (t1, k1), (t2, k2) = sides[e]
        if t1 == t2:
            continue
        ang1 = _tri_angles(m, t1)
        ang2 = _tri_angles(m, t2)
        if ang1[(k1 + 2) % 3] + ang2[(k2 + 2) % 3] <= np.pi + eps:
            continue
        if flips >= max_flips:
            raise FlipLimitExceeded("flip limit reached", flips=flips)
        flip(m, e, inplace=True)
        flips += 1
        for t in (t1, t2):
            for k in range(3):
                f = int(m.tri_edges[t, k])
                if f not in queued and f != e:
                    queue.append(f)
                    queued.add(f)
            for k in range(3):
                f = int(m.tri_edges[t, k])
                sides[f] = [(tt, kk) for tt in (t1, t2) for kk in range(3) if m.tri_edges[tt, kk] == f] \
                    + [s for s in sides[f] if s[0] not in (t1, t2)]
    return DelaunayForm(m, flips)


def _tri_angles(m, t):
    a, b, c = m.lengths[m.tri_edges[t]]
    return (_corner_angle(a, c, b), _corner_angle(a, b, c), _corner_angle(b, c, a))


def is_delaunay(m: FlatConeMetric, eps: float = 1e-10) -> bool:
    sides = m.sides_of_edge()
    ang = m.corner_angles()
    return all(opposite_angle_sum(m, e, sides, ang) <= np.pi + eps
               for e in range(m.n_edges) if sides[e][0][0] != sides[e][1][0])


# ---------------------------------------------------------------- compare

@dataclass
class _Cells:
    """Polygonal cells after merging Delaunay-tie edges; half-edges are (cell, side)."""
    origin: list       # cell -> list of vertex labels
    coords: list       # cell -> (m, 2) developed vertex positions
    twin: dict         # (cell, side) -> (cell, side)
    length: dict       # (cell, side) -> length


def _develop_cells(m: FlatConeMetric, tie: float) -> _Cells:
    sides = m.sides_of_edge()
    ang = m.corner_angles()
    T = m.n_triangles
    parent = list(range(T))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    merged = set()
    for e in range(m.n_edges):
        (t1, k1), (t2, k2) = sides[e]
        if t1 == t2:
            continue
        if abs(ang[t1, (k1 + 2) % 3] + ang[t2, (k2 + 2) % 3] - np.pi) < tie:
            r1, r2 = find(t1), find(t2)
            if r1 != r2:  # keep each cell a disk
                parent[r1] = r2
                merged.add(e)
    # develop each cell: walk its boundary, laying out triangles across merged edges
    side_twin = {}
    for (t1, k1), (t2, k2) in sides:
        side_twin[(t1, k1)] = (t2, k2)
        side_twin[(t2, k2)] = (t1, k1)
    pos = {}
    cells = {}
    for t0 in range(T):
        r = find(t0)
        if r in cells:
            continue
        cells[r] = t0
        a, b, c = m.lengths[m.tri_edges[t0]]
        P0, P1 = np.zeros(2), np.array([a, 0.0])
        pos[t0] = [P0, P1, _place_apex(P0, P1, c, b)]
        stack = [t0]
        while stack:
            t = stack.pop()
            for k in range(3):
                if m.tri_edges[t, k] not in merged:
                    continue
                u, kk = side_twin[(t, k)]
                if u in pos:
                    continue
                # side kk of u runs from pos[t][k+1] to pos[t][k]
                p, q = pos[t][(k + 1) % 3], pos[t][k]
                L = m.lengths[m.tri_edges[u]]
                apex = _place_apex(p, q, L[(kk + 2) % 3], L[(kk + 1) % 3])
                pp = [None] * 3
                pp[kk], pp[(kk + 1) % 3], pp[(kk + 2) % 3] = p, q, apex
                pos[u] = pp
                stack.append(u)
    # boundary cycles of each cell
    origin, coords, length = [], [], {}
    cell_of_side = {}
    for r, t0 in cells.items():
        members = [t for t in range(T) if find(t) == r]
        boundary = [(t, k) for t in members for k in range(3) if m.tri_edges[t, k] not in merged]
        nxt = {}
        for (t, k) in boundary:
            # next boundary side after (t, k): rotate around corner k+1 through merged edges
            tt, kk = t, (k + 1) % 3
            while m.tri_edges[tt, kk] in merged:
                tt, kk = side_twin[(tt, kk)]
                kk = (kk + 1) % 3
            nxt[(t, k)] = (tt, kk)
        start = min(boundary)
        cyc = [start]
        while nxt[cyc[-1]] != start:
            cyc.append(nxt[cyc[-1]])
        ci = len(origin)
        origin.append([int(m.triangles[t, k]) for t, k in cyc])
        coords.append(np.array([pos[t][k] for t, k in cyc]))
        for j, s in enumerate(cyc):
            cell_of_side[s] = (ci, j)
            length[(ci, j)] = float(m.lengths[m.tri_edges[s]])
    twin = {cell_of_side[s]: cell_of_side[side_twin[s]] for s in cell_of_side}
    return _Cells(origin, coords, twin, length)


def _aligned(coords, start):
    """Cell vertices re-indexed from ``start`` and moved so side 0 is on the positive x axis."""
    c = np.roll(coords, -start, axis=0)
    c = c - c[0]
    d = c[1]
    ang = np.arctan2(d[1], d[0])
    R = np.array([[np.cos(-ang), -np.sin(-ang)], [np.sin(-ang), np.cos(-ang)]])
    return c @ R.T


def compare(m1: FlatConeMetric, m2: FlatConeMetric, tol: float = 1e-7, tie: float | None = None):
    """Label-preserving isometry test of the Delaunay forms; returns (ok, report)."""
    if m1.genus != m2.genus or sorted(m1.labels) != sorted(m2.labels):
        return False, {"obstruction": "genus or label set differ"}
    tie = max(1e-8, 1e3 * tol) if tie is None else tie
    d1, d2 = delaunay(m1).metric, delaunay(m2).metric
    c1, c2 = _develop_cells(d1, tie), _develop_cells(d2, tie)
    lab2 = {lab: i for i, lab in enumerate(m2.labels)}
    lmap = [lab2[lab] for lab in m1.labels]
    if len(c1.origin) != len(c2.origin) or len(c1.twin) != len(c2.twin):
        return False, {"obstruction": "cell counts differ",
                       "cells": [len(c1.origin), len(c2.origin)]}
    scale = max(1.0, float(d1.lengths.max()))
    first = 0
    best = {"obstruction": "no admissible image for the first half-edge"}
    for cand_cell in range(len(c2.origin)):
        for cand_side in range(len(c2.origin[cand_cell])):
            ok, info = _try_match(c1, c2, lmap, (first, 0), (cand_cell, cand_side), tol * scale)
            if ok:
                return True, {"matching": info, "cells": len(c1.origin)}
            if info.get("depth", 0) >= best.get("depth", -1):
                best = info
    return False, best


def _try_match(c1, c2, lmap, h1, h2, tol):
    cellmap = {}
    queue = deque([(h1, h2)])
    depth = 0
    while queue:
        (a, sa), (b, sb) = queue.popleft()
        if a in cellmap:
            if cellmap[a] != (b, (sb - sa) % len(c2.origin[b])):
                return False, {"obstruction": "inconsistent cell matching", "depth": depth}
            continue
        n = len(c1.origin[a])
        if len(c2.origin[b]) != n:
            return False, {"obstruction": "cell sizes differ", "depth": depth}
        shift = (sb - sa) % n
        for j in range(n):
            if lmap[c1.origin[a][j]] != c2.origin[b][(j + shift) % n]:
                return False, {"obstruction": "vertex labels differ", "depth": depth}
        x1 = _aligned(c1.coords[a], 0)
        x2 = _aligned(c2.coords[b], shift)
        err = float(np.abs(x1 - x2).max())
        if err > tol:
            return False, {"obstruction": "cell shapes differ", "error": err, "depth": depth}
        cellmap[a] = (b, shift)
        depth += 1
        for j in range(n):
            ta, tsa = c1.twin[(a, j)]
            tb, tsb = c2.twin[(b, (j + shift) % n)]
            queue.append(((ta, tsa), (tb, tsb)))
    return True, {int(k): [int(v[0]), int(v[1])] for k, v in cellmap.items()}


# ---------------------------------------------------------------- geodesics

@dataclass(frozen=True)
class Corridor:
    triangles: tuple
    source: int  # corner index in the first triangle
    target: int  # corner index in the last triangle
    edges: tuple | None = None  # crossed edge ids, needed when two triangles share several edges


def _develop_corridor(m: FlatConeMetric, cor: Corridor):
    tris = list(cor.triangles)
    t0 = tris[0]
    a, b, c = m.lengths[m.tri_edges[t0]]
    P0, P1 = np.zeros(2), np.array([a, 0.0])
    pos = [[P0, P1, _place_apex(P0, P1, c, b)]]
    portals = []
    sides = m.sides_of_edge()
    for i in range(1, len(tris)):
        t, u = tris[i - 1], tris[i]
        shared = None
        for k in range(3):
            if cor.edges is not None and m.tri_edges[t, k] != cor.edges[i - 1]:
                continue
            if len(sides[m.tri_edges[t, k]]) != 2:
                continue
            (x1, y1), (x2, y2) = sides[m.tri_edges[t, k]]
            other = (x2, y2) if (x1, y1) == (t, k) else (x1, y1)
            if other[0] == u:
                shared = (k, other[1])
                break
        if shared is None:
            raise InvalidMetric("corridor triangles are not adjacent", index=i)
        k, kk = shared
        p, q = pos[-1][(k + 1) % 3], pos[-1][k]
        L = m.lengths[m.tri_edges[u]]
        apex = _place_apex(p, q, L[(kk + 2) % 3], L[(kk + 1) % 3])
        pp = [None] * 3
        pp[kk], pp[(kk + 1) % 3], pp[(kk + 2) % 3] = p, q, apex
        pos.append(pp)
        # walking out of t across side k, corner k+1 is on the left
        portals.append(((t, (k + 1) % 3), (t, k), pos[-2][(k + 1) % 3], pos[-2][k]))
    return pos, portals


def geodesic_length(m: FlatConeMetric, cor: Corridor, check_escape: bool = True) -> float:
    """Shortest path through the unfolded corridor (funnel algorithm)."""
    pos, portals = _develop_corridor(m, cor)
    src = (pos[0][cor.source], None)
    dst = (pos[-1][cor.target], None)
    # (left, right) as seen walking forward, each a (point, corner) pair
    gates = [(src, src)] + [((p[2], p[0]), (p[3], p[1])) for p in portals] + [(dst, dst)]
    path = [src]
    apex_i = left_i = right_i = 0
    apex, left, right = src[0], src[0], src[0]
    i = 1
    while i < len(gates):
        L, R = gates[i][0][0], gates[i][1][0]
        if _orient(apex, right, R) >= 0:
            if np.array_equal(apex, right) or _orient(apex, left, R) < 0:
                right, right_i = R, i
            else:
                path.append(gates[left_i][0])
                apex = left
                apex_i = right_i = left_i
                right = apex
                i = apex_i + 1
                continue
        if _orient(apex, left, L) <= 0:
            if np.array_equal(apex, left) or _orient(apex, right, L) > 0:
                left, left_i = L, i
            else:
                path.append(gates[right_i][1])
                apex = right
                apex_i = left_i = right_i
                left = apex
                i = apex_i + 1
                continue
        i += 1
    path.append(dst)
    pts = [p for p, _ in path]
    if check_escape:
        _check_bends(m, cor, pts, [c for _, c in path])
    return float(sum(np.hypot(*(pts[j + 1] - pts[j])) for j in range(len(pts) - 1)))


def _scale(a, b):
    return max(1.0, float(np.abs(a).max()), float(np.abs(b).max())) ** 2


def _check_bends(m, cor, pts, corners):
    theta = cone_angles(m)
    for j in range(1, len(pts) - 1):
        if corners[j] is None:
            continue
        t, k = corners[j]
        v = m.triangles[t, k]
        u1, u2 = pts[j - 1] - pts[j], pts[j + 1] - pts[j]
        inner = np.arccos(np.clip(np.dot(u1, u2) / (np.hypot(*u1) * np.hypot(*u2)), -1, 1))
        corridor_side = TWO_PI - inner
        if theta[v] - corridor_side < np.pi - 1e-12:
            raise CorridorEscape("geodesic leaves the corridor at a bend", vertex=m.labels[v])


# ---------------------------------------------------------------- utilities

def interpolate_sq(m1: FlatConeMetric, m2: FlatConeMetric, t: float) -> FlatConeMetric:
    """Metric with squared lengths (1-t) L1^2 + t L2^2 on a common triangulation."""
    if not (np.array_equal(m1.tri_edges, m2.tri_edges) and np.array_equal(m1.triangles, m2.triangles)):
        raise InvalidMetric("interpolation needs a common triangulation")
    sq = (1 - t) * m1.lengths ** 2 + t * m2.lengths ** 2
    return m1.with_lengths(np.sqrt(sq)).validate(check_topology=False)


def scaled(m: FlatConeMetric, s: float) -> FlatConeMetric:
    return m.with_lengths(m.lengths * s)


def refan(m: FlatConeMetric, rng) -> FlatConeMetric:
    """Apply a few random legal flips (changes the triangulation, not the metric)."""
    m = m.copy()
    for _ in range(3 * m.n_edges):
        e = int(rng.integers(m.n_edges))
        try:
            flip(m, e, inplace=True)
        except InvalidMetric:
            continue
    return m
