"""Weighted geodesic cellulations of the hyperbolic surface and their dual flat metrics.

The Gauss image of a polyhedral Cauchy surface has one vertex per face (the
future unit normal), one edge per hull edge (hyperbolic length = dihedral
angle, weight = Minkowski length) and one face per hull vertex.  Dualizing
replaces every vertex by the flat polygon whose sides are the weighted edge
directions turned by a right angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL
from .errors import BalanceViolation, NonClosingPolygon, NonConvexPolygon
from .minkowski import mcross, mdot, tangent_frame, unit_tangent
from .surface_group import Holonomy, inverse_word, word_mul


@dataclass(frozen=True)
class CEdge:
    a: int
    b: int
    word: tuple       # far end of the edge is rho(word) . vertex b
    weight: float
    length: float


@dataclass(eq=False)
class WeightedCellulation:
    hol: Holonomy
    points: np.ndarray                 # (V, 3) vertex positions on the hyperboloid
    edges: list                        # CEdge
    rotation: list                     # per vertex: [(edge, end)] counter-clockwise; end 0 at a, 1 at b
    U: list                            # per vertex: (deg, 3) unit tangents in rotation order
    face_labels: dict = field(default_factory=dict)   # face index -> label
    vertex_labels: list | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.vertex_labels is None:
            self.vertex_labels = [f"f{i}" for i in range(len(self.points))]
        self._faces = None

    @property
    def genus(self):
        return self.hol.genus

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    def with_weights(self, w) -> "WeightedCellulation":
        w = np.asarray(w, dtype=float)
        edges = [CEdge(e.a, e.b, e.word, float(x), e.length) for e, x in zip(self.edges, w)]
        return WeightedCellulation(self.hol, self.points, edges, self.rotation, self.U,
                                   dict(self.face_labels), list(self.vertex_labels))

    def half_edge_word(self, v, slot):
        """Word g with the far end of half-edge (v, slot) at rho(g) . other endpoint."""
        ei, end = self.rotation[v][slot]
        e = self.edges[ei]
        return (e.b, e.word) if end == 0 else (e.a, inverse_word(e.word))

    def twin_slot(self, v, slot):
        ei, end = self.rotation[v][slot]
        e = self.edges[ei]
        w = e.b if end == 0 else e.a
        for s, (ej, en) in enumerate(self.rotation[w]):
            if ej == ei and en == 1 - end:
                return w, s
        raise ValueError("rotation system is inconsistent")

    def corner_angles(self, v) -> np.ndarray:
        """Angle from U[slot-1] to U[slot], counter-clockwise, for every slot at v."""
        f1, f2 = tangent_frame(self.points[v])
        U = self.U[v]
        ang = np.arctan2(mdot(U, f2), mdot(U, f1))
        return np.mod(ang - np.roll(ang, 1), 2 * np.pi)

    def faces(self):
        """Face cycles as lists of corners (v, slot): corner (v, s) lies between slots s-1 and s."""
        if self._faces is not None:
            return self._faces
        seen = set()
        faces = []
        for v in range(len(self.points)):
            for s in range(len(self.rotation[v])):
                if (v, s) in seen:
                    continue
                cyc = []
                c = (v, s)
                while c not in seen:
                    seen.add(c)
                    cyc.append(c)
                    # cross half-edge s-1 and arrive at the corner after its twin
                    w, t = self.twin_slot(c[0], (c[1] - 1) % len(self.rotation[c[0]]))
                    c = (w, t)
                if c != (v, s):
                    raise ValueError("face traversal did not close")
                faces.append(cyc)
        self._faces = faces
        return faces

    def face_areas(self) -> np.ndarray:
        out = []
        for cyc in self.faces():
            alpha = np.array([self.corner_angles(v)[s] for v, s in cyc])
            out.append(len(cyc) * np.pi - alpha.sum() - 2 * np.pi)
        return np.array(out)

    def balance_residuals(self) -> np.ndarray:
        out = []
        for v in range(len(self.points)):
            w = np.array([self.edges[ei].weight for ei, _ in self.rotation[v]])
            out.append(float(np.linalg.norm(w @ self.U[v])))
        return np.array(out)

    def check_balance(self, tol: float = DEFAULT_TOL.balance):
        r = self.balance_residuals()
        if r.max(initial=0.0) > tol:
            raise BalanceViolation("cellulation is not balanced", residual=float(r.max()))
        return r

    def euler_characteristic(self):
        return len(self.points) - len(self.edges) + len(self.faces())

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "vertices": [{"label": lab, "position": p.tolist()}
                         for lab, p in zip(self.vertex_labels, self.points)],
            "edges": [{"a": e.a, "b": e.b, "word": list(e.word), "weight": e.weight,
                       "length": e.length} for e in self.edges],
            "rotation": [[list(x) for x in r] for r in self.rotation],
            "faces": [{"label": self.face_labels.get(i, f"c{i}"), "corners": [list(c) for c in cyc]}
                      for i, cyc in enumerate(self.faces())],
        }


def _sorted_by_angle(n, U):
    f1, f2 = tangent_frame(n)
    ang = np.arctan2(mdot(U, f2), mdot(U, f1))
    return np.argsort(ang)


def cellulation_from_data(hol: Holonomy, points, edges, tol=1e-12) -> WeightedCellulation:
    """Build the rotation system by angular sorting of the unit tangents at every vertex."""
    points = np.asarray(points, dtype=float)
    slots = [[] for _ in points]
    for ei, e in enumerate(edges):
        far_b = hol.mat(e.word) @ points[e.b]
        far_a = hol.mat(inverse_word(e.word)) @ points[e.a]
        slots[e.a].append((ei, 0, unit_tangent(points[e.a], far_b)))
        slots[e.b].append((ei, 1, unit_tangent(points[e.b], far_a)))
    rotation, Us = [], []
    for v, sl in enumerate(slots):
        U = np.array([x[2] for x in sl])
        order = _sorted_by_angle(points[v], U)
        rotation.append([(sl[i][0], sl[i][1]) for i in order])
        Us.append(U[order])
    cell = WeightedCellulation(hol, points, list(edges), rotation, Us)
    for v in range(len(points)):
        a = cell.corner_angles(v)
        if np.any(a < tol):
            raise NonConvexPolygon("parallel edges at a vertex", vertex=v)
    return cell


def gauss_image(surface, tol=DEFAULT_TOL) -> WeightedCellulation:
    """Vertex per quotient face, edge per quotient edge, face per hull vertex."""
    hol = surface.spacetime.hol
    points = np.array([f.normal for f in surface.faces])
    edges = [CEdge(e.face, e.twin_face, tuple(e.word), e.length, e.dihedral) for e in surface.edges]
    slot_of = {}
    for ei, e in enumerate(surface.edges):
        slot_of[(e.face, e.side)] = (ei, 0)
        slot_of[(e.twin_face, e.twin_side)] = (ei, 1)
    rotation, Us = [], []
    for fi, f in enumerate(surface.faces):
        rot = [slot_of[(fi, k)] for k in range(len(f.labels))]
        # outward unit tangent across each side, from the face itself; this equals the
        # direction towards the neighbouring normal but avoids long products of rho
        U = []
        m = len(f.pos)
        c = f.pos.mean(axis=0)
        for k in range(m):
            u = mcross(f.pos[(k + 1) % m] - f.pos[k], f.normal)
            u = u / np.sqrt(mdot(u, u))
            U.append(u if mdot(u, c - f.pos[k]) < 0 else -u)
        rotation.append(rot)
        Us.append(np.array(U))
    cell = WeightedCellulation(hol, points, edges, rotation, Us)
    labels = surface.spacetime.labels
    for i, cyc in enumerate(cell.faces()):
        v, s = cyc[0]
        cell.face_labels[i] = labels[surface.faces[v].labels[s]]
    cell.check_balance(tol.balance)
    return cell


def gauss_tangent_mismatch(cell: WeightedCellulation) -> float:
    """Largest gap between stored U and unit_tangent(n, rho(g) n') recomputed from the normals."""
    gap = 0.0
    for v in range(len(cell.points)):
        for s, (ei, end) in enumerate(cell.rotation[v]):
            b, g = cell.half_edge_word(v, s)
            far = (cell.hol.mat_long(g) @ cell.points[b]).astype(float)
            gap = max(gap, float(np.abs(unit_tangent(cell.points[v], far) - cell.U[v][s]).max()))
    return gap


def total_length(cell: WeightedCellulation) -> float:
    return float(np.sum(cell.weights * cell.lengths))


def dual_polygons(cell: WeightedCellulation, tol=DEFAULT_TOL):
    """Per vertex: planar polygon corners (m, 2); side s has direction U_s turned by +90 deg."""
    out = []
    for v in range(len(cell.points)):
        f1, f2 = tangent_frame(cell.points[v])
        U = cell.U[v]
        u = np.column_stack([mdot(U, f1), mdot(U, f2)])
        if np.any(cell.corner_angles(v) >= np.pi) or np.any(cell.corner_angles(v) <= 0):
            raise NonConvexPolygon("unit tangents are not strictly angularly ordered", vertex=v)
        w = np.array([cell.edges[ei].weight for ei, _ in cell.rotation[v]])
        if np.any(w <= 0):
            raise NonConvexPolygon("non-positive weight", vertex=v)
        d = np.column_stack([-u[:, 1], u[:, 0]]) * w[:, None]
        P = np.vstack([np.zeros(2), np.cumsum(d, axis=0)])
        gap = float(np.linalg.norm(P[-1]))
        if gap > tol.balance * max(1.0, w.sum()):
            raise NonClosingPolygon("dual polygon does not close", vertex=v, gap=gap)
        out.append(P[:-1])
    return out


def dualize(cell: WeightedCellulation, tol=DEFAULT_TOL):
    """Flat cone metric glued from the dual polygons, fanned from corner 0."""
    from .flat_metric import FlatConeMetric
    polys = dual_polygons(cell, tol)
    faces = cell.faces()
    face_of = {}
    for i, cyc in enumerate(faces):
        for c in cyc:
            face_of[c] = i
    labels = [cell.face_labels.get(i, f"c{i}") for i in range(len(faces))]
    # corner words: polygon v is placed at the identity, neighbours differ by the edge word
    cw = {}
    for cyc in faces:
        v0, s0 = cyc[0]
        cw[(v0, s0)] = ()
        for (v, s), (v2, s2) in zip(cyc, cyc[1:]):
            _, g = cell.half_edge_word(v, (s - 1) % len(cell.rotation[v]))
            cw[(v2, s2)] = word_mul(inverse_word(g), cw[(v, s)])
    lengths = [float(e.weight) for e in cell.edges]
    tris, tri_edges, words = [], [], []
    for v, P in enumerate(polys):
        m = len(P)
        diag = {}
        for j in range(2, m - 1):
            diag[j] = len(lengths)
            lengths.append(float(np.linalg.norm(P[j] - P[0])))
        side = [cell.rotation[v][k][0] for k in range(m)]
        for j in range(1, m - 1):
            e_in = side[0] if j == 1 else diag[j]
            e_out = side[m - 1] if j == m - 2 else diag[j + 1]
            # polygon corner k is the cellulation corner (v, k)
            tris.append([labels[face_of[(v, 0)]], labels[face_of[(v, j)]], labels[face_of[(v, j + 1)]]])
            tri_edges.append([e_in, side[j], e_out])
            words.append([cw[(v, 0)], cw[(v, j)], cw[(v, j + 1)]])
    lab_list = list(dict.fromkeys(labels))
    idx = {lab: i for i, lab in enumerate(lab_list)}
    tris = [[idx[x] for x in t] for t in tris]
    return FlatConeMetric(cell.genus, tuple(lab_list), tris, tri_edges, lengths, words).validate()


def octagon_cellulation() -> WeightedCellulation:
    """Gauss image of the orbit of one point at the centre of the regular octagon, unit weights."""
    from .hull import MarkedSpacetime, future_hull
    from .surface_group import Cocycle, OCTAGON_INRADIUS, octagon_holonomy
    hol = octagon_holonomy()
    c = 1.0 / (2.0 * np.sinh(OCTAGON_INRADIUS))
    p = MarkedSpacetime(hol, Cocycle.zero(2), [[c, 0.0, 0.0]], ("p",))
    surf, _ = future_hull(p)
    return gauss_image(surf)
