"""Infinitesimal rigidity of balanced convex cellulations.

Unknowns are the velocities of the unit normals of the quotient edges.  Each
velocity is written in a Lorentz-orthonormal frame (source point, unit
tangent, unit normal) carried by the chosen edge lift, so re-choosing lifts
leaves the assembled matrix unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cellulation import CEdge, WeightedCellulation
from .errors import FlatCorner, NonConvexPolygon
from .minkowski import J, mcross, mdot, normalize_timelike, unit_tangent
from .surface_group import inverse_word


@dataclass(eq=False)
class RigiditySystem:
    matrix: np.ndarray          # dense, rows (unit | corner | vertex), 3 columns per edge
    n_edges: int
    n_corners: int
    n_vertices: int
    row_kind: list              # ("unit", e) | ("corner", v, s) | ("vertex", v)
    lam: list                   # per vertex: lambda per slot
    sigma: list                 # per vertex: +-1 per slot
    normals: list               # per vertex: oriented unit normals of the adjacent edge lifts
    frames: list = field(default_factory=list)

    @property
    def shape(self):
        return self.matrix.shape

    def reduced(self) -> "RigiditySystem":
        """The system with the vertex-type rows deleted."""
        keep = [i for i, k in enumerate(self.row_kind) if k[0] != "vertex"]
        return RigiditySystem(self.matrix[keep], self.n_edges, self.n_corners, 0,
                              [self.row_kind[i] for i in keep], self.lam, self.sigma, self.normals,
                              self.frames)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def balance_residuals(self, points) -> np.ndarray:
        """|sum lambda sigma e| per vertex (the concurrency identity)."""
        out = []
        for v in range(len(self.lam)):
            s = sum(l * sg * e for l, sg, e in zip(self.lam[v], self.sigma[v], self.normals[v]))
            out.append(float(np.abs(s).max()))
        return np.array(out)

    def to_text(self) -> str:
        """Coordinate dump, one "row col value" line per stored nonzero."""
        r, c = np.nonzero(self.matrix)
        return "".join(f"{i} {j} {float(self.matrix[i, j])!r}\n" for i, j in zip(r, c))


def _lambdas(alpha):
    t = np.tan(alpha / 2)
    return t + np.roll(t, -1)   # slot s is flanked by corners s and s+1


def _check_corners(cell, tol=1e-10):
    alphas = []
    for v in range(len(cell.points)):
        a = cell.corner_angles(v)
        if np.any(a <= tol) or np.any(a >= np.pi - tol):
            raise FlatCorner("corner angle outside (0, pi)", vertex=v, angles=a.tolist())
        alphas.append(a)
    return alphas


def _source_end(cell, ei):
    e = cell.edges[ei]
    la, lb = cell.vertex_labels[e.a], cell.vertex_labels[e.b]
    return 0 if la <= lb else 1


def _edge_frames(cell):
    """Per edge: (frame columns [x, U, e], source end)."""
    slot_of = {}
    for v, rot in enumerate(cell.rotation):
        for s, (ei, end) in enumerate(rot):
            slot_of[(ei, end)] = (v, s)
    frames = []
    for ei, e in enumerate(cell.edges):
        src = _source_end(cell, ei)
        v, s = slot_of[(ei, src)]
        x = cell.points[e.a]
        y = cell.hol.mat_long(e.word).astype(float) @ cell.points[e.b]
        p, q = (x, y) if src == 0 else (y, x)
        U = cell.U[v][s]
        if src == 1:   # the representative lift ends at rho(word) . b
            U = cell.hol.mat_long(e.word).astype(float) @ U
        # midpoint frame: re-choosing the source end only flips U and the normal
        if e.length > 0:
            m = normalize_timelike(p + q)
            U = unit_tangent(m, q)
        else:
            m = p
        frames.append((np.column_stack([m, U, mcross(m, U)]), src))
    return frames


def _slot_maps(cell, frames):
    """Per vertex and slot: (edge, G = rho(h) F_e, oriented normal, sigma)."""
    out = []
    for v, rot in enumerate(cell.rotation):
        row = []
        for ei, end in rot:
            F, src = frames[ei]
            word = cell.edges[ei].word
            # lift adjacent to v: the representative at end 0, rho(word)^-1 of it at end 1
            h = () if end == 0 else inverse_word(word)
            G = cell.hol.mat_long(h).astype(float) @ F if h else F
            row.append((ei, G, G[:, 2], 1.0 if end == src else -1.0))
        out.append(row)
    return out


def assemble(cell: WeightedCellulation, corner_tol: float = 1e-10) -> RigiditySystem:
    alphas = _check_corners(cell, corner_tol)
    frames = _edge_frames(cell)
    maps = _slot_maps(cell, frames)
    nE = len(cell.edges)
    rows, kinds = [], []
    for ei in range(nE):
        r = np.zeros(3 * nE)
        r[3 * ei + 2] = 1.0   # <e_dot, e> in frame coordinates
        rows.append(r)
        kinds.append(("unit", ei))
    nQ = 0
    for v, row in enumerate(maps):
        m = len(row)
        for s in range(m):
            e_m, G_m, n_m, _ = row[(s - 1) % m]
            e_p, G_p, n_p, _ = row[s]
            r = np.zeros(3 * nE)
            r[3 * e_m:3 * e_m + 3] += (J @ n_p) @ G_m
            r[3 * e_p:3 * e_p + 3] += (J @ n_m) @ G_p
            rows.append(r)
            kinds.append(("corner", v, s))
            nQ += 1
    lams, sigmas, normals = [], [], []
    for v, row in enumerate(maps):
        lam = _lambdas(alphas[v])
        r = np.zeros(3 * nE)
        Jv = J @ cell.points[v]
        for lm, (ei, G, _, sg) in zip(lam, row):
            r[3 * ei:3 * ei + 3] += lm * sg * (Jv @ G)
        rows.append(r)
        kinds.append(("vertex", v))
        lams.append(lam)
        sigmas.append([x[3] for x in row])
        normals.append([x[2] for x in row])
    return RigiditySystem(np.array(rows), nE, nQ, len(cell.points), kinds, lams, sigmas, normals,
                          [f for f, _ in frames])


def kernel_dim(sys: RigiditySystem, rel_tol: float = 1e-8) -> int:
    s = sys.singular_values()
    n = sys.matrix.shape[1]
    rank = int(np.sum(s > rel_tol * s[0])) if len(s) else 0
    return n - rank


@dataclass
class XMatrix:
    matrix: np.ndarray
    column_sums: np.ndarray
    expected_sums: np.ndarray
    zero_edges: frozenset

    def min_singular_value(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False)[-1])


def x_matrix(cell: WeightedCellulation, zero_edges=()) -> XMatrix:
    """Reduced matrix on the vertex multipliers; zero-length edges use the limiting coefficients."""
    zero = frozenset(zero_edges)
    alphas = _check_corners(cell)
    nV = len(cell.points)
    X = np.zeros((nV, nV))
    expected = np.zeros(nV)
    lam = [_lambdas(a) for a in alphas]
    for v, rot in enumerate(cell.rotation):
        for s, (ei, end) in enumerate(rot):
            w, t = cell.twin_slot(v, s)
            l_here, l_far = lam[v][s], lam[w][t]
            if ei in zero:
                X[v, v] += l_here
                X[v, w] -= l_far
            else:
                ell = cell.edges[ei].length
                X[v, v] += l_here * np.cosh(ell) / np.sinh(ell)
                X[v, w] -= l_far / np.sinh(ell)
                expected[v] += l_here * (np.cosh(ell) - 1.0) / np.sinh(ell)
    return XMatrix(X, X.sum(axis=0), expected, zero)


def random_zero_forest(cell: WeightedCellulation, rng, prob: float = 0.5) -> frozenset:
    """Random set of non-loop edges containing no cycle (a forest), never all edges at every vertex."""
    parent = list(range(len(cell.points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    out = set()
    for ei in rng.permutation(len(cell.edges)):
        e = cell.edges[ei]
        if e.a == e.b or rng.uniform() > prob:
            continue
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[ra] = rb
            out.add(int(ei))
    if len(out) == len(cell.edges):
        out.pop()
    return frozenset(out)


def split_vertex(cell: WeightedCellulation, v: int, k: int) -> WeightedCellulation:
    """Split v into two coincident vertices joined by a zero-length edge.

    Slots 0..k-1 stay at v, the others move to a new vertex.  The new edge points along
    minus the weighted sum of the kept tangents, so both halves stay balanced.
    """
    rot = cell.rotation[v]
    U = cell.U[v]
    m = len(rot)
    if not 2 <= k <= m - 2:
        raise ValueError("each half needs at least two slots")
    w = np.array([cell.edges[ei].weight for ei, _ in rot])
    S = w[:k] @ U[:k]
    w0 = float(np.sqrt(max(mdot(S, S), 0.0)))
    if w0 <= 0:
        raise NonConvexPolygon("kept tangents are balanced already")
    U0 = -S / w0
    nv = len(cell.points)
    e_new = len(cell.edges)
    edges = list(cell.edges) + [CEdge(v, nv, (), w0, 0.0)]
    rotation = [list(r) for r in cell.rotation] + [None]
    Us = [u.copy() for u in cell.U] + [None]
    rotation[v] = list(rot[:k]) + [(e_new, 0)]
    Us[v] = np.vstack([U[:k], U0])
    rotation[nv] = list(rot[k:]) + [(e_new, 1)]
    Us[nv] = np.vstack([U[k:], -U0])
    # edges that moved to the new vertex change their endpoint index
    moved = {ei: end for ei, end in rot[k:]}
    for ei, end in moved.items():
        e = edges[ei]
        if e.a == e.b == v:
            both = [x for x in rot[k:] if x[0] == ei]
            a = nv if any(x[1] == 0 for x in both) else v
            b = nv if any(x[1] == 1 for x in both) else v
            edges[ei] = CEdge(a, b, e.word, e.weight, e.length)
        elif end == 0:
            edges[ei] = CEdge(nv, e.b, e.word, e.weight, e.length)
        else:
            edges[ei] = CEdge(e.a, nv, e.word, e.weight, e.length)
    points = np.vstack([cell.points, cell.points[v]])
    labels = list(cell.vertex_labels) + [cell.vertex_labels[v] + "'"]
    out = WeightedCellulation(cell.hol, points, edges, rotation, Us, {}, labels)
    # face labels carry over through any corner that was not created by the split
    old = {c: cell.face_labels.get(i) for i, cyc in enumerate(cell.faces()) for c in cyc}
    for i, cyc in enumerate(out.faces()):
        for (x, s) in cyc:
            if x == v and s < k and s > 0 and (v, s) in old:
                out.face_labels[i] = old[(v, s)]
                break
            if x != v and x != nv and (x, s) in old:
                out.face_labels[i] = old[(x, s)]
                break
            if x == nv and 0 < s < m - k:
                key = (v, s + k)
                if key in old:
                    out.face_labels[i] = old[key]
                    break
    for x in range(len(points)):
        a = out.corner_angles(x)
        if np.any(a <= 0) or np.any(a >= np.pi):
            raise NonConvexPolygon("split produces a reflex corner", vertex=x)
    return out


# ---------------------------------------------------------------- zerocorn

def _zerocorn_trial(rng, eps: float = 0.0):
    """Max third-angle derivative for random concurrent lines with the first two derivatives fixed."""
    from .minkowski import hpoint
    r = rng.uniform(0, 1.5)
    phi = rng.uniform(0, 2 * np.pi)
    p = np.array([np.cosh(r), np.sinh(r) * np.cos(phi), np.sinh(r) * np.sin(phi)])
    from .minkowski import tangent_frame
    f1, f2 = tangent_frame(hpoint(p))
    th = np.sort(rng.uniform(0, np.pi, 3))
    while np.min(np.diff(np.concatenate([th, [th[0] + np.pi]]))) < 0.05:
        th = np.sort(rng.uniform(0, np.pi, 3))
    E = [mcross(p, np.cos(t) * f1 + np.sin(t) * f2) for t in th]
    Je = [J @ e for e in E]
    # constraints: <e_i_dot, e_i> = 0, d<e1,e2> = 0, d<e2,e3> = eps
    A = np.zeros((5, 9))
    for i in range(3):
        A[i, 3 * i:3 * i + 3] = Je[i]
    A[3, 0:3], A[3, 3:6] = Je[1], Je[0]
    A[4, 3:6], A[4, 6:9] = Je[2], Je[1]
    b = np.array([0, 0, 0, 0, eps])
    x0 = np.linalg.lstsq(A, b, rcond=None)[0]
    _, _, Vt = np.linalg.svd(A)
    x = x0 + Vt[5:].T @ rng.standard_normal(4)
    d13 = Je[2] @ x[0:3] + Je[0] @ x[6:9]
    cos13 = mdot(E[0], E[2])
    return float(abs(d13) / np.sqrt(max(1e-300, 1 - cos13 ** 2)))


def zerocorn_check(trials: int, seed: int = 0, eps: float = 0.0) -> float:
    if trials < 1:
        raise ValueError("trials >= 1")
    rng = np.random.default_rng(seed)
    return max(_zerocorn_trial(rng, eps) for _ in range(trials))
