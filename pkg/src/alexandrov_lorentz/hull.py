"""Boundary of the convex hull of an equivariant orbit of marked points.

The orbit is truncated to group elements g with d(o, rho(g) o) <= ball (plus a
BFS word-length cap); the lower (past) boundary of the Euclidean hull of the
truncated orbit is kept, coplanar triangles are merged, and one face per
orbit is selected by the Dirichlet rule on face normals.  The result is
certified by recomputing one step further out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .config import DEFAULT_TOL, HullConfig
from .errors import (DegenerateConfiguration, NonSpacelikeFace, PositiveCurvatureVertex,
                     UncertifiedHull)
from .minkowski import J, ORIGIN, mdot, tangent_frame
from .surface_group import (Cocycle, Holonomy, Presentation, inverse_word, precise_cocycle, reduce_word,
                            word_mul)


@dataclass(frozen=True, eq=False)
class MarkedSpacetime:
    hol: Holonomy
    tau: Cocycle
    lifts: np.ndarray  # (n, 3)
    labels: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "lifts", np.array(self.lifts, dtype=float).reshape(-1, 3))
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(f"v{i}" for i in range(len(self.lifts))))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")

    @property
    def n(self) -> int:
        return len(self.lifts)

    @property
    def genus(self) -> int:
        return self.hol.genus

    def scaled(self, s: float) -> "MarkedSpacetime":
        return MarkedSpacetime(self.hol, self.tau * s, self.lifts * s, self.labels)

    def conjugated(self, A) -> "MarkedSpacetime":
        """Image under the global isometry x -> A x."""
        from .surface_group import holonomy_from_matrices
        A = np.asarray(A, dtype=float)
        Ai = J @ A.T @ J
        hol = holonomy_from_matrices([A @ m @ Ai for m in self.hol.images], self.genus)
        return MarkedSpacetime(hol, Cocycle(self.tau.values @ A.T), self.lifts @ A.T, self.labels)


# ---------------------------------------------------------------- orbits

def recentre_lifts(p: MarkedSpacetime, max_steps: int = 500):
    """Replace each lift by the orbit image of lowest time coordinate (greedy over generators).

    The hull is unchanged; the Gauss cells of the new lifts sit near the origin, which is where
    the truncated orbit is accurate.  Returns the new spacetime and the word used for each label.
    """
    letters = Presentation(p.genus).letters()
    vals = p.tau.values
    gens = [(k, p.hol.letter(k), vals[k - 1] if k > 0 else -(p.hol.letter(k) @ vals[-k - 1]))
            for k in letters]
    lifts, words = [], []
    for x in p.lifts:
        w: tuple = ()
        for _ in range(max_steps):
            best = None
            for k, R, t in gens:
                y = R @ x + t
                if y[0] < x[0] - 1e-12 * max(1.0, abs(x[0])) and (best is None or y[0] < best[1][0]):
                    best = (k, y)
            if best is None:
                break
            w = reduce_word((best[0],) + w)
            x = best[1]
        lifts.append(x)
        words.append(w)
    return MarkedSpacetime(p.hol, p.tau, np.array(lifts), p.labels), words


@dataclass(eq=False)
class ElementTable:
    """Group elements found by BFS, deduplicated through the position of rho(g) o."""
    words: list
    R: np.ndarray      # (N, 3, 3)
    t: np.ndarray      # (N, 3)
    keep: np.ndarray   # (N,) bool, inside the ball proper

    def __len__(self):
        return len(self.words)

    def arrays(self):
        return self.R, self.t


def _dup_mask(tree, Y, rel=1e-7):
    """True where a row of Y already has a point of ``tree`` within rel * x0."""
    if tree is None:
        return np.zeros(len(Y), bool)
    tol = rel * np.maximum(1.0, Y[:, 0])
    d, _ = tree.query(Y, k=1, distance_upper_bound=float(tol.max()) * 1.01)
    return d <= tol


def enumerate_elements(hol: Holonomy, tau: Cocycle, word_radius: int,
                       ball: float | None = None) -> ElementTable:
    """Elements within word length ``word_radius`` (and displacement ``ball`` if given).

    Distinct elements are told apart by rho(g) o; on the hyperboloid Euclidean distance
    dominates hyperbolic distance, so distinct orbit points stay well separated.
    """
    from scipy.spatial import cKDTree
    letters = Presentation(hol.genus).letters()
    # extended precision keeps different words for one element consistent
    vals = precise_cocycle(hol, tau)
    GR = np.array([hol.letter_long(k) for k in letters])
    Gt = np.array([vals[k - 1] if k > 0 else -(hol.letter_long(k) @ vals[-k - 1]) for k in letters])
    slack = max(np.arccosh(max(1.0, float(m[0, 0]))) for m in GR)
    words = [()]
    Rs = [np.eye(3, dtype=np.longdouble)[None]]
    ts = [np.zeros((1, 3), dtype=np.longdouble)]
    last = [np.zeros(1, int)]
    keep = [np.ones(1, bool)]
    pts = np.array([[1.0, 0.0, 0.0]])
    f_R, f_t, f_last, f_idx = Rs[0], ts[0], last[0], [0]
    for _ in range(word_radius):
        cand_R, cand_t, cand_last, cand_par = [], [], [], []
        for li, k in enumerate(letters):
            ok = f_last != -k
            if not ok.any():
                continue
            R2 = f_R[ok] @ GR[li]
            t2 = f_R[ok] @ Gt[li] + f_t[ok]
            cand_R.append(R2)
            cand_t.append(t2)
            cand_last.append(np.full(len(R2), k))
            cand_par.append((np.asarray(f_idx)[ok], k))
        if not cand_R:
            break
        R2 = np.concatenate(cand_R)
        t2 = np.concatenate(cand_t)
        l2 = np.concatenate(cand_last)
        par = np.concatenate([q[0] for q in cand_par])
        let = np.concatenate([np.full(len(q[0]), q[1]) for q in cand_par])
        d = np.arccosh(np.maximum(1.0, R2[:, 0, 0].astype(float)))
        m = np.ones(len(R2), bool) if ball is None else d <= ball + slack
        R2, t2, l2, par, let, d = R2[m], t2[m], l2[m], par[m], let[m], d[m]
        Y = R2[:, :, 0].astype(float)
        fresh = ~_dup_mask(cKDTree(pts), Y)
        # duplicates inside the layer
        idx = np.flatnonzero(fresh)
        if len(idx) > 1:
            tree = cKDTree(Y[idx])
            tol = 1e-7 * max(1.0, float(Y[idx, 0].max()))
            drop = set()
            for i, j in sorted(tree.query_pairs(tol)):
                if i not in drop:
                    drop.add(j)
            if drop:
                fresh[idx[sorted(drop)]] = False
        idx = np.flatnonzero(fresh)
        if not len(idx):
            break
        base = len(words)
        for i in idx:
            words.append(words[par[i]] + (int(let[i]),))
        Rs.append(R2[idx])
        ts.append(t2[idx])
        last.append(l2[idx])
        keep.append(np.ones(len(idx), bool) if ball is None else d[idx] <= ball)
        pts = np.concatenate([pts, Y[idx]])
        f_R, f_t, f_last = R2[idx], t2[idx], l2[idx]
        f_idx = list(range(base, base + len(idx)))
    return ElementTable(words, np.concatenate(Rs), np.concatenate(ts), np.concatenate(keep))


def orbit_points(p: MarkedSpacetime, radius: int, ball: float | None = None):
    """[(position, label, word)] for elements of word length <= radius, deduplicated."""
    table = enumerate_elements(p.hol, p.tau, radius, ball)
    out = []
    for i, w in enumerate(table.words):
        if not table.keep[i]:
            continue
        for v, x in enumerate(p.lifts):
            out.append((table.R[i] @ x + table.t[i], p.labels[v], w))
    return _dedupe(out)


def _dedupe(points, tol=1e-10):
    X = np.array([q[0] for q in points])
    scale = max(1.0, float(np.abs(X).max()))
    order = np.lexsort(X.T[::-1])
    keep = []
    last = None
    for i in order:
        if last is not None and np.abs(X[i] - X[last]).max() <= tol * scale:
            continue
        keep.append(i)
        last = i
    return [points[i] for i in sorted(keep)]


# ---------------------------------------------------------------- surface

@dataclass(eq=False)
class QFace:
    labels: list          # vertex label index per corner, counter-clockwise
    words: list           # group word per corner
    pos: np.ndarray       # (m, 3) positions
    normal: np.ndarray    # future unit normal


@dataclass(eq=False)
class QEdge:
    face: int
    side: int
    twin_face: int
    twin_side: int
    word: tuple           # neighbour across (face, side) is word . twin_face
    length: float
    dihedral: float


@dataclass
class HullCertificate:
    word_radius: int
    ball_radius: float
    stable: bool
    margin: float
    max_change: float = 0.0


@dataclass(eq=False)
class PolyhedralSurface:
    spacetime: MarkedSpacetime
    faces: list                     # quotient faces (QFace)
    edges: list                     # quotient edges (QEdge), one per orbit
    twin: dict                      # (face, side) -> (face, side, word)
    certificate: HullCertificate | None = None
    lifted: dict = field(default_factory=dict)   # all lower faces, for rendering

    @property
    def n_vertices(self):
        return self.spacetime.n

    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    def dihedrals(self) -> np.ndarray:
        return np.array([e.dihedral for e in self.edges])

    def total_mean_curvature(self) -> float:
        """sum over edges of dihedral * length."""
        return float(np.sum(self.lengths() * self.dihedrals()))

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    def to_dict(self) -> dict:
        p = self.spacetime
        return {
            "genus": p.genus,
            "labels": list(p.labels),
            "lifts": p.lifts.tolist(),
            "faces": [{"labels": [p.labels[v] for v in f.labels], "words": [list(w) for w in f.words],
                       "positions": f.pos.tolist(), "normal": f.normal.tolist()} for f in self.faces],
            "edges": [{"face": e.face, "side": e.side, "twin_face": e.twin_face,
                       "twin_side": e.twin_side, "word": list(e.word), "length": e.length,
                       "dihedral": e.dihedral} for e in self.edges],
            "certificate": None if self.certificate is None else vars(self.certificate),
        }


# ---------------------------------------------------------------- hull

def _lower_faces(X, tol, XL=None):
    """Merged lower faces of the Euclidean hull: list of (vertex index list, future unit normal)."""
    hull = ConvexHull(X)
    nu = hull.equations[:, :3]
    lower = (nu[:, 0] < 0) & (nu[:, 0] ** 2 > nu[:, 1] ** 2 + nu[:, 2] ** 2)
    n = (J @ nu.T).T
    n = n / np.sqrt(np.maximum(-mdot(n, n), 1e-300))[:, None]
    idx = np.flatnonzero(lower)
    parent = {i: i for i in idx}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in idx:
        for j in hull.neighbors[i]:
            if j in parent and np.abs(n[i] - n[j]).max() <= tol * max(1.0, abs(n[i][0])):
                parent[find(i)] = find(j)
    groups: dict = {}
    for i in idx:
        groups.setdefault(find(i), []).append(i)
    faces = []
    for members in groups.values():
        verts = sorted({int(v) for i in members for v in hull.simplices[i]})
        faces.append((verts, _plane_normal(X[verts] if XL is None else XL[verts], n[members[0]])))
    return faces


def _plane_normal(P, guess):
    """Future unit Minkowski normal of the plane through the rows of P (qhull's is too coarse)."""
    D = (P[1:] - P[0]).astype(float)
    _, _, Vt = np.linalg.svd(D / np.abs(D).max())
    nn = J @ Vt[-1]
    if mdot(nn, guess) > 0:
        nn = -nn
    q = -mdot(nn, nn)
    if q <= 0:
        raise NonSpacelikeFace("face normal is not timelike")
    nn = nn / np.sqrt(q)
    return nn if nn[0] > 0 else -nn


def _order_ccw(X, verts, n):
    f1, f2 = tangent_frame(n)
    c = X[verts].mean(axis=0)
    d = X[verts] - c
    ang = np.arctan2(mdot(d, f2), mdot(d, f1))
    return [verts[i] for i in np.argsort(ang)]


def _canonical_translate(nrm, R0, Rall, tie=1e-9):
    """Index h of the element for which rho(h) n is the Dirichlet representative."""
    vals = R0 @ nrm            # cosh d(o, rho(h) n) for every h
    best = vals.min()
    cand = np.flatnonzero(vals <= best * (1 + tie) + tie)
    if len(cand) == 1:
        return int(cand[0])
    imgs = Rall[cand] @ nrm
    eps = 1e-7 * max(1.0, float(np.abs(imgs).max()))
    for c in (1, 2):
        keep = imgs[:, c] <= imgs[:, c].min() + eps
        cand, imgs = cand[keep], imgs[keep]
    return int(cand[0])


def _build_quotient(p: MarkedSpacetime, word_radius: int, ball: float, tol=DEFAULT_TOL, gap: float = 2.0):
    table = enumerate_elements(p.hol, p.tau, word_radius, ball)
    Rs, ts = table.arrays()
    use = np.flatnonzero(table.keep)
    Rs_k, ts_k = Rs[use], ts[use]
    XL = (np.einsum("gij,vj->gvi", Rs_k, p.lifts.astype(np.longdouble)) + ts_k[:, None, :]).reshape(-1, 3)
    X = XL.astype(float)
    elem_of = np.repeat(use, p.n)
    label_of = np.tile(np.arange(p.n), len(use))
    faces = _lower_faces(X, tol.coplanar, XL)
    if not faces:
        raise NonSpacelikeFace("hull has no spacelike lower faces")
    Rs_long = Rs_k
    Rs_k = Rs_k.astype(float)
    R0 = Rs_k[:, 0, :]
    inner = np.arccosh(np.maximum(1.0, R0[:, 0])) <= ball - gap
    inner_pt = np.repeat(inner, p.n)
    reps = []
    for verts, nrm in faces:
        if not inner_pt[verts].all():
            continue
        h = _canonical_translate(nrm, R0, Rs_k)
        if use[h] == 0:
            reps.append((_order_ccw(X, verts, nrm), nrm))
    if not reps:
        raise UncertifiedHull("no face near the origin; lifts may lie outside the future domain")
    # adjacency of lifted faces by undirected vertex pairs
    pair_faces: dict = {}
    ordered = []
    for fi, (verts, nrm) in enumerate(faces):
        cyc = _order_ccw(X, verts, nrm)
        ordered.append(cyc)
        for k in range(len(cyc)):
            pair_faces.setdefault(frozenset((cyc[k], cyc[(k + 1) % len(cyc)])), []).append(fi)
    qfaces = []
    for cyc, nrm in reps:
        qfaces.append(QFace([int(label_of[i]) for i in cyc], [table.words[elem_of[i]] for i in cyc],
                            XL[cyc].astype(float), nrm))
    rep_normals = np.array([f.normal for f in qfaces])

    twin = {}
    scale = max(1.0, float(np.abs(X).max()))
    for fi, (cyc, nrm) in enumerate(reps):
        m = len(cyc)
        for k in range(m):
            a, b = cyc[k], cyc[(k + 1) % m]
            nb = [g for g in pair_faces.get(frozenset((a, b)), []) if not np.allclose(faces[g][1], nrm)]
            if len(nb) != 1:
                raise UncertifiedHull("face adjacency is incomplete; enlarge the orbit",
                                      face=fi, side=k)
            g = nb[0]
            nn = faces[g][1]
            # two stages: first near the origin, then the tie rule where the table is complete
            h0 = int(np.argmin(R0 @ nn))
            h1 = _canonical_translate(Rs_k[h0] @ nn, R0, Rs_k)
            Rh = Rs_long[h1] @ Rs_long[h0]
            th = Rs_long[h1] @ ts_k[h0] + ts_k[h1]
            img = Rh @ nn
            # identification only; far products lose digits, so the match is loose but must be clear
            dist = np.abs(rep_normals - img).max(axis=1)
            j = int(np.argmin(dist))
            second = np.partition(dist, 1)[1] if len(dist) > 1 else np.inf
            if dist[j] > 1e-5 * max(1.0, img[0]) or second < 100 * dist[j]:
                raise UncertifiedHull("neighbour face has no representative", face=fi, side=k,
                                      image=img.tolist())
            # side of face j matching h . (b -> a)
            pa = (Rh @ XL[a] + th).astype(float)
            pb = (Rh @ XL[b] + th).astype(float)
            P = qfaces[j].pos
            ka = int(np.argmin(np.abs(P - pa).max(axis=1)))
            kb = int(np.argmin(np.abs(P - pb).max(axis=1)))
            err = max(np.abs(P[ka] - pa).max(), np.abs(P[kb] - pb).max())
            if err > 1e-7 * scale or ka != (kb + 1) % len(P):
                raise UncertifiedHull("edge pairing failed", face=fi, side=k, error=float(err))
            hw = word_mul(table.words[use[h1]], table.words[use[h0]])
            twin[(fi, k)] = (j, kb, inverse_word(hw))
    edges = []
    seen = set()
    for (fi, k), (j, kk, w) in sorted(twin.items()):
        if (fi, k) in seen:
            continue
        back = twin.get((j, kk))
        if back is None or back[:2] != (fi, k):
            raise UncertifiedHull("edge pairing is not symmetric", face=fi, side=k)
        seen.add((fi, k))
        seen.add((j, kk))
        F = qfaces[fi]
        d = F.pos[(k + 1) % len(F.pos)] - F.pos[k]
        Rw = p.hol.mat_long(w)
        dn = (F.normal - Rw @ qfaces[j].normal).astype(float)
        dih = 2.0 * np.arcsinh(0.5 * np.sqrt(max(0.0, mdot(dn, dn))))
        edges.append(QEdge(fi, k, j, kk, w, float(np.sqrt(mdot(d, d))), float(dih)))
    lifted = {"positions": X, "faces": ordered, "normals": np.array([f[1] for f in faces])}
    return qfaces, edges, twin, lifted, X


def _validate(p, qfaces, edges, X, tol=DEFAULT_TOL):
    present = {v for f in qfaces for v in f.labels}
    missing = sorted(set(range(p.n)) - present)
    if missing:
        raise DegenerateConfiguration("some marked points are not hull vertices",
                                      labels=[p.labels[v] for v in missing])
    chi = p.n - len(edges) + len(qfaces)
    if chi != 2 - 2 * p.genus:
        raise UncertifiedHull("quotient Euler characteristic is wrong", chi=chi)
    margin = np.inf
    scale = max(1.0, float(np.abs(X).max()))
    for f in qfaces:
        if abs(mdot(f.normal, f.normal) + 1) > 1e-10 or f.normal[0] <= 0:
            raise NonSpacelikeFace("face normal is not future unit timelike")
        x0 = f.pos[0]
        s = mdot(X - x0, f.normal)
        on = np.abs(s) <= tol.planarity * scale
        if np.abs(mdot(f.pos - x0, f.normal)).max() > tol.planarity * scale:
            raise NonSpacelikeFace("face is not planar")
        if np.any(s[~on] > 0):
            raise UncertifiedHull("a face plane does not support the orbit")
        if np.any(~on):
            margin = min(margin, float(-s[~on].max()))
    for e in edges:
        if not e.length > 0:
            raise DegenerateConfiguration("zero length hull edge")
    return margin


def _signature(qfaces, edges):
    normals = np.array(sorted(tuple(np.round(f.normal, 6)) for f in qfaces))
    L = np.sort([e.length for e in edges])
    D = np.sort([e.dihedral for e in edges])
    return normals, L, D


def future_hull(p: MarkedSpacetime, radius: int | None = None, cfg: HullConfig = HullConfig(),
                tol=DEFAULT_TOL) -> tuple[PolyhedralSurface, HullCertificate]:
    """Quotient of the future-convex hull boundary, certified by one refinement step."""
    p, _ = recentre_lifts(p)
    R = cfg.word_radius if radius is None else radius
    B = cfg.ball_radius
    last_err = None
    while R <= cfg.max_word_radius:
        try:
            qf, ed, tw, lifted, X = _build_quotient(p, R, B, tol, cfg.frontier_gap)
            if not cfg.certify:
                margin = _validate(p, qf, ed, X, tol)
                cert = HullCertificate(R, B, False, margin)
                return PolyhedralSurface(p, qf, ed, tw, cert, lifted), cert
            qf2, ed2, tw2, _, X2 = _build_quotient(p, R + 1, B + 1.0, tol, cfg.frontier_gap)
            margin = _validate(p, qf2, ed2, X2, tol)
            s1, s2 = _signature(qf, ed), _signature(qf2, ed2)
            if all(a.shape == b.shape for a, b in zip(s1, s2)):
                change = max(float(np.abs(a - b).max()) for a, b in zip(s1, s2))
                if change <= 1e-9:
                    _validate(p, qf, ed, X, tol)
                    cert = HullCertificate(R, B, True, margin, change)
                    return PolyhedralSurface(p, qf, ed, tw, cert, lifted), cert
            last_err = "quotient changed under refinement"
        except UncertifiedHull as exc:
            last_err = str(exc)
        R += 1
        B += 1.0
    raise UncertifiedHull("hull not stable up to the maximal radius", reason=last_err,
                          max_word_radius=cfg.max_word_radius)


def induced_metric(surface: PolyhedralSurface, check_curvature: bool = True):
    """Flat cone metric on the quotient: faces fanned from their first corner."""
    from .flat_metric import FlatConeMetric, cone_angles
    p = surface.spacetime
    edge_of = {}
    for ei, e in enumerate(surface.edges):
        edge_of[(e.face, e.side)] = ei
        edge_of[(e.twin_face, e.twin_side)] = ei
    lengths = [e.length for e in surface.edges]
    tris, tri_edges, words = [], [], []
    for fi, f in enumerate(surface.faces):
        m = len(f.labels)
        diag = {}
        for j in range(2, m - 1):
            d = f.pos[j] - f.pos[0]
            diag[j] = len(lengths)
            lengths.append(float(np.sqrt(mdot(d, d))))
        for j in range(1, m - 1):
            s0 = edge_of[(fi, j)]
            e_in = edge_of[(fi, 0)] if j == 1 else diag[j]
            e_out = edge_of[(fi, m - 1)] if j == m - 2 else diag[j + 1]
            # triangle (0, j, j+1): sides 0->j, j->j+1, j+1->0
            tris.append([f.labels[0], f.labels[j], f.labels[j + 1]])
            tri_edges.append([e_in, s0, e_out])
            words.append([f.words[0], f.words[j], f.words[j + 1]])
    met = FlatConeMetric(p.genus, p.labels, tris, tri_edges, lengths, words).validate()
    if check_curvature:
        theta = cone_angles(met)
        if np.any(theta <= 2 * np.pi):
            raise PositiveCurvatureVertex("cone angle at most 2 pi", angles=theta.tolist())
    return met


def random_spacetime(rng: np.random.Generator, genus: int = 2, n: int = 2, tau_scale: float = 0.2,
                     spread: float = 1.0, height: float = 3.0,
                     hol: Holonomy | None = None) -> MarkedSpacetime:
    """Random marked spacetime: random FN holonomy, random H^1 class, lifts near the origin."""
    from .surface_group import build_holonomy, h1_reconstruct, random_coords
    if hol is None:
        hol = build_holonomy(random_coords(rng, genus))
    tau = h1_reconstruct(hol, tau_scale * rng.standard_normal(6 * genus - 6))
    r = spread * np.sqrt(rng.uniform(0, 1, n))
    phi = rng.uniform(0, 2 * np.pi, n)
    lifts = np.column_stack([np.cosh(r), np.sinh(r) * np.cos(phi), np.sinh(r) * np.sin(phi)])
    lifts *= height * rng.uniform(0.8, 1.25, n)[:, None]
    return MarkedSpacetime(hol, tau, lifts)
