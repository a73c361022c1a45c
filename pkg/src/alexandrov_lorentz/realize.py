"""Realization of flat cone metrics as convex polyhedral Cauchy surfaces.

The embedding solver works on a triangulation T of the target carrying corner
words.  Unknowns are slice coordinates of tau and the vertex lifts; residuals
are Minkowski chord lengths of the T-edges minus their target lengths (a square
system).  When the realized T-surface is folded the wrong way along an edge
that edge is flipped in the target and the solve continues; at a locally
convex solution chords are geodesic lengths on the hull, which is checked by
rebuilding the hull and comparing metrics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cellulation import WeightedCellulation, gauss_image, total_length
from .config import SolverConfig
from .errors import (CombinatorialChurn, GeometryError, InvalidMetric, NoConvergence,
                     PositiveCurvatureVertex)
from .flat_metric import FlatConeMetric, compare, cone_angles, delaunay, flip
from .hull import MarkedSpacetime, PolyhedralSurface, future_hull, induced_metric
from .minkowski import J, mcross, mdot
from .surface_group import (Cocycle, Holonomy, TeichCoords, build_holonomy, cocycle_basis,
                            eval_word, inverse_word, project_to_cocycles, remove_coboundary,
                            tangent_coords, word_mul)

log = logging.getLogger(__name__)


@dataclass
class EmbeddingProblem:
    hol: Holonomy
    target: FlatConeMetric
    cfg: SolverConfig = field(default_factory=SolverConfig)
    certify: bool = True
    compare_tol: float = 1e-7

    def __post_init__(self):
        if isinstance(self.hol, TeichCoords):
            self.hol = build_holonomy(self.hol)
        t = self.target
        if t.genus != self.hol.genus:
            raise InvalidMetric("genus of the target and the holonomy differ")
        if t.corner_words is None:
            raise InvalidMetric("target needs corner words to fix the marking")
        t.validate()
        theta = cone_angles(t)
        if np.any(theta <= 2 * np.pi):
            raise PositiveCurvatureVertex("target has a cone angle at most 2 pi",
                                          angles=theta.tolist())
        if t.n_edges != 6 * t.genus - 6 + 3 * t.n_vertices:
            raise InvalidMetric("triangulation has the wrong number of edges")

    @property
    def diameter(self) -> float:
        return float(self.target.lengths.max())


@dataclass(eq=False)
class EmbeddingSolution:
    spacetime: MarkedSpacetime
    surface: PolyhedralSurface | None
    cellulation: WeightedCellulation | None
    xd: np.ndarray
    residual: float
    iterations: int
    metric: FlatConeMetric            # the tracked triangulation at the solution
    slice_coords: np.ndarray
    flips: int = 0
    history: list = field(default_factory=list)
    xd_frame: str = "fn_tangent"

    @property
    def tau(self) -> Cocycle:
        return self.spacetime.tau

    def record(self) -> dict:
        out = {"residual": self.residual, "iterations": self.iterations, "flips": self.flips,
               "xd": self.xd.tolist(), "xd_frame": self.xd_frame,
               "lifts": self.spacetime.lifts.tolist(), "tau": self.tau.to_dict()["values"],
               "history": self.history}
        if self.surface is not None:
            c = self.surface.certificate
            out["certificate"] = {"word_radius": c.word_radius, "ball_radius": c.ball_radius,
                                  "margin": c.margin, "max_change": c.max_change}
        return out


# ----------------------------------------------------------- T-surface model

class _Model:
    """Chord geometry of the tracked triangulation for fixed holonomy."""

    def __init__(self, hol: Holonomy, metric: FlatConeMetric, basis: np.ndarray):
        self.hol = hol
        self.basis = basis                      # (6g, K) slice basis
        self.K = basis.shape[1]
        self.n = metric.n_vertices
        self.set_metric(metric)

    def _affine(self, w):
        key = tuple(w)
        hit = self._cache.get(key)
        if hit is None:
            R, _ = eval_word(self.hol, None, w)
            T = np.column_stack([eval_word(self.hol, Cocycle.from_vector(self.basis[:, k]), w)[1]
                                 for k in range(self.K)])
            hit = self._cache[key] = (R, T)
        return hit

    def set_metric(self, metric: FlatConeMetric):
        self.metric = metric
        if not hasattr(self, "_cache"):
            self._cache = {}
        T = metric.n_triangles
        self.R = np.zeros((T, 3, 3, 3))
        self.Tw = np.zeros((T, 3, 3, self.K))
        self.lab = metric.triangles.copy()
        for t in range(T):
            for k in range(3):
                self.R[t, k], self.Tw[t, k] = self._affine(metric.corner_words[t][k])
        sides = metric.sides_of_edge()
        self.side = np.array([s[0] for s in sides])
        self.other = np.array([s[1] for s in sides])
        # frame change from the second triangle to the first, through the shared corner
        self.G = []
        for (t1, k1), (t2, k2) in zip(self.side, self.other):
            g = word_mul(metric.corner_words[t1][k1], inverse_word(metric.corner_words[t2][(k2 + 1) % 3]))
            self.G.append(self._affine(g))

    def split(self, x):
        return x[:self.K], x[self.K:].reshape(self.n, 3)

    def positions(self, x):
        c, P = self.split(x)
        return (np.einsum("tkij,tkj->tki", self.R, P[self.lab])
                + np.einsum("tkij,j->tki", self.Tw, c))

    def chords(self, x):
        pos = self.positions(x)
        t, k = self.side[:, 0], self.side[:, 1]
        D = pos[t, (k + 1) % 3] - pos[t, k]
        q = np.einsum("ei,ij,ej->e", D, J, D)
        return D, q

    def lengths(self, x, faces: bool = False):
        """Chord lengths, or None if a chord (or with faces, a triangle plane) is not spacelike."""
        _, q = self.chords(x)
        if np.any(q <= 0):
            return None
        if faces and self._normals(self.positions(x)) is None:
            return None
        return np.sqrt(q)

    def jacobian(self, x):
        D, q = self.chords(x)
        ln = np.sqrt(q)
        t, k = self.side[:, 0], self.side[:, 1]
        k1 = (k + 1) % 3
        JD = (D @ J) / ln[:, None]
        E = len(ln)
        out = np.zeros((E, self.K + 3 * self.n))
        out[:, :self.K] = np.einsum("ei,eik->ek", JD, self.Tw[t, k1] - self.Tw[t, k])
        for e in range(E):
            a, b = self.lab[t[e], k[e]], self.lab[t[e], k1[e]]
            out[e, self.K + 3 * b:self.K + 3 * b + 3] += JD[e] @ self.R[t[e], k1[e]]
            out[e, self.K + 3 * a:self.K + 3 * a + 3] -= JD[e] @ self.R[t[e], k[e]]
        return out, ln

    def _normals(self, pos):
        a, b, c = pos[:, 0], pos[:, 1], pos[:, 2]
        n = mcross(b - a, c - a)
        q = -np.einsum("ti,ij,tj->t", n, J, n)
        if np.any(q <= 0):
            return None
        n = n / np.sqrt(q)[:, None]
        return n * np.sign(n[:, 0])[:, None]

    def bends(self, x):
        """Per edge: (signed dihedral angle, fold), fold > 0 when the edge is reflex."""
        c, _ = self.split(x)
        pos = self.positions(x)
        nrm = self._normals(pos)
        if nrm is None:
            return None, None
        theta = np.zeros(len(self.side))
        fold = np.zeros(len(self.side))
        for e, ((t1, k1), (t2, k2)) in enumerate(zip(self.side, self.other)):
            R, T = self.G[e]
            d = R @ pos[t2, (k2 + 2) % 3] + T @ c
            fold[e] = mdot(d - pos[t1, k1], nrm[t1])
            dn = nrm[t1] - R @ nrm[t2]
            ang = 2 * np.arcsinh(0.5 * np.sqrt(max(mdot(dn, dn), 0.0)))
            theta[e] = -ang if fold[e] > 0 else ang
        return theta, fold


def _adapt(hol: Holonomy, init: MarkedSpacetime, basis: np.ndarray):
    """Slice coordinates and lifts for hol from a nearby spacetime."""
    tau = project_to_cocycles(hol, Cocycle(init.tau.values))
    tau, v = remove_coboundary(hol, tau)
    c = basis.T @ tau.vector()
    return np.concatenate([c, (init.lifts + v).reshape(-1)])


def default_init(prob: EmbeddingProblem) -> np.ndarray:
    """tau = 0 and lifts on a hyperboloid of radius r.

    The points minimise the sum over T-edges of cosh of the hyperbolic distance between
    the two corner images (geodesically convex), which keeps every triangle small; r then
    matches the target area.
    """
    from scipy.optimize import minimize
    K = 6 * prob.hol.genus - 6
    n = prob.target.n_vertices
    basis = np.column_stack([b.vector() for b in cocycle_basis(prob.hol)])
    model = _Model(prob.hol, delaunay(prob.target).metric, basis)
    t, k = model.side[:, 0], model.side[:, 1]
    Ra, Rb = model.R[t, k], model.R[t, (k + 1) % 3]
    la, lb = model.lab[t, k], model.lab[t, (k + 1) % 3]
    M = np.einsum("eji,jk,ekl->eil", Ra, J, Rb)   # <Ra p, Rb q> = p^T M q

    def lift(y):
        y = y.reshape(n, 2)
        return np.column_stack([np.sqrt(1 + (y ** 2).sum(axis=1)), y])

    def cost(y):
        P = lift(y)
        return -np.einsum("ei,eij,ej->", P[la], M, P[lb])

    y = minimize(cost, np.zeros(2 * n), method="BFGS").x
    x = np.concatenate([np.zeros(K), lift(y).reshape(-1)])
    ln = model.lengths(x)
    area = prob.target.with_lengths(ln).area()
    x[K:] *= np.sqrt(prob.target.area() / area)
    return x


def _newton(model: _Model, x, target, cfg: SolverConfig, tol):
    """Damped Newton on chord(x) = target; returns (x, residual, iterations)."""
    faces = model.lengths(x, faces=True) is not None
    ln = model.lengths(x)
    if ln is None:
        raise NoConvergence("start has a non-spacelike chord")
    r = ln - target
    nr = np.abs(r).max()
    for it in range(cfg.max_iter):
        if nr <= tol:
            return x, nr, it
        Jm, _ = model.jacobian(x)
        step = np.linalg.lstsq(Jm, -r, rcond=None)[0]
        a = 1.0
        while a >= cfg.damping_min:
            xn = x + a * step
            ln = model.lengths(xn, faces=faces)
            if ln is not None:
                rn = ln - target
                if np.abs(rn).max() < nr:
                    break
            a *= 0.5
        else:
            raise NoConvergence("line search failed", residual=float(nr), iteration=it)
        x, r, nr = xn, rn, np.abs(rn).max()
    if nr <= tol:
        return x, nr, cfg.max_iter
    raise NoConvergence("iteration budget exhausted", residual=float(nr))


def _flip_reflex(model: _Model, x, target_metric, start_lengths, t, fold_tol):
    """Flip the most reflex flippable edge; returns the new (metric, start lengths) or None."""
    theta, fold = model.bends(x)
    if fold is None:
        if t < 1:
            return None   # folds are only meaningful once every triangle is spacelike
        raise NoConvergence("realized triangle is not spacelike")
    order = np.argsort(-fold)
    cur = model.lengths(x)
    for e in order:
        if fold[e] <= fold_tol:
            return None
        try:
            m2 = flip(target_metric, int(e))
        except InvalidMetric:
            continue
        s2 = start_lengths.copy()
        if t < 1:
            # keep the interpolated length of the new diagonal equal to its current chord
            trial = _Model.__new__(_Model)
            trial.__dict__.update(model.__dict__)
            trial.set_metric(m2)
            ch = trial.lengths(x)
            if ch is None:
                continue
            sq = (ch[e] ** 2 - t * m2.lengths[e] ** 2) / (1 - t)
            if sq <= 0:
                continue
            s2[e] = np.sqrt(sq)
        return m2, s2
    return None


def _interp(l0, l1, t):
    return np.sqrt((1 - t) * l0 ** 2 + t * l1 ** 2)


def solve_embedding(prob: EmbeddingProblem, init: MarkedSpacetime | None = None) -> EmbeddingSolution:
    cfg = prob.cfg
    hol = prob.hol
    basis = np.column_stack([b.vector() for b in cocycle_basis(hol)])
    metric = prob.target.copy()
    if init is None:
        # fat triangles keep the start (all lifts on one hyperboloid) spacelike
        metric = delaunay(metric).metric
    model = _Model(hol, metric, basis)
    x = default_init(prob) if init is None else _adapt(hol, init, basis)
    tol = cfg.sol_tol * prob.diameter
    fold_tol = 1e-9 * prob.diameter
    start = model.lengths(x)
    if start is None:
        raise NoConvergence("initial configuration has a non-spacelike chord")
    history = []
    t, dt = 0.0, 1.0 / max(1, cfg.continuation_steps if init is None else 1)
    total_it = flips = stale = 0
    best = np.inf
    # unfold the start: at t = 0 a flipped edge starts at its current chord
    while t == 0.0 and flips <= cfg.max_flips:
        out = _flip_reflex(model, x, metric, start, 0.0, fold_tol)
        if out is None:
            break
        metric, start = out
        model.set_metric(metric)
        flips += 1
    while True:
        t_next = min(1.0, t + dt)
        goal = _interp(start, metric.lengths, t_next)
        try:
            x_new, res, it = _newton(model, x, goal, cfg, tol)
        except NoConvergence:
            dt /= 2
            if dt < 1e-3:
                raise NoConvergence("continuation step collapsed", t=t, flips=flips)
            continue
        x, t = x_new, t_next
        total_it += it
        history.append({"t": t, "residual": float(res), "iterations": it})
        dt = min(2 * dt, 1.0 - t) if t < 1 else dt
        # fix folds before moving on
        while True:
            out = _flip_reflex(model, x, metric, start, t, fold_tol)
            if out is None:
                break
            metric, start = out
            model.set_metric(metric)
            flips += 1
            if flips > cfg.max_flips:
                raise CombinatorialChurn("flip budget exhausted", flips=flips)
            goal = _interp(start, metric.lengths, t)
            try:
                x, res, it = _newton(model, x, goal, cfg, tol)
            except NoConvergence as exc:
                raise NoConvergence("no solution after a flip", t=t, flips=flips) from exc
            total_it += it
            if res < best * 0.999:
                best, stale = res, 0
            else:
                stale += 1
                if stale > cfg.churn_limit:
                    raise CombinatorialChurn("flips without residual decrease", flips=flips)
        if t >= 1.0:
            break
        if dt <= 0:
            dt = 1.0 - t
    return _finish(prob, model, x, basis, res, total_it, flips, history)


def _finish(prob, model, x, basis, res, iterations, flips, history):
    hol = prob.hol
    c, P = model.split(x)
    tau = Cocycle.from_vector(basis @ c)
    p = MarkedSpacetime(hol, tau, P, prob.target.labels)
    if hol.coords is not None:
        xd, frame = tangent_coords(hol, tau), "fn_tangent"
    else:
        xd, frame = c.copy(), "slice"
    surface = cell = None
    if prob.certify:
        surface, _ = future_hull(p, cfg=prob.cfg.hull)
        ok, rep = compare(induced_metric(surface), prob.target, prob.compare_tol)
        if not ok:
            raise NoConvergence("realized hull does not carry the target metric", report=str(rep))
        cell = gauss_image(surface)
    return EmbeddingSolution(p, surface, cell, xd, float(res), iterations, model.metric.copy(), c,
                             flips, history, frame)


# ------------------------------------------------------------- functionals

def surface_length(sol: EmbeddingSolution) -> float:
    """sum theta_e l_e over the tracked triangulation (flat diagonals contribute zero)."""
    basis = np.column_stack([b.vector() for b in cocycle_basis(sol.spacetime.hol)])
    model = _Model(sol.spacetime.hol, sol.metric, basis)
    x = np.concatenate([sol.slice_coords, sol.spacetime.lifts.reshape(-1)])
    theta, _ = model.bends(x)
    return float(theta @ model.lengths(x))


def _hol(rho) -> Holonomy:
    return build_holonomy(rho) if isinstance(rho, TeichCoords) else rho


def vector_field_xd(d: FlatConeMetric, rho, init: MarkedSpacetime | None = None,
                    cfg: SolverConfig | None = None, certify: bool = False) -> np.ndarray:
    prob = EmbeddingProblem(_hol(rho), d, cfg or SolverConfig(), certify=certify)
    return solve_embedding(prob, init).xd


def total_length_Ld(d: FlatConeMetric, rho, init: MarkedSpacetime | None = None,
                    cfg: SolverConfig | None = None, certify: bool = False) -> float:
    """L_d(rho); with certify the hull's cellulation sum is returned."""
    prob = EmbeddingProblem(_hol(rho), d, cfg or SolverConfig(), certify=certify)
    sol = solve_embedding(prob, init)
    if certify:
        return total_length(sol.cellulation)
    return surface_length(sol)


# ------------------------------------------------- simultaneous uniformization

class _Tracked:
    """X_d and L_d along a path in Teichmuller space, warm-started from the last solve."""

    def __init__(self, d: FlatConeMetric, cfg: SolverConfig, init: MarkedSpacetime | None):
        self.d = d
        self.cfg = cfg
        self.last = init
        self.last_x = None

    def solve(self, x, genus, hol=None, commit=True):
        hol = hol or build_holonomy(TeichCoords.from_vector(genus, x))
        prob = EmbeddingProblem(hol, self.d, self.cfg, certify=False)
        start = self.last
        if start is not None and self.last_x is not None and np.abs(x - self.last_x).max() > 0.05:
            sol = self._walk(x, genus)
        else:
            sol = solve_embedding(prob, start)
        if commit:
            self.last, self.last_x = sol.spacetime, np.array(x, float)
        return sol

    def _walk(self, x, genus):
        """Continuation in rho from the last solution in small steps."""
        x0 = self.last_x
        k = int(np.ceil(np.abs(x - x0).max() / 0.05))
        cur = self.last
        for s in np.linspace(0, 1, k + 1)[1:]:
            hol = build_holonomy(TeichCoords.from_vector(genus, x0 + s * (x - x0)))
            sol = solve_embedding(EmbeddingProblem(hol, self.d, self.cfg, certify=False), cur)
            cur = sol.spacetime
        return sol


@dataclass
class UniformizationResult:
    coords: TeichCoords
    solutions: tuple
    F: np.ndarray
    jacobian: np.ndarray
    iterations: int
    history: list

    @property
    def tau_norm(self) -> float:
        return float(np.linalg.norm(self.solutions[0].xd))


def _fd_jacobian(fun, x, f0, h):
    cols = []
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = h
        cols.append((fun(x + e, commit=False) - fun(x - e, commit=False)) / (2 * h))
    return np.column_stack(cols)


def simultaneous_uniformization(d1: FlatConeMetric, d2: FlatConeMetric, init: TeichCoords,
                                cfg: SolverConfig | None = None, inits=(None, None),
                                tol: float = 1e-7, max_iter: int = 30, fd_step: float = 1e-4,
                                trust: float = 0.5) -> UniformizationResult:
    """Root of F = X_d1 + X_d2 over FN coordinates by Broyden steps in a trust region.

    Falls back to finite-difference descent on L_d1 + L_d2 when a step fails to reduce |F|.
    """
    cfg = cfg or SolverConfig()
    g = init.genus
    tr = (_Tracked(d1, cfg, inits[0]), _Tracked(d2, cfg, inits[1]))

    def F(x, commit=True):
        hol = build_holonomy(TeichCoords.from_vector(g, x))
        return sum(t.solve(x, g, hol, commit).xd for t in tr)

    def L(x):
        hol = build_holonomy(TeichCoords.from_vector(g, x))
        return sum(surface_length(t.solve(x, g, hol, commit=False)) for t in tr)

    x = init.vector().astype(float)
    f = F(x)
    B = _fd_jacobian(F, x, f, fd_step)
    history = [{"x": x.tolist(), "F": float(np.linalg.norm(f))}]
    it = 0
    while np.linalg.norm(f) > tol:
        it += 1
        if it > max_iter:
            best = min(history, key=lambda h: h["F"])
            raise NoConvergence("simultaneous uniformization did not converge",
                                F=float(np.linalg.norm(f)), best_x=best["x"], best_F=best["F"],
                                iterations=it - 1)
        step = -np.linalg.lstsq(B, f, rcond=None)[0]
        nstep = np.linalg.norm(step)
        if nstep > trust:
            step *= trust / nstep
        try:
            fn = F(x + step, commit=False)
        except GeometryError:
            fn = None
        if fn is not None and np.linalg.norm(fn) < np.linalg.norm(f):
            # Broyden rank-one update
            B = B + np.outer(fn - f - B @ step, step) / (step @ step)
            x = x + step
            f = F(x)
            trust = min(2 * trust, 1.0)
        else:
            trust /= 2
            if trust < 1e-6:
                # descent on L_d1 + L_d2 with a central-difference gradient
                grad = np.array([(L(x + fd_step * e) - L(x - fd_step * e)) / (2 * fd_step)
                                 for e in np.eye(len(x))])
                x = x - 0.1 * grad / max(1.0, np.linalg.norm(grad))
                f = F(x)
                trust = 0.1
            B = _fd_jacobian(F, x, f, fd_step)
        history.append({"x": x.tolist(), "F": float(np.linalg.norm(f))})
    Jf = _fd_jacobian(F, x, f, fd_step)
    coords = TeichCoords.from_vector(g, x)
    hol = build_holonomy(coords)
    sols = tuple(solve_embedding(EmbeddingProblem(hol, t.d, cfg), t.last) for t in tr)
    return UniformizationResult(coords, sols, f, Jf, it, history)


def length_gradient_hessian(ds, coords: TeichCoords, inits, cfg: SolverConfig | None = None,
                            h: float = 1e-3, hessian: bool = True):
    """Central-difference gradient (and Hessian) of sum_i L_{d_i} over FN coordinates."""
    cfg = cfg or SolverConfig()
    g = coords.genus
    x0 = coords.vector()
    n = len(x0)

    def L(x):
        hol = build_holonomy(TeichCoords.from_vector(g, x))
        return sum(surface_length(solve_embedding(EmbeddingProblem(hol, d, cfg, certify=False), p))
                   for d, p in zip(ds, inits))

    E = np.eye(n) * h
    f0 = L(x0)
    fp = np.array([L(x0 + E[i]) for i in range(n)])
    fm = np.array([L(x0 - E[i]) for i in range(n)])
    grad = (fp - fm) / (2 * h)
    if not hessian:
        return f0, grad, None
    H = np.diag((fp - 2 * f0 + fm) / h ** 2)
    for i in range(n):
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (L(x0 + E[i] + E[j]) - L(x0 + E[i] - E[j])
                                 - L(x0 - E[i] + E[j]) + L(x0 - E[i] - E[j])) / (4 * h * h)
    return f0, grad, H


def length_along_ray(d: FlatConeMetric, coords: TeichCoords, direction, steps, init: MarkedSpacetime,
                     cfg: SolverConfig | None = None):
    """L_d at coords + s * direction for each s in steps (continuation between samples)."""
    cfg = cfg or SolverConfig()
    tr = _Tracked(d, cfg, init)
    tr.last_x = coords.vector().copy()
    out = []
    for s in steps:
        x = coords.vector() + s * np.asarray(direction, float)
        sol = tr.solve(x, coords.genus)
        out.append(surface_length(sol))
    return np.array(out)


# ---------------------------------------------------------------- Schlafli

_TET_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _tet_angles(X):
    """Signed exterior dihedral angles and lengths of a tetrahedron with spacelike faces."""
    faces = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]   # face i is opposite vertex i
    N = []
    for i, (a, b, c) in enumerate(faces):
        n = mcross(X[b] - X[a], X[c] - X[a])
        q = -mdot(n, n)
        if q <= 0:
            return None
        n = n / np.sqrt(q)
        if mdot(X[i] - X[a], n) > 0:   # point outward, away from the opposite vertex
            n = -n
        N.append(n)
    theta, ell = [], []
    for (i, j) in _TET_EDGES:
        # the edge ij is shared by the faces opposite the two other vertices
        k, m = [v for v in range(4) if v not in (i, j)]
        same = mdot(N[k], N[m]) < 0
        dn = N[k] - N[m] if same else N[k] + N[m]
        th = 2 * np.arcsinh(0.5 * np.sqrt(max(mdot(dn, dn), 0.0)))
        theta.append(th if same else -th)
        D = X[j] - X[i]
        ell.append(np.sqrt(mdot(D, D)))
    return np.array(theta), np.array(ell)


def _random_tet(rng, degenerate=False):
    while True:
        r = rng.uniform(0.2, 1.5, 4)
        phi = rng.uniform(0, 2 * np.pi, 4)
        X = np.column_stack([np.cosh(r), np.sinh(r) * np.cos(phi), np.sinh(r) * np.sin(phi)])
        X *= rng.uniform(0.7, 1.4, 4)[:, None]
        if degenerate:
            # squash towards the plane through the first three vertices
            n = mcross(X[1] - X[0], X[2] - X[0])
            s = mdot(X[3] - X[0], n) / mdot(n, n)
            X[3] -= (1 - rng.uniform(0.02, 0.1)) * s * n
        out = _tet_angles(X)
        if out is not None and out[1].min() > 1e-2 and _face_margin(X) > 0.2:
            return X


def _face_margin(X):
    """min over faces of -<n,n> / |n|_E^2, 1 for a horizontal face, 0 for a lightlike one."""
    m = np.inf
    for a, b, c in [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]:
        n = mcross(X[b] - X[a], X[c] - X[a])
        m = min(m, -mdot(n, n) / (n @ n))
    return m


def schlafli_residuals(trials: int, step: float = 1e-5, seed: int = 0, rigid: bool = False):
    """|sum_e theta_e' l_e| for random tetrahedra and vertex velocities (central differences)."""
    from .minkowski import exp_so21
    rng = np.random.default_rng(seed)
    out = []
    for i in range(trials):
        X = _random_tet(rng, degenerate=(i % 5 == 4))
        if rigid:
            A = rng.standard_normal((3, 3))
            L = (A - J @ A.T @ J) / 2   # in so(2,1)
            b = rng.standard_normal(3)

            def move(s):
                return X @ exp_so21(s * L).T + s * b
        else:
            V = rng.standard_normal((4, 3))

            def move(s):
                return X + s * V
        tp, _ = _tet_angles(move(step))
        tm, _ = _tet_angles(move(-step))
        _, ell = _tet_angles(X)
        out.append(abs(((tp - tm) / (2 * step)) @ ell))
    return np.array(out)


def schlafli_check(trials: int, step: float = 1e-5, seed: int = 0) -> float:
    if trials < 1:
        raise ValueError("trials >= 1")
    return float(schlafli_residuals(trials, step, seed).max())
