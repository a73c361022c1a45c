"""Surface groups, Fuchsian holonomies in Fenchel-Nielsen coordinates, cocycles.

Words are tuples of nonzero ints: generator ``a_i`` is ``2i-1``, ``b_i`` is ``2i``
(1-based), and ``-k`` is the inverse letter.

Pants decomposition used by the FN chart (genus g):

* ``alpha_i``   -- the curve ``a_i``                                   (g curves)
* ``c_k``       -- the separating curve ``[a1,b1]...[ak,bk]``, k < g    (g-1 curves)
* ``delta_k``   -- the boundary ``[ak,bk]`` of the k-th handle, 1<k<g   (g-2 curves)

``fn_lengths`` and ``fn_twists`` list the curves in that order.  For g = 2 that
is ``(alpha_1, alpha_2, gamma)`` with ``gamma = [a1,b1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import mpmath
import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_TOL
from .errors import DegenerateRepresentation, NonFuchsian
from .minkowski import J, boost, is_lorentz, lorentz_inv, mcross, rotation

Word = tuple


# ----------------------------------------------------------------- words

def gen_name(k: int) -> str:
    i = (abs(k) + 1) // 2
    s = ("a" if abs(k) % 2 == 1 else "b") + str(i)
    return s if k > 0 else s + "^-1"


def gen_index(name: str) -> int:
    """'a1' -> 1, 'b1' -> 2, 'a2' -> 3 ..."""
    kind, i = name[0], int(name[1:])
    return 2 * i - 1 if kind == "a" else 2 * i


def reduce_word(w: Sequence[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def word_mul(*ws: Sequence[int]) -> Word:
    out: tuple = ()
    for w in ws:
        out = reduce_word(out + tuple(w))
    return out


@dataclass(frozen=True)
class Presentation:
    genus: int

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")

    @property
    def n_gens(self) -> int:
        return 2 * self.genus

    @property
    def generators(self) -> list[str]:
        return [gen_name(k) for k in range(1, self.n_gens + 1)]

    @property
    def relator(self) -> Word:
        w = []
        for i in range(self.genus):
            a, b = 2 * i + 1, 2 * i + 2
            w += [a, b, -a, -b]
        return tuple(w)

    def letters(self) -> list[int]:
        return [s * k for k in range(1, self.n_gens + 1) for s in (1, -1)]


# ----------------------------------------------------------------- SL(2,R)
# The pants gluing runs in extended precision (object arrays of mpf) so that
# the relator survives the ill-conditioned axis frames of higher genus.

_DPS = 40


def _mp(x):
    return np.array(x, dtype=object)


def _T(l):
    e = mpmath.exp(mpmath.mpf(l) / 2)
    return _mp([[e, mpmath.mpf(0)], [mpmath.mpf(0), 1 / e]])


def _S(d):
    c, s = mpmath.cosh(mpmath.mpf(d) / 2), mpmath.sinh(mpmath.mpf(d) / 2)
    return _mp([[c, s], [s, c]])


_W = _mp([[mpmath.mpf(0), mpmath.mpf(-1)], [mpmath.mpf(1), mpmath.mpf(0)]])


def _inv2(g):
    return np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]], dtype=g.dtype)


def _tofloat(g):
    return np.array([[float(x) for x in row] for row in g])


def _adjoint_exact(g) -> np.ndarray:
    g = np.asarray(g)
    cols = []
    for e in np.eye(3):
        X = np.array([[e[0] + e[1], e[2]], [e[2], e[0] - e[1]]]).astype(g.dtype)
        Y = g @ X @ g.T
        cols.append([(Y[0, 0] + Y[1, 1]) / 2, (Y[0, 0] - Y[1, 1]) / 2, Y[0, 1]])
    return np.array(cols, dtype=object).T


def _tolong(g):
    return np.array([[np.longdouble(mpmath.nstr(x, 30)) if isinstance(x, mpmath.mpf) else np.longdouble(x)
                      for x in row] for row in g], dtype=np.longdouble)


def adjoint(g) -> np.ndarray:
    """Image of g in SL(2,R) under x -> g X(x) g^T, X(x) = [[x0+x1, x2], [x2, x0-x1]]."""
    return _tofloat(_adjoint_exact(g))


def _axis_frame(h):
    """V in SL(2,R) with V^-1 h V = +-diag(lam, 1/lam), |lam| > 1."""
    a, b, c, d = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    t = a + d
    disc = t * t - 4
    if disc <= 0:
        raise NonFuchsian("element is not hyperbolic", trace=float(t))
    lam1 = (t + mpmath.sign(t) * mpmath.sqrt(disc)) / 2
    cols = []
    for lam in (lam1, 1 / lam1):
        v1, v2 = (b, lam - a), (lam - d, c)
        v = v1 if v1[0] ** 2 + v1[1] ** 2 > v2[0] ** 2 + v2[1] ** 2 else v2
        n = mpmath.sqrt(v[0] ** 2 + v[1] ** 2)
        cols.append((v[0] / n, v[1] / n))
    V = _mp([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])
    det = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    if det < 0:
        V[:, 1] = -V[:, 1]
        det = -det
    return V / mpmath.sqrt(det)


def _conjugator(p, q, twist=0.0):
    """E with E p E^-1 = +-q, composed with a translation by ``twist`` along the axis of q."""
    vp, vq = _axis_frame(p), _axis_frame(q)
    return vq @ _T(twist) @ _inv2(vp)


def _pants(l1, l2, l3):
    """X, Y, Z in SL(2,R) with XYZ = I and |tr| = 2 cosh(l_i/2)."""
    l1, l2, l3 = mpmath.mpf(l1), mpmath.mpf(l2), mpmath.mpf(l3)
    ch1, ch2, ch3 = mpmath.cosh(l1 / 2), mpmath.cosh(l2 / 2), mpmath.cosh(l3 / 2)
    sh1, sh2 = mpmath.sinh(l1 / 2), mpmath.sinh(l2 / 2)
    d = mpmath.acosh((ch3 + ch1 * ch2) / (sh1 * sh2))
    X = _T(l1)
    best = None
    for s in (1, -1):
        Y = _S(d) @ _T(s * l2) @ _S(-d)
        err = abs(np.trace(X @ Y) + 2 * ch3)
        if best is None or err < best[0]:
            best = (err, Y)
    Y = best[1]
    Z = _inv2(X @ Y)
    return X, Y, Z


def _handle(l_alpha, t_alpha, l_bdry):
    """One-holed torus (A, B) with tr A = 2cosh(l_alpha/2) and [A,B] of length l_bdry."""
    X, Y, Z = _pants(l_alpha, l_alpha, l_bdry)
    # B maps the axis of X to the axis of Y^-1
    B = _conjugator(X, _inv2(Y)) @ _T(t_alpha)
    return X, B


def _sym_exp(x):
    x0, x1 = mpmath.mpf(x[0]), mpmath.mpf(x[1])
    r = mpmath.sqrt(x0 ** 2 + x1 ** 2)
    if r == 0:
        return _mp([[mpmath.mpf(1), mpmath.mpf(0)], [mpmath.mpf(0), mpmath.mpf(1)]])
    c, s = mpmath.cosh(r), mpmath.sinh(r) / r
    return _mp([[c + s * x0, s * x1], [s * x1, c - s * x0]])


def _recenter(gens):
    """Conjugate by a positive symmetric P so that sum |P g P^-1|_F^2 is minimal."""
    fl = [_tofloat(h) for h in gens]

    def cost(x):
        r = np.hypot(x[0], x[1])
        S = np.array([[x[0], x[1]], [x[1], -x[0]]])
        sc = np.sinh(r) / r if r > 0 else 1.0
        P = np.cosh(r) * np.eye(2) + sc * S
        Pi = np.cosh(r) * np.eye(2) - sc * S
        return np.log(sum(np.sum((P @ h @ Pi) ** 2) for h in fl))

    x = minimize(cost, np.zeros(2), method="Nelder-Mead",
                 options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 2000}).x
    # Nelder-Mead stalls ~1e-7 from the minimum; polish with Newton on central differences
    h = 1e-4
    E = np.eye(2) * h
    for _ in range(3):
        f0 = cost(x)
        g = np.array([(cost(x + E[i]) - cost(x - E[i])) / (2 * h) for i in range(2)])
        H = np.empty((2, 2))
        for i in range(2):
            H[i, i] = (cost(x + E[i]) - 2 * f0 + cost(x - E[i])) / h ** 2
        H[0, 1] = H[1, 0] = (cost(x + E[0] + E[1]) - cost(x + E[0] - E[1])
                             - cost(x - E[0] + E[1]) + cost(x - E[0] - E[1])) / (4 * h * h)
        x = x - np.linalg.solve(H, g)
    P, Pi = _sym_exp(x), _sym_exp(-x)
    return [P @ h @ Pi for h in gens]


def _comm(a, b):
    return a @ b @ _inv2(a) @ _inv2(b)


@dataclass(frozen=True)
class TeichCoords:
    genus: int
    fn_lengths: tuple
    fn_twists: tuple

    def __post_init__(self):
        n = 3 * self.genus - 3
        object.__setattr__(self, "fn_lengths", tuple(float(x) for x in self.fn_lengths))
        object.__setattr__(self, "fn_twists", tuple(float(x) for x in self.fn_twists))
        if len(self.fn_lengths) != n or len(self.fn_twists) != n:
            raise ValueError(f"expected {n} lengths and {n} twists for genus {self.genus}")

    def vector(self) -> np.ndarray:
        return np.array(self.fn_lengths + self.fn_twists)

    @classmethod
    def from_vector(cls, genus: int, x) -> "TeichCoords":
        n = 3 * genus - 3
        x = np.asarray(x, dtype=float)
        return cls(genus, tuple(x[:n]), tuple(x[n:]))

    def curve_names(self) -> list[str]:
        g = self.genus
        return ([f"alpha{i}" for i in range(1, g + 1)]
                + [f"c{k}" for k in range(1, g)]
                + [f"delta{k}" for k in range(2, g)])

    def to_dict(self) -> dict:
        return {"genus": self.genus, "fn_lengths": list(self.fn_lengths),
                "fn_twists": list(self.fn_twists)}


@dataclass(frozen=True, eq=False)
class Holonomy:
    genus: int
    images: tuple  # SO_0(2,1) matrices, one per generator
    sl2: tuple | None = None
    coords: TeichCoords | None = None
    precise: tuple | None = None   # the same images in extended precision, when known

    @property
    def presentation(self) -> Presentation:
        return Presentation(self.genus)

    @cached_property
    def _inverses(self):
        return tuple(lorentz_inv(m) for m in self.images)

    def letter(self, k: int) -> np.ndarray:
        return self.images[k - 1] if k > 0 else self._inverses[-k - 1]

    def mat(self, w: Sequence[int]) -> np.ndarray:
        m = np.eye(3)
        for k in w:
            m = m @ self.letter(k)
        return m

    @cached_property
    def _long(self):
        base = self.precise if self.precise is not None else tuple(
            np.asarray(m, dtype=np.longdouble) for m in self.images)
        Jl = np.diag(np.array([-1, 1, 1], dtype=np.longdouble))
        return base, tuple(Jl @ m.T @ Jl for m in base)

    def letter_long(self, k: int) -> np.ndarray:
        base, inv = self._long
        return base[k - 1] if k > 0 else inv[-k - 1]

    def mat_long(self, w: Sequence[int]) -> np.ndarray:
        m = np.eye(3, dtype=np.longdouble)
        for k in w:
            m = m @ self.letter_long(k)
        return m

    def sl2_mat(self, w: Sequence[int]) -> np.ndarray:
        if self.sl2 is None:
            raise ValueError("no SL(2,R) lift stored")
        m = np.eye(2)
        for k in w:
            g = self.sl2[abs(k) - 1]
            m = m @ (g if k > 0 else np.linalg.inv(g))
        return m

    @cached_property
    def relator_residual(self) -> float:
        return float(np.linalg.norm(self.mat(self.presentation.relator) - np.eye(3)))

    def images_dict(self) -> dict:
        return {gen_name(k): self.images[k - 1] for k in range(1, 2 * self.genus + 1)}

    def to_dict(self) -> dict:
        out = {"genus": self.genus,
               "generators": {k: v.tolist() for k, v in self.images_dict().items()},
               "relator_residual": self.relator_residual}
        if self.coords is not None:
            out.update(self.coords.to_dict())
        return out


def _check_fuchsian(images, genus):
    for k, m in enumerate(images, 1):
        # hyperbolic iff trace > 3 in SO(2,1)
        if not np.trace(m) > 3.0 + 1e-12:
            raise NonFuchsian("generator is not hyperbolic", generator=gen_name(k),
                              trace=float(np.trace(m)))


def build_holonomy(coords: TeichCoords, tol: float = DEFAULT_TOL.relator) -> Holonomy:
    """Fuchsian holonomy from FN coordinates by gluing pants in SL(2,R)."""
    g = coords.genus
    L = np.asarray(coords.fn_lengths)
    tw = np.asarray(coords.fn_twists)
    if not np.all(np.isfinite(L)) or not np.all(np.isfinite(tw)) or np.any(L <= 0):
        raise NonFuchsian("FN lengths must be finite and positive", lengths=L.tolist())
    la, lc, ld = L[:g], L[g:2 * g - 1], L[2 * g - 1:]
    ta, tc, td = tw[:g], tw[g:2 * g - 1], tw[2 * g - 1:]

    def bdry(i):  # length of the boundary of handle i (0-based)
        if i == 0:
            return lc[0]
        if i == g - 1:
            return lc[g - 2]
        return ld[i - 1]

    with mpmath.workdps(_DPS):
        gens = list(_handle(la[0], ta[0], bdry(0)))
        for i in range(1, g):
            A, B = _handle(la[i], ta[i], bdry(i))
            D = _comm(A, B)
            # put the current separating curve on the standard axis, then twist along it
            C = _mp(np.eye(2)) * mpmath.mpf(1)
            for j in range(i):
                C = C @ _comm(gens[2 * j], gens[2 * j + 1])
            V = _axis_frame(C) @ _T(-tc[i - 1])
            gens = [_inv2(V) @ h @ V for h in gens]
            if i < g - 1:
                _, Y, _ = _pants(lc[i - 1], ld[i - 1], lc[i])
                E = _conjugator(D, Y, td[i - 1])
            else:
                E = _W @ _inv2(_axis_frame(D))
            gens = _recenter(gens + [E @ A @ _inv2(E), E @ B @ _inv2(E)])
        exact = [_adjoint_exact(h) for h in gens]
        images = tuple(_tofloat(m) for m in exact)
        precise = tuple(_tolong(m) for m in exact)
        gens = [_tofloat(h) for h in gens]
    _check_fuchsian(images, g)
    hol = Holonomy(g, images, tuple(gens), coords, precise)
    # rounding the generators to double limits the residual to ~eps * |rho|^(2g)
    if hol.relator_residual > tol * max(1.0, max(np.abs(m).max() for m in images)) ** 2:
        raise NonFuchsian("relator not satisfied", residual=hol.relator_residual)
    return hol


def holonomy_from_matrices(mats: Sequence, genus: int | None = None,
                           tol: float = DEFAULT_TOL.relator, precise=None) -> Holonomy:
    mats = tuple(np.asarray(m, dtype=float) for m in mats)
    genus = genus or len(mats) // 2
    if len(mats) != 2 * genus:
        raise ValueError("need 2g generator images")
    for m in mats:
        if not is_lorentz(m, 1e-8):
            raise NonFuchsian("generator image not in SO_0(2,1)")
    _check_fuchsian(mats, genus)
    hol = Holonomy(genus, mats, precise=None if precise is None else tuple(precise))
    if hol.relator_residual > tol * max(1.0, max(np.abs(m).max() for m in mats)):
        raise NonFuchsian("relator not satisfied", residual=hol.relator_residual)
    return hol


# --------------------------------------------------------------- octagon

OCTAGON_INRADIUS = float(np.arccosh(1.0 + np.sqrt(2.0)))


def octagon_holonomy() -> Holonomy:
    """Side pairings of the regular octagon with all angles pi/4, centred at ORIGIN.

    Side k has its midpoint in direction k*pi/4; boundary labels read
    a1 b1^-1 a1^-1 b1 a2 b2^-1 a2^-1 b2 counter-clockwise.
    """
    labels = [1, -2, -1, 2, 3, -4, -3, 4]

    with mpmath.workdps(_DPS):
        r = mpmath.acosh(1 + mpmath.sqrt(2))

        def rot(t):
            c, s = mpmath.cos(t), mpmath.sin(t)
            return mpmath.matrix([[1, 0, 0], [0, c, -s], [0, s, c]])

        def bst(t):
            c, s = mpmath.cosh(t), mpmath.sinh(t)
            return mpmath.matrix([[c, s, 0], [s, c, 0], [0, 0, 1]])

        def pair(i, j):  # maps side i onto side j, polygon to the outside
            return rot(j * mpmath.pi / 4) * bst(2 * r) * rot(mpmath.pi - i * mpmath.pi / 4)

        exact = [pair(labels.index(-k), labels.index(k)).tolist() for k in range(1, 5)]
        images = [_tofloat(m) for m in exact]
        precise = [_tolong(m) for m in exact]
    return holonomy_from_matrices(images, 2, precise=precise)


def side_pairing_labels() -> list[int]:
    return [1, -2, -1, 2, 3, -4, -3, 4]


# --------------------------------------------------------------- cocycles

@dataclass(frozen=True, eq=False)
class Cocycle:
    values: np.ndarray  # shape (2g, 3)

    def __post_init__(self):
        object.__setattr__(self, "values", np.array(self.values, dtype=float).reshape(-1, 3))

    @classmethod
    def zero(cls, genus: int) -> "Cocycle":
        return cls(np.zeros((2 * genus, 3)))

    @classmethod
    def from_vector(cls, v) -> "Cocycle":
        return cls(np.asarray(v, dtype=float).reshape(-1, 3))

    @classmethod
    def coboundary(cls, hol: Holonomy, v) -> "Cocycle":
        v = np.asarray(v, dtype=float)
        return cls(np.array([m @ v - v for m in hol.images]))

    def vector(self) -> np.ndarray:
        return self.values.reshape(-1).copy()

    def __add__(self, other):
        return Cocycle(self.values + other.values)

    def __sub__(self, other):
        return Cocycle(self.values - other.values)

    def __mul__(self, s):
        return Cocycle(self.values * s)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"values": {gen_name(k): self.values[k - 1].tolist()
                           for k in range(1, len(self.values) + 1)}}

    @classmethod
    def from_dict(cls, d: dict) -> "Cocycle":
        vals = d["values"]
        n = len(vals)
        arr = np.zeros((n, 3))
        for name, x in vals.items():
            arr[gen_index(name) - 1] = x
        return cls(arr)


def eval_word(hol: Holonomy, tau: Cocycle | None, w: Sequence[int]):
    """(rho(w), tau(w)) via tau(gm) = rho(g) tau(m) + tau(g)."""
    R = np.eye(3)
    t = np.zeros(3)
    vals = None if tau is None else tau.values
    for k in w:
        m = hol.letter(k)
        if vals is not None:
            tk = vals[k - 1] if k > 0 else -(m @ vals[-k - 1])
            t = R @ tk + t
        R = R @ m
    return R, t


def precise_cocycle(hol: Holonomy, tau: Cocycle, sweeps: int = 2) -> np.ndarray:
    """tau's values in extended precision, nudged so that tau(relator) vanishes to that precision.

    Rounding tau to double leaves tau(relator) at eps * |rho|^(2g); the correction is of
    that size and removes the resulting mismatch between different words for one element.
    """
    n = 2 * hol.genus
    vals = np.asarray(tau.values, dtype=np.longdouble).copy()
    M = relator_constraint_matrix(hol)
    Mp = np.linalg.pinv(M)
    rel = hol.presentation.relator
    for _ in range(sweeps):
        t = np.zeros(3, dtype=np.longdouble)
        R = np.eye(3, dtype=np.longdouble)
        for k in rel:
            m = hol.letter_long(k)
            tk = vals[k - 1] if k > 0 else -(m @ vals[-k - 1])
            t = R @ tk + t
            R = R @ m
        vals -= (Mp @ t.astype(float)).astype(np.longdouble).reshape(n, 3)
    return vals


def eval_word_long(hol: Holonomy, vals, w: Sequence[int]):
    """Extended precision (rho(w), tau(w)) from precise cocycle values."""
    R = np.eye(3, dtype=np.longdouble)
    t = np.zeros(3, dtype=np.longdouble)
    for k in w:
        m = hol.letter_long(k)
        if vals is not None:
            tk = vals[k - 1] if k > 0 else -(m @ vals[-k - 1])
            t = R @ tk + t
        R = R @ m
    return R, t


def affine(hol: Holonomy, tau: Cocycle | None, w: Sequence[int]) -> np.ndarray:
    """4x4 matrix [[rho(w), tau(w)], [0, 1]]."""
    R, t = eval_word(hol, tau, w)
    out = np.eye(4)
    out[:3, :3] = R
    out[:3, 3] = t
    return out


def relator_constraint_matrix(hol: Holonomy) -> np.ndarray:
    """3 x 6g matrix M with tau(relator) = M @ tau.vector()."""
    n = 2 * hol.genus
    rel = hol.presentation.relator
    M = np.zeros((3, 3 * n))
    for c in range(3 * n):
        e = np.zeros(3 * n)
        e[c] = 1.0
        M[:, c] = eval_word(hol, Cocycle.from_vector(e), rel)[1]
    return M


def coboundary_matrix(hol: Holonomy) -> np.ndarray:
    """6g x 3 matrix of v -> (rho(g_i) v - v)_i."""
    return np.vstack([m - np.eye(3) for m in hol.images])


_MIX_SEED = 20240611


def _null_space(A, rtol=1e-10):
    u, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > rtol * max(1.0, s[0])))
    return vt[rank:].T, rank


def cocycle_basis(hol: Holonomy) -> list[Cocycle]:
    """Orthonormal basis of the slice Z^1 cap (B^1)^perp, 6g-6 cocycles."""
    Q = _slice_basis(hol)
    return [Cocycle.from_vector(Q[:, j]) for j in range(Q.shape[1])]


def _slice_basis(hol: Holonomy) -> np.ndarray:
    cached = getattr(hol, "_slice_cache", None)
    if cached is not None:
        return cached
    K = coboundary_matrix(hol)
    sk = np.linalg.svd(K, compute_uv=False)
    if np.sum(sk > 1e-10 * max(1.0, sk[0])) < 3:
        raise DegenerateRepresentation("coboundary map has rank < 3")
    N, _ = _null_space(np.vstack([relator_constraint_matrix(hol), K.T]))
    P = N @ N.T
    n = 3 * 2 * hol.genus
    M = np.random.default_rng(_MIX_SEED).standard_normal((n, N.shape[1]))
    Y = P @ M
    # Loewdin orthonormalisation keeps the basis smooth in rho
    w, V = np.linalg.eigh(Y.T @ Y)
    Q = Y @ V @ np.diag(w ** -0.5) @ V.T
    object.__setattr__(hol, "_slice_cache", Q)
    return Q


def remove_coboundary(hol: Holonomy, tau: Cocycle):
    """(tau - delta v, v) for the least-squares best coboundary delta v."""
    K = coboundary_matrix(hol)
    v, *_ = np.linalg.lstsq(K, tau.vector(), rcond=None)
    return Cocycle.from_vector(tau.vector() - K @ v), v


def h1_project(hol: Holonomy, tau: Cocycle) -> np.ndarray:
    red, _ = remove_coboundary(hol, tau)
    return _slice_basis(hol).T @ red.vector()


def h1_reconstruct(hol: Holonomy, coords) -> Cocycle:
    return Cocycle.from_vector(_slice_basis(hol) @ np.asarray(coords, dtype=float))


def project_to_cocycles(hol: Holonomy, tau: Cocycle) -> Cocycle:
    """Orthogonal projection of arbitrary generator values onto Z^1(rho)."""
    M = relator_constraint_matrix(hol)
    x = tau.vector()
    corr, *_ = np.linalg.lstsq(M, M @ x, rcond=None)
    return Cocycle.from_vector(x - corr)


def cocycle_residual(hol: Holonomy, tau: Cocycle) -> float:
    return float(np.linalg.norm(eval_word(hol, tau, hol.presentation.relator)[1]))


def random_coords(rng: np.random.Generator, genus: int = 2,
                  length_range=(1.2, 2.5), twist_scale: float = 0.5) -> TeichCoords:
    n = 3 * genus - 3
    L = rng.uniform(*length_range, size=n)
    T = rng.uniform(-twist_scale, twist_scale, size=n)
    return TeichCoords(genus, tuple(L), tuple(T))


# ------------------------------------------------ Teichmuller tangent frame

def so21_vee(X) -> np.ndarray:
    """u with X y = mcross(u, y) for X in so(2,1); equivariant under SO_0(2,1)."""
    E = np.eye(3)
    A = np.zeros((9, 3))
    for i in range(3):
        A[:, i] = np.column_stack([mcross(E[i], E[j]) for j in range(3)]).reshape(-1)
    u, *_ = np.linalg.lstsq(A, np.asarray(X, dtype=float).reshape(-1), rcond=None)
    return u


def tangent_cocycles(coords: TeichCoords, h: float = 1e-5, hol: Holonomy | None = None) -> list[Cocycle]:
    """Cocycles (d rho / d x_k) rho^-1 for each FN coordinate, by central differences.

    Conjugation noise in the normalisation of build_holonomy only adds coboundaries.
    """
    hol = hol or build_holonomy(coords)
    x = coords.vector()
    out = []
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = h
        hp = build_holonomy(TeichCoords.from_vector(coords.genus, x + e))
        hm = build_holonomy(TeichCoords.from_vector(coords.genus, x - e))
        vals = []
        for i, m in enumerate(hol.images):
            D = (hp.images[i] - hm.images[i]) / (2 * h)
            vals.append(so21_vee(D @ J @ m.T @ J))
        out.append(project_to_cocycles(hol, Cocycle(np.array(vals))))
    return out


def tangent_coords(hol: Holonomy, tau: Cocycle) -> np.ndarray:
    """Coordinates of [tau] in the FN tangent frame at rho (needs hol.coords).

    Unlike h1_project this is invariant under conjugating (rho, tau).
    """
    if hol.coords is None:
        raise ValueError("holonomy has no FN coordinates")
    U = getattr(hol, "_tangent_cache", None)
    if U is None:
        U = np.column_stack([c.vector() for c in tangent_cocycles(hol.coords, hol=hol)])
        object.__setattr__(hol, "_tangent_cache", U)
    A = np.hstack([U, coboundary_matrix(hol)])
    sol, *_ = np.linalg.lstsq(A, tau.vector(), rcond=None)
    return sol[:U.shape[1]]


def tangent_reconstruct(hol: Holonomy, a) -> Cocycle:
    """Slice representative of sum a_k u_k."""
    tangent_coords(hol, Cocycle.zero(hol.genus))
    U = hol._tangent_cache
    tau = Cocycle.from_vector(U @ np.asarray(a, dtype=float))
    return remove_coboundary(hol, project_to_cocycles(hol, tau))[0]
