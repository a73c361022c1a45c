"""Minkowski space R^{2,1} and the hyperboloid model of H^2.

Vectors are plain ``numpy`` arrays of shape ``(3,)`` (or ``(..., 3)`` for the
vectorised helpers) with coordinates ``(x0, x1, x2)``, ``x0`` being time.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .config import DEFAULT_TOL
from .errors import DegeneratePair, OffHyperboloid

J = np.diag([-1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0])


def mdot(x, y):
    """Minkowski product -x0*y0 + x1*y1 + x2*y2 (broadcasts over leading axes)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] + x[..., 2] * y[..., 2]


def mnorm2(x):
    return mdot(x, x)


def mcross(x, y):
    """Minkowski cross product: the unique z with <z, w> = det(x, y, w) for all w.

    With this convention mcross(e0, e1) = e2.
    """
    return np.cross(x, y) * np.array([-1.0, 1.0, 1.0])


def hpoint(x, tol: float = DEFAULT_TOL.hpoint_renorm):
    """Project ``x`` onto the future hyperboloid if it is already close to it."""
    x = np.asarray(x, dtype=float)
    q = mnorm2(x)
    if x[0] <= 0 or abs(q + 1.0) > tol * max(1.0, abs(x[0])) ** 2:
        raise OffHyperboloid("point is not on the future hyperboloid", residual=float(q + 1.0))
    return x / np.sqrt(-q)


def normalize_timelike(x):
    """Future unit vector in the direction of the timelike vector ``x`` (or -x)."""
    x = np.asarray(x, dtype=float)
    q = mnorm2(x)
    if q >= 0:
        raise OffHyperboloid("vector is not timelike", residual=float(q))
    x = x / np.sqrt(-q)
    return x if x[0] > 0 else -x


def normalize_spacelike(x):
    x = np.asarray(x, dtype=float)
    q = mnorm2(x)
    if q <= 0:
        raise DegeneratePair("vector is not spacelike", residual=float(q))
    return x / np.sqrt(q)


def hyp_dist(a, b):
    """Hyperbolic distance between hyperboloid points, arccosh(-<a,b>) clamped at 1."""
    return np.arccosh(np.maximum(1.0, -mdot(a, b)))


def unit_tangent(a, b, eps: float = DEFAULT_TOL.geom_eps):
    """Unit vector of T_a H^2 pointing along the geodesic from ``a`` to ``b``."""
    if hyp_dist(a, b) < eps:
        raise DegeneratePair("unit tangent of coincident points")
    u = np.asarray(b, dtype=float) + mdot(a, b) * np.asarray(a, dtype=float)
    return u / np.sqrt(mnorm2(u))


def lambda_iso(v):
    """Element of so(2,1) identified with ``v``: the linear map w -> mcross(v, w)."""
    v = np.asarray(v, dtype=float)
    cols = [mcross(v, e) for e in np.eye(3)]
    return np.column_stack(cols)


def lambda_inv(m):
    """Inverse of :func:`lambda_iso` on so(2,1)."""
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1], -m[2, 0], m[1, 0]])


def exp_so21(m, t: float = 1.0):
    return expm(t * np.asarray(m, dtype=float))


def boost(t: float, axis: int = 1):
    """Hyperbolic translation by ``t`` along the geodesic through ORIGIN in direction e_axis."""
    m = np.eye(3)
    c, s = np.cosh(t), np.sinh(t)
    m[0, 0] = m[axis, axis] = c
    m[0, axis] = m[axis, 0] = s
    return m


def rotation(theta: float):
    """Elliptic rotation about ORIGIN."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def is_lorentz(m, tol: float = DEFAULT_TOL.lorentz_check) -> bool:
    """True if ``m`` lies in SO_0(2,1) up to ``tol``."""
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.abs(m).max())) ** 2
    return bool(
        np.abs(m.T @ J @ m - J).max() <= tol * scale
        and abs(np.linalg.det(m) - 1.0) <= tol * scale
        and m[0, 0] > 0
    )


def lorentz_inv(m):
    """Inverse of a Lorentz matrix, J m^T J."""
    return J @ np.asarray(m).T @ J


def tangent_frame(n):
    """Orthonormal basis (f1, f2) of n^perp, n future unit timelike, with det[n, f1, f2] > 0."""
    n = np.asarray(n, dtype=float)
    # boost taking ORIGIN to n; its columns 1, 2 span n^perp
    x = n[1:]
    r = np.linalg.norm(x)
    if r < 1e-15:
        return np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    u = x / r
    ch = n[0]
    sh = r
    f1 = np.concatenate([[sh], ch * u])
    f2 = np.concatenate([[0.0], [-u[1], u[0]]])
    if np.linalg.det(np.column_stack([n, f1, f2])) < 0:
        f2 = -f2
    return f1, f2


def klein(x):
    """Klein-disk projection (x1/x0, x2/x0)."""
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / x[..., :1]
