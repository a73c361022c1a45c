import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alexandrov_lorentz.errors import DegeneratePair, OffHyperboloid
from alexandrov_lorentz.minkowski import (
    ORIGIN, J, boost, exp_so21, hpoint, hyp_dist, is_lorentz, lambda_inv, lambda_iso,
    mcross, mdot, rotation, tangent_frame, unit_tangent,
)

coord = st.floats(-3, 3, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)


def hpt(x1, x2):
    return np.array([np.sqrt(1 + x1 * x1 + x2 * x2), x1, x2])


hpoints = st.tuples(coord, coord).map(lambda t: hpt(*t))


def random_lorentz(rng):
    return rotation(rng.uniform(0, 6)) @ boost(rng.uniform(-2, 2)) @ rotation(rng.uniform(0, 6))


def test_mdot_examples():
    assert mdot([1, 0, 0], [1, 0, 0]) == -1
    assert mdot([0, 1, 0], [0, 1, 0]) == 1
    assert mdot([1, 1, 0], [1, 1, 0]) == 0


def test_hyp_dist_examples():
    assert hyp_dist(ORIGIN, [np.cosh(1), np.sinh(1), 0]) == pytest.approx(1, abs=1e-12)
    assert hyp_dist(ORIGIN, ORIGIN) == 0
    a = [np.cosh(0.3), np.sinh(0.3), 0]
    b = [np.cosh(1.7), np.sinh(1.7), 0]
    with mpmath.workdps(30):
        ref = mpmath.acosh(mpmath.cosh(0.3) * mpmath.cosh(1.7) - mpmath.sinh(0.3) * mpmath.sinh(1.7))
    assert hyp_dist(a, b) == pytest.approx(float(ref), abs=1e-12)
    assert float(ref) == pytest.approx(1.4, abs=1e-12)


def test_mcross_determinant_identity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.standard_normal((2, 3))
        z = mcross(x, y)
        for w in np.eye(3):
            assert mdot(z, w) == pytest.approx(np.linalg.det(np.column_stack([x, y, w])), abs=1e-12)
    assert np.allclose(mcross([1, 0, 0], [0, 1, 0]), [0, 0, 1])
    assert np.allclose(mcross([1, 2, 3], [2, 4, 6]), 0)


def test_mcross_orthogonality_fuzz():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 1000, 3))
    z = mcross(x, y)
    scale = np.linalg.norm(x, axis=1) * np.linalg.norm(y, axis=1)
    assert np.all(np.abs(mdot(z, x)) <= 1e-14 * scale * 10)
    assert np.all(np.abs(mdot(z, y)) <= 1e-14 * scale * 10)


def test_lambda_iso():
    v = np.array([0.0, 0.0, 1.0])
    for t in (-1.3, 0.4, 2.0):
        m = exp_so21(lambda_iso(v), t)
        assert hyp_dist(ORIGIN, m @ ORIGIN) == pytest.approx(abs(t), abs=1e-10)
        # the geodesic x2 = 0 is preserved as a set
        p = np.array([np.cosh(0.7), np.sinh(0.7), 0.0])
        assert abs((m @ p)[2]) < 1e-12
    assert np.all(lambda_iso([0, 0, 0]) == 0)
    rng = np.random.default_rng(2)
    for _ in range(10):
        u = rng.standard_normal(3)
        L = lambda_iso(u)
        assert np.abs(L.T @ J + J @ L).max() < 1e-14
        assert np.allclose(lambda_inv(L), u)


def test_unit_tangent():
    assert np.allclose(unit_tangent(ORIGIN, [np.cosh(1), np.sinh(1), 0]), [0, 1, 0])
    with pytest.raises(DegeneratePair):
        unit_tangent(ORIGIN, ORIGIN)


@given(hpoints, hpoints)
def test_unit_tangent_properties(a, b):
    if hyp_dist(a, b) < 1e-6:
        return
    u = unit_tangent(a, b)
    assert abs(mdot(u, a)) <= 1e-9 * max(1, a[0] ** 2)
    assert mdot(u, u) == pytest.approx(1, abs=1e-9)


def test_unit_tangent_transport():
    # transport along the geodesic: boost taking a to b carries u_ab to -u_ba
    a = rotation(0.4) @ boost(0.3) @ ORIGIN
    b = rotation(0.4) @ boost(1.9) @ ORIGIN
    T = rotation(0.4) @ boost(1.6) @ rotation(-0.4)
    assert np.allclose(T @ a, b)
    assert np.allclose(T @ unit_tangent(a, b), -unit_tangent(b, a), atol=1e-10)


def test_hpoint_renormalises_or_rejects():
    p = hpt(0.3, -0.2) * (1 + 1e-8)
    assert mdot(hpoint(p), hpoint(p)) == pytest.approx(-1, abs=1e-14)
    with pytest.raises(OffHyperboloid):
        hpoint([1.0, 0.5, 0.0])
    with pytest.raises(OffHyperboloid):
        hpoint(-ORIGIN)


@settings(max_examples=50)
@given(vec, vec, st.integers(0, 2 ** 31))
def test_lorentz_preserves_product(x, y, seed):
    m = random_lorentz(np.random.default_rng(seed))
    assert is_lorentz(m)
    bound = 1e-10 * (1 + np.linalg.norm(x)) * (1 + np.linalg.norm(y)) * max(1, np.abs(m).max() ** 2)
    assert abs(mdot(m @ x, m @ y) - mdot(x, y)) <= bound


@given(hpoints, hpoints, hpoints)
def test_triangle_inequality(a, b, c):
    assert hyp_dist(a, c) <= hyp_dist(a, b) + hyp_dist(b, c) + 1e-10


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(-5, 5), vec)
def test_exp_one_parameter_group(t1, t2, v):
    n = np.linalg.norm(v)
    if n > 1:
        v = v / n
    L = lambda_iso(v)
    lhs = exp_so21(L, t1) @ exp_so21(L, t2)
    rhs = exp_so21(L, t1 + t2)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1, np.abs(rhs).max())


def test_tangent_frame():
    for n in (ORIGIN, hpt(0.5, -1.2), hpt(3, 2)):
        f1, f2 = tangent_frame(n)
        assert mdot(f1, f1) == pytest.approx(1) and mdot(f2, f2) == pytest.approx(1)
        assert abs(mdot(f1, f2)) < 1e-12 and abs(mdot(f1, n)) < 1e-12 and abs(mdot(f2, n)) < 1e-12
        assert np.linalg.det(np.column_stack([n, f1, f2])) > 0
