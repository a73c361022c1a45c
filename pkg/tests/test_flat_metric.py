import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alexandrov_lorentz.errors import InvalidMetric, TriangleInequalityViolated
from alexandrov_lorentz.flat_metric import (
    Corridor, FlatConeMetric, compare, cone_angles, cone_data, delaunay, flip, geodesic_length,
    interpolate_sq, is_delaunay, opposite_angle_sum, refan, scaled,
)

seeds = st.integers(0, 2 ** 31 - 1)
which = st.integers(0, 5)


def law_of_cosines_angle(a, b, c):
    # angle between sides a and b
    return np.arccos((a * a + b * b - c * c) / (2 * a * b))


def quad(m, e):
    """Corner data of the two triangles at edge e: (t1, k1, t2, k2)."""
    (t1, k1), (t2, k2) = m.sides_of_edge()[e]
    return t1, k1, t2, k2


def four_point_diagonal(m, e):
    # unfold the two triangles at e and return the other diagonal by the law of cosines at one end
    t1, k1, t2, k2 = quad(m, e)
    L1 = m.lengths[m.tri_edges[t1]]
    L2 = m.lengths[m.tri_edges[t2]]
    ab = L1[k1]
    ac = L1[(k1 + 2) % 3]      # side from corner k1+2 back to corner k1
    bd = L2[(k2 + 2) % 3]
    ad = L2[(k2 + 1) % 3]
    # e runs a->b in t1 and b->a in t2
    bc = L1[(k1 + 1) % 3]
    ang = law_of_cosines_angle(ab, ac, bc) + law_of_cosines_angle(ab, ad, bd)
    return np.sqrt(ac ** 2 + ad ** 2 - 2 * ac * ad * np.cos(ang)), ang


def test_octagon_cone_point(octagon):
    from alexandrov_lorentz.cellulation import dualize
    m = dualize(octagon)
    data = cone_data(m)
    assert len(data) == 1
    theta, kappa = next(iter(data.values()))
    assert theta == pytest.approx(6 * np.pi, abs=1e-9)
    assert kappa == pytest.approx(-4 * np.pi, abs=1e-9)


def test_gauss_bonnet(metrics):
    for m in metrics:
        k = np.array([c for _, c in cone_data(m).values()])
        assert abs(k.sum() - 2 * np.pi * (2 - 2 * m.genus)) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(which, seeds)
def test_refan_keeps_intrinsic_data(metrics, i, seed):
    m = metrics[i]
    m2 = refan(m, np.random.default_rng(seed))
    assert np.abs(cone_angles(m2) - cone_angles(m)).max() <= 1e-10
    assert m2.area() == pytest.approx(m.area(), abs=1e-9)
    assert np.all(m2.triangle_slack() >= 1e-12 * m2.side_lengths().sum(axis=1))
    ok, _ = compare(m, m2, 1e-7)
    assert ok


def test_delaunay_zero_flips_on_delaunay_input(metrics):
    for m in metrics[:6]:
        d = delaunay(m).metric
        again = delaunay(d)
        assert again.flips == 0
        assert np.array_equal(again.metric.tri_edges, d.tri_edges)
        assert np.array_equal(again.metric.lengths, d.lengths)
        assert is_delaunay(d)


def test_single_flip_matches_planar_unfolding(metrics):
    checked = 0
    for m in metrics[:6]:
        d = delaunay(m).metric
        for e in range(d.n_edges):
            t1, k1, t2, k2 = quad(d, e)
            if t1 == t2:
                continue
            expect, ang = four_point_diagonal(d, e)
            if ang >= np.pi - 1e-6:
                continue
            try:
                f = flip(d, e)
            except InvalidMetric:
                continue
            assert f.lengths[e] == pytest.approx(expect, rel=1e-12)
            # a strictly Delaunay edge becomes the one bad edge; the form flips it straight back
            if opposite_angle_sum(d, e) < np.pi - 1e-6:
                bad = [x for x in range(f.n_edges) if opposite_angle_sum(f, x) > np.pi + 1e-12]
                if bad == [e]:
                    out = delaunay(f)
                    assert out.flips == 1
                    assert out.metric.lengths[e] == pytest.approx(d.lengths[e], rel=1e-12)
                    checked += 1
    assert checked > 0


@settings(max_examples=15, deadline=None)
@given(which, seeds)
def test_canonical_lengths_flip_order_independent(metrics, i, seed):
    m = metrics[i]
    a = delaunay(m).canonical_lengths
    b = delaunay(refan(m, np.random.default_rng(seed))).canonical_lengths
    assert np.abs(a - b).max() <= 1e-9 * max(1.0, a.max())


@settings(max_examples=10, deadline=None)
@given(which, seeds)
def test_delaunay_idempotent(metrics, i, seed):
    d = delaunay(refan(metrics[i], np.random.default_rng(seed))).metric
    d2 = delaunay(d)
    assert d2.flips == 0
    assert np.array_equal(d2.metric.lengths, d.lengths)


def test_compare_reflexive_and_scaled(metrics):
    tol = 1e-7
    for m in metrics[:6]:
        ok, rep = compare(m, m, tol)
        assert ok
        assert "matching" in rep
        ok, _ = compare(m, scaled(m, 1 + 10 * tol), tol)
        assert not ok


def test_compare_symmetric(metrics):
    for a, b in [(0, 1), (2, 2), (3, 4)]:
        assert compare(metrics[a], metrics[b])[0] == compare(metrics[b], metrics[a])[0]


def test_compare_distinct_metrics(metrics):
    same_labels = [m for m in metrics if m.n_vertices == metrics[1].n_vertices]
    assert len(same_labels) >= 2
    ok, rep = compare(same_labels[0], same_labels[1])
    assert not ok
    assert "obstruction" in rep


def test_geodesic_single_triangle(metrics):
    m = metrics[0]
    for t in range(m.n_triangles):
        for k in range(3):
            L = geodesic_length(m, Corridor((t,), k, (k + 1) % 3))
            assert L == pytest.approx(m.lengths[m.tri_edges[t, k]], rel=1e-12)


def test_geodesic_two_triangles(metrics):
    m = delaunay(metrics[0]).metric
    n = 0
    for e in range(m.n_edges):
        t1, k1, t2, k2 = quad(m, e)
        if t1 == t2:
            continue
        expect, ang = four_point_diagonal(m, e)
        # the straight segment stays inside only when both end angles are below pi
        if ang >= np.pi - 1e-6 or opposite_angle_sum(m, e) < 1e-3:
            continue
        ta = law_of_cosines_angle(*m.lengths[m.tri_edges[t1]][[k1, (k1 + 1) % 3, (k1 + 2) % 3]])
        tb_sides = m.lengths[m.tri_edges[t2]]
        tb = law_of_cosines_angle(tb_sides[k2], tb_sides[(k2 + 1) % 3], tb_sides[(k2 + 2) % 3])
        if ta + tb >= np.pi - 1e-6:
            continue
        L = geodesic_length(m, Corridor((t1, t2), (k1 + 2) % 3, (k2 + 2) % 3, (e,)))
        assert L == pytest.approx(expect, rel=1e-10)
        n += 1
    assert n > 0


def test_geodesic_extension_invariance(metrics):
    m = delaunay(metrics[0]).metric
    sides = m.sides_of_edge()
    done = 0
    for t in range(m.n_triangles):
        # extend a one-triangle corridor across the side opposite the source
        k = 0
        e = m.tri_edges[t, 1]
        (x1, y1), (x2, y2) = sides[e]
        u, ku = (x2, y2) if (x1, y1) == (t, 1) else (x1, y1)
        if u == t:
            continue
        base = geodesic_length(m, Corridor((t,), k, 1))
        # target is corner 1 of t, which is the far end of side ku in u
        tgt = (ku + 1) % 3
        longer = geodesic_length(m, Corridor((t, u), k, tgt, (e,)), check_escape=False)
        assert longer == pytest.approx(base, rel=1e-10)
        done += 1
    assert done > 0


def test_interpolation_squared_lengths(metrics):
    m = metrics[0]
    m2 = scaled(m, 2.0)
    mid = interpolate_sq(m, m2, 0.5)
    assert np.allclose(mid.lengths ** 2, 2.5 * m.lengths ** 2, rtol=1e-14)


def test_roundtrip_dict(metrics):
    m = metrics[2]
    m2 = FlatConeMetric.from_dict(m.to_dict())
    assert np.array_equal(m2.lengths, m.lengths)
    assert m2.corner_words == m.corner_words


def test_triangle_inequality_error(metrics):
    m = metrics[0].copy()
    m.lengths[m.tri_edges[0, 0]] = m.lengths[m.tri_edges[0, 1]] + m.lengths[m.tri_edges[0, 2]] + 1
    with pytest.raises(TriangleInequalityViolated):
        m.validate()
