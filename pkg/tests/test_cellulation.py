from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alexandrov_lorentz.cellulation import (WeightedCellulation, dual_polygons, dualize,
                                            gauss_tangent_mismatch, total_length)
from alexandrov_lorentz.errors import NonClosingPolygon
from alexandrov_lorentz.flat_metric import cone_angles, cone_data
from alexandrov_lorentz.minkowski import mdot

OCT_SIDE = 2 * np.arccosh(1 + np.sqrt(2))


def tri_area(a, b, c):
    # tan(A/2) = |det| / (1 + cosh ab + cosh bc + cosh ca) on the hyperboloid
    num = abs(np.linalg.det(np.array([a, b, c])))
    den = 1 - mdot(a, b) - mdot(b, c) - mdot(c, a)
    return 2 * np.arctan2(num, den)


def face_vertices(cell, cyc):
    """Lift of a face polygon: positions of its corners in one chart."""
    v0, _ = cyc[0]
    G = np.eye(3)
    pts = [cell.points[v0]]
    for v, s in cyc[:-1]:
        b, g = cell.half_edge_word(v, (s - 1) % len(cell.rotation[v]))
        G = G @ cell.hol.mat(g)
        pts.append(G @ cell.points[b])
    return pts


def polygon_area(cell, cyc):
    P = face_vertices(cell, cyc)
    return sum(tri_area(P[0], P[j], P[j + 1]) for j in range(1, len(P) - 1))


def test_balance(cells):
    for c in cells:
        assert c.balance_residuals().max() <= 1e-8
        c.check_balance()


def test_tangents_recomputed(cells):
    for c in cells:
        assert gauss_tangent_mismatch(c) <= 1e-9


def test_total_length_is_mean_curvature(fixtures20, cells):
    for fx, c in zip(fixtures20, cells):
        tm = fx.surface.total_mean_curvature()
        assert total_length(c) == pytest.approx(tm, rel=1e-12)


def test_corner_angles_convex(cells):
    for c in cells:
        for v in range(len(c.points)):
            a = c.corner_angles(v)
            assert np.all((a > 0) & (a < np.pi))
            assert a.sum() == pytest.approx(2 * np.pi, abs=1e-10)


def test_euler_characteristic(cells):
    for c in cells:
        assert c.euler_characteristic() == 2 - 2 * c.genus


def test_face_gauss_bonnet(cells):
    for c in cells[:8]:
        for cyc in c.faces():
            ext = sum(np.pi - c.corner_angles(v)[s] for v, s in cyc)
            assert ext - polygon_area(c, cyc) == pytest.approx(2 * np.pi, abs=1e-8)


def test_dual_curvature_is_minus_area(cells):
    for c in cells[:8]:
        data = cone_data(dualize(c))
        for i, cyc in enumerate(c.faces()):
            lab = c.face_labels.get(i, f"c{i}")
            assert data[lab][1] == pytest.approx(-polygon_area(c, cyc), abs=1e-7)


def test_octagon_cellulation(octagon):
    assert len(octagon.points) == 1
    assert len(octagon.edges) == 4
    assert np.ptp(octagon.weights) <= 1e-6
    assert np.allclose(octagon.lengths, OCT_SIDE, atol=1e-9)
    assert np.allclose(octagon.corner_angles(0), np.pi / 4, atol=1e-9)
    unit = octagon.with_weights(np.ones(4))
    assert total_length(unit) == pytest.approx(4 * OCT_SIDE, abs=1e-9)
    m = dualize(unit)
    assert m.n_vertices == 1
    assert cone_angles(m)[0] == pytest.approx(6 * np.pi, abs=1e-9)
    # regular flat octagon of side 1
    assert m.area() == pytest.approx(2 * (1 + np.sqrt(2)), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 7), st.floats(0.05, 20.0))
def test_weight_scaling(cells, i, s):
    c = cells[i]
    m1 = dualize(c)
    m2 = dualize(c.with_weights(s * c.weights))
    assert np.allclose(m2.lengths, s * m1.lengths, rtol=1e-10)
    assert np.allclose(cone_angles(m2), cone_angles(m1), atol=1e-10)


def test_zero_lengths_total(cells):
    c = cells[0]
    z = WeightedCellulation(c.hol, c.points, [replace(e, length=0.0) for e in c.edges],
                            c.rotation, c.U)
    assert total_length(z) == 0.0


def test_unbalanced_weights_do_not_close(cells):
    c = cells[0]
    w = c.weights.copy()
    w[0] *= 1.5
    with pytest.raises(NonClosingPolygon):
        dual_polygons(c.with_weights(w))


def test_dual_polygon_sides(cells):
    for c in cells[:5]:
        for v, P in enumerate(dual_polygons(c)):
            side = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
            w = [c.edges[ei].weight for ei, _ in c.rotation[v]]
            assert np.allclose(side, w, rtol=1e-9)
