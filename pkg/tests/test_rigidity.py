import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alexandrov_lorentz.cellulation import dualize, gauss_image
from alexandrov_lorentz.errors import FlatCorner
from alexandrov_lorentz.flat_metric import compare
from alexandrov_lorentz.hull import future_hull
from alexandrov_lorentz.minkowski import boost, rotation
from alexandrov_lorentz.rigidity import (RigiditySystem, assemble, kernel_dim, random_zero_forest,
                                         split_vertex, x_matrix, zerocorn_check)


@pytest.fixture(scope="module")
def systems(cells):
    return [assemble(c) for c in cells]


def edge_blocks(row, n_edges):
    return [e for e in range(n_edges) if np.any(row[3 * e:3 * e + 3] != 0)]


def test_octagon_dimensions(octagon):
    s = assemble(octagon)
    assert s.shape == (13, 12)
    assert kernel_dim(s) == 0


def test_row_structure(cells, systems):
    for c, s in zip(cells[:8], systems):
        nE, nQ, nV = len(c.edges), sum(len(r) for r in c.rotation), len(c.points)
        assert s.shape == (nE + nQ + nV, 3 * nE)
        for i, kind in enumerate(s.row_kind):
            touched = edge_blocks(s.matrix[i], nE)
            if kind[0] == "unit":
                assert touched == [kind[1]]
            elif kind[0] == "corner":
                v, k = kind[1], kind[2]
                rot = c.rotation[v]
                pair = {rot[k][0], rot[k - 1][0]}
                assert set(touched) == pair
            else:
                assert set(touched) == {ei for ei, _ in c.rotation[kind[1]]}


def test_lambdas_positive(systems):
    for s in systems:
        assert all(np.all(np.asarray(l) > 0) for l in s.lam)


def test_trivial_deformation(systems):
    s = systems[0]
    assert np.all(s.matrix @ np.zeros(s.shape[1]) == 0)


def test_kernel_trivial_on_fixtures(systems):
    for s in systems:
        assert kernel_dim(s, 1e-8) == 0


def test_reduced_kernel_bound(cells, systems):
    for c, s in zip(cells, systems):
        assert kernel_dim(s.reduced()) <= len(c.points)


def test_duplicate_row(systems):
    s = systems[3]
    M = np.vstack([s.matrix, s.matrix[5:6]])
    d = RigiditySystem(M, s.n_edges, s.n_corners, s.n_vertices, s.row_kind + [s.row_kind[5]],
                       s.lam, s.sigma, s.normals)
    assert kernel_dim(d) == kernel_dim(s)


def test_balance_identity(cells, systems):
    for c, s in zip(cells, systems):
        assert s.balance_residuals(c.points).max() <= 1e-9


def test_deterministic_assembly(cells):
    a, b = assemble(cells[2]), assemble(cells[2])
    assert np.array_equal(a.matrix, b.matrix)
    assert a.to_text() == b.to_text()


def test_text_dump(systems):
    s = systems[1]
    M = np.zeros(s.shape)
    for line in s.to_text().splitlines():
        i, j, v = line.split()
        M[int(i), int(j)] = float(v)
    assert np.array_equal(M, s.matrix)


def test_conjugation_keeps_singular_values(hulls):
    fx = hulls[0]
    A = rotation(0.7) @ boost(0.1, 2)
    surf, _ = future_hull(fx.spacetime.conjugated(A))
    s1 = assemble(gauss_image(fx.surface)).singular_values()
    s2 = assemble(gauss_image(surf)).singular_values()
    assert np.abs(s1 - s2).max() <= 1e-10 * s1[0]


def test_x_matrix_signs_and_sums(cells):
    for c in cells:
        X = x_matrix(c)
        assert np.all(np.diag(X.matrix) > 0)
        off = X.matrix - np.diag(np.diag(X.matrix))
        assert np.all(off <= 0)
        assert np.all(X.column_sums > 0)
        assert np.abs(X.column_sums - X.expected_sums).max() <= 1e-10
        assert X.min_singular_value() > 1e-10 * np.abs(X.matrix).max()


def test_x_column_zero_when_all_edges_zero(cells):
    c = next(c for c in cells if len(c.points) >= 2)
    zero = {ei for ei, _ in c.rotation[0]}
    X = x_matrix(c, zero)
    assert X.column_sums[0] == pytest.approx(0.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 19), st.integers(0, 2 ** 32 - 1))
def test_x_nonsingular_on_zero_forests(cells, i, seed):
    c = cells[i]
    forest = random_zero_forest(c, np.random.default_rng(seed))
    X = x_matrix(c, forest)
    assert np.abs(X.column_sums - X.expected_sums).max() <= 1e-10
    sv = np.linalg.svd(X.matrix, compute_uv=False)
    assert sv[-1] > 1e-10 * sv[0]


def test_split_vertex_zero_edge(octagon):
    c2 = split_vertex(octagon, 0, 4)
    assert len(c2.points) == 2
    assert len(c2.edges) == 5
    assert min(e.length for e in c2.edges) == 0.0
    s = assemble(c2)
    assert s.shape == (5 + 10 + 2, 15)
    assert kernel_dim(s) == 0
    ok, _ = compare(dualize(octagon), dualize(c2), 1e-7)
    assert ok


def test_flat_corner(octagon):
    c = split_vertex(octagon, 0, 4)
    # push a tangent onto its neighbour: a corner of angle zero
    c.U[0] = c.U[0].copy()
    c.U[0][1] = c.U[0][0]
    with pytest.raises(FlatCorner):
        assemble(c)


def test_zerocorn():
    assert zerocorn_check(1000) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-4, 1e-1))
def test_zerocorn_linear_in_eps(eps):
    a = zerocorn_check(30, seed=1, eps=eps)
    b = zerocorn_check(30, seed=1, eps=2 * eps)
    assert a > 0
    assert b / a == pytest.approx(2.0, rel=1e-6)
