import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alexandrov_lorentz.errors import NonFuchsian
from alexandrov_lorentz.minkowski import is_lorentz
from alexandrov_lorentz.surface_group import (
    Cocycle, Presentation, TeichCoords, build_holonomy, cocycle_basis, cocycle_residual,
    eval_word, h1_project, h1_reconstruct, inverse_word, octagon_holonomy,
    project_to_cocycles, reduce_word, side_pairing_labels, relator_constraint_matrix, word_mul,
)

# double precision floor of the relator grows with |rho(b_i)|, so stay in a moderate box
lengths = st.floats(1.2, 3.0)
twists = st.floats(-0.75, 0.75)
genus2 = st.builds(lambda l, t: TeichCoords(2, l, t),
                   st.tuples(lengths, lengths, lengths), st.tuples(twists, twists, twists))

HOL = build_holonomy(TeichCoords(2, (1.5, 1.8, 2.1), (0.2, -0.3, 0.4)))


def random_word(rng, n, genus=2):
    letters = Presentation(genus).letters()
    return reduce_word(rng.choice(letters, size=n).tolist())


def conjugator_fit(Ms, Ns):
    # least-squares C with C M = N C
    A = np.vstack([np.kron(np.eye(3), M.T) - np.kron(N, np.eye(3)) for M, N in zip(Ms, Ns)])
    C = np.linalg.svd(A)[2][-1].reshape(3, 3)
    C = C / np.cbrt(np.linalg.det(C))
    return max(np.abs(C @ M @ np.linalg.inv(C) - N).max() for M, N in zip(Ms, Ns))


def test_presentation():
    p = Presentation(2)
    assert p.generators == ["a1", "b1", "a2", "b2"]
    assert p.relator == (1, 2, -1, -2, 3, 4, -3, -4)
    assert reduce_word([1, 2, -2, 3, -3, -1, 4]) == (4,)
    assert word_mul((1, 2), inverse_word((1, 2))) == ()


@settings(max_examples=30, deadline=None)
@given(genus2)
def test_relator_residual(c):
    h = build_holonomy(c)
    assert h.relator_residual <= 1e-9
    assert all(is_lorentz(m, 1e-9) for m in h.images)


@settings(max_examples=20, deadline=None)
@given(genus2)
def test_traces_match_lengths(c):
    h = build_holonomy(c)
    for i in range(2):
        tr = np.trace(h.sl2[2 * i])
        assert abs(tr) == pytest.approx(2 * np.cosh(c.fn_lengths[i] / 2), abs=1e-9)
    tr = np.trace(h.sl2_mat((1, 2, -1, -2)))
    assert abs(tr) == pytest.approx(2 * np.cosh(c.fn_lengths[2] / 2), abs=1e-9)


def test_generator_pairs_hyperbolic():
    letters = HOL.presentation.letters()
    for x in letters:
        for y in letters:
            w = reduce_word([x, y])
            if w:
                assert np.max(np.abs(np.linalg.eigvals(HOL.mat(w)))) > 1 + 1e-6


def test_full_twist_periodicity():
    c = HOL.coords
    z = (1, 2, -1, -2)
    # a full twist acts as b1 -> b1 a1, b2 -> b2 a2, and conjugation of handle 2 by [a1,b1]^-1
    images = {
        0: [(1,), (2, 1), (3,), (4,)],
        1: [(1,), (2,), (3,), (4, 3)],
        2: [(1,), (2,), inverse_word(z) + (3,) + z, inverse_word(z) + (4,) + z],
    }
    for idx, ws in images.items():
        tw = list(c.fn_twists)
        tw[idx] += c.fn_lengths[idx]
        h2 = build_holonomy(TeichCoords(2, c.fn_lengths, tw))
        assert conjugator_fit([HOL.mat(w) for w in ws], list(h2.images)) <= 1e-6


def test_bad_coords():
    with pytest.raises(NonFuchsian):
        build_holonomy(TeichCoords(2, (1.0, -1.0, 1.0), (0, 0, 0)))
    with pytest.raises(ValueError):
        TeichCoords(2, (1.0,), (0.0,))


def test_genus3_builds():
    h = build_holonomy(TeichCoords(3, (1.4,) * 6, (0.1,) * 6))
    assert h.genus == 3
    # double rounding limits this, see notes
    assert h.relator_residual <= 1e-9 * max(np.abs(m).max() for m in h.images) ** 2


def test_octagon_group():
    h = octagon_holonomy()
    assert h.relator_residual <= 1e-9
    # each pairing carries the two endpoints of its source side onto those of its target side
    R = np.arccosh(3 + 2 * np.sqrt(2))
    verts = [np.array([np.cosh(R), np.sinh(R) * np.cos(a), np.sinh(R) * np.sin(a)])
             for a in (np.arange(8) + 0.5) * np.pi / 4]
    side = lambda k: [verts[(k - 1) % 8], verts[k]]
    labels = side_pairing_labels()
    for g in range(1, 5):
        src, dst = side(labels.index(-g)), side(labels.index(g))
        img = [h.images[g - 1] @ v for v in src]
        assert np.allclose(img[0], dst[1], atol=1e-9) and np.allclose(img[1], dst[0], atol=1e-9)


def test_eval_word_zero_cocycle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = random_word(rng, 7)
        R, t = eval_word(HOL, Cocycle.zero(2), w)
        assert np.all(t == 0)
        assert np.allclose(R, HOL.mat(w))


def test_eval_word_coboundary():
    v = np.array([0.4, -1.0, 0.7])
    tau = Cocycle.coboundary(HOL, v)
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = random_word(rng, 6)
        R, t = eval_word(HOL, tau, w)
        assert np.abs(t - (R @ v - v)).max() <= 1e-10 * max(1, np.abs(R).max())


def test_cocycle_identity_on_pairs():
    rng = np.random.default_rng(2)
    tau = Cocycle.from_vector(rng.standard_normal(12))
    for _ in range(50):
        g, m = random_word(rng, 4), random_word(rng, 4)
        Rg, tg = eval_word(HOL, tau, g)
        _, tm = eval_word(HOL, tau, m)
        _, tgm = eval_word(HOL, tau, g + m)
        assert np.abs(tgm - Rg @ tm - tg).max() <= 1e-12 * max(1, np.abs(Rg).max()) ** 2
    assert np.all(eval_word(HOL, tau, ())[1] == 0)
    w = random_word(rng, 5)
    R, t = eval_word(HOL, tau, w)
    _, ti = eval_word(HOL, tau, inverse_word(w))
    assert np.allclose(ti, -np.linalg.inv(R) @ t, atol=1e-9)


def test_cocycle_basis():
    B = cocycle_basis(HOL)
    assert len(B) == 6
    assert max(cocycle_residual(HOL, b) for b in B) <= 1e-10
    Q = np.array([b.vector() for b in B])
    assert np.abs(Q @ Q.T - np.eye(6)).max() <= 1e-12
    for k, b in enumerate(B):
        assert np.abs(h1_project(HOL, b) - np.eye(6)[k]).max() <= 1e-10


def test_z1_dimension():
    s = np.linalg.svd(relator_constraint_matrix(HOL), compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    assert 12 - rank == 6 * 2 - 3


def test_h1_gauge_invariance_and_roundtrip():
    rng = np.random.default_rng(3)
    tau = project_to_cocycles(HOL, Cocycle.from_vector(rng.standard_normal(12)))
    assert cocycle_residual(HOL, tau) <= 1e-10
    c = h1_project(HOL, tau)
    assert np.abs(h1_project(HOL, Cocycle.coboundary(HOL, rng.standard_normal(3)))).max() <= 1e-10
    assert np.abs(h1_project(HOL, tau + Cocycle.coboundary(HOL, [1, 2, 3])) - c).max() <= 1e-10
    back = h1_reconstruct(HOL, c)
    assert np.abs(h1_project(HOL, tau - back)).max() <= 1e-10
    assert np.abs(h1_project(HOL, back) - c).max() <= 1e-10


def test_cocycle_json_roundtrip():
    tau = Cocycle.from_vector(np.arange(12.0))
    d = tau.to_dict()
    assert list(d["values"]) == ["a1", "b1", "a2", "b2"]
    assert np.all(Cocycle.from_dict(d).values == tau.values)
