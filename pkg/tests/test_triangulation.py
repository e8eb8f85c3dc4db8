import numpy as np
import pytest

from geotri import hypgeom as hg
from geotri import surface as sf
from geotri import triangulation as tri

# golden values of the base triangulation, computed once from the construction
BASE_THETA_MIN = 0.10777495507665076


def test_base_counts(complex_):
    assert complex_.n_vertices == 46
    assert len(complex_.edges) == 144
    assert len(complex_.faces) == 96
    assert complex_.euler_characteristic() == -2


def test_base_is_closed_and_simplicial(complex_):
    complex_.check()
    counts = {}
    for f in complex_.faces:
        for k in range(3):
            e = tuple(sorted((int(f[k]), int(f[(k + 1) % 3]))))
            counts[e] = counts.get(e, 0) + 1
    assert set(counts.values()) == {2}
    assert len({tuple(sorted(f)) for f in complex_.faces.tolist()}) == len(complex_.faces)
    # each directed edge occurs in exactly one face, so orientations agree
    assert len(complex_.next_in_face) == 2 * len(complex_.edges)


def test_check_rejects_broken_complex():
    S = tri.SimplicialSurface(n_vertices=4, faces=np.array([[0, 1, 2], [0, 2, 3]]))
    with pytest.raises(ValueError):
        S.check()


def test_degrees(complex_):
    degs = sorted(complex_.degree(v) for v in range(complex_.n_vertices))
    assert degs.count(4) == 24 and degs.count(6) == 16 and degs.count(8) == 4 and degs.count(32) == 2
    assert sum(degs) == 2 * len(complex_.edges)


def test_links_are_cycles(complex_):
    for v in range(complex_.n_vertices):
        ring = complex_.link(v)
        assert len(ring) == complex_.degree(v) == len(set(ring))
        for a, b in zip(ring, ring[1:] + ring[:1]):
            assert complex_.next_in_face[(v, a)] == b


def test_base_embedded(base, domain):
    assert tri.is_embedded(base)
    assert tri.theta_min(base) > 0.05
    assert tri.theta_min(base) == pytest.approx(BASE_THETA_MIN, abs=1e-12)
    for p in base.lifts:
        assert domain.contains(p, 1e-9)


def test_deck_invariants(base):
    rev, closure = tri.deck_residuals(base)
    assert rev < 1e-10
    assert closure < 1e-9
    for (i, j), w in zip(base.surface.directed_edges, base.deck):
        assert base.word(j, i) == sf.invert_word(w)


def test_edge_vectors(base):
    S = base.surface
    for i, j in S.directed_edges[:60]:
        i, j = int(i), int(j)
        v = tri.edge_vector(base, i, j)
        w = tri.edge_vector(base, j, i)
        assert abs(hg.mnorm(v) - hg.mnorm(w)) < 1e-10
        target = hg.apply(base.group.eval(base.word(i, j)), base.lifts[j])
        assert hg.dist(hg.exp_map(base.lifts[i], v), target) < 1e-10
        assert abs(hg.mnorm(v) - hg.dist(base.lifts[i], target)) < 1e-10
    assert np.allclose(hg.mnorm(base.edge_vectors()), base.edge_lengths(), atol=1e-10)


def test_angle_report(base):
    rep = tri.angle_report(base)
    assert rep.theta_min == pytest.approx(float(np.abs(rep.angles).min()))
    assert not rep.degenerate
    assert np.all(rep.face_angles().sum(axis=1) < np.pi)


def test_in_K_eps(base):
    th = tri.theta_min(base)
    assert tri.in_K_eps(base, 0.0)
    assert tri.in_K_eps(base, th / 2)
    assert not tri.in_K_eps(base, 2 * th)
    for eps in np.linspace(0, 2 * th, 9):
        for delta in np.linspace(0, eps, 4):
            assert not tri.in_K_eps(base, eps) or tri.in_K_eps(base, delta)


def test_vertex_on_neighbour_not_embedded(base):
    i, j = (int(x) for x in base.surface.directed_edges[0])
    target = hg.apply(base.group.eval(base.word(i, j)), base.lifts[j])
    bad = tri.move_lift(base, i, target)
    assert not tri.is_embedded(bad)
    assert tri.angle_report(bad).degenerate


def test_reflected_face_not_embedded(base):
    a, b, c = (int(x) for x in base.surface.faces[10])
    lifts = np.array(base.lifts)
    lifts[[a, b]] = lifts[[b, a]]
    assert not tri.is_embedded(base.with_lifts(lifts))


def test_mapping_distance_basics(base, uniform_solution):
    assert tri.mapping_distance(base, base) == 0.0
    d1 = tri.mapping_distance(base, uniform_solution)
    d2 = tri.mapping_distance(uniform_solution, base)
    assert d1 == d2 > 0


@pytest.mark.parametrize("s", [1e-6, 1e-4, 1e-3])
def test_mapping_distance_single_vertex(base, s):
    v = 9
    off = hg.translation(hg.ORIGIN, base.lifts[v]) @ np.array([0.0, s * np.cos(0.3), s * np.sin(0.3)])
    moved = tri.perturb_vertex(base, v, off)
    d = tri.mapping_distance(base, moved)
    assert s * (1 - 1e-6) <= d <= s * (1 + 1e-9)


def test_mapping_distance_triangle_inequality(make_embedded):
    a, b, c = (make_embedded(s) for s in (1, 2, 3))
    assert tri.mapping_distance(a, c) <= tri.mapping_distance(a, b) + tri.mapping_distance(b, c) + 1e-9


def test_mapping_distance_requires_same_class(base):
    deck = list(base.deck)
    k = 0
    i, j = base.surface.directed_edges[k]
    deck[k] = sf.concat("a", deck[k])
    other = tri.GeodesicMapping(base.surface, base.group, base.lifts, tuple(deck))
    with pytest.raises(tri.HomotopyClassError, match="different homotopy class"):
        tri.mapping_distance(base, other)


def test_perturb_vertex(base):
    zero = np.zeros(3)
    assert tri.mapping_distance(base, tri.perturb_vertex(base, 3, zero)) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(30):
        v = int(rng.integers(base.surface.n_vertices))
        off = hg.random_tangent(rng, base.lifts[v], 0.01)
        out = tri.perturb_vertex(base, v, off)
        assert out.deck == base.deck
        assert np.array_equal(np.delete(out.lifts, v, axis=0), np.delete(base.lifts, v, axis=0))
        assert tri.mapping_distance(base, out) <= hg.mnorm(off) + 1e-12
        assert tri.is_embedded(out)


def test_relift_preserves_angles(base):
    rep = tri.angle_report(base)
    out = base
    # every vertex moves to a neighbouring tile
    for v in range(base.surface.n_vertices):
        out = tri.relift(out, v, sf.LETTERS[v % 8])
    rev, closure = tri.deck_residuals(out)
    assert rev < 1e-10 and closure < 1e-9
    assert np.max(np.abs(tri.angle_report(out).angles - rep.angles)) < 1e-10
    assert np.allclose(out.edge_lengths(), base.edge_lengths(), atol=1e-10)


def test_random_perturbations_embedded(make_embedded):
    for seed in range(5):
        phi = make_embedded(seed)
        assert tri.is_embedded(phi)
        assert tri.theta_min(phi) > 0
        assert np.all(tri.angle_report(phi).face_angles().sum(axis=1) < np.pi)


def test_lifts_are_read_only(base):
    with pytest.raises(ValueError):
        base.lifts[0, 0] = 2.0
