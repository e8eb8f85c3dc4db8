"""Simplicial surfaces and geodesic mappings into the genus-2 surface.

A geodesic mapping is stored in the universal cover: one lifted position per
vertex and, per directed edge ``(i, j)``, a deck word ``g_ij`` such that the
edge runs from ``lift[i]`` to ``eval(g_ij) @ lift[j]``.  Vertex moves never
touch the deck words, so the homotopy class is fixed by construction.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import hypgeom as hg
from . import surface as sf

EDGE_SAMPLES = 16


class HomotopyClassError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SimplicialSurface:
    n_vertices: int
    faces: np.ndarray  # (F, 3) positively oriented triples

    @cached_property
    def edges(self):
        e = set()
        for f in self.faces:
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                e.add((min(a, b), max(a, b)))
        return np.array(sorted(e), dtype=int)

    @cached_property
    def directed_edges(self):
        e = self.edges
        d = np.concatenate([e, e[:, ::-1]])
        order = np.lexsort((d[:, 1], d[:, 0]))
        return d[order]

    @cached_property
    def dedge_index(self):
        return {(int(i), int(j)): k for k, (i, j) in enumerate(self.directed_edges)}

    @cached_property
    def reverse_index(self):
        idx = self.dedge_index
        return np.array([idx[(int(j), int(i))] for i, j in self.directed_edges])

    @cached_property
    def next_in_face(self):
        """(i, j) -> k for the positively oriented face (i, j, k)."""
        out = {}
        for a, b, c in self.faces:
            a, b, c = int(a), int(b), int(c)
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                if (x, y) in out:
                    raise ValueError(f"directed edge {x}->{y} appears in two faces")
                out[(x, y)] = z
        return out

    @cached_property
    def corners(self):
        """Corner table, one row per (face, apex): apex, dedge to next, dedge to previous."""
        idx = self.dedge_index
        rows = []
        for a, b, c in self.faces:
            a, b, c = int(a), int(b), int(c)
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                rows.append((x, idx[(x, y)], idx[(x, z)]))
        return np.array(rows, dtype=int)

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.faces)

    def link(self, v):
        """Neighbours of v in counter-clockwise cyclic order."""
        nxt = self.next_in_face
        start = min(j for (i, j) in nxt if i == v)
        ring = [start]
        while True:
            k = nxt[(v, ring[-1])]
            if k == start:
                return ring
            ring.append(k)
            if len(ring) > self.n_vertices:
                raise ValueError(f"link of {v} is not a cycle")

    def degree(self, v):
        return len(self.link(v))

    def check(self):
        """Raise ValueError unless this is a closed, consistently oriented simplicial surface."""
        F = np.asarray(self.faces)
        if np.any(F[:, 0] == F[:, 1]) or np.any(F[:, 1] == F[:, 2]) or np.any(F[:, 0] == F[:, 2]):
            raise ValueError("face with repeated vertex")
        if len({tuple(sorted(f)) for f in F.tolist()}) != len(F):
            raise ValueError("two faces share a vertex triple")
        nxt = self.next_in_face  # raises on inconsistent orientation
        for i, j in nxt:
            if (j, i) not in nxt:
                raise ValueError(f"edge {i}-{j} borders only one face")
        for v in range(self.n_vertices):
            ring = self.link(v)
            if len(ring) != len({j for (i, j) in nxt if i == v}):
                raise ValueError(f"vertex {v} is not a manifold point")


@dataclass(frozen=True, eq=False)
class GeodesicMapping:
    surface: SimplicialSurface
    group: sf.FuchsianGroup
    lifts: np.ndarray  # (n, 3)
    deck: tuple  # word per directed edge, aligned with surface.directed_edges
    deck_mats: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.deck_mats is None:
            mats = np.stack([sf.eval_word(self.group, w) for w in self.deck])
            object.__setattr__(self, "deck_mats", mats)
        lifts = hg.normalize(np.asarray(self.lifts, dtype=float))
        lifts.flags.writeable = False
        object.__setattr__(self, "lifts", lifts)

    def with_lifts(self, lifts):
        return replace(self, lifts=lifts)

    def word(self, i, j):
        return self.deck[self.surface.dedge_index[(i, j)]]

    def targets(self):
        """Lifted far endpoint of every directed edge."""
        dst = self.surface.directed_edges[:, 1]
        return hg.normalize(np.einsum("eij,ej->ei", self.deck_mats, self.lifts[dst]))

    def edge_vectors(self):
        src = self.surface.directed_edges[:, 0]
        return hg.log_map(self.lifts[src], self.targets())

    def edge_lengths(self):
        src = self.surface.directed_edges[:, 0]
        return hg.dist(self.lifts[src], self.targets())


def edge_vector(phi, i, j):
    k = phi.surface.dedge_index[(i, j)]
    target = hg.apply(phi.deck_mats[k], phi.lifts[j])
    return hg.log_map(phi.lifts[i], target)


def deck_residuals(phi):
    """Worst reversal and face-closure defects of the deck words.

    The concatenated words are evaluated as single group products, so the
    defect does not grow with the size of the individual deck matrices.
    """
    S = phi.surface
    I = np.eye(3)
    rev = 0.0
    for (i, j), w in zip(S.directed_edges, phi.deck):
        if i < j:
            M = phi.group.eval(w + phi.word(int(j), int(i)))
            rev = max(rev, float(np.max(np.abs(M - I))))
    closure = 0.0
    for a, b, c in S.faces:
        a, b, c = int(a), int(b), int(c)
        M = phi.group.eval(phi.word(a, b) + phi.word(b, c) + phi.word(c, a))
        closure = max(closure, float(np.max(np.abs(M - I))))
    return rev, closure


# angles


@dataclass(frozen=True)
class AngleReport:
    angles: np.ndarray  # per corner row of surface.corners, signed angle in (-pi, pi]
    theta_min: float
    degenerate: bool  # some corner had a zero-length side

    def face_angles(self):
        return np.abs(self.angles).reshape(-1, 3)


def corner_angles(phi):
    """Signed corner angles (positive for a positively oriented corner) and a degeneracy mask.

    Each apex is first translated to the origin, where the tangent plane is
    the (x1, x2) plane; this avoids cancelling large coordinates.
    """
    S = phi.surface
    C = S.corners
    tgt = phi.targets()
    at = phi.lifts[C[:, 0]]
    a = hg.to_origin(at, tgt[C[:, 1]])[:, 1:]
    b = hg.to_origin(at, tgt[C[:, 2]])[:, 1:]
    na, nb = np.hypot(a[:, 0], a[:, 1]), np.hypot(b[:, 0], b[:, 1])
    scale = 1e-13 * np.abs(at[:, 0]) * np.maximum(np.abs(tgt[C[:, 1], 0]), np.abs(tgt[C[:, 2], 0]))
    bad = (na <= scale) | (nb <= scale)
    ang = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0], np.sum(a * b, axis=1))
    ang = np.where(bad, 0.0, ang)
    return ang, bad


def angle_report(phi):
    ang, bad = corner_angles(phi)
    # a negatively oriented corner counts as angle 0 for the minimum
    theta = np.where(ang > 0, ang, 0.0)
    return AngleReport(angles=ang, theta_min=float(theta.min()), degenerate=bool(bad.any()))


def theta_min(phi):
    return angle_report(phi).theta_min


def in_K_eps(phi, eps):
    return theta_min(phi) >= eps


def is_embedded(phi, tol=1e-9):
    """Local embedding test: positive orientation, corners in (0, pi), stars wind once."""
    if np.any(phi.edge_lengths() <= tol):
        return False
    ang, bad = corner_angles(phi)
    if bad.any() or np.any(ang <= tol) or np.any(ang >= np.pi - tol):
        return False
    total = np.bincount(phi.surface.corners[:, 0], weights=ang, minlength=phi.surface.n_vertices)
    return bool(np.all(np.abs(total - 2 * np.pi) < 1e-6))


# distances and edits


def edge_samples(phi, n=EDGE_SAMPLES):
    S = phi.surface
    src, dst = S.edges[:, 0], S.edges[:, 1]
    k = np.array([S.dedge_index[(int(i), int(j))] for i, j in S.edges])
    t = np.linspace(0.0, 1.0, n)
    p = phi.lifts[src][:, None, :]
    q = phi.targets()[k][:, None, :]
    return hg.geodesic_eval(np.broadcast_to(p, (len(k), n, 3)), np.broadcast_to(q, (len(k), n, 3)), t[None, :])


def mapping_distance(phi, psi, n=EDGE_SAMPLES):
    """Sampled sup distance between two mappings in the same homotopy class."""
    if phi.surface is not psi.surface and not (
        phi.surface.n_vertices == psi.surface.n_vertices and np.array_equal(phi.surface.faces, psi.surface.faces)
    ):
        raise HomotopyClassError("different complexes")
    if phi.deck != psi.deck:
        raise HomotopyClassError("different homotopy class")
    a = edge_samples(phi, n)
    b = edge_samples(psi, n)
    return float(max(hg.dist(a, b).max(), hg.dist(phi.lifts, psi.lifts).max()))


def perturb_vertex(phi, v, offset):
    lifts = np.array(phi.lifts)
    lifts[v] = hg.exp_map(lifts[v], offset)
    return phi.with_lifts(lifts)


def move_lift(phi, v, x):
    lifts = np.array(phi.lifts)
    lifts[v] = x
    return phi.with_lifts(lifts)


def relift(phi, v, word):
    """Replace the lift of v by eval(word) @ lift[v], rewriting deck words to keep the mapping."""
    S = phi.surface
    deck = list(phi.deck)
    inv = sf.invert_word(word)
    for k, (i, j) in enumerate(S.directed_edges):
        if i == v and j == v:
            continue
        if i == v:
            deck[k] = sf.concat(word, deck[k])
        elif j == v:
            deck[k] = sf.concat(deck[k], inv)
    lifts = np.array(phi.lifts)
    lifts[v] = hg.apply(sf.eval_word(phi.group, word), lifts[v])
    return GeodesicMapping(S, phi.group, lifts, tuple(deck))


def random_perturbation(phi, rng, scale, tries=100):
    """Perturb every vertex by a random tangent offset of norm <= scale, staying embedded."""
    for _ in range(tries):
        offs = np.stack([hg.random_tangent(rng, p, scale) for p in phi.lifts])
        out = phi.with_lifts(hg.exp_map(phi.lifts, offs))
        if is_embedded(out):
            return out
    raise RuntimeError("could not find an embedded perturbation")


# base triangulation


def _point_key(p):
    return tuple(np.round(p[1:], 9) + 0.0)


def build_base_triangulation(group, domain):
    """Second barycentric subdivision of the one-vertex octagon cell structure.

    Returns the complex and a geodesic mapping whose lifts lie in the closed
    octagon; the deck words come from the side pairings.
    """
    pts = []
    index = {}

    def add(p):
        key = _point_key(p)
        if key not in index:
            index[key] = len(pts)
            pts.append(p)
        return index[key]

    V = domain.vertices
    centre = add(hg.ORIGIN.copy())
    corner = [add(V[k]) for k in range(8)]
    mid = [add(hg.midpoint(V[(k - 1) % 8], V[k])) for k in range(8)]
    first = []
    for k in range(8):
        first.append((centre, corner[(k - 1) % 8], mid[k]))
        first.append((centre, mid[k], corner[k]))

    local_faces = []
    for a, b, c in first:
        pa, pb, pc = pts[a], pts[b], pts[c]
        mab = add(hg.midpoint(pa, pb))
        mbc = add(hg.midpoint(pb, pc))
        mca = add(hg.midpoint(pc, pa))
        g = add(hg.rescale(pa + pb + pc))
        local_faces += [
            (a, mab, g), (mab, b, g), (b, mbc, g), (mbc, c, g), (c, mca, g), (mca, a, g),
        ]
    pts = np.array(pts)

    # glue boundary points: the generator of side k carries side partner(k) onto side k
    n_local = len(pts)
    nbrs = [[] for _ in range(n_local)]
    for k, ch in enumerate(group.side_letters):
        j = group.side_letters.index(ch.swapcase())
        on_j = np.nonzero(np.abs(hg.mdot(pts, domain.sides[j])) < 1e-9)[0]
        img = hg.apply(group.generators[ch], pts[on_j])
        for a, q in zip(on_j, img):
            b = index[_point_key(q)]
            nbrs[a].append((b, ch))  # pts[b] = ch . pts[a]
            nbrs[b].append((a, ch.swapcase()))

    vid = [-1] * n_local
    word = [""] * n_local  # pts[a] = eval(word[a]) @ lift[vid[a]]
    reps = []
    for a in range(n_local):
        if vid[a] >= 0:
            continue
        vid[a] = len(reps)
        reps.append(a)
        stack = [a]
        while stack:
            x = stack.pop()
            for y, ch in nbrs[x]:
                if vid[y] < 0:
                    vid[y] = vid[a]
                    word[y] = sf.concat(ch, word[x])
                    stack.append(y)

    faces = np.array([[vid[a] for a in f] for f in local_faces], dtype=int)
    S = SimplicialSurface(n_vertices=len(reps), faces=faces)
    S.check()

    deck = {}
    for f in local_faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            w = sf.concat(sf.invert_word(word[a]), word[b])
            for key, ww in (((vid[a], vid[b]), w), ((vid[b], vid[a]), sf.invert_word(w))):
                if key in deck:
                    M0 = sf.eval_word(group, deck[key])
                    if np.max(np.abs(M0 - sf.eval_word(group, ww))) > 1e-8:
                        raise HomotopyClassError(f"inconsistent deck labels on edge {key}")
                else:
                    deck[key] = ww
    words = tuple(deck[(int(i), int(j))] for i, j in S.directed_edges)
    phi = GeodesicMapping(S, group, pts[reps], words)
    return S, phi
