"""Genus-2 hyperbolic surface from the regular octagon with angles pi/4.

The octagon is centred at the origin of the hyperboloid.  Side ``k`` faces
direction ``k*pi/4``; its endpoints are vertices ``k-1`` and ``k``.  Each side
carries one generator letter; the generator of side ``k`` carries the octagon
to the neighbouring tile across side ``k`` and maps the partner side onto
side ``k``.  Group words are strings over ``aAbBcCdD`` (capital = inverse) and
the relation reads ``abABcdCD`` = [a,b][c,d].
"""

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from . import hypgeom as hg

# word products are formed at this precision and rounded once to float64
_DPS = 40

SIDE_LETTERS = "aBAbcDCd"
RELATION = "abABcdCD"
LETTERS = "abcdABCD"

# octagon geometry: cosh(inradius) = cot(pi/8), cosh(circumradius) = cot(pi/8)^2
INRADIUS = float(np.arccosh(1.0 / np.tan(np.pi / 8)))
CIRCUMRADIUS = float(np.arccosh(1.0 / np.tan(np.pi / 8) ** 2))


class ReductionError(RuntimeError):
    pass


def invert_word(w):
    return w[::-1].swapcase()


def reduce_word(w):
    out = []
    for ch in w:
        if ch not in LETTERS:
            raise ValueError(f"bad letter {ch!r} in group word")
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def concat(*words):
    return reduce_word("".join(words))


def _mp_rotation(theta):
    c, s = mpmath.cos(theta), mpmath.sin(theta)
    return mpmath.matrix([[1, 0, 0], [0, c, -s], [0, s, c]])


def _mp_side_pairing(i, j):
    """Isometry mapping side j onto side i and the octagon across side i."""
    with mpmath.workdps(_DPS):
        pi = mpmath.pi
        cd = mpmath.cot(pi / 8)  # cosh of the inradius
        ch = 2 * cd**2 - 1  # cosh of twice the inradius
        sh = mpmath.sqrt(ch**2 - 1)
        B = mpmath.matrix([[ch, sh, 0], [sh, ch, 0], [0, 0, 1]])
        return _mp_rotation(i * pi / 4) * B * _mp_rotation(pi - j * pi / 4)


def _to_numpy(M):
    return np.array([[float(M[r, c]) for c in range(3)] for r in range(3)])


def _partner(k):
    return SIDE_LETTERS.index(SIDE_LETTERS[k].swapcase())


@dataclass(frozen=True)
class FundamentalDomain:
    vertices: np.ndarray  # (8, 3) octagon corners, vertex k at angle k*pi/4 + pi/8
    sides: np.ndarray  # (8, 3) unit normals; the octagon is {x : <x, u_k> <= 0}

    def contains(self, p, tol=1e-12):
        return bool(np.all(hg.mdot(self.sides, p) <= tol))

    def side_endpoints(self, k):
        return self.vertices[(k - 1) % 8], self.vertices[k]

    def interior_angles(self):
        v = self.vertices
        return np.array([hg.angle(v[k], v[k - 1], v[(k + 1) % 8]) for k in range(8)])


@dataclass(frozen=True)
class FuchsianGroup:
    generators: dict  # letter -> 3x3 isometry, inverses included
    exact: dict = field(default_factory=dict, compare=False, repr=False)  # letter -> mpmath matrix
    relation_word: str = RELATION
    side_letters: str = SIDE_LETTERS
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def eval(self, word):
        return eval_word(self, word)

    def relation_residual(self, exact=True):
        """Frobenius norm of relator - I; ``exact=False`` multiplies the float64 generators."""
        if exact:
            M = eval_word(self, self.relation_word)
        else:
            M = np.eye(3)
            for ch in self.relation_word:
                M = M @ self.generators[ch]
        return float(np.linalg.norm(M - np.eye(3)))


def build_genus2():
    phi = np.arange(8) * np.pi / 4
    sides = np.stack(
        [np.full(8, np.sinh(INRADIUS)), np.cosh(INRADIUS) * np.cos(phi), np.cosh(INRADIUS) * np.sin(phi)],
        axis=1,
    )
    vertices = np.stack([hg.polar(CIRCUMRADIUS, p + np.pi / 8) for p in phi])
    exact = {ch: _mp_side_pairing(k, _partner(k)) for k, ch in enumerate(SIDE_LETTERS)}
    gens = {ch: _to_numpy(M) for ch, M in exact.items()}
    return FuchsianGroup(generators=gens, exact=exact), FundamentalDomain(vertices=vertices, sides=sides)


def eval_word(group, word):
    cache = group._cache
    if word in cache:
        return cache[word]
    if len(word) == 1:
        M = group.generators[word]
    elif not group.exact:
        M = np.eye(3)
        for ch in word:
            M = M @ group.generators[ch]
    else:
        with mpmath.workdps(_DPS):
            P = mpmath.eye(3)
            for ch in word:
                P = P * group.exact[ch]
            M = _to_numpy(P)
    cache[word] = M
    return M


def side_pairing_residual(group, domain):
    """Largest endpoint mismatch when each generator carries its partner side onto its own side."""
    worst = 0.0
    for k, ch in enumerate(group.side_letters):
        j = group.side_letters.index(ch.swapcase())
        a, b = domain.side_endpoints(j)
        # orientation reverses across the glued side
        ta, tb = domain.side_endpoints(k)
        img = hg.apply(group.generators[ch], np.stack([a, b]))
        worst = max(worst, float(hg.dist(img[0], tb)), float(hg.dist(img[1], ta)))
    return worst


def reduce_to_domain(group, domain, p, tol=1e-12, max_iter=1000):
    """Walk ``p`` into the octagon.

    Returns ``(q, word)`` with ``q`` in the closed octagon and
    ``eval(word) @ q == p``.
    """
    q = hg.normalize(p)
    word = ""
    for _ in range(max_iter):
        s = hg.mdot(domain.sides, q)
        k = int(np.argmax(s))
        if s[k] <= tol:
            return q, reduce_word(word)
        ch = group.side_letters[k]
        q = hg.apply(group.generators[ch.swapcase()], q)
        word = word + ch
    raise ReductionError("reduction diverged")


@lru_cache(maxsize=None)
def short_words(max_len):
    """All non-empty freely reduced words of length <= max_len."""
    out = []
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for ch in LETTERS:
                if w and w[-1] == ch.swapcase():
                    continue
                nxt.append(w + ch)
        out.extend(nxt)
        frontier = nxt
    return tuple(out)


def _word_matrices(group, max_len):
    key = ("__stack__", max_len)
    if key not in group._cache:
        group._cache[key] = np.stack([eval_word(group, w) for w in short_words(max_len)])
    return group._cache[key]


def surface_distance(group, domain, p, q, max_len=4):
    """Distance between the projections of p and q on the surface.

    Both points are reduced into the octagon, then q is compared against its
    images under all words of length <= max_len.  Length 4 reaches every tile
    that shares a vertex with the octagon, which is exact for distances below
    the inradius.
    """
    p0, _ = reduce_to_domain(group, domain, p)
    q0, _ = reduce_to_domain(group, domain, q)
    imgs = hg.normalize(_word_matrices(group, max_len) @ q0)
    return float(min(hg.dist(p0, q0), hg.dist(p0, imgs).min()))
