import numpy as np
import pytest

from geotri import hypgeom as hg
from geotri import surface as sf
from geotri import triangulation as tri
from geotri import tutte


@pytest.fixture(scope="session")
def genus2():
    return sf.build_genus2()


@pytest.fixture(scope="session")
def group(genus2):
    return genus2[0]


@pytest.fixture(scope="session")
def domain(genus2):
    return genus2[1]


@pytest.fixture(scope="session")
def base(genus2):
    S, phi = tri.build_base_triangulation(*genus2)
    return phi


@pytest.fixture(scope="session")
def complex_(base):
    return base.surface


@pytest.fixture(scope="session")
def uniform_solution(base):
    return tutte.solve_balanced(tutte.uniform_weights(base.surface), base)


@pytest.fixture(scope="session")
def make_embedded(uniform_solution):
    """Seeded random embedded mapping near the uniform solution."""

    def make(seed, scale=0.05):
        return tri.random_perturbation(uniform_solution, np.random.default_rng(seed), scale)

    return make


def _seg_dist(x, a, b):
    """Distance from x to the geodesic segment [a, b]."""
    u = hg.geodesic_through(a, b)
    foot = hg.rescale(x - hg.mdot(x, u) * u)
    # the foot is on the segment iff it splits the length exactly
    if abs(hg.dist(a, foot) + hg.dist(foot, b) - hg.dist(a, b)) < 1e-12:
        return float(hg.dist(x, foot))
    return float(min(hg.dist(x, a), hg.dist(x, b)))


def hausdorff(P, Q, n=20):
    """Hausdorff distance between two closed geodesic polygons, sampling n points per edge."""

    def one_way(A, B):
        t = np.linspace(0, 1, n)
        worst = 0.0
        for i in range(len(A)):
            for x in hg.geodesic_eval(A[i], A[(i + 1) % len(A)], t):
                worst = max(worst, min(_seg_dist(x, B[j], B[(j + 1) % len(B)]) for j in range(len(B))))
        return worst

    return max(one_way(P, Q), one_way(Q, P))
