"""Vertex stars, their kernels, Karcher means and the one-vertex degeneration.

Everything here happens in the lift of a single vertex star, so it is plain
hyperbolic-plane geometry.  Geodesics are linear in hyperboloid coordinates,
so a kernel is clipped half-plane by half-plane exactly as in the Klein
model: the point where segment ``a -> b`` crosses ``<x,u> = 0`` is the
normalized combination ``(s_b a - s_a b) / (s_b - s_a)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull

from . import hypgeom as hg
from . import triangulation as tri
from . import tutte

# clipping tolerance on <x,u>; boundary points within it count as inside
CLIP_EPS = 1e-13


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class StarPolygon:
    vertex: int
    center: np.ndarray
    link: tuple  # neighbour ids in counter-clockwise order
    boundary: np.ndarray  # (k, 3) lifted link vertices
    spokes: np.ndarray  # (k, 3) tangent vectors at center

    def edge_normals(self):
        b = self.boundary
        return np.stack([hg.geodesic_through(b[i], b[(i + 1) % len(b)]) for i in range(len(b))])

    def area(self):
        b = self.boundary
        return sum(hg.triangle_area(self.center, b[i], b[(i + 1) % len(b)]) for i in range(len(b)))


@dataclass(frozen=True)
class ConvexDisk:
    halfplanes: np.ndarray  # (m, 3) normals, inside is <x,u> <= 0
    boundary: np.ndarray  # (p, 3) vertices in counter-clockwise order

    def contains(self, x, tol=1e-12):
        return bool(np.all(hg.mdot(self.halfplanes, x) <= tol))

    def slack(self, x):
        """max_u <x,u>; negative strictly inside, zero on the boundary."""
        return float(np.max(hg.mdot(self.halfplanes, x)))

    def area(self):
        b = self.boundary
        return sum(hg.triangle_area(b[0], b[i], b[i + 1]) for i in range(1, len(b) - 1))

    def edges(self):
        b = self.boundary
        return [(b[i], b[(i + 1) % len(b)]) for i in range(len(b))]


def star_polygon(phi, v):
    S = phi.surface
    ring = S.link(v)
    idx = S.dedge_index
    center = phi.lifts[v]
    tgt = phi.targets()
    boundary = np.stack([tgt[idx[(v, j)]] for j in ring])
    spokes = hg.log_map(center, boundary)
    turn = hg.signed_angle(center, boundary, np.roll(boundary, -1, axis=0))
    if np.any(turn <= 0) or abs(turn.sum() - 2 * np.pi) > 1e-9:
        raise KernelError(f"star of vertex {v} is not embedded")
    return StarPolygon(vertex=v, center=center, link=tuple(ring), boundary=boundary, spokes=spokes)


def polygon_disk(points):
    """ConvexDisk for a convex polygon given counter-clockwise."""
    pts = np.asarray(points, dtype=float)
    normals = np.stack([hg.geodesic_through(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))])
    return ConvexDisk(halfplanes=normals, boundary=pts)


def regular_polygon(k, r, center=None, phase=0.0):
    pts = np.stack([hg.polar(r, phase + 2 * np.pi * i / k) for i in range(k)])
    if center is not None:
        pts = hg.apply(center, pts)
    return polygon_disk(pts)


def _convex_hull(points):
    klein = hg.to_klein(points)
    hull = ConvexHull(klein)
    return points[hull.vertices]  # counter-clockwise for 2-d input


def clip(poly, u, eps=CLIP_EPS):
    """Intersect a convex polygon (ccw hyperboloid vertices) with {<x,u> <= 0}."""
    s = hg.mdot(poly, u)
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        sa, sb = s[i], s[(i + 1) % n]
        if sa <= eps:
            out.append(a)
        if (sa > eps and sb < -eps) or (sa < -eps and sb > eps):
            out.append(hg.rescale((sb * a - sa * b) / (sb - sa)))
    if not out:
        return np.zeros((0, 3))
    out = np.array(out)
    # drop repeated vertices
    keep = [0]
    for i in range(1, len(out)):
        if hg.dist(out[i], out[keep[-1]]) > 1e-12:
            keep.append(i)
    if len(keep) > 1 and hg.dist(out[keep[-1]], out[keep[0]]) <= 1e-12:
        keep.pop()
    return out[keep]


def intersect(disk, normals):
    """Clip a ConvexDisk by further half-planes."""
    poly = disk.boundary
    for u in normals:
        poly = clip(poly, u)
        if len(poly) < 3:
            raise KernelError("empty interior")
    return ConvexDisk(halfplanes=np.concatenate([disk.halfplanes, normals]), boundary=poly)


def compute_kernel(star):
    """Kernel of a star polygon: intersection of the inner half-planes of its edges."""
    normals = star.edge_normals()
    poly = _convex_hull(star.boundary)
    for u in normals:
        poly = clip(poly, u)
        if len(poly) < 3:
            raise KernelError("kernel has empty interior")
    D = ConvexDisk(halfplanes=normals, boundary=poly)
    if D.slack(star.center) >= 0:
        raise KernelError("star centre is not interior to the kernel")
    return D


# Karcher mean

_S15 = np.sqrt(15.0)
# degree-5 seven-point rule on the reference triangle, weights sum to 1
_QUAD_BARY = np.array(
    [[1 / 3, 1 / 3, 1 / 3]]
    + [
        np.roll([(9 - 2 * _S15) / 21, (6 + _S15) / 21, (6 + _S15) / 21], i).tolist()
        for i in range(3)
    ]
    + [
        np.roll([(9 + 2 * _S15) / 21, (6 - _S15) / 21, (6 - _S15) / 21], i).tolist()
        for i in range(3)
    ]
)
_QUAD_W = np.array([9 / 40] + [(155 + _S15) / 1200] * 3 + [(155 - _S15) / 1200] * 3)

KARCHER_REFINE = 2
KARCHER_STEP = 0.5


def _subtriangles(m):
    """Barycentric corners of the m*m congruent subtriangles of the reference triangle."""
    tris = []
    for i in range(m):
        for j in range(m - i):
            a = (i, j)
            tris.append((a, (i + 1, j), (i, j + 1)))
            if i + j < m - 1:
                tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    out = []
    for t in tris:
        out.append([[x / m, y / m, 1 - (x + y) / m] for x, y in t])
    return np.array(out)  # (m*m, 3, 3)


@lru_cache(maxsize=64)
def _rule(m):
    sub = _subtriangles(m)
    lam = np.einsum("sij,qi->sqj", sub, _QUAD_BARY).reshape(-1, 3)
    qw = np.tile(_QUAD_W, len(sub)) * 0.5 / len(sub)
    return lam, qw


def _small_triangles(P, step):
    """Split a geodesic triangle at hyperbolic midpoints until every side is below step."""
    out = []
    stack = [P]
    while stack:
        a, b, c = stack.pop()
        if max(hg.dist(a, b), hg.dist(b, c), hg.dist(c, a)) <= step:
            out.append((a, b, c))
            continue
        ab, bc, ca = hg.midpoint(a, b), hg.midpoint(b, c), hg.midpoint(c, a)
        stack += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(out)


def quadrature(disk, refine=KARCHER_REFINE, step=KARCHER_STEP):
    """Nodes and area weights for integrating over a convex disk.

    The disk is fan-triangulated from its first boundary vertex and every fan
    triangle is split at hyperbolic midpoints until its sides are shorter than
    ``step``.  Each piece is cut into refine^2 parts in projective barycentric
    coordinates and gets the seven-point rule with the Jacobian
    |det(a, b, c)| / (-<Y, Y>)^(3/2) of radial projection.
    """
    b = disk.boundary
    lam, qw = _rule(refine)
    tris = np.concatenate([_small_triangles(np.stack([b[0], b[i], b[i + 1]]), step) for i in range(1, len(b) - 1)])
    Y = np.einsum("qj,tjk->tqk", lam, tris)
    rho2 = -hg.mdot(Y, Y)
    jac = np.abs(np.linalg.det(tris))[:, None] / rho2**1.5
    nodes = Y / np.sqrt(rho2)[..., None]
    return nodes.reshape(-1, 3), (qw[None, :] * jac).reshape(-1)


def energy(x, nodes, weights):
    return float(np.sum(weights * hg.dist(x, nodes) ** 2))


def energy_gradient(x, nodes, weights):
    """Riemannian gradient of the quadrature energy, -2 sum w log_x(y)."""
    return -2.0 * np.sum(weights[:, None] * hg.log_map(x, nodes), axis=0)


def karcher_mean(disk, tol=1e-8, max_iter=500, refine=KARCHER_REFINE, step=KARCHER_STEP, start=None):
    """Minimizer of the quadrature squared-distance energy over the disk."""
    nodes, weights = quadrature(disk, refine, step)
    area = weights.sum()
    x = hg.rescale(nodes.T @ weights) if start is None else np.asarray(start, dtype=float)
    e = energy(x, nodes, weights)
    kappa = 1.0
    gn = float("nan")
    for _ in range(max_iter):
        g = np.sum(weights[:, None] * hg.log_map(x, nodes), axis=0)
        gn = float(hg.mnorm(g))
        if gn < tol:
            if disk.slack(x) >= 0:
                raise KernelError("Karcher mean not interior")
            return x
        while True:
            x_new = hg.exp_map(x, kappa * g / area)
            e_new = energy(x_new, nodes, weights)
            # energies agree to rounding once the gradient is tiny
            if e_new <= e * (1 + 1e-14) or kappa < 1e-10:
                break
            kappa *= 0.5
        if e_new > e * (1 + 1e-14):
            raise KernelError(f"Karcher descent stalled, gradient norm {gn:.3e}")
        x, e = x_new, e_new
    raise KernelError(f"Karcher descent stalled, gradient norm {gn:.3e}")


# radial projection and vertex moves


def radial_project(disk, x, y):
    """Point where the geodesic ray from x through y leaves the disk."""
    v = hg.log_map(x, y)
    n = float(hg.mnorm(v))
    if n <= 1e-12:
        raise KernelError("projection undefined at center")
    if disk.slack(x) >= 0:
        raise KernelError("projection centre must be interior")
    w = v / n
    sx = hg.mdot(disk.halfplanes, x)
    sw = hg.mdot(disk.halfplanes, w)
    # the ray cosh(t) x + sinh(t) w meets <.,u> = 0 at tanh(t) = -sx / sw
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sw > 0, -sx / sw, np.inf)
    k = int(np.argmin(ratio))
    if not ratio[k] < 1.0:
        raise KernelError("ray does not leave the disk")
    # linear form of the crossing point: exact up to one rounding
    return hg.rescale(sw[k] * x - sx[k] * w)


def collinearity_residual(x, y, z):
    """Distance from y to the geodesic through x and z."""
    return float(hg.dist_to_geodesic(y, hg.geodesic_through(x, z)))


def move_vertex(phi, v, x, disk=None, tol=1e-10):
    """phi with vertex v moved to x, which must lie in the kernel of v's star."""
    if disk is None:
        disk = compute_kernel(star_polygon(phi, v))
    if disk.slack(x) > tol:
        raise KernelError("target outside the kernel")
    return tri.move_lift(phi, v, x)


# degeneration


@dataclass
class Waypoint:
    t: float
    lift: np.ndarray
    theta_min: float
    pair_weight: float = None  # max w_ij + w_ik over triangles of star(v), normalized mean value weights


@dataclass
class DegenerationPath:
    base: tri.GeodesicMapping
    vertex: int
    kernel: ConvexDisk
    karcher: np.ndarray
    start: np.ndarray  # position of v after any perturbation
    target: np.ndarray  # radial projection on the kernel boundary
    waypoints: list = field(default_factory=list)

    def mapping(self, k):
        return tri.move_lift(self.base, self.vertex, self.waypoints[k].lift)

    @property
    def theta(self):
        return [w.theta_min for w in self.waypoints]

    def first_crossing(self, kappa):
        """First waypoint t where some triangle at v has w_ij + w_ik >= 1 - kappa, else None."""
        for w in self.waypoints:
            if w.pair_weight is not None and w.pair_weight >= 1 - kappa:
                return w.t
        return None


def star_pair_weight(phi, v):
    """max over triangles ijk containing v of the normalized w_ij + w_ik."""
    S = phi.surface
    w = tutte.normalize(S, tutte.mean_value_weights(phi))
    idx = S.dedge_index
    best = 0.0
    for f in S.faces:
        if v not in f:
            continue
        a, b, c = (int(x) for x in f)
        for i, j, k in ((a, b, c), (b, c, a), (c, a, b)):
            best = max(best, w[idx[(i, j)]] + w[idx[(i, k)]])
    return float(best)


def nudge_off_karcher(phi, v, b, seed, norm=1e-6, clearance=1e-8, tries=100):
    """Nudge v off the Karcher point by a seeded random tangent offset."""
    rng = np.random.default_rng(seed)
    p = phi.lifts[v]
    for _ in range(tries):
        th = rng.uniform(0, 2 * np.pi)
        off = hg.translation(hg.ORIGIN, p) @ np.array([0.0, norm * np.cos(th), norm * np.sin(th)])
        q = hg.exp_map(p, off)
        if hg.dist(q, b) >= clearance:
            return tri.move_lift(phi, v, q)
    raise KernelError("could not move vertex off the Karcher mean")


def degenerate(phi, v, steps, seed=0, with_weights=True):
    """Move v along the ray from the kernel's Karcher mean until the star collapses.

    Waypoint k sits at t = k / steps on the geodesic from v's position to
    the point where the ray from the Karcher mean through v meets the
    kernel boundary.  All other lifts are untouched.
    """
    D = compute_kernel(star_polygon(phi, v))
    b = karcher_mean(D)
    base = phi
    if hg.dist(phi.lifts[v], b) < 1e-8:
        base = nudge_off_karcher(phi, v, b, seed)
    start = base.lifts[v]
    z = radial_project(D, b, start)
    path = DegenerationPath(base=base, vertex=v, kernel=D, karcher=b, start=start, target=z)
    for k in range(steps + 1):
        t = k / steps
        y = z if k == steps else (start if k == 0 else hg.geodesic_eval(start, z, t))
        m = tri.move_lift(base, v, y)
        pw = None
        if with_weights and k < steps:
            try:
                pw = star_pair_weight(m, v)
            except tutte.BoundaryError:
                pw = None
        path.waypoints.append(Waypoint(t=t, lift=y, theta_min=tri.theta_min(m), pair_weight=pw))
    return path
