"""Hyperbolic plane primitives in the hyperboloid model.

Points live on the upper sheet ``-x0^2 + x1^2 + x2^2 = -1`` of Minkowski
space R^{2,1}.  Tangent vectors at ``p`` are Minkowski-orthogonal to ``p``.
Isometries are 3x3 matrices in SO+(2,1).  Geodesics are stored by a unit
spacelike normal ``u``; the geodesic is ``{x : <x,u> = 0}`` and its positive
side is ``{x : <x,u> <= 0}``.

Every function accepts a single triple or a stack of shape ``(..., 3)``.
"""

import numpy as np

J = np.diag([-1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0])

_SMALL = 1e-300


class DegenerateError(ValueError):
    """Raised when a corner, edge or triangle has collapsed."""


def mdot(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def mnorm(v):
    """Minkowski norm of a spacelike (tangent) vector."""
    return np.sqrt(np.maximum(mdot(v, v), 0.0))


def normalize(x):
    """Project onto the hyperboloid along the x0 axis."""
    x = np.array(x, dtype=float)
    x[..., 0] = np.sqrt(1.0 + x[..., 1] ** 2 + x[..., 2] ** 2)
    return x


def rescale(x):
    """Radially rescale a future timelike vector onto the hyperboloid."""
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(-mdot(x, x))[..., None]


def point(x1, x2):
    return normalize(np.array([0.0, x1, x2]))


def polar(r, theta):
    """Point at distance ``r`` from the origin in direction ``theta``."""
    return np.array([np.cosh(r), np.sinh(r) * np.cos(theta), np.sinh(r) * np.sin(theta)])


def on_hyperboloid(x, tol=1e-12):
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.abs(mdot(x, x) + 1.0) < tol) and np.all(x[..., 0] >= 1.0 - tol))


def project_tangent(p, v):
    """Component of ``v`` tangent to the hyperboloid at ``p``."""
    return v + mdot(p, v)[..., None] * p


def dist(p, q):
    """Hyperbolic distance.

    Evaluated as ``2 asinh(|p - q| / 2)`` which equals ``arccosh(-<p,q>)`` but
    keeps full relative precision for nearby points.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    diff = p - q
    chord = np.sqrt(np.maximum(mdot(diff, diff), 0.0))
    return 2.0 * np.arcsinh(0.5 * chord)


def exp_map(p, v):
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    n = mnorm(v)
    # sinh(n)/n -> 1 as n -> 0
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(n > 1e-8, np.sinh(n) / np.where(n > 0, n, 1.0), 1.0 + n * n / 6.0)
    out = np.cosh(n)[..., None] * p + s[..., None] * v
    return normalize(out)


def log_map(p, q):
    """Tangent vector at ``p`` whose exponential is ``q``; zero when p == q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    u = project_tangent(p, q)
    n = mnorm(u)
    d = dist(p, q)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(n > _SMALL, d / np.where(n > _SMALL, n, 1.0), 0.0)
    return scale[..., None] * u


def triple(a, b, c):
    """det[a, b, c]; at a point p with tangent a, b this is |a||b| sin(a -> b)."""
    return np.einsum("...i,...i->...", a, np.cross(b, c))


def _apex_frame(at, to1, to2):
    # move the apex to the origin so both directions are read off (x1, x2) without cancellation
    at = np.asarray(at, dtype=float)
    a = to_origin(at, np.asarray(to1, dtype=float))[..., 1:]
    b = to_origin(at, np.asarray(to2, dtype=float))[..., 1:]
    return a, b


def signed_angle(at, to1, to2):
    """Oriented angle at ``at`` turning from ``to1`` toward ``to2``, in (-pi, pi]."""
    a, b = _apex_frame(at, to1, to2)
    return np.arctan2(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0], np.sum(a * b, axis=-1))


def angle(at, to1, to2, tol=1e-14):
    """Riemannian angle in [0, pi] at ``at`` between the geodesics to ``to1`` and ``to2``."""
    a, b = _apex_frame(at, to1, to2)
    n1, n2 = np.hypot(a[..., 0], a[..., 1]), np.hypot(b[..., 0], b[..., 1])
    if np.any(n1 <= tol) or np.any(n2 <= tol):
        raise DegenerateError("degenerate corner: endpoint coincides with apex")
    return np.arctan2(np.abs(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]), np.sum(a * b, axis=-1))


def geodesic_eval(p, q, t):
    """Constant-speed geodesic from p (t=0) to q (t=1)."""
    t = np.asarray(t, dtype=float)
    return exp_map(p, t[..., None] * log_map(p, q))


def midpoint(p, q):
    return rescale(np.asarray(p, dtype=float) + np.asarray(q, dtype=float))


def triangle_angles(a, b, c):
    return angle(a, b, c), angle(b, c, a), angle(c, a, b)


def triangle_area(a, b, c):
    """Area by the angle defect; zero for degenerate triangles."""
    try:
        s = sum(triangle_angles(a, b, c))
    except DegenerateError:
        return 0.0
    return max(float(np.pi - s), 0.0)


def to_poincare(p):
    p = np.asarray(p, dtype=float)
    return p[..., 1:] / (1.0 + p[..., :1])


def from_poincare(z):
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1)
    if np.any(r2 >= 1.0):
        raise ValueError("point outside the open Poincare disk")
    x = np.concatenate([(1.0 + r2)[..., None], 2.0 * z], axis=-1) / (1.0 - r2)[..., None]
    return normalize(x)


def poincare_dist(z, w):
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    num = 2.0 * np.sum((z - w) ** 2, axis=-1)
    den = (1.0 - np.sum(z * z, axis=-1)) * (1.0 - np.sum(w * w, axis=-1))
    return np.arccosh(1.0 + num / den)


def to_klein(p):
    p = np.asarray(p, dtype=float)
    return p[..., 1:] / p[..., :1]


def from_klein(k):
    k = np.asarray(k, dtype=float)
    x = np.concatenate([np.ones(k.shape[:-1] + (1,)), k], axis=-1)
    return rescale(x)


# isometries


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def boost(s):
    """Hyperbolic translation by ``s`` along the x1 axis."""
    c, h = np.cosh(s), np.sinh(s)
    return np.array([[c, h, 0.0], [h, c, 0.0], [0.0, 0.0, 1.0]])


def boost_to(x):
    """Pure translation taking the origin to ``x`` (no rotation about the origin).

    Accepts a stack of points and then returns a stack of matrices.
    """
    x = np.asarray(x, dtype=float)
    x0, x1, x2 = x[..., 0], x[..., 1], x[..., 2]
    k = 1.0 / (1.0 + x0)
    rows = [
        np.stack([x0, x1, x2], axis=-1),
        np.stack([x1, 1.0 + k * x1 * x1, k * x1 * x2], axis=-1),
        np.stack([x2, k * x1 * x2, 1.0 + k * x2 * x2], axis=-1),
    ]
    return np.stack(rows, axis=-2)


def to_origin(p, x):
    """Image of ``x`` under the pure translation taking ``p`` to the origin."""
    p = np.asarray(p, dtype=float)
    back = boost_to(p * np.array([1.0, -1.0, -1.0]))
    return np.einsum("...ij,...j->...i", back, np.asarray(x, dtype=float))


def translation(p, q):
    """Translation along the geodesic through p and q taking p to q."""
    A = boost_to(p)
    return A @ boost_to(normalize(inverse(A) @ np.asarray(q, dtype=float))) @ inverse(A)


def inverse(M):
    """Inverse of an SO+(2,1) matrix, J M^T J."""
    return J @ np.asarray(M).T @ J


def apply(M, x):
    x = np.asarray(x, dtype=float)
    return normalize(x @ np.asarray(M).T)


def is_isometry(M, tol=1e-10):
    M = np.asarray(M, dtype=float)
    return bool(
        np.max(np.abs(M.T @ J @ M - J)) < tol and M[0, 0] > 0 and abs(np.linalg.det(M) - 1.0) < tol
    )


def random_isometry(rng, max_shift=3.0):
    return rotation(rng.uniform(0, 2 * np.pi)) @ boost(rng.uniform(0, max_shift)) @ rotation(
        rng.uniform(0, 2 * np.pi)
    )


def random_point(rng, max_r=3.0, size=None):
    if size is None:
        return polar(rng.uniform(0, max_r), rng.uniform(0, 2 * np.pi))
    r = rng.uniform(0, max_r, size)
    th = rng.uniform(0, 2 * np.pi, size)
    return np.stack([np.cosh(r), np.sinh(r) * np.cos(th), np.sinh(r) * np.sin(th)], axis=-1)


def random_tangent(rng, p, max_norm=1.0):
    """Tangent vector at p with uniform direction and norm in [0, max_norm]."""
    M = translation(ORIGIN, p)
    th = rng.uniform(0, 2 * np.pi)
    r = rng.uniform(0, max_norm)
    return M @ np.array([0.0, r * np.cos(th), r * np.sin(th)])


# oriented geodesics


def geodesic_through(p, q):
    """Unit normal of the geodesic from p to q; the left side is positive."""
    u = np.cross(p, q) @ J
    # with this sign, points to the left of p -> q satisfy <x,u> < 0
    n = np.sqrt(mdot(u, u))
    if n <= _SMALL:
        raise DegenerateError("geodesic through coincident points")
    return -u / n


def side_of(x, u):
    """<x,u>: negative on the positive (inner) side of the geodesic."""
    return mdot(x, u)


def geodesic_intersection(u, w):
    """Intersection point of two geodesics given by normals, or None if disjoint."""
    x = np.cross(u, w) @ J
    nn = mdot(x, x)
    if nn >= 0:
        return None
    x = x / np.sqrt(-nn)
    return x if x[0] > 0 else -x


def dist_to_geodesic(x, u):
    return np.abs(np.arcsinh(mdot(x, u)))
