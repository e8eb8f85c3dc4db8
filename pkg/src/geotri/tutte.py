"""Balanced (generalized Tutte) geodesic triangulations and mean value weights.

Weights live on directed edges and are stored as arrays aligned with
``SimplicialSurface.directed_edges``.  ``solve_balanced`` relaxes every vertex
simultaneously toward the weighted geodesic average of its neighbours until
the balance residual ``sum_j w_ij log(q_i, q_j)`` vanishes.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import hypgeom as hg
from . import triangulation as tri

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 200_000


class SolverError(RuntimeError):
    def __init__(self, msg, residual=None, mapping=None):
        super().__init__(msg)
        self.residual = residual
        self.mapping = mapping


class BoundaryError(ValueError):
    """Mean value weights requested for a mapping on the boundary of the embedding space."""


def _rows(surface):
    return surface.directed_edges[:, 0]


def check_weights(surface, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (len(surface.directed_edges),):
        raise ValueError(f"expected {len(surface.directed_edges)} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    return w


def normalize(surface, w):
    """Scale each vertex's outgoing weights to sum to one."""
    w = check_weights(surface, w)
    src = _rows(surface)
    sums = np.bincount(src, weights=w, minlength=surface.n_vertices)
    return w / sums[src]


def uniform_weights(surface):
    return normalize(surface, np.ones(len(surface.directed_edges)))


def random_weights(surface, rng, low=0.2, high=5.0):
    """Log-uniform positive weights in [low, high]."""
    return np.exp(rng.uniform(np.log(low), np.log(high), len(surface.directed_edges)))


def balance_residual(phi, w):
    """Per-vertex residual vectors sum_j w_ij v_ij, shape (n, 3)."""
    w = np.asarray(w, dtype=float)
    v = phi.edge_vectors()
    src = _rows(phi.surface)
    r = np.zeros((phi.surface.n_vertices, 3))
    np.add.at(r, src, w[:, None] * v)
    return r


def residual_norms(phi, w):
    return hg.mnorm(balance_residual(phi, w))


@dataclass
class SolveLog:
    rows: list  # (iteration, residual, tau)

    def to_csv(self):
        lines = ["iteration,residual,tau"]
        lines += [f"{i},{r!r},{t!r}" for i, r, t in self.rows]
        return "\n".join(lines) + "\n"


class _Relaxation:
    """Vectorised residual evaluation for a fixed complex and weight vector."""

    def __init__(self, phi, w):
        S = phi.surface
        self.n = S.n_vertices
        self.src = S.directed_edges[:, 0]
        self.dst = S.directed_edges[:, 1]
        self.mats = phi.deck_mats
        self.w = w[:, None]

    def residual(self, q):
        tgt = np.einsum("eij,ej->ei", self.mats, q[self.dst])
        v = hg.log_map(q[self.src], tgt)
        r = np.zeros((self.n, 3))
        np.add.at(r, self.src, self.w * v)
        return r


def solve_balanced(w, init, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, check_embedded=True, record=None):
    """Damped Jacobi relaxation to the unique w-balanced triangulation.

    ``w`` is normalized first, which leaves the solution unchanged.  Each
    step moves every vertex along its residual by ``tau``; a step that
    increases the largest residual is rejected and ``tau`` halves, and after
    five accepted steps ``tau`` grows by 1.5 up to 1.  ``record`` may be a
    list that receives ``(iteration, residual, tau)`` rows.
    """
    S = init.surface
    w = normalize(S, w)
    relax = _Relaxation(init, w)
    q = np.array(init.lifts)
    r = relax.residual(q)
    res = float(hg.mnorm(r).max())
    tau = 1.0
    streak = 0
    it = 0
    if record is not None:
        record.append((0, res, tau))
    while res >= tol:
        if it >= max_iters:
            raise SolverError(
                f"no convergence after {max_iters} iterations (residual {res:.3e})",
                residual=res,
                mapping=init.with_lifts(q),
            )
        it += 1
        q_new = hg.exp_map(q, tau * r)
        r_new = relax.residual(q_new)
        res_new = float(hg.mnorm(r_new).max())
        if res_new <= res:
            q, r, res = q_new, r_new, res_new
            streak += 1
            if streak >= 5:
                tau = min(1.0, 1.5 * tau)
                streak = 0
        else:
            tau *= 0.5
            streak = 0
            if tau < 1e-12:
                raise SolverError(f"step size collapsed (residual {res:.3e})", residual=res, mapping=init.with_lifts(q))
        if record is not None:
            record.append((it, res, tau))
    out = init.with_lifts(q)
    log.debug("balanced solve: %d iterations, residual %.3e", it, res)
    if check_embedded and not tri.is_embedded(out):
        raise SolverError("converged to non-embedding", residual=res, mapping=out)
    return out


def _flank_corners(surface):
    """For each directed edge, the corner rows whose first / second side is that edge."""
    C = surface.corners
    first = np.empty(len(surface.directed_edges), dtype=int)
    second = np.empty(len(surface.directed_edges), dtype=int)
    first[C[:, 1]] = np.arange(len(C))
    second[C[:, 2]] = np.arange(len(C))
    return first, second


def mvc_weight(alpha, beta, length):
    return (np.tan(np.asarray(alpha) / 2) + np.tan(np.asarray(beta) / 2)) / length


def mean_value_weights(phi):
    """w_ij = (tan(alpha_ij / 2) + tan(beta_ij / 2)) / l_ij with alpha, beta the corners at i flanking ij."""
    ang, bad = tri.corner_angles(phi)
    lengths = phi.edge_lengths()
    if bad.any() or np.any(lengths <= 0) or np.any(ang <= 0) or np.any(ang >= np.pi):
        raise BoundaryError("mapping on boundary of the embedding space")
    first, second = _flank_corners(phi.surface)
    return mvc_weight(ang[first], ang[second], lengths)


def roundtrip_check(phi, tol=DEFAULT_TOL, init=None, **kw):
    """d_X between phi and the balanced mapping for its mean value weights.

    The solve starts from ``init`` (default ``phi`` itself); passing a
    different start turns this into a uniqueness check as well.
    """
    w = mean_value_weights(phi)
    out = solve_balanced(w, phi if init is None else init, tol=tol, **kw)
    return tri.mapping_distance(out, phi)


def morph(phi0, phi1, t, init=None, tol=DEFAULT_TOL, **kw):
    """Balanced mapping for the linear blend of the two mean value weight vectors."""
    if phi0.surface.n_vertices != phi1.surface.n_vertices or not np.array_equal(phi0.surface.faces, phi1.surface.faces):
        raise tri.HomotopyClassError("mappings of different complexes")
    if phi0.deck != phi1.deck:
        raise tri.HomotopyClassError("different homotopy class")
    w = normalize(phi0.surface, (1 - t) * mean_value_weights(phi0) + t * mean_value_weights(phi1))
    if init is None:
        init = phi0 if t <= 0.5 else phi1
    return solve_balanced(w, init, tol=tol, **kw)


def morph_path(phi0, phi1, ts, tol=DEFAULT_TOL, **kw):
    """morph at each t, warm-starting every solve from the previous sample."""
    out = []
    prev = phi0
    for t in ts:
        prev = morph(phi0, phi1, float(t), init=prev, tol=tol, **kw)
        out.append(prev)
    return out


def limit_weights(surface, face, delta):
    """Uniform weights except at vertex i of face (i, j, k), where w_ij + w_ik = 1 - delta."""
    i, j, k = (int(x) for x in face)
    w = uniform_weights(surface)
    idx = surface.dedge_index
    others = [m for m in surface.link(i) if m not in (j, k)]
    w[idx[(i, j)]] = w[idx[(i, k)]] = (1 - delta) / 2
    for m in others:
        w[idx[(i, m)]] = delta / len(others)
    return w


def weight_limit_probe(init, face, levels, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Table of (delta_k, theta_min) for delta_k = 2^-k, k = 1..levels.

    Each level warm-starts from the previous solution.  A solver failure is
    tolerated only at the last level, where the row gets ``converged=False``.
    """
    S = init.surface
    face = tuple(int(x) for x in face)
    if tuple(sorted(face)) not in {tuple(sorted(f)) for f in S.faces.tolist()}:
        raise ValueError(f"{face} is not a face")
    rows = []
    prev = init
    for lvl in range(1, levels + 1):
        delta = 2.0**-lvl
        w = limit_weights(S, face, delta)
        try:
            prev = solve_balanced(w, prev, tol=tol, max_iters=max_iters)
            rows.append({"k": lvl, "delta": delta, "theta_min": tri.theta_min(prev), "converged": True})
        except SolverError as exc:
            if lvl != levels:
                raise
            theta = tri.theta_min(exc.mapping) if exc.mapping is not None else float("nan")
            rows.append({"k": lvl, "delta": delta, "theta_min": theta, "converged": False})
    return rows
