"""SVG drawings of a geodesic mapping in the Poincare disk.

Each edge is drawn inside the fundamental octagon: the lifted segment is
walked across octagon sides, and every piece is carried back into the domain
by the generator of the side it crossed.  Pieces become circular arcs
orthogonal to the unit circle, and all pieces of one edge share one <path>.
"""

import numpy as np

from . import hypgeom as hg
from . import surface as sf

_FMT = "{:.6f}"


def _xy(p):
    z = hg.to_poincare(p)
    return float(z[0]), -float(z[1])  # SVG y axis points down


def _num(x):
    s = _FMT.format(x)
    return "0.000000" if s == "-0.000000" else s


def _arc(p, q):
    """SVG path fragment for the geodesic arc from p to q (starting with M)."""
    x1, y1 = _xy(p)
    x2, y2 = _xy(q)
    head = f"M {_num(x1)} {_num(y1)} "
    # circle through z1, z2 and the inverse of z1 in the unit circle
    r1 = x1 * x1 + y1 * y1
    cross = x1 * y2 - y1 * x2
    if abs(cross) < 1e-9 or r1 < 1e-18:
        return head + f"L {_num(x2)} {_num(y2)}"
    x3, y3 = x1 / r1, y1 / r1
    d = 2 * (x1 * (y2 - y3) + x2 * (y3 - y1) + x3 * (y1 - y2))
    s1, s2, s3 = r1, x2 * x2 + y2 * y2, x3 * x3 + y3 * y3
    cx = (s1 * (y2 - y3) + s2 * (y3 - y1) + s3 * (y1 - y2)) / d
    cy = (s1 * (x3 - x2) + s2 * (x1 - x3) + s3 * (x2 - x1)) / d
    rad = float(np.hypot(x1 - cx, y1 - cy))
    sweep = 1 if (x1 - cx) * (y2 - cy) - (y1 - cy) * (x2 - cx) > 0 else 0
    return head + f"A {_num(rad)} {_num(rad)} 0 0 {sweep} {_num(x2)} {_num(y2)}"


def clip_to_domain(group, domain, a, b, max_pieces=64):
    """Split the segment a->b into pieces, each carried into the octagon.

    Returns a list of (start, end) point pairs inside the closed octagon.
    """
    a0, word = sf.reduce_to_domain(group, domain, a)
    M = hg.inverse(group.eval(word)) if word else np.eye(3)
    b0 = M @ b
    pieces = []
    entered = None
    for _ in range(max_pieces):
        sa = hg.mdot(domain.sides, a0)
        sb = hg.mdot(domain.sides, b0)
        lam, k = 1.0, -1
        for s in range(8):
            if s == entered:
                continue
            if sb[s] > 1e-12 and sa[s] < sb[s]:
                cand = max(-sa[s], 0.0) / (sb[s] - sa[s])
                if cand < lam:
                    lam, k = cand, s
        if k < 0:
            pieces.append((a0, hg.rescale(b0)))
            return pieces
        e = hg.rescale((1 - lam) * a0 + lam * b0)
        if lam > 0:
            pieces.append((a0, e))
        # step into the tile across side k and pull it back into the domain
        inv = group.generators[group.side_letters[k].swapcase()]
        a0 = hg.rescale(inv @ e)
        b0 = inv @ b0
        entered = group.side_letters.index(group.side_letters[k].swapcase())
    raise RuntimeError("edge crosses too many octagon sides")


def render_svg(phi, domain, seed=None, ghosts=False, size=800):
    group = phi.group
    S = phi.surface
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="-1.05 -1.05 2.1 2.1">',
    ]
    if seed is not None:
        out.append(f"<!-- seed={int(seed)} -->")
    out.append('<circle cx="0" cy="0" r="1" fill="none" stroke="#888888" stroke-width="0.004"/>')
    v = domain.vertices
    oct_d = " ".join(_arc(v[k - 1], v[k]) for k in range(8))
    out.append(f'<path class="domain" d="{oct_d}" fill="none" stroke="#3060c0" stroke-width="0.006"/>')
    targets = phi.targets()
    idx = S.dedge_index
    if ghosts:
        for i, j in S.edges:
            b = targets[idx[(int(i), int(j))]]
            d = _arc(phi.lifts[i], b)
            out.append(f'<path class="ghost" d="{d}" fill="none" stroke="#cccccc" stroke-width="0.002"/>')
    for i, j in S.edges:
        b = targets[idx[(int(i), int(j))]]
        d = " ".join(_arc(p, q) for p, q in clip_to_domain(group, domain, phi.lifts[i], b))
        out.append(f'<path class="edge" data-edge="{int(i)}-{int(j)}" d="{d}" fill="none" stroke="#000000" stroke-width="0.003"/>')
    for i in range(S.n_vertices):
        p, _ = sf.reduce_to_domain(group, domain, phi.lifts[i])
        x, y = _xy(p)
        out.append(f'<circle class="vertex" cx="{_num(x)}" cy="{_num(y)}" r="0.008" fill="#c03030"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
