"""Command-line driver.

Exit codes: 0 ok, 1 diagnostic failure, 2 solver did not converge, 3 bad input.
Every command is deterministic given its arguments; ``--seed`` is the only
source of randomness and is echoed into every JSON artifact.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import files
from . import hypgeom as hg
from . import kernel as kn
from . import render
from . import surface as sf
from . import triangulation as tri
from . import tutte

log = logging.getLogger("geotri")

OK, DIAGNOSTIC, NO_CONVERGENCE, BAD_INPUT = 0, 1, 2, 3

# surface diagnostics thresholds, overridden wholesale by --tol
SURFACE_TOLS = {"relation": 1e-9, "angles": 1e-10, "cosh_R": 1e-10, "side_pairing": 1e-9}
ROUNDTRIP_MAX = 1e-7
DEFAULT_FACE = (6, 9, 0)


class InputError(ValueError):
    pass


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _base():
    group, domain = sf.build_genus2()
    _, phi = tri.build_base_triangulation(group, domain)
    return group, domain, phi


def _load(path, group):
    return files.read_mapping(path, group)


def _solver_kw(args):
    return {"tol": args.tol if args.tol is not None else tutte.DEFAULT_TOL, "max_iters": args.max_iters}


def cmd_surface(args):
    group, domain = sf.build_genus2()
    R = sf.CIRCUMRADIUS
    cot = 1.0 / np.tan(np.pi / 8)
    residuals = {
        "relation": group.relation_residual(exact=False),
        "angles": float(np.max(np.abs(domain.interior_angles() - np.pi / 4))),
        "cosh_R": abs(float(np.cosh(hg.dist(hg.ORIGIN, domain.vertices[0]))) - cot**2),
        "side_pairing": sf.side_pairing_residual(group, domain),
    }
    print(f"R={R:.4f} (circumradius {R!r})")
    print(f"inradius={sf.INRADIUS!r}")
    print("angles=" + " ".join(f"{a:.12f}" for a in domain.interior_angles()))
    failed = []
    for name, val in residuals.items():
        tol = args.tol if args.tol is not None else SURFACE_TOLS[name]
        status = "ok" if val < tol else "FAIL"
        print(f"{name}_residual={val:.3e} tol={tol:.1e} {status}")
        if val >= tol:
            failed.append(name)
    if failed:
        print("failing residuals: " + ", ".join(failed), file=sys.stderr)
        return DIAGNOSTIC
    return OK


def cmd_base(args):
    _, _, phi = _base()
    path = _out(args, "mapping.json")
    files.write_json(path, "mapping", files.mapping_to_doc(phi, args.seed))
    print(f"vertices={phi.surface.n_vertices} faces={len(phi.surface.faces)} theta_min={tri.theta_min(phi):.6f}")
    print(f"wrote {path}")
    return OK


def cmd_perturb(args):
    group, _ = sf.build_genus2()
    phi = _load(args.mapping, group)
    if not tri.is_embedded(phi):
        raise InputError("input mapping is not embedded")
    rng = np.random.default_rng(args.seed)
    out = tri.random_perturbation(phi, rng, args.scale)
    path = _out(args, "mapping.json")
    files.write_json(path, "mapping", files.mapping_to_doc(out, args.seed))
    print(f"theta_min={tri.theta_min(out):.6f}")
    print(f"wrote {path}")
    return OK


def cmd_balance(args):
    group, _ = sf.build_genus2()
    if args.init:
        init = _load(args.init, group)
    else:
        init = _base()[2]
    S = init.surface
    if args.weights:
        w = files.read_weights(args.weights, S)
    elif args.random_weights:
        w = tutte.random_weights(S, np.random.default_rng(args.seed))
    else:
        w = tutte.uniform_weights(S)
    record = []
    try:
        phi = tutte.solve_balanced(w, init, record=record, **_solver_kw(args))
    finally:
        with open(_out(args, "iterations.csv"), "w", encoding="utf-8") as fh:
            fh.write(tutte.SolveLog(record).to_csv())
    path = _out(args, "mapping.json")
    files.write_json(path, "mapping", files.mapping_to_doc(phi, args.seed))
    res = float(tutte.residual_norms(phi, tutte.normalize(S, w)).max())
    print(f"converged iterations={record[-1][0]} residual={res:.3e} theta_min={tri.theta_min(phi):.6f}")
    print(f"wrote {path}")
    return OK


def cmd_roundtrip(args):
    group, _ = sf.build_genus2()
    phi = _load(args.mapping, group)
    init = _load(args.init, group) if args.init else None
    d = tutte.roundtrip_check(phi, init=init, **_solver_kw(args))
    files.write_json(_out(args, "roundtrip.json"), "roundtrip", {"seed": args.seed, "distance": d})
    print(f"distance={d:.3e}")
    return OK if d < ROUNDTRIP_MAX else DIAGNOSTIC


def cmd_morph(args):
    group, _ = sf.build_genus2()
    a = _load(args.a, group)
    b = _load(args.b, group)
    if args.samples < 2:
        raise InputError("need at least 2 samples")
    ts = np.linspace(0.0, 1.0, args.samples)
    path = tutte.morph_path(a, b, ts, **_solver_kw(args))
    samples = []
    ok = True
    for t, m in zip(ts, path):
        emb = tri.is_embedded(m)
        ok &= emb
        samples.append({"t": float(t), "theta_min": tri.theta_min(m), "embedded": emb, "lifts": m.lifts})
    files.write_json(_out(args, "morph.json"), "morph", {"seed": args.seed, "samples": samples})
    d0 = tri.mapping_distance(path[0], a)
    d1 = tri.mapping_distance(path[-1], b)
    theta = min(s["theta_min"] for s in samples)
    print(f"samples={len(samples)} min_theta={theta:.6f} all_embedded={ok} endpoint_error={max(d0, d1):.3e}")
    return OK if ok and max(d0, d1) < ROUNDTRIP_MAX else DIAGNOSTIC


def cmd_degenerate(args):
    group, _ = sf.build_genus2()
    phi = _load(args.mapping, group)
    if not 0 <= args.vertex < phi.surface.n_vertices:
        raise InputError(f"no vertex {args.vertex}")
    if not tri.is_embedded(phi):
        raise InputError("input mapping is not embedded")
    path = kn.degenerate(phi, args.vertex, args.steps, seed=args.seed)
    files.write_json(_out(args, "degeneration.json"), "degeneration", files.degeneration_to_doc(path, args.seed))
    theta = path.theta
    print(f"vertex={args.vertex} theta_start={theta[0]:.6f} theta_end={theta[-1]:.3e}")
    t0 = path.first_crossing(args.kappa)
    print(f"first t with pair weight >= 1-{args.kappa:g}: {t0 if t0 is not None else 'none'}")
    positive = all(th > 0 for th in theta[:-1])
    return OK if positive and theta[-1] < 1e-3 else DIAGNOSTIC


def cmd_weightlimit(args):
    group, _ = sf.build_genus2()
    init = _load(args.init, group) if args.init else _base()[2]
    try:
        face = tuple(int(x) for x in args.face.split(","))
        if len(face) != 3:
            raise ValueError
    except ValueError:
        raise InputError(f"bad face {args.face!r}, expected i,j,k") from None
    try:
        rows = tutte.weight_limit_probe(init, face, args.levels, **_solver_kw(args))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    files.write_json(_out(args, "weightlimit.json"), "weightlimit", {"seed": args.seed, "face": face, "rows": rows})
    with open(_out(args, "weightlimit.csv"), "w", encoding="utf-8") as fh:
        fh.write("k,delta,theta_min,converged\n")
        for r in rows:
            fh.write(f"{r['k']},{r['delta']!r},{r['theta_min']!r},{int(r['converged'])}\n")
    for r in rows:
        print(f"k={r['k']:2d} delta={r['delta']:.6g} theta_min={r['theta_min']:.6f}" + ("" if r["converged"] else " (unconverged)"))
    th = [r["theta_min"] for r in rows]
    decreasing = all(a > b for a, b in zip(th, th[1:]))
    print(f"strictly_decreasing={decreasing}")
    return OK if decreasing else DIAGNOSTIC


def cmd_render(args):
    group, domain = sf.build_genus2()
    phi = _load(args.mapping, group)
    svg = render.render_svg(phi, domain, seed=args.seed, ghosts=args.ghosts)
    target = args.svg if os.path.isabs(args.svg) or os.path.dirname(args.svg) else _out(args, args.svg)
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {target}")
    return OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--tol", type=float, default=None, help="override tolerance")
    common.add_argument("--max-iters", type=int, default=tutte.DEFAULT_MAX_ITERS)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--verbose", "-v", action="count", default=0)

    p = argparse.ArgumentParser(prog="geotri", description="Balanced geodesic triangulations of a genus-2 surface.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("surface", parents=[common], help="octagon and group diagnostics")
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("base", parents=[common], help="write the base triangulation")
    s.set_defaults(func=cmd_base)

    s = sub.add_parser("perturb", parents=[common], help="seeded random embedded perturbation of a mapping")
    s.add_argument("mapping")
    s.add_argument("--scale", type=float, default=0.05)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("balance", parents=[common], help="solve for the balanced triangulation")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--weights", help="weights.json")
    g.add_argument("--uniform", action="store_true", help="uniform weights (default)")
    g.add_argument("--random-weights", action="store_true", help="seeded log-uniform weights")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--init", help="initial mapping.json")
    g.add_argument("--base", action="store_true", help="start from the base triangulation (default)")
    s.set_defaults(func=cmd_balance)

    s = sub.add_parser("roundtrip", parents=[common], help="distance to the balanced mapping of its mean value weights")
    s.add_argument("mapping")
    s.add_argument("--init", help="start the solve from this mapping instead")
    s.set_defaults(func=cmd_roundtrip)

    s = sub.add_parser("morph", parents=[common], help="morph through weight space")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--samples", type=int, default=50)
    s.set_defaults(func=cmd_morph)

    s = sub.add_parser("degenerate", parents=[common], help="collapse the star of one vertex")
    s.add_argument("mapping")
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--kappa", type=float, default=0.1, help="report the first t with w_ij + w_ik >= 1 - kappa")
    s.set_defaults(func=cmd_degenerate)

    s = sub.add_parser("weightlimit", parents=[common], help="minimum angle under concentrated weights")
    s.add_argument("--face", default=",".join(map(str, DEFAULT_FACE)), help="i,j,k; weight goes to ij and ik")
    s.add_argument("--levels", type=int, default=10)
    s.add_argument("--init", help="initial mapping.json (default: base triangulation)")
    s.set_defaults(func=cmd_weightlimit)

    s = sub.add_parser("render", parents=[common], help="draw a mapping in the Poincare disk")
    s.add_argument("mapping")
    s.add_argument("svg")
    s.add_argument("--ghosts", action="store_true", help="also draw the unclipped lifted edges")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)], format="%(message)s")
    try:
        return args.func(args)
    except tutte.SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NO_CONVERGENCE
    except (files.SchemaError, InputError, tri.HomotopyClassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (kn.KernelError, tutte.BoundaryError, hg.DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DIAGNOSTIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
