"""Command-line surface: generate / solve / check / profile-export.

Exit codes: 0 success or all checks passing, 1 usage or file errors,
2 solver non-convergence, 3 check failures. Runs are deterministic: the
same command line produces byte-identical output files.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import checks as ck
from . import reporting as rep
from .errors import DomainError, SolverError
from .grids import GridFunction, Rectangle
from .geometry import partials, translator_residual
from .solitons import (BowlProfile, CylinderParams, GrimParams, bowl_grid,
                       bowl_profile_solve, bowl_radial_function, grim_grid,
                       sample_to_grid, tilted_cylinder_value, grim_reaper_value)
from .solver import (SolveConfig, fill_from_boundary, newton_solve,
                     parabolic_relax, strip_boundary_data)


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _add_domain_flags(p, defaults=(None, None, None, None)):
    p.add_argument("--x1-min", type=float, default=defaults[0])
    p.add_argument("--x1-max", type=float, default=defaults[1])
    p.add_argument("--x2-min", type=float, default=defaults[2])
    p.add_argument("--x2-max", type=float, default=defaults[3])


def build_parser() -> _Parser:
    parser = _Parser(prog="tlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a closed-form family to a grid file")
    g.add_argument("family", choices=["reaper", "grim", "tilted", "bowl"])
    g.add_argument("--lambda", dest="lam", type=float, default=2.0)
    g.add_argument("--tilt", choices=["+", "-"], default="+")
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--t", type=float, default=0.5)
    g.add_argument("--offset", type=float, default=0.0)
    g.add_argument("--rmax", type=float, default=None)
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--nx", type=int, default=101)
    g.add_argument("--ny", type=int, default=101)
    _add_domain_flags(g)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve the translator equation on a rectangle")
    s.add_argument("mode", choices=["newton", "relax"])
    s.add_argument("--boundary", choices=["grim", "bowl", "strip", "file"],
                   default="grim")
    s.add_argument("--boundary-file", default=None)
    s.add_argument("--lambda", dest="lam", type=float, default=2.0)
    s.add_argument("--tilt", choices=["+", "-"], default="+")
    s.add_argument("--eps-frac", type=float, default=0.25,
                   help="strip truncation as a fraction of the half-width")
    s.add_argument("--Y", type=float, default=30.0)
    s.add_argument("--smoothing", type=float, default=None,
                   help="corner rounding of the strip data; defaults to "
                        "max(1, lambda^2 - 1) so the data stays within the "
                        "translator Hessian bounds")
    s.add_argument("--rmax", type=float, default=None)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--nx", type=int, default=101)
    s.add_argument("--ny", type=int, default=101)
    _add_domain_flags(s)
    s.add_argument("--init", choices=["fill", "file"], default="fill")
    s.add_argument("--init-file", default=None)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iters", type=int, default=40)
    s.add_argument("--damping", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--max-steps", type=int, default=20000)
    s.add_argument("--out", required=True)
    s.add_argument("--log", default=None)

    c = sub.add_parser("check", help="certify a solution grid against the statement suite")
    c.add_argument("solution")
    c.add_argument("--suite", default="default",
                   help="comma-separated check names, or 'default'")
    c.add_argument("--skip", default="",
                   help="comma-separated check names to drop from the suite")
    c.add_argument("--lambda", dest="lam", type=float, default=None)
    c.add_argument("--window", type=float, default=5.0)
    c.add_argument("--margin", type=float, default=None)
    c.add_argument("--delta", type=float, default=None)
    c.add_argument("--a-cap", type=float, default=1.0)
    c.add_argument("--paths", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol-convexity", type=float, default=None)
    c.add_argument("--tol-gradient", type=float, default=None)
    c.add_argument("--tol-harnack", type=float, default=1e-8)
    c.add_argument("--tol-identities", type=float, default=None)
    c.add_argument("--tol-asymptotics", type=float, default=0.05)
    c.add_argument("--tol-symmetry", type=float, default=None)
    c.add_argument("--run-id", default="tlab-check")
    c.add_argument("--out", required=True)

    e = sub.add_parser("profile-export",
                       help="CSV of the radial profile and its asymptote gap")
    e.add_argument("--rmax", type=float, default=80.0)
    e.add_argument("--step", type=float, default=1e-3)
    e.add_argument("--out", required=True)

    return parser


def _default_domain(args):
    if args.family == "grim":
        R = GrimParams(args.lam).half_width
        return (-0.75 * R, 0.75 * R, -5.0, 5.0)
    if args.family == "reaper":
        return (-0.75 * math.pi / 2, 0.75 * math.pi / 2, -1.0, 1.0)
    if args.family == "tilted":
        return (-0.8 * args.radius, 0.8 * args.radius, -2.0, 2.0)
    return (-4.0, 4.0, -4.0, 4.0)


def _domain_from(args, defaults) -> Rectangle:
    vals = [args.x1_min, args.x1_max, args.x2_min, args.x2_max]
    vals = [d if v is None else v for v, d in zip(vals, defaults)]
    return Rectangle(*vals)


def cmd_generate(args) -> int:
    if args.family in ("grim", "reaper") and args.lam < 1.0:
        raise ValueError("the grim family needs lambda >= 1")
    defaults = _default_domain(args)
    rect = _domain_from(args, defaults)
    if args.family == "grim":
        p = GrimParams(args.lam, 1 if args.tilt == "+" else -1)
        u = grim_grid(p, rect, args.nx, args.ny)
    elif args.family == "reaper":
        u = sample_to_grid(lambda a, b: grim_reaper_value(a) + 0.0 * b,
                           rect, args.nx, args.ny)
    elif args.family == "tilted":
        cyl = CylinderParams(args.radius, args.t, args.offset)
        u = sample_to_grid(lambda a, b: tilted_cylinder_value(cyl, a, b),
                           rect, args.nx, args.ny)
    else:
        corner = math.hypot(max(abs(rect.x1_min), abs(rect.x1_max)),
                            max(abs(rect.x2_min), abs(rect.x2_max)))
        rmax = args.rmax if args.rmax is not None else corner * (1.0 + 1e-9) + args.step
        if rmax < corner:
            raise ValueError(f"--rmax {rmax} does not cover the domain corner radius {corner}")
        profile = bowl_profile_solve(rmax, args.step)
        u = bowl_grid(profile, rect, args.nx, args.ny)
    rep.write_grid(args.out, u)
    res = translator_residual(u)
    print(f"max_interior_residual {np.nanmax(np.abs(res)):.17g}")
    return 0


def _solve_problem(args):
    """Boundary callable + rectangle + init grid for a solve command."""
    if args.boundary == "grim":
        if args.lam < 1.0:
            raise ValueError("the grim family needs lambda >= 1")
        p = GrimParams(args.lam, 1 if args.tilt == "+" else -1)
        R = p.half_width
        rect = _domain_from(args, (-0.75 * R, 0.75 * R, -3.0, 3.0))
        from .solitons import grim_cylinder_value
        boundary = lambda a, b: grim_cylinder_value(p, a, b)
    elif args.boundary == "strip":
        if args.lam < 1.0:
            raise ValueError("the grim family needs lambda >= 1")
        p = GrimParams(args.lam, 1 if args.tilt == "+" else -1)
        eps = args.eps_frac * p.half_width
        smoothing = args.smoothing
        if smoothing is None:
            smoothing = max(1.0, args.lam * args.lam - 1.0)
        rect, boundary = strip_boundary_data(p, eps, args.Y, smoothing)
    elif args.boundary == "bowl":
        rect = _domain_from(args, (-4.0, 4.0, -4.0, 4.0))
        corner = math.hypot(max(abs(rect.x1_min), abs(rect.x1_max)),
                            max(abs(rect.x2_min), abs(rect.x2_max)))
        rmax = args.rmax if args.rmax is not None else corner * (1.0 + 1e-9) + args.step
        profile = bowl_profile_solve(rmax, args.step)
        boundary = bowl_radial_function(profile)
    else:
        if not args.boundary_file:
            raise ValueError("--boundary file needs --boundary-file")
        bgrid = rep.read_grid(args.boundary_file)
        rect = bgrid.rect
        boundary = bgrid
        if args.init == "fill":
            init = fill_from_boundary(rect, bgrid.nx, bgrid.ny, bgrid)
            return boundary, init
    if args.init == "file":
        if not args.init_file:
            raise ValueError("--init file needs --init-file")
        init = rep.read_grid(args.init_file)
        if init.rect != rect:
            raise ValueError("init grid domain does not match the solve domain")
    else:
        init = fill_from_boundary(rect, args.nx, args.ny, boundary)
    return boundary, init


def cmd_solve(args) -> int:
    boundary, init = _solve_problem(args)
    cfg = SolveConfig(tol=args.tol, max_newton_iters=args.max_iters,
                      damping=args.damping, relax_dt=args.dt,
                      max_relax_steps=args.max_steps)
    if args.mode == "newton":
        outcome = newton_solve(boundary, init, cfg)
    else:
        outcome = parabolic_relax(boundary, init, cfg)
    rep.write_grid(args.out, outcome.solution)
    log_path = args.log if args.log is not None else str(args.out) + ".log"
    lines = [f"{k} {r:.17g}" for k, r in enumerate(outcome.history)]
    status = "converged" if outcome.converged else f"not converged: {outcome.notes}"
    lines.append(f"# {status}; final_residual {outcome.final_residual:.17g}; "
                 f"iterations {outcome.iterations}")
    Path(log_path).write_text("\n".join(lines) + "\n")
    print(f"{'converged' if outcome.converged else 'not-converged'} "
          f"final_residual {outcome.final_residual:.17g} "
          f"iterations {outcome.iterations}")
    return 0 if outcome.converged else 2


def cmd_check(args) -> int:
    u = rep.read_grid(args.solution)
    grim = None
    if args.lam is not None:
        if args.lam < 1.0:
            raise ValueError("the grim family needs lambda >= 1")
        grim = GrimParams(args.lam)
    symmetric = abs(u.rect.x1_min + u.rect.x1_max) <= 1e-9 * u.rect.width1
    if args.suite == "default":
        names = list(ck.default_suite(grim, symmetric))
    else:
        names = [n.strip() for n in args.suite.split(",") if n.strip()]
    skip = {n.strip() for n in args.skip.split(",") if n.strip()}
    bad_skip = skip - set(ck.CANONICAL_ORDER)
    if bad_skip:
        raise ValueError(f"unknown check name(s) {sorted(bad_skip)}; "
                         f"valid names: {', '.join(ck.CANONICAL_ORDER)}")
    names = [n for n in names if n not in skip]
    cfg = ck.SuiteConfig(grim=grim,
                         convexity_tol=args.tol_convexity,
                         gradient_tol=args.tol_gradient,
                         harnack_tol=args.tol_harnack,
                         identity_tol=args.tol_identities,
                         asymptotics_tol=args.tol_asymptotics,
                         symmetry_tol=args.tol_symmetry,
                         a_cap=args.a_cap, window=args.window,
                         delta=args.delta, margin=args.margin,
                         harnack_paths=args.paths, seed=args.seed)
    reports = ck.run_suite(u, names, cfg)
    inputs = {
        "solution": str(args.solution), "suite": ",".join(names),
        "skip": ",".join(sorted(skip)), "lambda": args.lam,
        "window": args.window, "margin": args.margin, "delta": args.delta,
        "a_cap": args.a_cap, "paths": args.paths, "seed": args.seed,
        "tol_convexity": args.tol_convexity, "tol_gradient": args.tol_gradient,
        "tol_harnack": args.tol_harnack, "tol_identities": args.tol_identities,
        "tol_asymptotics": args.tol_asymptotics, "tol_symmetry": args.tol_symmetry,
    }
    report = rep.report_dict(args.run_id, inputs, reports)
    rep.write_report(args.out, report)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} "
              f"worst={r.worst_violation:.6e} tol={r.tolerance:.6e}")
    return 0 if all(r.passed for r in reports) else 3


def cmd_profile_export(args) -> int:
    profile = bowl_profile_solve(args.rmax, args.step)
    lines = ["r,f,fp,asymptote_gap"]
    for r, f, fp in zip(profile.r, profile.f, profile.fp):
        gap = "" if r < 1.0 else format(f - 0.5 * r * r + math.log(r), ".17g")
        lines.append(f"{format(r, '.17g')},{format(f, '.17g')},"
                     f"{format(fp, '.17g')},{gap}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "check":
            return cmd_check(args)
        return cmd_profile_export(args)
    except CliUsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (DomainError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SolverError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
