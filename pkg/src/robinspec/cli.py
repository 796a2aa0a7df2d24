"""Command-line front end: ``robinspec <subcommand> [flags]``.

Exit codes: 0 when every check passes, 2 when a check fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import RobinSpecError

DEFAULT_CURVE = {"shape": "ellipse", "a": 2.0, "b": 1.0}


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text):
    ns, nt = text.lower().split("x")
    return int(ns), int(nt)


def _curve_spec(arg):
    if arg is None:
        return dict(DEFAULT_CURVE)
    if arg.lstrip().startswith("{"):
        return json.loads(arg)
    return json.loads(Path(arg).read_text())


def _site(args):
    from .geometry import arc_length_reparam, curve_from_spec, localize_max

    curve = curve_from_spec(_curve_spec(args.curve))
    profile = arc_length_reparam(curve, 1024)
    return localize_max(profile, site=args.site)


def _h_values(args, default):
    if args.gamma_grid:
        g = np.array(args.gamma_grid)
        if np.any(g >= 0):
            raise ValueError("gamma values must be negative")
        return list(g ** -2.0)
    return args.h_grid or default


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_rows(args, rows, fields):
    if args.format == "json":
        _emit(args, json.dumps(rows, indent=2))
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(args, buf.getvalue())


# subcommands

def cmd_model1d(args):
    from .model1d import Model1DConfig, fd_eigs_H0h, fd_eigs_Hbetah, solve_transcendental

    rows = []
    for L in args.lengths:
        pair = solve_transcendental(L)
        cfg = Model1DConfig(L, grid_n=args.points)
        fd = fd_eigs_H0h(cfg, 2)
        rows.append({"param": L, "kind": "interval", "exact": pair.lam, "fd": fd[0],
                     "ratio": (pair.lam + 1) / (4 * np.exp(-2 * L)), "second": fd[1]})
    for h in args.h_grid or []:
        cfg = Model1DConfig.from_h(h, args.rho, args.beta, args.points, strict=args.strict)
        lam = fd_eigs_Hbetah(cfg, 1)[0]
        rows.append({"param": h, "kind": "weighted", "exact": -1 - args.beta * np.sqrt(h),
                     "fd": lam, "ratio": (lam + 1 + args.beta * np.sqrt(h)) / (args.beta**2 * h)
                     if args.beta else float("nan"), "second": float("nan")})
    _emit_rows(args, rows, ["param", "kind", "exact", "fd", "ratio", "second"])
    return 0


def cmd_expand(args):
    from .corrections import zeta_coefficients
    from .expansion import ExpansionCoefficients, lambda_terms

    lm = _site(args)
    gammas = args.gamma_grid or [-(h ** -0.5) for h in (args.h_grid or [0.01])]
    out = []
    for n in args.levels:
        zeta = zeta_coefficients(lm.profile.jet(12), n, 5) if args.order >= 0 else []
        co = ExpansionCoefficients(lm.kappa_max, lm.k2, n, zeta)
        for g in gammas:
            terms = lambda_terms(g, n, co, args.order)
            out.append({"gamma": g, "n": n, "order": args.order,
                        "value": float(sum(terms)), "terms": [float(t) for t in terms]})
    _emit(args, json.dumps(out, indent=2))
    return 0


def cmd_corrections(args):
    from .corrections import build_operator_series, run_iteration

    lm = _site(args)
    M = max(args.order, 0)
    jet = lm.profile.jet(M + 4)
    if args.exact:
        # rational approximations of the measured jet
        jet = [Fraction(float(v)).limit_denominator(10**6) for v in jet]
        jet[1] = Fraction(0)
    out = []
    for n in args.levels:
        st = run_iteration(build_operator_series(jet, M, exact=args.exact), n, M)
        rec = {"n": n, "zeta": st.zeta_float, "exact": bool(args.exact)}
        if args.exact:
            rec["basis"] = "r^0..r^3 with r = (k2/2)^(1/4)"
            rec["k2"] = str(-jet[2])
            rec["zeta_exact"] = [[str(c) for c in z] for z in st.zeta]
        out.append(rec)
    _emit(args, json.dumps(out, indent=2))
    return 0


def cmd_wkb(args):
    from .wkb import wkb_iterate

    lm = _site(args)
    sol = wkb_iterate(lm.profile, L=max(args.order, 4))
    s = np.linspace(sol.window[0], sol.window[1], 41)
    out = {"mu": [float(m) for m in sol.mu],
           "theta_samples": [[float(a), float(b)] for a, b in zip(s, sol.theta(s))],
           "xi0_samples": [[float(a), float(b)] for a, b in zip(s, sol.xi[0](s))],
           "eikonal_residual": sol.eikonal_residual,
           "transport_residuals": sol.transport_residuals}
    _emit(args, json.dumps(out, indent=2))
    return 0


def cmd_solve_boundary(args):
    from .solvers import boundary_operator_eigs

    lm = _site(args)
    gammas = args.gamma_grid or [-(h ** -0.5) for h in (args.h_grid or [0.01])]
    w = args.window * lm.profile.period if args.window else None
    rows = []
    for g in gammas:
        res = boundary_operator_eigs(lm.profile, g, max(args.levels), args.modes,
                                     window=None if w is None else (-w, w))
        for n in args.levels:
            rows.append({"param": g, "eigen_index": n, "value": float(res.eigenvalues[n - 1]),
                         "residual": res.meta.get("resolution_shift", 0.0)})
    _emit_rows(args, rows, ["param", "eigen_index", "value", "residual"])
    return 0


def cmd_solve_2d(args):
    from .solvers import collar_2d_eigs, default_collar_depth

    lm = _site(args)
    ns, nt = args.grid
    w = (args.window or 0.25) * lm.profile.period
    rows = []
    for h in _h_values(args, [0.01]):
        T = default_collar_depth(h, lm.kappa_max, args.collar_depth_mult)
        res = collar_2d_eigs(lm.profile, h, max(args.levels), ns, nt, T=T, window=(-w, w),
                             seed=args.seed, check_truncation=False,
                             extrapolate=args.extrapolate)
        for n in args.levels:
            rows.append({"param": h, "eigen_index": n, "value": float(res.eigenvalues[n - 1]),
                         "residual": float(res.residuals[n - 1])})
    _emit_rows(args, rows, ["param", "eigen_index", "value", "residual"])
    return 0


def cmd_shoot_disc(args):
    from .solvers import shooting_disc

    rows = []
    for h in _h_values(args, [0.01]):
        rows.append({"param": h, "eigen_index": 1,
                     "value": shooting_disc(args.radius, h, args.method), "residual": 0.0})
    _emit_rows(args, rows, ["param", "eigen_index", "value", "residual"])
    return 0


def cmd_verify(args):
    from .harness import SweepSpec, report_emit, verify

    spec = SweepSpec(_curve_spec(args.curve),
                     _h_values(args, [1 / 100, 1 / 200, 1 / 400, 1 / 800, 1 / 1600]),
                     levels=args.levels, methods=args.methods, grid=args.grid,
                     collar_depth_mult=args.collar_depth_mult, window_fraction=args.window or 0.25,
                     extrapolate=args.extrapolate, modes=args.modes, site=args.site,
                     seed=args.seed, workers=args.workers)
    report = verify(spec)
    if args.out:
        report_emit(report, args.out, args.format)
    else:
        sys.stdout.write(report.to_json() + "\n")
    for c in report.checks:
        sys.stderr.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['detail']}\n")
    return 0 if report.passed else 2


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", help="curve spec: JSON file or inline JSON "
                        '(default {"shape": "ellipse", "a": 2, "b": 1})')
    common.add_argument("--site", type=int, default=0,
                        help="index of the curvature maximum to expand around")
    common.add_argument("--h-grid", type=_floats, help="comma-separated h values")
    common.add_argument("--gamma-grid", type=_floats, help="comma-separated negative gammas")
    common.add_argument("--levels", type=_ints,
                        help="level indices, e.g. 1,2 (default 1; verify: 1,2)")
    common.add_argument("--order", type=int, default=-1,
                        help="correction order M (negative: three-term form)")
    common.add_argument("--collar-depth-mult", type=float, default=8.0)
    common.add_argument("--grid", type=_grid, default=(512, 128), help="NSxNT")
    common.add_argument("--modes", type=int, default=256)
    common.add_argument("--window", type=float,
                        help="half-window around the site as a fraction of the perimeter")
    common.add_argument("--extrapolate", action=argparse.BooleanOptionalAction,
                        help="Richardson-extrapolate 2D eigenvalues from two grids "
                        "(default off; verify: on)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--exact", action="store_true", help="rational arithmetic")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="robinspec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    m = sub.add_parser("model1d", parents=[common], help="1D boundary-layer models")
    m.add_argument("--lengths", type=_floats, default=[6.0, 8.0, 10.0, 12.0])
    m.add_argument("--points", type=int, default=2000)
    m.add_argument("--beta", type=float, default=0.0)
    m.add_argument("--rho", type=float, default=0.5)
    m.add_argument("--strict", action="store_true", help="enforce |beta| h^(1/2) L < 1/3")
    m.set_defaults(func=cmd_model1d)
    sub.add_parser("expand", parents=[common], help="closed-form expansion in gamma"
                   ).set_defaults(func=cmd_expand)
    sub.add_parser("corrections", parents=[common], help="correction coefficients zeta"
                   ).set_defaults(func=cmd_corrections)
    sub.add_parser("wkb", parents=[common], help="WKB energy coefficients"
                   ).set_defaults(func=cmd_wkb)
    sub.add_parser("solve-boundary", parents=[common], help="effective boundary operator"
                   ).set_defaults(func=cmd_solve_boundary)
    sub.add_parser("solve-2d", parents=[common], help="2D collar eigenvalues"
                   ).set_defaults(func=cmd_solve_2d)
    d = sub.add_parser("shoot-disc", parents=[common], help="disc ground state")
    d.add_argument("--radius", type=float, default=1.0)
    d.add_argument("--method", choices=("bessel", "ode"), default="bessel")
    d.set_defaults(func=cmd_shoot_disc)
    v = sub.add_parser("verify", parents=[common], help="remainder-law sweep")
    v.add_argument("--methods", type=lambda t: t.split(","), default=["2d"])
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return p


def _join_negative_lists(argv):
    # argparse would read "-10,-100" as an option; bind it to the preceding flag
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and tok[:1] == "-" \
                and tok[1:2].isdigit():
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_lists(argv))
    except SystemExit as exc:
        # usage errors are execution errors here; 2 is reserved for failed checks
        return 0 if exc.code in (0, None) else 1
    verifying = args.command == "verify"
    if args.levels is None:
        args.levels = [1, 2] if verifying else [1]
    if args.extrapolate is None:
        args.extrapolate = verifying
    try:
        return args.func(args)
    except (RobinSpecError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"robinspec: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
