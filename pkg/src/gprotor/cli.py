"""Command-line interface: ``gp-rotor <subcommand>``.

Exit status is 0 on success, 2 for configuration or input errors and 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, GPRotorError

log = logging.getLogger("gprotor")


def _trap_args(p, omega=True):
    p.add_argument("--p", type=float, default=2.0, help="homogeneity degree in (1, 2]")
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--a2", type=float, default=0.0)
    if omega:
        p.add_argument("--omega", type=float, default=0.0, help="rotation velocity")


def _coupling(text: str, a_star: float) -> float:
    from .config import parse_a
    return parse_a(text, "a").resolve(a_star)


def cmd_townes(args):
    from .townes import a_star, solve_w
    prof = solve_w(args.rmax, args.tol)
    ast = a_star(prof)
    header = json.dumps({"a_star": ast, "w0": prof.w0, "tail_coeff": prof.tail_coeff})
    out = Path(args.out)
    data = np.column_stack([prof.r_nodes, prof.w_values, prof.dw_values])
    with open(out, "w") as fh:
        fh.write(f"# {header}\n")
        fh.write("r,w,dw\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")
    if args.plot:
        from .plotting import profile_figure
        profile_figure(prof, out.with_suffix(".png"))
    print(f"a* = {ast:.12f}  w(0) = {prof.w0:.12f}  C = {prof.tail_coeff:.8f}  r_match = {prof.r_match:g}")


def cmd_trap(args):
    from .trap import TrapSpec, homogeneous_part, omega_star, validate_assumption_V
    trap = TrapSpec(args.p, args.a1, args.a2)
    ws = omega_star(trap)
    print(f"Omega* = {ws:.12g}")
    branch = "p < 2: h = a1|x1|^p + a2|x2|^p" if trap.p < 2 else \
        "p = 2: h = (1 - Omega^2/4)|x|^2 + a1 x1^2 + a2 x2^2"
    print(f"branch: {branch}")
    try:
        h = homogeneous_part(trap, args.omega)
        print(f"h: {h.label}")
    except GPRotorError as exc:
        print(f"h: unavailable ({exc})")
    print(validate_assumption_V(trap, args.omega))


def cmd_concentration(args):
    from .concentration import alpha_of_a, concentration_data
    from .townes import a_star, default_profile
    from .trap import TrapSpec, require_subcritical
    trap = TrapSpec(args.p, args.a1, args.a2)
    require_subcritical(trap, args.omega)
    prof = default_profile()
    ast = a_star(prof)
    c = concentration_data(trap, args.omega, prof)
    print(f"y0 = ({c.y0[0]:.3e}, {c.y0[1]:.3e})")
    print(f"det M = {c.det:.10g}")
    print(f"M = {np.array2string(c.nondeg_matrix, precision=10)}")
    print(f"lambda = {c.lambda_:.12g}")
    print("a/a*      alpha_a")
    for fr in (0.9, 0.95, 0.975, 0.9875):
        print(f"{fr:<8g}  {alpha_of_a(fr * ast, ast, c.lambda_, c.p):.10g}")


def cmd_minimize(args):
    from .fieldio import save_field
    from .gp2d import SolverOptions, minimize
    from .grid import Grid2D, gaussian_field, random_start
    from .townes import a_star, default_profile
    from .trap import TrapSpec
    ast = a_star(default_profile())
    a = _coupling(args.a, ast)
    grid = Grid2D(args.n, args.l)
    trap = TrapSpec(args.p, args.a1, args.a2)
    if args.seed is None:
        init = gaussian_field(grid)
    else:
        init = random_start(grid, np.random.default_rng(args.seed))
    opts = SolverOptions(dt=args.dt, tol=args.tol, max_iter=args.max_iter, method=args.method)
    s = minimize(a, args.omega, trap, init=init, opts=opts)
    summary = dict(a=s.a, a_over_astar=s.a / ast, Omega=s.Omega, p=trap.p, a1=trap.a1, a2=trap.a2,
                   N=grid.N, L=grid.L, energy=s.energy, mu=s.mu, residual=s.residual,
                   iterations=s.iterations, epsilon=s.epsilon, peak=[float(v) for v in s.peak])
    if args.out_field:
        save_field(s.field, args.out_field,
                   dict(a=s.a, Omega=s.Omega, p=trap.p, a1=trap.a1, a2=trap.a2, energy=s.energy,
                        mu=s.mu, residual=s.residual, iterations=s.iterations))
        if args.plot:
            from .plotting import density_figure
            density_figure(s, Path(args.out_field).with_suffix(".png"), f"a/a* = {s.a / ast:.4f}")
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))


def cmd_asymptotics(args):
    from .config import parse_config
    from .sweep import run_sweep
    cfg = parse_config(args.config)
    res = run_sweep(cfg, stages=("minimize", "asymptotics"), plots=not args.no_plots)
    if res.report is None:
        raise ConfigError("insufficient-sequence", "fewer than three converged couplings")
    print(f"wrote {Path(cfg.output_dir) / 'asymptotics.csv'}")
    print(f"slope {res.report.slope:.6f} (expected {res.report.expected_slope:.6f})")


def cmd_uniqueness(args):
    from .gp2d import SolverOptions
    from .grid import Grid2D
    from .sweep import UNIQ_COLUMNS, write_csv
    from .townes import a_star, default_profile
    from .trap import TrapSpec
    from .uniqueness import multistart_uniqueness
    ast = a_star(default_profile())
    a = _coupling(args.a, ast)
    rep = multistart_uniqueness(a, args.omega, TrapSpec(args.p, args.a1, args.a2), args.starts,
                                args.seed, Grid2D(args.n, args.l),
                                SolverOptions(tol=args.tol, max_iter=args.max_iter),
                                workers=args.workers)
    trailer = (f"# verdict={rep.verdict} max_distance={rep.max_distance!r} "
               f"energy_spread={rep.energy_spread!r} converged={int(rep.converged.sum())}/{rep.n_starts}")
    write_csv(Path(args.out), UNIQ_COLUMNS, rep.pair_rows(), trailer)
    print(f"verdict: {rep.verdict}  max distance {rep.max_distance:.3e}  "
          f"energy spread {rep.energy_spread:.3e}")


def cmd_spectra(args):
    from .grid import Grid2D
    from .spectra import build_operator, coercivity_rho, kernel_angle, low_spectrum
    from .sweep import write_csv
    from .townes import default_profile
    prof = default_profile()
    grid = Grid2D(args.n, args.l)
    op = build_operator(args.op, prof, grid)
    rep = low_spectrum(op, args.k, args.tol)
    rep.rho_estimate = coercivity_rho(prof, grid, args.tol)
    out = Path(args.out)
    write_csv(out, ("index", "eigenvalue", "overlap_w", "overlap_d1w", "overlap_d2w"), rep.rows(),
              f"# rho={rep.rho_estimate!r}")
    for i, lam, ow, o1, o2 in rep.rows():
        print(f"{i:2d}  {lam: .6e}  w {ow:.6f}  d1w {o1:.6f}  d2w {o2:.6f}")
    ker = rep.kernel_indices()
    if args.op == "N" and len(ker) == 2:
        print(f"kernel subspace angle: {kernel_angle(rep, op, ker):.3e}")
    print(f"rho = {rep.rho_estimate:.8f}")
    if args.plot:
        from .plotting import spectrum_figure
        spectrum_figure(rep, out.with_suffix(".png"))


def cmd_sweep(args):
    from .config import parse_config
    from .sweep import run_sweep
    cfg = parse_config(args.config)
    res = run_sweep(cfg, plots=not args.no_plots)
    print(f"sweep written to {res.out_dir}")
    if res.report is not None:
        print(f"slope {res.report.slope:.6f} (expected {res.report.expected_slope:.6f})")
    if res.uniqueness is not None:
        print(f"uniqueness verdict: {res.uniqueness.verdict}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gp-rotor", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("townes", help="solve for the radial profile w and write it as CSV")
    p.add_argument("--rmax", type=float, default=20.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    p.set_defaults(func=cmd_townes)

    p = sub.add_parser("trap", help="critical velocity, homogeneous part and assumption check")
    _trap_args(p)
    p.set_defaults(func=cmd_trap)

    p = sub.add_parser("concentration", help="y0, non-degeneracy, lambda and alpha_a")
    _trap_args(p)
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("minimize", help="compute one ground state")
    p.add_argument("--a", required=True, help="coupling, absolute or like 0.95*astar")
    _trap_args(p)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--l", type=float, default=8.0)
    p.add_argument("--dt", type=float, default=5e-3)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--method", choices=("cg", "flow"), default="cg")
    p.add_argument("--seed", type=int, default=None, help="random start; gaussian if omitted")
    p.add_argument("--out-field")
    p.add_argument("--out-json")
    p.add_argument("--plot", action="store_true", help="write a density PNG next to the field")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("asymptotics", help="a-sequence with warm starts, writes asymptotics.csv")
    p.add_argument("--config", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("uniqueness", help="multistart minimisation and phase-modded distances")
    p.add_argument("--a", required=True)
    _trap_args(p)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--l", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_uniqueness)

    p = sub.add_parser("spectra", help="low spectrum of the linearised operators")
    p.add_argument("--op", choices=("L", "N"), required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--l", type=float, default=20.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("sweep", help="full configured sweep with resumable stages")
    p.add_argument("--config", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except GPRotorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
