"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
with its measured quantities and wall time."""
import time

import numpy as np
import pytest

import runs
from gprotor.asymptotics import imaginary_smallness, monotone_toward, peak_trend_ok, strictly_decreasing
from gprotor.concentration import concentration_data
from gprotor.config import parse_config_text
from gprotor.errors import CollapseDetected
from gprotor.gp2d import gn_ratio, minimize
from gprotor.grid import ComplexField, Grid2D, gaussian_field
from gprotor.spectra import kernel_angle
from gprotor.sweep import run_sweep, warm_start
from gprotor.townes import a_star, check_identities, solve_w, w_on_grid
from gprotor.trap import TrapSpec, homogeneous_part, separable_power
from gprotor.uniqueness import common_frame, decompose_difference, mode_basis, pohozaev_matrix

TRAPS = {"p=2": runs.ANISO, "p=1.5": runs.FRACTIONAL}


def report(capsys, n, checks, seconds, limit=None, detail=""):
    """Print the verdict line and return whether every check held."""
    ok = all(checks.values()) and (limit is None or seconds < limit)
    failed = [k for k, v in checks.items() if not v]
    if limit is not None and seconds >= limit:
        failed.append(f"runtime {seconds:.1f}s >= {limit}s")
    with capsys.disabled():
        line = f"\nCRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  ({seconds:.1f}s)  {detail}"
        if failed:
            line += "  failed: " + "; ".join(failed)
        print(line)
    return ok


def test_criterion_01_scalar_identities(capsys):
    t0 = time.perf_counter()
    fine, coarse = solve_w(20.0, 1e-10, 1e-3), solve_w(20.0, 1e-10, 2e-3)
    rep = check_identities(fine)
    a1, a2 = a_star(fine), a_star(coarse)
    dt = time.perf_counter() - t0
    checks = {"identities within 1e-6": rep.max_deviation < 1e-6,
              "a* stable within 1e-8": abs(a1 - a2) / a1 < 1e-8}
    assert report(capsys, 1, checks, dt, 2.0,
                  f"max dev {rep.max_deviation:.2e}, a* {a1:.12f} vs {a2:.12f}")


def test_criterion_02_gn_sharpness(capsys, profile, ast):
    t0 = time.perf_counter()
    g = Grid2D(256, 16.0)
    x1, x2 = g.mesh
    w, _, _ = w_on_grid(profile, x1, x2)
    eq = gn_ratio(ComplexField(g, w / np.sqrt(ast)), ast)
    rng = np.random.default_rng(0)
    gr = Grid2D(64, 12.0)
    y1, y2 = gr.mesh
    worst = 0.0
    for _ in range(100):
        vals = np.zeros_like(y1, dtype=complex)
        for _ in range(rng.integers(1, 4)):
            c, s = rng.uniform(-2, 2, 2), rng.uniform(0.5, 1.5)
            vals += (rng.normal() + 1j * rng.normal()) * np.exp(-((y1 - c[0]) ** 2 + (y2 - c[1]) ** 2) / (2 * s * s))
        worst = max(worst, gn_ratio(ComplexField(gr, vals).normalized(), ast))
    dt = time.perf_counter() - t0
    checks = {"ratio(w) = 1": abs(eq - 1) < 1e-4, "random ratios <= 1": worst <= 1.0}
    assert report(capsys, 2, checks, dt, 10.0, f"ratio(w) {eq:.8f}, max random {worst:.4f}")


def test_criterion_03_linear_limit(capsys):
    t0 = time.perf_counter()
    s = minimize(0.0, 0.0, TrapSpec(2.0), init=gaussian_field(Grid2D(128, 8.0), width=0.7))
    dt = time.perf_counter() - t0
    checks = {"energy = 2": abs(s.energy - 2) < 1e-5, "mu = 2": abs(s.mu - 2) < 1e-5}
    assert report(capsys, 3, checks, dt, 60.0, f"E {s.energy:.10f}, mu {s.mu:.10f}")


def test_criterion_04_existence_boundary(capsys, ast):
    t0 = time.perf_counter()
    trap = TrapSpec(*runs.ANISO)
    grid = Grid2D(256, 8.0)
    try:
        minimize(1.02 * ast, 1.0, trap, init=gaussian_field(grid))
        collapsed = False
    except CollapseDetected:
        collapsed = True
    conc = concentration_data(trap, 1.0, runs.default_profile())
    prev = None
    for f in (0.9, 0.95, 0.975, 0.9875):
        prev = minimize(f * ast, 1.0, trap, init=warm_start(prev, f * ast, ast, conc, grid))
    dt = time.perf_counter() - t0
    checks = {"collapse at 1.02a*": collapsed, "converged at 0.9875a*": prev.converged and prev.residual < 1e-6}
    assert report(capsys, 4, checks, dt, 600.0, f"residual at 0.9875a* {prev.residual:.2e}")


def _trend_table(tag):
    run = runs.sequence(TRAPS[tag])
    return run, run.report


def test_criterion_05_blowup_scaling(capsys):
    checks, parts, total = {}, [], 0.0
    for tag in TRAPS:
        run, rep = _trend_table(tag)
        total += run.seconds
        ratio = rep.column("eps_over_alpha")
        checks[f"{tag} slope"] = abs(rep.slope - rep.expected_slope) < 0.1 * rep.expected_slope
        checks[f"{tag} last ratio in [0.8,1.2]"] = 0.8 <= ratio[-1] <= 1.2
        checks[f"{tag} ratio approaches 1"] = abs(ratio[-1] - 1) < abs(ratio[0] - 1)
        parts.append(f"{tag}: slope {rep.slope:.4f}/{rep.expected_slope:.4f}, "
                     f"eps/alpha {ratio[0]:.4f}->{ratio[-1]:.4f}")
    assert report(capsys, 5, checks, total, 1800.0, "; ".join(parts))


def test_criterion_06_multiplier_law(capsys):
    checks, parts = {}, []
    for tag in TRAPS:
        _, rep = _trend_table(tag)
        m = -rep.column("mu_eps2")
        checks[f"{tag} last in [0.7,1.3]"] = 0.7 <= m[-1] <= 1.3
        checks[f"{tag} monotone toward 1"] = monotone_toward(m)
        parts.append(f"{tag}: -mu eps^2 " + ", ".join(f"{v:.4f}" for v in m))
    assert report(capsys, 6, checks, 0.0, None, "; ".join(parts))


def test_criterion_07_concentration(capsys):
    checks, parts = {}, []
    for tag in TRAPS:
        _, rep = _trend_table(tag)
        sup = rep.column("sup_err")
        checks[f"{tag} peak/alpha toward 0"] = peak_trend_ok(rep.column("peak_over_alpha"))
        checks[f"{tag} sup error strictly decreasing"] = strictly_decreasing(sup)
        parts.append(f"{tag}: sup err " + ", ".join(f"{v:.5f}" for v in sup))
    assert report(capsys, 7, checks, 0.0, None, "; ".join(parts))


def test_criterion_08_imaginary_part(capsys):
    _, rep = _trend_table("p=2")
    trend = imaginary_smallness(rep.aligned)
    radial = runs.sequence(runs.RADIAL)
    rsup = float(np.max(imaginary_smallness(radial.report.aligned).imag_sup))
    checks = {"anisotropic ratio strictly decreasing": trend.decreasing,
              "radial sup|Im| < 1e-6": rsup < 1e-6}
    detail = "sup|Im|/alpha^2 " + ", ".join(f"{v:.3e}" for v in trend.imag_over_alpha2)
    assert report(capsys, 8, checks, radial.seconds, None, f"{detail}; radial {rsup:.1e}")


def test_criterion_09_uniqueness_probe(capsys):
    rep, dt = runs.uniqueness()
    checks = {"all converged": bool(rep.converged.all()),
              "distances < 1e-5": rep.max_distance < 1e-5,
              "energies within 1e-8": rep.energy_spread < 1e-8}
    assert report(capsys, 9, checks, dt, 1200.0,
                  f"max distance {rep.max_distance:.2e}, energy spread {rep.energy_spread:.2e}")


def test_criterion_10_difference_modes(capsys, profile):
    run = runs.sequence(runs.ANISO, fractions=(0.95, 0.9625))
    t0 = time.perf_counter()
    v1, v2 = common_frame(run.states[0], run.states[1], run.conc, profile)
    dec = decompose_difference(v1, v2, profile)
    g = v1.field.grid
    basis = mode_basis(profile, g)
    gram = np.array([[g.integrate(a * b) for b in basis] for a in basis])
    d = np.sqrt(np.diag(gram))
    off = float(np.max(np.abs(gram / np.outer(d, d) - np.eye(3))))
    dt = time.perf_counter() - t0 + run.seconds
    checks = {"residual fraction < 0.2": dec.residual_fraction < 0.2, "Gram diagonal": off < 1e-8}
    assert report(capsys, 10, checks, dt, 300.0,
                  f"residual {dec.residual_fraction:.3f}, b=({dec.b0:.3e}, {dec.b1:.1e}, {dec.b2:.1e}), "
                  f"Gram off-diagonal {off:.1e}")


def test_criterion_11_spectral_kernels(capsys):
    opL, repL, tL = runs.spectrum("L")
    opN, repN, tN = runs.spectrum("N")
    r1, t1 = runs.rho(256, 20.0)
    r2, t2 = runs.rho(512, 20.0)
    ker = repN.kernel_indices()
    lamL, lamN = repL.eigenvalues, repN.eigenvalues
    angle = kernel_angle(repN, opN, ker) if len(ker) == 2 else np.inf
    checks = {"L: |lambda0| < 1e-6": abs(lamL[0]) < 1e-6,
              "L: overlap with w > 0.999": repL.overlap_w[0] > 0.999,
              "L: lambda1 > 0": lamL[1] > 0,
              "N: one eigenvalue below -0.1": int(np.sum(lamN < -0.1)) == 1,
              "N: double zero": len(ker) == 2,
              "N: kernel angle < 1e-3": angle < 1e-3,
              "rho > 0": r1 > 0,
              "rho grid-stable within 5%": abs(r2 - r1) < 0.05 * r1}
    assert report(capsys, 11, checks, tL + tN + t1 + t2, 300.0,
                  f"L {lamL[0]:.1e}/{lamL[1]:.4f}, N {lamN[0]:.4f} kernel angle {angle:.1e}, "
                  f"rho {r1:.8f} / {r2:.8f}")


def test_criterion_12_pohozaev(capsys, profile, ast):
    t0 = time.perf_counter()
    worst_block, worst_col = 0.0, 0.0
    for trap in (TrapSpec(*runs.ANISO), TrapSpec(*runs.FRACTIONAL), TrapSpec(1.5, 1.0, 2.0)):
        conc = concentration_data(trap, 1.0, profile)
        P = pohozaev_matrix(homogeneous_part(trap, 1.0), conc.y0, profile)
        worst_block = max(worst_block, float(np.max(np.abs(P[:, 1:] - conc.nondeg_matrix.T))))
        worst_col = max(worst_col, float(np.max(np.abs(P[:, 0]))))
    P = pohozaev_matrix(separable_power(1.0, 1.0, 2.0), (0.0, 0.0), profile)
    sq = float(np.max(np.abs(P[:, 1:] - np.diag([-2 * ast, -2 * ast]))))
    dt = time.perf_counter() - t0
    checks = {"block matches nondegeneracy matrix": worst_block < 1e-8,
              "|x|^2 gives -2a* I": sq < 1e-6, "first column vanishes": worst_col < 1e-8}
    assert report(capsys, 12, checks, dt, 60.0,
                  f"block err {worst_block:.1e}, square err {sq:.1e}, column {worst_col:.1e}")


def test_criterion_13_reproducibility(capsys, tmp_path):
    t0 = time.perf_counter()
    text = ("p = 2\nomega = 1\na1 = 0.5\nN = 128\nL = 8\n"
            "a_list = 0.9*astar, 0.925*astar, 0.95*astar\nstarts = 3\nformats = csv\n")
    outs = []
    for name in ("first", "second"):
        cfg = parse_config_text(text + f"output_dir = {tmp_path / name}\n")
        outs.append(run_sweep(cfg).out_dir)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    same = names == sorted(p.name for p in outs[1].glob("*.csv")) and all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    dt = time.perf_counter() - t0
    checks = {"three CSVs written": len(names) == 3, "byte-identical": same}
    assert report(capsys, 13, checks, dt, None, ", ".join(names))
