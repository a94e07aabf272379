"""End-to-end sweep: profile, concentration data, warm-started minimisers,
asymptotics and a multistart uniqueness pass, with resumable stages.

Every stage is keyed by a hash of its inputs; the manifest records finished
stages so a rerun of the same configuration reuses them.  CSV content is a
pure function of (config, seed).
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .asymptotics import COLUMNS as ASYMP_COLUMNS
from .asymptotics import blowup_report
from .concentration import alpha_of_a, concentration_data
from .config import RunConfig, check_couplings
from .errors import CollapseDetected, GPRotorError, NumericalError
from .fieldio import load_field, save_field
from .gp2d import GPProblem, GroundState, SolverOptions, _finish, minimize
from .grid import ComplexField, Grid2D, fourier_resample, gaussian_field
from .townes import a_star, solve_w
from .uniqueness import multistart_uniqueness

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("a", "a_over_astar", "status", "energy", "mu", "residual", "iterations",
                 "epsilon", "peak_x1", "peak_x2", "field_file")
UNIQ_COLUMNS = ("start_i", "start_j", "distance", "theta_star", "energy_i", "energy_j")


def _num(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows, trailer: Optional[str] = None) -> None:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_num(v) for v in r])
    if trailer:
        buf.write(trailer + "\n")
    path.write_text(buf.getvalue())


def _hash(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\x00")
    return h.hexdigest()[:16]


class Manifest:
    """Completed stages with their input keys; rewritten after every stage."""

    def __init__(self, path: Path):
        self.path = path
        self.data = {"stages": {}}
        if path.exists():
            try:
                self.data = json.loads(path.read_text())
            except json.JSONDecodeError:
                log.warning("unreadable manifest %s ignored", path)
        self.data.setdefault("stages", {})

    def done(self, name: str, key: str) -> bool:
        st = self.data["stages"].get(name)
        return bool(st and st.get("key") == key and st.get("status") == "done")

    def record(self, name: str, key: str, wall: float, **extra) -> None:
        self.data["stages"][name] = dict(key=key, status="done", wall_seconds=round(wall, 3), **extra)
        self.flush()

    def flush(self) -> None:
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def rescaled_guess(state: GroundState, scale: float) -> ComplexField:
    """s·u(x_a + s(x − x_a)) renormalised: a warm start about ``scale`` times narrower."""
    g = state.grid
    xa = state.peak
    t = g.x
    vals = scale * fourier_resample(state.field.values, g, xa[0] + scale * (t - xa[0]),
                                    xa[1] + scale * (t - xa[1]))
    return ComplexField(g, vals).normalized()


def state_from_field(f: ComplexField, a: float, Omega: float, trap, iterations: int) -> GroundState:
    """Rebuild the GroundState summary of a stored minimiser."""
    prob = GPProblem(f.grid, a, Omega, trap)
    Hu, E, kin, quart = prob.apply(f.values)
    return _finish(prob, f.values, Hu, E, kin, quart, iterations, float("nan"), [])


@dataclass
class SweepResult:
    out_dir: Path
    a_star: float
    states: List[GroundState] = field(default_factory=list)
    rows: List[tuple] = field(default_factory=list)
    report: object = None
    uniqueness: object = None


def run_sweep(cfg: RunConfig, stages=("minimize", "asymptotics", "uniqueness"),
              plots: Optional[bool] = None) -> SweepResult:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest(out / "manifest.json")
    man.data.update(config=cfg.canonical(), config_sha256=cfg.digest(), seed=cfg.seed,
                    versions=dict(package=__version__, python=platform.python_version(),
                                  numpy=np.__version__, scipy=_scipy_version()))
    man.flush()
    base = cfg.digest()

    t0 = time.perf_counter()
    profile = solve_w(20.0, 1e-10, 1e-3)
    ast = a_star(profile)
    man.record("townes", _hash(base, "townes"), time.perf_counter() - t0, a_star=repr(ast))
    a_values = check_couplings(cfg, ast)
    trap = cfg.trap

    t0 = time.perf_counter()
    conc = concentration_data(trap, cfg.omega, profile)
    man.record("concentration", _hash(base, "concentration"), time.perf_counter() - t0,
               lambda_=repr(conc.lambda_), det=repr(conc.det))

    grid = Grid2D(cfg.N, cfg.L)
    opts = SolverOptions(dt=cfg.dt, tol=cfg.tol, max_iter=cfg.max_iter, method=cfg.method)
    res = SweepResult(out, ast)
    if "minimize" in stages:
        _minimize_stage(cfg, man, base, trap, grid, opts, a_values, ast, conc, res)
    converged = [s for s in res.states if s.a < ast]
    if "asymptotics" in stages and len(converged) >= 3:
        t0 = time.perf_counter()
        key = _hash(base, "asymptotics", *[repr(s.energy) for s in converged])
        rep = blowup_report(converged, conc, profile, cfg.align_n, cfg.align_l)
        res.report = rep
        trailer = f"# slope={rep.slope!r} expected={rep.expected_slope!r}"
        write_csv(out / "asymptotics.csv", ASYMP_COLUMNS, rep.rows, trailer)
        man.record("asymptotics", key, time.perf_counter() - t0)
    if "uniqueness" in stages:
        ua = (cfg.uniqueness_a.resolve(ast) if cfg.uniqueness_a is not None
              else (converged[0].a if converged else None))
        key = _hash(base, "uniqueness", repr(ua))
        if man.done("uniqueness", key) and (out / "uniqueness.csv").exists():
            log.info("uniqueness stage already complete; skipped")
        elif ua is not None and ua < ast:
            t0 = time.perf_counter()
            rep = multistart_uniqueness(ua, cfg.omega, trap, cfg.starts, cfg.seed, grid, opts,
                                        workers=cfg.workers)
            res.uniqueness = rep
            trailer = (f"# verdict={rep.verdict} max_distance={rep.max_distance!r} "
                       f"energy_spread={rep.energy_spread!r} converged={int(rep.converged.sum())}/{rep.n_starts}")
            write_csv(out / "uniqueness.csv", UNIQ_COLUMNS, rep.pair_rows(), trailer)
            man.record("uniqueness", key, time.perf_counter() - t0)
    if plots is None:
        plots = "png" in cfg.formats
    if plots:
        from .plotting import sweep_figures
        sweep_figures(res, profile, out)
    return res


def _minimize_stage(cfg, man, base, trap, grid, opts, a_values, ast, conc, res):
    out = res.out_dir
    prev: Optional[GroundState] = None
    prev_key = "start"
    for k, a in enumerate(a_values):
        name = f"minimize[{k}]"
        key = _hash(base, name, repr(a), prev_key)
        fname = f"field_{k:02d}.gpf"
        path = out / fname
        t0 = time.perf_counter()
        if man.done(name, key) and path.exists():
            st = man.data["stages"][name]
            if st.get("outcome") == "collapse-detected":
                res.rows.append(_collapse_row(a, ast, st))
                prev_key = key
                continue
            state = state_from_field(load_field(path), a, cfg.omega, trap, int(st["iterations"]))
        else:
            init = warm_start(prev, a, ast, conc, grid)
            try:
                state = minimize(a, cfg.omega, trap, init=init, opts=opts)
            except CollapseDetected as exc:
                if a < ast and not cfg.expect_collapse:
                    _write_sweep(out, res.rows)
                    raise NumericalError("collapse-detected",
                                         f"collapse at a = {a:.10g} < a*: grid too coarse? ({exc})") from exc
                info = dict(outcome="collapse-detected", energy=repr(float(exc.energy)),
                            iterations=int(exc.iterations))
                path.write_bytes(b"")
                man.record(name, key, time.perf_counter() - t0, **info)
                res.rows.append(_collapse_row(a, ast, info))
                prev_key = key
                continue
            except GPRotorError:
                _write_sweep(out, res.rows)
                raise
            save_field(state.field, path, _meta(state, cfg))
            man.record(name, key, time.perf_counter() - t0, outcome="converged",
                       iterations=state.iterations)
        res.states.append(state)
        res.rows.append((a, a / ast, "converged", state.energy, state.mu, state.residual,
                         state.iterations, state.epsilon, float(state.peak[0]),
                         float(state.peak[1]), fname))
        prev, prev_key = state, key
    _write_sweep(out, res.rows)


def _collapse_row(a, ast, info):
    return (a, a / ast, "collapse-detected", float(info["energy"]), "", "",
            int(info["iterations"]), "", "", "", "")


def _write_sweep(out: Path, rows) -> None:
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)


def warm_start(prev: Optional[GroundState], a, ast, conc, grid) -> ComplexField:
    """Initial field for coupling ``a``: the previous minimiser shrunk by α ratio."""
    if prev is None:
        return gaussian_field(grid, width=0.6)
    if a >= ast or prev.a >= ast:
        return prev.field.copy()
    s = alpha_of_a(prev.a, ast, conc.lambda_, conc.p) / alpha_of_a(a, ast, conc.lambda_, conc.p)
    return rescaled_guess(prev, s)


def _meta(state: GroundState, cfg: RunConfig) -> Dict:
    return dict(a=float(state.a), Omega=float(state.Omega), p=cfg.p, a1=cfg.a1, a2=cfg.a2,
                energy=float(state.energy), mu=float(state.mu), residual=float(state.residual),
                iterations=int(state.iterations))


def _scipy_version() -> str:
    import scipy
    return scipy.__version__
