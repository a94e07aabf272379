"""Rotating Gross-Pitaevskii energy on a periodic grid and its constrained minimiser.

Energy  F_a(u) = ∫|∇u|² + V|u|² - (a/2)|u|⁴ - Ω x^⊥·(iu, ∇u)   with ‖u‖₂ = 1.

Derivatives are spectral.  The rotation term is discretised as
i x^⊥·∇u = i(x1 ∂2u - x2 ∂1u) with Nyquist-free spectral derivatives, which
keeps it exactly Hermitian on the grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import CollapseDetected, ConfigError, NumericalError
from .grid import ComplexField, Grid2D, gaussian_field, random_start
from .trap import TrapSpec, require_subcritical

log = logging.getLogger(__name__)

COLLAPSE_WIDTH = 0.75  # collapse once ε_a < COLLAPSE_WIDTH · dx


class GPProblem:
    """Discrete GP operator for fixed (a, Ω, trap, grid)."""

    def __init__(self, grid: Grid2D, a: float, Omega: float, trap: TrapSpec):
        self.grid = grid
        self.a = float(a)
        self.Omega = float(Omega)
        self.trap = trap
        x1, x2 = grid.mesh
        self.V = trap.V(x1, x2)

    def apply(self, u: np.ndarray):
        """H(u)u together with the energy terms.

        Returns (Hu, energy, kinetic, quartic) where ``Hu`` excludes the
        multiplier term.
        """
        g = self.grid
        uh = g.fft(u)
        lap = g.ifft(g.k2 * uh)
        ik1, ik2 = g.ik
        d1 = g.ifft(ik1 * uh)
        d2 = g.ifft(ik2 * uh)
        x1, x2 = g.mesh
        rot = 1j * (x1 * d2 - x2 * d1)
        dens = (u.real**2 + u.imag**2)
        Hu = lap + self.V * u + self.Omega * rot - self.a * dens * u
        cell = g.cell
        kinetic = float(np.sum(g.k2 * (uh.real**2 + uh.imag**2)) * cell / g.N**2)
        potential = float(np.sum(self.V * dens) * cell)
        rotation = float(np.real(np.vdot(u, rot)) * cell) * self.Omega
        quartic = float(np.sum(dens * dens) * cell)
        energy = kinetic + potential + rotation - 0.5 * self.a * quartic
        return Hu, energy, kinetic, quartic

    def energy(self, u: np.ndarray) -> float:
        return self.apply(u)[1]


def _field_of(u, grid=None):
    if isinstance(u, ComplexField):
        return u
    if grid is None:
        raise ConfigError("grid-mismatch", "raw arrays need a grid")
    return ComplexField(grid, u)


def energy(u: ComplexField, a: float, Omega: float, trap: TrapSpec) -> float:
    """F_a(u) for a unit-mass field."""
    m = u.mass()
    if abs(m - 1) > 1e-8:
        raise ConfigError("unnormalized-input", f"mass = {m:.12g}")
    return GPProblem(u.grid, a, Omega, trap).energy(u.values)


def gp_apply(u: ComplexField, a: float, Omega: float, trap: TrapSpec) -> ComplexField:
    """-Δu + Vu + iΩ x^⊥·∇u - a|u|²u."""
    return ComplexField(u.grid, GPProblem(u.grid, a, Omega, trap).apply(u.values)[0])


def kinetic_energy(u: ComplexField) -> float:
    g = u.grid
    uh = g.fft(u.values)
    return float(np.sum(g.k2 * np.abs(uh) ** 2) * g.cell / g.N**2)


def gn_ratio(u: ComplexField, a_star: float) -> float:
    """∫|u|⁴ / ((2/a*) ∫|∇|u||² ∫|u|²); at most 1 by the Gagliardo-Nirenberg inequality."""
    g = u.grid
    mod = np.abs(u.values)
    d1, d2 = g.gradient(mod)
    grad2 = g.integrate(np.abs(d1) ** 2 + np.abs(d2) ** 2)
    return g.integrate(mod**4) / ((2.0 / a_star) * grad2 * g.integrate(mod**2))


def peak_location(u: ComplexField) -> np.ndarray:
    """Sub-grid maximiser of |u| from a quadratic fit on the 3×3 neighbourhood."""
    g = u.grid
    dens = np.abs(u.values) ** 2
    i2, i1 = np.unravel_index(np.argmax(dens), dens.shape)
    offs = np.array([-1, 0, 1])
    patch = dens[np.ix_((i2 + offs) % g.N, (i1 + offs) % g.N)]
    s, t = np.meshgrid(offs, offs, indexing="xy")  # s along x1, t along x2
    A = np.column_stack([np.ones(9), s.ravel(), t.ravel(), s.ravel() ** 2,
                         (s * t).ravel(), t.ravel() ** 2])
    c = np.linalg.lstsq(A, patch.ravel(), rcond=None)[0]
    hess = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    try:
        d = np.linalg.solve(hess, -c[1:3])
    except np.linalg.LinAlgError:
        d = np.zeros(2)
    if not np.all(np.abs(d) <= 1.0):
        d = np.zeros(2)
    return np.array([g.x[i1] + d[0] * g.dx, g.x[i2] + d[1] * g.dx])


@dataclass
class SolverOptions:
    dt: float = 5e-3
    tol: float = 1e-12
    max_iter: int = 20000
    method: str = "cg"
    history_every: int = 100


@dataclass
class GroundState:
    field: ComplexField
    a: float
    Omega: float
    trap: TrapSpec
    energy: float
    mu: float
    residual: float
    iterations: int
    peak: np.ndarray
    epsilon: float
    converged: bool = True
    init_energy: float = float("nan")
    history: list = field(default_factory=list)

    @property
    def grid(self) -> Grid2D:
        return self.field.grid


def _initial_field(init, grid):
    if isinstance(init, ComplexField):
        if grid is not None and init.grid != grid:
            raise ConfigError("grid-mismatch", "init field lives on a different grid")
        return init.normalized()
    if grid is None:
        grid = Grid2D(128, 8.0)
    if init is None:
        return gaussian_field(grid)
    if isinstance(init, (int, np.integer)):
        return random_start(grid, np.random.default_rng(int(init)))
    raise ConfigError("invalid-init", f"cannot initialise from {type(init).__name__}")


def minimize(a: float, Omega: float, trap: TrapSpec,
             init: Union[ComplexField, int, None] = None,
             opts: Optional[SolverOptions] = None,
             grid: Optional[Grid2D] = None) -> GroundState:
    """Minimise F_a on the unit sphere of L².

    ``opts.method`` selects the descent: ``"flow"`` is the normalised gradient
    flow u ← N[u - dt P(Hu - μu)] with P = s(c - Δ)⁻¹s, s = (1 + V)^{-1/2};
    dt starts at ``opts.dt``, is halved whenever the energy increases and
    grows by 1.25 after accepted steps.  ``"cg"`` (default) uses the
    (c - Δ)⁻¹ preconditioned gradient inside a Riemannian nonlinear
    conjugate-gradient iteration with a monotone line search.  Both stop when
    the per-step energy change is below ``tol`` and the Euler-Lagrange residual
    is below sqrt(tol).
    """
    opts = opts or SolverOptions()
    require_subcritical(trap, Omega)
    if a < 0:
        raise ConfigError("invalid-coupling", "a must be nonnegative")
    u0 = _initial_field(init, grid)
    prob = GPProblem(u0.grid, a, Omega, trap)
    if opts.method == "flow":
        return _run_flow(prob, u0.values.copy(), opts)
    if opts.method == "cg":
        return _run_cg(prob, u0.values.copy(), opts)
    raise ConfigError("invalid-method", opts.method)


def _check_collapse(prob, energy, kinetic, tol, it):
    eps = 1.0 / np.sqrt(kinetic)
    if eps < COLLAPSE_WIDTH * prob.grid.dx or energy < -1.0 / tol:
        raise CollapseDetected(
            f"a = {prob.a:.6g}: width {eps:.3g} vs dx {prob.grid.dx:.3g}, energy {energy:.6g}",
            energy=energy, iterations=it)


def _finish(prob, u, Hu, energy, kinetic, quartic, it, e0, history, converged=True):
    g = prob.grid
    mu = float(np.real(np.vdot(u, Hu)) * g.cell)
    res = float(np.sqrt(np.sum(np.abs(Hu - mu * u) ** 2) * g.cell))
    f = ComplexField(g, u)
    return GroundState(f, prob.a, prob.Omega, prob.trap, energy, mu, res, it,
                       peak_location(f), 1.0 / np.sqrt(kinetic), converged, e0, history)


def _norm(g, f):
    return np.sqrt(np.sum(f.real**2 + f.imag**2) * g.cell)


def _rdot(g, f, h):
    return float(np.real(np.vdot(f, h)) * g.cell)


FLOW_MAX_STEP = 1.0


def _run_flow(prob, u, opts):
    g = prob.grid
    dt = opts.dt
    Hu, E, kin, quart = prob.apply(u)
    e0 = E
    history = []
    # symmetric preconditioner s(c - Δ)⁻¹s with s = (1 + V)^{-1/2}: bounded on both
    # the kinetic and the potential part, so the step need not resolve max V
    sv = 1.0 / np.sqrt(1.0 + prob.V)
    for it in range(1, opts.max_iter + 1):
        mu = _rdot(g, u, Hu)
        c = max(1.0, abs(mu))
        d = sv * g.ifft(g.fft(sv * (Hu - mu * u)) / (c + g.k2))
        while True:
            trial = u - dt * d
            trial /= _norm(g, trial)
            Hn, En, kn, qn = prob.apply(trial)
            _check_collapse(prob, En, kn, opts.tol, it)
            noise = 1e-14 * (kn + prob.a * qn + abs(En) + 1.0)
            if En <= E + noise or dt < 1e-12:
                break
            dt *= 0.5
        dE = E - En
        u, Hu, E, kin, quart = trial, Hn, En, kn, qn
        dt = min(1.25 * dt, max(opts.dt, FLOW_MAX_STEP))
        mu = _rdot(g, u, Hu)
        res = _norm(g, Hu - mu * u)
        if it % opts.history_every == 0:
            history.append((it, E, res))
        if abs(dE) < opts.tol and res < np.sqrt(opts.tol):
            return _finish(prob, u, Hu, E, kin, quart, it, e0, history)
    raise NumericalError("no-convergence", f"flow hit max_iter = {opts.max_iter} "
                         f"(energy {E:.12g}, residual {res:.2e}, last decrease {dE:.2e})")


def _run_cg(prob, u, opts):
    g = prob.grid
    Hu, E, kin, quart = prob.apply(u)
    _check_collapse(prob, E, kin, opts.tol, 0)
    e0 = E
    history = []
    mu = _rdot(g, u, Hu)
    shift = max(1.0, abs(mu))

    def precond(f):
        return g.ifft(g.fft(f) / (shift + g.k2))

    step = opts.dt * shift  # initial trial angle
    p_prev = None
    d_prev = r_prev = None
    dE = np.inf
    stalls = 0
    for it in range(1, opts.max_iter + 1):
        r = Hu - mu * u
        res = _norm(g, r)
        if it % opts.history_every == 0:
            history.append((it, E, res))
        if abs(dE) < opts.tol and res < np.sqrt(opts.tol):
            return _finish(prob, u, Hu, E, kin, quart, it - 1, e0, history)
        Pr = precond(r)
        Pu = precond(u)
        d = Pr - (_rdot(g, u, Pr) / _rdot(g, u, Pu)) * Pu
        if p_prev is None:
            p = -d
        else:
            beta = max(0.0, _rdot(g, r, d - d_prev) / _rdot(g, r_prev, d_prev))
            p = -d + beta * (p_prev - _rdot(g, u, p_prev) * u)
        slope = 2 * _rdot(g, r, p)
        if slope >= 0:
            p = -d
            slope = 2 * _rdot(g, r, p)
        pn = _norm(g, p)
        if pn == 0:
            return _finish(prob, u, Hu, E, kin, quart, it, e0, history)
        q = p / pn
        s0 = slope / pn  # dE/dθ at θ = 0 along the unit tangent q
        # energy differences below this are rounding noise
        noise = 1e-13 * (kin + prob.a * quart + abs(E) + 1.0)
        best = _line_search(prob, u, q, E, s0, step, noise, opts.tol, it)
        if best is None:
            stalls += 1
            if res < np.sqrt(opts.tol):
                return _finish(prob, u, Hu, E, kin, quart, it, e0, history)
            if stalls > 20:
                break
            p_prev = None
            step = opts.dt * shift
            continue
        stalls = 0
        t0, v, Hv, Ev, kv, qv = best
        step = t0
        dE = E - Ev
        # parallel transport of the search direction to the new point
        p_prev = (-np.sin(t0) * u + np.cos(t0) * q) * pn
        d_prev, r_prev = d, r
        u, Hu, E, kin, quart = v, Hv, Ev, kv, qv
        mu = _rdot(g, u, Hu)
    raise NumericalError("no-convergence", f"cg hit max_iter = {opts.max_iter} "
                         f"(energy {E:.12g}, residual {res:.2e}, last decrease {dE:.2e})")


def _line_search(prob, u, q, E, s0, step, noise, tol, it):
    """Step along the great circle cos(θ)u + sin(θ)q.

    A secant on dE/dθ proposes the angle; among trial points the lower energy
    wins while energy differences exceed ``noise``, and the smaller |dE/dθ|
    wins below it.  Returns None when no trial lowers the energy.
    """
    g = prob.grid

    def probe(theta):
        c, s = np.cos(theta), np.sin(theta)
        v = c * u + s * q
        v /= _norm(g, v)
        Hv, Ev, kv, qv = prob.apply(v)
        _check_collapse(prob, Ev, kv, tol, it)
        sl = 2 * _rdot(g, Hv, -s * u + c * q)
        return theta, v, Hv, Ev, kv, qv, sl

    def better(x, y):
        if abs(x[3] - y[3]) > noise:
            return x if x[3] < y[3] else y
        return x if abs(x[6]) <= abs(y[6]) else y

    t0 = min(max(step, 1e-10), 0.5)
    for _ in range(40):
        a = probe(t0)
        s1 = a[6]
        if s1 > s0:
            t1 = t0 * s0 / (s0 - s1)
        else:
            t1 = 4 * t0
        t1 = min(t1, 4 * t0, 0.5)
        cand = a
        if abs(t1 - t0) > 1e-3 * t0:
            cand = better(a, probe(t1))
        if cand[3] <= E + noise and (cand[3] < E - noise or cand[6] * s0 >= 0 or abs(cand[6]) < abs(s0)):
            return cand[:6]
        t0 *= 0.25
        if t0 < 1e-14:
            break
    return None


def chemical_potential(state: GroundState) -> float:
    """μ = e_F(a) - (a/2)∫|u|⁴, cross-checked against ⟨gp_apply(u), u⟩."""
    u = state.field
    g = u.grid
    quart = g.integrate(np.abs(u.values) ** 4)
    mu = state.energy - 0.5 * state.a * quart
    mu2 = g.inner(u.values, gp_apply(u, state.a, state.Omega, state.trap).values).real
    if abs(mu - mu2) > 1e-4 * max(1.0, abs(mu)):
        raise NumericalError("inconsistent-multiplier", f"{mu:.10g} vs {mu2:.10g}")
    return float(mu)


def el_residual(state: GroundState) -> float:
    """‖gp_apply(u) - μu‖₂."""
    u = state.field
    mu = chemical_potential(state)
    Hu = gp_apply(u, state.a, state.Omega, state.trap).values
    return float(np.sqrt(u.grid.integrate(np.abs(Hu - mu * u.values) ** 2)))
