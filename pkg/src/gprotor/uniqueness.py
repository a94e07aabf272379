"""Local uniqueness probes: phase-modded distances between minimisers, the
mode decomposition of difference fields, and the Pohozaev matrix.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .asymptotics import ALIGN_L, ALIGN_N, AlignedProfile, rescale_and_align
from .concentration import ConcentrationData, _shifted_breaks, alpha_of_a, axis_rule
from .errors import ConfigError, GPRotorError, NumericalError
from .gp2d import GroundState, SolverOptions, minimize
from .grid import ComplexField, Grid2D, random_start
from .townes import RadialProfile, a_star, w_on_grid
from .trap import HomogeneousFunction, TrapSpec

log = logging.getLogger(__name__)

THRESHOLD = 1e-5


def phase_distance(u1: ComplexField, u2: ComplexField):
    """(θ*, min_θ ‖e^{iθ}u1 − u2‖₂) with θ* in [0, 2π)."""
    if u1.grid != u2.grid:
        raise ConfigError("grid-mismatch", f"{u1.grid} vs {u2.grid}")
    g = u1.grid
    z = g.inner(u1.values, u2.values)  # ∫ conj(u1) u2
    theta = float(np.angle(z)) % (2 * np.pi)
    d2 = u1.mass() + u2.mass() - 2 * abs(z)
    return theta, float(np.sqrt(max(d2, 0.0)))


@dataclass
class StartResult:
    index: int
    state: Optional[GroundState]
    error: str = ""

    @property
    def converged(self) -> bool:
        return self.state is not None


@dataclass
class UniquenessReport:
    a: float
    Omega: float
    n_starts: int
    distances: np.ndarray
    thetas: np.ndarray
    energies: np.ndarray
    converged: np.ndarray
    max_distance: float
    energy_spread: float
    threshold: float = THRESHOLD
    states: List[GroundState] = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        return "unique-up-to-phase" if self.max_distance < self.threshold else "distinct-minima-found"

    def pair_rows(self):
        """(i, j, distance, θ*, E_i, E_j) over converged pairs i < j."""
        idx = np.flatnonzero(self.converged)
        rows = []
        for m, i in enumerate(idx):
            for j in idx[m + 1:]:
                rows.append((int(i), int(j), float(self.distances[i, j]), float(self.thetas[i, j]),
                             float(self.energies[i]), float(self.energies[j])))
        return rows


def _one_start(args):
    index, child, a, Omega, trap, grid, opts = args
    rng = np.random.default_rng(child)
    init = random_start(grid, rng)
    try:
        return StartResult(index, minimize(a, Omega, trap, init=init, opts=opts))
    except GPRotorError as exc:
        return StartResult(index, None, str(exc))


def multistart_uniqueness(a: float, Omega: float, trap: TrapSpec, n_starts: int = 8,
                          seed: int = 0, grid: Optional[Grid2D] = None,
                          opts: Optional[SolverOptions] = None, workers: int = 1,
                          threshold: float = THRESHOLD) -> UniquenessReport:
    """Minimise from ``n_starts`` seeded random starts and compare the results modulo phase.

    Per-start seeds are spawned from ``seed`` by index, so the outcome does not
    depend on ``workers``.
    """
    if n_starts < 2:
        raise ConfigError("invalid-starts", "need at least two starts")
    grid = grid or Grid2D(128, 8.0)
    opts = opts or SolverOptions()
    children = np.random.SeedSequence(seed).spawn(n_starts)
    jobs = [(i, children[i], a, Omega, trap, grid, opts) for i in range(n_starts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_start, jobs))
    else:
        results = [_one_start(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    ok = np.array([r.converged for r in results])
    for r in results:
        if not r.converged:
            log.warning("start %d excluded: %s", r.index, r.error)
    energies = np.array([r.state.energy if r.converged else np.nan for r in results])
    dist = np.zeros((n_starts, n_starts))
    theta = np.zeros((n_starts, n_starts))
    for i in range(n_starts):
        for j in range(i + 1, n_starts):
            if ok[i] and ok[j]:
                t, d = phase_distance(results[i].state.field, results[j].state.field)
            else:
                t, d = np.nan, np.nan
            dist[i, j] = dist[j, i] = d
            theta[i, j] = t
            theta[j, i] = (-t) % (2 * np.pi) if np.isfinite(t) else np.nan
    good = dist[np.ix_(ok, ok)]
    max_d = float(np.max(good)) if ok.sum() >= 2 else float("nan")
    e = energies[ok]
    spread = float((e.max() - e.min()) / abs(e.mean())) if e.size else float("nan")
    states = [r.state for r in results if r.converged]
    return UniquenessReport(a, Omega, n_starts, dist, theta, energies, ok, max_d, spread,
                            threshold, states)


@dataclass
class ModeDecomposition:
    b0: float
    b1: float
    b2: float
    residual_fraction: float
    imag_fraction: float
    gram: np.ndarray
    sup_norm: float

    @property
    def gram_offdiag(self) -> float:
        """Largest off-diagonal Gram entry relative to the diagonal scale."""
        d = np.sqrt(np.diag(self.gram))
        rel = np.abs(self.gram) / np.outer(d, d)
        np.fill_diagonal(rel, 0.0)
        return float(rel.max())


def mode_basis(profile: RadialProfile, grid: Grid2D):
    """(w + x·∇w, ∂₁w, ∂₂w) on ``grid`` from the radial profile, with x·∇w = r w′."""
    x1, x2 = grid.mesh
    w, d1, d2 = w_on_grid(profile, x1, x2)
    r = np.hypot(x1, x2)
    dil = w + r * profile.dw(r)
    return dil, d1, d2


def common_frame(s1: GroundState, s2: GroundState, conc: ConcentrationData,
                 profile: RadialProfile, N: int = ALIGN_N, L: float = ALIGN_L):
    """Rescale both states with the scale and peak of ``s2``, each phase-aligned.

    Differencing in one shared frame keeps the scale and position mismatch
    between the two states, which is what the dilation and translation modes
    describe.
    """
    alpha = alpha_of_a(s2.a, a_star(profile), conc.lambda_, conc.p)
    v1 = rescale_and_align(s1, conc, profile, N, L, alpha=alpha, center=s2.peak)
    v2 = rescale_and_align(s2, conc, profile, N, L, alpha=alpha, center=s2.peak)
    return v1, v2


def decompose_difference(v1: AlignedProfile, v2: AlignedProfile,
                         profile: RadialProfile) -> ModeDecomposition:
    """Project the sup-normalised real difference Re(v2 − v1) onto the three modes."""
    if v1.grid != v2.grid:
        raise ConfigError("grid-mismatch", "aligned profiles live on different grids")
    g = v1.grid
    diff = v2.field.values - v1.field.values
    sup = float(np.max(np.abs(diff)))
    if sup < 1e-13:
        raise NumericalError("degenerate-difference", f"sup |v2 - v1| = {sup:.2e}")
    eta = diff / sup
    basis = mode_basis(profile, g)
    gram = np.array([[g.integrate(bi * bj) for bj in basis] for bi in basis])
    rhs = np.array([g.integrate(b * eta.real) for b in basis])
    coef = np.linalg.solve(gram, rhs)
    fit = sum(c * b for c, b in zip(coef, basis))
    resid = np.sqrt(g.integrate((eta.real - fit) ** 2))
    re_norm = np.sqrt(g.integrate(eta.real**2))
    full = np.sqrt(g.integrate(np.abs(eta) ** 2))
    im_norm = np.sqrt(g.integrate(eta.imag**2))
    return ModeDecomposition(float(coef[0]), float(coef[1]), float(coef[2]),
                             float(resid / re_norm), float(im_norm / full), gram, sup)


def _dw_from_spline(profile: RadialProfile, r):
    """w′ as the derivative of the interpolant of w (tail law beyond r_match)."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    inside = r <= profile.r_match
    out[inside] = profile._w_spline.derivative()(r[inside])
    rt = r[~inside]
    out[~inside] = -profile.tail(rt) * (1.0 + 0.5 / rt)
    return out


def pohozaev_matrix(h: HomogeneousFunction, y0, profile: RadialProfile, order: int = 20) -> np.ndarray:
    """2×3 matrix P[l, 0] = ∫ ∂_l h(y+y0) (y·∇w²),  P[l, j] = ∫ ∂_l h(y+y0) ∂_j w².

    Evaluated on its own Gauss rule with w′ taken from the derivative of the
    w interpolant, so it cross-checks the non-degeneracy matrix.  The right
    block is the transpose of that matrix; both are symmetric because
    ∫ ∂_j h(y+y0) ∂_l w² = -∫ ∂_j∂_l h(y+y0) w².
    """
    y0 = np.asarray(y0, dtype=float)
    b1, b2 = _shifted_breaks(h, y0)
    R = profile.r_max
    n1, q1 = axis_rule(-R, R, b1, order, panel=0.8, ratio=0.25, levels=18)
    n2, q2 = axis_rule(-R, R, b2, order, panel=0.8, ratio=0.25, levels=18)
    x1, x2 = np.meshgrid(n1, n2, indexing="xy")
    wt = np.outer(q2, q1)
    r = np.hypot(x1, x2)
    w = profile.w(r)
    dw = _dw_from_spline(profile, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 0, dw / np.where(r > 0, r, 1.0), 0.0)
    dw2 = (2 * w * ratio * x1, 2 * w * ratio * x2)
    radial = 2 * w * dw * r  # y·∇w²
    gh = h.grad(x1 + y0[0], x2 + y0[1])
    P = np.empty((2, 3))
    for l in range(2):
        P[l, 0] = np.sum(wt * gh[l] * radial)
        for j in range(2):
            P[l, j + 1] = np.sum(wt * gh[l] * dw2[j])
    return P
