"""Blow-up rescaling, phase alignment and the scaling laws along a ↗ a*.

A ground state u_a is mapped to

    v_a(x) = α_a u_a(α_a x + x_a) exp(-i (Ω α_a / 2) x·x_a^⊥) exp(i φ_a),

with φ_a the phase that brings v_a closest to w/√a* in L².
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .concentration import ConcentrationData, alpha_of_a
from .errors import NumericalError, ParameterError
from .gp2d import GroundState
from .grid import ComplexField, Grid2D, fourier_resample
from .townes import RadialProfile, a_star, w_on_grid

ALIGN_N = 256
ALIGN_L = 12.0
NOISE_FLOOR = 1e-8  # |x_a|/α below this counts as "at y0"


@dataclass
class AlignedProfile:
    field: ComplexField
    a: float
    alpha: float
    peak_shift: np.ndarray
    phase: float
    sup_err: float
    epsilon: float = float("nan")
    mu: float = float("nan")

    @property
    def real_part(self) -> np.ndarray:
        return self.field.values.real

    @property
    def imag_part(self) -> np.ndarray:
        return self.field.values.imag

    @property
    def grid(self) -> Grid2D:
        return self.field.grid


def reference_profile(profile: RadialProfile, grid: Grid2D) -> np.ndarray:
    """w/√a* sampled on ``grid``."""
    x1, x2 = grid.mesh
    w, _, _ = w_on_grid(profile, x1, x2)
    return w / np.sqrt(a_star(profile))


def rescale_and_align(state: GroundState, conc: ConcentrationData, profile: RadialProfile,
                      N: int = ALIGN_N, L: float = ALIGN_L, alpha: float = None,
                      center=None) -> AlignedProfile:
    """Blow-up rescaling of ``state`` about its peak, followed by phase alignment.

    ``alpha`` and ``center`` override the state's own scale and peak, which is
    how two states are put into a common frame before differencing.
    """
    ast = a_star(profile)
    if alpha is None:
        alpha = alpha_of_a(state.a, ast, conc.lambda_, conc.p)
    src = state.grid
    xa = np.asarray(state.peak if center is None else center, dtype=float)
    margin = src.L - np.max(np.abs(xa))
    if margin < 4 * alpha:
        raise NumericalError("peak-near-boundary",
                             f"peak {xa} lies within 4 alpha = {4 * alpha:.3g} of the box edge")
    tgt = Grid2D(N, L)
    t = tgt.x
    v = alpha * fourier_resample(state.field.values, src, alpha * t + xa[0], alpha * t + xa[1])
    y1, y2 = tgt.mesh
    # x·x_a^⊥ with x_a^⊥ = (-x_a2, x_a1)
    v = v * np.exp(-0.5j * state.Omega * alpha * (-y1 * xa[1] + y2 * xa[0]))
    ref = reference_profile(profile, tgt)
    theta = -float(np.angle(np.sum(v * ref)))
    v = v * np.exp(1j * theta)
    sup_err = float(np.max(np.abs(v - ref)))
    return AlignedProfile(ComplexField(tgt, v), state.a, alpha, xa, theta, sup_err,
                          state.epsilon, state.mu)


def orthogonality(aligned: AlignedProfile, profile: RadialProfile) -> float:
    """∫ w · Im v, which alignment drives to zero."""
    w = reference_profile(profile, aligned.grid) * np.sqrt(a_star(profile))
    return aligned.grid.integrate(w * aligned.imag_part)


def alignment_distance(aligned: AlignedProfile, profile: RadialProfile, dphi: float = 0.0) -> float:
    """‖e^{i dφ} v − w/√a*‖₂."""
    ref = reference_profile(profile, aligned.grid)
    diff = aligned.field.values * np.exp(1j * dphi) - ref
    return float(np.sqrt(aligned.grid.integrate(np.abs(diff) ** 2)))


COLUMNS = ("a", "epsilon", "alpha", "eps_over_alpha", "mu_eps2", "peak_over_alpha",
           "sup_err", "imag_sup_over_alpha2")


@dataclass
class AsymptoticsReport:
    rows: List[tuple]
    slope: float
    intercept: float
    p: float
    aligned: List[AlignedProfile] = field(default_factory=list, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[COLUMNS.index(name)] for r in self.rows])

    @property
    def expected_slope(self) -> float:
        return 1.0 / (2 + self.p)


def _log_fit(x, y):
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def blowup_report(states: Sequence[GroundState], conc: ConcentrationData,
                  profile: RadialProfile, N: int = ALIGN_N, L: float = ALIGN_L) -> AsymptoticsReport:
    """Tabulate the blow-up quantities and fit ε_a against a* − a on log-log axes."""
    if len(states) < 3:
        raise ParameterError("insufficient-sequence", f"need at least 3 states, got {len(states)}")
    states = sorted(states, key=lambda s: s.a)
    ast = a_star(profile)
    rows, aligned = [], []
    for s in states:
        ap = rescale_and_align(s, conc, profile, N, L)
        aligned.append(ap)
        eps = s.epsilon
        alpha = ap.alpha
        imag_sup = float(np.max(np.abs(ap.imag_part)))
        rows.append((float(s.a), float(eps), alpha, eps / alpha, float(s.mu * eps**2),
                     float(np.linalg.norm(s.peak)) / alpha, ap.sup_err, imag_sup / alpha**2))
    gaps = np.array([ast - r[0] for r in rows])
    eps = np.array([r[1] for r in rows])
    slope, intercept = _log_fit(gaps, eps)
    return AsymptoticsReport(rows, slope, intercept, conc.p, aligned)


@dataclass
class ImagTrend:
    a: np.ndarray
    imag_sup: np.ndarray
    imag_over_alpha2: np.ndarray
    decreasing: bool

    def rows(self):
        return list(zip(self.a.tolist(), self.imag_sup.tolist(), self.imag_over_alpha2.tolist()))


def strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


def imaginary_smallness(aligned: Sequence[AlignedProfile]) -> ImagTrend:
    """sup|Im v_a| and sup|Im v_a|/α_a² in order of increasing a."""
    aligned = sorted(aligned, key=lambda ap: ap.a)
    a = np.array([ap.a for ap in aligned])
    sup = np.array([float(np.max(np.abs(ap.imag_part))) for ap in aligned])
    ratio = sup / np.array([ap.alpha for ap in aligned]) ** 2
    return ImagTrend(a, sup, ratio, strictly_decreasing(ratio))


def peak_trend_ok(peak_over_alpha, floor: float = NOISE_FLOOR) -> bool:
    """|x_a|/α_a nonincreasing once values under ``floor`` are read as zero."""
    v = np.where(np.asarray(peak_over_alpha, float) < floor, 0.0, peak_over_alpha)
    return bool(np.all(np.diff(v) <= 0))


def monotone_toward(values, target: float = 1.0) -> bool:
    """Distances |value − target| strictly decrease."""
    return strictly_decreasing(np.abs(np.asarray(values, float) - target))


@dataclass
class DecayReport:
    rate: float
    prefactor: float
    grad_rate: float
    grad_prefactor: float
    window: tuple

    @property
    def value_bound_ok(self) -> bool:
        return self.rate >= 2.0 / 3.0

    @property
    def grad_bound_ok(self) -> bool:
        return self.grad_rate >= 0.5


def decay_fit(aligned: AlignedProfile, r_in: float = 4.0, r_out: float = 8.0) -> DecayReport:
    """Exponential rate of |v_a| and |∇v_a| over the annulus r_in ≤ |x| ≤ r_out."""
    g = aligned.grid
    if r_out > g.L:
        raise ParameterError("invalid-window", f"annulus radius {r_out} exceeds half-width {g.L}")
    x1, x2 = g.mesh
    r = np.hypot(x1, x2)
    mask = (r >= r_in) & (r <= r_out)
    v = aligned.field.values
    d1, d2 = g.gradient(v)
    mod = np.abs(v)[mask]
    gmod = np.sqrt(np.abs(d1) ** 2 + np.abs(d2) ** 2)[mask]
    if mod.min() < 1e-14 or gmod.min() < 1e-14:
        raise NumericalError("tail-underflow", "annulus values reach arithmetic noise")
    rr = r[mask]
    s, c = np.polyfit(rr, np.log(mod), 1)
    gs, gc = np.polyfit(rr, np.log(gmod), 1)
    return DecayReport(float(-s), float(np.exp(c)), float(-gs), float(np.exp(gc)), (r_in, r_out))
