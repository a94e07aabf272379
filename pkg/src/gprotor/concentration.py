"""Concentration data of the blow-up: H(y) = ∫ h(x+y) w²(x) dx, its critical
point y0 with the non-degeneracy matrix, the constant λ and the scale α_a.

Integrals are tensor Gauss-Legendre rules on [-R, R]², split along the lines
where the shifted h is not smooth and geometrically graded towards them, so
that the Hölder-continuous derivative of |x_j|^p (p < 2) costs no accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError
from .townes import RadialProfile, w_on_grid
from .trap import HomogeneousFunction, TrapSpec, homogeneous_part


def axis_rule(lo, hi, breaks=(), order=16, panel=1.0, ratio=0.3, levels=14):
    """1-D composite Gauss-Legendre nodes and weights on [lo, hi].

    Panels are split at ``breaks`` and graded geometrically towards each break
    (smallest panel ~ 0.5·ratio**levels).
    """
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = {lo, hi}
    for b in breaks:
        if lo < b < hi:
            edges.add(b)
            for k in range(levels + 1):
                d = 0.5 * ratio**k
                for e in (b - d, b + d):
                    if lo < e < hi:
                        edges.add(e)
    edges = sorted(edges)
    # fill long gaps with uniform panels
    fine = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(1, int(np.ceil((b - a) / panel - 1e-12)))
        fine.extend(np.linspace(a, b, m + 1)[1:])
    fine = np.asarray(fine)
    a, b = fine[:-1, None], fine[1:, None]
    nodes = (0.5 * (b - a) * gx + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * gw).ravel()
    return nodes, weights


@dataclass
class TensorRule:
    x1: np.ndarray
    x2: np.ndarray
    weight: np.ndarray

    def integrate(self, values) -> float:
        return float(np.sum(values * self.weight))


def tensor_rule(half_width, breaks1=(), breaks2=(), order=16, **kw) -> TensorRule:
    n1, w1 = axis_rule(-half_width, half_width, breaks1, order, **kw)
    n2, w2 = axis_rule(-half_width, half_width, breaks2, order, **kw)
    x1, x2 = np.meshgrid(n1, n2, indexing="xy")
    return TensorRule(x1, x2, np.outer(w2, w1))


def _shifted_breaks(h: HomogeneousFunction, y):
    # h(x + y) has kinks where x_j = k - y_j
    return tuple(k - y[0] for k in h.kinks[0]), tuple(k - y[1] for k in h.kinks[1])


def _rule_for(h, y, profile, order):
    b1, b2 = _shifted_breaks(h, y)
    return tensor_rule(profile.r_max, b1, b2, order)


class _WCache:
    """w², ∂w²/∂x_l on a given tensor rule (radial spline evaluations are the cost)."""

    def __init__(self, rule: TensorRule, profile: RadialProfile):
        w, d1, d2 = w_on_grid(profile, rule.x1, rule.x2)
        self.w2 = w * w
        self.dw2 = (2 * w * d1, 2 * w * d2)


def H_value(h: HomogeneousFunction, y, profile: RadialProfile, order: int = 16):
    """H(y) and an error estimate from a second rule of higher order."""
    y = np.asarray(y, dtype=float)
    vals = []
    for n in (order, order + 8):
        rule = _rule_for(h, y, profile, n)
        w, _, _ = w_on_grid(profile, rule.x1, rule.x2)
        vals.append(rule.integrate(h(rule.x1 + y[0], rule.x2 + y[1]) * w * w))
    return vals[1], abs(vals[1] - vals[0])


def grad_H(h, y, profile, order=16):
    """∇H(y) = ∫ ∇h(x+y) w²(x) dx."""
    rule = _rule_for(h, y, profile, order)
    w, _, _ = w_on_grid(profile, rule.x1, rule.x2)
    g1, g2 = h.grad(rule.x1 + y[0], rule.x2 + y[1])
    return np.array([rule.integrate(g1 * w * w), rule.integrate(g2 * w * w)])


def nondegeneracy_matrix(h, y, profile, order=16):
    """M[l, j] = ∫ ∂h/∂x_j(x+y) ∂w²/∂x_l(x) dx (equals minus the Hessian of H)."""
    rule = _rule_for(h, y, profile, order)
    cache = _WCache(rule, profile)
    g = h.grad(rule.x1 + y[0], rule.x2 + y[1])
    M = np.empty((2, 2))
    for l in range(2):
        for j in range(2):
            M[l, j] = rule.integrate(g[j] * cache.dw2[l])
    return M


@dataclass
class ConcentrationData:
    y0: np.ndarray
    nondeg_matrix: np.ndarray
    lambda_: float
    p: float
    H_y0: float
    grad_norm: float
    iterations: int

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.nondeg_matrix))


def find_y0(h: HomogeneousFunction, profile: RadialProfile, max_iter: int = 50,
            order: int = 16):
    """Damped Newton iteration on ∇H from y = 0.

    Returns (y0, M, H(y0), |∇H(y0)|, iterations).  The step is halved until
    |∇H| decreases.
    """
    y = np.zeros(2)
    g = grad_H(h, y, profile, order)
    Hy, _ = H_value(h, y, profile, order)
    it = 0
    while np.linalg.norm(g) >= 1e-8 * (1 + abs(Hy)):
        if it >= max_iter:
            raise NumericalError("no-critical-point", f"|grad H| = {np.linalg.norm(g):.2e} after {it} steps")
        M = nondegeneracy_matrix(h, y, profile, order)
        step = np.linalg.solve(M, g)  # Hessian of H is -M
        t = 1.0
        while True:
            y_new = y + t * step
            g_new = grad_H(h, y_new, profile, order)
            if np.linalg.norm(g_new) < np.linalg.norm(g) or t < 1e-6:
                break
            t *= 0.5
        y, g = y_new, g_new
        Hy, _ = H_value(h, y, profile, order)
        it += 1
    M = nondegeneracy_matrix(h, y, profile, order)
    scale = np.abs(M).sum() ** 2
    if abs(np.linalg.det(M)) < 1e-10 * scale:
        raise NumericalError("degenerate-critical-point", f"det = {np.linalg.det(M):.3e}")
    return y, M, Hy, float(np.linalg.norm(g)), it


def second_moment(profile: RadialProfile, y=(0.0, 0.0), order: int = 16) -> float:
    """∫|x|² w²(x) dx on the tensor rule."""
    rule = tensor_rule(profile.r_max, (), (), order)
    w, _, _ = w_on_grid(profile, rule.x1, rule.x2)
    return rule.integrate((rule.x1**2 + rule.x2**2) * w * w)


def lambda_const(h: HomogeneousFunction, Omega: float, p: float, y0, profile: RadialProfile,
                 order: int = 16) -> float:
    """The blow-up constant λ for the branch selected by p."""
    Hy, _ = H_value(h, y0, profile, order)
    if p < 2:
        radicand = 0.5 * p * Hy
        expo = 1.0 / (2 + p)
    else:
        radicand = Hy + 0.25 * Omega**2 * second_moment(profile, y0, order)
        expo = 0.25
    if not radicand > 0:
        raise NumericalError("invalid-lambda", f"radicand {radicand:.3e} is not positive")
    return float(radicand**expo)


def alpha_of_a(a: float, a_star: float, lam: float, p: float) -> float:
    """Blow-up length scale (a* - a)^{1/(2+p)} / λ."""
    if a >= a_star:
        raise ParameterError("supercritical-coupling", f"a = {a} >= a* = {a_star}")
    if a < 0:
        raise ParameterError("invalid-coupling", "a must be nonnegative")
    return float((a_star - a) ** (1.0 / (2 + p)) / lam)


def concentration_data(trap: TrapSpec, Omega: float, profile: RadialProfile,
                       order: int = 16) -> ConcentrationData:
    """y0, the non-degeneracy matrix and λ for a trap at velocity Ω."""
    h = homogeneous_part(trap, Omega)
    y0, M, Hy, gn, it = find_y0(h, profile, order=order)
    lam = lambda_const(h, Omega, trap.p, y0, profile, order)
    return ConcentrationData(y0, M, lam, trap.p, Hy, gn, it)
