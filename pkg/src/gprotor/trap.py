"""Trap family V(x) = |x|² + a1|x1|^p + a2|x2|^p, its rotating-frame effective
potential V_Ω = V - Ω²|x|²/4, homogeneous part h and critical velocity Ω*."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ParameterError


def _abs_pow_grad(t, p):
    # d/dt |t|^p = sign(t) p |t|^{p-1}; zero at t = 0 since p > 1
    return np.sign(t) * p * np.abs(t) ** (p - 1)


@dataclass(frozen=True)
class HomogeneousFunction:
    """A degree-p homogeneous function with its gradient.

    ``kinks`` lists, per axis, coordinates (in the function's own argument) of
    lines across which the function is not smooth; quadrature panels are split
    there.
    """

    value: Callable
    grad: Callable
    p: float
    kinks: tuple = ((0.0,), (0.0,))
    label: str = "custom"

    def __call__(self, x1, x2):
        return self.value(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))


def separable_power(c1: float, c2: float, p: float) -> HomogeneousFunction:
    """h(x) = c1|x1|^p + c2|x2|^p."""

    def value(x1, x2):
        return c1 * np.abs(x1) ** p + c2 * np.abs(x2) ** p

    def grad(x1, x2):
        return c1 * _abs_pow_grad(x1, p), c2 * _abs_pow_grad(x2, p)

    kinks = ((), ()) if p == 2 else ((0.0,), (0.0,))
    return HomogeneousFunction(value, grad, p, kinks, f"{c1:g}|x1|^{p:g} + {c2:g}|x2|^{p:g}")


def check_homogeneity(h: HomogeneousFunction, n: int = 64, seed: int = 0, rtol: float = 1e-10):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    t = rng.uniform(0.1, 10.0, size=n)
    lhs = h(t * x[:, 0], t * x[:, 1])
    rhs = t**h.p * h(x[:, 0], x[:, 1])
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    return bool(np.all(np.abs(lhs - rhs) <= rtol * np.maximum(scale, 1e-300)))


@dataclass(frozen=True)
class TrapSpec:
    p: float = 2.0
    a1: float = 0.0
    a2: float = 0.0
    custom_h: Optional[HomogeneousFunction] = None
    custom_omega_star: Optional[float] = None
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if not (1.0 < self.p <= 2.0):
            raise ConfigError("invalid-trap", f"p = {self.p} outside (1, 2]")
        if self.a1 < 0 or self.a2 < 0:
            raise ConfigError("invalid-trap", "a1, a2 must be nonnegative")
        if self.custom_h is not None:
            if self.custom_h.p != self.p:
                raise ConfigError("invalid-trap", "custom_h degree differs from p")
            if not check_homogeneity(self.custom_h):
                raise ConfigError("invalid-trap", "custom_h is not homogeneous of the declared degree")

    @property
    def is_builtin(self) -> bool:
        return self.custom_h is None

    def _extra(self, x1, x2):
        if self.custom_h is not None:
            return self.custom_h(x1, x2)
        return self.a1 * np.abs(x1) ** self.p + self.a2 * np.abs(x2) ** self.p

    def _extra_grad(self, x1, x2):
        if self.custom_h is not None:
            return self.custom_h.grad(np.asarray(x1, float), np.asarray(x2, float))
        return self.a1 * _abs_pow_grad(x1, self.p), self.a2 * _abs_pow_grad(x2, self.p)

    def V(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        return x1**2 + x2**2 + self._extra(x1, x2)

    def V_Omega(self, x1, x2, Omega, check=True):
        if check:
            require_subcritical(self, Omega)
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        return (1.0 - Omega**2 / 4) * (x1**2 + x2**2) + self._extra(x1, x2)

    def grad_V_Omega(self, x1, x2, Omega, check=True):
        if check:
            require_subcritical(self, Omega)
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        g1, g2 = self._extra_grad(x1, x2)
        c = 2.0 * (1.0 - Omega**2 / 4)
        return c * x1 + g1, c * x2 + g2


def eval_V(trap: TrapSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return trap.V(x[..., 0], x[..., 1])


def eval_V_Omega(trap: TrapSpec, Omega: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return trap.V_Omega(x[..., 0], x[..., 1], Omega)


def grad_V_Omega(trap: TrapSpec, Omega: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g1, g2 = trap.grad_V_Omega(x[..., 0], x[..., 1], Omega)
    return np.stack([g1, g2], axis=-1)


def _ray_growth_ok(trap, Omega, n_dirs=64):
    th = np.linspace(0, 2 * np.pi, n_dirs, endpoint=False)
    e1, e2 = np.cos(th), np.sin(th)
    v10 = trap.V_Omega(10 * e1, 10 * e2, Omega, check=False)
    v100 = trap.V_Omega(100 * e1, 100 * e2, Omega, check=False)
    return bool(np.all(v10 > 0) and np.all(v100 > v10))


def omega_star(trap: TrapSpec) -> float:
    """Supremum of Ω for which V - Ω²|x|²/4 still grows without bound."""
    if trap.custom_h is None:
        if trap.p < 2:
            return 2.0
        return 2.0 * np.sqrt(1.0 + min(trap.a1, trap.a2))
    if trap.custom_omega_star is not None:
        value = float(trap.custom_omega_star)
    elif trap.p < 2:
        value = 2.0
    else:
        th = np.linspace(0, 2 * np.pi, 3600, endpoint=False)
        value = 2.0 * np.sqrt(1.0 + float(np.min(trap.custom_h(np.cos(th), np.sin(th)))))
    if not _ray_growth_ok(trap, 0.999 * value):
        raise ConfigError("invalid-trap", f"declared omega_star = {value} fails ray sampling")
    return value


def require_subcritical(trap: TrapSpec, Omega: float) -> None:
    if Omega < 0:
        raise ParameterError("invalid-velocity", "Omega must be nonnegative")
    if Omega >= omega_star(trap):
        raise ParameterError("supercritical-velocity",
                             f"Omega = {Omega} >= Omega* = {omega_star(trap):.6g}")


def homogeneous_part(trap: TrapSpec, Omega: float) -> HomogeneousFunction:
    """Degree-p leading part of V_Ω at the origin."""
    require_subcritical(trap, Omega)
    p = trap.p
    q = 1.0 - Omega**2 / 4
    if trap.custom_h is not None:
        h = trap.custom_h
        if p < 2:
            return h

        def value(x1, x2):
            return q * (x1**2 + x2**2) + h.value(x1, x2)

        def grad(x1, x2):
            g1, g2 = h.grad(x1, x2)
            return 2 * q * x1 + g1, 2 * q * x2 + g2

        return HomogeneousFunction(value, grad, 2.0, h.kinks, f"{q:g}|x|^2 + {h.label}")
    if p < 2:
        if trap.a1 == 0 and trap.a2 == 0:
            raise ParameterError("h-identically-zero", "p < 2 requires a1 + a2 > 0")
        return separable_power(trap.a1, trap.a2, p)
    return separable_power(q + trap.a1, q + trap.a2, 2.0)


@dataclass
class AssumptionReport:
    passed: bool
    failures: list
    checks: dict

    def __str__(self):
        lines = [f"trap assumptions: {'pass' if self.passed else 'FAIL'}"]
        for k, v in self.checks.items():
            lines.append(f"  {k}: {v}")
        for f in self.failures:
            lines.append(f"  violated: {f}")
        return "\n".join(lines)


def validate_assumption_V(trap: TrapSpec, Omega: float, n_angles: int = 64) -> AssumptionReport:
    """Sample V_Ω to confirm the structural assumptions on the trap.

    Checks V_Ω(0) = 0, positivity away from 0, growth along rays, and that the
    remainders (V_Ω - h)/|x|^p and |∇V_Ω - ∇h|/|x|^{p-1} shrink on rings
    |x| ∈ {1e-2, 1e-4, 1e-6}.
    """
    failures = []
    checks = {}
    th = np.linspace(0, 2 * np.pi, n_angles, endpoint=False) + 0.1234
    e1, e2 = np.cos(th), np.sin(th)
    p = trap.p

    v0 = float(trap.V_Omega(0.0, 0.0, Omega, check=False))
    checks["V_Omega(0)"] = v0
    if abs(v0) > 1e-14:
        failures.append("V_Omega(0) != 0")

    radii = np.logspace(-3, 2, 26)
    vals = np.array([trap.V_Omega(r * e1, r * e2, Omega, check=False) for r in radii])
    checks["min V_Omega on rings"] = float(vals.min())
    if np.any(vals <= 0):
        failures.append("zero set of V_Omega is not {0}")
    if not _ray_growth_ok(trap, Omega, n_angles):
        failures.append("V_Omega does not grow along rays")

    try:
        h = homogeneous_part(trap, Omega)
    except ParameterError as exc:
        failures.append(exc.code)
        return AssumptionReport(False, failures, checks)

    ratios, gratios = [], []
    for r in (1e-2, 1e-4, 1e-6):
        x1, x2 = r * e1, r * e2
        rem = trap.V_Omega(x1, x2, Omega, check=False) - h(x1, x2)
        ratios.append(float(np.max(np.abs(rem)) / r**p))
        g1, g2 = trap.grad_V_Omega(x1, x2, Omega, check=False)
        h1, h2 = h.grad(x1, x2)
        gratios.append(float(np.max(np.hypot(g1 - h1, g2 - h2)) / r ** (p - 1)))
    checks["remainder ratio at |x|=1e-2,1e-4,1e-6"] = ratios
    checks["gradient remainder ratio"] = gratios

    def vanishing(seq):
        # ratios at rounding level (exact homogeneity) count as zero
        seq = [0.0 if v < 1e-12 else v for v in seq]
        return seq[-1] < 1e-2 and all(b <= a for a, b in zip(seq, seq[1:]))

    if not vanishing(ratios):
        failures.append("V_Omega - h is not o(|x|^p)")
    if not vanishing(gratios):
        failures.append("grad V_Omega - grad h is not o(|x|^(p-1))")
    return AssumptionReport(not failures, failures, checks)
