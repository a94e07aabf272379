"""Radial ground state w of -Δw + w - w³ = 0 in two dimensions.

The profile is obtained by shooting on the central amplitude w(0) and is stored
on a dense uniform radial grid.  Beyond ``r_match`` the exponential tail law
w(r) ≈ C r^{-1/2} e^{-r} replaces the integrated solution, which is unreliable
there because the growing mode of the linearised equation takes over.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.special import exp1, k0e, k1e

from .errors import NumericalError, ParameterError

TAIL_THRESHOLD = 1e-4
_R0 = 1e-3  # series start radius for the integrator
_MAX_BISECTIONS = 200


@dataclass(frozen=True, eq=False)
class RadialProfile:
    r_nodes: np.ndarray
    w_values: np.ndarray
    dw_values: np.ndarray
    tail_coeff: float
    r_match: float
    residual: float = float("nan")
    tol: float = float("nan")
    _i_match: int = field(default=0, repr=False)

    @property
    def w0(self) -> float:
        return float(self.w_values[0])

    @property
    def dr(self) -> float:
        return float(self.r_nodes[1] - self.r_nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.r_nodes[-1])

    @functools.cached_property
    def _w_spline(self):
        i = self._i_match + 1
        r, w, dw = self.r_nodes[:i], self.w_values[:i], self.dw_values[:i]
        if _hermite_is_monotone(r, w, dw):
            return CubicHermiteSpline(r, w, dw)
        return PchipInterpolator(r, w)

    @functools.cached_property
    def _dw_spline(self):
        i = self._i_match + 1
        r, dw = self.r_nodes[:i], self.dw_values[:i]
        return CubicHermiteSpline(r, dw, _second_derivative(r, self.w_values[:i], dw))

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        return self.tail_coeff * np.exp(-r) / np.sqrt(r)

    @property
    def bessel_coeff(self) -> float:
        """B with w(r_match) = B K0(r_match)."""
        rm = self.r_match
        return float(self.w_values[self._i_match] / (k0e(rm) * np.exp(-rm)))

    def _tail_pair(self, r, tail):
        if tail == "law":
            t = self.tail(r)
            return t, -t * (1.0 + 0.5 / r)
        if tail == "bessel":
            # the cubic term is ~w³ ≤ 1e-12 here, so B K0 solves the tail equation
            e = self.bessel_coeff * np.exp(-r)
            return e * k0e(r), -e * k1e(r)
        raise ParameterError("invalid-argument", f"unknown tail model {tail!r}")

    def w(self, r, tail: str = "law"):
        """w at arbitrary radii (monotone cubic inside r_match, tail beyond).

        ``tail="law"`` uses C r^{-1/2} e^{-r}; ``tail="bessel"`` uses the
        K0 continuation, which also has a continuous derivative at r_match.
        """
        r = np.abs(np.asarray(r, dtype=float))
        inside = r <= self.r_match
        out = np.empty_like(r)
        out[inside] = self._w_spline(r[inside])
        out[~inside] = self._tail_pair(r[~inside], tail)[0]
        return out

    def dw(self, r, tail: str = "law"):
        """Radial derivative w'(r)."""
        r = np.abs(np.asarray(r, dtype=float))
        inside = r <= self.r_match
        out = np.empty_like(r)
        out[inside] = self._dw_spline(r[inside])
        out[~inside] = self._tail_pair(r[~inside], tail)[1]
        return out


def _second_derivative(r, w, dw):
    d2 = np.empty_like(w)
    d2[1:] = w[1:] - w[1:] ** 3 - dw[1:] / r[1:]
    d2[0] = 0.5 * (w[0] - w[0] ** 3)  # w'' + w'/r -> 2 w''(0)
    return d2


def _hermite_is_monotone(r, w, dw):
    # Fritsch-Carlson sufficient condition for a decreasing Hermite cubic
    secant = np.diff(w) / np.diff(r)
    if np.any(secant >= 0):
        return False
    alpha = dw[:-1] / secant
    beta = dw[1:] / secant
    return bool(np.all(alpha >= 0) and np.all(beta >= 0) and np.all(alpha**2 + beta**2 <= 9.0))


def _rhs(r, y):
    w, v = y
    return [v, w - w**3 - v / r]


def _series_start(s, r0=_R0):
    c2 = 0.25 * (s - s**3)
    c4 = (1.0 - 3.0 * s * s) * c2 / 16.0
    return [s + c2 * r0**2 + c4 * r0**4, 2 * c2 * r0 + 4 * c4 * r0**3]


def _crosses_zero(r, y):
    return y[0]


_crosses_zero.terminal = True


def _turns_up(r, y):
    return y[1]


_turns_up.terminal = True
_turns_up.direction = 1


def _integrate(s, r_end, rtol, dense=False):
    return solve_ivp(_rhs, (_R0, r_end), _series_start(s), method="DOP853",
                     rtol=rtol, atol=1e-16, events=[_crosses_zero, _turns_up],
                     dense_output=dense)


def _classify(s, r_end, rtol):
    """+1 if the trajectory overshoots (crosses zero), -1 if it turns back up."""
    sol = _integrate(s, r_end, rtol)
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    w, v = sol.y[:, -1]
    return 1 if v + w < 0 else -1


@functools.lru_cache(maxsize=8)
def _shoot(rtol, r_end, lo=1.0, hi=4.0):
    if _classify(lo, r_end, rtol) != -1 or _classify(hi, r_end, rtol) != 1:
        raise NumericalError("bracket-failure", f"[{lo}, {hi}] does not enclose the decaying solution")
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return 0.5 * (lo + hi)
        if _classify(mid, r_end, rtol) > 0:
            hi = mid
        else:
            lo = mid
    raise NumericalError("no-convergence", "shooting bisection did not terminate")


def solve_w(r_max: float = 20.0, tol: float = 1e-10, dr: float = 1e-3) -> RadialProfile:
    """Shoot for the positive decaying radial solution and sample it on [0, r_max].

    ``tol`` bounds the ODE residual at the integrated nodes; ``dr`` is the node
    spacing of the output grid.
    """
    if not r_max >= 15:
        raise ParameterError("invalid-argument", "r_max must be >= 15")
    if not 0 < tol <= 1e-6:
        raise ParameterError("invalid-argument", "tol must lie in (0, 1e-6]")
    rtol = float(np.clip(tol * 3e-4, 3e-14, 1e-9))
    r_end = max(r_max, 25.0)
    s = _shoot(rtol, r_end)

    n = int(round(r_max / dr))
    r = np.linspace(0.0, n * dr, n + 1)
    sol = _integrate(s, r_end, rtol, dense=True)
    r_stop = sol.t[-1]

    def deriv(rr):
        rr = np.asarray(rr, dtype=float)
        w_, v_ = np.empty_like(rr), np.empty_like(rr)
        near = rr < _R0
        c2 = 0.25 * (s - s**3)
        c4 = (1.0 - 3.0 * s * s) * c2 / 16.0
        w_[near] = s + c2 * rr[near] ** 2 + c4 * rr[near] ** 4
        v_[near] = 2 * c2 * rr[near] + 4 * c4 * rr[near] ** 3
        far = ~near
        w_[far], v_[far] = sol.sol(np.minimum(rr[far], r_stop))
        return w_, v_

    mid = r <= r_stop - 0.1
    w = np.full_like(r, np.nan)
    dw = np.full_like(r, np.nan)
    w[mid], dw[mid] = deriv(r[mid])
    below = np.flatnonzero(mid & (w < TAIL_THRESHOLD))
    if below.size == 0:
        raise NumericalError("no-convergence", "integrated profile never fell below the tail threshold")
    i_match = int(below[0])
    r_match = float(r[i_match])
    tail_coeff = float(w[i_match] * np.sqrt(r_match) * np.exp(r_match))

    rt = r[i_match + 1:]
    w[i_match + 1:] = tail_coeff * np.exp(-rt) / np.sqrt(rt)
    dw[i_match + 1:] = -w[i_match + 1:] * (1.0 + 0.5 / rt)
    dw[0] = 0.0

    res = float(np.max(np.abs(ode_residual(deriv, r[:i_match]))))
    if not res < tol:
        raise NumericalError("no-convergence", f"ODE residual {res:.2e} exceeds tol {tol:.1e}")
    return RadialProfile(r, w, dw, tail_coeff, r_match, residual=res, tol=tol, _i_match=i_match)


def ode_residual(deriv, r, h=0.005):
    """Pointwise residual of -w'' - w'/r + w - w³ at radii ``r``.

    ``deriv(r)`` returns (w, w') at arbitrary nonnegative radii; w'' comes from a
    sixth-order central difference of w' with step ``h``, w' extended oddly
    through the origin.
    """
    r = np.asarray(r, dtype=float)
    offsets = np.array([-3, -2, -1, 1, 2, 3]) * h
    coef = np.array([-1, 9, -45, 45, -9, 1]) / (60 * h)
    pts = r[:, None] + offsets[None, :]
    _, v = deriv(np.abs(pts).ravel())
    v = np.sign(pts).ravel() * v
    d2 = (v.reshape(pts.shape) * coef).sum(axis=1)
    w, dw = deriv(r)
    res = np.empty_like(r)
    pos = r > 0
    res[pos] = -d2[pos] - dw[pos] / r[pos] + w[pos] - w[pos] ** 3
    res[~pos] = -2 * d2[~pos] + w[~pos] - w[~pos] ** 3
    return res


# --- radial quadrature -------------------------------------------------------

def _trapezoid_corrected(f, dr, fp_a, fp_b):
    # trapezoid with the leading Euler-Maclaurin endpoint correction
    t = dr * (f.sum() - 0.5 * (f[0] + f[-1]))
    return t - dr**2 / 12.0 * (fp_b - fp_a)


@dataclass(frozen=True)
class RadialIntegrals:
    grad: float
    mass: float
    quartic: float


def radial_integrals(profile: RadialProfile) -> RadialIntegrals:
    """∫|∇w|², ∫w², ∫w⁴ over the plane."""
    i = profile._i_match + 1
    r = profile.r_nodes[:i]
    w = profile.w_values[:i]
    v = profile.dw_values[:i]
    d2 = _second_derivative(r, w, v)
    dr = profile.dr
    R, C = profile.r_match, profile.tail_coeff

    mass = _trapezoid_corrected(r * w**2, dr, w[0] ** 2, w[-1] ** 2 + 2 * R * w[-1] * v[-1])
    grad = _trapezoid_corrected(r * v**2, dr, 0.0, v[-1] ** 2 + 2 * R * v[-1] * d2[-1])
    quart = _trapezoid_corrected(r * w**4, dr, w[0] ** 4, w[-1] ** 4 + 4 * R * w[-1] ** 3 * v[-1])

    e2 = np.exp(-2 * R)
    mass += C**2 * e2 / 2
    grad += C**2 * (e2 * (0.5 + 0.25 / R) + 0.5 * exp1(2 * R))
    quart += C**4 * exp1(4 * R)
    two_pi = 2 * np.pi
    return RadialIntegrals(float(two_pi * grad), float(two_pi * mass), float(two_pi * quart))


def radial_moment(profile: RadialProfile, k: int = 2) -> float:
    """∫|x|^k w² dx by plain trapezoid on the node grid plus tail (k ≥ 1)."""
    r, w = profile.r_nodes, profile.w_values
    f = r ** (k + 1) * w**2
    body = profile.dr * (f.sum() - 0.5 * (f[0] + f[-1]))
    R, C = profile.r_max, profile.tail_coeff
    # ∫_R^∞ r^k C² e^{-2r} dr, enough for the e^{-40} tail at R = 20
    tail = C**2 * R**k * np.exp(-2 * R) / 2 * (1 + k / (2 * R))
    return float(2 * np.pi * (body + tail))


def a_star(profile: RadialProfile) -> float:
    """Critical coupling ‖w‖₂²."""
    return radial_integrals(profile).mass


@dataclass(frozen=True)
class IdentityReport:
    grad: float
    mass: float
    half_quartic: float
    dev_grad_mass: float
    dev_grad_quartic: float
    dev_mass_quartic: float

    @property
    def max_deviation(self) -> float:
        return max(self.dev_grad_mass, self.dev_grad_quartic, self.dev_mass_quartic)


def _rel(x, y):
    return abs(x - y) / max(abs(x), abs(y))


def check_identities(profile: RadialProfile) -> IdentityReport:
    """∫|∇w|² = ∫w² = ½∫w⁴ and their pairwise relative deviations."""
    ints = radial_integrals(profile)
    g, m, q = ints.grad, ints.mass, 0.5 * ints.quartic
    return IdentityReport(g, m, q, _rel(g, m), _rel(g, q), _rel(m, q))


def eval_w_2d(profile: RadialProfile, points) -> np.ndarray:
    """w(|x|) at points given as an array of shape (..., 2)."""
    pts = np.asarray(points, dtype=float)
    return profile.w(np.hypot(pts[..., 0], pts[..., 1]))


def w_on_grid(profile: RadialProfile, x1, x2, tail: str = "law"):
    """w and its Cartesian gradient at coordinate arrays ``x1``, ``x2``."""
    r = np.hypot(x1, x2)
    w = profile.w(r, tail)
    dw = profile.dw(r, tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 0, dw / np.where(r > 0, r, 1.0), 0.0)
    return w, ratio * x1, ratio * x2


@functools.lru_cache(maxsize=4)
def default_profile() -> RadialProfile:
    """Shared production profile (r_max = 20, tol = 1e-10, dr = 1e-3)."""
    return solve_w(20.0, 1e-10, 1e-3)
