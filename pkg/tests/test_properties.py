"""Property-based checks of invariants that hold for every admissible input."""
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gprotor.concentration import alpha_of_a
from gprotor.gp2d import GPProblem, energy, gn_ratio
from gprotor.grid import ComplexField, Grid2D
from gprotor.trap import TrapSpec, check_homogeneity, homogeneous_part, omega_star, separable_power
from gprotor.uniqueness import phase_distance
from oracles import values as ref

GRID = Grid2D(64, 12.0)
SETTINGS = settings(max_examples=40, deadline=None,
                    suppress_health_check=[HealthCheck.function_scoped_fixture])

centers = st.floats(-1.5, 1.5)
widths = st.floats(0.6, 1.6)
waves = st.floats(-2.0, 2.0)


def smooth_field(c1, c2, s, k1, k2, beta, grid=GRID):
    """Zero-free gaussian with a quadratic phase."""
    x1, x2 = grid.mesh
    env = np.exp(-((x1 - c1) ** 2 + (x2 - c2) ** 2) / (2 * s * s))
    phase = k1 * x1 + k2 * x2 + beta * x1 * x2
    return ComplexField(grid, env * np.exp(1j * phase)).normalized()


field_st = st.builds(smooth_field, centers, centers, widths, waves, waves, st.floats(-0.5, 0.5))
trap_st = st.builds(TrapSpec, st.sampled_from([2.0, 1.5, 1.2]), st.floats(0.1, 2.0),
                    st.floats(0.1, 2.0))


@SETTINGS
@given(field_st, st.floats(0, 2 * np.pi), st.floats(0, 1.5), st.floats(0, 11.0))
def test_energy_gauge_invariant(u, theta, Omega, a):
    trap = TrapSpec(2.0, 0.5, 0.0)
    e0 = energy(u, a, Omega, trap)
    e1 = energy(ComplexField(u.grid, np.exp(1j * theta) * u.values), a, Omega, trap)
    assert e1 == pytest.approx(e0, rel=1e-12, abs=1e-12)


@SETTINGS
@given(field_st, trap_st, st.floats(0, 1.0), st.floats(0, 11.0))
def test_diamagnetic_inequality(u, trap, frac, a):
    Omega = frac * min(omega_star(trap), 1.9)
    x1, x2 = u.grid.mesh
    mod = ComplexField(u.grid, np.abs(u.values).astype(complex))
    rhs = energy(mod, a, 0.0, trap) - 0.25 * Omega**2 * u.grid.integrate((x1**2 + x2**2) * np.abs(u.values) ** 2)
    assert energy(u, a, Omega, trap) >= rhs - 1e-9 * max(1.0, abs(rhs))


@SETTINGS
@given(field_st, field_st, field_st, st.floats(0, 2 * np.pi))
def test_phase_distance_pseudometric(u, v, w, theta):
    _, duv = phase_distance(u, v)
    _, dvu = phase_distance(v, u)
    _, duw = phase_distance(u, w)
    _, dwv = phase_distance(w, v)
    assert duv == pytest.approx(dvu, abs=1e-12)
    assert duv <= duw + dwv + 1e-10
    assert 0 <= duv <= 2 + 1e-12
    rotated = ComplexField(u.grid, np.exp(1j * theta) * u.values)
    t, d = phase_distance(u, rotated)
    assert d < 1e-6
    assert np.cos(t - theta) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gn_ratio_bounded(seed):
    rng = np.random.default_rng(seed)
    g = GRID
    x1, x2 = g.mesh
    vals = np.zeros_like(x1, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        c = rng.uniform(-2, 2, 2)
        s = rng.uniform(0.5, 1.5)
        amp = rng.normal() + 1j * rng.normal()
        vals += amp * np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / (2 * s * s))
    u = ComplexField(g, vals).normalized()
    assert 0 < gn_ratio(u, ref.A_STAR) <= 1 + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 3.0), st.floats(1.05, 2.0),
       st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10.0))
def test_homogeneity_and_euler(c1, c2, p, y1, y2, t):
    h = separable_power(c1, c2, p)
    assert check_homogeneity(h)
    assert h(t * y1, t * y2) == pytest.approx(t**p * h(y1, y2), rel=1e-10, abs=1e-300)
    g1, g2 = h.grad(np.array(y1), np.array(y2))
    assert y1 * g1 + y2 * g2 == pytest.approx(p * h(y1, y2), rel=1e-10, abs=1e-12)


@SETTINGS
@given(trap_st, st.floats(0, 0.95))
def test_homogeneous_part_is_small_scale_limit(trap, frac):
    Omega = frac * min(omega_star(trap), 1.9)
    h = homogeneous_part(trap, Omega)
    x = np.array([0.7, -1.3])
    t = 1e-6
    limit = trap.V_Omega(t * x[0], t * x[1], Omega) / t**h.p
    assert abs(limit - h(*x)) <= t ** (2 - h.p) * (x @ x) + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 11.6), st.floats(0.5, 3.0), st.sampled_from([2.0, 1.5, 1.2]))
def test_alpha_inverse(a, lam, p):
    alpha = alpha_of_a(a, ref.A_STAR, lam, p)
    assert ref.A_STAR - (lam * alpha) ** (2 + p) == pytest.approx(a, abs=1e-9)
    assert alpha_of_a(min(a + 0.01, 11.69), ref.A_STAR, lam, p) < alpha


@SETTINGS
@given(field_st, field_st, st.floats(0, 1.5))
def test_linear_part_symmetric(u, v, Omega):
    prob = GPProblem(GRID, 0.0, Omega, TrapSpec(2.0, 0.5, 0.0))
    lhs = GRID.inner(u.values, prob.apply(v.values)[0])
    rhs = GRID.inner(prob.apply(u.values)[0], v.values)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))
