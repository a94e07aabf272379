import numpy as np
import pytest

from gprotor.errors import CollapseDetected, ConfigError, NumericalError
from gprotor.gp2d import (SolverOptions, chemical_potential, el_residual, energy, gn_ratio,
                          gp_apply, kinetic_energy, minimize)
from gprotor.sweep import state_from_field
from gprotor.grid import ComplexField, Grid2D, gaussian_field, random_start
from gprotor.townes import w_on_grid
from gprotor.trap import TrapSpec

HARMONIC = TrapSpec(2.0)
ANISO = TrapSpec(2.0, 0.5, 0.0)


@pytest.fixture(scope="module")
def grid():
    return Grid2D(128, 8.0)


@pytest.fixture(scope="module")
def half_state(grid, ast):
    return minimize(0.5 * ast, 1.0, ANISO, init=gaussian_field(grid), opts=SolverOptions(tol=1e-12))


def test_harmonic_gaussian_energy(grid):
    assert energy(gaussian_field(grid), 0.0, 0.0, HARMONIC) == pytest.approx(2.0, abs=1e-6)


def test_rotation_vanishes_for_real_fields(grid):
    u = gaussian_field(grid, (0.5, -0.3), 0.8)
    assert energy(u, 3.0, 1.2, ANISO) == energy(u, 3.0, 0.0, ANISO)


def test_unnormalized_input_rejected(grid):
    with pytest.raises(ConfigError) as exc:
        energy(gaussian_field(grid) * 2.0, 0.0, 0.0, HARMONIC)
    assert exc.value.code == "unnormalized-input"


def test_townes_kinetic_cancels_interaction(profile, ast):
    g = Grid2D(256, 16.0)
    x1, x2 = g.mesh
    w, _, _ = w_on_grid(profile, x1, x2)
    u = ComplexField(g, w / np.sqrt(ast))
    kin = kinetic_energy(u)
    quart = g.integrate(np.abs(u.values) ** 4)
    assert abs(kin - 0.5 * ast * quart) < 1e-3 * kin


def test_gaussian_is_harmonic_eigenfunction(grid):
    u = gaussian_field(grid)
    Hu = gp_apply(u, 0.0, 0.0, HARMONIC).values
    assert np.max(np.abs(Hu - 2 * u.values)) < 1e-9


def test_linear_part_is_linear(grid):
    rng = np.random.default_rng(0)
    u = random_start(grid, rng)
    v = random_start(grid, rng)
    s = ComplexField(grid, u.values + v.values)
    lin = gp_apply(s, 0.0, 1.0, ANISO).values - gp_apply(u, 0.0, 1.0, ANISO).values \
        - gp_apply(v, 0.0, 1.0, ANISO).values
    assert np.max(np.abs(lin)) < 1e-9
    a = 2.0
    cross = gp_apply(s, a, 1.0, ANISO).values - gp_apply(u, a, 1.0, ANISO).values \
        - gp_apply(v, a, 1.0, ANISO).values
    U, W = u.values, v.values
    expected = -a * (np.abs(U + W) ** 2 * (U + W) - np.abs(U) ** 2 * U - np.abs(W) ** 2 * W)
    assert np.max(np.abs(cross - expected)) < 1e-9


def test_quadratic_form_is_real(grid):
    rng = np.random.default_rng(5)
    for _ in range(5):
        u = random_start(grid, rng)
        z = grid.inner(u.values, gp_apply(u, 4.0, 1.3, ANISO).values)
        assert abs(z.imag) < 1e-10 * max(1.0, abs(z.real))


def test_minimize_harmonic():
    s = minimize(0.0, 0.0, HARMONIC, init=gaussian_field(Grid2D(128, 8.0), width=0.7))
    assert s.energy == pytest.approx(2.0, abs=1e-5)
    assert s.mu == pytest.approx(2.0, abs=1e-5)
    assert chemical_potential(s) == pytest.approx(s.energy, abs=1e-12)


def test_minimize_harmonic_with_flow():
    opts = SolverOptions(method="flow", tol=1e-12, history_every=5)
    s = minimize(0.0, 0.0, HARMONIC, init=gaussian_field(Grid2D(64, 8.0), width=0.5), opts=opts)
    assert s.energy == pytest.approx(2.0, abs=1e-5)
    energies = [h[1] for h in s.history]
    res = [h[2] for h in s.history]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
    assert all(b <= a * (1 + 1e-9) for a, b in zip(res, res[1:]))


def test_multistart_energies_agree(grid, ast, half_state):
    for seed in range(8):
        s = minimize(0.5 * ast, 1.0, ANISO, init=seed, grid=grid)
        assert s.energy == pytest.approx(half_state.energy, abs=1e-7)


def test_collapse_above_threshold(grid, ast):
    with pytest.raises(CollapseDetected):
        minimize(1.02 * ast, 1.0, ANISO, init=gaussian_field(grid))


def test_state_invariants(half_state):
    s = half_state
    assert abs(s.field.mass() - 1) < 1e-12
    assert s.residual < 1e-6
    assert el_residual(s) == pytest.approx(s.residual, rel=1e-6, abs=1e-12)


def test_two_multiplier_formulas(half_state):
    s = half_state
    g = s.grid
    quart = g.integrate(np.abs(s.field.values) ** 4)
    mu_energy = s.energy - 0.5 * s.a * quart
    mu_form = g.inner(s.field.values, gp_apply(s.field, s.a, s.Omega, s.trap).values).real
    assert mu_energy == pytest.approx(mu_form, abs=1e-6)


def test_residual_of_random_field_is_large(grid, half_state):
    rnd = random_start(grid, np.random.default_rng(9))
    st = state_from_field(rnd, half_state.a, 1.0, ANISO, 0)
    assert el_residual(st) > 0.1


def test_gn_ratio(grid):
    u = gaussian_field(grid)
    r = gn_ratio(u, 11.700896524211545)
    assert r < 1
    assert gn_ratio(u * np.exp(0.7j), 11.700896524211545) == pytest.approx(r, rel=1e-14)


def test_resolution_consistency(ast, half_state):
    fine = minimize(0.5 * ast, 1.0, ANISO, init=gaussian_field(Grid2D(256, 8.0)))
    assert fine.energy == pytest.approx(half_state.energy, abs=1e-5)


def test_negative_coupling_rejected(grid):
    with pytest.raises(ConfigError):
        minimize(-1.0, 0.0, HARMONIC, grid=grid)


def test_iteration_cap(grid, ast):
    with pytest.raises(NumericalError) as exc:
        minimize(0.5 * ast, 1.0, ANISO, init=3, grid=grid, opts=SolverOptions(max_iter=5))
    assert exc.value.code == "no-convergence"
