import numpy as np
import pytest

from gprotor.concentration import (H_value, alpha_of_a, concentration_data, find_y0, grad_H,
                                   lambda_const, nondegeneracy_matrix)
from gprotor.errors import NumericalError, ParameterError
from gprotor.trap import TrapSpec, homogeneous_part, separable_power
from oracles import values as ref


def test_H_harmonic_at_origin(profile):
    h = homogeneous_part(TrapSpec(2.0), 1.0)
    val, err = H_value(h, (0.0, 0.0), profile)
    assert val == pytest.approx(0.75 * ref.I2, rel=1e-8)
    assert err < 1e-8


def test_H_even_and_growing(profile):
    h = homogeneous_part(TrapSpec(1.5, 1.0, 2.0), 1.0)
    y = np.array([0.6, -0.4])
    assert H_value(h, y, profile)[0] == pytest.approx(H_value(h, -y, profile)[0], rel=1e-10)
    assert H_value(h, (5.0, 0.0), profile)[0] > 5 * H_value(h, (0.0, 0.0), profile)[0]


def test_H_converges_with_order(profile):
    h = homogeneous_part(TrapSpec(1.5, 1.0, 2.0), 1.0)
    y = (0.3, 0.2)
    exact = H_value(h, y, profile, order=32)[0]
    e8 = abs(H_value(h, y, profile, order=8)[0] - exact)
    e16 = abs(H_value(h, y, profile, order=16)[0] - exact)
    assert e16 <= max(e8 / 4, 1e-12)


@pytest.mark.parametrize("trap", [TrapSpec(2.0, 0.5, 0.0), TrapSpec(1.5, 1.0, 2.0),
                                  TrapSpec(1.5, 3.0, 3.0), TrapSpec(2.0)])
def test_y0_at_origin_for_builtin(trap, profile):
    c = concentration_data(trap, 1.0, profile)
    assert np.linalg.norm(c.y0) < 1e-8
    assert abs(c.det) > 1.0
    assert c.grad_norm < 1e-8
    m = c.nondeg_matrix
    assert abs(m[0, 1]) < 1e-9 * abs(m[0, 0]) and abs(m[1, 0]) < 1e-9 * abs(m[0, 0])


def test_nondeg_matrix_for_square(profile, ast):
    h = separable_power(1.0, 1.0, 2.0)
    y0, M, *_ = find_y0(h, profile)
    np.testing.assert_allclose(M, np.diag([-2 * ast, -2 * ast]), atol=1e-8 * ast)


def test_lambda_radial(profile):
    lam = concentration_data(TrapSpec(2.0), 1.0, profile).lambda_
    assert lam == pytest.approx(ref.LAMBDA_RADIAL, rel=1e-8)
    # Ω drops out for the isotropic harmonic trap
    assert concentration_data(TrapSpec(2.0), 0.3, profile).lambda_ == pytest.approx(lam, rel=1e-12)


def test_lambda_fractional(profile):
    lam = concentration_data(TrapSpec(1.5, 1.0, 1.0), 1.0, profile).lambda_
    assert lam == pytest.approx(ref.LAMBDA_P15_UNIT, rel=1e-8)


def test_lambda_swap_symmetric(profile):
    a = concentration_data(TrapSpec(1.5, 0.5, 2.0), 1.0, profile).lambda_
    b = concentration_data(TrapSpec(1.5, 2.0, 0.5), 1.0, profile).lambda_
    assert a == pytest.approx(b, rel=1e-12)


def test_alpha_inverse_relation(ast):
    lam, p = 1.9, 1.5
    a = 0.93 * ast
    al = alpha_of_a(a, ast, lam, p)
    assert (al * lam) ** (2 + p) == pytest.approx(ast - a, rel=1e-13)
    assert alpha_of_a(ast - 1e-4, ast, lam, 2.0) == pytest.approx(0.1 / lam, rel=1e-10)
    assert alpha_of_a(ast - 1e-12, ast, lam, p) < 1e-3


def test_alpha_supercritical(ast):
    with pytest.raises(ParameterError) as exc:
        alpha_of_a(ast, ast, 1.0, 2.0)
    assert exc.value.code == "supercritical-coupling"


def test_nondeg_matrix_equals_minus_hessian(profile):
    h = homogeneous_part(TrapSpec(1.5, 1.0, 2.0), 1.0)
    y, d = np.array([0.2, -0.1]), 1e-4
    M = nondegeneracy_matrix(h, y, profile)
    hess = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = d
        hess[:, j] = (grad_H(h, y + e, profile) - grad_H(h, y - e, profile)) / (2 * d)
    np.testing.assert_allclose(-hess, M, rtol=1e-5, atol=1e-6)


def test_lambda_const_rejects_bad_radicand(profile):
    h = separable_power(-1.0, -1.0, 1.5)
    with pytest.raises(NumericalError):
        lambda_const(h, 1.0, 1.5, (0.0, 0.0), profile)
