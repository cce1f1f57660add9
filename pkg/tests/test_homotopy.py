"""Tests for the start system and the parameter homotopy."""

import math
from fractions import Fraction

import numpy as np
import pytest

from copositivity.errors import InputError
from copositivity.homotopy import (
    HomotopyOverflow,
    ParameterHomotopy,
    eval_homotopy,
    hessian_det_at,
    jac_homotopy,
    starting_coefficients,
)
from copositivity.lattice import SignedSupport
from copositivity.signomial import HeightFunction

from .conftest import four_variable_circuit, square_center


def _homotopy(f, height=1):
    return ParameterHomotopy.build(f, HeightFunction.uniform(f.support, height))


def test_starting_coefficients_square():
    """The center of the square is the average of its corners."""
    c_hat = starting_coefficients(square_center().support)
    assert c_hat == (Fraction(1, 4),) * 4 + (Fraction(1),)


def test_starting_coefficients_circuit():
    """Weights 9/10 on the origin and 1/40 on each x_i^40."""
    c_hat = starting_coefficients(four_variable_circuit().support)
    assert c_hat == (Fraction(9, 10),) + (Fraction(1, 40),) * 4 + (Fraction(1),)


def test_starting_coefficients_extra_negative_points_get_zero():
    support = SignedSupport(((0, 0), (4, 0), (0, 4), (4, 4)), ((1, 3), (3, 3)), 2)
    c_hat = starting_coefficients(support)
    assert c_hat[-2:] == (Fraction(1), Fraction(0))
    assert sum(c_hat[:4]) == 1
    assert all(w > 0 for w in c_hat[:4])


def test_starting_coefficients_need_interior_point():
    support = SignedSupport(((0, 0), (2, 0), (0, 2)), ((1, 1),), 2)
    with pytest.raises(InputError):
        starting_coefficients(support)


@pytest.mark.parametrize("f", [square_center(), four_variable_circuit()])
def test_start_point_is_a_zero(f):
    ph = _homotopy(f)
    assert np.max(np.abs(eval_homotopy(ph, 0.0, 0.0, np.zeros(f.n)))) <= 1e-12


def test_target_zero_of_square():
    """At s = 1 the lifted square vanishes with its gradient at t = 4, x = (1, 1)."""
    ph = _homotopy(square_center())
    residual = eval_homotopy(ph, 1.0, math.log(4.0), [0.0, 0.0])
    np.testing.assert_allclose(residual, 0.0, atol=1e-14)


def test_jacobian_matches_finite_differences(rng):
    ph = _homotopy(square_center(1.0, 2.0, 0.5, 3.0, 1.5), height=2)
    step = 1e-6
    for _ in range(5):
        s = rng.uniform(0.0, 1.0)
        tau, y = rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5, size=2)
        jac, d_s = jac_homotopy(ph, s, tau, y)
        z = np.concatenate([[tau], y])
        numeric = np.empty_like(jac)
        for k in range(3):
            e = np.zeros(3)
            e[k] = step
            numeric[:, k] = (ph.evaluate(s, z + e) - ph.evaluate(s, z - e)) / (2 * step)
        np.testing.assert_allclose(jac, numeric, rtol=1e-6, atol=1e-8)
        numeric_s = (ph.evaluate(s + step, z) - ph.evaluate(s - step, z)) / (2 * step)
        np.testing.assert_allclose(d_s, numeric_s, rtol=1e-6, atol=1e-8)


def test_dtau_negative_at_start():
    ph = _homotopy(square_center())
    assert ph.dtau_first_row(0.0, np.zeros(3)) < 0


def test_endpoint_is_nondegenerate():
    ph = _homotopy(square_center())
    z = np.array([math.log(4.0), 0.0, 0.0])
    assert abs(hessian_det_at(ph, z)) > 1e-12


def test_overflow_is_reported():
    ph = _homotopy(four_variable_circuit())
    with pytest.raises(HomotopyOverflow):
        ph.evaluate(0.5, np.array([0.0, 30.0, 0.0, 0.0, 0.0]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
