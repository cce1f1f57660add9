"""Shared fixtures: the polynomials the test suite keeps coming back to."""

import math

import numpy as np
import pytest

from copositivity.lattice import SignedSupport
from copositivity.signomial import Signomial

EXAMPLE_THETA = (10 / 9) ** 0.9 * 40**0.1
EXAMPLE_TSTAR = 0.999999937105563


def square_center(c0=1.0, c1=1.0, c2=1.0, c3=1.0, c4=1.0) -> Signomial:
    """c0 + c1 x1^2 + c2 x2^2 + c3 x1^2 x2^2 - c4 x1 x2."""
    return Signomial.from_terms(
        {(0, 0): c0, (2, 0): c1, (0, 2): c2, (2, 2): c3, (1, 1): -c4}
    )


def four_variable_circuit(eps: float = 1e-7) -> Signomial:
    """1 + sum x_i^40 - d x1 x2 x3 x4 with d the circuit number plus ``eps``."""
    terms = {(0, 0, 0, 0): 1.0, (1, 1, 1, 1): -(EXAMPLE_THETA + eps)}
    for i in range(4):
        terms[tuple(40 if j == i else 0 for j in range(4))] = 1.0
    return Signomial.from_terms(terms)


@pytest.fixture
def square_f():
    """1 + x1^2 + x2^2 + x1^2 x2^2 - x1 x2, t* = 4."""
    return square_center()


@pytest.fixture
def circuit_f():
    """The four-variable circuit just past the copositivity boundary."""
    return four_variable_circuit(1e-7)


@pytest.fixture
def square_support():
    return SignedSupport(((0, 0), (2, 0), (0, 2), (2, 2)), ((1, 1),), 2)


@pytest.fixture
def pentagon_support():
    """Lattice pentagon with one negative point inside the central cell of its diagonals."""
    return SignedSupport(((2, 0), (4, 2), (3, 4), (1, 4), (0, 2)), ((2, 3),), 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def copositive_square_coeffs(rng, factor: float = 0.9):
    """Random c0..c3 in [0.1, 10] with c4 at ``factor`` times the copositivity threshold."""
    c = rng.uniform(0.1, 10.0, size=4)
    threshold = math.sqrt(4 * (c[0] * c[3] + c[1] * c[2]) + 8 * math.sqrt(c.prod()))
    return (*c, factor * threshold)
