"""Tests for single-path tracking and the multistart fallback."""

import csv
import math

import numpy as np
import pytest

from copositivity.errors import ContractViolation, InputError
from copositivity.lattice import smallest_face_containing, truncation_face_set_J
from copositivity.pipeline import CheckOptions, check_polynomial
from copositivity.signomial import (
    HeightFunction,
    Signomial,
    critical_residual,
    format_signomial,
    lift,
    rescale_to_one,
)
from copositivity.tracker import (
    TrackerConfig,
    fallback_multistart,
    prepare_nonseparable,
    solve_tstar_nonseparable,
)

from .conftest import EXAMPLE_TSTAR, copositive_square_coeffs, square_center


def _uniform(f, value=1):
    return HeightFunction.uniform(f.support, value)


def _separable_square():
    return Signomial.from_terms(
        {(0, 0): 1, (4, 0): 1, (0, 4): 1, (4, 4): 1, (1, 3): -1, (3, 1): -1}
    )


def test_square_tstar(square_f):
    result = solve_tstar_nonseparable(square_f, _uniform(square_f))
    assert result.converged
    assert result.failure_reason is None
    assert result.t_star == pytest.approx(4.0, abs=1e-8)
    np.testing.assert_allclose(result.x_star, [1.0, 1.0], atol=1e-8)


def test_circuit_tstar(circuit_f):
    result = solve_tstar_nonseparable(circuit_f, _uniform(circuit_f))
    assert result.converged
    assert result.t_star == pytest.approx(EXAMPLE_TSTAR, abs=1e-9)
    assert result.t_star < 1


def test_endpoint_is_singular_zero_of_lift(rng):
    """At the endpoint the lifted signomial and its gradient vanish."""
    f = square_center(*copositive_square_coeffs(rng))
    h = _uniform(f)
    result = solve_tstar_nonseparable(f, h)
    assert result.converged
    lifted = lift(f, h, result.t_star)
    scale = max(1.0, float(np.max(rescale_to_one(lifted, result.x_star).abs_coeffs)))
    assert critical_residual(lifted, result.x_star) < 1e-9 * scale


def test_height_changes_tstar_not_verdict(square_f):
    """With t^2 in place of t the square's t* is 2 instead of 4."""
    t1 = solve_tstar_nonseparable(square_f, _uniform(square_f, 1)).t_star
    t2 = solve_tstar_nonseparable(square_f, _uniform(square_f, 2)).t_star
    assert t2 == pytest.approx(2.0, abs=1e-8)
    assert (t1 >= 1) == (t2 >= 1)


def _two_minus_square(a, b):
    """1 + x1^4 + x2^4 + x1^4 x2^4 - a x1 x2^3 - b x1^3 x2^3; both negatives share a cell."""
    return Signomial.from_terms(
        {(0, 0): 1, (4, 0): 1, (0, 4): 1, (4, 4): 1, (1, 3): -a, (3, 3): -b}
    )


@pytest.mark.slow
def test_verdict_is_independent_of_heights(rng):
    """20 nonseparable instances, each checked under two height functions."""
    instances = []
    for _ in range(10):
        instances.append((square_center(*rng.uniform(0.1, 10.0, size=5)), "1", "2"))
    for _ in range(10):
        a, b = rng.uniform(0.2, 3.0, size=2)
        instances.append((_two_minus_square(a, b), "1", "1,2"))

    checked = 0
    for f, first, second in instances:
        one = check_polynomial(f, CheckOptions(heights=first))
        two = check_polynomial(f, CheckOptions(heights=second))
        assert one.classification == two.classification == "nonseparable"
        if min(abs(math.log(one.t_star)), abs(math.log(two.t_star))) < 1e-3:
            continue
        assert one.verdict.kind == two.verdict.kind, format_signomial(f)
        assert one.verdict.certified and two.verdict.certified
        assert one.t_star != pytest.approx(two.t_star, rel=1e-6)
        checked += 1
    assert checked >= 18


def test_separable_support_is_refused():
    f = _separable_square()
    with pytest.raises(ContractViolation):
        prepare_nonseparable(f, _uniform(f))


def test_trivial_input_is_refused():
    f = Signomial.from_terms({(0,): 1, (2,): 1})
    with pytest.raises(ContractViolation):
        prepare_nonseparable(f, _uniform(f))


def test_boundary_face_is_reduced():
    """A- on an edge: the problem is the one-variable truncation 1 + x^2 - 2x."""
    f = Signomial.from_terms({(0, 0): 1, (2, 0): 1, (0, 2): 1, (1, 0): -2})
    problem = prepare_nonseparable(f, _uniform(f))
    assert problem.reduced.n == 1
    assert problem.truncated.terms() == {(0, 0): 1.0, (2, 0): 1.0, (1, 0): -2.0}
    result = solve_tstar_nonseparable(f, _uniform(f))
    assert result.t_star == pytest.approx(1.0, abs=1e-8)
    assert result.x_star[0] == pytest.approx(1.0, abs=1e-6)


def test_trace_csv(tmp_path, square_f):
    path = tmp_path / "trace.csv"
    solve_tstar_nonseparable(square_f, _uniform(square_f), trace_path=path)
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["s", "tau", "y1", "y2", "step", "newton_iters"]
    assert len(rows) > 2
    assert float(rows[-1][0]) == 1.0
    assert float(rows[-1][1]) == pytest.approx(math.log(4.0), abs=1e-6)


def test_invalid_tracker_config():
    with pytest.raises(InputError):
        TrackerConfig(min_step=0.5, initial_step=0.1).validate()
    with pytest.raises(InputError):
        TrackerConfig(step_shrink=1.5).validate()


def test_max_steps_is_a_failure_not_an_exception(square_f):
    result = solve_tstar_nonseparable(
        square_f, _uniform(square_f), TrackerConfig(max_steps=1, max_step=0.05)
    )
    assert not result.converged
    assert result.failure_reason.value == "MaxSteps"


def test_fallback_finds_face_zeros():
    """Every candidate is a zero of its face system; runs are reproducible."""
    f = _separable_square()
    h = _uniform(f)
    gamma = smallest_face_containing(f.support, f.support.a_minus)
    faces = truncation_face_set_J(gamma, f.support)
    first = fallback_multistart(f, h, faces, n_starts=40, seed=3)
    second = fallback_multistart(f, h, faces, n_starts=40, seed=3)
    assert first, "expected at least one positive face solution"
    assert [c.t for c in first] == [c.t for c in second]
    assert [c.t for c in first] == sorted(c.t for c in first)
    for candidate in first:
        assert candidate.hits >= 1
        assert candidate.homotopy.scaled_residual(1.0, candidate.tau_y) <= 1e-10


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
