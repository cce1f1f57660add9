"""Tests for Krawczyk certification and verdicts."""

import math

import numpy as np
import pytest

from copositivity.certification import (
    KrawczykConfig,
    Verdict,
    VerdictKind,
    certify_endpoint,
    krawczyk_certify,
    uncertified_verdict,
    verdict_from_interval,
)
from copositivity.interval import Interval
from copositivity.signomial import HeightFunction
from copositivity.tracker import prepare_nonseparable, track_single_path

from .conftest import EXAMPLE_TSTAR, four_variable_circuit, square_center


def _tracked(f):
    problem = prepare_nonseparable(f, HeightFunction.uniform(f.support))
    return problem.homotopy, track_single_path(problem.homotopy)


def test_radius_schedule():
    radii = KrawczykConfig(initial_radius=1e-8, max_attempts=6, grow=4, shrink=0.25).radii()
    assert radii == pytest.approx([1e-8, 4e-8, 1.6e-7, 2.5e-9, 6.25e-10, 1.5625e-10])
    assert len(KrawczykConfig().radii()) == 6


def test_square_is_certified_copositive():
    ph, track = _tracked(square_center())
    certified, verdict = certify_endpoint(ph, track.tau_y)
    assert certified.unique
    assert certified.t_interval.contains(4.0)
    assert certified.t_interval.width < 1e-8
    assert certified.contains(track.tau_y)
    assert verdict.kind == VerdictKind.COPOSITIVE
    assert verdict.certified


def test_circuit_enclosure_contains_high_precision_value():
    """The certified interval holds theta / d evaluated with 40 significant digits."""
    mpmath = pytest.importorskip("mpmath")
    f = four_variable_circuit(1e-7)
    ph, track = _tracked(f)
    certified, _ = certify_endpoint(ph, track.tau_y)
    with mpmath.workdps(40):
        theta = (mpmath.mpf(10) / 9) ** mpmath.mpf("0.9") * mpmath.mpf(40) ** mpmath.mpf("0.1")
        d = mpmath.mpf(-f.coefficient((1, 1, 1, 1)))
        exact = theta / d
        assert certified.t_interval.lo <= exact <= certified.t_interval.hi


def test_circuit_is_certified_not_copositive():
    ph, track = _tracked(four_variable_circuit(1e-7))
    certified, verdict = certify_endpoint(ph, track.tau_y)
    assert certified.unique
    assert certified.t_interval.hi < 1.0
    assert certified.t_interval.contains(EXAMPLE_TSTAR) or abs(
        certified.t_interval.mid - EXAMPLE_TSTAR
    ) < 1e-9
    assert verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert verdict.certified


def test_circuit_closer_to_boundary():
    """With d = theta + 1e-12 the enclosure still excludes 1."""
    ph, track = _tracked(four_variable_circuit(1e-12))
    _, verdict = certify_endpoint(ph, track.tau_y)
    assert verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert verdict.t_interval.hi < 1.0


def test_wrong_center_is_not_certified():
    """A point far from any zero never passes the inclusion test."""
    ph, _ = _tracked(square_center())
    result = krawczyk_certify(ph, [0.0, 0.5, -0.5], config=KrawczykConfig(max_attempts=3))
    assert not result.unique
    assert result.t_interval is None
    assert result.attempts == 3


def test_verdict_from_interval():
    assert verdict_from_interval(Interval(1.5, 1.6)).kind == VerdictKind.COPOSITIVE
    assert verdict_from_interval(Interval(0.5, 0.6)).kind == VerdictKind.NOT_COPOSITIVE
    straddling = verdict_from_interval(Interval(0.9, 1.1), {"method": "single-path"})
    assert straddling.kind == VerdictKind.INCONCLUSIVE
    assert not straddling.certified
    assert straddling.details["method"] == "single-path"
    assert verdict_from_interval(None).kind == VerdictKind.INCONCLUSIVE


def test_uncertified_verdict():
    assert uncertified_verdict(1.0).kind == VerdictKind.COPOSITIVE
    assert uncertified_verdict(0.99).kind == VerdictKind.NOT_COPOSITIVE
    assert not uncertified_verdict(2.0).certified
    assert uncertified_verdict(math.nan).kind == VerdictKind.INCONCLUSIVE


def test_inconclusive_cannot_be_certified():
    with pytest.raises(ValueError):
        Verdict(VerdictKind.INCONCLUSIVE, True)


def test_verdict_kind_copositive_flag():
    assert VerdictKind.TRIVIALLY_COPOSITIVE.copositive is True
    assert VerdictKind.TRIVIALLY_NEGATIVE.copositive is False
    assert VerdictKind.INCONCLUSIVE.copositive is None


def test_certified_box_serializes():
    ph, track = _tracked(square_center())
    certified, verdict = certify_endpoint(ph, track.tau_y, context={"method": "single-path"})
    data = certified.to_dict()
    assert data["unique"] is True
    assert len(data["box"]) == 3
    assert verdict.to_dict()["details"]["krawczyk_attempts"] == certified.attempts
    assert np.all(np.isfinite(np.array(data["box"])))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
