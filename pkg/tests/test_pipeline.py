"""Tests for the decision pipeline and its reports."""

import math

import numpy as np
import pytest

from copositivity.certification import VerdictKind
from copositivity.errors import InputError
from copositivity.parser import parse_text
from copositivity.pipeline import (
    NON_EXHAUSTIVE,
    UNSUPPORTED_SEPARABLE,
    CheckOptions,
    check_polynomial,
    describe_support,
    run_check,
    support_is_separable,
    verdict_counts,
)
from copositivity.report import (
    EXIT_COPOSITIVE,
    EXIT_INCONCLUSIVE,
    EXIT_INPUT_ERROR,
    EXIT_NOT_COPOSITIVE,
    error_report,
)
from copositivity.tracker import FailureReason, TrackResult

from .conftest import four_variable_circuit

SQUARE = "1 + x1^2 + x2^2 + x1^2*x2^2 - x1*x2"
SEPARABLE = "1 + x1^4 + x2^4 + x1^4*x2^4 - {c}*x1*x2^3 - {c}*x1^3*x2"


def test_square_is_copositive():
    report = run_check(SQUARE)
    assert report.classification == "nonseparable"
    assert report.method == "single-path"
    assert report.t_star == pytest.approx(4.0, abs=1e-8)
    assert report.verdict.kind == VerdictKind.COPOSITIVE
    assert report.verdict.certified
    assert report.verdict.t_interval.lo > 1
    assert report.exit_code == EXIT_COPOSITIVE
    assert (report.gamma_size, report.gamma_dim, report.j_size) == (5, 2, 1)
    assert abs(report.track["jacobian_det"]) > 1e-12


def test_circuit_is_not_copositive():
    report = check_polynomial(four_variable_circuit(1e-7))
    assert report.verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert report.verdict.certified
    assert report.method == "single-path"
    assert report.exit_code == EXIT_NOT_COPOSITIVE


def test_single_path_examples_finish_within_a_second():
    """The square and the four-variable circuit are each decided in under a second."""
    square = run_check(SQUARE)
    circuit = check_polynomial(four_variable_circuit(1e-7))
    assert square.verdict.certified and circuit.verdict.certified
    assert square.timing["total"] < 1.0
    assert circuit.timing["total"] < 1.0


def test_trivially_negative_skips_tracking():
    report = run_check("x1 - 1")
    assert report.classification == "trivial-"
    assert report.verdict.kind == VerdictKind.TRIVIALLY_NEGATIVE
    assert report.verdict.certified
    assert report.track is None
    assert report.exit_code == EXIT_NOT_COPOSITIVE


def test_trivially_copositive():
    report = run_check("1 + x1^2*x2 + 3*x2^-1")
    assert report.verdict.kind == VerdictKind.TRIVIALLY_COPOSITIVE
    assert report.exit_code == EXIT_COPOSITIVE


def test_no_certify_is_never_certified():
    report = run_check(SQUARE, CheckOptions(certify=False))
    assert report.verdict.kind == VerdictKind.COPOSITIVE
    assert not report.verdict.certified
    assert any(w.startswith("UNCERTIFIED") for w in report.warnings)


def test_heights_change_tstar_but_not_verdict():
    report = run_check(SQUARE, CheckOptions(heights="2"))
    assert report.t_star == pytest.approx(2.0, abs=1e-8)
    assert report.verdict.kind == VerdictKind.COPOSITIVE


def test_sonc_attached():
    report = run_check(SQUARE, CheckOptions(sonc=True))
    assert len(report.certificate["circuits"]) == 2
    assert report.verification["status"] == "PASS"


def test_sonc_skipped_when_not_copositive():
    report = run_check("1 + x1^2 + x2^2 + x1^2*x2^2 - 5*x1*x2", CheckOptions(sonc=True))
    assert report.verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert report.certificate is None
    assert any("no SONC certificate" in w for w in report.warnings)


def test_separable_fallback_finds_negative_value():
    report = run_check(SEPARABLE.format(c=3), CheckOptions(n_starts=100, sonc=True))
    assert report.classification == "separable"
    assert report.method == "fallback"
    assert report.hyperplane is not None
    assert UNSUPPORTED_SEPARABLE in report.warnings
    assert report.verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert report.verdict.certified
    assert report.verdict.t_interval.hi < 1


def test_separable_fallback_never_claims_copositive():
    report = run_check(SEPARABLE.format(c=1), CheckOptions(n_starts=50))
    assert report.verdict.kind == VerdictKind.INCONCLUSIVE
    assert report.exit_code == EXIT_INCONCLUSIVE
    assert any(w.startswith(NON_EXHAUSTIVE) for w in report.warnings)


def test_non_isolated_zero_is_not_certified_negative():
    """The square of a sign-changing signomial touches zero along a curve."""
    report = run_check(
        "(1 + x1^2*x2 + x1*x2^2 - 30*x1*x2)^2", CheckOptions(expand=True, n_starts=50)
    )
    assert report.verdict.kind in (VerdictKind.INCONCLUSIVE, VerdictKind.COPOSITIVE)
    if report.verdict.kind == VerdictKind.COPOSITIVE:
        assert report.verdict.t_interval.lo > 1


def _overflowing_track(n_reduced):
    def track(homotopy, config=None, trace_path=None):
        return TrackResult(
            t_star=float("nan"),
            x_star=np.zeros(n_reduced),
            tau_y=np.zeros(n_reduced + 1),
            converged=False,
            failure_reason=FailureReason.OVERFLOW,
        )

    return track


def test_circuit_beyond_float_range_uses_closed_form():
    """t* = 2e300 lies past what the tracker can reach; the circuit closed form decides."""
    report = run_check("1 + x1^200 - 1e-300*x1^100")
    assert report.verdict.kind == VerdictKind.COPOSITIVE
    assert not report.verdict.certified
    assert report.exit_code == EXIT_COPOSITIVE
    assert report.t_star == pytest.approx(2e300, rel=1e-9)
    assert report.verdict.details["log_t_star"] == pytest.approx(
        math.log(2.0) + 300 * math.log(10.0), rel=1e-12
    )
    assert any(w.startswith("UNCERTIFIED") for w in report.warnings)


def test_failed_circuit_track_respects_heights(monkeypatch):
    """With h = 2 the closed form gives t* = sqrt(Theta / d) = sqrt(2 / 3)."""
    monkeypatch.setattr("copositivity.pipeline.track_single_path", _overflowing_track(1))
    report = run_check("1 + x1^2 - 3*x1", CheckOptions(heights="2"))
    assert report.verdict.kind == VerdictKind.NOT_COPOSITIVE
    assert not report.verdict.certified
    assert report.t_star == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)
    assert report.track["failure_reason"] == "Overflow"


def test_overflow_off_a_circuit_suggests_larger_heights(monkeypatch):
    monkeypatch.setattr("copositivity.pipeline.track_single_path", _overflowing_track(2))
    report = run_check(SQUARE)
    assert report.verdict.kind == VerdictKind.INCONCLUSIVE
    assert report.exit_code == EXIT_INCONCLUSIVE
    assert any("--h" in w for w in report.warnings)


def test_limits():
    many = " + ".join(f"x{i}" for i in range(1, 10))
    with pytest.raises(InputError, match="--no-limits"):
        run_check(many)
    report = run_check(many, CheckOptions(enforce_limits=False))
    assert report.verdict.kind == VerdictKind.TRIVIALLY_COPOSITIVE


def test_bad_heights():
    with pytest.raises(InputError):
        run_check(SQUARE, CheckOptions(heights="0"))


def test_report_dict():
    data = run_check(SQUARE).to_dict()
    assert data["schema"] == 1
    assert data["verdict"] == "Copositive"
    assert data["certified"] is True
    assert data["gamma"] == {"size": 5, "dim": 2}
    assert data["t_interval"][0] <= 4.0 <= data["t_interval"][1]
    assert {"parse", "geometry", "tracking", "certification", "total"} <= set(data["timing"])
    assert "timing" not in run_check(SQUARE).to_dict(with_timing=False)


def test_error_report():
    report = error_report("x1 +", InputError("expected var", 1, 5), line=3)
    data = report.to_dict()
    assert data["exit_code"] == EXIT_INPUT_ERROR
    assert data["line"] == 3
    assert data["error"].startswith("line 1, column 5")
    assert data["verdict"] is None


def test_describe_support():
    info = describe_support(parse_text(SQUARE))
    assert info["classification"] == "nonseparable"
    assert info["lambda_size"] == 2
    assert len(info["J"]) == 1

    separable = describe_support(parse_text(SEPARABLE.format(c=1)))
    assert separable["classification"] == "separable"
    assert "hyperplane" in separable

    trivial = describe_support(parse_text("1 + x1^2"))
    assert trivial["message"] == "trivially copositive support"


def test_describe_support_oracles():
    info = describe_support(parse_text(SQUARE), dev_oracles=True)
    assert info["oracles"]["brute_force_nonseparable"] is True
    assert info["oracles"]["grid_min"]["value"] > 0


def test_support_is_separable():
    assert support_is_separable(parse_text(SEPARABLE.format(c=1)))
    assert not support_is_separable(parse_text(SQUARE))
    assert not support_is_separable(parse_text("x1 - 1"))


def test_verdict_counts():
    reports = [run_check(SQUARE), run_check("x1 - 1"), error_report("?", InputError("bad"))]
    assert verdict_counts(reports) == {"Copositive": 1, "TriviallyNegative": 1, "Error": 1}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
