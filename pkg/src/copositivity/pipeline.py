"""The decision pipeline behind ``copositivity check`` and ``copositivity support``.

parse -> sign precheck -> smallest face containing A- -> reduce -> classify
-> single path (nonseparable) or multistart fallback (separable) -> Krawczyk
certification -> optional SONC certificate.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .certification import (
    KrawczykConfig,
    Verdict,
    VerdictKind,
    certify_endpoint,
    krawczyk_certify,
    uncertified_verdict,
    verdict_from_interval,
)
from .errors import InputError, NotCopositiveError
from .homotopy import HomotopyOverflow, hessian_det_at
from .lattice import (
    classify_support,
    hull_vertices,
    reduce_to_full_dim,
    simplices_containing_cell,
    smallest_face_containing,
    truncation_face_set_J,
)
from .oracles import brute_force_nonseparable, circuit_log_tstar, grid_min
from .parser import parse_input
from .report import Report
from .signomial import (
    PrecheckOutcome,
    Signomial,
    format_signomial,
    parse_heights,
    sign_precheck,
    truncate,
)
from .sonc import CircuitPolynomial, certificate_from_track, verify_certificate
from .tracker import (
    FailureReason,
    NonseparableProblem,
    TrackerConfig,
    fallback_multistart,
    prepare_nonseparable,
    track_single_path,
)

logger = logging.getLogger(__name__)

NON_EXHAUSTIVE = "NON-EXHAUSTIVE"
UNSUPPORTED_SEPARABLE = "unsupported: separable support"


@dataclass
class CheckOptions:
    """Knobs of one pipeline run; the CLI fills these from Config and flags."""

    heights: Optional[str] = None
    default_height: int = 1
    assume_nonseparable: bool = False
    certify: bool = True
    sonc: bool = False
    force: bool = False
    expand: bool = False
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    krawczyk: KrawczykConfig = field(default_factory=KrawczykConfig)
    n_starts: int = 200
    seed: int = 0
    cluster_tol: float = 1e-6
    jobs: int = 1
    trace_path: Optional[Path] = None
    max_vars: int = 8
    max_terms: int = 40
    enforce_limits: bool = True


class _Stopwatch:
    def __init__(self, timing: Dict[str, float]):
        self.timing = timing
        self.start = time.perf_counter()
        self.last = self.start

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.timing[name] = self.timing.get(name, 0.0) + (now - self.last)
        self.last = now

    def total(self) -> None:
        self.timing["total"] = time.perf_counter() - self.start


def check_limits(f: Signomial, options: CheckOptions) -> None:
    """Reject inputs over the size guardrails unless they were lifted."""
    if not options.enforce_limits:
        return
    if f.n > options.max_vars:
        raise InputError(
            f"{f.n} variables exceed the limit of {options.max_vars} (use --no-limits)"
        )
    if len(f.coeffs) > options.max_terms:
        raise InputError(
            f"{len(f.coeffs)} terms exceed the limit of {options.max_terms} (use --no-limits)"
        )


def run_check(source: str, options: Optional[CheckOptions] = None) -> Report:
    """Parse ``source`` and run check_polynomial on it."""
    options = options or CheckOptions()
    started = time.perf_counter()
    f = parse_input(source, expand=options.expand)
    parse_time = time.perf_counter() - started
    report = check_polynomial(f, options, source=source)
    report.timing["parse"] = parse_time
    report.timing["total"] += parse_time
    return report


def check_polynomial(
    f: Signomial, options: Optional[CheckOptions] = None, source: Optional[str] = None
) -> Report:
    """Decide copositivity of ``f``.

    Raises:
        InputError: On guardrail violations or bad heights
        ContractViolation: If --nonseparable was asserted for a support that is not
    """
    options = options or CheckOptions()
    check_limits(f, options)
    report = Report(
        input=source.strip() if source is not None else format_signomial(f),
        n=f.n,
        terms=len(f.coeffs),
    )
    watch = _Stopwatch(report.timing)

    outcome = sign_precheck(f)
    if outcome == PrecheckOutcome.TRIVIALLY_COPOSITIVE:
        report.classification = "trivial+"
        report.verdict = Verdict(
            VerdictKind.TRIVIALLY_COPOSITIVE, True, details={"reason": "no negative terms"}
        )
        watch.total()
        return report
    if outcome == PrecheckOutcome.TRIVIALLY_NEGATIVE:
        report.classification = "trivial-"
        report.verdict = Verdict(
            VerdictKind.TRIVIALLY_NEGATIVE,
            True,
            details={"reason": "a negative term is a vertex of the Newton polytope"},
        )
        watch.total()
        return report

    h = parse_heights(options.heights, f.support, options.default_height)
    gamma = smallest_face_containing(f.support, f.support.a_minus)
    faces_J = truncation_face_set_J(gamma, f.support)
    report.gamma_size, report.gamma_dim, report.j_size = (
        len(gamma.point_indices),
        gamma.dim,
        len(faces_J),
    )

    if options.assume_nonseparable:
        nonseparable = True
        report.warnings.append("nonseparability asserted, detection skipped")
    else:
        result = classify_support(truncate(f, gamma).support)
        nonseparable = result.nonseparable
        if result.hyperplane is not None:
            report.hyperplane = result.hyperplane.to_dict()
        logger.info(
            "support classified %s: %s",
            "nonseparable" if nonseparable else "separable",
            result.reason,
        )
    report.classification = "nonseparable" if nonseparable else "separable"
    watch.lap("geometry")

    if nonseparable:
        _single_path(f, h, options, report, watch)
    else:
        _fallback(f, h, faces_J, options, report, watch)
    watch.total()
    return report


def _single_path(f, h, options: CheckOptions, report: Report, watch: _Stopwatch) -> None:
    report.method = "single-path"
    problem = prepare_nonseparable(f, h, options.assume_nonseparable)
    track = track_single_path(problem.homotopy, options.tracker, options.trace_path)
    track.x_star = problem.ambient_x(track.tau_y[1:])
    watch.lap("tracking")

    if track.converged:
        try:
            track.jacobian_det = hessian_det_at(problem.homotopy, track.tau_y)
        except HomotopyOverflow:
            track.jacobian_det = None
    report.track = track.to_dict()
    report.t_star = track.t_star if math.isfinite(track.t_star) else None

    context: Dict[str, Any] = {"steps": track.steps_taken}
    if not track.converged:
        reason = track.failure_reason.value if track.failure_reason else "residual too large"
        context["reason"] = f"path tracking failed: {reason}"
        report.warnings.append(f"tracking did not converge ({reason})")
        closed_form = _circuit_closed_form(problem, h, context)
        if closed_form is not None:
            report.verdict, report.t_star = closed_form
            report.warnings.append(
                "UNCERTIFIED: verdict from the circuit closed form after tracking failed"
            )
            return
        report.verdict = verdict_from_interval(None, context)
        if track.failure_reason is FailureReason.OVERFLOW:
            report.warnings.append(
                "t* is outside floating-point range; a larger --h moves it closer to 1"
            )
        return

    if options.certify:
        _, verdict = certify_endpoint(problem.homotopy, track.tau_y, options.krawczyk, context)
    else:
        verdict = uncertified_verdict(track.t_star, context)
        report.warnings.append("UNCERTIFIED: verdict from floating-point t* only")
    report.verdict = verdict
    watch.lap("certification")

    if options.sonc:
        _attach_certificate(f, problem, track, verdict, options, report)
        watch.lap("sonc")


def _circuit_closed_form(
    problem: NonseparableProblem, h, context: Dict[str, Any]
) -> Optional[Tuple[Verdict, Optional[float]]]:
    """Verdict and t* from Theta / d when the truncated signomial is a circuit, else None."""
    try:
        circuit = CircuitPolynomial.from_signomial(problem.truncated)
        if circuit.negative is None:
            return None
        log_t = circuit_log_tstar(circuit) / h.heights[circuit.negative[0]]
    except InputError:
        return None
    try:
        t_star: Optional[float] = math.exp(log_t)
    except OverflowError:
        t_star = None
    logger.info("tracking failed on a circuit; log t* = %.6g from the closed form", log_t)
    details = dict(context, log_t_star=log_t, t_star=t_star, method="circuit closed form")
    kind = VerdictKind.COPOSITIVE if log_t >= 0 else VerdictKind.NOT_COPOSITIVE
    return Verdict(kind, False, None, details), t_star


def _attach_certificate(f, problem, track, verdict, options: CheckOptions, report: Report) -> None:
    if verdict.kind == VerdictKind.INCONCLUSIVE and not options.force:
        report.warnings.append("no SONC certificate: verdict inconclusive (use --force)")
        return
    try:
        certificate = certificate_from_track(f, problem, track, verdict)
    except NotCopositiveError as e:
        report.warnings.append(f"no SONC certificate: {e}")
        return
    report.certificate = certificate.to_dict()
    report.verification = verify_certificate(certificate).to_dict()
    report.warnings.extend(certificate.warnings)


def _fallback(f, h, faces_J, options: CheckOptions, report: Report, watch: _Stopwatch) -> None:
    """Multistart Newton on the face systems of J.

    Only a certified zero with t < 1 is conclusive: it makes some face
    truncation, hence f, negative somewhere.
    """
    report.method = "fallback"
    if options.sonc:
        report.warnings.append(UNSUPPORTED_SEPARABLE)
    candidates = fallback_multistart(
        f,
        h,
        faces_J,
        options.tracker,
        n_starts=options.n_starts,
        seed=options.seed,
        cluster_tol=options.cluster_tol,
        n_jobs=options.jobs,
    )
    watch.lap("tracking")
    report.track = {
        "candidates": [
            {"face": list(c.face.point_indices), "t": c.t, "residual": c.residual, "hits": c.hits}
            for c in candidates
        ]
    }
    below = [c for c in candidates if c.t < 1.0]

    if not options.certify:
        if below:
            report.t_star = below[0].t
            report.verdict = uncertified_verdict(
                below[0].t, {"face": list(below[0].face.point_indices)}
            )
        else:
            report.verdict = verdict_from_interval(None, {"reason": "no candidate with t < 1"})
        report.warnings.append(f"{NON_EXHAUSTIVE}: separable support, multistart search only")
        return

    for candidate in below:
        certified = krawczyk_certify(candidate.homotopy, candidate.tau_y, config=options.krawczyk)
        if certified.unique and certified.t_interval.hi < 1.0:
            report.t_star = candidate.t
            report.verdict = verdict_from_interval(
                certified.t_interval,
                {
                    "face": list(candidate.face.point_indices),
                    "krawczyk_attempts": certified.attempts,
                },
            )
            watch.lap("certification")
            return
    watch.lap("certification")

    if candidates:
        report.t_star = candidates[0].t
    report.verdict = verdict_from_interval(
        None, {"reason": "no certified solution with t < 1 on any face system"}
    )
    report.warnings.append(
        f"{NON_EXHAUSTIVE}: separable support, multistart search found no certified t < 1"
    )


def describe_support(f: Signomial, dev_oracles: bool = False) -> Dict[str, Any]:
    """Classification data for ``copositivity support``."""
    support = f.support
    points = support.points
    info: Dict[str, Any] = {
        "n": f.n,
        "a_plus": [list(p) for p in support.a_plus],
        "a_minus": [list(p) for p in support.a_minus],
        "hull_vertices": [list(points[k]) for k in hull_vertices(points)],
    }
    outcome = sign_precheck(f)
    if outcome == PrecheckOutcome.TRIVIALLY_COPOSITIVE:
        info.update(classification="trivial+", message="trivially copositive support")
        return info
    if outcome == PrecheckOutcome.TRIVIALLY_NEGATIVE:
        info.update(classification="trivial-", message="a negative term is a hull vertex")
        return info

    gamma = smallest_face_containing(support, support.a_minus)
    faces_J = truncation_face_set_J(gamma, support)
    info["gamma"] = {"points": [list(points[k]) for k in gamma.point_indices], "dim": gamma.dim}
    info["J"] = [[list(points[k]) for k in face.point_indices] for face in faces_J]

    truncated = truncate(f, gamma).support
    result = classify_support(truncated)
    info["classification"] = "nonseparable" if result.nonseparable else "separable"
    info["nonseparable"] = result.nonseparable
    info["reason"] = result.reason
    if result.nonseparable:
        family = simplices_containing_cell(truncated, result.witness)
        info["witness"] = [str(v) for v in result.witness.point]
        info["lambda_size"] = len(family.simplices)
        info["simplices"] = [[list(truncated.a_plus[i]) for i in s] for s in family.simplices]
    elif result.hyperplane is not None:
        info["hyperplane"] = result.hyperplane.to_dict()

    if dev_oracles:
        info["oracles"] = _run_oracles(f, truncated)
    return info


def _run_oracles(f: Signomial, truncated) -> Dict[str, Any]:
    oracles: Dict[str, Any] = {}
    try:
        _, reduced = reduce_to_full_dim(truncated)
        oracles["brute_force_nonseparable"] = brute_force_nonseparable(reduced)
    except InputError as e:
        oracles["brute_force_nonseparable"] = f"skipped: {e}"
    minimum = grid_min(f, samples=20_000)
    oracles["grid_min"] = {
        "value": minimum.value,
        "point": [float(v) for v in np.atleast_1d(minimum.point)],
    }
    return oracles


def verdict_counts(reports: List[Report]) -> Dict[str, int]:
    """How many reports ended in each verdict, errors counted under "Error"."""
    counts: Dict[str, int] = {}
    for report in reports:
        key = report.verdict.kind.value if report.verdict else "Error"
        counts[key] = counts.get(key, 0) + 1
    return counts


def support_is_separable(f: Signomial) -> bool:
    """Whether the truncation of f to the smallest face containing A- is separable."""
    if sign_precheck(f) != PrecheckOutcome.NEEDS_CRITERION:
        return False
    gamma = smallest_face_containing(f.support, f.support.a_minus)
    return not classify_support(truncate(f, gamma).support).nonseparable
