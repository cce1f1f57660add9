"""Single-path predictor-corrector tracking and the multistart fallback."""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.cluster import DBSCAN

from .errors import ContractViolation, InputError, InternalError
from .homotopy import HomotopyOverflow, ParameterHomotopy
from .lattice import (
    AffineLatticeMap,
    Face,
    is_nonseparable,
    minus_in_interior,
    reduce_to_full_dim,
    smallest_face_containing,
)
from .signomial import (
    HeightFunction,
    PrecheckOutcome,
    Signomial,
    sign_precheck,
    substitute_support,
    truncate,
)

logger = logging.getLogger(__name__)


class FailureReason(str, Enum):
    STEP_UNDERFLOW = "StepUnderflow"
    SINGULAR_JACOBIAN = "SingularJacobian"
    OVERFLOW = "Overflow"
    MAX_STEPS = "MaxSteps"


@dataclass
class TrackerConfig:
    """Step-size control and Newton settings for the path tracker."""

    initial_step: float = 0.05
    min_step: float = 1e-10
    max_step: float = 0.2
    newton_tol: float = 1e-12
    newton_max_iters: int = 8
    max_steps: int = 10000
    step_expand: float = 1.5
    step_shrink: float = 0.5
    polish_tol: float = 1e-13
    polish_max_iters: int = 10

    def validate(self) -> None:
        if not 0 < self.min_step <= self.initial_step <= self.max_step:
            raise InputError("tracker steps must satisfy 0 < min_step <= initial_step <= max_step")
        if self.newton_tol <= 0 or self.polish_tol <= 0:
            raise InputError("tracker tolerances must be positive")
        if self.newton_max_iters < 1 or self.max_steps < 1:
            raise InputError("tracker iteration limits must be positive")
        if not (self.step_expand > 1 and 0 < self.step_shrink < 1):
            raise InputError("step_expand must exceed 1 and step_shrink must lie in (0, 1)")


@dataclass
class TrackResult:
    """Endpoint of the tracked path with statistics.

    ``tau_y`` is in the coordinates of the system that was tracked (after
    lattice reduction); ``x_star`` is in the variables of the input signomial.
    """

    t_star: float
    x_star: np.ndarray
    tau_y: np.ndarray
    converged: bool
    steps_taken: int = 0
    newton_iters_total: int = 0
    failure_reason: Optional[FailureReason] = None
    residual: float = float("nan")
    rejected_steps: int = 0
    last_correction: float = 0.0
    jacobian_det: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "x_star": [float(v) for v in self.x_star],
            "converged": bool(self.converged),
            "steps_taken": self.steps_taken,
            "newton_iters_total": self.newton_iters_total,
            "rejected_steps": self.rejected_steps,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
            "residual": self.residual,
            "jacobian_det": self.jacobian_det,
        }


def _solve(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Partial-pivot LU solve; a non-finite result counts as singular."""
    delta = np.linalg.solve(jac, rhs)
    if not np.all(np.isfinite(delta)):
        raise np.linalg.LinAlgError("non-finite Newton update")
    return delta


def _correct(
    ph: ParameterHomotopy, s: float, z: np.ndarray, cfg: TrackerConfig
) -> Tuple[bool, np.ndarray, int, float]:
    """Newton at fixed s.

    Accepts only when the scaled residual drops below newton_tol within
    newton_max_iters, decreases at every iteration and contracts by at least a
    half on the first one.

    Returns:
        Tuple of (accepted, corrected point, iterations, last update norm)
    """
    residual = ph.scaled_residual(s, z)
    last_update = 0.0
    for iteration in range(1, cfg.newton_max_iters + 1):
        if residual <= cfg.newton_tol:
            return True, z, iteration - 1, last_update
        delta = _solve(ph.jacobian(s, z), -ph.evaluate(s, z))
        z = z + delta
        last_update = float(np.max(np.abs(delta)))
        new_residual = ph.scaled_residual(s, z)
        if new_residual > cfg.newton_tol:
            if new_residual >= residual or (iteration == 1 and new_residual > 0.5 * residual):
                return False, z, iteration, last_update
        residual = new_residual
    return residual <= cfg.newton_tol, z, cfg.newton_max_iters, last_update


def _polish(
    ph: ParameterHomotopy, z: np.ndarray, cfg: TrackerConfig
) -> Tuple[np.ndarray, float, int]:
    """Newton at s = 1 until polish_tol or until the residual stops improving."""
    best, best_residual = z, ph.scaled_residual(1.0, z)
    iterations = 0
    for _ in range(cfg.polish_max_iters):
        if best_residual <= cfg.polish_tol:
            break
        try:
            candidate = best + _solve(ph.jacobian(1.0, best), -ph.evaluate(1.0, best))
            candidate_residual = ph.scaled_residual(1.0, candidate)
        except (np.linalg.LinAlgError, HomotopyOverflow):
            break
        iterations += 1
        if candidate_residual >= best_residual:
            break
        best, best_residual = candidate, candidate_residual
    return best, best_residual, iterations


def _check_dtau_sign(ph: ParameterHomotopy, s: float, z: np.ndarray) -> None:
    value = ph.dtau_first_row(s, z)
    if not value < 0:
        raise InternalError(
            "dH/dtau is not negative on the path", {"s": s, "z": z.tolist(), "dH0/dtau": value}
        )


def track_single_path(
    ph: ParameterHomotopy, cfg: Optional[TrackerConfig] = None, trace_path: Optional[Path] = None
) -> TrackResult:
    """Track the unique positive path of H from (tau, y) = 0 at s = 0 to s = 1.

    Euler predictor dz/ds = -J^{-1} dH/ds, Newton corrector at fixed s,
    adaptive step size, final Newton polish at s = 1. Numerical trouble is
    reported through ``failure_reason``, never raised.
    """
    cfg = cfg or TrackerConfig()
    cfg.validate()
    debug_checks = logger.isEnabledFor(logging.DEBUG)

    z = np.zeros(ph.dim)
    s = 0.0
    step = cfg.initial_step
    easy = 0
    steps = rejected = iters_total = 0
    last_update = 0.0
    failure: Optional[FailureReason] = None
    last_error: Optional[FailureReason] = None
    trace_rows: List[list] = []

    while s < 1.0:
        if steps >= cfg.max_steps:
            failure = FailureReason.MAX_STEPS
            break
        ds = min(step, 1.0 - s)
        try:
            tangent = -_solve(ph.jacobian(s, z), ph.ds(s, z))
        except np.linalg.LinAlgError:
            failure = FailureReason.SINGULAR_JACOBIAN
            break
        except HomotopyOverflow:
            failure = FailureReason.OVERFLOW
            break

        try:
            accepted, z_new, iters, update = _correct(ph, s + ds, z + ds * tangent, cfg)
            last_error = None
        except np.linalg.LinAlgError:
            accepted, iters, update = False, 0, 0.0
            last_error = FailureReason.SINGULAR_JACOBIAN
        except HomotopyOverflow:
            accepted, iters, update = False, 0, 0.0
            last_error = FailureReason.OVERFLOW
        iters_total += iters

        if accepted:
            s = 1.0 if ds >= 1.0 - s else s + ds
            z = z_new
            steps += 1
            last_update = update
            if debug_checks:
                _check_dtau_sign(ph, s, z)
                logger.debug("s=%.6f tau=%.12g step=%.3g newton=%d", s, z[0], ds, iters)
            if trace_path is not None:
                trace_rows.append([s, *z.tolist(), ds, iters])
            easy += 1
            if easy >= 2:
                step = min(step * cfg.step_expand, cfg.max_step)
                easy = 0
        else:
            rejected += 1
            easy = 0
            step *= cfg.step_shrink
            if step < cfg.min_step:
                failure = last_error or FailureReason.STEP_UNDERFLOW
                break

    if trace_path is not None:
        write_trace(trace_path, trace_rows, ph.dim - 1)

    residual = float("nan")
    converged = False
    if failure is None:
        z, residual, polish_iters = _polish(ph, z, cfg)
        iters_total += polish_iters
        converged = residual <= cfg.newton_tol
    else:
        logger.warning("path tracking stopped at s=%.6g: %s", s, failure.value)

    result = TrackResult(
        t_star=float(np.exp(z[0])),
        x_star=np.exp(z[1:]),
        tau_y=z.copy(),
        converged=converged,
        steps_taken=steps,
        newton_iters_total=iters_total,
        failure_reason=failure,
        residual=residual,
        rejected_steps=rejected,
        last_correction=last_update,
    )
    logger.info(
        "tracked %d steps (%d rejected), t*=%.15g, residual=%.2e",
        steps,
        rejected,
        result.t_star,
        residual,
    )
    return result


def write_trace(path: Path, rows: Sequence[Sequence[float]], n: int) -> None:
    """Dump accepted path points as CSV: s, tau, y1..yn, step, newton_iters."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["s", "tau"] + [f"y{i + 1}" for i in range(n)] + ["step", "newton_iters"])
        writer.writerows(rows)


@dataclass(eq=False)
class NonseparableProblem:
    """The reduced single-path problem behind a signomial with A- inside one face."""

    face: Face
    truncated: Signomial
    lattice_map: AffineLatticeMap
    reduced: Signomial
    heights: HeightFunction
    homotopy: ParameterHomotopy

    def ambient_x(self, y: np.ndarray) -> np.ndarray:
        """Positive point of the input variables matching reduced log-coordinates y."""
        basis = np.array(self.lattice_map.basis, dtype=float)
        basis = basis.reshape(self.lattice_map.source_dim, -1)
        if basis.shape[1] == 0:
            return np.ones(basis.shape[0])
        return np.exp(basis @ np.linalg.solve(basis.T @ basis, y))


def prepare_nonseparable(
    f: Signomial, h: HeightFunction, assume_nonseparable: bool = False
) -> NonseparableProblem:
    """Truncate to the smallest face containing A-, reduce to full dimension, build H.

    Raises:
        ContractViolation: If the precheck is decisive or the support is separable
    """
    outcome = sign_precheck(f)
    if outcome != PrecheckOutcome.NEEDS_CRITERION:
        raise ContractViolation(f"sign precheck already decides this input: {outcome.value}")
    gamma = smallest_face_containing(f.support, f.support.a_minus)
    truncated = truncate(f, gamma)
    psi, reduced_support = reduce_to_full_dim(truncated.support)
    if assume_nonseparable:
        if not minus_in_interior(reduced_support):
            raise ContractViolation(
                "negative terms are not interior to the positive hull",
                hint="drop --nonseparable to use the multistart fallback",
            )
    else:
        nonseparable, _ = is_nonseparable(reduced_support)
        if not nonseparable:
            raise ContractViolation(
                "signed support is separable", hint="use the multistart fallback"
            )
    reduced = substitute_support(truncated, reduced_support)
    heights = HeightFunction({p: h.of(p) for p in truncated.support.points}).transported(
        truncated.support, reduced_support
    )
    homotopy = ParameterHomotopy.build(reduced, heights)
    return NonseparableProblem(gamma, truncated, psi, reduced, heights, homotopy)


def solve_tstar_nonseparable(
    f: Signomial,
    h: HeightFunction,
    cfg: Optional[TrackerConfig] = None,
    assume_nonseparable: bool = False,
    trace_path: Optional[Path] = None,
) -> TrackResult:
    """t* of the lifted path for a nonseparable signed support, by a single path."""
    problem = prepare_nonseparable(f, h, assume_nonseparable)
    result = track_single_path(problem.homotopy, cfg, trace_path)
    result.x_star = problem.ambient_x(result.tau_y[1:])
    return result


@dataclass
class FallbackCandidate:
    """A positive zero of one face system; t is only a candidate for t*."""

    face: Face
    t: float
    tau_y: np.ndarray
    residual: float
    hits: int
    homotopy: ParameterHomotopy = field(repr=False)


def _newton_from(ph: ParameterHomotopy, z0: np.ndarray, tol: float, max_iters: int = 50):
    z = z0
    try:
        residual = ph.scaled_residual(1.0, z)
        for _ in range(max_iters):
            if residual <= tol:
                return z, residual
            delta = _solve(ph.jacobian(1.0, z), -ph.evaluate(1.0, z))
            damping = 1.0
            while damping > 1e-4:
                trial = z + damping * delta
                try:
                    trial_residual = ph.scaled_residual(1.0, trial)
                except HomotopyOverflow:
                    trial_residual = np.inf
                if trial_residual < residual:
                    break
                damping *= 0.5
            else:
                return None
            z, residual = trial, trial_residual
    except (np.linalg.LinAlgError, HomotopyOverflow):
        return None
    return (z, residual) if residual <= tol else None


def fallback_multistart(
    f: Signomial,
    h: HeightFunction,
    faces_J: Sequence[Face],
    cfg: Optional[TrackerConfig] = None,
    n_starts: int = 200,
    seed: int = 0,
    cluster_tol: float = 1e-6,
    n_jobs: int = 1,
) -> List[FallbackCandidate]:
    """Damped Newton from random log-space starts on every face system in J.

    The search is NOT exhaustive: an empty list or a missing solution says
    nothing about copositivity.
    """
    cfg = cfg or TrackerConfig()
    tol = max(cfg.newton_tol, 1e-10)
    candidates: List[FallbackCandidate] = []
    seeds = np.random.SeedSequence(seed).spawn(len(faces_J))
    for face, face_seed in zip(faces_J, seeds):
        truncated = truncate(f, face)
        if not truncated.support.a_plus:
            continue
        _, reduced_support = reduce_to_full_dim(truncated.support)
        reduced = substitute_support(truncated, reduced_support)
        heights = HeightFunction({p: h.of(p) for p in truncated.support.points}).transported(
            truncated.support, reduced_support
        )
        ph = ParameterHomotopy.target_only(reduced, heights)
        starts = np.random.default_rng(face_seed).standard_normal((n_starts, ph.dim))
        found = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_newton_from)(ph, z0, tol) for z0 in starts
        )
        found = [r for r in found if r is not None]
        if not found:
            logger.info(
                "face %s: no positive solution from %d starts", face.point_indices, n_starts
            )
            continue
        points = np.array([z for z, _ in found])
        labels = DBSCAN(eps=cluster_tol, min_samples=1).fit(points).labels_
        for label in sorted(set(labels)):
            members = [i for i, lab in enumerate(labels) if lab == label]
            best = min(members, key=lambda i: found[i][1])
            z, residual = found[best]
            candidates.append(
                FallbackCandidate(face, float(np.exp(z[0])), z, residual, len(members), ph)
            )
        logger.info(
            "face %s: %d distinct solutions from %d converged starts",
            face.point_indices,
            len(set(labels)),
            len(found),
        )
    candidates.sort(key=lambda c: c.t)
    return candidates
