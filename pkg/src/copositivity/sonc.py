"""Sums of nonnegative circuits.

A circuit polynomial is sum_i c_i x^{a_i} - d x^b with affinely independent
a_i and b in their convex hull. It is copositive iff d is at most the circuit
number prod_i (c_i / lambda_i)^{lambda_i}, lambda being the barycentric
coordinates of b. For a nonseparable signed support the tracked singular point
at t* splits f into such circuits, one per (simplex, negative point) pair.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import rational_lp
from .certification import (
    KrawczykConfig,
    Verdict,
    VerdictKind,
    certify_endpoint,
    uncertified_verdict,
)
from .errors import ContractViolation, InputError, InternalError, NotCopositiveError
from .lattice import (
    Point,
    RationalPoint,
    SignedSupport,
    SimplexFamily,
    affine_dim,
    barycentric_coordinates,
    find_cell_witness,
    simplices_containing_cell,
)
from .signomial import (
    HeightFunction,
    PrecheckOutcome,
    Signomial,
    critical_residual,
    sign_precheck,
)
from .tracker import (
    NonseparableProblem,
    TrackerConfig,
    TrackResult,
    prepare_nonseparable,
    track_single_path,
)

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

NEAR_BOUNDARY = "NEAR-BOUNDARY"


@dataclass(frozen=True)
class CircuitPolynomial:
    """sum of ``positive`` terms minus the optional ``negative`` term (b, d), d > 0."""

    positive: Tuple[Tuple[Point, Number], ...]
    negative: Optional[Tuple[Point, Number]] = None

    def __post_init__(self):
        positive = tuple((tuple(int(v) for v in e), c) for e, c in self.positive)
        object.__setattr__(self, "positive", positive)
        if not positive:
            raise InputError("a circuit needs at least one positive term")
        if any(not c > 0 for _, c in positive):
            raise InputError("positive circuit coefficients must be strictly positive")
        points = [e for e, _ in positive]
        if len(set(points)) != len(points):
            raise InputError("duplicate exponent in circuit")
        if affine_dim(points) != len(points) - 1:
            raise InputError("positive circuit exponents must be affinely independent")
        if self.negative is not None:
            b, d = self.negative
            b = tuple(int(v) for v in b)
            if not d > 0:
                raise InputError("the negative circuit coefficient is given as d > 0")
            if b in points:
                raise InputError(f"exponent {b} carries both signs")
            object.__setattr__(self, "negative", (b, d))

    @classmethod
    def from_signomial(cls, f: Signomial) -> "CircuitPolynomial":
        if len(f.support.a_minus) > 1:
            raise InputError("a circuit has at most one negative term")
        coeffs = f.exact or f.coeffs
        n_plus = len(f.support.a_plus)
        positive = tuple(zip(f.support.a_plus, coeffs[:n_plus]))
        negative = (f.support.a_minus[0], -coeffs[n_plus]) if f.support.a_minus else None
        return cls(positive, negative)

    @property
    def n(self) -> int:
        return len(self.positive[0][0])

    def terms(self) -> Dict[Point, Number]:
        terms: Dict[Point, Number] = dict(self.positive)
        if self.negative is not None:
            b, d = self.negative
            terms[b] = -d
        return terms

    def barycentric(self) -> RationalPoint:
        """Convex weights of the negative exponent over the positive ones."""
        if self.negative is None:
            raise InputError("circuit has no negative term")
        lam = barycentric_coordinates([e for e, _ in self.positive], self.negative[0])
        if min(lam) < 0:
            raise InputError(f"{self.negative[0]} is outside the convex hull of the positive terms")
        return lam

    def to_signomial(self) -> Signomial:
        return Signomial.from_terms(self.terms(), self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "plus": [{"e": list(e), "c": float(c)} for e, c in self.positive],
            "minus": (
                None
                if self.negative is None
                else {"e": list(self.negative[0]), "c": float(self.negative[1])}
            ),
        }


def _log_theta(coeffs: Sequence[Number], lam: Sequence[Fraction]) -> float:
    return math.fsum(
        float(l) * (math.log(float(c)) - math.log(l)) for c, l in zip(coeffs, lam) if l > 0
    )


def _theta(coeffs: Sequence[Number], lam: Sequence[Fraction]) -> float:
    return math.exp(_log_theta(coeffs, lam))


def log_circuit_number(circuit: CircuitPolynomial) -> float:
    """log Theta, finite even where Theta itself overflows.

    Raises:
        InputError: If there is no negative term or it lies on the boundary
    """
    lam = circuit.barycentric()
    if any(v == 0 for v in lam):
        raise InputError("negative exponent lies on the boundary; use the circuit of its face")
    return _log_theta([c for _, c in circuit.positive], lam)


def circuit_number(circuit: CircuitPolynomial) -> float:
    """prod_i (c_i / lambda_i)^{lambda_i}, summed in log space.

    Raises:
        InputError: If there is no negative term or it lies on the boundary
    """
    return math.exp(log_circuit_number(circuit))


def circuit_margin(circuit: CircuitPolynomial) -> Optional[float]:
    """Theta - d on the face of the positive simplex containing b in its interior."""
    if circuit.negative is None:
        return None
    theta = _theta([c for _, c in circuit.positive], circuit.barycentric())
    return theta - float(circuit.negative[1])


def is_circuit_copositive(circuit: CircuitPolynomial, rel_tol: float = 1e-12) -> bool:
    if circuit.negative is None:
        return True
    theta = _theta([c for _, c in circuit.positive], circuit.barycentric())
    return float(circuit.negative[1]) <= theta * (1.0 + rel_tol)


def _times(c: Number, lam: Fraction) -> Number:
    return c * lam if isinstance(c, Fraction) else float(c) * float(lam)


def extended_circuit_decomposition(f: Signomial, tol: float = 1e-8) -> List[CircuitPolynomial]:
    """Split f, singular at the all-ones point, into one circuit per negative term.

    Each circuit is c_b (sum_a lambda_a^b x^a - x^b) restricted to the a with
    lambda_a^b > 0, so every one of them is singular at the all-ones point too.

    Raises:
        InputError: If A+ is not affinely independent or 1 is not singular
    """
    plus = f.support.a_plus
    if affine_dim(plus) != len(plus) - 1:
        raise InputError("positive exponents are not affinely independent")
    residual = critical_residual(f, np.ones(f.n))
    if residual > tol:
        raise InputError(f"the all-ones point is not a singular zero (residual {residual:.2e})")
    coeffs = f.exact or f.coeffs
    n_plus = len(plus)
    circuits = []
    for k, b in enumerate(f.support.a_minus):
        c_b = -coeffs[n_plus + k]
        lam = barycentric_coordinates(plus, b)
        if min(lam) < 0:
            raise InputError(f"{b} is outside the convex hull of the positive exponents")
        positive = tuple((a, _times(c_b, l)) for a, l in zip(plus, lam) if l > 0)
        circuits.append(CircuitPolynomial(positive, (b, c_b)))
    return circuits


@dataclass(frozen=True)
class DeltaSolution:
    """Nonnegative weights on the simplices of a family, summing to one."""

    delta: Tuple[Fraction, ...]
    simplices: Tuple[Tuple[int, ...], ...]

    @property
    def support_J(self) -> Tuple[int, ...]:
        return tuple(j for j, v in enumerate(self.delta) if v > 0)


def solve_delta(family: SimplexFamily, support: SignedSupport, c: Sequence) -> DeltaSolution:
    """Exact weights delta >= 0 with c_a = sum_j delta_j sum_b c_b lambda_{a,j}^b and sum delta = 1.

    ``c`` holds the positive coefficient magnitudes in ``support.points`` order
    and must make the all-ones point singular exactly.

    Raises:
        InternalError: If the system is infeasible
    """
    c = [Fraction(v) for v in c]
    if len(c) != len(support.points):
        raise InputError("coefficient count does not match the support")
    n_plus = len(support.a_plus)
    minus = list(zip(support.a_minus, c[n_plus:]))

    columns = []
    for simplex in family.simplices:
        vertices = [support.a_plus[i] for i in simplex]
        column = [Fraction(0)] * n_plus
        for b, c_b in minus:
            lam = barycentric_coordinates(vertices, b)
            if min(lam) < 0:
                raise InternalError(
                    "simplex of the family misses a negative exponent",
                    {"simplex": list(simplex), "b": list(b)},
                )
            for i, l in zip(simplex, lam):
                column[i] += c_b * l
        columns.append(column)

    a_eq = [[col[a] for col in columns] for a in range(n_plus)] + [[1] * len(columns)]
    b_eq = c[:n_plus] + [Fraction(1)]
    delta = rational_lp.find_nonnegative_solution(a_eq, b_eq)
    if delta is None:
        raise InternalError(
            "the simplex weight system is infeasible",
            {
                "a_plus": [list(p) for p in support.a_plus],
                "a_minus": [list(p) for p in support.a_minus],
                "c": [str(v) for v in c],
                "simplices": [list(s) for s in family.simplices],
            },
        )
    logger.debug("delta = %s", [str(v) for v in delta])
    return DeltaSolution(tuple(delta), family.simplices)


@dataclass
class SoncCertificate:
    """Circuits summing to ``target``; margins are Theta - d per circuit (None for monomials)."""

    circuits: List[CircuitPolynomial]
    target: Signomial
    residual: float
    per_circuit_margin: List[Optional[float]]
    warnings: List[str] = field(default_factory=list)
    t_star: Optional[float] = None
    delta: Optional[DeltaSolution] = None
    singular_circuits: List[CircuitPolynomial] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": str(self.target),
            "circuits": [c.to_dict() for c in self.circuits],
            "residual": self.residual,
            "margins": self.per_circuit_margin,
            "warnings": list(self.warnings),
            "t_star": self.t_star,
        }


@dataclass
class VerificationReport:
    passed: bool
    residual: float
    mismatches: List[Dict[str, Any]] = field(default_factory=list)
    failing_circuits: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": "PASS" if self.passed else "FAIL",
            "residual": self.residual,
            "mismatches": self.mismatches,
            "failing_circuits": self.failing_circuits,
        }


def _coefficient_sums(circuits: Sequence[CircuitPolynomial]) -> Dict[Point, float]:
    parts: Dict[Point, List[float]] = defaultdict(list)
    for circuit in circuits:
        for e, c in circuit.terms().items():
            parts[e].append(float(c))
    return {e: math.fsum(values) for e, values in parts.items()}


def _residual(circuits: Sequence[CircuitPolynomial], target: Signomial) -> float:
    sums = _coefficient_sums(circuits)
    expected = target.terms()
    diffs = [abs(sums.get(e, 0.0) - expected.get(e, 0.0)) for e in set(sums) | set(expected)]
    return max(diffs, default=0.0)


def verify_certificate(
    cert: SoncCertificate, tol: float = 1e-8, rel_tol: float = 1e-10
) -> VerificationReport:
    """Recheck a certificate from its circuits alone.

    Coefficients must match the target within tol * max(1, |c|) and every
    circuit must satisfy d <= Theta * (1 + rel_tol).
    """
    sums = _coefficient_sums(cert.circuits)
    expected = cert.target.terms()
    mismatches = []
    residual = 0.0
    for e in sorted(set(sums) | set(expected)):
        got, want = sums.get(e, 0.0), expected.get(e, 0.0)
        diff = abs(got - want)
        residual = max(residual, diff)
        if diff > tol * max(1.0, abs(want)):
            mismatches.append({"e": list(e), "expected": want, "got": got})

    failing = []
    for i, circuit in enumerate(cert.circuits):
        try:
            ok = is_circuit_copositive(circuit, rel_tol)
        except InputError:
            ok = False
        if not ok:
            failing.append(i)

    passed = not mismatches and not failing
    if not passed:
        logger.warning(
            "certificate verification failed: %d mismatches, %d bad circuits",
            len(mismatches),
            len(failing),
        )
    return VerificationReport(passed, residual, mismatches, failing)


def rationalize(value: float, tol: float = 1e-12) -> Fraction:
    """Continued-fraction approximation within relative tolerance ``tol``."""
    target = Fraction(value)
    bound = abs(target) * Fraction(tol)
    max_den = 1000
    while True:
        approx = target.limit_denominator(max_den)
        if abs(approx - target) <= bound:
            return approx
        max_den *= 10


def _project_to_singular(
    support: SignedSupport, c_plus: Sequence[Fraction], c_minus: Sequence[Fraction]
) -> List[Fraction]:
    """Least-change a_plus coefficients making the all-ones point singular exactly."""
    d = support.ambient_dim
    plus, minus = support.a_plus, support.a_minus
    rows = [[Fraction(1)] * len(plus)] + [[Fraction(a[i]) for a in plus] for i in range(d)]
    target = [sum(c_minus, Fraction(0))] + [
        sum((c * b[i] for b, c in zip(minus, c_minus)), Fraction(0)) for i in range(d)
    ]
    gap = [t - v for t, v in zip(target, rational_lp.mat_vec(rows, c_plus))]
    gram = [[sum(x * y for x, y in zip(r1, r2)) for r2 in rows] for r1 in rows]
    weights = rational_lp.solve_linear(gram, gap)
    if weights is None:
        raise InternalError("positive exponents do not span the reduced lattice")
    correction = rational_lp.mat_vec(rational_lp.transpose(rows), weights)
    return [c + w for c, w in zip(c_plus, correction)]


def _monomial_circuits(f: Signomial, keep: Sequence[Point]) -> List[CircuitPolynomial]:
    coeffs = f.exact or f.coeffs
    skip = set(keep)
    return [
        CircuitPolynomial(((a, coeffs[k]),))
        for k, a in enumerate(f.support.a_plus)
        if a not in skip
    ]


def certificate_from_track(
    f: Signomial, problem: NonseparableProblem, track: TrackResult, verdict: Verdict
) -> SoncCertificate:
    """Build the circuits of f from the singular point tracked at t*.

    The reduced face signomial is rescaled so that the all-ones point is its
    singular zero at t*, rationalized, split by the simplex weights, and the
    circuits are mapped back with t set to 1. Positive terms off the face
    become monomial circuits.

    Raises:
        NotCopositiveError: If the verdict says f takes negative values
    """
    if verdict.kind == VerdictKind.NOT_COPOSITIVE:
        raise NotCopositiveError(f"t* = {track.t_star:.15g} < 1: the input is not copositive")
    warnings = []
    if verdict.kind == VerdictKind.INCONCLUSIVE:
        warnings.append(f"{NEAR_BOUNDARY}: t* = {track.t_star:.15g} could not be separated from 1")
    elif not verdict.certified:
        warnings.append("UNCERTIFIED: t* was not enclosed by interval arithmetic")

    reduced = problem.reduced
    support = reduced.support
    n_plus = len(support.a_plus)
    tau, y = float(track.tau_y[0]), np.asarray(track.tau_y[1:], dtype=float)
    exponents = np.array(support.points, dtype=float).reshape(len(support.points), -1)
    monomial_logs = exponents @ y
    scaled = np.exp(
        np.log(reduced.abs_coeffs) + monomial_logs + problem.heights.vector(support) * tau
    )

    c_minus = [rationalize(v) for v in scaled[n_plus:]]
    c_plus = _project_to_singular(support, [rationalize(v) for v in scaled[:n_plus]], c_minus)
    if min(c_plus) <= 0:
        raise InternalError(
            "rescaled positive coefficients lost their sign",
            {"f": str(f), "t_star": track.t_star, "c_plus": [str(v) for v in c_plus]},
        )

    family = simplices_containing_cell(support, find_cell_witness(support))
    delta = solve_delta(family, support, c_plus + c_minus)

    ambient = problem.truncated.support.points
    coeffs = problem.truncated.exact or problem.truncated.coeffs
    final: Dict[Tuple[Tuple[int, ...], int], List[Number]] = {}
    singular: Dict[Tuple[Tuple[int, ...], int], List[Fraction]] = {}
    for j in delta.support_J:
        simplex = family.simplices[j]
        vertices = [support.a_plus[i] for i in simplex]
        for kb, b in enumerate(support.a_minus):
            lam = barycentric_coordinates(vertices, b)
            used = tuple(i for i, l in zip(simplex, lam) if l > 0)
            weights = [l for l in lam if l > 0]
            scale = delta.delta[j] * c_minus[kb]
            rescaled = [scale * l for l in weights] + [scale]
            c_b = -coeffs[n_plus + kb]
            original = [
                float(v) * math.exp(-monomial_logs[i]) for i, v in zip(used, rescaled)
            ] + [_times(c_b, delta.delta[j])]
            key = (used, kb)
            if key in final:
                final[key] = [p + q for p, q in zip(final[key], original)]
                singular[key] = [p + q for p, q in zip(singular[key], rescaled)]
            else:
                final[key], singular[key] = original, rescaled

    def build(key, values) -> CircuitPolynomial:
        used, kb = key
        positive = tuple((ambient[i], v) for i, v in zip(used, values))
        return CircuitPolynomial(positive, (ambient[n_plus + kb], values[-1]))

    circuits = [build(key, values) for key, values in final.items()]
    circuits += _monomial_circuits(f, problem.truncated.support.a_plus)
    margins = [circuit_margin(c) for c in circuits]
    residual = _residual(circuits, f)
    if any(m is not None and m < 0 for m in margins) and verdict.kind != VerdictKind.INCONCLUSIVE:
        warnings.append(f"{NEAR_BOUNDARY}: some circuit margins are negative")

    logger.info("SONC certificate with %d circuits, residual %.2e", len(circuits), residual)
    return SoncCertificate(
        circuits,
        f,
        residual,
        margins,
        warnings,
        track.t_star,
        delta,
        [build(key, values) for key, values in singular.items()],
    )


def sonc_certificate(
    f: Signomial,
    h: Optional[HeightFunction] = None,
    tracker_config: Optional[TrackerConfig] = None,
    krawczyk_config: Optional[KrawczykConfig] = None,
    certify: bool = True,
    assume_nonseparable: bool = False,
) -> SoncCertificate:
    """SONC certificate of a copositive signomial with nonseparable signed support.

    Signomials without negative terms get one monomial circuit per term.

    Raises:
        NotCopositiveError: If f is certified (or, without certification, computed)
            negative somewhere
        ContractViolation: If the support is separable or the path could not be tracked
    """
    outcome = sign_precheck(f)
    if outcome == PrecheckOutcome.TRIVIALLY_NEGATIVE:
        raise NotCopositiveError("a negative term sits at a vertex of the Newton polytope")
    if outcome == PrecheckOutcome.TRIVIALLY_COPOSITIVE:
        circuits = _monomial_circuits(f, ())
        return SoncCertificate(circuits, f, _residual(circuits, f), [None] * len(circuits))

    h = h or HeightFunction.uniform(f.support)
    problem = prepare_nonseparable(f, h, assume_nonseparable)
    track = track_single_path(problem.homotopy, tracker_config)
    if not track.converged:
        reason = track.failure_reason.value if track.failure_reason else "residual too large"
        raise ContractViolation(
            f"path tracking did not converge: {reason}",
            hint="try a larger --max-steps or a different --h",
        )
    if certify:
        _, verdict = certify_endpoint(problem.homotopy, track.tau_y, krawczyk_config)
    else:
        verdict = uncertified_verdict(track.t_star)
    return certificate_from_track(f, problem, track, verdict)
