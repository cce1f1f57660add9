"""Independent oracles for cross-checking the decision pipeline.

Nothing in here is used to reach a verdict. The closed forms cover the square
support and single circuits, grid_min searches for negative values directly,
and brute_force_nonseparable enumerates triangulations.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, NamedTuple, Sequence, Tuple

import numpy as np

from . import rational_lp
from .errors import InputError
from .lattice import (
    Point,
    SignedSupport,
    barycentric_coordinates,
    enumerate_faces,
    reduce_to_full_dim,
)
from .signomial import Signomial, evaluate
from .sonc import CircuitPolynomial, circuit_number, log_circuit_number

logger = logging.getLogger(__name__)

SQUARE_PLUS = ((0, 0), (0, 2), (2, 0), (2, 2))
SQUARE_MINUS = ((1, 1),)

BRUTE_FORCE_MAX_DIM = 3
BRUTE_FORCE_MAX_POINTS = 8


@dataclass(frozen=True)
class SquareSupportCoeffs:
    """c0 + c1 x1^2 + c2 x2^2 + c3 x1^2 x2^2 - c4 x1 x2."""

    c0: float
    c1: float
    c2: float
    c3: float
    c4: float

    def __post_init__(self):
        if any(not v > 0 for v in self.as_tuple()):
            raise InputError("square support coefficients must be positive")

    def as_tuple(self) -> Tuple[float, ...]:
        return (self.c0, self.c1, self.c2, self.c3, self.c4)

    def to_signomial(self) -> Signomial:
        return Signomial.from_terms(
            {
                (0, 0): self.c0,
                (2, 0): self.c1,
                (0, 2): self.c2,
                (2, 2): self.c3,
                (1, 1): -self.c4,
            }
        )

    def is_copositive(self) -> bool:
        """c4^2 <= 4 (c0 c3 + c1 c2) + 8 sqrt(c0 c1 c2 c3)."""
        bound = 4 * (self.c0 * self.c3 + self.c1 * self.c2) + 8 * math.sqrt(
            self.c0 * self.c1 * self.c2 * self.c3
        )
        return self.c4**2 <= bound


class SquareRoots(NamedTuple):
    t_minus: float
    t_plus: float


def square_tstar(c: SquareSupportCoeffs) -> SquareRoots:
    """Positive roots t- <= t+ of the lifted discriminant; t* = t+ for h = 1."""
    p, q = math.sqrt(c.c0 * c.c3), math.sqrt(c.c1 * c.c2)
    return SquareRoots(2 * abs(p - q) / c.c4, 2 * (p + q) / c.c4)


def square_quartic(c: SquareSupportCoeffs) -> np.polynomial.Polynomial:
    """c4^4 t^4 - 8 (c0 c3 + c1 c2) c4^2 t^2 + 16 (c0 c3 - c1 c2)^2, whose roots include t-, t+."""
    c0, c1, c2, c3, c4 = c.as_tuple()
    return np.polynomial.Polynomial(
        [
            16 * (c0**2 * c3**2 + c1**2 * c2**2 - 2 * c0 * c1 * c2 * c3),
            0.0,
            -8 * (c0 * c3 + c1 * c2) * c4**2,
            0.0,
            c4**4,
        ]
    )


def circuit_tstar(circuit: CircuitPolynomial) -> float:
    """Theta / d: the parameter at which the lifted circuit becomes singular."""
    return circuit_number(circuit) / float(circuit.negative[1])


def circuit_log_tstar(circuit: CircuitPolynomial) -> float:
    """log(Theta / d), for circuits whose t* is outside floating-point range."""
    return log_circuit_number(circuit) - math.log(float(circuit.negative[1]))


class CircuitSolution(NamedTuple):
    t: float
    x: np.ndarray


def circuit_solution(circuit: CircuitPolynomial) -> CircuitSolution:
    """The singular point of the lifted circuit in closed form.

    At the singular zero every c_i x^{a_i} / lambda_i takes the same value,
    which fixes log x up to the directions orthogonal to the circuit; the
    least-norm choice is returned.
    """
    theta = circuit_number(circuit)
    lam = circuit.barycentric()
    points = np.array([e for e, _ in circuit.positive], dtype=float)
    coeffs = np.array([float(c) for _, c in circuit.positive])
    levels = np.log(np.array([float(v) for v in lam]) / coeffs)
    u, *_ = np.linalg.lstsq(points[1:] - points[0], levels[1:] - levels[0], rcond=None)
    return CircuitSolution(theta / float(circuit.negative[1]), np.exp(u))


class GridMinimum(NamedTuple):
    value: float
    point: np.ndarray


def _log_space_derivatives(
    exponents: np.ndarray, coeffs: np.ndarray, u: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    terms = coeffs * np.exp(exponents @ u)
    return exponents.T @ terms, (exponents.T * terms) @ exponents


def _value_at(f: Signomial, u: np.ndarray) -> float:
    """f(exp(u)), or +inf where it cannot be evaluated."""
    if not np.all(np.isfinite(u)):
        return math.inf
    try:
        with np.errstate(over="ignore", under="ignore"):
            value = evaluate(f, np.exp(u))
    except (ValueError, OverflowError, InputError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def grid_min(
    f: Signomial,
    box: Tuple[float, float] = (1e-2, 1e2),
    samples: int = 100_000,
    seed: int = 0,
    refine: int = 10,
    newton_steps: int = 20,
) -> GridMinimum:
    """Smallest value of f found on log-uniform samples over box^n.

    The ``refine`` best samples and the center of the log box are improved by
    Newton steps on the log-space gradient, each step halved until f
    decreases.
    """
    lo, hi = np.log(box[0]), np.log(box[1])
    rng = np.random.default_rng(seed)
    logs = rng.uniform(lo, hi, size=(samples, f.n))
    logs[0] = 0.5 * (lo + hi)
    exponents = np.array(f.support.points, dtype=float).reshape(len(f.coeffs), f.n)
    coeffs = np.array(f.coeffs)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.exp(logs @ exponents.T) @ coeffs
    values[~np.isfinite(values)] = np.inf

    best_value, best_point = math.inf, None
    starts = list(np.argsort(values)[:refine])
    if 0 not in starts:
        starts.append(0)
    for k in starts:
        u = logs[k].copy()
        current = _value_at(f, u)
        for _ in range(newton_steps):
            with np.errstate(over="ignore", invalid="ignore"):
                gradient, hessian = _log_space_derivatives(exponents, coeffs, u)
            if not (np.all(np.isfinite(gradient)) and np.all(np.isfinite(hessian))):
                break
            try:
                step = np.linalg.lstsq(hessian, gradient, rcond=None)[0]
            except np.linalg.LinAlgError:
                break
            damping = 1.0
            while damping > 1e-3:
                trial = u - damping * step
                candidate = _value_at(f, trial)
                if candidate < current:
                    break
                damping *= 0.5
            else:
                break
            u, current = trial, candidate
        if current < best_value:
            best_value, best_point = current, np.exp(u)
    logger.debug("grid_min: best value %.6e", best_value)
    return GridMinimum(best_value, best_point)


def _proper_intersection(sigma: Sequence[Point], tau: Sequence[Point]) -> bool:
    """Whether conv(sigma) and conv(tau) meet in the common face conv(sigma & tau).

    True iff a hyperplane contains the shared vertices and strictly separates
    the rest (Farkas: otherwise a circuit with one part in each simplex exists).
    """
    shared = set(sigma) & set(tau)
    d = len(sigma[0])
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for p in sigma:
        row = list(p) + [1]
        if p in shared:
            a_eq.append(row)
            b_eq.append(0)
        else:
            a_ub.append([-v for v in row])
            b_ub.append(-1)
    for p in tau:
        if p not in shared:
            a_ub.append(list(p) + [1])
            b_ub.append(-1)
    result = rational_lp.maximize([0] * (d + 1), a_ub, b_ub, a_eq, b_eq, free=range(d + 1))
    return result.optimal


def _hyperplane(points: Sequence[Point]) -> Tuple[List[Fraction], Fraction]:
    """Normal and offset of the hyperplane through d affinely independent points."""
    d = len(points[0])
    rows = [list(p) + [1] for p in points]
    kernel = _kernel_vector(rows, d + 1)
    return kernel[:d], kernel[d]


def _kernel_vector(rows: Sequence[Sequence[int]], n: int) -> List[Fraction]:
    reduced, pivots = rational_lp.row_reduce(rows)
    free = next(j for j in range(n) if j not in pivots)
    vector = [Fraction(0)] * n
    vector[free] = Fraction(1)
    for i, j in enumerate(pivots):
        vector[j] = -reduced[i][free]
    return vector


def _side(normal: Sequence[Fraction], offset: Fraction, p: Sequence[int]) -> Fraction:
    return sum((a * b for a, b in zip(normal, p)), Fraction(0)) + offset


def _generic_interior_point(
    points: Sequence[Point], hyperplanes: Sequence[Tuple[List[Fraction], Fraction]], facets
) -> Tuple[Fraction, ...]:
    d = len(points[0])
    centroid = [Fraction(sum(p[i] for p in points), len(points)) for i in range(d)]
    for k in itertools.count(1):
        eps = Fraction(k, 1000 * len(points))
        g = tuple(c + eps ** (i + 1) for i, c in enumerate(centroid))
        if all(_side(n, o, g) != 0 for n, o in hyperplanes) and all(
            face.value(g) > 0 for face in facets
        ):
            return g


def brute_force_nonseparable(support: SignedSupport) -> bool:
    """Whether every triangulation of A+ has a cell containing all of A-.

    Searches for a triangulation made only of cells that miss some point of
    A-, growing it across interior facets from the cell holding a generic
    interior point. Intended for tiny supports only.

    Raises:
        InputError: If the support exceeds the size caps
    """
    if len(support.a_plus) > BRUTE_FORCE_MAX_POINTS:
        raise InputError(f"brute force is limited to {BRUTE_FORCE_MAX_POINTS} positive points")
    _, reduced = reduce_to_full_dim(support)
    d = reduced.ambient_dim
    if d > BRUTE_FORCE_MAX_DIM or support.ambient_dim > BRUTE_FORCE_MAX_DIM:
        raise InputError(f"brute force is limited to dimension {BRUTE_FORCE_MAX_DIM}")
    plus, minus = reduced.a_plus, reduced.a_minus

    positive_only = SignedSupport(plus, (), d)
    if positive_only.affine_dim != d:
        return False
    facets = [face for face in enumerate_faces(positive_only) if face.dim == d - 1]
    if any(face.value(b) <= 0 for face in facets for b in minus):
        return False

    simplices: List[Tuple[Point, ...]] = []
    for subset in itertools.combinations(plus, d + 1):
        try:
            lams = [barycentric_coordinates(subset, b) for b in minus]
        except InputError:
            continue
        if not all(min(lam) >= 0 for lam in lams):
            simplices.append(subset)

    def on_boundary(face: Tuple[Point, ...]) -> bool:
        return any(all(f.value(p) == 0 for p in face) for f in facets)

    hyperplanes = [_hyperplane(list(c)) for c in itertools.combinations(plus, d)]
    hyperplanes = [(n, o) for n, o in hyperplanes if any(n)]
    g = _generic_interior_point(plus, hyperplanes, facets)

    proper_cache: Dict[FrozenSet, bool] = {}

    def proper(s: Tuple[Point, ...], t: Tuple[Point, ...]) -> bool:
        key = frozenset((s, t))
        if key not in proper_cache:
            proper_cache[key] = _proper_intersection(s, t)
        return proper_cache[key]

    def search(
        chosen: List[Tuple[Point, ...]], open_facets: Dict[Tuple[Point, ...], Point]
    ) -> bool:
        if not open_facets:
            return True
        facet = min(open_facets)
        apex = open_facets[facet]
        normal, offset = _hyperplane(list(facet))
        own_side = _side(normal, offset, apex) > 0
        for p in plus:
            if p in facet:
                continue
            value = _side(normal, offset, p)
            if value == 0 or (value > 0) == own_side:
                continue
            cell = tuple(sorted(facet + (p,)))
            if cell not in simplex_set or cell in chosen:
                continue
            if not all(proper(cell, other) for other in chosen):
                continue
            updated = dict(open_facets)
            for i in range(d + 1):
                sub = cell[:i] + cell[i + 1 :]
                if sub in updated:
                    del updated[sub]
                elif not on_boundary(sub):
                    updated[sub] = cell[i]
            if search(chosen + [cell], updated):
                return True
        return False

    simplex_set = set(tuple(sorted(s)) for s in simplices)
    for start in sorted(simplex_set):
        try:
            lam = barycentric_coordinates(start, g)
        except InputError:
            continue
        if min(lam) <= 0:
            continue
        open_facets = {}
        for i in range(d + 1):
            sub = start[:i] + start[i + 1 :]
            if not on_boundary(sub):
                open_facets[sub] = start[i]
        if search([start], open_facets):
            logger.debug("found a triangulation with no cell containing a_minus")
            return False
    return True
