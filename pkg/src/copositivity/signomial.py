"""Signomials with integer exponents and signed coefficients."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputError
from .lattice import Face, Point, SignedSupport, hull_vertices

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]


def coefficient_to_float(c: Number) -> float:
    """float(c) for a nonzero input coefficient.

    Raises:
        InputError: If c overflows, is not finite, or rounds to zero
    """
    try:
        value = float(c)
    except OverflowError as e:
        raise InputError("coefficient is too large for a float") from e
    if not math.isfinite(value):
        raise InputError(f"coefficient {value} is not finite")
    if value == 0 and c != 0:
        raise InputError("coefficient is too small for a float")
    return value


class PrecheckOutcome(str, Enum):
    TRIVIALLY_COPOSITIVE = "TriviallyCopositive"
    TRIVIALLY_NEGATIVE = "TriviallyNegative"
    NEEDS_CRITERION = "NeedsCriterion"


@dataclass(frozen=True, eq=False)
class Signomial:
    """f(x) = sum_{a in A+} c_a x^a - sum_{b in A-} c_b x^b.

    ``coeffs`` holds the signed coefficients in ``support.points`` order;
    ``exact`` mirrors them as Fractions when every input literal was rational.
    """

    support: SignedSupport
    coeffs: Tuple[float, ...]
    exact: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, float) else coefficient_to_float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != len(self.support.points):
            raise InputError("coefficient count does not match the support")
        n_plus = len(self.support.a_plus)
        for k, c in enumerate(coeffs):
            if (k < n_plus and not c > 0) or (k >= n_plus and not c < 0):
                raise InputError(f"coefficient {c} has the wrong sign for {self.support.points[k]}")
        if self.exact is not None and len(self.exact) != len(coeffs):
            raise InputError("exact coefficient count does not match the support")

    @classmethod
    def from_terms(
        cls, terms: Mapping[Sequence[int], Number], n: Optional[int] = None
    ) -> "Signomial":
        """Build a signomial in canonical point order from an exponent -> coefficient map.

        Zero coefficients are dropped. The exact mirror is kept when all
        coefficients are ints or Fractions.
        """
        items = [(tuple(int(v) for v in e), c) for e, c in terms.items() if c != 0]
        if not items:
            raise InputError("the zero polynomial has no signed support")
        if n is None:
            n = len(items[0][0])
        plus = sorted((e, c) for e, c in items if c > 0)
        minus = sorted((e, c) for e, c in items if c < 0)
        support = SignedSupport(tuple(e for e, _ in plus), tuple(e for e, _ in minus), n)
        ordered = [c for _, c in plus] + [c for _, c in minus]
        exact = None
        if all(isinstance(c, Rational) for c in ordered):
            exact = tuple(Fraction(c) for c in ordered)
        return cls(support, tuple(coefficient_to_float(c) for c in ordered), exact)

    @property
    def n(self) -> int:
        return self.support.ambient_dim

    @property
    def abs_coeffs(self) -> np.ndarray:
        """The nonsigned coefficient vector c (all entries positive)."""
        return np.abs(np.array(self.coeffs, dtype=float))

    @property
    def sigma(self) -> np.ndarray:
        return np.sign(np.array(self.coeffs, dtype=float))

    def terms(self) -> Dict[Point, float]:
        return dict(zip(self.support.points, self.coeffs))

    def coefficient(self, point: Sequence[int]) -> float:
        return self.terms().get(tuple(point), 0.0)

    def __str__(self) -> str:
        return format_signomial(self)


def format_signomial(f: Signomial) -> str:
    """Render in the text grammar accepted by the parser."""
    pieces = []
    for e, c in zip(f.support.points, f.exact or f.coeffs):
        monomial = "*".join(
            f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}" for i, k in enumerate(e) if k != 0
        )
        magnitude = abs(c)
        literal = str(magnitude) if isinstance(magnitude, Fraction) else repr(float(magnitude))
        if not monomial:
            body = literal
        elif magnitude == 1:
            body = monomial
        else:
            body = f"{literal}*{monomial}"
        if not pieces:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f"- {body}" if c < 0 else f"+ {body}")
    return " ".join(pieces)


def _check_positive(x: Sequence[float], n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise InputError(f"expected a point with {n} coordinates")
    if not np.all(arr > 0):
        raise InputError("evaluation point must be strictly positive")
    return arr


def _monomials(f: Signomial, x: np.ndarray) -> np.ndarray:
    exponents = np.array(f.support.points, dtype=float).reshape(len(f.coeffs), f.n)
    return np.exp(exponents @ np.log(x))


def evaluate(f: Signomial, x: Sequence[float]) -> float:
    """f(x) with compensated summation."""
    arr = _check_positive(x, f.n)
    return math.fsum(np.array(f.coeffs) * _monomials(f, arr))


def critical_residual(f: Signomial, x: Sequence[float]) -> float:
    """Max-norm of (f, x_1 df/dx_1, ..., x_n df/dx_n) at x."""
    arr = _check_positive(x, f.n)
    terms = np.array(f.coeffs) * _monomials(f, arr)
    rows = [math.fsum(terms)]
    for i in range(f.n):
        rows.append(math.fsum(terms * np.array([p[i] for p in f.support.points], dtype=float)))
    return max(abs(v) for v in rows)


def sign_precheck(f: Signomial) -> PrecheckOutcome:
    """Cheap verdicts that need no path tracking.

    A signomial with no negative term is copositive; one with a negative term
    at a vertex of its Newton polytope takes negative values.
    """
    if not f.support.a_minus:
        return PrecheckOutcome.TRIVIALLY_COPOSITIVE
    n_plus = len(f.support.a_plus)
    if any(k >= n_plus for k in hull_vertices(f.support.points)):
        return PrecheckOutcome.TRIVIALLY_NEGATIVE
    return PrecheckOutcome.NEEDS_CRITERION


def truncate(f: Signomial, gamma: Face) -> Signomial:
    """Restriction of f to the terms whose exponents lie on the face ``gamma``."""
    keep = [k for k in gamma.point_indices if k < len(f.coeffs)]
    if not keep:
        raise InputError("truncation to a face with no terms")
    n_plus = len(f.support.a_plus)
    plus = [k for k in keep if k < n_plus]
    minus = [k for k in keep if k >= n_plus]
    points = f.support.points
    support = SignedSupport(
        tuple(points[k] for k in plus), tuple(points[k] for k in minus), f.n
    )
    order = plus + minus
    exact = tuple(f.exact[k] for k in order) if f.exact is not None else None
    return Signomial(support, tuple(f.coeffs[k] for k in order), exact)


def rescale_to_one(f: Signomial, x_star: Sequence[float]) -> Signomial:
    """The signomial w -> f(x_star * w); coefficient of x^a picks up x_star^a."""
    arr = _check_positive(x_star, f.n)
    return Signomial(f.support, tuple(np.array(f.coeffs) * _monomials(f, arr)))


def substitute_support(f: Signomial, support: SignedSupport) -> Signomial:
    """Same coefficients on a support with the same point order (e.g. after lattice reduction)."""
    return Signomial(support, f.coeffs, f.exact)


@dataclass(frozen=True)
class HeightFunction:
    """Integer heights lifting A-: zero on A+, at least one on A-."""

    heights: Dict[Point, int] = field(hash=False)

    def __post_init__(self):
        for point, value in self.heights.items():
            if int(value) != value or value < 0:
                raise InputError(f"height {value} at {point} is not a nonnegative integer")

    @classmethod
    def uniform(cls, support: SignedSupport, value: int = 1) -> "HeightFunction":
        heights = {a: 0 for a in support.a_plus}
        heights.update({b: int(value) for b in support.a_minus})
        result = cls(heights)
        result.validate(support)
        return result

    @classmethod
    def from_values(cls, support: SignedSupport, values: Sequence[int]) -> "HeightFunction":
        """Heights for a_minus listed in support order."""
        if len(values) != len(support.a_minus):
            raise InputError(f"expected {len(support.a_minus)} heights, got {len(values)}")
        heights = {a: 0 for a in support.a_plus}
        heights.update({b: int(v) for b, v in zip(support.a_minus, values)})
        result = cls(heights)
        result.validate(support)
        return result

    def validate(self, support: SignedSupport) -> None:
        if set(self.heights) != set(support.points):
            raise InputError("height function domain does not match the support")
        if any(self.heights[a] != 0 for a in support.a_plus):
            raise InputError("heights must vanish on A+")
        if any(self.heights[b] < 1 for b in support.a_minus):
            raise InputError("heights must be at least 1 on A-")

    def of(self, point: Sequence[int]) -> int:
        return self.heights[tuple(point)]

    def vector(self, support: SignedSupport) -> np.ndarray:
        return np.array([self.heights[p] for p in support.points], dtype=float)

    def transported(self, source: SignedSupport, target: SignedSupport) -> "HeightFunction":
        """Carry heights across a point-order-preserving change of support."""
        mapping = dict(zip(source.points, target.points))
        return HeightFunction({mapping[p]: v for p, v in self.heights.items() if p in mapping})


def parse_heights(spec: Optional[str], support: SignedSupport, default: int = 1) -> HeightFunction:
    """Parse the --h option: one integer for all of A-, or a comma list in A- order."""
    if spec is None or spec.strip() == "":
        return HeightFunction.uniform(support, default)
    try:
        values = [int(v) for v in spec.split(",")]
    except ValueError as e:
        raise InputError(f"invalid heights {spec!r}") from e
    if len(values) == 1:
        return HeightFunction.uniform(support, values[0])
    return HeightFunction.from_values(support, values)


def lift(f: Signomial, h: HeightFunction, t: float) -> Signomial:
    """The lifted signomial with c_b replaced by c_b * t^h(b)."""
    h.validate(f.support)
    scale = np.power(float(t), h.vector(f.support))
    return Signomial(f.support, tuple(np.array(f.coeffs) * scale))


@dataclass(frozen=True, eq=False)
class CriticalSystem:
    """F(c, x) = C (c * x^A) with C = [1; A] diag(sigma), columns in support order."""

    exponents: np.ndarray  # n x m
    matrix: np.ndarray  # (n+1) x m
    heights: np.ndarray  # m
    coeffs: np.ndarray  # m, positive

    @property
    def n(self) -> int:
        return self.exponents.shape[0]

    @property
    def m(self) -> int:
        return self.exponents.shape[1]

    def weights(self) -> np.ndarray:
        """Rows (h; A): derivatives of the exponent h(a) tau + <a, y>."""
        return np.vstack([self.heights, self.exponents])


def build_critical_system(f: Signomial, h: HeightFunction) -> CriticalSystem:
    h.validate(f.support)
    points = f.support.points
    exponents = np.array(points, dtype=float).reshape(len(points), f.n).T
    a_hat = np.vstack([np.ones(len(points)), exponents])
    matrix = a_hat * f.sigma[np.newaxis, :]
    logger.debug("critical system with %d terms in %d variables", len(points), f.n)
    return CriticalSystem(exponents, matrix, h.vector(f.support), f.abs_coeffs)
