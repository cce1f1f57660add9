"""Exact combinatorics of signed supports.

Hulls, faces, barycentric coordinates, lattice reduction to full dimension and
the nonseparability decision all run in rational arithmetic; no floating point
is used in this module.

Facets are found by exhaustive search over d-subsets of hull vertices, so the
cost grows like C(v, d) * m for v hull vertices and m points. This is meant for
desk-scale supports (a few dozen points, d <= 4 or so).
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from . import rational_lp
from .errors import ContractViolation, InputError

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]
RationalPoint = Tuple[Fraction, ...]


class Sign(Enum):
    NEG = -1
    ZERO = 0
    POS = 1

    @classmethod
    def of(cls, value: Fraction) -> "Sign":
        return cls.POS if value > 0 else cls.NEG if value < 0 else cls.ZERO


@dataclass(frozen=True)
class SignedSupport:
    """Exponents of the positive terms (a_plus) and negative terms (a_minus)."""

    a_plus: Tuple[Point, ...]
    a_minus: Tuple[Point, ...]
    ambient_dim: int

    def __post_init__(self):
        a_plus = tuple(tuple(int(v) for v in p) for p in self.a_plus)
        a_minus = tuple(tuple(int(v) for v in p) for p in self.a_minus)
        object.__setattr__(self, "a_plus", a_plus)
        object.__setattr__(self, "a_minus", a_minus)
        for p in a_plus + a_minus:
            if len(p) != self.ambient_dim:
                raise InputError(f"point {p} does not have {self.ambient_dim} coordinates")
        if len(set(a_plus)) != len(a_plus) or len(set(a_minus)) != len(a_minus):
            raise InputError("duplicate exponent vector in support")
        common = set(a_plus) & set(a_minus)
        if common:
            raise InputError(f"exponents {sorted(common)} carry both signs")

    @classmethod
    def from_points(
        cls,
        a_plus: Sequence[Sequence[int]],
        a_minus: Sequence[Sequence[int]],
        ambient_dim: Optional[int] = None,
    ) -> "SignedSupport":
        if ambient_dim is None:
            first = next(iter(list(a_plus) + list(a_minus)), None)
            if first is None:
                raise InputError("empty support")
            ambient_dim = len(first)
        return cls(tuple(map(tuple, a_plus)), tuple(map(tuple, a_minus)), ambient_dim)

    @property
    def points(self) -> Tuple[Point, ...]:
        """All points, a_plus block first."""
        return self.a_plus + self.a_minus

    @property
    def minus_indices(self) -> range:
        return range(len(self.a_plus), len(self.a_plus) + len(self.a_minus))

    @cached_property
    def affine_dim(self) -> int:
        return affine_dim(self.points)

    def canonical(self) -> "SignedSupport":
        """Same support with each block sorted lexicographically."""
        return SignedSupport(
            tuple(sorted(self.a_plus)), tuple(sorted(self.a_minus)), self.ambient_dim
        )


@dataclass(frozen=True)
class Face:
    """A face of conv(A) given by indices into ``support.points`` and an inward normal."""

    point_indices: Tuple[int, ...]
    normal: RationalPoint
    offset: Fraction
    dim: int

    def value(self, x: Sequence) -> Fraction:
        return sum((a * Fraction(b) for a, b in zip(self.normal, x)), Fraction(0)) + self.offset


@dataclass(frozen=True)
class HyperplaneReport:
    """A hyperplane spanned by points of a_plus and the sides the a_minus points fall on."""

    spanning_indices: Tuple[int, ...]
    normal: RationalPoint
    offset: Fraction
    minus_signs: Tuple[Sign, ...]

    def to_dict(self) -> Dict:
        return {
            "spanning_indices": list(self.spanning_indices),
            "normal": [str(v) for v in self.normal],
            "offset": str(self.offset),
            "minus_signs": [s.name for s in self.minus_signs],
        }


@dataclass(frozen=True)
class CellWitness:
    """A rational point in the interior of a cell containing a_minus.

    ``side_choices`` maps each simplex facet the search branched on (as a tuple
    of a_plus indices) to "+" when the point is on the side of the simplex's
    remaining vertex and "-" otherwise.
    """

    point: RationalPoint
    side_choices: Dict[Tuple[int, ...], str] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class SimplexFamily:
    """Full-dimensional simplices on a_plus whose interior contains the witness cell."""

    simplices: Tuple[Tuple[int, ...], ...]
    witness: CellWitness


@dataclass(frozen=True)
class NonseparabilityResult:
    nonseparable: bool
    reason: str
    hyperplane: Optional[HyperplaneReport] = None
    witness: Optional[CellWitness] = None

    def __bool__(self) -> bool:
        return self.nonseparable


@dataclass(frozen=True)
class AffineLatticeMap:
    """Affine map x = origin + basis @ y between a d-dimensional lattice and aff(A).

    ``basis`` is an n x d integer matrix whose columns generate the difference
    lattice of the support; ``left_inverse`` recovers y from x.
    """

    origin: Point
    basis: Tuple[Tuple[int, ...], ...]
    left_inverse: Tuple[RationalPoint, ...]

    @property
    def source_dim(self) -> int:
        return len(self.origin)

    @property
    def target_dim(self) -> int:
        return len(self.left_inverse)

    def apply(self, x: Sequence) -> RationalPoint:
        diff = [Fraction(a) - b for a, b in zip(x, self.origin)]
        return tuple(rational_lp.mat_vec(self.left_inverse, diff))

    def apply_integral(self, x: Sequence[int]) -> Point:
        y = self.apply(x)
        if any(v.denominator != 1 for v in y) or tuple(self.invert(y)) != tuple(map(Fraction, x)):
            raise InputError(f"point {tuple(x)} is not on the lattice of the support")
        return tuple(int(v) for v in y)

    def invert(self, y: Sequence) -> RationalPoint:
        return tuple(
            Fraction(o) + sum((Fraction(h) * Fraction(v) for h, v in zip(row, y)), Fraction(0))
            for o, row in zip(self.origin, self.basis)
        )

    def pull_back(self, normal: Sequence, offset: Fraction) -> Tuple[RationalPoint, Fraction]:
        """Express the functional ``normal.y + offset`` in ambient coordinates."""
        ambient = tuple(rational_lp.mat_vec(rational_lp.transpose(self.left_inverse), normal))
        shift = sum((a * o for a, o in zip(ambient, self.origin)), Fraction(0))
        return ambient, Fraction(offset) - shift

    @classmethod
    def identity(cls, n: int) -> "AffineLatticeMap":
        eye = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        return cls((0,) * n, eye, tuple(tuple(Fraction(v) for v in row) for row in eye))


def affine_dim(points: Sequence[Sequence[int]]) -> int:
    """Dimension of the affine hull, computed exactly."""
    if not points:
        raise InputError("affine_dim of an empty point list")
    base = points[0]
    diffs = [[Fraction(a) - b for a, b in zip(p, base)] for p in points[1:]]
    return rational_lp.rank(diffs) if diffs else 0


def hull_vertices(points: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """Indices of the vertices of conv(points).

    A point is a vertex iff it is not a convex combination of the others,
    checked with an exact feasibility LP per point.
    """
    if len(points) == 1:
        return (0,)
    vertices = []
    for k, p in enumerate(points):
        others = [q for j, q in enumerate(points) if j != k]
        a_eq = [[1] * len(others)] + [[q[i] for q in others] for i in range(len(p))]
        b_eq = [1] + list(p)
        if rational_lp.find_nonnegative_solution(a_eq, b_eq) is None:
            vertices.append(k)
    return tuple(vertices)


def _spanning_hyperplane(pts: Sequence[Sequence]) -> Tuple[RationalPoint, Fraction]:
    """Normal and offset of the hyperplane through d points of Q^d (cofactor formula).

    Returns a zero normal when the points are affinely dependent.
    """
    d = len(pts[0])
    base = pts[0]
    diffs = [[Fraction(a) - b for a, b in zip(p, base)] for p in pts[1:]]
    normal = []
    for k in range(d):
        minor = [row[:k] + row[k + 1 :] for row in diffs]
        normal.append((-1) ** k * rational_lp.determinant(minor))
    offset = -sum((a * Fraction(b) for a, b in zip(normal, base)), Fraction(0))
    return tuple(normal), offset


def _evaluate(normal: Sequence[Fraction], offset: Fraction, x: Sequence) -> Fraction:
    return sum((a * Fraction(b) for a, b in zip(normal, x)), Fraction(0)) + offset


@dataclass(frozen=True)
class _Facet:
    spanning: Tuple[int, ...]
    zero_set: FrozenSet[int]
    normal: RationalPoint
    offset: Fraction


def _facets(pts: Sequence[Sequence], candidates: Sequence[int]) -> List[_Facet]:
    """Facets of conv(pts) in full-dimensional coordinates, inward oriented."""
    d = len(pts[0]) if pts else 0
    if d == 0:
        return []
    found: Dict[FrozenSet[int], _Facet] = {}
    for subset in itertools.combinations(candidates, d):
        normal, offset = _spanning_hyperplane([pts[i] for i in subset])
        if not any(normal):
            continue
        values = [_evaluate(normal, offset, p) for p in pts]
        if all(v >= 0 for v in values):
            pass
        elif all(v <= 0 for v in values):
            normal, offset = tuple(-a for a in normal), -offset
        else:
            continue
        zero_set = frozenset(i for i, p in enumerate(pts) if _evaluate(normal, offset, p) == 0)
        if zero_set not in found:
            found[zero_set] = _Facet(subset, zero_set, normal, offset)
    return list(found.values())


@lru_cache(maxsize=256)
def reduce_to_full_dim(support: SignedSupport) -> Tuple[AffineLatticeMap, SignedSupport]:
    """Map the support onto a full-dimensional integer support, preserving point order.

    The columns of the Hermite normal form of the difference vectors give a
    basis of the difference lattice, so the reduced exponents stay integral.
    """
    n = support.ambient_dim
    d = support.affine_dim
    if d == n:
        return AffineLatticeMap.identity(n), support

    points = support.points
    origin = points[0]
    m = len(points)
    diffs = Matrix(n, m + n, lambda i, j: points[j][i] - origin[i] if j < m else 0)
    hnf = hermite_normal_form(diffs)
    columns = [[int(v) for v in hnf.col(j)] for j in range(hnf.cols) if any(hnf.col(j))]
    if len(columns) != d:
        raise InputError(f"lattice basis has {len(columns)} columns, expected {d}")
    basis = [[columns[j][i] for j in range(d)] for i in range(n)]

    gram = [
        [sum(Fraction(basis[k][i] * basis[k][j]) for k in range(n)) for j in range(d)]
        for i in range(d)
    ]
    gram_inv = rational_lp.inverse(gram)
    left_inverse = [
        [sum(gram_inv[i][k] * basis[j][k] for k in range(d)) for j in range(n)] for i in range(d)
    ]
    psi = AffineLatticeMap(
        tuple(origin),
        tuple(tuple(row) for row in basis),
        tuple(tuple(row) for row in left_inverse),
    )
    reduced = SignedSupport(
        tuple(psi.apply_integral(p) for p in support.a_plus),
        tuple(psi.apply_integral(p) for p in support.a_minus),
        d,
    )
    logger.debug("reduced support from dimension %d to %d", n, d)
    return psi, reduced


@lru_cache(maxsize=256)
def _face_lattice(support: SignedSupport) -> Tuple[List[_Facet], Tuple[Face, ...]]:
    psi, reduced = reduce_to_full_dim(support)
    pts = reduced.points
    facets = _facets(pts, hull_vertices(pts)) if reduced.ambient_dim > 0 else []

    point_sets = {f.zero_set for f in facets}
    frontier = set(point_sets)
    while frontier:
        new = set()
        for a in frontier:
            for f in facets:
                meet = a & f.zero_set
                if meet and meet not in point_sets:
                    new.add(meet)
        point_sets |= new
        frontier = new

    faces = []
    for point_set in point_sets:
        containing = [f for f in facets if point_set <= f.zero_set]
        normal = [
            sum((f.normal[k] for f in containing), Fraction(0))
            for k in range(reduced.ambient_dim)
        ]
        offset = sum((f.offset for f in containing), Fraction(0))
        ambient_normal, ambient_offset = psi.pull_back(normal, offset)
        indices = tuple(sorted(point_set))
        faces.append(
            Face(
                indices,
                ambient_normal,
                ambient_offset,
                affine_dim([support.points[i] for i in indices]),
            )
        )
    faces.append(
        Face(
            tuple(range(len(pts))),
            (Fraction(0),) * support.ambient_dim,
            Fraction(0),
            reduced.ambient_dim,
        )
    )
    faces.sort(key=lambda face: (face.dim, face.point_indices))
    return facets, tuple(faces)


def enumerate_faces(support: SignedSupport) -> List[Face]:
    """All nonempty faces of conv(A), conv(A) itself included, ordered by dimension."""
    return list(_face_lattice(support)[1])


def smallest_face_containing(support: SignedSupport, subset: Sequence[Sequence[int]]) -> Face:
    """The inclusion-minimal face of conv(A) containing every point of ``subset``."""
    psi, _ = reduce_to_full_dim(support)
    facets, faces = _face_lattice(support)
    reduced_subset = []
    for x in subset:
        y = psi.apply(x)
        if psi.invert(y) != tuple(Fraction(v) for v in x):
            raise InputError(f"point {tuple(x)} is outside the affine hull of the support")
        if any(_evaluate(f.normal, f.offset, y) < 0 for f in facets):
            raise InputError(f"point {tuple(x)} is outside conv(A)")
        reduced_subset.append(y)

    zero_sets = [
        f.zero_set
        for f in facets
        if all(_evaluate(f.normal, f.offset, y) == 0 for y in reduced_subset)
    ]
    if not zero_sets:
        return faces[-1]
    target = tuple(sorted(frozenset.intersection(*zero_sets)))
    return next(face for face in faces if face.point_indices == target)


def truncation_face_set_J(gamma: Face, support: SignedSupport) -> List[Face]:
    """Faces of ``gamma`` that meet a_minus."""
    inside = set(gamma.point_indices)
    minus = set(support.minus_indices)
    return [
        face
        for face in enumerate_faces(support)
        if set(face.point_indices) <= inside and minus & set(face.point_indices)
    ]


def barycentric_coordinates(simplex: Sequence[Sequence[int]], b: Sequence) -> RationalPoint:
    """Exact convex weights of ``b`` with respect to the vertices of ``simplex``."""
    n = len(b)
    rows = [[1] * len(simplex)] + [[v[i] for v in simplex] for i in range(n)]
    if rational_lp.rank(rows) < len(simplex):
        raise InputError("degenerate simplex: vertices are affinely dependent")
    solution = rational_lp.solve_linear(rows, [1] + list(b))
    if solution is None:
        raise InputError(f"point {tuple(b)} is outside the affine hull of the simplex")
    return tuple(solution)


@dataclass(frozen=True)
class _Simplex:
    indices: Tuple[int, ...]
    bary_rows: Tuple[Tuple[Fraction, ...], ...]  # lambda_i(q) = row[0] + row[1:] . q

    def coords(self, q: Sequence) -> List[Fraction]:
        return [row[0] + _evaluate(row[1:], Fraction(0), q) for row in self.bary_rows]

    def facet(self, i: int) -> Tuple[int, ...]:
        return self.indices[:i] + self.indices[i + 1 :]


def _all_simplices(pts: Sequence[Sequence], d: int) -> List[_Simplex]:
    simplices = []
    for subset in itertools.combinations(range(len(pts)), d + 1):
        rows = [[1] * (d + 1)] + [[pts[j][i] for j in subset] for i in range(d)]
        try:
            inv = rational_lp.inverse(rows)
        except ZeroDivisionError:
            continue
        simplices.append(_Simplex(subset, tuple(tuple(row) for row in inv)))
    return simplices


# A constraint (coeffs, const, strict) reads coeffs.q + const >= (slack if strict else 0)
_Constraint = Tuple[Tuple[Fraction, ...], Fraction, bool]


def _max_slack_point(constraints: Sequence[_Constraint], d: int) -> Optional[RationalPoint]:
    a_ub = [[Fraction(0)] * d + [Fraction(1)]]
    b_ub = [Fraction(1)]
    for coeffs, const, strict in constraints:
        a_ub.append([-c for c in coeffs] + [Fraction(int(strict))])
        b_ub.append(const)
    result = rational_lp.maximize([0] * d + [1], a_ub, b_ub, free=range(d))
    if not result.optimal or result.objective <= 0:
        return None
    return tuple(result.x[:d])


def _branch_constraints(simplex: _Simplex, inside: bool) -> List[List[_Constraint]]:
    rows = [(tuple(row[1:]), row[0]) for row in simplex.bary_rows]
    children: List[List[_Constraint]] = []
    if inside:
        children.append([(c, k, True) for c, k in rows])
    for i, (coeffs, const) in enumerate(rows):
        child = [(tuple(-c for c in coeffs), -const, True)]
        child += [(c, k, False) for c, k in rows[:i]]
        children.append(child)
    return children


def _chamber_search(
    plus: Sequence[Sequence[int]], minus: Sequence[Sequence[int]], d: int, hull: List[_Facet]
) -> Optional[Tuple[RationalPoint, Dict[Tuple[int, ...], str]]]:
    """Depth-first search for a point of int conv(A+) outside every simplex missing a_minus.

    The point must also avoid the boundary of every other simplex. At each node
    the first simplex (lexicographic) violating this at the current LP point is
    branched on: inside it first when it contains a_minus, then outside across
    each of its facets in vertex order.
    """
    simplices = _all_simplices(plus, d)
    good = [all(min(s.coords(b)) >= 0 for b in minus) for s in simplices]
    root: List[_Constraint] = [(f.normal, f.offset, True) for f in hull]

    stack: List[Tuple[List[_Constraint], Tuple[int, ...]]] = [(root, ())]
    nodes = 0
    while stack:
        constraints, path = stack.pop()
        nodes += 1
        q = _max_slack_point(constraints, d)
        if q is None:
            continue
        offender = None
        for k, simplex in enumerate(simplices):
            lam = simplex.coords(q)
            outside = min(lam) < 0
            if not outside and not (good[k] and min(lam) > 0):
                offender = k
                break
        if offender is None:
            logger.debug("cell witness found after %d LP nodes", nodes)
            choices = {}
            for k in path:
                lam = simplices[k].coords(q)
                for i in range(d + 1):
                    choices[simplices[k].facet(i)] = "+" if lam[i] > 0 else "-"
            return q, choices
        children = _branch_constraints(simplices[offender], good[offender])
        for child in reversed(children):
            stack.append((constraints + child, path + (offender,)))
    logger.debug("no cell witness after %d LP nodes", nodes)
    return None


def _separating_report(
    plus: Sequence[Sequence[int]], minus: Sequence[Sequence[int]], d: int, psi: AffineLatticeMap
) -> Optional[HyperplaneReport]:
    for subset in itertools.combinations(range(len(plus)), d):
        normal, offset = _spanning_hyperplane([plus[i] for i in subset])
        if not any(normal):
            continue
        signs = tuple(Sign.of(_evaluate(normal, offset, b)) for b in minus)
        if Sign.POS in signs and Sign.NEG in signs:
            ambient_normal, ambient_offset = psi.pull_back(normal, offset)
            return HyperplaneReport(subset, ambient_normal, ambient_offset, signs)
    return None


def _report(
    spanning: Tuple[int, ...],
    normal: Sequence[Fraction],
    offset: Fraction,
    minus: Sequence[Sequence],
    psi: AffineLatticeMap,
) -> HyperplaneReport:
    signs = tuple(Sign.of(_evaluate(normal, offset, b)) for b in minus)
    ambient_normal, ambient_offset = psi.pull_back(normal, offset)
    return HyperplaneReport(spanning, ambient_normal, ambient_offset, signs)


def _interior_failure(
    support: SignedSupport,
) -> Tuple[Optional[NonseparabilityResult], List[_Facet]]:
    """Check a_minus against the interior of conv(a_plus).

    Returns (failure or None, hull facets).
    """
    if not support.a_minus:
        raise InputError("nonseparability needs at least one negative term")
    psi, reduced = reduce_to_full_dim(support)
    plus, minus = reduced.a_plus, reduced.a_minus
    if not plus or affine_dim(plus) < reduced.ambient_dim:
        reason = "a_plus does not span the affine hull of the support"
        return NonseparabilityResult(False, reason), []
    hull = _facets(plus, hull_vertices(plus))
    for facet in hull:
        if any(_evaluate(facet.normal, facet.offset, b) <= 0 for b in minus):
            failure = NonseparabilityResult(
                False,
                "a_minus is not contained in the interior of conv(a_plus)",
                _report(facet.spanning, facet.normal, facet.offset, minus, psi),
            )
            return failure, hull
    return None, hull


def minus_in_interior(support: SignedSupport) -> bool:
    """Whether every point of a_minus lies in the relative interior of conv(a_plus)."""
    return _interior_failure(support)[0] is None


@lru_cache(maxsize=256)
def _decide(support: SignedSupport) -> NonseparabilityResult:
    failure, hull = _interior_failure(support)
    if failure is not None:
        return failure
    psi, reduced = reduce_to_full_dim(support)
    d = reduced.ambient_dim
    plus, minus = reduced.a_plus, reduced.a_minus

    found = _chamber_search(plus, minus, d, hull)
    if found is not None:
        q, choices = found
        witness = CellWitness(psi.invert(q), choices)
        return NonseparabilityResult(
            True, "a cell of the common refinement contains a_minus", witness=witness
        )

    report = _separating_report(plus, minus, d, psi)
    if report is None:
        # every spanning hyperplane keeps a_minus on one closed side; blame a simplex facet
        for simplex in _all_simplices(plus, d):
            coords = [simplex.coords(b) for b in minus]
            missing = next((i for i in range(d + 1) if any(c[i] < 0 for c in coords)), None)
            if missing is not None:
                row = simplex.bary_rows[missing]
                report = _report(simplex.facet(missing), row[1:], row[0], minus, psi)
                break
    return NonseparabilityResult(
        False, "every cell of the common refinement misses a_minus", report
    )


def is_nonseparable(support: SignedSupport) -> Tuple[bool, Optional[HyperplaneReport]]:
    """Decide whether some cell of the common refinement of subdivisions of A+ contains A-.

    Returns:
        Tuple of (verdict, diagnostic hyperplane for separable supports)
    """
    result = _decide(support)
    return result.nonseparable, result.hyperplane


def classify_support(support: SignedSupport) -> NonseparabilityResult:
    """Like is_nonseparable, but keeps the reason string and the witness."""
    return _decide(support)


def find_cell_witness(support: SignedSupport) -> CellWitness:
    """A rational point interior to a cell D with A- contained in the closure of D.

    Raises:
        ContractViolation: If the support is separable
    """
    result = _decide(support)
    if result.witness is None:
        raise ContractViolation(
            f"support is separable: {result.reason}",
            hint="use the multistart fallback for separable supports",
        )
    return result.witness


def simplices_containing_cell(support: SignedSupport, witness: CellWitness) -> SimplexFamily:
    """All full-dimensional simplices on a_plus with the witness strictly inside."""
    psi, reduced = reduce_to_full_dim(support)
    q = psi.apply(witness.point)
    chosen = tuple(
        simplex.indices
        for simplex in _all_simplices(reduced.a_plus, reduced.ambient_dim)
        if min(simplex.coords(q)) > 0
    )
    return SimplexFamily(chosen, witness)
