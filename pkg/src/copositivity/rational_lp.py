"""Exact rational linear algebra and a two-phase simplex method with Bland's rule.

Everything here works on ``fractions.Fraction`` so that sign tests made by the
geometry and certificate code are exact.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]
Vector = List[Fraction]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    """Copy a nested sequence of numbers into a Fraction matrix."""
    return [[Fraction(v) for v in row] for row in rows]


def row_reduce(rows: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form.

    Returns:
        Tuple of (reduced matrix, pivot column indices)
    """
    mat = to_fractions(rows)
    if not mat:
        return mat, []
    n_rows, n_cols = len(mat), len(mat[0])
    pivots: List[int] = []
    r = 0
    for col in range(n_cols):
        pivot_row = next((i for i in range(r, n_rows) if mat[i][col] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        piv = mat[r][col]
        mat[r] = [v / piv for v in mat[r]]
        for i in range(n_rows):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == n_rows:
            break
    return mat, pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix."""
    return len(row_reduce(rows)[1])


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free-style elimination over Fractions."""
    mat = to_fractions(rows)
    n = len(mat)
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((i for i in range(col, n) if mat[i][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            mat[col], mat[pivot_row] = mat[pivot_row], mat[col]
            det = -det
        piv = mat[col][col]
        det *= piv
        for i in range(col + 1, n):
            if mat[i][col] != 0:
                f = mat[i][col] / piv
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
    return det


def solve_linear(rows: Sequence[Sequence], rhs: Sequence) -> Optional[Vector]:
    """Solve ``rows @ x = rhs`` exactly.

    Free variables are set to zero. Returns None when the system is inconsistent.
    """
    n_cols = len(rows[0]) if rows else 0
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    mat, pivots = row_reduce(augmented)
    if n_cols in pivots:
        return None
    x = [Fraction(0)] * n_cols
    for i, col in enumerate(pivots):
        x[col] = mat[i][n_cols]
    return x


def inverse(rows: Sequence[Sequence]) -> Matrix:
    """Exact inverse of a square matrix.

    Raises:
        ZeroDivisionError: If the matrix is singular
    """
    n = len(rows)
    augmented = [
        list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)
    ]
    mat, pivots = row_reduce(augmented)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in mat]


def mat_vec(rows: Sequence[Sequence], x: Sequence) -> Vector:
    return [sum((Fraction(a) * b for a, b in zip(row, x)), Fraction(0)) for row in rows]


def transpose(rows: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*rows)]


class SimplexTableau:
    """Dense tableau for ``max c.x  s.t.  A x = b, x >= 0`` with a known basis.

    Pivoting follows Bland's rule: the entering column is the lowest-index
    column with positive reduced cost, ties in the ratio test go to the
    lowest-index basic variable. This guarantees termination.
    """

    def __init__(self, rows: Matrix, rhs: Vector, basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.cost: Vector = [Fraction(0)] * self.n
        self.value = Fraction(0)
        self.pivots = 0

    def set_objective(self, c: Sequence[Fraction]) -> None:
        """Load reduced costs for objective ``c`` relative to the current basis."""
        self.cost = [Fraction(v) for v in c]
        self.value = Fraction(0)
        for i, bv in enumerate(self.basis):
            cb = Fraction(c[bv])
            if cb:
                self.cost = [a - cb * r for a, r in zip(self.cost, self.rows[i])]
                self.value += cb * self.rhs[i]

    def pivot(self, i: int, j: int) -> None:
        piv = self.rows[i][j]
        row = [v / piv for v in self.rows[i]]
        rhs_i = self.rhs[i] / piv
        self.rows[i] = row
        self.rhs[i] = rhs_i
        for k in range(self.m):
            if k != i:
                f = self.rows[k][j]
                if f:
                    self.rows[k] = [a - f * r for a, r in zip(self.rows[k], row)]
                    self.rhs[k] -= f * rhs_i
        f = self.cost[j]
        if f:
            self.cost = [a - f * r for a, r in zip(self.cost, row)]
            self.value += f * rhs_i
        self.basis[i] = j
        self.pivots += 1

    def bland_primal_step(self, n_allowed: int) -> str:
        try:
            j = next(j for j in range(n_allowed) if self.cost[j] > 0)
        except StopIteration:
            return "optimal"
        try:
            _, _, i = min(
                (self.rhs[i] / self.rows[i][j], self.basis[i], i)
                for i in range(self.m)
                if self.rows[i][j] > 0
            )
        except ValueError:
            return "unbounded"
        self.pivot(i, j)
        return "go_on"

    def bland_primal(self, n_allowed: Optional[int] = None) -> str:
        limit = self.n if n_allowed is None else n_allowed
        while True:
            status = self.bland_primal_step(limit)
            if status != "go_on":
                return status

    def solution(self, n_vars: int) -> Vector:
        x = [Fraction(0)] * n_vars
        for i, bv in enumerate(self.basis):
            if bv < n_vars:
                x[bv] = self.rhs[i]
        return x


@dataclass
class LPResult:
    """Outcome of an exact linear program."""

    status: str  # "optimal", "infeasible" or "unbounded"
    x: Vector = field(default_factory=list)
    objective: Optional[Fraction] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_standard_form(
    a_eq: Sequence[Sequence], b_eq: Sequence, c: Sequence
) -> LPResult:
    """Maximize ``c.x`` subject to ``a_eq x = b_eq`` and ``x >= 0``.

    Two-phase method: phase 1 drives one artificial variable per row to zero,
    phase 2 optimizes ``c`` over the original columns only.
    """
    n = len(c)
    rows = to_fractions(a_eq)
    rhs = [Fraction(b) for b in b_eq]
    for i, b in enumerate(rhs):
        if b < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -b
    m = len(rows)
    if m == 0:
        if any(Fraction(v) > 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", [Fraction(0)] * n, Fraction(0))

    tableau_rows = [row + [Fraction(int(i == k)) for k in range(m)] for i, row in enumerate(rows)]
    tableau = SimplexTableau(tableau_rows, rhs, [n + i for i in range(m)])

    # Phase 1: maximize minus the sum of artificials
    tableau.set_objective([Fraction(0)] * n + [Fraction(-1)] * m)
    tableau.bland_primal()
    if tableau.value < 0:
        return LPResult("infeasible", pivots=tableau.pivots)

    # Pivot remaining (zero-valued) artificials out, dropping redundant rows
    i = 0
    while i < tableau.m:
        if tableau.basis[i] >= n:
            j = next((j for j in range(n) if tableau.rows[i][j] != 0), None)
            if j is None:
                del tableau.rows[i]
                del tableau.rhs[i]
                del tableau.basis[i]
                tableau.m -= 1
                continue
            tableau.pivot(i, j)
        i += 1

    # Phase 2
    tableau.set_objective([Fraction(v) for v in c] + [Fraction(0)] * m)
    status = tableau.bland_primal(n_allowed=n)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tableau.pivots)
    return LPResult("optimal", tableau.solution(n), tableau.value, tableau.pivots)


def maximize(
    c: Sequence,
    a_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    a_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    free: Sequence[int] = (),
) -> LPResult:
    """Maximize ``c.x`` subject to ``a_ub x <= b_ub``, ``a_eq x = b_eq``.

    Variables are nonnegative except those listed in ``free``, which are split
    into a difference of two nonnegative parts internally.

    Args:
        c: Objective coefficients
        a_ub: Inequality rows
        b_ub: Inequality right-hand sides
        a_eq: Equality rows
        b_eq: Equality right-hand sides
        free: Indices of sign-unrestricted variables

    Returns:
        LPResult with ``x`` expressed in the original variables
    """
    n = len(c)
    free_set = sorted(set(free))
    extra = {j: n + k for k, j in enumerate(free_set)}
    n_split = n + len(free_set)

    def expand(row: Sequence) -> Vector:
        out = [Fraction(v) for v in row] + [Fraction(0)] * len(free_set)
        for j, k in extra.items():
            out[k] = -out[j]
        return out

    n_slack = len(a_ub)
    eq_rows: Matrix = []
    eq_rhs: Vector = []
    for s, (row, b) in enumerate(zip(a_ub, b_ub)):
        slack = [Fraction(int(s == k)) for k in range(n_slack)]
        eq_rows.append(expand(row) + slack)
        eq_rhs.append(Fraction(b))
    for row, b in zip(a_eq, b_eq):
        eq_rows.append(expand(row) + [Fraction(0)] * n_slack)
        eq_rhs.append(Fraction(b))

    result = solve_standard_form(eq_rows, eq_rhs, expand(c) + [Fraction(0)] * n_slack)
    if not result.optimal:
        return result
    x = result.x[:n]
    for j, k in extra.items():
        x[j] = x[j] - result.x[k]
    return LPResult("optimal", x, result.objective, result.pivots)


def find_nonnegative_solution(a_eq: Sequence[Sequence], b_eq: Sequence) -> Optional[Vector]:
    """Phase-1 feasibility: some ``x >= 0`` with ``a_eq x = b_eq``, or None."""
    n = len(a_eq[0]) if a_eq else 0
    result = solve_standard_form(a_eq, b_eq, [Fraction(0)] * n)
    return result.x if result.optimal else None
