"""Parameter homotopy from a constructed start system to the lifted critical system.

Unknowns are logarithmic: z = (tau, y) with t = exp(tau), x = exp(y), so that
positivity is automatic and high-degree monomials stay well conditioned.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from . import rational_lp
from .errors import InputError
from .lattice import SignedSupport
from .signomial import CriticalSystem, HeightFunction, Signomial, build_critical_system

logger = logging.getLogger(__name__)

# exp() of anything above this overflows binary64
_MAX_EXPONENT = 700.0


class HomotopyOverflow(ArithmeticError):
    """A monomial exp(h(a) tau + <a, y>) left the binary64 range."""

    pass


def starting_coefficients(support: SignedSupport) -> Tuple[Fraction, ...]:
    """Start coefficients making (t, x) = (1, 1) a singular zero at s = 0.

    On A+ these are convex weights of b_1 (the first point of A-) chosen by an
    exact LP that maximizes the smallest weight; b_1 gets 1 and every other
    point of A- gets 0.

    Raises:
        InputError: If the support is not full-dimensional or b_1 is not interior
    """
    if not support.a_minus:
        raise InputError("starting coefficients need a negative term")
    if support.affine_dim != support.ambient_dim:
        raise InputError("starting coefficients need a full-dimensional support")
    b1 = support.a_minus[0]
    k = len(support.a_plus)
    n = support.ambient_dim

    # variables: lambda_1..lambda_k, mu ; maximize mu subject to mu <= lambda_a
    c = [0] * k + [1]
    a_ub = [[-int(j == i) for j in range(k)] + [1] for i in range(k)]
    b_ub = [0] * k
    a_eq = [[1] * k + [0]] + [[a[i] for a in support.a_plus] + [0] for i in range(n)]
    b_eq = [1] + list(b1)
    result = rational_lp.maximize(c, a_ub, b_ub, a_eq, b_eq)
    if not result.optimal or result.objective <= 0:
        raise InputError(f"{b1} is not in the interior of conv(A+)")

    weights = tuple(result.x[:k])
    minus = (Fraction(1),) + (Fraction(0),) * (len(support.a_minus) - 1)
    return weights + minus


@dataclass(frozen=True, eq=False)
class ParameterHomotopy:
    """H(s, z)_i = sum_a C[i, a] (s c_a + (1 - s) c_hat_a) exp(h(a) tau + <a, y>)."""

    system: CriticalSystem
    target: np.ndarray
    start: np.ndarray
    start_exact: Tuple[Fraction, ...]

    @classmethod
    def build(cls, f: Signomial, h: HeightFunction) -> "ParameterHomotopy":
        system = build_critical_system(f, h)
        start_exact = starting_coefficients(f.support)
        start = np.array([float(v) for v in start_exact])
        ph = cls(system, system.coeffs.copy(), start, start_exact)
        residual = float(np.max(np.abs(ph.evaluate(0.0, np.zeros(system.n + 1)))))
        logger.debug("start coefficients %s", [str(v) for v in start_exact])
        if residual > 1e-12:
            raise InputError(f"start system residual {residual:.3e} exceeds 1e-12")
        return ph

    @classmethod
    def target_only(cls, f: Signomial, h: HeightFunction) -> "ParameterHomotopy":
        """The lifted critical system alone (start = target), for solvers that need no path."""
        system = build_critical_system(f, h)
        return cls(system, system.coeffs.copy(), system.coeffs.copy(), ())

    @property
    def dim(self) -> int:
        """Number of unknowns, n + 1."""
        return self.system.n + 1

    def coefficients(self, s: float) -> np.ndarray:
        return s * self.target + (1.0 - s) * self.start

    def exponentials(self, z: np.ndarray) -> np.ndarray:
        w = self.system.weights().T @ np.asarray(z, dtype=float)
        if np.max(w) > _MAX_EXPONENT or not np.all(np.isfinite(w)):
            raise HomotopyOverflow(f"monomial exponent {np.max(w):.1f} out of range")
        return np.exp(w)

    def _rows(self, weights: np.ndarray, terms: np.ndarray) -> np.ndarray:
        matrix = self.system.matrix
        return np.array([math.fsum(row * weights * terms) for row in matrix])

    def evaluate(self, s: float, z: np.ndarray) -> np.ndarray:
        """Residual vector H(s, z), each row summed with math.fsum."""
        terms = self.coefficients(s) * self.exponentials(z)
        return self._rows(np.ones_like(terms), terms)

    def term_magnitudes(self, s: float, z: np.ndarray) -> np.ndarray:
        """Per-row sum of |C[i, a]| * term, the scale the residual is measured against."""
        terms = self.coefficients(s) * self.exponentials(z)
        return np.abs(self.system.matrix) @ terms

    def scaled_residual(self, s: float, z: np.ndarray) -> float:
        """max_i |H_i| / max(1, sum_a |C[i, a] term_a|)."""
        values = self.evaluate(s, z)
        scale = np.maximum(1.0, self.term_magnitudes(s, z))
        return float(np.max(np.abs(values) / scale))

    def jacobian(self, s: float, z: np.ndarray) -> np.ndarray:
        """(n+1) x (n+1) Jacobian of H with respect to z = (tau, y)."""
        terms = self.coefficients(s) * self.exponentials(z)
        weights = self.system.weights()
        return np.column_stack([self._rows(weights[k], terms) for k in range(self.dim)])

    def ds(self, s: float, z: np.ndarray) -> np.ndarray:
        """dH/ds: the same sums with (c_a - c_hat_a) in place of the coefficients."""
        terms = (self.target - self.start) * self.exponentials(z)
        return self._rows(np.ones_like(terms), terms)

    def dtau_first_row(self, s: float, z: np.ndarray) -> float:
        """dH_0/dtau; only lifted (negative) terms contribute, so it is negative on the path."""
        terms = self.coefficients(s) * self.exponentials(z)
        return math.fsum(self.system.matrix[0] * self.system.heights * terms)


def eval_homotopy(ph: ParameterHomotopy, s: float, tau: float, y) -> np.ndarray:
    return ph.evaluate(s, np.concatenate([[tau], np.asarray(y, dtype=float)]))


def jac_homotopy(ph: ParameterHomotopy, s: float, tau: float, y) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobian in (tau, y) and the dH/ds column at one point."""
    z = np.concatenate([[tau], np.asarray(y, dtype=float)])
    return ph.jacobian(s, z), ph.ds(s, z)


def hessian_det_at(ph: ParameterHomotopy, z: np.ndarray, s: float = 1.0) -> float:
    """Determinant of the (tau, y) Jacobian after scaling each row to unit max-norm."""
    jac = ph.jacobian(s, z)
    scale = np.max(np.abs(jac), axis=1)
    scale[scale == 0] = 1.0
    return float(np.linalg.det(jac / scale[:, np.newaxis]))
