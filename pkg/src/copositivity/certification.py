"""Krawczyk certification of the tracked endpoint and the final verdict.

The lifted critical system at s = 1 is a sum of exponentials in z = (tau, y).
Over a box B around the tracked point z,

    K(B) = z - Y H(z) + (I - Y J(B)) (B - z),   Y = J(z)^{-1} (floating point),

and K(B) strictly inside B proves that B holds exactly one zero. The t-interval
is the outward exp of the tau component.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .homotopy import ParameterHomotopy
from .interval import Interval, box, interval_sum

logger = logging.getLogger(__name__)


@dataclass
class KrawczykConfig:
    """Box radii schedule and refinement for krawczyk_certify."""

    initial_radius: float = 1e-8
    max_attempts: int = 6
    grow: float = 4.0
    shrink: float = 0.25
    refine_iters: int = 20

    def radii(self) -> List[float]:
        """Growing radii first, then shrinking ones, max_attempts in total."""
        n_grow = (self.max_attempts + 1) // 2
        growing = [self.initial_radius * self.grow**k for k in range(n_grow)]
        shrinking = [
            self.initial_radius * self.shrink**k
            for k in range(1, self.max_attempts - n_grow + 1)
        ]
        return growing + shrinking


@dataclass
class CertifiedBox:
    """Outcome of krawczyk_certify.

    ``box`` is the final (refined) enclosure; ``radius`` the half-widths of the
    box that first passed the inclusion test.
    """

    center: np.ndarray
    radius: np.ndarray
    unique: bool
    t_interval: Optional[Interval] = None
    box: List[Interval] = field(default_factory=list)
    attempts: int = 0

    def contains(self, z: Sequence[float]) -> bool:
        return bool(self.box) and all(iv.contains(v) for iv, v in zip(self.box, z))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "unique": self.unique,
            "t_interval": _interval_dict(self.t_interval),
            "attempts": self.attempts,
            "box": [[iv.lo, iv.hi] for iv in self.box],
        }


class VerdictKind(str, Enum):
    COPOSITIVE = "Copositive"
    NOT_COPOSITIVE = "NotCopositive"
    INCONCLUSIVE = "Inconclusive"
    TRIVIALLY_COPOSITIVE = "TriviallyCopositive"
    TRIVIALLY_NEGATIVE = "TriviallyNegative"

    @property
    def copositive(self) -> Optional[bool]:
        if self in (VerdictKind.COPOSITIVE, VerdictKind.TRIVIALLY_COPOSITIVE):
            return True
        if self in (VerdictKind.NOT_COPOSITIVE, VerdictKind.TRIVIALLY_NEGATIVE):
            return False
        return None


@dataclass
class Verdict:
    kind: VerdictKind
    certified: bool
    t_interval: Optional[Interval] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.certified and self.kind == VerdictKind.INCONCLUSIVE:
            raise ValueError("an inconclusive verdict cannot be certified")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "certified": self.certified,
            "t_interval": _interval_dict(self.t_interval),
            "details": self.details,
        }


def _interval_dict(iv: Optional[Interval]) -> Optional[List[float]]:
    return None if iv is None else [iv.lo, iv.hi]


def _terms(ph: ParameterHomotopy, zbox: Sequence[Interval]) -> Optional[List[Interval]]:
    """Enclosures of c_a exp(h(a) tau + <a, y>) over the box; None on overflow."""
    weights = ph.system.weights()
    terms = []
    for a, c in enumerate(ph.target):
        exponent = interval_sum(zbox[k] * weights[k, a] for k in range(ph.dim) if weights[k, a])
        term = exponent.exp() * float(c)
        if not term.is_finite():
            return None
        terms.append(term)
    return terms


def interval_residual(ph: ParameterHomotopy, zbox: Sequence[Interval]) -> Optional[List[Interval]]:
    """Enclosure of H(1, z) over the box."""
    terms = _terms(ph, zbox)
    if terms is None:
        return None
    matrix = ph.system.matrix
    return [
        interval_sum(terms[a] * matrix[i, a] for a in range(len(terms)) if matrix[i, a])
        for i in range(ph.dim)
    ]


def interval_jacobian(
    ph: ParameterHomotopy, zbox: Sequence[Interval]
) -> Optional[List[List[Interval]]]:
    """Enclosure of the (tau, y) Jacobian of H(1, .) over the box."""
    terms = _terms(ph, zbox)
    if terms is None:
        return None
    matrix, weights = ph.system.matrix, ph.system.weights()
    return [
        [
            interval_sum(
                terms[a] * (matrix[i, a] * weights[k, a])
                for a in range(len(terms))
                if matrix[i, a] and weights[k, a]
            )
            for k in range(ph.dim)
        ]
        for i in range(ph.dim)
    ]


def krawczyk_image(
    ph: ParameterHomotopy, center: np.ndarray, zbox: Sequence[Interval]
) -> Optional[List[Interval]]:
    """K(B) for the box ``zbox`` and a center inside it; None when it cannot be formed."""
    try:
        y_mat = np.linalg.inv(ph.jacobian(1.0, center))
    except (np.linalg.LinAlgError, ArithmeticError):
        return None
    if not np.all(np.isfinite(y_mat)):
        return None
    h_center = interval_residual(ph, [Interval.point(v) for v in center])
    j_box = interval_jacobian(ph, zbox)
    if h_center is None or j_box is None:
        return None

    n = ph.dim
    offsets = [zbox[k] - float(center[k]) for k in range(n)]
    image = []
    for i in range(n):
        newton = interval_sum(h_center[j] * y_mat[i, j] for j in range(n))
        correction = Interval(0.0, 0.0)
        for k in range(n):
            yj = interval_sum(j_box[j][k] * y_mat[i, j] for j in range(n))
            m_ik = (1.0 if i == k else 0.0) - yj
            correction = correction + m_ik * offsets[k]
        value = Interval.point(center[i]) - newton + correction
        if not value.is_finite():
            return None
        image.append(value)
    return image


def _refine(ph: ParameterHomotopy, current: List[Interval], iterations: int) -> List[Interval]:
    """Iterate B <- K(B) & B from a box already known to hold the unique zero."""
    for _ in range(iterations):
        center = np.array([iv.mid for iv in current])
        image = krawczyk_image(ph, center, current)
        if image is None:
            break
        try:
            narrowed = [k.intersect(b) for k, b in zip(image, current)]
        except ValueError:
            break
        old = max(iv.width for iv in current)
        new = max(iv.width for iv in narrowed)
        current = narrowed
        if new >= 0.99 * old:
            break
    return current


def krawczyk_certify(
    ph: ParameterHomotopy,
    center: Sequence[float],
    initial_radius: Optional[float] = None,
    config: Optional[KrawczykConfig] = None,
) -> CertifiedBox:
    """Certify a unique zero of H(1, .) near ``center``.

    Radii are scaled by max(1, |z_k|) per coordinate. On the first box that
    passes the inclusion test the enclosure is tightened by iterating the
    operator; failure of every attempt returns unique=False.

    Args:
        ph: Homotopy whose target system is certified
        center: Tracked endpoint (tau, y)
        initial_radius: Overrides ``config.initial_radius``
        config: Radius schedule

    Returns:
        CertifiedBox
    """
    config = config or KrawczykConfig()
    if initial_radius is not None:
        config = KrawczykConfig(
            initial_radius, config.max_attempts, config.grow, config.shrink, config.refine_iters
        )
    z = np.asarray(center, dtype=float)
    scale = np.maximum(1.0, np.abs(z))

    for attempt, radius in enumerate(config.radii(), start=1):
        radii = radius * scale
        zbox = box(z, radii)
        image = krawczyk_image(ph, z, zbox)
        if image is None:
            logger.debug("krawczyk attempt %d (r=%.1e): operator not defined", attempt, radius)
            continue
        if all(k.within_interior_of(b) for k, b in zip(image, zbox)):
            enclosure = _refine(ph, image, config.refine_iters)
            t_interval = enclosure[0].exp()
            logger.info(
                "certified unique zero after %d attempt(s), t in [%.17g, %.17g]",
                attempt,
                t_interval.lo,
                t_interval.hi,
            )
            return CertifiedBox(z, radii, True, t_interval, enclosure, attempt)
        logger.debug("krawczyk attempt %d (r=%.1e): image not inside the box", attempt, radius)

    logger.warning("Krawczyk certification failed after %d attempts", config.max_attempts)
    return CertifiedBox(z, config.initial_radius * scale, False, attempts=config.max_attempts)


def verdict_from_interval(
    t_interval: Optional[Interval], context: Optional[Dict[str, Any]] = None
) -> Verdict:
    """Compare a certified enclosure of t* with 1; no enclosure gives Inconclusive."""
    details = dict(context or {})
    if t_interval is None:
        details.setdefault("reason", "no certified enclosure of t*")
        return Verdict(VerdictKind.INCONCLUSIVE, False, None, details)
    if t_interval.lo > 1.0:
        return Verdict(VerdictKind.COPOSITIVE, True, t_interval, details)
    if t_interval.hi < 1.0:
        return Verdict(VerdictKind.NOT_COPOSITIVE, True, t_interval, details)
    details.setdefault("reason", "1 lies in the certified interval")
    return Verdict(VerdictKind.INCONCLUSIVE, False, t_interval, details)


def uncertified_verdict(t_star: float, context: Optional[Dict[str, Any]] = None) -> Verdict:
    """Verdict from a floating-point t* alone (--no-certify); never certified."""
    details = dict(context or {})
    details["t_star"] = t_star
    if not math.isfinite(t_star):
        return Verdict(VerdictKind.INCONCLUSIVE, False, None, details)
    kind = VerdictKind.COPOSITIVE if t_star >= 1.0 else VerdictKind.NOT_COPOSITIVE
    return Verdict(kind, False, None, details)


def certify_endpoint(
    ph: ParameterHomotopy,
    center: Sequence[float],
    config: Optional[KrawczykConfig] = None,
    context: Optional[Dict[str, Any]] = None,
) -> Tuple[CertifiedBox, Verdict]:
    """krawczyk_certify followed by verdict_from_interval."""
    certified = krawczyk_certify(ph, center, config=config)
    details = dict(context or {})
    details["krawczyk_attempts"] = certified.attempts
    interval = certified.t_interval if certified.unique else None
    return certified, verdict_from_interval(interval, details)
