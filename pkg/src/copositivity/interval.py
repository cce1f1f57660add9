"""Closed intervals with outward rounding.

Every operation computes the binary64 result and then widens each endpoint by
one ulp with math.nextafter. This is slightly conservative compared with
directed rounding but needs no control over the FPU rounding mode.
"""

import math
import sys
from dataclasses import dataclass
from typing import Iterable, List, Union

Real = Union[int, float]


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class Interval:
    """The closed interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, value: Real) -> "Interval":
        v = float(value)
        return cls(v, v)

    @classmethod
    def around(cls, center: Real, radius: Real) -> "Interval":
        return cls(_down(center - radius), _up(center + radius))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, value: Real) -> bool:
        return self.lo <= value <= self.hi

    def within_interior_of(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: Union["Interval", Real]) -> "Interval":
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))

    def __radd__(self, other: Real) -> "Interval":
        return self.__add__(other)

    def __sub__(self, other: Union["Interval", Real]) -> "Interval":
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(_down(self.lo - other.hi), _up(self.hi - other.lo))

    def __rsub__(self, other: Real) -> "Interval":
        return Interval.point(other) - self

    def __mul__(self, other: Union["Interval", Real]) -> "Interval":
        if not isinstance(other, Interval):
            return self.scale(other)
        products = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ]
        return Interval(_down(min(products)), _up(max(products)))

    def __rmul__(self, other: Real) -> "Interval":
        return self.scale(other)

    def scale(self, factor: Real) -> "Interval":
        f = float(factor)
        if f == 0:
            return Interval(0.0, 0.0)
        a, b = self.lo * f, self.hi * f
        return Interval(_down(min(a, b)), _up(max(a, b)))

    def exp(self) -> "Interval":
        """Outward enclosure of exp; an overflowing upper end becomes +inf."""
        try:
            lo = max(0.0, _down(math.exp(self.lo)))
        except OverflowError:
            lo = sys.float_info.max
        try:
            hi = _up(math.exp(self.hi))
        except OverflowError:
            hi = math.inf
        return Interval(lo, hi)


def interval_sum(items: Iterable[Interval]) -> Interval:
    total = Interval(0.0, 0.0)
    for item in items:
        total = total + item
    return total


def box(center: Iterable[float], radius: Iterable[float]) -> List[Interval]:
    return [Interval.around(c, r) for c, r in zip(center, radius)]
