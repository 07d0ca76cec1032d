"""Exact angles as rational multiples of pi, with table-driven sine/cosine.

Supported angles are the pi/12 grid (values in Q(sqrt2, sqrt3, sqrt6)) and
the pi/10 grid (values in Q(sqrt5) extended by one nested radical), which
covers every regular polygon the generator can lay out exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UnsupportedAngle
from .scalar import ExactScalar, div, sqrt

_HALF = Fraction(1, 2)


@dataclass(frozen=True, order=True)
class ExactAngle:
    """q * pi radians, q stored reduced."""

    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))

    @staticmethod
    def from_degrees(deg: Fraction | int) -> "ExactAngle":
        return ExactAngle(Fraction(deg) / 180)

    @staticmethod
    def zero() -> "ExactAngle":
        return ExactAngle(Fraction(0))

    @staticmethod
    def full_turn() -> "ExactAngle":
        return ExactAngle(Fraction(2))

    def normalized(self) -> "ExactAngle":
        """Equivalent angle with q in [0, 2)."""
        return ExactAngle(self.q % 2)

    def degrees(self) -> Fraction:
        return self.q * 180

    def radians_scalar(self) -> ExactScalar:
        """The angle as an exact scalar (a pi-linear value)."""
        return ExactScalar.pi_multiple(self.q)

    def __add__(self, other: "ExactAngle") -> "ExactAngle":
        return ExactAngle(self.q + other.q)

    def __sub__(self, other: "ExactAngle") -> "ExactAngle":
        return ExactAngle(self.q - other.q)

    def __neg__(self) -> "ExactAngle":
        return ExactAngle(-self.q)

    def scale(self, k: Fraction | int) -> "ExactAngle":
        return ExactAngle(self.q * Fraction(k))

    @property
    def is_supported(self) -> bool:
        den = self.q.denominator
        return 12 % den == 0 or 10 % den == 0

    def __str__(self) -> str:
        return f"{self.q}*pi"


_TABLE: dict[Fraction, tuple[ExactScalar, ExactScalar]] | None = None


def _build_table() -> dict[Fraction, tuple[ExactScalar, ExactScalar]]:
    one = ExactScalar.one()
    zero = ExactScalar.zero()
    two = ExactScalar.rational(2)
    four = ExactScalar.rational(4)
    s2 = ExactScalar.sqrt_int(2)
    s3 = ExactScalar.sqrt_int(3)
    s5 = ExactScalar.sqrt_int(5)
    s6 = ExactScalar.sqrt_int(6)
    half = ExactScalar.rational(1, 2)

    # First quadrant on the pi/12 grid.
    table: dict[Fraction, tuple[ExactScalar, ExactScalar]] = {
        Fraction(0): (one, zero),
        Fraction(1, 12): (div(s6 + s2, four), div(s6 - s2, four)),
        Fraction(1, 6): (div(s3, two), half),
        Fraction(1, 4): (div(s2, two), div(s2, two)),
        Fraction(1, 3): (half, div(s3, two)),
        Fraction(5, 12): (div(s6 - s2, four), div(s6 + s2, four)),
        Fraction(1, 2): (zero, one),
    }
    # First quadrant on the pi/10 grid.
    ten = ExactScalar.rational(10)
    r_plus = sqrt(ten + two * s5)   # sqrt(10 + 2*sqrt5)
    r_minus = sqrt(ten - two * s5)  # sqrt(10 - 2*sqrt5)
    table[Fraction(1, 10)] = (div(r_plus, four), div(s5 - one, four))
    table[Fraction(1, 5)] = (div(s5 + one, four), div(r_minus, four))
    table[Fraction(3, 10)] = (div(r_minus, four), div(s5 + one, four))
    table[Fraction(2, 5)] = (div(s5 - one, four), div(r_plus, four))
    return table


def sin_cos(theta: ExactAngle) -> tuple[ExactScalar, ExactScalar]:
    """Exact (sin, cos) for angles on the pi/12 or pi/10 grid."""
    global _TABLE
    if not theta.is_supported:
        raise UnsupportedAngle(f"{theta} is not on the pi/12 or pi/10 grid")
    if _TABLE is None:
        _TABLE = _build_table()
    q = theta.q % 2  # reduce to [0, 2)
    sign_sin = 1
    sign_cos = 1
    if q > 1:  # third/fourth quadrant: sin flips
        q = 2 - q
        sign_sin = -1
    if q > _HALF:  # second quadrant: cos flips
        q = 1 - q
        sign_cos = -1
    cos_v, sin_v = _TABLE[q]
    if sign_sin < 0:
        sin_v = -sin_v
    if sign_cos < 0:
        cos_v = -cos_v
    return sin_v, cos_v


def cos(theta: ExactAngle) -> ExactScalar:
    return sin_cos(theta)[1]


def sin(theta: ExactAngle) -> ExactScalar:
    return sin_cos(theta)[0]


__all__ = ["ExactAngle", "sin_cos", "sin", "cos"]
