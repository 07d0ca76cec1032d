"""Certified rational interval arithmetic.

This is the numeric side of the kernel: every operation returns an interval
of exact `Fraction` endpoints that is guaranteed to contain the true real
value.  It backs zero-testing of expressions that cannot be decided
structurally, and serves as an independent oracle in the test suite.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from decimal import Decimal, getcontext, localcontext
from fractions import Fraction


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"inverted interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    def scale(self, c: Fraction) -> "Interval":
        if c >= 0:
            return Interval(self.lo * c, self.hi * c)
        return Interval(self.hi * c, self.lo * c)

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def entirely_above(self, x: Fraction) -> bool:
        return self.lo > x

    def entirely_below(self, x: Fraction) -> bool:
        return self.hi < x

    def midpoint_decimal(self, digits: int) -> str:
        """Decimal string of the midpoint with `digits` significant digits."""
        return fraction_to_decimal_str(self.midpoint, digits)


def exact(x: Fraction | int) -> Interval:
    f = Fraction(x)
    return Interval(f, f)


def sqrt_fraction(x: Fraction, digits: int) -> Interval:
    """Certified enclosure of sqrt(x) for x >= 0, width <= 10**-digits."""
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return Interval(Fraction(0), Fraction(0))
    scale = 10 ** digits
    # sqrt(p/q) = sqrt(p*q)/q; isqrt gives floor(sqrt(.)) exactly.
    p, q = x.numerator, x.denominator
    n = p * q * scale * scale
    r = math.isqrt(n)
    lo = Fraction(r, q * scale)
    hi = Fraction(r + 1, q * scale)
    return Interval(lo, hi)


def sqrt_interval(iv: Interval, digits: int) -> Interval:
    if iv.lo < 0:
        raise ValueError("sqrt of interval reaching below zero")
    return Interval(
        sqrt_fraction(iv.lo, digits).lo, sqrt_fraction(iv.hi, digits).hi
    )


_PI_CACHE: dict[int, Interval] = {}
_PI_LOCK = threading.Lock()


def pi_interval(digits: int) -> Interval:
    """Certified enclosure of pi, width well below 10**-digits.

    Backed by mpmath's interval constant; endpoints are exact binary
    rationals so the conversion to Fraction is lossless.
    """
    key = digits
    with _PI_LOCK:
        cached = _PI_CACHE.get(key)
    if cached is not None:
        return cached
    import mpmath

    prec = int(digits * 3.33) + 24
    old = mpmath.iv.prec
    try:
        mpmath.iv.prec = prec
        raw_lo, raw_hi = mpmath.iv.pi._mpi_
    finally:
        mpmath.iv.prec = old
    iv = Interval(_raw_mpf_to_fraction(raw_lo), _raw_mpf_to_fraction(raw_hi))
    with _PI_LOCK:
        _PI_CACHE[key] = iv
    return iv


def _raw_mpf_to_fraction(t) -> Fraction:
    sign, man, exp, _bc = t
    f = Fraction(man) * (Fraction(2) ** exp)
    return -f if sign else f


def fraction_to_decimal_str(x: Fraction, digits: int) -> str:
    """Deterministic decimal rendering with `digits` significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d, "f")


def decimal_str_to_fraction(s: str) -> Fraction:
    return Fraction(Decimal(s))


__all__ = [
    "Interval",
    "exact",
    "sqrt_fraction",
    "sqrt_interval",
    "pi_interval",
    "fraction_to_decimal_str",
    "decimal_str_to_fraction",
]
