"""Exact 2D vector math and curve-curve intersection solvers.

Everything here is pure kernel arithmetic: inputs and outputs are exact
scalars, and all predicates are certified (structural or interval-backed).
Degenerate configurations surface as empty result lists or kernel errors;
callers decide whether that aborts or retries an operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactnum import ExactScalar, div, is_zero, sqrt
from .exactnum.errors import KernelError


@dataclass(frozen=True)
class Vec:
    x: ExactScalar
    y: ExactScalar

    @staticmethod
    def of(x, y) -> "Vec":
        def conv(v):
            if isinstance(v, ExactScalar):
                return v
            return ExactScalar.from_fraction(Fraction(v))
        return Vec(conv(x), conv(y))

    def __add__(self, o: "Vec") -> "Vec":
        return Vec(self.x + o.x, self.y + o.y)

    def __sub__(self, o: "Vec") -> "Vec":
        return Vec(self.x - o.x, self.y - o.y)

    def __neg__(self) -> "Vec":
        return Vec(-self.x, -self.y)

    def scale(self, k) -> "Vec":
        k = k if isinstance(k, ExactScalar) else ExactScalar.from_fraction(Fraction(k))
        return Vec(self.x * k, self.y * k)

    def dot(self, o: "Vec") -> ExactScalar:
        return self.x * o.x + self.y * o.y

    def cross(self, o: "Vec") -> ExactScalar:
        return self.x * o.y - self.y * o.x

    def norm_sq(self) -> ExactScalar:
        return self.dot(self)

    def norm(self) -> ExactScalar:
        return sqrt(self.norm_sq())

    def perp(self) -> "Vec":
        """Rotation by +90 degrees."""
        return Vec(-self.y, self.x)

    def midpoint(self, o: "Vec") -> "Vec":
        half = ExactScalar.rational(1, 2)
        return Vec((self.x + o.x) * half, (self.y + o.y) * half)

    def same_point(self, o: "Vec") -> bool:
        return is_zero(self.x - o.x).is_zero and is_zero(self.y - o.y).is_zero

    def float_xy(self) -> tuple[float, float]:
        return (
            float(self.x.interval(15).midpoint),
            float(self.y.interval(15).midpoint),
        )


def rotate(v: Vec, sin_t: ExactScalar, cos_t: ExactScalar) -> Vec:
    return Vec(v.x * cos_t - v.y * sin_t, v.x * sin_t + v.y * cos_t)


def reflect_across_line(p: Vec, a: Vec, b: Vec) -> Vec:
    """Mirror image of p across the line through a and b (a != b)."""
    d = b - a
    t = div(d.dot(p - a), d.norm_sq())
    foot = a + d.scale(t)
    return foot + (foot - p)


def project_onto_line(p: Vec, a: Vec, b: Vec) -> Vec:
    d = b - a
    t = div(d.dot(p - a), d.norm_sq())
    return a + d.scale(t)


def _unit_interval_contains(t: ExactScalar) -> bool:
    return t.sign() >= 0 and (ExactScalar.one() - t).sign() >= 0


def segment_segment(p1: Vec, p2: Vec, p3: Vec, p4: Vec) -> list[Vec]:
    """Proper intersection of closed segments; collinear overlap yields []."""
    d1 = p2 - p1
    d2 = p4 - p3
    denom = d1.cross(d2)
    if is_zero(denom).is_zero:
        return []
    w = p3 - p1
    t = div(w.cross(d2), denom)
    u = div(w.cross(d1), denom)
    if _unit_interval_contains(t) and _unit_interval_contains(u):
        return [p1 + d1.scale(t)]
    return []


def segment_circle(p1: Vec, p2: Vec, center: Vec, radius: ExactScalar) -> list[Vec]:
    d = p2 - p1
    f = p1 - center
    a = d.norm_sq()
    if is_zero(a).is_zero:
        return []
    b = f.dot(d) * ExactScalar.rational(2)
    c = f.norm_sq() - radius * radius
    disc = b * b - a * c * ExactScalar.rational(4)
    sgn = disc.sign()
    if sgn < 0:
        return []
    two_a = a * ExactScalar.rational(2)
    if sgn == 0:
        ts = [div(-b, two_a)]
    else:
        sd = sqrt(disc)
        ts = [div(-b - sd, two_a), div(-b + sd, two_a)]
    return [p1 + d.scale(t) for t in ts if _unit_interval_contains(t)]


def circle_circle(c1: Vec, r1: ExactScalar, c2: Vec, r2: ExactScalar) -> list[Vec]:
    d = c2 - c1
    d2 = d.norm_sq()
    if is_zero(d2).is_zero:
        return []  # concentric (coincident circles are treated as degenerate)
    a = div(r1 * r1 - r2 * r2 + d2, d2 * ExactScalar.rational(2))
    foot = c1 + d.scale(a)
    h2 = r1 * r1 - a * a * d2
    sgn = h2.sign()
    if sgn < 0:
        return []
    if sgn == 0:
        return [foot]
    k = sqrt(div(h2, d2))
    offset = d.perp().scale(k)
    return [foot - offset, foot + offset]


def point_on_segment(p: Vec, a: Vec, b: Vec) -> bool:
    d = b - a
    if not is_zero(d.cross(p - a)).is_zero:
        return False
    t_num = d.dot(p - a)
    return t_num.sign() >= 0 and (d.norm_sq() - t_num).sign() >= 0


def point_on_circle(p: Vec, center: Vec, radius: ExactScalar) -> bool:
    return is_zero((p - center).norm_sq() - radius * radius).is_zero


def point_in_ccw_sweep(u: Vec, w: Vec, v: Vec) -> bool:
    """Is direction v inside the counterclockwise sweep from u to w?

    u, w, v are nonzero vectors from a common center; the sweep is the arc
    traced rotating u counterclockwise onto w (full turn excluded).
    """
    cuw = u.cross(w).sign()
    duw = u.dot(w).sign()
    if cuw == 0 and duw > 0:
        return False  # zero sweep
    if cuw > 0:  # sweep < pi
        return u.cross(v).sign() >= 0 and v.cross(w).sign() >= 0
    if cuw == 0:  # sweep == pi
        return u.cross(v).sign() >= 0
    # sweep > pi: inside unless strictly within the complementary cw sweep
    return not (w.cross(v).sign() > 0 and v.cross(u).sign() > 0)


def try_kernel(fn, *args):
    """Run an exact-geometry computation, mapping kernel failures to None."""
    try:
        return fn(*args)
    except KernelError:
        return None


__all__ = [
    "Vec",
    "rotate",
    "reflect_across_line",
    "project_onto_line",
    "segment_segment",
    "segment_circle",
    "circle_circle",
    "point_on_segment",
    "point_on_circle",
    "point_in_ccw_sweep",
    "try_kernel",
]
