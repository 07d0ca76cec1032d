"""Exact scalar arithmetic over Q-linear combinations of radical basis terms.

A value is stored as a finite map from basis terms to nonzero rational
coefficients.  Each basis term is sqrt(root) * sqrt(inner) * pi**pi_pow,
where `root` is a squarefree positive integer and `inner` is an optional
nested radicand: a content-free integer combination of plain square roots
(nesting depth is capped at one level).  The empty map is exactly zero.

Canonical form is unique for a given construction history: plain-radical
combinations are canonical per value (square roots of distinct squarefree
integers are linearly independent over Q, and pi is transcendental), so
structural equality on plain values is value equality.  Nested radicands
are canonicalized by content extraction and by rewriting conjugate-class
radicands (norm a**2 - n*b**2 equal to t**2 or n*t**2) onto a single
representative; radicands that remain distinct after that are compared by
certified interval evaluation.  Full denesting is deliberately out of
scope: sqrt(3 + 2*sqrt(2)) stays nested even though it equals 1 + sqrt(2).

Term order for serialization: ascending (pi_pow, radicand key), with
integer radicands ordered numerically before nested ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .errors import (
    DivisionByZero,
    NegativeRadicand,
    NestingDepthExceeded,
    PrecisionExhausted,
    UnrationalizableDenominator,
    UnsupportedPiPower,
)
from .intervals import Interval, exact, pi_interval, sqrt_fraction, sqrt_interval

# A nested radicand: ((radicand, integer coefficient), ...) sorted by radicand,
# radicands squarefree (1 for the rational part), coefficient gcd equal to 1.
InnerKey = tuple[tuple[int, int], ...]


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = m**2 * s with s squarefree; returns (s, m).  Requires n >= 1."""
    s, m = 1, 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            m *= d ** (e // 2)
            if e % 2:
                s *= d
        d += 1 if d == 2 else 2
    return s * n, m


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def _prime_factors(n: int) -> set[int]:
    out = set()
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.add(n)
    return out


@dataclass(frozen=True)
class BasisTerm:
    """sqrt(root) * sqrt(inner value) * pi**pi_pow."""

    root: int
    inner: Optional[InnerKey] = None
    pi_pow: int = 0

    def sort_key(self):
        if self.inner is None:
            return (self.pi_pow, 0, self.root, ())
        return (self.pi_pow, 1, self.root, self.inner)

    @property
    def is_rational_unit(self) -> bool:
        return self.root == 1 and self.inner is None and self.pi_pow == 0


RATIONAL_UNIT = BasisTerm(1, None, 0)
PI_UNIT = BasisTerm(1, None, 1)

_TermMap = dict[BasisTerm, Fraction]


def _content(coeffs: Iterable[Fraction]) -> Fraction:
    num = 0
    den = 1
    for c in coeffs:
        num = math.gcd(num, abs(c.numerator))
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den)


def _conjugate_reduce(w: dict[int, int]) -> Optional[tuple[dict[int, int], dict[int, Fraction]]]:
    """Rewrite sqrt(a + b*sqrt(n)) with b < 0 onto the b > 0 representative.

    Applies when the norm N = a**2 - n*b**2 is positive and sqrt(N) lies in
    Q(sqrt(n)) (N = t**2 or N = n*t**2).  Returns (conjugate radicand,
    coefficient as {radicand: Fraction}) with sqrt(w) = coeff * sqrt(conj),
    or None when no rewrite applies.  Nesting depth is unchanged.
    """
    if set(w) != {1} and len(w) == 2 and 1 in w:
        n = next(r for r in w if r != 1)
        a, b = w[1], w[n]
        if b >= 0:
            return None
        norm = a * a - n * b * b
        if norm <= 0:
            return None
        if _is_square(norm):
            t = math.isqrt(norm)
            # sqrt(w) = (t/N) * (a + b*sqrt(n)) * sqrt(conj)
            coeff = {1: Fraction(t * a, norm), n: Fraction(t * b, norm)}
        elif norm % n == 0 and _is_square(norm // n):
            t = math.isqrt(norm // n)
            # sqrt(N) = t*sqrt(n); sqrt(w) = (t/N) * (a*sqrt(n) + b*n) * sqrt(conj)
            coeff = {1: Fraction(t * b * n, norm), n: Fraction(t * a, norm)}
        else:
            return None
        return {1: a, n: -b}, coeff
    return None


class ExactScalar:
    """Immutable exact number; supports +, -, *, and exact division."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[_TermMap] = None, _internal: bool = False):
        if terms is None:
            object.__setattr__(self, "_terms", ())
            return
        if not _internal:
            terms = {t: Fraction(c) for t, c in terms.items() if c != 0}
        items = tuple(sorted(terms.items(), key=lambda kv: kv[0].sort_key()))
        object.__setattr__(self, "_terms", items)

    def __setattr__(self, *a):  # immutability guard
        raise AttributeError("ExactScalar is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "ExactScalar":
        return _ZERO

    @staticmethod
    def one() -> "ExactScalar":
        return _ONE

    @staticmethod
    def from_fraction(x: Fraction | int) -> "ExactScalar":
        f = Fraction(x)
        if f == 0:
            return _ZERO
        return ExactScalar({RATIONAL_UNIT: f})

    @staticmethod
    def rational(p: int, q: int = 1) -> "ExactScalar":
        return ExactScalar.from_fraction(Fraction(p, q))

    @staticmethod
    def pi_multiple(coeff: Fraction | int) -> "ExactScalar":
        f = Fraction(coeff)
        if f == 0:
            return _ZERO
        return ExactScalar({PI_UNIT: f})

    @staticmethod
    def sqrt_int(n: int) -> "ExactScalar":
        if n < 0:
            raise NegativeRadicand(f"sqrt({n})")
        if n == 0:
            return _ZERO
        s, m = _squarefree_split(n)
        if s == 1:
            return ExactScalar.from_fraction(m)
        return ExactScalar({BasisTerm(s): Fraction(m)})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> tuple[tuple[BasisTerm, Fraction], ...]:
        return self._terms

    def __iter__(self) -> Iterator[tuple[BasisTerm, Fraction]]:
        return iter(self._terms)

    @property
    def is_structural_zero(self) -> bool:
        return not self._terms

    @property
    def is_rational(self) -> bool:
        return all(t.is_rational_unit for t, _ in self._terms)

    def as_fraction(self) -> Optional[Fraction]:
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and self._terms[0][0].is_rational_unit:
            return self._terms[0][1]
        return None

    @property
    def has_nested(self) -> bool:
        return any(t.inner is not None for t, _ in self._terms)

    @property
    def has_pi(self) -> bool:
        return any(t.pi_pow for t, _ in self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactScalar) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        return f"ExactScalar({self.to_canonical_string()!r})"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        other = _coerce(other)
        out: _TermMap = dict(self._terms)
        for t, c in other._terms:
            acc = out.get(t, Fraction(0)) + c
            if acc:
                out[t] = acc
            else:
                out.pop(t, None)
        return ExactScalar(out, _internal=True)

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar({t: -c for t, c in self._terms}, _internal=True)

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ExactScalar":
        return _coerce(other) + (-self)

    def __mul__(self, other: "ExactScalar") -> "ExactScalar":
        other = _coerce(other)
        out: _TermMap = {}
        for t1, c1 in self._terms:
            for t2, c2 in other._terms:
                for t3, c3 in _mul_terms(t1, t2):
                    acc = out.get(t3, Fraction(0)) + c1 * c2 * c3
                    if acc:
                        out[t3] = acc
                    else:
                        out.pop(t3, None)
        return ExactScalar(out, _internal=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactScalar":
        return div(self, _coerce(other))

    def __rtruediv__(self, other) -> "ExactScalar":
        return div(_coerce(other), self)

    def pow_int(self, n: int) -> "ExactScalar":
        if abs(n) > 64:
            raise ValueError(f"exponent {n} out of supported range")
        if n < 0:
            return div(_ONE, self.pow_int(-n))
        acc = _ONE
        for _ in range(n):
            acc = acc * self
        return acc

    # -- numeric evaluation and sign --------------------------------------

    def interval(self, digits: int) -> Interval:
        """Certified enclosure; width at most 10**(-digits + 2)."""
        if digits < 10:
            raise ValueError("digits must be >= 10")
        work = digits + 10
        for _ in range(6):
            iv = self._interval_at(work)
            if iv.width <= Fraction(1, 10 ** (digits - 2)):
                return iv
            work *= 2
        raise PrecisionExhausted("interval did not converge")

    def _interval_at(self, work: int) -> Interval:
        total = exact(0)
        for term, coeff in self._terms:
            iv = exact(1)
            if term.root != 1:
                iv = iv * sqrt_fraction(Fraction(term.root), work)
            if term.inner is not None:
                inner_iv = _inner_interval(term.inner, work)
                bump = work
                while inner_iv.lo <= 0:
                    bump *= 2
                    inner_iv = _inner_interval(term.inner, bump)
                    if bump > 16 * work:
                        raise PrecisionExhausted("nested radicand straddles zero")
                iv = iv * sqrt_interval(inner_iv, work)
            if term.pi_pow:
                iv = iv * pi_interval(work)
            total = total + iv.scale(coeff)
        return total

    def sign(self, max_digits: int = 200) -> int:
        """Certified sign in {-1, 0, +1}; raises PrecisionExhausted if the
        value cannot be separated from zero at max_digits."""
        if not self._terms:
            return 0
        coeff_signs = {c > 0 for _, c in self._terms}
        if coeff_signs == {True}:
            return 1
        if coeff_signs == {False}:
            return -1
        if not self.has_nested:
            # Distinct plain basis terms are linearly independent over Q,
            # so a non-empty map is provably nonzero; certify the side.
            pass
        digits = 30
        while digits <= max_digits:
            iv = self.interval(digits)
            if iv.entirely_above(Fraction(0)):
                return 1
            if iv.entirely_below(Fraction(0)):
                return -1
            digits = min(max_digits, digits * 3) if digits < max_digits else max_digits + 1
        raise PrecisionExhausted(f"sign undecided at {max_digits} digits")

    def abs(self) -> "ExactScalar":
        return -self if self.sign() < 0 else self

    # -- serialization -----------------------------------------------------

    def to_canonical_string(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (term, coeff) in enumerate(self._terms):
            body = _term_canonical(term, coeff)
            if i == 0:
                parts.append(body if coeff > 0 else "-" + body)
            else:
                parts.append(("+" if coeff > 0 else "-") + body)
        return "".join(parts)

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (term, coeff) in enumerate(self._terms):
            body = _term_latex(term, coeff)
            if i == 0:
                parts.append(body if coeff > 0 else "-" + body)
            else:
                parts.append(("+" if coeff > 0 else "-") + body)
        return "".join(parts)


def _coerce(x) -> ExactScalar:
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactScalar.from_fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to ExactScalar")


_ZERO = ExactScalar()
_ONE = ExactScalar({BasisTerm(1): Fraction(1)})


# -- term-level multiplication ---------------------------------------------


def _mul_terms(t1: BasisTerm, t2: BasisTerm) -> list[tuple[BasisTerm, Fraction]]:
    pi_pow = t1.pi_pow + t2.pi_pow
    if pi_pow > 1:
        raise UnsupportedPiPower("product would carry pi**2")
    g = math.gcd(t1.root, t2.root)
    root = (t1.root // g) * (t2.root // g)
    coeff = Fraction(g)

    if t1.inner is None and t2.inner is None:
        return [(BasisTerm(root, None, pi_pow), coeff)]

    if t1.inner is not None and t2.inner is not None:
        if t1.inner == t2.inner:
            # sqrt(x)*sqrt(x) = x: expand the inner value.
            out = []
            for rad, c in t1.inner:
                g2 = math.gcd(root, rad)
                out.append(
                    (
                        BasisTerm((root // g2) * (rad // g2), None, pi_pow),
                        coeff * c * g2,
                    )
                )
            return out
        product = _inner_mul(dict(t1.inner), dict(t2.inner))
        out = []
        for rt, inner, c in _sqrt_of_plain(product):
            g2 = math.gcd(root, rt)
            out.append(
                (
                    BasisTerm((root // g2) * (rt // g2), inner, pi_pow),
                    coeff * c * g2,
                )
            )
        return out

    inner = t1.inner if t1.inner is not None else t2.inner
    return [(BasisTerm(root, inner, pi_pow), coeff)]


def _inner_mul(x: dict[int, int | Fraction], y: dict[int, int | Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for r1, a in x.items():
        for r2, b in y.items():
            g = math.gcd(r1, r2)
            rad = (r1 // g) * (r2 // g)
            c = Fraction(a) * Fraction(b) * g
            acc = out.get(rad, Fraction(0)) + c
            if acc:
                out[rad] = acc
            else:
                out.pop(rad, None)
    return out


def _sqrt_of_plain(v: dict[int, Fraction]) -> list[tuple[int, Optional[InnerKey], Fraction]]:
    """Normalize sqrt of a positive plain (integer-radicand) combination.

    Returns [(root, inner, coeff)] basis factors whose weighted sum of
    sqrt(root)*sqrt(inner) values equals sqrt(v).  Positivity of v is the
    caller's contract.
    """
    v = {r: c for r, c in v.items() if c}
    if not v:
        return []
    if set(v) == {1}:
        # Rational radicand: sqrt(p/q) = sqrt(p*q)/q.
        c = v[1]
        s, m = _squarefree_split(c.numerator * c.denominator)
        return [(s, None, Fraction(m, c.denominator))]
    content = _content(v.values())
    w = {r: int(c / content) for r, c in v.items()}
    # sqrt(content) = m*sqrt(s)/den
    s, m = _squarefree_split(content.numerator * content.denominator)
    lead = Fraction(m, content.denominator)

    reduced = _conjugate_reduce(w)
    if reduced is None:
        inner = tuple(sorted(w.items()))
        return [(s, inner, lead)]
    conj, coeff = reduced
    inner = tuple(sorted(conj.items()))
    out = []
    for rad, c in coeff.items():
        if not c:
            continue
        g = math.gcd(s, rad)
        out.append(((s // g) * (rad // g), inner, lead * c * g))
    return out


def _inner_interval(inner: InnerKey, work: int) -> Interval:
    total = exact(0)
    for rad, c in inner:
        if rad == 1:
            total = total + exact(Fraction(c))
        else:
            total = total + sqrt_fraction(Fraction(rad), work).scale(Fraction(c))
    return total


# -- division ---------------------------------------------------------------


def div(a: ExactScalar, b: ExactScalar) -> ExactScalar:
    if b.is_structural_zero:
        raise DivisionByZero("exact division by zero")
    b0, b1 = _split_pi(b)
    a0, a1 = _split_pi(a)
    if not b1:
        inv = _invert_algebraic(ExactScalar(b0, _internal=True))
        return a * inv
    if not b0:
        # a / (b1 * pi): representable only when a is itself a pi multiple.
        if a0:
            raise UnrationalizableDenominator("pi remains in the denominator")
        return div(ExactScalar(a1, _internal=True), ExactScalar(b1, _internal=True))
    s_a0 = ExactScalar(a0, _internal=True)
    s_a1 = ExactScalar(a1, _internal=True)
    s_b0 = ExactScalar(b0, _internal=True)
    s_b1 = ExactScalar(b1, _internal=True)
    if (s_a0 * s_b1)._terms == (s_a1 * s_b0)._terms:
        return div(s_a0, s_b0)
    raise UnrationalizableDenominator("pi-linear denominator does not cancel")


def _split_pi(x: ExactScalar) -> tuple[_TermMap, _TermMap]:
    plain: _TermMap = {}
    pi_part: _TermMap = {}
    for t, c in x._terms:
        if t.pi_pow:
            pi_part[BasisTerm(t.root, t.inner, 0)] = c
        else:
            plain[t] = c
    return plain, pi_part


def _invert_algebraic(d: ExactScalar) -> ExactScalar:
    if d.is_structural_zero:
        raise DivisionByZero("exact division by zero")
    if d.has_nested:
        raise UnrationalizableDenominator("nested radicand in denominator")
    roots = {t.root for t, _ in d._terms if t.root != 1}
    primes: set[int] = set()
    for r in roots:
        primes |= _prime_factors(r)
    if len(primes) > 2:
        raise UnrationalizableDenominator(
            "three or more independent radicals in denominator"
        )
    num = _ONE
    den = d
    for p in sorted(primes):
        conj = ExactScalar(
            {t: (-c if t.root % p == 0 else c) for t, c in den._terms},
            _internal=True,
        )
        num = num * conj
        den = den * conj
    r = den.as_fraction()
    if r is None or r == 0:
        raise UnrationalizableDenominator("rationalization failed to terminate")
    return ExactScalar({t: c / r for t, c in num._terms}, _internal=True)


# -- square root -------------------------------------------------------------


def sqrt(a: ExactScalar) -> ExactScalar:
    """Exact square root of a provably nonnegative value.

    Rational perfect squares reduce exactly; anything else becomes a single
    nested-radical term (no denesting).  Raises NestingDepthExceeded when
    the radicand already nests a radical, NegativeRadicand when the sign
    certificate is negative.
    """
    if a.has_nested:
        raise NestingDepthExceeded("radicand already contains a nested radical")
    if a.has_pi:
        raise UnsupportedPiPower("pi under a radical is not representable")
    sgn = a.sign()
    if sgn < 0:
        raise NegativeRadicand(a.to_canonical_string())
    if sgn == 0:
        return _ZERO
    plain = {t.root: c for t, c in a._terms}
    out: _TermMap = {}
    for root, inner, coeff in _sqrt_of_plain(plain):
        term = BasisTerm(root, inner, 0)
        out[term] = out.get(term, Fraction(0)) + coeff
    return ExactScalar(out)


# -- zero test ---------------------------------------------------------------


@dataclass(frozen=True)
class ZeroVerdict:
    """Tri-state zero-test outcome."""

    mode: str  # "symbolic" | "numeric"
    is_zero: bool

    @property
    def symbolic_zero(self) -> bool:
        return self.mode == "symbolic" and self.is_zero


SYMBOLIC_ZERO = ZeroVerdict("symbolic", True)
SYMBOLIC_NONZERO = ZeroVerdict("symbolic", False)

ZERO_THRESHOLD = Fraction(1, 10 ** 60)
ZERO_DIGITS = 80
ZERO_DIGITS_ESCALATED = 200


def is_zero(a: ExactScalar) -> ZeroVerdict:
    """Decide whether `a` is exactly zero.

    Structural emptiness is symbolic zero.  A non-empty map without nested
    radicands is symbolically nonzero (linear independence of the basis).
    With nested radicands present, a same-signed coefficient map is nonzero
    (all basis values are positive reals); otherwise the verdict comes
    from certified interval evaluation at 80 digits against a 10**-60
    threshold, escalating once to 200 digits before PrecisionExhausted.
    """
    if a.is_structural_zero:
        return SYMBOLIC_ZERO
    if not a.has_nested:
        return SYMBOLIC_NONZERO
    coeff_signs = {c > 0 for _, c in a.terms}
    if len(coeff_signs) == 1:
        return SYMBOLIC_NONZERO
    for digits in (ZERO_DIGITS, ZERO_DIGITS_ESCALATED):
        iv = a.interval(digits)
        if iv.entirely_above(ZERO_THRESHOLD) or iv.entirely_below(-ZERO_THRESHOLD):
            return ZeroVerdict("numeric", False)
        if iv.lo > -ZERO_THRESHOLD and iv.hi < ZERO_THRESHOLD:
            return ZeroVerdict("numeric", True)
    raise PrecisionExhausted("zero test inconclusive at 200 digits")


def equals(a: ExactScalar, b: ExactScalar) -> bool:
    return is_zero(a - b).is_zero


# -- term rendering ----------------------------------------------------------


def _merged_radicand(term: BasisTerm) -> dict[int, int]:
    """Radicand as printed: root * inner value, integer coefficients."""
    assert term.inner is not None
    return {rad: c * term.root for rad, c in term.inner}


def _radicand_canonical(term: BasisTerm) -> str:
    if term.inner is None:
        return str(term.root)
    parts = []
    for i, (rad, c) in enumerate(sorted(_merged_radicand(term).items())):
        body = _simple_term_canonical(rad, abs(c))
        if i == 0:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+" if c > 0 else "-") + body)
    return "".join(parts)


def _simple_term_canonical(rad: int, c: int) -> str:
    if rad == 1:
        return str(c)
    if c == 1:
        return f"sqrt({rad})"
    return f"{c}*sqrt({rad})"


def _term_canonical(term: BasisTerm, coeff: Fraction) -> str:
    p, q = abs(coeff.numerator), coeff.denominator
    factors = []
    if term.root != 1 or term.inner is not None:
        factors.append(f"sqrt({_radicand_canonical(term)})")
    if term.pi_pow:
        factors.append("pi")
    if p != 1 or not factors:
        factors.insert(0, str(p))
    body = "*".join(factors)
    if q != 1:
        body += f"/{q}"
    return body


def _radicand_latex(term: BasisTerm) -> str:
    if term.inner is None:
        return str(term.root)
    parts = []
    for i, (rad, c) in enumerate(sorted(_merged_radicand(term).items())):
        if rad == 1:
            body = str(abs(c))
        elif abs(c) == 1:
            body = rf"\sqrt{{{rad}}}"
        else:
            body = rf"{abs(c)}\sqrt{{{rad}}}"
        if i == 0:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+" if c > 0 else "-") + body)
    return "".join(parts)


def _term_latex(term: BasisTerm, coeff: Fraction) -> str:
    p, q = abs(coeff.numerator), coeff.denominator
    sym = ""
    if term.root != 1 or term.inner is not None:
        sym += rf"\sqrt{{{_radicand_latex(term)}}}"
    if term.pi_pow:
        sym += r"\pi"
    num = sym if (p == 1 and sym) else f"{p}{sym}"
    if q == 1:
        return num
    return rf"\frac{{{num}}}{{{q}}}"


__all__ = [
    "BasisTerm",
    "ExactScalar",
    "ZeroVerdict",
    "SYMBOLIC_ZERO",
    "SYMBOLIC_NONZERO",
    "div",
    "sqrt",
    "is_zero",
    "equals",
]
