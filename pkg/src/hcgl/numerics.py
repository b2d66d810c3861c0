"""Exact scalar arithmetic for the gadget toolkit.

Three layers, from cheapest to richest:

  * rationals -- ``fractions.Fraction`` (always reduced, positive denominator),
    with "p/q" string (de)serialization helpers.
  * CubicNumber -- elements a + b*t + c*t^2 of Q[t]/(t^3 - r) for a fixed
    positive rational radicand r.  This is where every quantity tainted by a
    real cube root lives, so identities between such quantities can be checked
    with zero tolerance.
  * ApproxReal -- a closed interval with exact rational endpoints that is
    guaranteed to contain the true real value.  Ring operations are exact
    interval arithmetic; square/cube roots are rational interval Newton;
    trigonometric enclosures are delegated to mpmath's interval context and
    pulled back to exact dyadic endpoints.

Nothing in this module ever rounds silently: every approximate object carries
a rigorous two-sided bound.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import mpmath
from mpmath import iv

from .errors import CompositionError, DomainError

DEFAULT_PRECISION_BITS = 128

# Exact certificates legitimately contain rationals with tens of thousands of
# digits; lift CPython's conversion guard so they can be serialized.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(50_000_000)


def working_precision() -> int:
    """Default bit precision, overridable via the HCGL_PRECISION_BITS env var."""
    raw = os.environ.get("HCGL_PRECISION_BITS")
    if raw is None:
        return DEFAULT_PRECISION_BITS
    bits = int(raw)
    if bits < 16:
        raise DomainError("HCGL_PRECISION_BITS must be at least 16")
    return bits


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (or "p") into an exact Fraction."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    """Canonical string form: "p" for integers, "p/q" otherwise."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _icbrt(n: int) -> int:
    """Floor of the integer cube root of n >= 0."""
    if n < 0:
        raise ValueError("negative")
    if n == 0:
        return 0
    x = 1 << ((n.bit_length() + 2) // 3)
    while True:
        y = (2 * x + n // (x * x)) // 3
        if y >= x:
            break
        x = y
    while x * x * x > n:
        x -= 1
    return x


def exact_cube_root(r: Fraction):
    """Return the exact rational cube root of r > 0, or None if irrational."""
    p, q = r.numerator, r.denominator
    cp, cq = _icbrt(p), _icbrt(q)
    if cp ** 3 == p and cq ** 3 == q:
        return Fraction(cp, cq)
    return None


def exact_square_root(r: Fraction):
    """Return the exact rational square root of r >= 0, or None if irrational."""
    p, q = r.numerator, r.denominator
    sp, sq = isqrt(p), isqrt(q)
    if sp * sp == p and sq * sq == q:
        return Fraction(sp, sq)
    return None


# ---------------------------------------------------------------------------
# ApproxReal: rational-endpoint enclosures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApproxReal:
    """A closed interval [lo, hi] with exact rational endpoints.

    Invariant: the true value it stands for lies within the interval.  All
    arithmetic is conservative, so the invariant propagates.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"empty enclosure [{self.lo}, {self.hi}]")

    @staticmethod
    def exactly(x) -> "ApproxReal":
        x = Fraction(x)
        return ApproxReal(x, x)

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def error_radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def encloses(self, other: "ApproxReal") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "ApproxReal") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def strictly_negative(self) -> bool:
        return self.hi < 0

    def __add__(self, other):
        other = _coerce(other)
        return ApproxReal(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return ApproxReal(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        cands = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
        return ApproxReal(min(cands), max(cands))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.lo <= 0 <= other.hi:
            raise DomainError("division by an interval containing zero")
        inv = ApproxReal(1 / other.hi, 1 / other.lo)
        return self * inv

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return ApproxReal(Fraction(0), max(-self.lo, self.hi))

    def pow_int(self, n: int) -> "ApproxReal":
        if n < 0:
            return ApproxReal.exactly(1) / self.pow_int(-n)
        out = ApproxReal.exactly(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def rounded(self, bits: int) -> "ApproxReal":
        """Widen outward to dyadic endpoints with ~bits fractional bits.

        Keeps denominators from snowballing through long exact computations.
        """
        scale = 1 << bits
        lo = Fraction((self.lo * scale).__floor__(), scale)
        hi = Fraction(-((-self.hi * scale).__floor__()), scale)
        return ApproxReal(lo, hi)

    def __repr__(self):
        return f"ApproxReal({float(self.lo)!r}, {float(self.hi)!r})"


def _coerce(x) -> ApproxReal:
    if isinstance(x, ApproxReal):
        return x
    return ApproxReal.exactly(Fraction(x))


def sqrt_interval(r: Fraction, precision: int | None = None) -> ApproxReal:
    """Rigorous enclosure of sqrt(r), r >= 0, by rational interval Newton.

    The upper bound iterates x -> (x + r/x)/2 (monotone from above); the lower
    bound r/x is exact whenever x is an upper bound.
    """
    precision = precision or working_precision()
    r = Fraction(r)
    if r < 0:
        raise DomainError("sqrt of a negative rational")
    if r == 0:
        return ApproxReal.exactly(0)
    exact = exact_square_root(r)
    if exact is not None:
        return ApproxReal.exactly(exact)
    x = Fraction(max(float(r) ** 0.5, 1e-300)).limit_denominator(1 << 60)
    while x <= 0 or x * x < r:
        x = x * 2 if x > 0 else Fraction(1)
    tol = Fraction(1, 1 << precision)
    scale = max(x, Fraction(1))
    while x - r / x > tol * scale:
        x = (x + r / x) / 2
        x = Fraction(-((-x * (1 << (precision + 8))).__floor__()), 1 << (precision + 8))
    lo = r / x
    return ApproxReal(lo, x)


def cbrt_interval(r: Fraction, precision: int | None = None) -> ApproxReal:
    """Rigorous enclosure of r**(1/3), r > 0, by rational interval Newton.

    Upper bound via x -> (2x + r/x^2)/3; lower bound r/x^2 is exact for any
    upper bound x.  Cubing the midpoint back is the standard cross-check and
    is exercised in the tests.
    """
    precision = precision or working_precision()
    r = Fraction(r)
    if r <= 0:
        raise DomainError("cube root enclosure requires a positive radicand")
    exact = exact_cube_root(r)
    if exact is not None:
        return ApproxReal.exactly(exact)
    x = Fraction(max(float(r) ** (1 / 3), 1e-100)).limit_denominator(1 << 60)
    while x <= 0 or x * x * x < r:
        x = x * 2 if x > 0 else Fraction(1)
    tol = Fraction(1, 1 << precision)
    scale = max(x, Fraction(1))
    while x - r / (x * x) > tol * scale:
        x = (2 * x + r / (x * x)) / 3
        x = Fraction(-((-x * (1 << (precision + 8))).__floor__()), 1 << (precision + 8))
    lo = r / (x * x)
    return ApproxReal(lo, x)


# ---------------------------------------------------------------------------
# mpmath bridge for trigonometric enclosures
# ---------------------------------------------------------------------------

def _fraction_from_mpf_tuple(t) -> Fraction:
    sign, man, exp, _ = t
    val = Fraction(int(man))
    val = -val if sign else val
    if exp >= 0:
        return val * (1 << exp)
    return val / (1 << -exp)


def _enclosure_from_iv(x) -> ApproxReal:
    lo_t, hi_t = x._mpi_
    return ApproxReal(_fraction_from_mpf_tuple(lo_t), _fraction_from_mpf_tuple(hi_t))


def _iv_from_enclosure(x: ApproxReal):
    lo = iv.mpf(x.lo.numerator) / iv.mpf(x.lo.denominator)
    hi = iv.mpf(x.hi.numerator) / iv.mpf(x.hi.denominator)
    return iv.mpf([lo.a, hi.b])


def _with_iv_precision(bits: int, fn):
    old = iv.prec
    iv.prec = bits + 8
    try:
        return fn()
    finally:
        iv.prec = old


def pi_enclosure(precision: int | None = None) -> ApproxReal:
    precision = precision or working_precision()
    return _with_iv_precision(precision, lambda: _enclosure_from_iv(+iv.pi))


def sin_enclosure(x: ApproxReal, precision: int | None = None) -> ApproxReal:
    """Enclosure of sin over the whole interval x (mpmath handles reduction)."""
    precision = precision or working_precision()
    return _with_iv_precision(
        precision, lambda: _enclosure_from_iv(iv.sin(_iv_from_enclosure(x)))
    )


def arccos_enclosure(x: ApproxReal, precision: int | None = None) -> ApproxReal:
    """Enclosure of arccos over x, for x strictly inside (0, 1).

    Uses arccos(v) = atan2(sqrt(1 - v^2), v), which mpmath's interval context
    evaluates rigorously; arccos is monotone decreasing so interval endpoints
    swap.
    """
    precision = precision or working_precision()
    if not (0 < x.lo and x.hi < 1):
        raise DomainError("arccos enclosure implemented for arguments inside (0,1)")

    def compute():
        v = _iv_from_enclosure(x)
        return _enclosure_from_iv(iv.atan2(iv.sqrt(1 - v * v), v))

    return _with_iv_precision(precision, compute)


def acos_lambda(lam: Fraction, precision: int | None = None) -> ApproxReal:
    """Enclosure of the angle theta in (0, pi/2) with lambda = -1/(2 cos theta)^2.

    Exists exactly when lambda < -1/4; then cos(theta) = sqrt(-1/(4 lambda)).
    """
    precision = precision or working_precision()
    lam = Fraction(lam)
    if lam >= Fraction(-1, 4):
        raise DomainError(f"no angle in (0, pi/2) exists for lambda = {lam} >= -1/4")
    cos_sq = Fraction(-1) / (4 * lam)
    cos_enc = sqrt_interval(cos_sq, precision)
    return arccos_enclosure(cos_enc, precision)


# ---------------------------------------------------------------------------
# CubicNumber: Q[t] / (t^3 - r)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CubicNumber:
    """a + b*t + c*t^2 with t^3 = radicand (a fixed positive rational).

    When the radicand is not a rational cube, t is irrational and the triple
    (a, b, c) is the unique representation.  When it is a rational cube u^3,
    distinct triples can denote the same real number; equality and division
    then fall back to substituting t = u, which keeps every operation
    consistent with the substitution homomorphism.
    """

    a: Fraction
    b: Fraction
    c: Fraction
    radicand: Fraction

    def __post_init__(self):
        for f in ("a", "b", "c", "radicand"):
            object.__setattr__(self, f, Fraction(getattr(self, f)))
        if self.radicand <= 0:
            raise DomainError("radicand must be a positive rational")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def of(value, radicand) -> "CubicNumber":
        return CubicNumber(Fraction(value), Fraction(0), Fraction(0), Fraction(radicand))

    @staticmethod
    def root(radicand) -> "CubicNumber":
        """The generator t itself, i.e. radicand**(1/3)."""
        return CubicNumber(Fraction(0), Fraction(1), Fraction(0), Fraction(radicand))

    # -- structure ----------------------------------------------------------

    def _check(self, other) -> "CubicNumber":
        if isinstance(other, CubicNumber):
            if other.radicand != self.radicand:
                raise CompositionError(
                    f"radicand mismatch: {self.radicand} vs {other.radicand}"
                )
            return other
        return CubicNumber.of(Fraction(other), self.radicand)

    def rational_root(self):
        """Exact rational value of t when the radicand is a perfect cube, else None."""
        return exact_cube_root(self.radicand)

    def substituted(self):
        """Rational value after t := cbrt(radicand); None if t is irrational."""
        u = self.rational_root()
        if u is None:
            return None
        return self.a + self.b * u + self.c * u * u

    def is_zero(self) -> bool:
        if self.a == 0 and self.b == 0 and self.c == 0:
            return True
        sub = self.substituted()
        return sub == 0 if sub is not None else False

    def is_rational(self) -> bool:
        return (self.b == 0 and self.c == 0) or self.substituted() is not None

    def as_rational(self) -> Fraction:
        if self.b == 0 and self.c == 0:
            return self.a
        sub = self.substituted()
        if sub is None:
            raise DomainError("value is irrational")
        return sub

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        o = self._check(other)
        return CubicNumber(self.a + o.a, self.b + o.b, self.c + o.c, self.radicand)

    __radd__ = __add__

    def __neg__(self):
        return CubicNumber(-self.a, -self.b, -self.c, self.radicand)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def __mul__(self, other):
        o = self._check(other)
        r = self.radicand
        a, b, c = self.a, self.b, self.c
        d, e, f = o.a, o.b, o.c
        return CubicNumber(
            a * d + r * (b * f + c * e),
            a * e + b * d + r * c * f,
            a * f + b * e + c * d,
            r,
        )

    __rmul__ = __mul__

    def _det(self) -> Fraction:
        """Determinant of multiplication by self (the field norm form)."""
        r = self.radicand
        a, b, c = self.a, self.b, self.c
        return a ** 3 + r * b ** 3 + r * r * c ** 3 - 3 * r * a * b * c

    def inverse(self) -> "CubicNumber":
        if self.is_zero():
            raise ArithmeticError("division by zero in the cubic extension")
        r = self.radicand
        a, b, c = self.a, self.b, self.c
        det = self._det()
        if det == 0:
            # Only possible with a perfect-cube radicand; the representation is
            # a zero divisor of the ring but the real value is nonzero, so
            # invert the substituted value.
            sub = self.substituted()
            if sub is None or sub == 0:
                raise ArithmeticError("division by zero in the cubic extension")
            return CubicNumber.of(1 / sub, r)
        # Cramer's rule on (a + bt + ct^2)(p + qt + st^2) = 1.
        p = (a * a - r * b * c) / det
        q = (r * c * c - a * b) / det
        s = (b * b - a * c) / det
        return CubicNumber(p, q, s, r)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = CubicNumber.of(1, self.radicand)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CubicNumber.of(other, self.radicand)
        if not isinstance(other, CubicNumber):
            return NotImplemented
        o = self._check(other)
        if (self.a, self.b, self.c) == (o.a, o.b, o.c):
            return True
        return (self - o).is_zero()

    def __hash__(self):
        sub = self.substituted()
        if sub is not None:
            return hash((sub, self.radicand))
        return hash((self.a, self.b, self.c, self.radicand))

    # -- analysis -----------------------------------------------------------

    def enclosure(self, precision: int | None = None) -> ApproxReal:
        precision = precision or working_precision()
        t = cbrt_interval(self.radicand, precision)
        return (ApproxReal.exactly(self.a)
                + ApproxReal.exactly(self.b) * t
                + ApproxReal.exactly(self.c) * t.pow_int(2))

    def sign(self) -> int:
        """Exact sign of the real value (-1, 0, +1), escalating precision as needed."""
        if self.is_zero():
            return 0
        sub = self.substituted()
        if sub is not None:
            return -1 if sub < 0 else 1
        bits = working_precision()
        for _ in range(32):
            enc = self.enclosure(bits)
            if enc.strictly_positive():
                return 1
            if enc.strictly_negative():
                return -1
            bits *= 2
        raise ArithmeticError("sign of a nonzero cubic did not resolve")  # pragma: no cover

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "c": format_rational(self.c),
            "radicand": format_rational(self.radicand),
        }

    @staticmethod
    def from_json(data: dict) -> "CubicNumber":
        return CubicNumber(
            parse_rational(data["a"]),
            parse_rational(data["b"]),
            parse_rational(data["c"]),
            parse_rational(data["radicand"]),
        )

    def __repr__(self):
        return (f"CubicNumber({self.a} + {self.b}*t + {self.c}*t^2,"
                f" t^3={self.radicand})")


def cubic_to_approx(x: CubicNumber, precision: int | None = None) -> ApproxReal:
    """Verified enclosure of the real value of x; shrinks as precision grows."""
    return x.enclosure(precision)
