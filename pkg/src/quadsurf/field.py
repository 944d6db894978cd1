"""Exact arithmetic in a real quadratic field Q(sqrt D).

Rationals are plain :class:`fractions.Fraction`.  A :class:`QuadScalar`
holds ``rat + irr*sqrt(disc)`` with rational parts; every comparison is
decided exactly by squaring, never through floating point.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and decimal/fraction strings to a Fraction.

    Floats are accepted and converted exactly (binary value), which is what
    the enumeration bounds want: a float radius is taken at face value.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, QuadScalar):
        if x.irr != 0:
            raise ValueError(f"{x} is irrational")
        return x.rat
    return Fraction(x)


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def squarefree_decompose(q: Fraction) -> tuple[Fraction, int]:
    """Write a positive rational q as c**2 * D with D squarefree; return (c, D)."""
    q = as_fraction(q)
    if q <= 0:
        raise ValueError("need a positive rational")
    # sqrt(p/r) = sqrt(p*r)/r
    n = q.numerator * q.denominator
    c, D = 1, 1
    f = 2
    m = n
    while f * f <= m:
        e = 0
        while m % f == 0:
            m //= f
            e += 1
        c *= f ** (e // 2)
        if e % 2:
            D *= f
        f += 1
    D *= m
    return Fraction(c, q.denominator), D


def sign_of(a: Fraction, b: Fraction, D: int) -> int:
    """Exact sign of a + b*sqrt(D) for rationals a, b and D >= 1."""
    if b == 0 or D == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with b^2 D
    lhs = a * a
    rhs = b * b * D
    if a > 0:
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


@dataclass(frozen=True)
class QuadScalar:
    """An element ``rat + irr*sqrt(disc)`` of Q(sqrt disc).

    ``disc`` is a squarefree positive integer.  ``disc == 1`` is allowed and
    folds the irrational part into ``rat``.
    """

    rat: Fraction
    irr: Fraction = Fraction(0)
    disc: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rat", as_fraction(self.rat))
        object.__setattr__(self, "irr", as_fraction(self.irr))
        if not isinstance(self.disc, int) or self.disc < 1:
            raise ValueError(f"disc must be a positive integer, got {self.disc!r}")
        if self.disc == 1 and self.irr != 0:
            object.__setattr__(self, "rat", self.rat + self.irr)
            object.__setattr__(self, "irr", Fraction(0))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def sqrt_of(cls, q, disc: int | None = None) -> "QuadScalar":
        """sqrt(q) for a positive rational q, as an element of Q(sqrt D)."""
        c, D = squarefree_decompose(q)
        if disc is not None and D not in (1, disc):
            raise ValueError(f"sqrt({q}) is not in Q(sqrt {disc})")
        if D == 1:
            return cls(c, 0, disc or 1)
        return cls(0, c, D)

    def _common(self, other) -> tuple["QuadScalar", int]:
        """Coerce ``other`` and pick the shared discriminant."""
        if not isinstance(other, QuadScalar):
            other = QuadScalar(as_fraction(other), 0, self.disc)
        if self.irr != 0 and other.irr != 0 and self.disc != other.disc:
            raise ValueError(f"mixing Q(sqrt {self.disc}) and Q(sqrt {other.disc})")
        if self.irr != 0:
            D = self.disc
        elif other.irr != 0:
            D = other.disc
        else:
            D = self.disc if self.disc != 1 else other.disc
        return other, D

    def _coerce(self, other) -> "QuadScalar":
        return self._common(other)[0]

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o, D = self._common(other)
        return QuadScalar(self.rat + o.rat, self.irr + o.irr, D)

    __radd__ = __add__

    def __neg__(self):
        return QuadScalar(-self.rat, -self.irr, self.disc)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o, D = self._common(other)
        return QuadScalar(self.rat * o.rat + self.irr * o.irr * D,
                          self.rat * o.irr + self.irr * o.rat, D)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadScalar":
        return QuadScalar(self.rat, -self.irr, self.disc)

    def norm(self) -> Fraction:
        return self.rat * self.rat - self.irr * self.irr * self.disc

    def __truediv__(self, other):
        o, D = self._common(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero in Q(sqrt D)")
        n = o.norm()
        c = o.conjugate()
        num = QuadScalar(self.rat, self.irr, D) * QuadScalar(c.rat, c.irr, D)
        return QuadScalar(num.rat / n, num.irr / n, D)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    # -- predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.rat == 0 and self.irr == 0

    def is_rational(self) -> bool:
        return self.irr == 0

    def sign(self) -> int:
        return sign_of(self.rat, self.irr, self.disc)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadScalar)):
            try:
                return (self - other).is_zero()
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self):
        if self.irr == 0:
            return hash(self.rat)
        return hash((self.rat, self.irr, self.disc))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.rat) + float(self.irr) * math.sqrt(self.disc)

    def __repr__(self):
        if self.irr == 0:
            return f"QuadScalar({self.rat})"
        return f"QuadScalar({self.rat} + {self.irr}*sqrt{self.disc})"

    def __str__(self):
        if self.irr == 0:
            return str(self.rat)
        irr = f"{abs(self.irr)}*sqrt{self.disc}" if abs(self.irr) != 1 else f"sqrt{self.disc}"
        sign = "-" if self.irr < 0 else "+"
        if self.rat == 0:
            return (sign if sign == "-" else "") + irr
        return f"{self.rat}{sign}{irr}"


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?
        (?P<sqrt>sqrt\s*(?P<disc>\d+))?\s*""",
    re.VERBOSE,
)


def parse_quad(text: str, disc: int | None = None) -> QuadScalar:
    """Parse ``p/q``, ``r/t*sqrtD``, ``p/q+r/t*sqrtD`` and signed variants.

    ``disc`` pins the field; a mismatching ``sqrtD`` is rejected, as is a
    non-squarefree D.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    rat = Fraction(0)
    irr = Fraction(0)
    seen_disc = None
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse scalar {text!r}")
        if pos > 0 and m.group("sign") is None:
            raise ValueError(f"missing operator in {text!r}")
        sgn = -1 if m.group("sign") == "-" else 1
        coef = Fraction(m.group("coef")) if m.group("coef") else None
        if m.group("sqrt"):
            D = int(m.group("disc"))
            if not is_squarefree(D):
                raise ValueError(f"sqrt{D}: D must be squarefree")
            if seen_disc is not None and D != seen_disc:
                raise ValueError(f"two different radicals in {text!r}")
            seen_disc = D
            irr += sgn * (coef if coef is not None else 1)
        else:
            if coef is None:
                raise ValueError(f"cannot parse scalar {text!r}")
            rat += sgn * coef
        pos = m.end()
    if disc is not None:
        if not is_squarefree(disc):
            raise ValueError(f"D={disc} is not squarefree")
        if seen_disc is not None and seen_disc != disc:
            raise ValueError(f"{text!r} is not in Q(sqrt {disc})")
        return QuadScalar(rat, irr, disc)
    return QuadScalar(rat, irr, seen_disc or 1)
