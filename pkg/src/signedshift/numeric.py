"""Scalar arithmetic shared by the whole package.

Two numeric regimes coexist:

* float mode — plain ``complex`` arithmetic, with Neumaier-compensated
  summation for long series so that results are deterministic and
  accurate independent of how work is chunked;
* exact mode — :class:`ExactComplex`, a complex number with
  ``fractions.Fraction`` components.

Every ``float`` is a dyadic rational, so promotion into exact mode via
:func:`to_exact` is lossless.  The reverse direction (:func:`to_cplx`)
rounds once.  ``Fraction``/``complex`` mixing in plain Python silently
degrades to binary floats, which is exactly what exact mode must never
do; ExactComplex therefore refuses float operands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import hypot

#: Anything the package accepts as a point value or coefficient.
Scalar = "int | float | complex | Fraction | ExactComplex"

_EXACT_REAL = (int, Fraction)


@dataclass(frozen=True)
class ExactComplex:
    """Complex number with rational components; all field ops are exact."""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex(
            (self.re * other.re + self.im * other.im) / den,
            (self.im * other.re - self.re * other.im) / den,
        )

    def __rtruediv__(self, other):
        other = _coerce_exact(other)
        if other is None:
            return NotImplemented
        return other / self

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, ExactComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _EXACT_REAL):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash(complex(self))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    # -- views ------------------------------------------------------------

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def modulus_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return hypot(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex({self.re!s}, {self.im!s})"


def _coerce_exact(x):
    """ExactComplex view of x, or None when x would lose exactness."""
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, _EXACT_REAL):
        return ExactComplex(Fraction(x), Fraction(0))
    return None


def is_exact_scalar(x) -> bool:
    """True when x carries no binary rounding (int, Fraction, ExactComplex)."""
    return isinstance(x, _EXACT_REAL) or isinstance(x, ExactComplex)


def to_exact(x) -> ExactComplex:
    """Lossless promotion of any accepted scalar to ExactComplex."""
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, _EXACT_REAL):
        return ExactComplex(Fraction(x), Fraction(0))
    if isinstance(x, float):
        return ExactComplex(Fraction(x), Fraction(0))
    if isinstance(x, complex):
        return ExactComplex(Fraction(x.real), Fraction(x.imag))
    raise TypeError(f"not a scalar: {x!r}")


def to_cplx(x) -> complex:
    """Round any accepted scalar to a Python complex."""
    if isinstance(x, ExactComplex):
        return complex(x)
    if isinstance(x, Fraction):
        return complex(float(x), 0.0)
    return complex(x)


def modulus(x):
    """|x|, kept exact (Fraction) when x is exact and purely real or imaginary."""
    if isinstance(x, _EXACT_REAL):
        return abs(Fraction(x))
    if isinstance(x, ExactComplex):
        if x.im == 0:
            return abs(x.re)
        if x.re == 0:
            return abs(x.im)
        return abs(x)
    return abs(complex(x))


def real_part(x):
    if isinstance(x, ExactComplex):
        return x.re
    if isinstance(x, _EXACT_REAL):
        return Fraction(x)
    return complex(x).real


def imag_part(x):
    if isinstance(x, ExactComplex):
        return x.im
    if isinstance(x, _EXACT_REAL):
        return Fraction(0)
    return complex(x).imag


class CompensatedSum:
    """Neumaier running sum: streaming, order-dependent, error O(eps)."""

    __slots__ = ("_sum", "_comp")

    def __init__(self):
        self._sum = 0.0
        self._comp = 0.0

    def add(self, x: float) -> None:
        t = self._sum + x
        if abs(self._sum) >= abs(x):
            self._comp += (self._sum - t) + x
        else:
            self._comp += (x - t) + self._sum
        self._sum = t

    def value(self) -> float:
        return self._sum + self._comp


class ComplexSum:
    """Compensated sum of complex terms (re and im tracked separately)."""

    __slots__ = ("_re", "_im")

    def __init__(self):
        self._re = CompensatedSum()
        self._im = CompensatedSum()

    def add(self, z: complex) -> None:
        self._re.add(z.real)
        self._im.add(z.imag)

    def value(self) -> complex:
        return complex(self._re.value(), self._im.value())


# -- text forms -------------------------------------------------------------

_REAL_TOKEN = r"[0-9./eE]*[0-9.]"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_REAL_TOKEN})?(?P<im>[+-]{_REAL_TOKEN}|[+-])?[jJ]$"
)


def _parse_real(text: str):
    """int | Fraction from a plain numeric token; raises ValueError."""
    try:
        return int(text)
    except ValueError:
        pass
    return Fraction(text)  # handles 'p/q', '0.5', '1e-3'


def parse_scalar(text: str):
    """Parse a config token into an exact scalar whenever possible.

    Accepted forms: integers, 'p/q' rationals, decimals, scientific
    notation, and a+bj complex literals whose parts use any of those
    forms.  Rationally-written input yields int/Fraction/ExactComplex;
    anything else falls back to complex() parsing.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    try:
        return _parse_real(s)
    except (ValueError, ZeroDivisionError):
        pass
    m = _COMPLEX_RE.match(s)
    if m:
        re_tok = m.group("re")
        im_tok = m.group("im")
        try:
            if re_tok is None and im_tok is None:
                return ExactComplex(Fraction(0), Fraction(1))
            if im_tok is None:
                # pure imaginary: the leading token is the imaginary part
                return ExactComplex(Fraction(0), _parse_real(re_tok))
            if im_tok in ("+", "-"):
                im_tok += "1"
            return ExactComplex(_parse_real(re_tok or "0"), _parse_real(im_tok))
        except (ValueError, ZeroDivisionError):
            pass
    return complex(s)  # last resort; raises ValueError on junk


def format_real(x, exact: bool) -> str:
    """One CSV field: 'p/q' in exact mode, 17 significant digits otherwise."""
    if exact:
        if isinstance(x, _EXACT_REAL):
            return str(Fraction(x))
        return str(Fraction(x))  # floats are dyadic rationals
    return f"{float(x):.17g}"
