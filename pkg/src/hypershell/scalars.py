"""Dual-track scalars: exact rationals, declared surds, plain floats.

Exact values are `Fraction` or `Surd` (a rational multiple of sqrt(k) for a
squarefree integer k > 1).  Anything else travels on the float track.  Surds
are declared constructively -- irrationality of a raw float is undecidable,
so floats never classify as irrational.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

# effective mantissa bits used when a surd has to be rounded to float
_MP_PREC_BITS = 96


def set_precision(bits: int) -> None:
    """Set the working precision (bits of mantissa) for surd evaluation."""
    global _MP_PREC_BITS
    if bits < 80:
        raise ValueError("precision below 80 bits is not supported")
    _MP_PREC_BITS = int(bits)


def _squarefree_split(k: int) -> tuple[int, int]:
    """Return (s, m) with k = s^2 * m and m squarefree."""
    s, m, d = 1, k, 2
    while d * d <= m:
        while m % (d * d) == 0:
            m //= d * d
            s *= d
        d += 1
    return s, m


@dataclass(frozen=True)
class Surd:
    """The exact value coeff * sqrt(radicand), radicand squarefree > 1."""

    coeff: Fraction
    radicand: int

    def __float__(self) -> float:
        with mpmath.workprec(_MP_PREC_BITS):
            return float(mpmath.mpf(self.coeff.numerator) / self.coeff.denominator
                         * mpmath.sqrt(self.radicand))

    def __neg__(self) -> "Surd":
        return Surd(-self.coeff, self.radicand)

    def __abs__(self) -> "Surd":
        return Surd(abs(self.coeff), self.radicand)

    def __repr__(self) -> str:
        return f"{self.coeff}*sqrt({self.radicand})"


Scalar = Union[Fraction, Surd]


def make_surd(coeff, radicand: int) -> Scalar:
    """Normalized coeff*sqrt(radicand); collapses to Fraction when possible."""
    coeff = Fraction(coeff)
    if radicand <= 0:
        raise ValueError("radicand must be a positive integer")
    s, m = _squarefree_split(int(radicand))
    coeff = coeff * s
    if m == 1 or coeff == 0:
        return coeff
    return Surd(coeff, m)


_SURD_RE = re.compile(
    r"^\s*(?P<coeff>[+-]?\d+(?:/\d+|\.\d*)?)?\s*\*?\s*sqrt\(\s*(?P<rad>\d+)\s*\)\s*$"
)


def parse_scalar(text) -> Scalar:
    """Parse 'p/q', decimal strings, 'c*sqrt(k)' surds, ints and Fractions."""
    if isinstance(text, (Fraction, Surd)):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        # TOML/numeric floats are exact binary rationals
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"cannot parse scalar from {text!r}")
    s = text.strip()
    m = _SURD_RE.match(s)
    if m:
        coeff = m.group("coeff")
        if coeff in (None, "", "+"):
            cf = Fraction(1)
        elif coeff == "-":
            cf = Fraction(-1)
        else:
            cf = Fraction(coeff)
        return make_surd(cf, int(m.group("rad")))
    return Fraction(s)


def scalar_to_float(x) -> float:
    if isinstance(x, Surd):
        return float(x)
    if x == math.inf or x == -math.inf:
        return float(x)
    return float(x)


def is_rational_scalar(x) -> bool:
    return isinstance(x, (int, Fraction))


def surd_key(x: Scalar) -> int:
    """Radicand of the surd class a scalar belongs to (1 = rational)."""
    return x.radicand if isinstance(x, Surd) else 1


def exact_le(x: Scalar, y: Scalar) -> bool:
    """Exact x <= y for scalars in the same surd class or mixed with 0."""
    d = exact_sub(y, x)
    return exact_sign(d) >= 0


def exact_sub(y: Scalar, x: Scalar):
    if isinstance(y, Fraction) and isinstance(x, Fraction):
        return y - x
    ky, kx = surd_key(y), surd_key(x)
    if ky == kx:
        cy = y.coeff if isinstance(y, Surd) else y
        cx = x.coeff if isinstance(x, Surd) else x
        return make_surd(cy - cx, ky)
    if isinstance(y, Fraction) and y == 0:
        return -x
    if isinstance(x, Fraction) and x == 0:
        return y
    raise ValueError("exact arithmetic across surd classes is not supported")


def exact_sign(x: Scalar) -> int:
    c = x.coeff if isinstance(x, Surd) else x
    return (c > 0) - (c < 0)


def lcm_denominator(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def minimal_integerizer(fracs) -> Fraction:
    """Minimal positive rational L with L*f integral for every f (not all 0)."""
    fracs = [Fraction(f) for f in fracs]
    den = 1
    for f in fracs:
        den = math.lcm(den, f.denominator)
    nums = [abs(int(f * den)) for f in fracs if f != 0]
    if not nums:
        raise ValueError("all values are zero")
    g = 0
    for n in nums:
        g = math.gcd(g, n)
    return Fraction(den, g)
