"""Extended-precision real helpers."""
from __future__ import annotations

from fractions import Fraction
import math

import gmpy2

from .const import DEFAULT_PRECISION_BITS, EXACT_EXPONENT_DENOMINATOR, SLACK_BITS


def real_context(precision: int = DEFAULT_PRECISION_BITS, rounding=None):
    if rounding is None:
        rounding = gmpy2.RoundToNearest
    return gmpy2.context(
        precision=precision,
        emin=gmpy2.get_emin_min(),
        emax=gmpy2.get_emax_max(),
        round=rounding,
    )


def real(x, precision: int = DEFAULT_PRECISION_BITS, rounding=None):
    """mpfr from int, str, Fraction, float (via its shortest repr) or mpfr."""
    if isinstance(x, float):
        x = repr(x)
    elif isinstance(x, Fraction):
        x = gmpy2.mpq(x.numerator, x.denominator)
    with real_context(precision, rounding):
        return gmpy2.mpfr(x)


def slack(precision: int = DEFAULT_PRECISION_BITS):
    with real_context(precision):
        return gmpy2.mpfr(2) ** -(precision - SLACK_BITS)


def digits(precision: int) -> int:
    return int(precision * math.log10(2)) + 1


def real_str(x, precision: int = DEFAULT_PRECISION_BITS) -> str:
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{digits(precision)}e")


def exact_exponent(c) -> Fraction | None:
    """c as a small-denominator fraction, or None when it has none."""
    fraction = Fraction(str(c)) if not isinstance(c, Fraction) else c
    if fraction.denominator > EXACT_EXPONENT_DENOMINATOR:
        return None
    return fraction


def below_power(x, base: int, exponent, precision: int = DEFAULT_PRECISION_BITS):
    """Decide |x| < base**exponent for rational x and integer base >= 2.

    exact when the exponent has a small denominator, otherwise decided at
    working precision with the left side rounded up and the right side down.
    """
    x = abs(Fraction(x))
    exact = exact_exponent(exponent)
    if exact is not None:
        num, den = exact.numerator, exact.denominator
        # x^den < base^num, cleared of denominators
        lhs = x.numerator**den
        if num >= 0:
            return lhs < base**num * x.denominator**den
        return lhs * base ** (-num) < x.denominator**den
    with real_context(precision, gmpy2.RoundUp):
        lhs = gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
    with real_context(precision, gmpy2.RoundDown):
        rhs = gmpy2.mpfr(base) ** real(exponent, precision)
    return lhs < rhs
