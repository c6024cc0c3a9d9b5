"""Exact rational helpers shared by serialization and reports."""
from __future__ import annotations

from fractions import Fraction

__all__ = ["Q", "frac_str", "parse_frac", "ONE", "ZERO"]

ONE = Fraction(1)
ZERO = Fraction(0)


def Q(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to Fraction.

    Floats are rejected: every quantity in this package is exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_frac(x)
    if isinstance(x, float):
        raise TypeError(f"refusing float {x!r}; pass a Fraction or 'num/den'")
    return Fraction(x)


def frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        a, b = s.split("/", 1)
        return Fraction(int(a), int(b))
    return Fraction(int(s))
