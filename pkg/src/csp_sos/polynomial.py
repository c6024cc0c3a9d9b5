"""Multilinear polynomials in the indicator indeterminates x_i^{=c}.

A monomial is a tuple of (variable, value) pairs sorted by variable, with no
variable repeated. Products are taken multilinearly: equal indicators are
idempotent and two different values of one variable multiply to zero.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction

from .rational import Q

__all__ = ["ONE_MONO", "mono", "mono_mul", "mono_vars", "order_key", "Polynomial",
           "spin", "monomials_upto", "parse_poly"]

ONE_MONO: tuple = ()


def mono(pairs) -> tuple:
    pairs = sorted(set((int(i), int(c)) for i, c in pairs))
    vs = [i for i, _ in pairs]
    if len(set(vs)) != len(vs):
        raise ValueError(f"variable repeated in monomial {pairs}")
    return tuple(pairs)


def mono_mul(a: tuple, b: tuple):
    """Multilinear product, or None when the two monomials conflict."""
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for i, c in b:
        d = out.get(i)
        if d is None:
            out[i] = c
        elif d != c:
            return None
    return tuple(sorted(out.items()))


def mono_vars(a: tuple) -> frozenset:
    return frozenset(i for i, _ in a)


def order_key(a: tuple):
    """Cardinality first, then lexicographic."""
    return (len(a), a)


def monomials_upto(n: int, q: int, D: int, values=None, variables=None) -> list:
    """All monomial indices of degree <= D in the fixed order."""
    values = list(range(q)) if values is None else list(values)
    variables = list(range(n)) if variables is None else sorted(variables)
    out = []
    for d in range(D + 1):
        for vs in itertools.combinations(variables, d):
            for cs in itertools.product(values, repeat=d):
                out.append(tuple(zip(vs, cs)))
    out.sort(key=order_key)
    return out


class Polynomial:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict = {}
        if terms:
            for m, c in (terms.items() if isinstance(terms, dict) else terms):
                c = Q(c)
                if c:
                    m = mono(m)
                    v = self.terms.get(m, 0) + c
                    if v:
                        self.terms[m] = v
                    else:
                        self.terms.pop(m, None)

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls({ONE_MONO: c})

    @classmethod
    def monomial(cls, m, c=1) -> "Polynomial":
        return cls({m: c})

    def items(self):
        return self.terms.items()

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __repr__(self):
        return f"Polynomial({self.terms!r})"

    def _combine(self, other, s):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        out = Polynomial()
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + s * c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        out.terms = t
        return out

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    def __neg__(self):
        out = Polynomial()
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Q(other)
            out = Polynomial()
            if c:
                out.terms = {m: c * v for m, v in self.terms.items()}
            return out
        acc: dict = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                m = mono_mul(a, b)
                if m is not None:
                    acc[m] = acc.get(m, 0) + x * y
        out = Polynomial()
        out.terms = {m: c for m, c in acc.items() if c}
        return out

    __rmul__ = __mul__

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    @property
    def vbls(self) -> frozenset:
        return frozenset(i for m in self.terms for i, _ in m)

    def coeff(self, m) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def to_json(self):
        from .rational import frac_str
        return [[[list(p) for p in m], frac_str(c)]
                for m, c in sorted(self.terms.items(), key=lambda t: order_key(t[0]))]


def spin(i: int) -> Polynomial:
    """The +-1 variable 2*x_i^{=1} - 1 for q=2 (TRUE = +1)."""
    return Polynomial({((i, 1),): 2, ONE_MONO: -1})


_TERM = re.compile(r"\[\s*([^\]=\s]+)\s*=\s*(\d+)\s*\]")


def parse_poly(text: str, inst=None) -> Polynomial:
    """Parse ``"coef * [v=c][w=d] + coef * [u=c] - 1"``; variable names resolve via inst."""
    out = Polynomial()
    s = text.replace(" ", "")
    if not s:
        return out
    if s[0] not in "+-":
        s = "+" + s
    for sign, body in re.findall(r"([+-])([^+-]+)", s):
        brackets = _TERM.findall(body)
        coef_txt = _TERM.sub("", body).rstrip("*") or "1"
        coef = Q(coef_txt) * (1 if sign == "+" else -1)
        pairs = []
        for name, val in brackets:
            i = inst.var_index(name) if inst is not None else int(name)
            pairs.append((i, int(val)))
        out = out + Polynomial({mono(pairs): coef})
    return out
