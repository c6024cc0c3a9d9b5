"""Predicates over a finite alphabet, literal patterns and exact distributions.

Tuples in Omega^k are indexed base q with coordinate 1 most significant, so
``(0, 0, 1)`` over q=2 has index 1 and ``(1, 0, 0)`` has index 4.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .rational import Q, frac_str

__all__ = [
    "Q_CAP", "K_CAP", "Alphabet", "Predicate", "LiteralPattern",
    "RationalDistribution", "predicate_from_table", "apply_literals",
    "shift_distribution", "encode", "decode", "all_tuples", "builtin",
    "parse_predicate", "TrivialPredicateWarning",
]

Q_CAP = 8
K_CAP = 16


class TrivialPredicateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Alphabet:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.q!r}")
        if self.q > Q_CAP:
            raise ValueError(f"alphabet size {self.q} exceeds cap {Q_CAP}")

    @property
    def symbols(self) -> range:
        return range(self.q)


def encode(z, q: int) -> int:
    idx = 0
    for c in z:
        idx = idx * q + c
    return idx


def decode(idx: int, q: int, k: int) -> tuple[int, ...]:
    out = [0] * k
    for j in range(k - 1, -1, -1):
        idx, out[j] = divmod(idx, q)
    return tuple(out)


def all_tuples(q: int, k: int):
    """All of Omega^k in index order."""
    return itertools.product(range(q), repeat=k)


def _check_dims(q: int, k: int):
    Alphabet(q)
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"arity must be a positive integer, got {k!r}")
    if k > K_CAP:
        raise ValueError(f"arity {k} exceeds cap {K_CAP}")


@dataclass(frozen=True)
class Predicate:
    q: int
    k: int
    table: tuple[bool, ...]
    name: str | None = None

    def __post_init__(self):
        _check_dims(self.q, self.k)
        if len(self.table) != self.q ** self.k:
            raise ValueError(
                f"table has length {len(self.table)}, expected q^k = {self.q ** self.k}")

    def __call__(self, z) -> bool:
        return self.table[encode(z, self.q)]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.q)

    @cached_property
    def sat_count(self) -> int:
        return sum(self.table)

    @property
    def mu_P(self) -> Fraction:
        return Fraction(self.sat_count, self.q ** self.k)

    @property
    def trivial(self) -> bool:
        return self.sat_count in (0, self.q ** self.k)

    def satisfying(self):
        return [z for z in all_tuples(self.q, self.k) if self(z)]

    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.table)

    def to_json(self) -> dict:
        d = {"q": self.q, "k": self.k, "table": self.bitstring()}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, d) -> "Predicate":
        if isinstance(d, str):
            return parse_predicate(d)
        try:
            q, k, bits = d["q"], d["k"], d["table"]
        except KeyError as e:
            raise ValueError(f"predicate JSON missing field {e}") from None
        if set(bits) - {"0", "1"}:
            raise ValueError("predicate table must be a bitstring")
        return predicate_from_table(q, k, [c == "1" for c in bits], name=d.get("name"))

    def __eq__(self, other):
        if not isinstance(other, Predicate):
            return NotImplemented
        return (self.q, self.k, self.table) == (other.q, other.k, other.table)

    def __hash__(self):
        return hash((self.q, self.k, self.table))


def predicate_from_table(q: int, k: int, table, name: str | None = None) -> Predicate:
    table = tuple(bool(b) for b in table)
    P = Predicate(q, k, table, name)
    if P.trivial:
        warnings.warn(f"predicate {name or ''} is trivial (sat_count={P.sat_count})",
                      TrivialPredicateWarning, stacklevel=2)
    return P


@dataclass(frozen=True)
class LiteralPattern:
    """One alphabet permutation per coordinate; perms[j][c] is the image of c."""

    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for p in self.perms:
            if sorted(p) != list(range(len(p))):
                raise ValueError(f"literal entry {p} is not a permutation")
        if self.perms and len({len(p) for p in self.perms}) != 1:
            raise ValueError("literal pattern mixes alphabet sizes")

    @property
    def k(self) -> int:
        return len(self.perms)

    @property
    def q(self) -> int:
        return len(self.perms[0])

    def __call__(self, z) -> tuple[int, ...]:
        return tuple(p[c] for p, c in zip(self.perms, z))

    @classmethod
    def identity(cls, q: int, k: int) -> "LiteralPattern":
        return cls(tuple(tuple(range(q)) for _ in range(k)))

    @classmethod
    def from_signs(cls, signs) -> "LiteralPattern":
        """q=2 shorthand: a negative sign swaps 0 and 1 in that coordinate."""
        return cls(tuple((1, 0) if s < 0 else (0, 1) for s in signs))

    def compose(self, other: "LiteralPattern") -> "LiteralPattern":
        """(self o other)(z) = self(other(z))."""
        if other.k != self.k:
            raise ValueError("arity mismatch")
        return LiteralPattern(tuple(tuple(p[o[c]] for c in range(len(o)))
                                    for p, o in zip(self.perms, other.perms)))

    def inverse(self) -> "LiteralPattern":
        inv = []
        for p in self.perms:
            r = [0] * len(p)
            for c, d in enumerate(p):
                r[d] = c
            inv.append(tuple(r))
        return LiteralPattern(tuple(inv))

    def is_identity(self) -> bool:
        return all(p == tuple(range(len(p))) for p in self.perms)

    def to_json(self):
        return [list(p) for p in self.perms]

    @classmethod
    def from_json(cls, d) -> "LiteralPattern":
        return cls(tuple(tuple(int(c) for c in p) for p in d))


@dataclass(frozen=True)
class RationalDistribution:
    q: int
    k: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        _check_dims(self.q, self.k)
        if len(self.probs) != self.q ** self.k:
            raise ValueError(f"need {self.q ** self.k} probabilities, got {len(self.probs)}")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        if sum(self.probs) != 1:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    @classmethod
    def make(cls, q: int, k: int, probs) -> "RationalDistribution":
        return cls(q, k, tuple(Q(p) for p in probs))

    @classmethod
    def uniform(cls, q: int, k: int) -> "RationalDistribution":
        w = Fraction(1, q ** k)
        return cls(q, k, (w,) * q ** k)

    @classmethod
    def uniform_on(cls, q: int, k: int, tuples) -> "RationalDistribution":
        tuples = {tuple(z) for z in tuples}
        if not tuples:
            raise ValueError("empty support")
        w = Fraction(1, len(tuples))
        probs = [Fraction(0)] * q ** k
        for z in tuples:
            probs[encode(z, q)] = w
        return cls(q, k, tuple(probs))

    @classmethod
    def point(cls, q: int, k: int, z) -> "RationalDistribution":
        return cls.uniform_on(q, k, [z])

    def __getitem__(self, z) -> Fraction:
        return self.probs[encode(z, self.q)]

    def items(self):
        """(tuple, prob) pairs with positive probability, in index order."""
        for i, p in enumerate(self.probs):
            if p:
                yield decode(i, self.q, self.k), p

    def support(self) -> list[tuple[int, ...]]:
        return [z for z, _ in self.items()]

    def marginal(self, coords) -> dict[tuple[int, ...], Fraction]:
        coords = tuple(coords)
        out: dict[tuple[int, ...], Fraction] = {}
        for z, p in self.items():
            key = tuple(z[j] for j in coords)
            out[key] = out.get(key, 0) + p
        return out

    def mass_off(self, P: Predicate) -> Fraction:
        return sum((p for z, p in self.items() if not P(z)), Fraction(0))

    def to_json(self) -> dict:
        return {"probs": [frac_str(p) for p in self.probs]}

    @classmethod
    def from_json(cls, d, q: int, k: int) -> "RationalDistribution":
        return cls.make(q, k, d["probs"])


def apply_literals(P: Predicate, lit: LiteralPattern) -> Predicate:
    """Q(z) = P(lit(z))."""
    if lit.k != P.k or lit.q != P.q:
        raise ValueError(f"literal pattern shape ({lit.q},{lit.k}) does not match ({P.q},{P.k})")
    table = tuple(P(lit(z)) for z in all_tuples(P.q, P.k))
    return Predicate(P.q, P.k, table)


def shift_distribution(mu: RationalDistribution, lit: LiteralPattern) -> RationalDistribution:
    """mu_l(z) = mu(lit(z))."""
    if lit.k != mu.k or lit.q != mu.q:
        raise ValueError("literal pattern shape does not match distribution")
    return RationalDistribution(mu.q, mu.k, tuple(mu[lit(z)] for z in all_tuples(mu.q, mu.k)))


def builtin(name: str) -> Predicate:
    """Named predicates: ``kxor:<k>:<b>``, ``ksat:<k>``, ``one-in-three``."""
    parts = name.strip().lower().split(":")
    if parts[0] in ("one-in-three", "1in3", "1-in-3"):
        table = [sum(z) == 1 for z in all_tuples(2, 3)]
        return Predicate(2, 3, tuple(table), "one-in-three")
    if parts[0] == "kxor" and len(parts) == 3:
        k, b = int(parts[1]), int(parts[2])
        if b not in (0, 1):
            raise ValueError("kxor parity bit must be 0 or 1")
        table = [sum(z) % 2 == b for z in all_tuples(2, k)]
        return Predicate(2, k, tuple(table), f"kxor:{k}:{b}")
    if parts[0] == "ksat" and len(parts) == 2:
        k = int(parts[1])
        table = [any(z) for z in all_tuples(2, k)]
        return Predicate(2, k, tuple(table), f"ksat:{k}")
    raise ValueError(f"unknown predicate {name!r}")


def parse_predicate(spec) -> Predicate:
    """A builtin name, a JSON object, or a path to a JSON file."""
    if isinstance(spec, Predicate):
        return spec
    if isinstance(spec, dict):
        return Predicate.from_json(spec)
    if isinstance(spec, str) and spec.endswith(".json"):
        import json
        with open(spec) as fh:
            return Predicate.from_json(json.load(fh))
    return builtin(spec)
