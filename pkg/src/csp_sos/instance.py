"""Factor-graph instances: constraints with scopes and constraint distributions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .predicates import (LiteralPattern, Predicate, RationalDistribution, apply_literals,
                         builtin, parse_predicate, shift_distribution)
from .rational import frac_str, parse_frac

__all__ = ["Constraint", "Instance", "InstanceError", "generate", "build_fixture",
           "attach_distributions", "load", "store", "dumps", "loads", "from_dimacs",
           "xor_constraint", "twise_violation"]

SCHEMA = "csp-sos/instance/1"


class InstanceError(ValueError):
    pass


def twise_violation(mu: RationalDistribution, t: int):
    """First (coords, cell, mass) whose t-marginal is not uniform, else None."""
    import itertools
    cell = Fraction(1, mu.q ** t)
    for coords in itertools.combinations(range(mu.k), t):
        marg = mu.marginal(coords)
        for key in itertools.product(range(mu.q), repeat=t):
            m = marg.get(key, Fraction(0))
            if m != cell:
                return coords, key, m
    return None


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    mu: RationalDistribution
    pred: Predicate | None = None
    literals: LiteralPattern | None = None

    @property
    def arity(self) -> int:
        return len(self.scope)

    @cached_property
    def predicate(self) -> Predicate | None:
        """The predicate actually applied to the scope (literals folded in)."""
        if self.pred is None:
            return None
        if self.literals is None:
            return self.pred
        return apply_literals(self.pred, self.literals)

    def to_json(self) -> dict:
        d = {"scope": list(self.scope), "mu": self.mu.to_json()}
        if self.pred is not None:
            d["pred"] = self.pred.to_json()
        if self.literals is not None:
            d["literals"] = self.literals.to_json()
        return d


@dataclass(frozen=True)
class Instance:
    n: int
    q: int
    tau: int
    constraints: tuple[Constraint, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    names: tuple[str, ...] | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        _validate(self)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def K(self) -> int:
        return max((c.arity for c in self.constraints), default=0)

    def scope(self, f: int) -> tuple[int, ...]:
        return self.constraints[f].scope

    @cached_property
    def var_cons(self) -> tuple[tuple[int, ...], ...]:
        """For each variable, the constraints whose scope contains it."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for f, c in enumerate(self.constraints):
            for i in c.scope:
                adj[i].append(f)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def edges(self) -> frozenset:
        return frozenset((f, i) for f, c in enumerate(self.constraints) for i in c.scope)

    def degree(self, i: int) -> int:
        return len(self.var_cons[i])

    def name(self, i: int) -> str:
        return self.names[i] if self.names else f"v{i}"

    def var_index(self, name) -> int:
        if isinstance(name, int):
            return name
        if self.names and name in self.names:
            return self.names.index(name)
        if isinstance(name, str) and name.lstrip("-").isdigit():
            return int(name)
        if isinstance(name, str) and name.startswith("v") and name[1:].isdigit():
            return int(name[1:])
        raise InstanceError(f"unknown variable {name!r}")

    def with_constraints(self, constraints, **meta) -> "Instance":
        return Instance(self.n, self.q, self.tau, tuple(constraints),
                        {**self.meta, **meta}, self.names)

    def to_json(self) -> dict:
        d = {"n": self.n, "tau": self.tau, "q": self.q,
             "constraints": [c.to_json() for c in self.constraints],
             "meta": self.meta}
        if self.names:
            d["names"] = list(self.names)
        return d


def _validate(inst: Instance):
    if not isinstance(inst.n, int) or inst.n < 0:
        raise InstanceError(f"n must be a nonnegative integer, got {inst.n!r}")
    if inst.tau < 3:
        raise InstanceError(f"tau must be >= 3, got {inst.tau}")
    if inst.names is not None and len(inst.names) != inst.n:
        raise InstanceError("names must list exactly n variables")
    for f, c in enumerate(inst.constraints):
        where = f"constraints[{f}]"
        if len(set(c.scope)) != len(c.scope):
            raise InstanceError(f"{where}.scope: repeated variable in {list(c.scope)}")
        for i in c.scope:
            if not isinstance(i, (int, np.integer)) or not 0 <= i < inst.n:
                raise InstanceError(f"{where}.scope: variable {i} out of range [0,{inst.n})")
        if c.arity < inst.tau - 1:
            raise InstanceError(f"{where}: arity {c.arity} < tau-1 = {inst.tau - 1}")
        if c.mu.k != c.arity or c.mu.q != inst.q:
            raise InstanceError(f"{where}.mu: shape ({c.mu.q},{c.mu.k}) does not match scope")
        if c.pred is not None and (c.pred.k != c.arity or c.pred.q != inst.q):
            raise InstanceError(f"{where}.pred: shape does not match scope")
        bad = twise_violation(c.mu, inst.tau - 1)
        if bad is not None:
            coords, cell, mass = bad
            raise InstanceError(
                f"{where}.mu is not {inst.tau - 1}-wise uniform: coordinates {list(coords)} "
                f"cell {list(cell)} has mass {mass}")


def attach_distributions(inst: Instance, mu_map) -> Instance:
    """Replace constraint distributions; mu_map is a dict f -> mu or one shared mu."""
    new = []
    for f, c in enumerate(inst.constraints):
        mu = mu_map.get(f, c.mu) if isinstance(mu_map, dict) else mu_map
        new.append(Constraint(c.scope, mu, c.pred, c.literals))
    return inst.with_constraints(new)


def _random_pattern(rng, q: int, k: int) -> LiteralPattern:
    if q == 2:
        return LiteralPattern.from_signs([1 if b else -1 for b in rng.integers(0, 2, size=k)])
    return LiteralPattern(tuple(tuple(int(c) for c in rng.permutation(q)) for _ in range(k)))


def generate(n: int, m: int, P, seed: int, tau: int = 3, base_mu=None,
             literals: bool = True) -> Instance:
    """Random CSP(P^±): i.i.d. constraints with uniform ordered scopes and literal patterns."""
    P = parse_predicate(P)
    k = P.k
    if n < k:
        raise InstanceError(f"n={n} < arity {k}")
    if m < 1:
        raise InstanceError("m must be >= 1")
    if base_mu is None:
        from .twise import delta
        _, base_mu, _ = delta(P, tau - 1)
    bad = twise_violation(base_mu, tau - 1)
    if bad is not None:
        raise InstanceError(f"base distribution is not {tau - 1}-wise uniform: {bad}")
    rng = np.random.default_rng(seed)
    cons = []
    for _ in range(m):
        scope = tuple(int(v) for v in rng.choice(n, size=k, replace=False))
        lit = _random_pattern(rng, P.q, k) if literals else LiteralPattern.identity(P.q, k)
        cons.append(Constraint(scope, shift_distribution(base_mu, lit), P, lit))
    meta = {"seed": seed, "delta": frac_str(Fraction(m, n)), "family": P.name or "custom"}
    return Instance(n, P.q, tau, tuple(cons), meta)


def xor_constraint(scope, sign: int) -> Constraint:
    """The +-1 equation prod x_i = sign (TRUE = +1), with mu uniform on its solutions."""
    k = len(scope)
    # a product of +-1 values is (-1)^(#zeros); pick the parity of #ones that matches
    parity = (k - (0 if sign == 1 else 1)) % 2
    P = builtin(f"kxor:{k}:{parity}")
    mu = RationalDistribution.uniform_on(2, k, P.satisfying())
    return Constraint(tuple(scope), mu, P, LiteralPattern.identity(2, k))


_BLOCK = [(1, 2, 3), (2, 4, 5), (4, 5, 6), (6, 7, 8), (3, 7, 8)]


def build_fixture(name: str, tau: int = 3) -> Instance:
    """Hand-built instances: ``block``, ``star:<arms>:<bseed>``, ``twin``."""
    parts = name.split(":")
    if parts[0] == "block":
        names = tuple([f"x{i}" for i in range(1, 9)] + [f"y{i}" for i in range(1, 9)])
        cons = [xor_constraint(tuple(a - 1 for a in s), 1) for s in _BLOCK]
        cons += [xor_constraint(tuple(a + 7 for a in s), -1) for s in _BLOCK]
        return Instance(16, 2, tau, tuple(cons), {"fixture": "block"}, names)
    if parts[0] == "star":
        if len(parts) != 3:
            raise InstanceError("star fixture is star:<arms>:<bseed>")
        arms, bseed = int(parts[1]), int(parts[2])
        if arms < 1:
            raise InstanceError("star needs at least one arm")
        rng = np.random.default_rng(bseed)
        b = [1 if v else -1 for v in rng.integers(0, 2, size=arms)]
        names = ["x0"]
        for i in range(1, arms + 1):
            names += [f"x{i}", f"y{i}"]
        cons = [xor_constraint((0, 2 * i - 1, 2 * i), b[i - 1]) for i in range(1, arms + 1)]
        return Instance(2 * arms + 1, 2, tau, tuple(cons),
                        {"fixture": name, "b": b}, tuple(names))
    if parts[0] == "twin":
        c = xor_constraint((0, 1, 2), 1)
        return Instance(4, 2, tau, (c, c, xor_constraint((1, 2, 3), -1)), {"fixture": "twin"})
    raise InstanceError(f"unknown fixture {name!r}")


# --- serialization -----------------------------------------------------------------------

def dumps(inst: Instance) -> str:
    return json.dumps(inst.to_json(), sort_keys=True, separators=(",", ":")) + "\n"


def store(inst: Instance, path):
    with open(path, "w") as fh:
        fh.write(dumps(inst))


def _field(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise InstanceError(f"{where}: missing field {key!r}")
    return d[key]


def loads(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"line {e.lineno} col {e.colno}: {e.msg}") from None
    n = _field(d, "n", "instance")
    q = _field(d, "q", "instance")
    tau = _field(d, "tau", "instance")
    cons = []
    for f, cd in enumerate(_field(d, "constraints", "instance")):
        where = f"constraints[{f}]"
        scope = _field(cd, "scope", where)
        if not isinstance(scope, list) or not all(isinstance(v, int) for v in scope):
            raise InstanceError(f"{where}.scope: expected a list of integers")
        probs = _field(_field(cd, "mu", where), "probs", f"{where}.mu")
        try:
            mu = RationalDistribution(q, len(scope), tuple(parse_frac(p) for p in probs))
        except (ValueError, TypeError) as e:
            raise InstanceError(f"{where}.mu: {e}") from None
        pred = Predicate.from_json(cd["pred"]) if "pred" in cd else None
        lit = LiteralPattern.from_json(cd["literals"]) if "literals" in cd else None
        cons.append(Constraint(tuple(scope), mu, pred, lit))
    names = tuple(d["names"]) if "names" in d else None
    return Instance(n, q, tau, tuple(cons), d.get("meta", {}), names)


def load(path) -> Instance:
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".cnf"):
        return from_dimacs(text)
    return loads(text)


def from_dimacs(text: str, tau: int = 3) -> Instance:
    """k-SAT clauses become OR predicates with negations as literal patterns."""
    from .twise import delta
    n = None
    clauses, cur = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line[0] in "c%":
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise InstanceError(f"line {lineno}: bad problem line {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if cur:
                    clauses.append((lineno, cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append((len(text.splitlines()), cur))
    if n is None:
        raise InstanceError("missing 'p cnf' line")
    witness = {}
    cons = []
    for lineno, cl in clauses:
        scope = tuple(abs(v) - 1 for v in cl)
        if len(set(scope)) != len(scope):
            raise InstanceError(f"line {lineno}: clause repeats a variable")
        k = len(cl)
        if k not in witness:
            witness[k] = delta(builtin(f"ksat:{k}"), min(tau - 1, k))[1]
        lit = LiteralPattern.from_signs([1 if v > 0 else -1 for v in cl])
        cons.append(Constraint(scope, shift_distribution(witness[k], lit),
                               builtin(f"ksat:{k}"), lit))
    return Instance(n, 2, tau, tuple(cons), {"source": "dimacs"})
