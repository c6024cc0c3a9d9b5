"""t-wise uniform supports of predicates: delta_P(t) and the complexity C(P)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .lp import INFEASIBLE, OPTIMAL, LinearProgram, lp_solve
from .predicates import Predicate, RationalDistribution, all_tuples
from .rational import frac_str

__all__ = ["twise_rows", "delta", "supports_twise", "complexity", "TwiseRecord",
           "TwiseReport", "analyze", "delta_tv"]


def twise_rows(q: int, k: int, t: int, offset: int = 0):
    """Equality rows forcing every t-coordinate marginal of a distribution to be uniform.

    Variables ``offset .. offset+q^k-1`` hold the distribution in index order.
    """
    rows = []
    tuples = list(all_tuples(q, k))
    rows.append(({offset + i: 1 for i in range(len(tuples))}, "==", 1))
    if t == 0:
        return rows
    cell = Fraction(1, q ** t)
    for coords in itertools.combinations(range(k), t):
        groups: dict = {}
        for i, z in enumerate(tuples):
            groups.setdefault(tuple(z[j] for j in coords), []).append(i)
        for key in itertools.product(range(q), repeat=t):
            rows.append(({offset + i: 1 for i in groups[key]}, "==", cell))
    return rows


def _check_t(P: Predicate, t: int):
    if not isinstance(t, int) or not 0 <= t <= P.k:
        raise ValueError(f"t={t!r} out of range 0..{P.k}")


def delta(P: Predicate, t: int):
    """Return (value, witness, lp result): min over t-wise uniform mu of mu(P^{-1}(0))."""
    _check_t(P, t)
    size = P.q ** P.k
    c = [Fraction(0) if b else Fraction(1) for b in P.table]
    lp = LinearProgram(size, c)
    for row in twise_rows(P.q, P.k, t):
        lp.add(*row)
    res = lp_solve(lp)
    if res.status != OPTIMAL:   # the uniform distribution is always feasible
        raise RuntimeError(f"delta LP returned {res.status}")
    mu = RationalDistribution(P.q, P.k, tuple(res.x))
    return res.optimum, mu, res


def delta_tv(P: Predicate, t: int) -> Fraction:
    """Secondary formulation: min TV(mu, sigma) over t-wise uniform mu and sigma on P^{-1}(1).

    Variables are mu, sigma and slack d >= |mu - sigma| entrywise; TV = sum(d)/2.
    """
    _check_t(P, t)
    size = P.q ** P.k
    n = 3 * size
    c = [Fraction(0)] * (2 * size) + [Fraction(1, 2)] * size
    lp = LinearProgram(n, c)
    for row in twise_rows(P.q, P.k, t):
        lp.add(*row)
    lp.add({size + i: 1 for i in range(size)}, "==", 1)
    for i, b in enumerate(P.table):
        if not b:
            lp.add({size + i: 1}, "==", 0)
        lp.add({2 * size + i: 1, i: -1, size + i: 1}, ">=", 0)
        lp.add({2 * size + i: 1, i: 1, size + i: -1}, ">=", 0)
    res = lp_solve(lp)
    if res.status != OPTIMAL:
        raise RuntimeError(f"TV LP returned {res.status}")
    return res.optimum


def supports_twise(P: Predicate, t: int):
    """Return (feasible, witness-or-farkas).

    Feasibility LP: a t-wise uniform distribution vanishing off P^{-1}(1).
    """
    _check_t(P, t)
    size = P.q ** P.k
    lp = LinearProgram(size)
    for row in twise_rows(P.q, P.k, t):
        lp.add(*row)
    for i, b in enumerate(P.table):
        if not b:
            lp.add({i: 1}, "==", 0)
    res = lp_solve(lp)
    if res.status == OPTIMAL:
        return True, RationalDistribution(P.q, P.k, tuple(res.x))
    assert res.status == INFEASIBLE
    return False, res.farkas


def complexity(P: Predicate):
    """Smallest tau in 3..k such that P supports no tau-wise uniform distribution, else None.

    Also returns the list of t < 3 that already fail, for information.
    """
    if P.sat_count == 0:
        raise ValueError("predicate is unsatisfiable; no supported distribution exists")
    early = [t for t in (1, 2) if t <= P.k and not supports_twise(P, t)[0]]
    for tau in range(3, P.k + 1):
        if not supports_twise(P, tau)[0]:
            return tau, early
    return None, early


@dataclass
class TwiseRecord:
    t: int
    feasible: bool
    delta: Fraction
    witness: RationalDistribution
    basis: list
    farkas: list | None = None

    def to_json(self):
        d = {"t": self.t, "feasible": self.feasible, "delta": frac_str(self.delta),
             "witness": self.witness.to_json(), "basis": self.basis}
        if self.farkas is not None:
            d["farkas"] = [frac_str(v) for v in self.farkas]
        return d


@dataclass
class TwiseReport:
    predicate: dict
    records: list = field(default_factory=list)
    complexity: int | None = None
    early_failures: list = field(default_factory=list)

    def to_json(self):
        return {"predicate": self.predicate,
                "records": [r.to_json() for r in self.records],
                "complexity": self.complexity if self.complexity is not None else "none",
                "early_failures": self.early_failures}


def analyze(P: Predicate, ts=None) -> TwiseReport:
    ts = list(range(1, P.k + 1)) if ts is None else list(ts)
    rep = TwiseReport(P.to_json())
    for t in ts:
        value, mu, res = delta(P, t)
        feasible, cert = supports_twise(P, t)
        rep.records.append(TwiseRecord(t, feasible, value, mu, res.basis,
                                       None if feasible else cert))
    if P.sat_count:
        rep.complexity, rep.early_failures = complexity(P)
    return rep
