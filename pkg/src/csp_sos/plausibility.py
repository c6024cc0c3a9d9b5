"""Search for implausible tau-subgraphs, the low-income census, and certified SMALL.

Connected constraint sets are grown with the ESU scheme (each connected set is
produced exactly once). For a fixed constraint set C, taking every edge of every
constraint minimizes income: dropping an edge (f, i) lowers e by one and v by at
most one, and income is (tau - zeta)c + 2v - 2e on tau-subgraphs. So the
violation search only needs full-scope candidates; the census enumerates all
edge choices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rational import Q, frac_str
from .subgraph import Subgraph, account, notify

__all__ = ["BudgetExceeded", "PlausibilityResult", "connected_constraint_sets",
           "find_implausible", "certified_small", "enumerate_tau_subgraphs",
           "low_income_census", "CensusResult", "constraint_adjacency"]


class BudgetExceeded(RuntimeError):
    def __init__(self, explored: int, what: str = "search"):
        super().__init__(f"{what} budget exceeded after {explored} nodes")
        self.explored = explored


def _nbhds(inst, tau, allowed=None):
    """Usable neighbourhoods: constraint -> tuple of variables (arity >= tau only)."""
    out = {}
    if allowed is None:
        for f, c in enumerate(inst.constraints):
            if c.arity >= tau:
                out[f] = c.scope
    else:
        tmp: dict = {}
        for f, i in allowed:
            tmp.setdefault(f, []).append(i)
        for f, vs in tmp.items():
            if len(vs) >= tau:
                out[f] = tuple(sorted(vs))
    return out


def constraint_adjacency(nb: dict) -> dict:
    by_var: dict = {}
    for f, vs in nb.items():
        for i in vs:
            by_var.setdefault(i, []).append(f)
    adj = {f: set() for f in nb}
    for fs in by_var.values():
        for f in fs:
            adj[f].update(fs)
    for f in adj:
        adj[f].discard(f)
    return adj


def connected_constraint_sets(adj: dict, c_max: int, exact_size: int | None = None,
                              prune=None, budget: int | None = None, counter=None):
    """Yield each connected set of at most c_max constraints once, as a sorted tuple.

    ``prune(members)`` returning True cuts the subtree below ``members``.
    """
    counter = counter if counter is not None else [0]

    def extend(sub, ext, root, excl):
        counter[0] += 1
        if budget is not None and counter[0] > budget:
            raise BudgetExceeded(counter[0])
        if exact_size is None or len(sub) == exact_size:
            yield tuple(sorted(sub))
        if len(sub) == (exact_size or c_max):
            return
        if prune is not None and prune(sub):
            return
        ext = sorted(ext)
        while ext:
            w = ext.pop(0)
            new = {u for u in adj[w] if u > root and u not in excl}
            yield from extend(sub + [w], sorted(set(ext) | new), root,
                              excl | adj[w] | {w})

    for v in sorted(adj):
        yield from extend([v], {u for u in adj[v] if u > v}, v, adj[v] | {v})


@dataclass
class PlausibilityResult:
    witness: Subgraph | None
    income: Fraction | None
    explored: int
    complete: bool
    c_max: int
    mode: str

    @property
    def plausible(self) -> bool:
        return self.witness is None

    def to_json(self) -> dict:
        return {"plausible": self.plausible, "c_max": self.c_max, "mode": self.mode,
                "complete": self.complete, "explored": self.explored,
                "witness": self.witness.to_json() if self.witness else None,
                "income": frac_str(self.income) if self.income is not None else None}


def _full(nb, cons) -> Subgraph:
    return Subgraph(frozenset((f, i) for f in cons for i in nb[f]))


def find_implausible(inst, tau: int, zeta, c_max: int, mode: str = "exact",
                     budget: int | None = 5_000_000, seed: int = 0,
                     restarts: int = 200) -> PlausibilityResult:
    """Smallest implausible tau-subgraph with at most c_max constraints, if any.

    Exact mode deepens the size bound one constraint at a time, so the first
    witness found has the fewest constraints; among those the lexicographically
    smallest edge list is returned. Disconnected violations need no search: income
    is additive over components, so some component is already a violation.
    """
    zeta = Q(zeta)
    if mode == "heuristic":
        return _heuristic(inst, tau, zeta, c_max, seed, restarts)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    nb = _nbhds(inst, tau)
    adj = constraint_adjacency(nb)
    kmax = max((len(v) for v in nb.values()), default=0)
    counter = [0]
    for size in range(1, c_max + 1):
        def prune(sub, size=size):
            # income of any completion is at least (tau-zeta)size + 2v - 2(e + rest*kmax)
            v = len({i for f in sub for i in nb[f]})
            e = sum(len(nb[f]) for f in sub)
            lb = (tau - zeta) * size + 2 * v - 2 * (e + (size - len(sub)) * kmax)
            return lb >= 0
        best = None
        for cons in connected_constraint_sets(adj, c_max, exact_size=size, prune=prune,
                                              budget=budget, counter=counter):
            H = _full(nb, cons)
            notify(H)
            a = account(H, tau, zeta)
            if a.income < 0 and (best is None or H.sort_key() < best[0].sort_key()):
                best = (H, a.income)
        if best is not None:
            return PlausibilityResult(best[0], best[1], counter[0], True, c_max, mode)
    return PlausibilityResult(None, None, counter[0], True, c_max, mode)


def _heuristic(inst, tau, zeta, c_max, seed, restarts) -> PlausibilityResult:
    nb = _nbhds(inst, tau)
    adj = constraint_adjacency(nb)
    rng = np.random.default_rng(seed)
    keys = sorted(nb)
    explored = 0
    best = None
    for _ in range(restarts if keys else 0):
        cur = [keys[int(rng.integers(len(keys)))]]
        while len(cur) < c_max:
            cands = sorted(set().union(*(adj[f] for f in cur)) - set(cur))
            if not cands:
                break
            scored = []
            for g in cands:
                explored += 1
                scored.append((account(_full(nb, cur + [g]), tau, zeta).income, g))
            low = min(s for s, _ in scored)
            ties = [g for s, g in scored if s == low]
            cur.append(ties[int(rng.integers(len(ties)))])
            H = _full(nb, cur)
            inc = account(H, tau, zeta).income
            if inc < 0 and (best is None or H.sort_key() < best[0].sort_key()):
                best = (H, inc)
                break
    if best is None:
        return PlausibilityResult(None, None, explored, False, c_max, "heuristic")
    return PlausibilityResult(best[0], best[1], explored, False, c_max, "heuristic")


def certified_small(inst, tau: int, zeta, c_max: int, budget: int | None = 5_000_000):
    """Largest SMALL with 2*SMALL <= c_max whose plausibility is certified exactly.

    Returns (SMALL, result); result.witness is the smallest violation found, if any.
    """
    res = find_implausible(inst, tau, zeta, c_max, budget=budget)
    if res.witness is None:
        return c_max // 2, res
    return (len(res.witness.cons) - 1) // 2, res


def enumerate_tau_subgraphs(inst, tau: int, c_max: int, allowed=None,
                            budget: int | None = 5_000_000):
    """All connected tau-subgraphs (every edge choice) with 1..c_max constraints."""
    nb = _nbhds(inst, tau, allowed)
    adj = constraint_adjacency(nb)
    for cons in connected_constraint_sets(adj, c_max, budget=budget):
        choices = [[s for r in range(tau, len(nb[f]) + 1)
                    for s in itertools.combinations(nb[f], r)] for f in cons]
        for pick in itertools.product(*choices):
            H = Subgraph(frozenset((f, i) for f, vs in zip(cons, pick) for i in vs))
            if len(cons) == 1 or H.is_connected():
                notify(H)
                yield H


@dataclass
class CensusResult:
    count: int
    samples: list = field(default_factory=list)

    def to_json(self):
        return {"count": self.count, "samples": [h.to_json() for h in self.samples]}


def low_income_census(inst, tau: int, zeta, c_max: int, income_max,
                      budget: int | None = 5_000_000, keep: int = 10) -> CensusResult:
    """Count nonempty tau-subgraphs with <= c_max constraints and income <= income_max.

    Connected pieces are enumerated, then vertex-disjoint unions are counted with
    additive cost and income.
    """
    zeta, income_max = Q(zeta), Q(income_max)
    pieces = []
    for H in enumerate_tau_subgraphs(inst, tau, c_max, budget=budget):
        pieces.append((H, account(H, tau, zeta).income))
    pieces.sort(key=lambda p: p[0].sort_key())
    # most negative income any selection from pieces[j:] can add
    suffix_min = [Fraction(0)] * (len(pieces) + 1)
    for j in range(len(pieces) - 1, -1, -1):
        suffix_min[j] = suffix_min[j + 1] + min(Fraction(0), pieces[j][1])
    count = 0
    samples: list = []

    def rec(start, cons, vbls, inc, chosen):
        nonlocal count
        for j in range(start, len(pieces)):
            H, a = pieces[j]
            if len(cons) + len(H.cons) > c_max or cons & H.cons or vbls & H.vbls:
                continue
            total = inc + a
            if total + suffix_min[j + 1] > income_max:
                continue
            if total <= income_max:
                count += 1
                if len(samples) < keep:
                    U = H
                    for G in chosen:
                        U = U | G
                    samples.append(U)
            rec(j + 1, cons | H.cons, vbls | H.vbls, total, chosen + [H])

    rec(0, frozenset(), frozenset(), Fraction(0), [])
    return CensusResult(count, samples)
