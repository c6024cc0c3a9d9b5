"""Closures cl(S): unions of small S-closed tau-subgraphs.

Peeling. An S-closed tau-subgraph H inside the current edge set E survives every
peel step: if a variable i outside S has degree 1 in E, it has degree <= 1 in H,
and a degree-1 vertex of H outside S is forbidden, so i carries no H-edge. If a
constraint has degree < tau in E it has degree < tau in H, so it is not in H.
Hence the fixpoint contains every S-closed tau-subgraph, and since it is itself
S-closed, it is the maximal one.

Search. Components of an S-closed subgraph are S-closed, and for a fixed
constraint set C the union of all S-closed subgraphs using exactly C is obtained
by peeling the edges of C. So cl(S) is the union of peel(C) over connected
constraint sets C with |C| <= SMALL inside the maximal closed subgraph.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .plausibility import BudgetExceeded, connected_constraint_sets, constraint_adjacency
from .subgraph import Subgraph, account, full_neighborhood, notify

__all__ = ["peel", "max_closed", "ClosureResult", "closure", "constraint_closure_trivial",
           "ClosureError", "Closer"]


class ClosureError(ValueError):
    pass


def peel(edges, S, tau: int) -> Subgraph:
    """Largest S-closed tau-subgraph inside the given edge set."""
    S = frozenset(S)
    by_con: dict = {}
    by_var: dict = {}
    for f, i in edges:
        by_con.setdefault(f, set()).add(i)
        by_var.setdefault(i, set()).add(f)
    stack_c = [f for f, vs in by_con.items() if len(vs) < tau]
    stack_v = [i for i, fs in by_var.items() if len(fs) == 1 and i not in S]
    while stack_c or stack_v:
        if stack_c:
            f = stack_c.pop()
            vs = by_con.pop(f, None)
            if vs is None:
                continue
            for i in vs:
                fs = by_var[i]
                fs.discard(f)
                if len(fs) == 1 and i not in S:
                    stack_v.append(i)
        else:
            i = stack_v.pop()
            fs = by_var.get(i)
            if not fs or len(fs) != 1 or i in S:
                continue
            (f,) = fs
            fs.clear()
            vs = by_con.get(f)
            if vs is not None:
                vs.discard(i)
                if len(vs) < tau:
                    stack_c.append(f)
    return Subgraph(frozenset((f, i) for f, vs in by_con.items() for i in vs))


def max_closed(inst, S, tau: int | None = None) -> Subgraph:
    tau = inst.tau if tau is None else tau
    return peel(inst.edges, S, tau)


@dataclass(frozen=True)
class ClosureResult:
    S: frozenset
    cl: Subgraph
    revenue: int
    method: str
    explored: int

    def to_json(self, inst=None) -> dict:
        d = {"S": sorted(self.S), "method": self.method, "explored": self.explored,
             "revenue": self.revenue, "constraints": sorted(self.cl.cons),
             "closure": self.cl.to_json()}
        if inst is not None and inst.names:
            d["S_names"] = [inst.name(i) for i in sorted(self.S)]
        return d


def closure(inst, S, small: int, tau: int | None = None, zeta=None,
            budget: int | None = 2_000_000, method: str = "auto") -> ClosureResult:
    """Exact cl(S).

    When zeta is given the search uses the revenue bound R <= |S|, so candidate
    sets are capped at |S|/zeta constraints; that bound is only valid on plausible
    hosts, so leave zeta as None when plausibility is not certified.
    """
    tau = inst.tau if tau is None else tau
    S = frozenset(S)
    M = max_closed(inst, S, tau)
    if method == "auto" and len(M.cons) <= small:
        notify(M)
        return ClosureResult(S, M, account(M, tau, 0).revenue, "peel", 0)
    cap = small
    if zeta is not None and zeta > 0:
        cap = min(cap, int(Fraction(len(S)) / Fraction(zeta)))
    nb: dict = {}
    for f, i in M.edges:
        nb.setdefault(f, []).append(i)
    adj = constraint_adjacency(nb)
    counter = [0]
    union: set = set()

    try:
        for cons in connected_constraint_sets(adj, cap, budget=budget, counter=counter):
            part = peel([(f, i) for f in cons for i in nb[f]], S, tau)
            if part.edges and part.cons == frozenset(cons):
                notify(part)
                union |= part.edges
    except BudgetExceeded as e:
        raise ClosureError(f"closure search budget exceeded after {e.explored} nodes") from None
    cl = Subgraph(frozenset(union))
    return ClosureResult(S, cl, account(cl, tau, 0).revenue, "search", counter[0])


def constraint_closure_trivial(inst, f: int, small: int, tau: int | None = None) -> bool:
    """Whether cl(N(f)) is exactly the full neighbourhood subgraph of f."""
    res = closure(inst, inst.scope(f), small, tau)
    return res.cl == full_neighborhood(inst, f)


class Closer:
    """Memoized closures for a fixed instance, SMALL and tau."""

    def __init__(self, inst, small: int, tau: int | None = None, zeta=None,
                 budget: int | None = 2_000_000):
        self.inst, self.small = inst, small
        self.tau = inst.tau if tau is None else tau
        self.zeta, self.budget = zeta, budget
        self._cache: dict = {}

    def __call__(self, S) -> Subgraph:
        return self.result(S).cl

    def result(self, S) -> ClosureResult:
        key = frozenset(S)
        r = self._cache.get(key)
        if r is None:
            r = closure(self.inst, key, self.small, self.tau, self.zeta, self.budget)
            self._cache[key] = r
        return r

    def __len__(self):
        return len(self._cache)
