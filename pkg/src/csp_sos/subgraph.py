"""Edge-induced subgraphs of a factor graph and their credit/debit accounting."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .rational import Q, frac_str

__all__ = ["Subgraph", "Accounting", "account", "is_tau_subgraph", "accounting_identity",
           "full_neighborhood", "subgraph_of_constraints", "EMPTY", "observing", "notify"]


@dataclass(frozen=True)
class Subgraph:
    """Edges (f, i) plus optional isolated variables (the tau-subgraph+ extension).

    Isolated variables that also carry an edge are dropped on construction.
    """

    edges: frozenset = frozenset()
    isolated: frozenset = frozenset()

    def __post_init__(self):
        edges = frozenset(self.edges)
        object.__setattr__(self, "edges", edges)
        iso = frozenset(self.isolated)
        if iso:
            covered = {i for _, i in edges}
            iso = iso - covered
        object.__setattr__(self, "isolated", iso)

    @cached_property
    def cons(self) -> frozenset:
        return frozenset(f for f, _ in self.edges)

    @cached_property
    def edge_vbls(self) -> frozenset:
        return frozenset(i for _, i in self.edges)

    @cached_property
    def vbls(self) -> frozenset:
        return self.edge_vbls | self.isolated

    @cached_property
    def var_degree(self) -> Counter:
        return Counter(i for _, i in self.edges)

    @cached_property
    def con_degree(self) -> Counter:
        return Counter(f for f, _ in self.edges)

    @cached_property
    def nbhd(self) -> dict:
        """N_H(f) for each constraint of H, as sorted tuples."""
        out: dict = {}
        for f, i in sorted(self.edges):
            out.setdefault(f, []).append(i)
        return {f: tuple(v) for f, v in out.items()}

    @cached_property
    def leaves(self) -> frozenset:
        return frozenset(i for i, d in self.var_degree.items() if d == 1)

    @property
    def interior(self) -> frozenset:
        return frozenset(i for i, d in self.var_degree.items() if d >= 2)

    def __len__(self):
        return len(self.edges)

    def __bool__(self):
        return bool(self.edges) or bool(self.isolated)

    def __or__(self, other: "Subgraph") -> "Subgraph":
        return Subgraph(self.edges | other.edges, self.isolated | other.isolated)

    def __le__(self, other: "Subgraph") -> bool:
        return self.edges <= other.edges and self.vbls <= other.vbls

    def with_isolated(self, vs) -> "Subgraph":
        return Subgraph(self.edges, self.isolated | frozenset(vs))

    def is_closed(self, S) -> bool:
        """All leaves in S."""
        return self.leaves <= frozenset(S)

    def components(self) -> list["Subgraph"]:
        """Connected components (isolated variables are their own components)."""
        parent: dict = {}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for f, i in self.edges:
            a, b = ("c", f), ("v", i)
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict = {}
        for f, i in self.edges:
            groups.setdefault(find(("c", f)), set()).add((f, i))
        comps = [Subgraph(frozenset(g)) for g in groups.values()]
        comps += [Subgraph(frozenset(), frozenset([i])) for i in self.isolated]
        return sorted(comps, key=lambda h: sorted(h.edges) or [(-1, min(h.isolated))])

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def to_json(self) -> dict:
        d = {"edges": sorted([f, i] for f, i in self.edges)}
        if self.isolated:
            d["isolated"] = sorted(self.isolated)
        return d

    @classmethod
    def from_json(cls, d) -> "Subgraph":
        if isinstance(d, list):
            d = {"edges": d}
        return cls(frozenset((int(f), int(i)) for f, i in d.get("edges", [])),
                   frozenset(int(i) for i in d.get("isolated", [])))

    def sort_key(self):
        return (len(self.cons), sorted(self.edges), sorted(self.isolated))


EMPTY = Subgraph()


def full_neighborhood(inst, f: int) -> Subgraph:
    """H_f: the constraint f together with all its edges."""
    return Subgraph(frozenset((f, i) for i in inst.scope(f)))


def subgraph_of_constraints(inst, cons) -> Subgraph:
    return Subgraph(frozenset((f, i) for f in cons for i in inst.scope(f)))


@dataclass(frozen=True)
class Accounting:
    credits: int
    e_v: int
    e_c: int
    revenue: int
    cost: Fraction
    income: Fraction
    c: int
    v: int
    e: int

    @property
    def excess(self) -> int:
        return self.e_v + self.e_c

    @property
    def plausible(self) -> bool:
        return self.income >= 0

    def to_json(self) -> dict:
        return {"credits": self.credits, "e_v": self.e_v, "e_c": self.e_c,
                "revenue": self.revenue, "cost": frac_str(self.cost),
                "income": frac_str(self.income), "c": self.c, "v": self.v, "e": self.e}


def account(H: Subgraph, tau: int, zeta) -> Accounting:
    zeta = Q(zeta)
    credits = sum(1 for d in H.var_degree.values() if d == 1) + 2 * len(H.isolated)
    e_v = sum(d - 2 for d in H.var_degree.values() if d > 2)
    e_c = sum(d - tau for d in H.con_degree.values() if d > tau)
    R = credits - e_v - e_c
    c = len(H.cons)
    cost = zeta * c
    return Accounting(credits, e_v, e_c, R, cost, R - cost, c, len(H.vbls), len(H.edges))


def is_tau_subgraph(H: Subgraph, tau: int) -> bool:
    return all(d >= tau for d in H.con_degree.values())


def accounting_identity(H: Subgraph, tau: int, zeta) -> bool:
    """Check e = (tau - zeta)/2 * c + v - I/2 on a tau-subgraph.

    Isolated variables add 1 to v and 2 credits, so the identity survives them.
    """
    if not is_tau_subgraph(H, tau):
        raise ValueError("accounting identity needs a tau-subgraph")
    zeta = Q(zeta)
    a = account(H, tau, zeta)
    return a.e == (tau - zeta) / 2 * a.c + a.v - a.income / 2


# Enumerators report every tau-subgraph they materialize to registered observers,
# so self-checks (like the accounting identity) can ride along with real workloads.
_observers: list = []


class observing:
    """Context manager registering ``callback(H)`` for enumerated tau-subgraphs."""

    def __init__(self, callback):
        self.callback = callback

    def __enter__(self):
        _observers.append(self.callback)
        return self

    def __exit__(self, *exc):
        _observers.remove(self.callback)
        return False


def notify(H: Subgraph):
    for cb in _observers:
        cb(H)
