"""Exact computations with the planted distribution of a subgraph H.

Each constraint f of H draws a suggestion w_f ~ mu_f; we condition on the
suggestions agreeing on every edge of H. For an assignment x to vbls(H),

    Pr[suggestions consistent and equal to x] = prod_f mu_f|N_H(f) (x restricted to N_H(f)),

so the conditioned law is a product of factors, one per constraint, and we
marginalize it exactly by sparse variable elimination over Fractions.
Variables outside H are uniform and independent.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .subgraph import Subgraph

__all__ = ["Marginal", "PlantedInconsistency", "PlantedBudgetExceeded",
           "constraint_factor", "consistency_probability", "consistency_formula",
           "planted_marginal", "planted_expectation", "sample_planted"]

DEFAULT_BUDGET = 10_000_000


class PlantedInconsistency(ValueError):
    """Suggestions can never agree: the conditioning event has probability 0."""


class PlantedBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Marginal:
    """A distribution over assignments to ``vars`` (sorted); absent keys have mass 0."""

    vars: tuple
    probs: dict

    def __getitem__(self, values) -> Fraction:
        return self.probs.get(tuple(values), Fraction(0))

    def prob(self, assignment: dict) -> Fraction:
        """Mass of the event {x_i = c for (i, c) in assignment}; vars must be covered."""
        idx = [self.vars.index(i) for i in assignment]
        want = tuple(assignment.values())
        return sum((p for key, p in self.probs.items()
                    if tuple(key[j] for j in idx) == want), Fraction(0))

    def restrict(self, vs) -> "Marginal":
        vs = tuple(sorted(vs))
        idx = [self.vars.index(i) for i in vs]
        out: dict = {}
        for key, p in self.probs.items():
            k = tuple(key[j] for j in idx)
            out[k] = out.get(k, 0) + p
        return Marginal(vs, out)

    def __eq__(self, other):
        if not isinstance(other, Marginal):
            return NotImplemented
        return self.vars == other.vars and \
            {k: v for k, v in self.probs.items() if v} == {k: v for k, v in other.probs.items() if v}

    def __hash__(self):
        return hash(self.vars)

    def to_json(self):
        from .rational import frac_str
        return {"vars": list(self.vars),
                "probs": [[list(k), frac_str(v)] for k, v in sorted(self.probs.items()) if v]}


# A factor is (vars tuple, {assignment tuple: Fraction}) storing nonzero entries only.

def constraint_factor(inst, f: int, vs) -> tuple:
    """Marginal of mu_f on the scope positions holding the variables vs."""
    scope = inst.scope(f)
    vs = tuple(sorted(vs))
    pos = [scope.index(i) for i in vs]
    table: dict = {}
    for z, p in inst.constraints[f].mu.items():
        key = tuple(z[j] for j in pos)
        table[key] = table.get(key, 0) + p
    return vs, table


def _multiply(a, b, budget):
    av, at = a
    bv, bt = b
    common = [v for v in av if v in bv]
    out_vars = av + tuple(v for v in bv if v not in av)
    bi = [bv.index(v) for v in common]
    bextra = [j for j, v in enumerate(bv) if v not in av]
    ai = [av.index(v) for v in common]
    index: dict = {}
    for key, p in bt.items():
        index.setdefault(tuple(key[j] for j in bi), []).append((tuple(key[j] for j in bextra), p))
    out: dict = {}
    for key, p in at.items():
        for extra, r in index.get(tuple(key[j] for j in ai), ()):
            out[key + extra] = p * r
    if len(out) > budget:
        raise PlantedBudgetExceeded(f"factor table with {len(out)} entries exceeds budget {budget}")
    return out_vars, out


def _sum_out(fac, v):
    vs, t = fac
    j = vs.index(v)
    out: dict = {}
    for key, p in t.items():
        k = key[:j] + key[j + 1:]
        out[k] = out.get(k, 0) + p
    return vs[:j] + vs[j + 1:], out


def _factors(inst, H: Subgraph):
    return [constraint_factor(inst, f, vs) for f, vs in H.nbhd.items()]


def _eliminate(factors, keep, budget):
    """Sum out every variable not in keep; returns a single factor over keep."""
    factors = list(factors)
    keep = set(keep)
    while True:
        elim = sorted({v for vs, _ in factors for v in vs} - keep)
        if not elim:
            break

        def width(v):
            return len({u for vs, _ in factors if v in vs for u in vs})
        v = min(elim, key=lambda u: (width(u), u))
        group = [F for F in factors if v in F[0]]
        rest = [F for F in factors if v not in F[0]]
        prod = group[0]
        for F in group[1:]:
            prod = _multiply(prod, F, budget)
        factors = rest + [_sum_out(prod, v)]
    out = ((), {(): Fraction(1)})
    for F in factors:
        out = _multiply(out, F, budget)
    return out


def consistency_formula(inst, H: Subgraph) -> Fraction:
    """q^(v_H - e_H)."""
    return Fraction(inst.q) ** (len(H.edge_vbls) - len(H.edges))


def consistency_probability(inst, H: Subgraph, method: str = "formula",
                            budget: int = DEFAULT_BUDGET) -> Fraction:
    """Probability that independent suggestions agree on every edge of H.

    ``formula`` returns q^(v-e), valid whenever H contains no nonempty tau-subgraph
    without leaves (true on plausible hosts); ``exact`` sums the factor model;
    ``check`` computes both and raises if they differ.
    """
    if method == "formula":
        return consistency_formula(inst, H)
    _, t = _eliminate(_factors(inst, H), (), budget)
    exact = t.get((), Fraction(0))
    if method == "check" and exact != consistency_formula(inst, H):
        raise AssertionError(f"consistency probability {exact} != q^(v-e) "
                             f"= {consistency_formula(inst, H)}")
    return exact


def planted_marginal(inst, H: Subgraph, T, budget: int = DEFAULT_BUDGET) -> Marginal:
    T = tuple(sorted(set(T)))
    inside = [i for i in T if i in H.edge_vbls]
    outside = [i for i in T if i not in H.edge_vbls]
    if inst.q ** len(outside) > budget:
        raise PlantedBudgetExceeded("too many free variables in target set")
    fv, ft = _eliminate(_factors(inst, H), inside, budget)
    Z = sum(ft.values(), Fraction(0))
    if Z == 0:
        raise PlantedInconsistency("suggestions of this subgraph can never agree")
    pos = {v: j for j, v in enumerate(fv)}
    w_out = Fraction(1, inst.q ** len(outside))
    probs: dict = {}
    for key, p in ft.items():
        base = {v: key[pos[v]] for v in inside}
        for ext in itertools.product(range(inst.q), repeat=len(outside)):
            a = dict(base)
            a.update(zip(outside, ext))
            probs[tuple(a[i] for i in T)] = p / Z * w_out
    return Marginal(T, probs)


def planted_expectation(inst, H: Subgraph, poly, budget: int = DEFAULT_BUDGET) -> Fraction:
    """E over the planted distribution of a polynomial in indicator monomials.

    ``poly`` maps monomials (sorted tuples of (var, value)) to coefficients.
    """
    by_vars: dict = {}
    for mono, coef in poly.items():
        if coef:
            by_vars.setdefault(tuple(i for i, _ in mono), []).append((mono, coef))
    total = Fraction(0)
    for vs, terms in by_vars.items():
        if not vs:
            total += sum(c for _, c in terms)
            continue
        marg = planted_marginal(inst, H, vs, budget)
        for mono, coef in terms:
            total += coef * marg[tuple(c for _, c in mono)]
    return total


def sample_planted(inst, H: Subgraph, seed, max_tries: int = 1_000_000):
    """One draw from the planted distribution by rejection; returns (assignment, tries)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cons = sorted(H.nbhd)
    supports = []
    for f in cons:
        items = list(inst.constraints[f].mu.items())
        supports.append(([z for z, _ in items], np.array([float(p) for _, p in items])))
    for tries in range(1, max_tries + 1):
        x: dict = {}
        ok = True
        for f, (zs, ps) in zip(cons, supports):
            z = zs[rng.choice(len(zs), p=ps / ps.sum())]
            scope = inst.scope(f)
            for i in H.nbhd[f]:
                c = z[scope.index(i)]
                if x.setdefault(i, c) != c:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out = [int(v) for v in rng.integers(0, inst.q, size=inst.n)]
            for i, c in x.items():
                out[i] = c
            return out, tries
    raise PlantedBudgetExceeded(f"no consistent suggestion in {max_tries} tries "
                                f"(expected rate {consistency_formula(inst, H)})")
