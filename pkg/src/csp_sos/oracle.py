"""Ground truth by exhaustive enumeration or elimination.

Nothing here shares code paths with the searches it is used to check: subgraph
oracles enumerate every edge subset, marginals enumerate every suggestion tuple.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instance import twise_violation
from .planted import Marginal
from .rational import frac_str
from .subgraph import Subgraph, account

__all__ = ["OracleBudgetExceeded", "NotXorError", "OptResult", "brute_opt", "xor_equation",
           "xor_satisfiable", "twise_check", "marginal_bruteforce", "acceptance_mass",
           "naive_tau_subgraphs", "naive_implausible", "naive_census"]


class OracleBudgetExceeded(RuntimeError):
    pass


class NotXorError(ValueError):
    pass


@dataclass(frozen=True)
class OptResult:
    opt: Fraction
    argmax: tuple
    method: str

    @property
    def satisfiable(self) -> bool:
        return self.opt == 1

    def to_json(self) -> dict:
        return {"opt": frac_str(self.opt), "argmax": list(self.argmax), "method": self.method}


def _tables(inst):
    out = []
    for c in inst.constraints:
        P = c.predicate
        if P is None:
            raise ValueError("constraint without a predicate")
        out.append((np.array(c.scope), np.array(P.table, dtype=bool)))
    return out


def brute_opt(inst, max_assignments: int = 1 << 24, chunk: int = 1 << 18) -> OptResult:
    """Max fraction of satisfied constraints over all q^n assignments."""
    q, n, m = inst.q, inst.n, inst.m
    total = q ** n
    if total > max_assignments:
        raise OracleBudgetExceeded(f"{q}^{n} assignments exceed budget {max_assignments}")
    if m == 0:
        return OptResult(Fraction(1), tuple([0] * n), "brute")
    tabs = _tables(inst)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best, arg = -1, 0
    for start in range(0, total, chunk):
        ids = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (ids[:, None] // powers[None, :]) % q      # column i = x_i
        sat = np.zeros(len(ids), dtype=np.int32)
        for scope, table in tabs:
            k = len(scope)
            w = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
            sat += table[digits[:, scope] @ w]
        j = int(np.argmax(sat))
        if sat[j] > best:
            best, arg = int(sat[j]), int(ids[j])
            if best == m:
                break
    x = tuple(int(d) for d in (arg // powers) % q)
    return OptResult(Fraction(best, m), x, "brute")


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def xor_equation(c, q: int):
    """(coefficients, rhs) with sat set {z : sum a_j z_j = b mod q}, or None."""
    P = c.predicate
    k = P.k
    sat = set(P.satisfying())
    if len(sat) != q ** (k - 1):
        return None
    for tail in itertools.product(range(1, q), repeat=k - 1):
        a = (1,) + tail
        z0 = next(iter(sat))
        b = sum(x * y for x, y in zip(a, z0)) % q
        if all(((sum(x * y for x, y in zip(a, z)) % q == b) == (z in sat))
               for z in itertools.product(range(q), repeat=k)):
            return a, b
    return None


def xor_satisfiable(inst) -> bool:
    """Gaussian elimination over GF(q) for prime q."""
    q = inst.q
    if not _is_prime(q):
        raise NotXorError(f"alphabet size {q} is not prime")
    rows = []
    for f, c in enumerate(inst.constraints):
        eq = xor_equation(c, q)
        if eq is None:
            raise NotXorError(f"constraint {f} is not a linear equation")
        a, b = eq
        rows.append(({i: x for i, x in zip(c.scope, a)}, b))
    if q == 2:
        return _gf2(rows, inst.n)
    return _gfp(rows, q)


def _gf2(rows, n) -> bool:
    pivots: dict = {}          # pivot bit -> row bitmask (bit n holds the rhs)
    for coeffs, b in rows:
        r = sum(1 << i for i in coeffs) | (b << n)
        for p, pr in pivots.items():
            if r >> p & 1:
                r ^= pr
        low = r & ((1 << n) - 1)
        if low == 0:
            if r >> n & 1:
                return False
            continue
        p = low.bit_length() - 1
        for p2 in list(pivots):
            if pivots[p2] >> p & 1:
                pivots[p2] ^= r
        pivots[p] = r
    return True


def _gfp(rows, q) -> bool:
    pivots: dict = {}          # var -> (coeff dict with pivot coeff 1, rhs)
    for coeffs, b in rows:
        r = {i: x % q for i, x in coeffs.items() if x % q}
        for p, (pr, pb) in pivots.items():
            x = r.get(p)
            if x:
                for i, y in pr.items():
                    v = (r.get(i, 0) - x * y) % q
                    if v:
                        r[i] = v
                    else:
                        r.pop(i, None)
                b = (b - x * pb) % q
        if not r:
            if b % q:
                return False
            continue
        p = max(r)
        inv = pow(r[p], q - 2, q)
        r = {i: x * inv % q for i, x in r.items()}
        b = b * inv % q
        for p2, (pr, pb) in list(pivots.items()):
            x = pr.get(p)
            if x:
                nr = dict(pr)
                for i, y in r.items():
                    v = (nr.get(i, 0) - x * y) % q
                    if v:
                        nr[i] = v
                    else:
                        nr.pop(i, None)
                pivots[p2] = (nr, (pb - x * b) % q)
        pivots[p] = (r, b)
    return True


def twise_check(mu, t: int):
    """(True, None) when every t-marginal is uniform, else (False, (coords, cell, mass))."""
    v = twise_violation(mu, t)
    return v is None, v


def _suggestions(inst, H: Subgraph, budget: int):
    """Every consistent tuple of suggestions: yields (assignment on vbls(H), weight)."""
    cons = sorted(H.nbhd)
    supports = [list(inst.constraints[f].mu.items()) for f in cons]
    size = 1
    for s in supports:
        size *= len(s)
    if size > budget:
        raise OracleBudgetExceeded(f"{size} suggestion tuples exceed budget {budget}")
    scopes = [inst.scope(f) for f in cons]
    nb = [H.nbhd[f] for f in cons]
    for combo in itertools.product(*supports):
        x: dict = {}
        w = Fraction(1)
        ok = True
        for (z, p), scope, vs in zip(combo, scopes, nb):
            w *= p
            for i in vs:
                c = z[scope.index(i)]
                if x.setdefault(i, c) != c:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield x, w


def acceptance_mass(inst, H: Subgraph, budget: int = 2_000_000) -> Fraction:
    """Probability that independent suggestions agree on every edge of H."""
    return sum((w for _, w in _suggestions(inst, H, budget)), Fraction(0))


def marginal_bruteforce(inst, H: Subgraph, T, budget: int = 2_000_000) -> Marginal:
    T = tuple(sorted(set(T)))
    acc: dict = {}
    Z = Fraction(0)
    free = [i for i in T if i not in H.edge_vbls]
    cell = Fraction(1, inst.q ** len(free))
    for x, w in _suggestions(inst, H, budget):
        Z += w
        for ext in itertools.product(range(inst.q), repeat=len(free)):
            a = dict(x)
            a.update(zip(free, ext))
            key = tuple(a[i] for i in T)
            acc[key] = acc.get(key, 0) + w * cell
    if Z == 0:
        raise ZeroDivisionError("suggestions never agree on this subgraph")
    return Marginal(T, {k: v / Z for k, v in acc.items()})


def naive_tau_subgraphs(inst, tau: int, c_max: int, budget: int = 5_000_000):
    """Every nonempty tau-subgraph with <= c_max constraints, by brute force."""
    per_con = []
    for f, c in enumerate(inst.constraints):
        opts = [frozenset((f, i) for i in vs)
                for r in range(tau, len(c.scope) + 1)
                for vs in itertools.combinations(c.scope, r)]
        per_con.append(opts)
    count = 0
    for size in range(1, c_max + 1):
        for fs in itertools.combinations(range(inst.m), size):
            for choice in itertools.product(*(per_con[f] for f in fs)):
                count += 1
                if count > budget:
                    raise OracleBudgetExceeded("naive enumeration budget exceeded")
                yield Subgraph(frozenset().union(*choice))


def naive_implausible(inst, tau: int, zeta, c_max: int):
    """An implausible tau-subgraph of least size, or None."""
    for H in naive_tau_subgraphs(inst, tau, c_max):
        if account(H, tau, zeta).income < 0:
            return H
    return None


def naive_census(inst, tau: int, zeta, c_max: int, income_max) -> int:
    return sum(1 for H in naive_tau_subgraphs(inst, tau, c_max)
               if account(H, tau, zeta).income <= income_max)
