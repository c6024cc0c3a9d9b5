"""Exact two-phase simplex over Fractions with Bland's rule.

Problems are ``min c.x`` subject to rows ``a.x (<=|>=|==) b`` and ``x >= 0``.
Every result carries a checkable certificate: dual multipliers at an optimum,
a Farkas vector when infeasible, a ray when unbounded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .rational import Q

__all__ = ["LinearProgram", "LPResult", "lp_solve", "check_certificate",
           "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "IterationLimit"]

OPTIMAL, INFEASIBLE, UNBOUNDED = "OPTIMAL", "INFEASIBLE", "UNBOUNDED"
_SENSES = ("<=", ">=", "==")


class IterationLimit(RuntimeError):
    pass


@dataclass
class LinearProgram:
    n_vars: int
    c: list = field(default_factory=list)
    rows: list = field(default_factory=list)   # (coeffs dict j->Fraction, sense, rhs)

    def __post_init__(self):
        if not self.c:
            self.c = [Fraction(0)] * self.n_vars
        if len(self.c) != self.n_vars:
            raise ValueError(f"objective has {len(self.c)} entries, expected {self.n_vars}")
        self.c = [Q(v) for v in self.c]

    def add(self, coeffs, sense: str, rhs):
        """Add a row; coeffs is a dict {var: coef} or a dense sequence."""
        if sense not in _SENSES:
            raise ValueError(f"bad sense {sense!r}")
        if not isinstance(coeffs, dict):
            if len(coeffs) != self.n_vars:
                raise ValueError(f"row has {len(coeffs)} entries, expected {self.n_vars}")
            coeffs = {j: v for j, v in enumerate(coeffs) if v}
        for j in coeffs:
            if not 0 <= j < self.n_vars:
                raise ValueError(f"variable index {j} out of range")
        self.rows.append(({j: Q(v) for j, v in coeffs.items() if v}, sense, Q(rhs)))
        return self


@dataclass
class LPResult:
    status: str
    optimum: Fraction | None = None
    x: list | None = None
    basis: list | None = None
    duals: list | None = None      # per original row, at OPTIMAL
    farkas: list | None = None     # per original row, at INFEASIBLE
    ray: list | None = None        # at UNBOUNDED
    iterations: int = 0


def _pivot(T, cost, r, s):
    row = T[r]
    piv = row[s]
    if piv != 1:
        inv = 1 / piv
        row[:] = [v * inv for v in row]
    for i, other in enumerate(T):
        if i != r:
            f = other[s]
            if f:
                other[:] = [a - f * b if b else a for a, b in zip(other, row)]
    f = cost[s]
    if f:
        cost[:] = [a - f * b if b else a for a, b in zip(cost, row)]


def _simplex(T, cost, basis, allowed, max_iter, it0):
    """Run Bland's rule until optimal or unbounded. Returns (status, col, iters)."""
    it = it0
    ncol = len(cost) - 1
    while True:
        s = next((j for j in range(ncol) if allowed[j] and cost[j] < 0), None)
        if s is None:
            return OPTIMAL, None, it
        best = None
        for i, row in enumerate(T):
            a = row[s]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED, s, it
        it += 1
        if it > max_iter:
            raise IterationLimit(f"simplex exceeded {max_iter} iterations")
        r = best[1]
        _pivot(T, cost, r, s)
        basis[r] = s


def lp_solve(lp: LinearProgram, max_iter: int = 100_000) -> LPResult:
    n, m = lp.n_vars, len(lp.rows)
    n_slack = sum(1 for _, s, _ in lp.rows if s != "==")
    ns = n + n_slack            # structural + slack columns
    ncol = ns + m               # + one artificial per row
    T, sign = [], []
    k = n
    for i, (coeffs, sense, rhs) in enumerate(lp.rows):
        row = [Fraction(0)] * (ncol + 1)
        for j, v in coeffs.items():
            row[j] = v
        if sense != "==":
            row[k] = Fraction(1 if sense == "<=" else -1)
            k += 1
        row[-1] = rhs
        sg = 1
        if rhs < 0:
            row = [-v for v in row]
            sg = -1
        row[ns + i] = Fraction(1)
        T.append(row)
        sign.append(sg)
    basis = [ns + i for i in range(m)]
    rowid = list(range(m))      # original row of each tableau row

    # phase 1: minimize the sum of artificials
    cost = [Fraction(0)] * (ncol + 1)
    for j in range(ns, ncol):
        cost[j] = Fraction(1)
    for row in T:
        cost[:] = [a - b for a, b in zip(cost, row)]
    allowed = [True] * ncol
    status, _, it = _simplex(T, cost, basis, allowed, max_iter, 0)
    w = -cost[-1]
    if w > 0:
        y = _row_duals(T, [1 if b >= ns else 0 for b in basis], ns, m)
        farkas = [sign[i] * y[i] for i in range(m)]
        return LPResult(INFEASIBLE, farkas=farkas, iterations=it)

    # drive zero-level artificials out; drop redundant rows
    i = 0
    while i < len(T):
        if basis[i] >= ns:
            s = next((j for j in range(ns) if T[i][j] != 0), None)
            if s is None:
                del T[i], basis[i], rowid[i]
                continue
            _pivot(T, cost, i, s)
            basis[i] = s
        i += 1

    # phase 2
    cost = [Fraction(0)] * (ncol + 1)
    for j in range(n):
        cost[j] = lp.c[j]
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb:
            cost[:] = [a - cb * v for a, v in zip(cost, T[i])]
    allowed = [j < ns for j in range(ncol)]
    status, s, it = _simplex(T, cost, basis, allowed, max_iter, it)
    if status == UNBOUNDED:
        ray = [Fraction(0)] * n
        if s < n:
            ray[s] = Fraction(1)
        for i, b in enumerate(basis):
            if b < n:
                ray[b] = -T[i][s]
        return LPResult(UNBOUNDED, ray=ray, iterations=it)
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    opt = sum((lp.c[j] * x[j] for j in range(n)), Fraction(0))
    cb = [lp.c[b] if b < n else Fraction(0) for b in basis]
    y = _row_duals(T, cb, ns, m)
    duals = [sign[i] * y[i] for i in range(m)]
    return LPResult(OPTIMAL, optimum=opt, x=x, basis=sorted(basis), duals=duals, iterations=it)


def _row_duals(T, cb, ns, m):
    # the artificial block of the tableau is B^{-1} in original-row coordinates
    y = [Fraction(0)] * m
    for row, c in zip(T, cb):
        if c:
            for j in range(m):
                v = row[ns + j]
                if v:
                    y[j] += c * v
    return y


def _row_value(coeffs, x):
    return sum((v * x[j] for j, v in coeffs.items()), Fraction(0))


def check_certificate(lp: LinearProgram, res: LPResult) -> bool:
    """Independently verify a solver result against its certificate."""
    n = lp.n_vars
    if res.status == OPTIMAL:
        x, y = res.x, res.duals
        if any(v < 0 for v in x):
            return False
        for (coeffs, sense, rhs), yi in zip(lp.rows, y):
            ax = _row_value(coeffs, x)
            if (sense == "<=" and ax > rhs) or (sense == ">=" and ax < rhs) or (sense == "==" and ax != rhs):
                return False
            if (sense == "<=" and yi > 0) or (sense == ">=" and yi < 0):
                return False
        aty = [Fraction(0)] * n
        for (coeffs, _, _), yi in zip(lp.rows, y):
            for j, v in coeffs.items():
                aty[j] += yi * v
        if any(lp.c[j] - aty[j] < 0 for j in range(n)):
            return False
        by = sum((rhs * yi for (_, _, rhs), yi in zip(lp.rows, y)), Fraction(0))
        return by == res.optimum == sum((lp.c[j] * x[j] for j in range(n)), Fraction(0))
    if res.status == INFEASIBLE:
        y = res.farkas
        for (coeffs, sense, rhs), yi in zip(lp.rows, y):
            if (sense == "<=" and yi > 0) or (sense == ">=" and yi < 0):
                return False
        aty = [Fraction(0)] * n
        for (coeffs, _, _), yi in zip(lp.rows, y):
            for j, v in coeffs.items():
                aty[j] += yi * v
        by = sum((rhs * yi for (_, _, rhs), yi in zip(lp.rows, y)), Fraction(0))
        return all(v <= 0 for v in aty) and by > 0
    if res.status == UNBOUNDED:
        d = res.ray
        if any(v < 0 for v in d):
            return False
        for coeffs, sense, _ in lp.rows:
            ad = _row_value(coeffs, d)
            if (sense == "<=" and ad > 0) or (sense == ">=" and ad < 0) or (sense == "==" and ad != 0):
                return False
        return sum((lp.c[j] * d[j] for j in range(n)), Fraction(0)) < 0
    return False
