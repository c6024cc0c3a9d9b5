"""The closure-based pseudoexpectation, its moment matrix and exact verification."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .closure import Closer
from .planted import planted_expectation, planted_marginal
from .polynomial import Polynomial, mono_mul, mono_vars, monomials_upto
from .rational import Q, frac_str
from .subgraph import full_neighborhood

__all__ = ["PseudoExpectation", "DegreeCapExceeded", "pexp_build", "MomentMatrix",
           "moment_matrix", "PSDResult", "psd_check", "IdentityReport", "identity_check",
           "SatisfiedFraction", "satisfied_fraction", "constraint_support_poly"]


class DegreeCapExceeded(ValueError):
    pass


class PseudoExpectation:
    """Evaluates E~[x^M] = E over the planted distribution of cl(vbls(M)) of x^M.

    With ``strict`` the hypotheses of the construction are enforced: monomials
    must have at most zeta*SMALL variables and closures at most SMALL
    constraints. Without it, evaluation proceeds beyond those caps and each
    breach is counted in ``events`` (used for desk-scale runs where the
    asymptotic hypotheses cannot hold).
    """

    def __init__(self, inst, small: int, zeta=None, strict: bool = False,
                 budget: int | None = 2_000_000, closer: Closer | None = None):
        self.inst, self.small = inst, small
        self.zeta = Q(zeta) if zeta is not None else None
        self.strict = strict
        self.closer = closer or Closer(inst, small, budget=budget)
        self.cap = math.floor(self.zeta * small) if self.zeta is not None else None
        self._values: dict = {}
        self._margs: dict = {}
        self.events = {"degree_over_cap": 0, "closure_not_small": 0}

    # --- core evaluation -----------------------------------------------------------------
    def closure(self, vs):
        cl = self.closer(vs)
        if len(cl.cons) > self.small:
            if self.strict:
                raise DegreeCapExceeded(f"closure of {sorted(vs)} has {len(cl.cons)} "
                                        f"constraints > SMALL={self.small}")
            self.events["closure_not_small"] += 1
        return cl

    def _check_degree(self, d: int):
        if self.cap is not None and d > self.cap:
            if self.strict:
                raise DegreeCapExceeded(f"degree {d} exceeds zeta*SMALL = {self.zeta * self.small}")
            self.events["degree_over_cap"] += 1

    def marginal(self, vs):
        """Marginal on vs of the planted distribution of cl(vs)."""
        key = frozenset(vs)
        m = self._margs.get(key)
        if m is None:
            self._check_degree(len(key))
            m = planted_marginal(self.inst, self.closure(key), key)
            self._margs[key] = m
        return m

    def __call__(self, M: tuple) -> Fraction:
        v = self._values.get(M)
        if v is None:
            if not M:
                v = Fraction(1)
            else:
                v = self.marginal(mono_vars(M))[tuple(c for _, c in M)]
            self._values[M] = v
        return v

    def recompute(self, M: tuple) -> Fraction:
        """From scratch, bypassing every cache."""
        if not M:
            return Fraction(1)
        vs = mono_vars(M)
        cl = Closer(self.inst, self.small)(vs)
        return planted_marginal(self.inst, cl, vs)[tuple(c for _, c in M)]

    def eval(self, p: Polynomial, joint: bool = False) -> Fraction:
        """Linear extension; ``joint`` evaluates all of p under the single closure cl(vbls(p))."""
        if joint:
            self._check_degree(len(p.vbls))
            cl = self.closure(p.vbls)
            return planted_expectation(self.inst, cl, p.terms)
        return sum((c * self(m) for m, c in p.items()), Fraction(0))

    def ip(self, a: Polynomial, b: Polynomial) -> Fraction:
        """E~[a b] taken multilinearly."""
        total = Fraction(0)
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = mono_mul(m1, m2)
                if m is not None:
                    total += c1 * c2 * self(m)
        return total

    @property
    def cache(self) -> dict:
        return self._values

    def hypothesis_report(self) -> dict:
        return {"strict": self.strict, "small": self.small,
                "zeta": frac_str(self.zeta) if self.zeta is not None else None,
                "degree_cap": self.cap, **self.events}


def pexp_build(inst, params, strict: bool = False, budget: int | None = 2_000_000):
    return PseudoExpectation(inst, params.small, params.zeta, strict=strict, budget=budget)


# --- moment matrix -------------------------------------------------------------------

@dataclass
class MomentMatrix:
    index: list
    rows: list
    basis: str

    @property
    def size(self) -> int:
        return len(self.index)

    def to_json(self) -> dict:
        return {"basis": self.basis,
                "index": [[list(p) for p in m] for m in self.index],
                "rows": [[frac_str(v) for v in r] for r in self.rows]}

    def to_float(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows])


def moment_matrix(pe: PseudoExpectation, D: int, basis: str = "full",
                  size_cap: int = 5000) -> MomentMatrix:
    """Entries E~[multilin(x^S x^T)] over monomial indices of degree <= D.

    ``full`` indexes every value of every variable; ``reduced`` drops value 0.
    Since E~ satisfies sum_c x_i^{=c} = 1, every full row is an integer
    combination of reduced rows, and the full matrix is PSD iff the reduced one is.
    """
    inst = pe.inst
    values = range(inst.q) if basis == "full" else range(1, inst.q)
    count = sum(math.comb(inst.n, d) * len(values) ** d for d in range(D + 1))
    if count > size_cap:
        raise ValueError(f"moment matrix would have {count} rows (cap {size_cap})")
    index = monomials_upto(inst.n, inst.q, D, values)
    N = len(index)
    rows = [[Fraction(0)] * N for _ in range(N)]
    for a in range(N):
        for b in range(a, N):
            m = mono_mul(index[a], index[b])
            if m is not None:
                v = pe(m)
                rows[a][b] = v
                rows[b][a] = v
    return MomentMatrix(index, rows, basis)


# --- PSD ------------------------------------------------------------------------------

@dataclass
class PSDResult:
    psd: bool
    mode: str
    pivots: list = field(default_factory=list)
    rank: int = 0
    counterexample: list | None = None
    value: Fraction | None = None
    min_eig: float | None = None

    def digest(self) -> str:
        h = hashlib.sha256()
        for p in self.pivots:
            h.update(frac_str(p).encode() + b";")
        return h.hexdigest()

    def to_json(self) -> dict:
        d = {"psd": self.psd, "mode": self.mode, "rank": self.rank,
             "size": len(self.pivots) if self.psd else None}
        if self.mode == "exact":
            d["certificate_sha256"] = self.digest()
        if self.counterexample is not None:
            d["counterexample"] = [frac_str(v) for v in self.counterexample]
            d["value"] = frac_str(self.value)
        if self.min_eig is not None:
            d["min_eigenvalue"] = self.min_eig
        return d


def _back_solve(Lcols, u):
    """Solve L^T v = u for unit lower-triangular L stored by columns."""
    N = len(u)
    v = list(u)
    for i in range(N - 1, -1, -1):
        col = Lcols[i]
        if col:
            v[i] -= sum((l * v[j] for j, l in col.items()), Fraction(0))
    return v


def _ldl(rows):
    """Exact LDL^T without pivoting; in exact arithmetic a PSD matrix never needs it.

    Returns (pivots, Lcols, None) or (pivots, Lcols, (u, value)) with a vector
    in elimination coordinates exposing a negative direction.
    """
    N = len(rows)
    A = [[rows[i][j] for j in range(i + 1)] for i in range(N)]   # lower triangle
    Lcols: list = [dict() for _ in range(N)]
    pivots = []
    for k in range(N):
        d = A[k][k]
        if d < 0:
            u = [Fraction(0)] * N
            u[k] = Fraction(1)
            return pivots + [d], Lcols, (u, d)
        below = [(i, A[i][k]) for i in range(k + 1, N) if A[i][k]]
        if d == 0:
            if below:
                j, a = below[0]
                t = -(A[j][j] + 1) / (2 * a)
                u = [Fraction(0)] * N
                u[k], u[j] = t, Fraction(1)
                return pivots + [d], Lcols, (u, Fraction(-1))
            pivots.append(d)
            continue
        pivots.append(d)
        col = {}
        for i, a in below:
            col[i] = a / d
        Lcols[k] = col
        items = sorted(col.items())
        for x, (i, li) in enumerate(items):
            Ai = A[i]
            s = li * d
            for j, lj in items[:x + 1]:
                Ai[j] -= s * lj
    return pivots, Lcols, None


def psd_check(M, mode: str = "exact", tol: float = 1e-9) -> PSDResult:
    rows = M.rows if isinstance(M, MomentMatrix) else [[Q(v) for v in r] for r in M]
    N = len(rows)
    for i in range(N):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i},{j})")
    if mode == "float":
        ev = np.linalg.eigvalsh(np.array([[float(v) for v in r] for r in rows])) if N else np.zeros(1)
        mn = float(ev.min())
        return PSDResult(mn >= -tol, "float", min_eig=mn, rank=int((ev > tol).sum()))
    pivots, Lcols, bad = _ldl(rows)
    rank = sum(1 for p in pivots if p)
    if bad is None:
        return PSDResult(True, "exact", pivots, rank)
    u, _ = bad
    v = _back_solve(Lcols, u)
    val = sum((v[i] * rows[i][j] * v[j] for i in range(N) if v[i] for j in range(N) if v[j]),
              Fraction(0))
    assert val < 0, "counterexample construction failed"
    return PSDResult(False, "exact", pivots, rank, v, val)


# --- identities ---------------------------------------------------------------------

def constraint_support_poly(inst, f: int) -> Polynomial:
    """s_f = sum over supp(mu_f) of the indicator of that assignment on N(f)."""
    scope = inst.scope(f)
    return Polynomial({tuple(sorted(zip(scope, z))): 1 for z in inst.constraints[f].mu.support()})


@dataclass
class IdentityReport:
    ok: bool
    checks: dict
    violation: dict | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "violation": self.violation}


def identity_check(pe: PseudoExpectation, degree: int, constraints: bool = True,
                   booleanness: bool = True) -> IdentityReport:
    """Check E~[p q] = 0 for every identity p and monomial q with deg p + deg q <= degree.

    Identities: x^2 - x for every indicator, sum_c x_i^{=c} - 1 for every
    variable, and s_f - 1 for every constraint.
    """
    inst = pe.inst
    mons_by_deg: dict = {}

    def mons(d):
        if d not in mons_by_deg:
            mons_by_deg[d] = monomials_upto(inst.n, inst.q, d) if d >= 0 else []
        return mons_by_deg[d]

    checks = {"booleanness": 0, "sum_to_one": 0, "constraints": 0}

    def fail(kind, label, q, resid):
        return IdentityReport(False, checks, {"identity": kind, "which": label,
                                              "multiplier": [list(p) for p in q],
                                              "residual": frac_str(resid)})

    if booleanness:
        for i in range(inst.n):
            for c in range(inst.q):
                x = Polynomial({((i, c),): 1})
                p = x * x - x
                for q in mons(degree - 2):
                    r = pe.eval(p * Polynomial({q: 1}))
                    checks["booleanness"] += 1
                    if r:
                        return fail("booleanness", [i, c], q, r)
    for i in range(inst.n):
        for q in mons(degree - 1):
            qd = dict(q)
            if i in qd:
                # x_i^{=c} q vanishes unless c matches; the sum collapses to q itself
                r = pe(q) - pe(q)
            else:
                r = sum((pe(mono_mul(((i, c),), q)) for c in range(inst.q)), Fraction(0)) - pe(q)
            checks["sum_to_one"] += 1
            if r:
                return fail("sum_to_one", i, q, r)
    if constraints:
        for f in range(inst.m):
            s = constraint_support_poly(inst, f)
            p = s - 1
            for q in mons(degree - inst.constraints[f].arity):
                r = pe.eval(p * Polynomial({q: 1}))
                checks["constraints"] += 1
                if r:
                    return fail("constraint", f, q, r)
    return IdentityReport(True, checks)


# --- satisfied fraction -----------------------------------------------------------------

@dataclass
class SatisfiedFraction:
    value: Fraction
    census: int
    delta: Fraction
    m: int
    epsilon: float | None = None

    @property
    def floor(self) -> Fraction:
        """1 - delta - census/m: the exact lower bound the value must meet."""
        if self.m == 0:
            return Fraction(1)
        return 1 - self.delta - Fraction(self.census, self.m)

    @property
    def ok(self) -> bool:
        return self.value >= self.floor

    @property
    def bound(self) -> float | None:
        return None if self.epsilon is None else float(1 - self.delta) - self.epsilon

    def to_json(self) -> dict:
        return {"value": frac_str(self.value), "census": self.census,
                "delta": frac_str(self.delta), "m": self.m, "floor": frac_str(self.floor),
                "ok": self.ok, "epsilon": self.epsilon, "bound": self.bound}


def satisfied_fraction(pe: PseudoExpectation, inst=None) -> SatisfiedFraction:
    inst = inst or pe.inst
    if inst.m == 0:
        return SatisfiedFraction(Fraction(1), 0, Fraction(0), 0)
    total = Fraction(0)
    census = 0
    delta = Fraction(0)
    for f, con in enumerate(inst.constraints):
        P = con.predicate
        if P is None:
            raise ValueError(f"constraint {f} has no predicate; satisfaction undefined")
        marg = pe.marginal(con.scope)
        pos = [marg.vars.index(i) for i in con.scope]
        total += sum((p for key, p in marg.probs.items()
                      if P(tuple(key[j] for j in pos))), Fraction(0))
        if pe.closure(con.scope) != full_neighborhood(inst, f):
            census += 1
        delta = max(delta, con.mu.mass_off(P))
    eps = None
    if inst.n > 1 and inst.m > inst.n:
        from .params import epsilon
        eps = epsilon(inst.n, Fraction(inst.m, inst.n))
    return SatisfiedFraction(total / inst.m, census, delta, inst.m, eps)
