"""Modified Gram-Schmidt under <p, q> = E~[p q], kept entirely rational.

Stage S produces y_S. The normalized z_S = y_S / sqrt(n_S), n_S = E~[y_S^2],
exists only formally: a projection onto z_T is expanded as
(E~[y y_T] / n_T) y_T, so no square roots appear. Stage () is the constant 1.

Vectors are dicts {position: Fraction} over the monomial index, and inner
products go through the moment matrix of the same index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .polynomial import Polynomial, mono_vars
from .pseudoexpectation import moment_matrix
from .rational import frac_str
from .subgraph import Subgraph, account

__all__ = ["GSState", "GSProblem", "GSBudgetExceeded", "gs_run", "gs_orthogonality_check",
           "OrthogonalityReport", "witness_extend", "expand", "gs_local_value",
           "stage_polynomial", "proportional_stage"]


class GSBudgetExceeded(RuntimeError):
    pass


@dataclass
class GSProblem:
    kind: str        # "negative" or "pvz"
    stage: tuple
    sub: tuple
    value: Fraction

    def to_json(self) -> dict:
        return {"kind": self.kind, "stage": [list(p) for p in self.stage],
                "substage": [list(p) for p in self.sub], "value": frac_str(self.value)}


@dataclass
class GSState:
    index: list
    gram: list                       # moment matrix rows over index
    D: int
    y: dict = field(default_factory=dict)          # position -> {position: Fraction}
    norms: dict = field(default_factory=dict)      # position -> n_S
    scale_sq: dict = field(default_factory=dict)   # position -> 1/n_S (z_S = sqrt(scale) y_S)
    pvz: set = field(default_factory=set)
    nonzero: dict = field(default_factory=dict)    # position -> positions T with case-2 step
    witnesses: dict = field(default_factory=dict)  # position -> Subgraph
    trace: list = field(default_factory=list)
    events: dict = field(default_factory=lambda: {"witness_revenue": 0, "witness_not_small": 0,
                                                  "witness_misses_vars": 0})
    problem: GSProblem | None = None
    substages: int = 0

    @property
    def success(self) -> bool:
        return self.problem is None and len(self.y) == len(self.index)

    @property
    def pos(self) -> dict:
        return {m: j for j, m in enumerate(self.index)}

    def ip(self, a: dict, b: dict) -> Fraction:
        g = self.gram
        return sum((ca * cb * g[i][j] for i, ca in a.items() for j, cb in b.items()),
                   Fraction(0))

    def summary(self) -> dict:
        sizes = [len(w.cons) for w in self.witnesses.values()]
        return {"success": self.success, "stages": len(self.y), "substages": self.substages,
                "pvz": len(self.pvz), "problem": self.problem.to_json() if self.problem else None,
                "max_witness_constraints": max(sizes, default=0), **self.events}

    def to_json(self) -> dict:
        return {**self.summary(), "trace": self.trace}


def _vbls_of(state, vec) -> frozenset:
    return frozenset(i for j in vec for i in mono_vars(state.index[j]))


def _revenue(W: Subgraph, tau: int) -> int:
    return account(W, tau, 0).revenue


def witness_extend(W: Subgraph, T, pe) -> Subgraph:
    """W united with cl(vbls(W) | vbls(T))."""
    vs = W.vbls | mono_vars(T) if isinstance(T, tuple) else W.vbls | frozenset(T)
    B = pe.closer(vs)
    return (W | B).with_isolated(vs - (W | B).edge_vbls)


class _Witnesses:
    """Replays the case analysis: a nonzero projection onto z_T extends the
    witness by the closure and then runs stage T's own substages from it."""

    def __init__(self, state: GSState, pe, budget: int):
        self.state, self.pe, self.budget = state, pe, budget
        self.memo: dict = {}
        self.calls = 0

    def through(self, s: int, W: Subgraph) -> Subgraph:
        key = (s, W)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        if self.calls > self.budget:
            raise GSBudgetExceeded(f"witness recursion exceeded {self.budget} steps")
        for t in self.state.nonzero.get(s, ()):
            W = witness_extend(W, self.state.index[t], self.pe)
            W = self.through(t, W)
        self.memo[key] = W
        return W


def gs_run(pe, D: int, basis: str = "reduced", witnesses: bool = True,
           size_cap: int = 5000, witness_budget: int = 200_000, stop_on_problem: bool = True,
           M=None) -> GSState:
    """Run every substage in order; stop at the first positive-definiteness problem."""
    if M is None:
        M = moment_matrix(pe, D, basis, size_cap=size_cap)
    st = GSState(M.index, M.rows, D)
    N = len(st.index)
    tau = pe.inst.tau
    cap = math.floor(Fraction(1, 3) * pe.zeta * pe.small) if pe.zeta is not None else None
    st.trace.append({"degree_cap": cap, "D": D, "hypothesis_ok": cap is not None and D <= cap})
    # stage (): z = 1
    st.y[0] = {0: Fraction(1)}
    st.norms[0] = st.gram[0][0]
    st.scale_sq[0] = Fraction(1)
    proj = {0: [st.gram[j][0] for j in range(N)]}   # gram . y_T, cached per finished stage
    wit = _Witnesses(st, pe, witness_budget) if witnesses else None
    if witnesses:
        st.witnesses[0] = Subgraph(frozenset())
    for s in range(1, N):
        y = {s: Fraction(1), 0: -st.gram[s][0]}
        n = st.gram[s][s] - st.gram[s][0] ** 2
        steps = []
        if n < 0:
            st.problem = GSProblem("negative", st.index[s], (), n)
        for t in range(1, s):
            if st.problem is not None:
                break
            st.substages += 1
            w = proj[t]
            c = sum((v * w[j] for j, v in y.items()), Fraction(0))
            if t in st.pvz:
                if c != 0:
                    st.problem = GSProblem("pvz", st.index[s], st.index[t], c)
                continue
            if c == 0:
                continue
            steps.append(t)
            r = c / st.norms[t]
            for j, v in st.y[t].items():
                nv = y.get(j, 0) - r * v
                if nv:
                    y[j] = nv
                else:
                    y.pop(j, None)
            n = n - c * r
            if n < 0:
                st.problem = GSProblem("negative", st.index[s], st.index[t], n)
        if st.problem is not None and stop_on_problem:
            break
        st.y[s] = y
        st.nonzero[s] = steps
        st.norms[s] = n
        if n == 0:
            st.pvz.add(s)
            st.scale_sq[s] = Fraction(1)
        else:
            st.scale_sq[s] = 1 / n
        proj[s] = [sum((v * st.gram[i][j] for j, v in y.items()), Fraction(0)) for i in range(N)]
        rec = {"stage": [list(p) for p in st.index[s]], "norm": frac_str(n),
               "pvz": n == 0, "steps": len(steps), "support": len(y)}
        if witnesses:
            W0 = Subgraph(frozenset(), mono_vars(st.index[s]))
            W = wit.through(s, W0)
            st.witnesses[s] = W
            R = _revenue(W, tau)
            if R > 2 * D:
                st.events["witness_revenue"] += 1
            if len(W.cons) > pe.small:
                st.events["witness_not_small"] += 1
            if not _vbls_of(st, y) <= W.vbls:
                st.events["witness_misses_vars"] += 1
            rec.update(witness_constraints=len(W.cons), witness_revenue=R)
        st.trace.append(rec)
    return st


@dataclass
class OrthogonalityReport:
    ok: bool
    checked: int
    violation: dict | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "violation": self.violation}


def gs_orthogonality_check(state: GSState, pe=None) -> OrthogonalityReport:
    """Exact check of pairwise orthogonality, triangular span and E~[z^2] in {0, 1}.

    Inner products are recomputed from pe when given (else from the stored
    moment matrix) so a corrupted state cannot vouch for itself.
    """
    idx = state.index
    if pe is not None:
        def ip(a, b):
            return pe.ip(stage_polynomial(state, a), stage_polynomial(state, b))
    else:
        def ip(a, b):
            return state.ip(state.y[a], state.y[b])
    done = sorted(state.y)
    checked = 0
    for s in done:
        ys = state.y[s]
        if ys.get(s) != 1 or any(j > s for j in ys):
            return OrthogonalityReport(False, checked, {"kind": "span", "stage": [list(p) for p in idx[s]]})
        nn = ip(s, s)
        z2 = state.scale_sq[s] * nn
        want = 0 if s in state.pvz else 1
        if nn != state.norms[s] or z2 != want:
            return OrthogonalityReport(False, checked, {
                "kind": "norm", "stage": [list(p) for p in idx[s]],
                "z_norm_sq": frac_str(z2), "expected": want})
        for t in done:
            if t >= s:
                break
            checked += 1
            v = ip(s, t)
            if v != 0:
                return OrthogonalityReport(False, checked, {
                    "kind": "orthogonality", "S": [list(p) for p in idx[s]],
                    "T": [list(p) for p in idx[t]], "residual": frac_str(v)})
    return OrthogonalityReport(True, checked)


def stage_polynomial(state: GSState, s: int) -> Polynomial:
    return Polynomial({state.index[j]: c for j, c in state.y[s].items()})


def expand(state: GSState, g: Polynomial) -> dict:
    """Coefficients a_S with g = sum a_S y_S (back substitution on the unit triangle)."""
    pos = state.pos
    rest = {}
    for m, c in g.items():
        if m not in pos:
            raise ValueError(f"monomial {m} outside the index")
        rest[pos[m]] = c
    out = {}
    for s in range(max(rest, default=-1), -1, -1):
        c = rest.get(s, 0)
        if not c:
            continue
        out[s] = c
        for j, v in state.y[s].items():
            if j != s:
                nv = rest.get(j, 0) - c * v
                rest[j] = nv
    return out


def gs_local_value(state: GSState, g: Polynomial) -> Fraction:
    """E~[g^2] as a sum of squared z-coefficients: sum a_S^2 n_S."""
    return sum((a * a * state.norms[s] for s, a in expand(state, g).items()), Fraction(0))


def proportional_stage(state: GSState, target: Polynomial):
    """A stage whose y_S is a nonzero rational multiple of target, with the multiple."""
    pos = state.pos
    tvec = {}
    for m, c in target.items():
        if m not in pos:
            return None
        tvec[pos[m]] = c
    if not tvec:
        return None
    for s, y in state.y.items():
        if set(y) != set(tvec):
            continue
        j = next(iter(tvec))
        r = y[j] / tvec[j]
        if all(y[i] == r * tvec[i] for i in tvec):
            return state.index[s], r
    return None
