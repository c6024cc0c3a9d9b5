"""End-to-end demonstration run: instance, parameters, plausibility, E~, checks, oracle."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .gram_schmidt import gs_orthogonality_check, gs_run
from .instance import build_fixture, generate, load
from .oracle import NotXorError, OracleBudgetExceeded, brute_opt, xor_satisfiable
from .params import Params
from .plausibility import certified_small, find_implausible
from .pseudoexpectation import (PseudoExpectation, identity_check, moment_matrix, psd_check,
                                satisfied_fraction)
from .rational import Q, frac_str

__all__ = ["SCHEMA_VERSION", "EXIT_OK", "EXIT_IMPLAUSIBLE", "EXIT_VIOLATION", "DEFAULTS",
           "RunReport", "StageError", "run_pipeline"]

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_IMPLAUSIBLE, EXIT_VIOLATION = 0, 2, 3

DEFAULTS = {
    "n": 20, "m": None, "Delta": "3", "predicate": "kxor:3:1", "tau": 3, "D": 2,
    "seed": 7, "zeta": "1/5", "small": None, "c_max": 8, "retries": 3, "fixture": None,
    "instance": None, "strict": False, "basis": "reduced", "gs": True, "oracle": True,
    "budget": 5_000_000, "moment_cap": 5000,
}


class StageError(RuntimeError):
    def __init__(self, stage: str, err: Exception):
        super().__init__(f"[{stage}] {type(err).__name__}: {err}")
        self.stage, self.err = stage, err


@dataclass
class RunReport:
    data: dict = field(default_factory=dict)
    wall_times: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def to_json(self, times: bool = True) -> dict:
        d = {"schema_version": SCHEMA_VERSION, **self.data, "exit_code": self.exit_code}
        if times:
            d["wall_times"] = {k: round(v, 4) for k, v in self.wall_times.items()}
        return d


def _config(cfg: dict) -> dict:
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return {**DEFAULTS, **{k: v for k, v in cfg.items() if v is not None}}


def _instance(c: dict, seed: int):
    if c["fixture"]:
        return build_fixture(c["fixture"], c["tau"])
    if c["instance"]:
        return load(c["instance"])
    m = c["m"] if c["m"] is not None else int(Q(c["Delta"]) * c["n"])
    return generate(c["n"], m, c["predicate"], seed, tau=c["tau"])


def _stage(report, name):
    class _Timer:
        def __enter__(self):
            self.t = time.perf_counter()

        def __exit__(self, et, ev, tb):
            report.wall_times[name] = time.perf_counter() - self.t
            if ev is not None and not isinstance(ev, StageError):
                raise StageError(name, ev) from ev
    return _Timer()


def run_pipeline(config: dict) -> RunReport:
    c = _config(config)
    rep = RunReport()
    zeta = Q(c["zeta"])
    fixed = c["fixture"] or c["instance"]
    attempts = []
    inst = small = None
    for r in range(1 if fixed else c["retries"] + 1):
        seed = c["seed"] + r
        with _stage(rep, "gen"):
            cand = _instance(c, seed)
        with _stage(rep, "plausibility"):
            if c["small"] is not None:
                res = find_implausible(cand, c["tau"], zeta, 2 * int(c["small"]), budget=c["budget"])
                s = int(c["small"]) if res.witness is None else 0
            else:
                s, res = certified_small(cand, c["tau"], zeta, c["c_max"], budget=c["budget"])
        attempts.append({"seed": seed, "small": s, **res.to_json()})
        if s >= 1:
            inst, small = cand, s
            break
    rep.data["config"] = {k: (frac_str(v) if isinstance(v, Fraction) else v) for k, v in c.items()}
    rep.data["plausibility"] = {"attempts": attempts, "passed": inst is not None}
    if inst is None:
        rep.exit_code = EXIT_IMPLAUSIBLE
        return rep
    rep.data["instance"] = {"n": inst.n, "m": inst.m, "q": inst.q, "tau": inst.tau,
                            "meta": inst.meta}
    D = c["D"]
    params = Params.manual(c["tau"], zeta, small, D, inst.K)
    rep.data["params"] = {**params.to_json(), "violations": params.violations(inst.n)}
    problems = []
    with _stage(rep, "pexp"):
        pe = PseudoExpectation(inst, small, zeta, strict=c["strict"], budget=c["budget"])
    with _stage(rep, "identity"):
        idr = identity_check(pe, 2 * D)
    rep.data["identity"] = idr.to_json()
    if not idr.ok:
        problems.append("identity")
    with _stage(rep, "psd"):
        M = moment_matrix(pe, D, c["basis"], size_cap=c["moment_cap"])
        pr = psd_check(M)
    rep.data["psd"] = {"psd": pr.psd, "rank": pr.rank, "size": M.size, "digest": pr.digest(),
                       "basis": c["basis"],
                       "counterexample_value": frac_str(pr.value) if pr.value is not None else None}
    if not pr.psd:
        problems.append("psd")
    if c["gs"]:
        with _stage(rep, "gs"):
            st = gs_run(pe, D, c["basis"], M=M)
            ortho = gs_orthogonality_check(st) if st.success else None
        rep.data["gs"] = {**st.summary(), "orthogonality": ortho.to_json() if ortho else None}
        if not st.success or not ortho:
            problems.append("gs")
    with _stage(rep, "satisfied_fraction"):
        sf = satisfied_fraction(pe)
    rep.data["satisfied_fraction"] = sf.to_json()
    if not sf.ok:
        problems.append("satisfied_fraction")
    rep.data["hypotheses"] = pe.hypothesis_report()
    if c["oracle"]:
        with _stage(rep, "oracle"):
            try:
                rep.data["oracle"] = {"method": "xor-elim", "satisfiable": xor_satisfiable(inst)}
            except NotXorError:
                try:
                    o = brute_opt(inst)
                    rep.data["oracle"] = {**o.to_json(), "satisfiable": o.satisfiable}
                except OracleBudgetExceeded as e:
                    rep.data["oracle"] = {"method": "skipped", "reason": str(e)}
    within = not params.violations(inst.n) and all(
        v == 0 for k, v in pe.events.items())
    rep.data["problems"] = problems
    rep.data["within_hypotheses"] = within
    if problems:
        rep.exit_code = EXIT_VIOLATION
    return rep
