"""Command-line front end: ``csp-sos <subcommand> ...``; every command prints JSON."""
from __future__ import annotations

import argparse
import json
import sys

from .rational import Q, frac_str

EXIT_USAGE = 1


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _inst(args):
    from .instance import build_fixture, load
    if getattr(args, "fixture", None):
        return build_fixture(args.fixture)
    if not getattr(args, "inst", None):
        raise SystemExit("need --inst or --fixture")
    return load(args.inst)


def _vars(inst, text):
    return [inst.var_index(t) for t in text.split(",") if t.strip()] if text else []


def cmd_gen(args):
    from .instance import build_fixture, dumps, generate
    if args.fixture:
        inst = build_fixture(args.fixture, args.tau)
    else:
        m = args.m if args.m is not None else int(Q(args.Delta) * args.n)
        inst = generate(args.n, m, args.predicate, args.seed, tau=args.tau,
                        literals=not args.no_literals)
    text = dumps(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_params(args):
    from .params import ParameterError, suggest_parameters
    try:
        p = suggest_parameters(args.n, Q(args.Delta), args.K, args.tau, Q(args.beta),
                               mode=args.mode, strict=not args.lenient)
    except ParameterError as e:
        _emit({"error": str(e), "params": e.params.to_json() if e.params else None}, args.out)
        return 2
    _emit(p.to_json(), args.out)


def cmd_predicate(args):
    from .predicates import parse_predicate
    from .twise import analyze
    P = parse_predicate(args.predicate)
    ts = [int(t) for t in args.t.split(",")] if args.t else None
    _emit(analyze(P, ts).to_json(), args.out)


def cmd_plausibility(args):
    from .plausibility import find_implausible, low_income_census
    inst = _inst(args)
    tau = args.tau or inst.tau
    zeta = Q(args.zeta)
    res = find_implausible(inst, tau, zeta, args.c_max, mode=args.mode, budget=args.budget,
                           seed=args.seed)
    out = res.to_json()
    if args.census is not None:
        cen = low_income_census(inst, tau, zeta, args.c_max, Q(args.census), budget=args.budget)
        out["census"] = {"income_max": args.census, "count": cen.count}
    _emit(out, args.out)
    return 0 if res.plausible else 2


def cmd_closure(args):
    from .closure import closure
    inst = _inst(args)
    res = closure(inst, _vars(inst, args.S), args.small,
                  zeta=Q(args.zeta) if args.zeta else None, budget=args.budget)
    _emit(res.to_json(inst), args.out)


def cmd_planted(args):
    from .planted import consistency_probability, planted_marginal
    from .subgraph import subgraph_of_constraints
    inst = _inst(args)
    cons = [int(f) for f in args.H.split(",")] if args.H else []
    H = subgraph_of_constraints(inst, cons)
    out = {"constraints": cons,
           "consistency": frac_str(consistency_probability(inst, H, args.method))}
    if args.T:
        out["marginal"] = planted_marginal(inst, H, _vars(inst, args.T)).to_json()
    _emit(out, args.out)


def _pe(args, inst):
    from .pseudoexpectation import PseudoExpectation
    return PseudoExpectation(inst, args.small, Q(args.zeta), strict=args.strict,
                             budget=args.budget)


def cmd_pexp(args):
    from .polynomial import parse_poly
    from .pseudoexpectation import identity_check, moment_matrix, psd_check, satisfied_fraction
    inst = _inst(args)
    pe = _pe(args, inst)
    out: dict = {}
    status = 0
    for text in args.poly or []:
        out.setdefault("values", {})[text] = frac_str(pe.eval(parse_poly(text, inst)))
    if args.identity is not None:
        r = identity_check(pe, args.identity)
        out["identity"] = r.to_json()
        status = status or (0 if r.ok else 3)
    if args.psd is not None:
        M = moment_matrix(pe, args.psd, args.basis)
        r = psd_check(M)
        out["psd"] = r.to_json()
        status = status or (0 if r.psd else 3)
    if args.satisfied:
        out["satisfied_fraction"] = satisfied_fraction(pe).to_json()
    out["hypotheses"] = pe.hypothesis_report()
    _emit(out, args.out)
    return status


def cmd_gs(args):
    from .gram_schmidt import gs_orthogonality_check, gs_run
    from .params import Params
    inst = _inst(args)
    if args.params:
        with open(args.params) as fh:
            p = Params.from_json(json.load(fh))
        args.small, args.zeta = p.small, frac_str(p.zeta)
        D = args.D if args.D is not None else p.D
    else:
        D = args.D if args.D is not None else 1
    pe = _pe(args, inst)
    st = gs_run(pe, D, args.basis, witnesses=args.witnesses)
    out = st.to_json()
    if st.success:
        out["orthogonality"] = gs_orthogonality_check(st, pe).to_json()
    _emit(out, args.out)
    return 0 if st.success else 3


def cmd_oracle(args):
    from .oracle import brute_opt, twise_check, xor_satisfiable
    if args.what == "twise":
        from .predicates import RationalDistribution, parse_predicate
        if args.dist:
            with open(args.dist) as fh:
                d = json.load(fh)
            mu = RationalDistribution.from_json(d["mu"] if "mu" in d else d, int(d["q"]), int(d["k"]))
        else:
            from .twise import delta
            _, mu, _ = delta(parse_predicate(args.predicate), args.t)
        ok, v = twise_check(mu, args.t)
        _emit({"twise": ok, "t": args.t,
               "violation": None if v is None else
               {"coords": list(v[0]), "cell": list(v[1]), "mass": frac_str(v[2])}}, args.out)
        return 0 if ok else 2
    inst = _inst(args)
    if args.what == "opt":
        _emit(brute_opt(inst).to_json(), args.out)
    else:
        _emit({"satisfiable": xor_satisfiable(inst), "method": "xor-elim"}, args.out)


def cmd_run(args):
    from .pipeline import run_pipeline
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key in ("n", "m", "Delta", "predicate", "tau", "D", "seed", "zeta", "small", "c_max",
                "retries", "fixture", "basis"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if args.budget is not None:
        cfg["budget"] = args.budget
    if args.strict:
        cfg["strict"] = True
    if args.no_gs:
        cfg["gs"] = False
    rep = run_pipeline(cfg)
    _emit(rep.to_json(times=not args.no_times), args.out)
    return rep.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1, help="accepted; runs are sequential")
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--out", default=None)

    def src(p):
        p.add_argument("--inst", help="instance JSON or DIMACS .cnf")
        p.add_argument("--fixture", help="block, star:<arms>:<bseed> or twin")

    def pe_opts(p):
        p.add_argument("--small", type=int, default=4)
        p.add_argument("--zeta", default="1/5")
        p.add_argument("--strict", action="store_true")

    ap = argparse.ArgumentParser(prog="csp-sos", parents=[common],
                                 description="Exact SOS lower-bound toolkit for random CSPs")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", parents=[common], help="random instance or fixture")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--m", type=int)
    p.add_argument("--Delta", default="3")
    p.add_argument("--predicate", default="kxor:3:1")
    p.add_argument("--tau", type=int, default=3)
    p.add_argument("--fixture")
    p.add_argument("--no-literals", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("params", parents=[common], help="SMALL, zeta, D from the probability bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--Delta", required=True)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--tau", type=int, default=3)
    p.add_argument("--beta", default="1/10")
    p.add_argument("--mode", default="general", choices=["general", "large-lambda"])
    p.add_argument("--lenient", action="store_true", help="report SMALL even if below K/zeta")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("predicate", parents=[common], help="t-wise LP analysis")
    p.add_argument("--predicate", required=True)
    p.add_argument("--t", help="comma-separated t values")
    p.set_defaults(func=cmd_predicate)

    p = sub.add_parser("plausibility", parents=[common], help="search for implausible subgraphs")
    src(p)
    p.add_argument("--zeta", required=True)
    p.add_argument("--c-max", dest="c_max", type=int, default=8)
    p.add_argument("--tau", type=int)
    p.add_argument("--mode", default="exact", choices=["exact", "heuristic"])
    p.add_argument("--census", help="also count subgraphs with income <= this")
    p.set_defaults(func=cmd_plausibility)

    p = sub.add_parser("closure", parents=[common], help="cl(S)")
    src(p)
    p.add_argument("--S", required=True, help="comma-separated variables")
    p.add_argument("--small", type=int, required=True)
    p.add_argument("--zeta")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("planted", parents=[common], help="planted distribution of a subgraph")
    src(p)
    p.add_argument("--H", default="", help="comma-separated constraint ids (full neighbourhoods)")
    p.add_argument("--T", help="comma-separated target variables")
    p.add_argument("--method", default="exact", choices=["formula", "exact", "check"])
    p.set_defaults(func=cmd_planted)

    p = sub.add_parser("pexp", parents=[common], help="pseudoexpectation queries and checks")
    src(p)
    pe_opts(p)
    p.add_argument("--poly", action="append", help='e.g. "2*[x1=1] - 1"')
    p.add_argument("--identity", type=int, help="total degree for identity checks")
    p.add_argument("--psd", type=int, help="D for the moment matrix")
    p.add_argument("--basis", default="reduced", choices=["full", "reduced"])
    p.add_argument("--satisfied", action="store_true")
    p.set_defaults(func=cmd_pexp)

    p = sub.add_parser("gs", parents=[common], help="modified Gram-Schmidt")
    p.add_argument("action", choices=["run"])
    src(p)
    pe_opts(p)
    p.add_argument("--params")
    p.add_argument("--D", type=int)
    p.add_argument("--basis", default="reduced", choices=["full", "reduced"])
    p.add_argument("--witnesses", action="store_true")
    p.set_defaults(func=cmd_gs)

    p = sub.add_parser("oracle", parents=[common], help="brute force, elimination, t-wise")
    p.add_argument("what", choices=["opt", "xorsat", "twise"])
    src(p)
    p.add_argument("--dist", help="distribution JSON with q, k and mu")
    p.add_argument("--predicate", help="use the LP witness of this predicate (twise)")
    p.add_argument("--t", type=int, default=2)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", parents=[common], help="end-to-end demonstration")
    p.add_argument("--config", help="JSON file mirroring the flags")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--Delta")
    p.add_argument("--predicate")
    p.add_argument("--tau", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--zeta")
    p.add_argument("--small", type=int)
    p.add_argument("--c-max", dest="c_max", type=int)
    p.add_argument("--retries", type=int)
    p.add_argument("--fixture")
    p.add_argument("--basis", choices=["full", "reduced"])
    p.add_argument("--strict", action="store_true")
    p.add_argument("--no-gs", action="store_true")
    p.add_argument("--no-times", action="store_true", help="omit wall times for diffing")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None and args.cmd != "run":
        args.seed = 0
    if args.budget is None and args.cmd not in ("run",):
        args.budget = 5_000_000
    try:
        return args.func(args) or 0
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
