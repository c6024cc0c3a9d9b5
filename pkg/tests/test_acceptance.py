"""The twelve acceptance criteria, each at its stated tolerance and time limit.

Every criterion prints one ``CRITERION <n>: PASS|FAIL`` line with its numbers.
"""
import random
import time
from fractions import Fraction

from csp_sos.closure import closure, peel
from csp_sos.gram_schmidt import gs_orthogonality_check, gs_run, proportional_stage
from csp_sos.instance import build_fixture, generate
from csp_sos.oracle import acceptance_mass, brute_opt, twise_check, xor_satisfiable
from csp_sos.params import general_zeta, suggest_parameters, weirdness_holds
from csp_sos.planted import consistency_probability, planted_marginal
from csp_sos.plausibility import certified_small, enumerate_tau_subgraphs, find_implausible
from csp_sos.polynomial import spin
from csp_sos.predicates import builtin
from csp_sos.pseudoexpectation import (PseudoExpectation, identity_check, moment_matrix,
                                       psd_check, satisfied_fraction)
from csp_sos.subgraph import (Subgraph, account, accounting_identity, is_tau_subgraph,
                              observing)
from csp_sos.twise import complexity, delta, supports_twise

# tau-subgraphs materialized while criteria 5-8 run, for criterion 9
SEEN: list = []


def record(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# sparse 3-XOR hosts that are certified plausible up to 14 constraints
SPARSE_ZETA = Fraction(99, 100)


def sparse_hosts(count):
    out, seed = [], 0
    while len(out) < count:
        inst = generate(30, 10, "kxor:3:1", seed)
        small, _ = certified_small(inst, 3, SPARSE_ZETA, 14)
        if small == 7:
            out.append(inst)
        seed += 1
    return out


def sample_S(inst, size, rng):
    """Random variable set biased toward constraint scopes so closures are nontrivial."""
    S = set()
    while len(S) < size:
        if inst.m and rng.random() < 0.7:
            scope = inst.scope(rng.randrange(inst.m))
            S |= set(rng.sample(scope, min(len(scope), size - len(S), rng.randint(1, 3))))
        else:
            S.add(rng.randrange(inst.n))
    return frozenset(S)


def test_criterion_01_delta_lp(capsys):
    P = builtin("one-in-three")
    (d2, d3), dt = timed(lambda: (delta(P, 2)[0], delta(P, 3)[0]))
    ok = d2 == Fraction(1, 4) and d3 == Fraction(5, 8) and dt < 1
    record(capsys, 1, ok, f"delta(1-in-3,2)={d2} delta(1-in-3,3)={d3} time={dt:.3f}s")


def test_criterion_02_complexity(capsys):
    P = builtin("kxor:3:1")

    def run():
        tau, _ = complexity(P)
        ok2, mu = supports_twise(P, 2)
        ok3, farkas = supports_twise(P, 3)
        return tau, ok2, twise_check(mu, 2)[0], ok3, farkas

    (tau, ok2, w2, ok3, farkas), dt = timed(run)
    ok = tau == 3 and ok2 and w2 and not ok3 and farkas is not None and dt < 1
    record(capsys, 2, ok, f"complexity={tau} 2-wise feasible={ok2} witness checked={w2} "
                          f"3-wise feasible={ok3} time={dt:.3f}s")


def test_criterion_03_block(capsys):
    def run():
        inst = build_fixture("block")
        pe = PseudoExpectation(inst, 10, Fraction(1, 10))
        x1, y1 = spin(inst.var_index("x1")), spin(inst.var_index("y1"))
        vals = (pe.eval(x1), pe.eval(y1), pe.eval(x1 * y1))
        cl = closure(inst, [inst.var_index("x1")], 10).cl
        return vals, cl

    (vals, cl), dt = timed(run)
    ok = vals == (1, -1, -1) and cl.cons == frozenset(range(5)) and len(cl.edges) == 15 and dt < 5
    record(capsys, 3, ok, f"E[x1],E[y1],E[x1y1]={tuple(map(str, vals))} "
                          f"closure constraints={sorted(cl.cons)} time={dt:.2f}s")


def test_criterion_04_star(capsys):
    def run():
        inst = build_fixture("star:4:1")
        b = inst.meta["b"]
        pe = PseudoExpectation(inst, 4, Fraction(9, 10))
        pairs = [spin(2 * i - 1) * spin(2 * i) for i in range(1, 5)]
        vals_ok = all(pe.eval(p) == 0 for p in pairs) and all(
            pe.eval(pairs[i] * pairs[j]) == b[i] * b[j] for i in range(4) for j in range(4) if i != j)
        st = gs_run(pe, 2)
        ortho = gs_orthogonality_check(st, pe)
        dirs = all(proportional_stage(st, pairs[i] - b[i] * spin(0)) is not None for i in range(4))
        psd = psd_check(moment_matrix(pe, 2, "reduced")).psd
        return vals_ok, st.success, ortho.ok, dirs, psd

    res, dt = timed(run)
    ok = all(res) and dt < 30
    record(capsys, 4, ok, "values={} gs={} orthogonality={} hub-directions={} psd={} "
                          "time={:.2f}s".format(*res, dt))


def test_criterion_05_lower_bound_demo(capsys):
    t0 = time.perf_counter()
    zeta = Fraction(1, 5)
    unsat, rows, failures = 0, [], []
    with observing(SEEN.append):
        for seed in range(10):
            inst = generate(20, 60, "kxor:3:1", seed)
            if not xor_satisfiable(inst):
                unsat += 1
            small, res = certified_small(inst, 3, zeta, 8)
            row = f"seed{seed}:SMALL={small}"
            if small >= 1:
                pe = PseudoExpectation(inst, small, zeta)
                idr = identity_check(pe, 4)
                psd = psd_check(moment_matrix(pe, 2, "reduced")).psd
                row += f",identity={idr.ok},psd={psd}"
                if not (idr.ok and psd):
                    failures.append(seed)
            else:
                row += f",implausible(c={len(res.witness.cons)})"
            rows.append(row)
    dt = time.perf_counter() - t0
    plausible = sum(1 for r in rows if "identity" in r)
    ok = unsat >= 8 and not failures and dt < 600
    record(capsys, 5, ok, f"unsat={unsat}/10 plausible seeds={plausible} "
                          f"failing plausible seeds={failures} time={dt:.1f}s | " + " ".join(rows))


def test_criterion_06_consistency_formula(capsys):
    t0 = time.perf_counter()
    rng = random.Random(6)
    hosts = []
    for seed in range(40):
        P = "one-in-three" if seed % 2 else "kxor:3:0"
        inst = generate(30, 12, P, seed)
        if find_implausible(inst, 3, Fraction(1, 2), 10).plausible:
            hosts.append(inst)
    checked, bad = 0, []
    with observing(SEEN.append):
        while checked < 50:
            inst = rng.choice(hosts)
            # grow a connected constraint set of size <= 5, then drop random edges
            cons = [rng.randrange(inst.m)]
            for _ in range(rng.randint(0, 4)):
                nbrs = {g for f in cons for i in inst.scope(f) for g in inst.var_cons[i]} - set(cons)
                if not nbrs:
                    break
                cons.append(rng.choice(sorted(nbrs)))
            edges = set()
            for f in cons:
                scope = inst.scope(f)
                edges |= {(f, i) for i in rng.sample(scope, rng.randint(1, len(scope)))}
            H = Subgraph(frozenset(edges))
            assert not peel(H.edges, (), 3).edges   # plausible hosts have no leafless part
            formula = consistency_probability(inst, H, "formula")
            brute = acceptance_mass(inst, H)
            if formula != brute:
                bad.append((sorted(H.edges), str(formula), str(brute)))
            checked += 1
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    record(capsys, 6, ok, f"{checked} subgraphs on {len(hosts)} plausible hosts, "
                          f"mismatches={len(bad)} time={dt:.1f}s")


def closure_hosts():
    out = [(build_fixture("block"), Fraction(1, 5), 5), (build_fixture("star:4:1"), Fraction(9, 10), 4)]
    for inst, zeta, small in out:
        assert certified_small(inst, 3, zeta, 2 * small)[0] == small
    out += [(inst, SPARSE_ZETA, 7) for inst in sparse_hosts(20)]
    return out


def test_criterion_07_closure_theorems(capsys):
    t0 = time.perf_counter()
    rng = random.Random(7)
    hosts = closure_hosts()
    fails = {"revenue": 0, "small": 0, "monotone": 0, "iterated": 0}
    nontrivial = 0
    with observing(SEEN.append):
        for k in range(200):
            inst, zeta, small = hosts[k % len(hosts)]
            cap = int(zeta * small)
            S = sample_S(inst, rng.randint(0, cap), rng)
            T = S | sample_S(inst, rng.randint(0, cap - len(S)), rng) if cap > len(S) else S
            cl = closure(inst, S, small).cl
            nontrivial += bool(cl.edges)
            if account(cl, 3, zeta).revenue > len(S):
                fails["revenue"] += 1
            if len(cl.cons) > small:
                fails["small"] += 1
            if not cl.edges <= closure(inst, T, small).cl.edges:
                fails["monotone"] += 1
            if closure(inst, S | cl.vbls, small).cl != cl:
                fails["iterated"] += 1
    dt = time.perf_counter() - t0
    ok = not any(fails.values()) and dt < 300
    record(capsys, 7, ok, f"200 sets on {len(hosts)} hosts, nontrivial closures={nontrivial}, "
                          f"failures={fails} time={dt:.1f}s")


def test_criterion_08_marginal_stability(capsys):
    t0 = time.perf_counter()
    rng = random.Random(8)
    hosts = closure_hosts()
    bad, done, nontrivial = 0, 0, 0
    with observing(SEEN.append):
        while done < 100:
            inst, zeta, small = hosts[done % len(hosts)]
            S = sample_S(inst, rng.randint(1, max(1, int(zeta * small))), rng)
            cl = closure(inst, S, small).cl
            extra = [f for f in range(inst.m) if f not in cl.cons]
            rng.shuffle(extra)
            edges = set(cl.edges)
            for f in extra[:max(0, small - len(cl.cons))][:rng.randint(0, 4)]:
                scope = inst.scope(f)
                edges |= {(f, i) for i in rng.sample(scope, rng.randint(1, len(scope)))}
            H = Subgraph(frozenset(edges))
            nontrivial += H != cl
            if planted_marginal(inst, H, S) != planted_marginal(inst, cl, S):
                bad += 1
            done += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 300
    record(capsys, 8, ok, f"{done} pairs ({nontrivial} with H strictly larger), "
                          f"mismatches={bad} time={dt:.1f}s")


def random_tau_plus(inst, rng, tau=3):
    cons = rng.sample(range(inst.m), rng.randint(0, 3))
    edges = set()
    for f in cons:
        scope = inst.scope(f)
        edges |= {(f, i) for i in rng.sample(scope, rng.randint(tau, len(scope)))}
    iso = set(rng.sample(range(inst.n), rng.randint(0, 3)))
    return Subgraph(frozenset(edges), frozenset(iso))


def test_criterion_09_accounting(capsys):
    t0 = time.perf_counter()
    rng = random.Random(9)
    hosts = closure_hosts()
    own = []
    with observing(own.append):
        for inst, _, small in hosts[:6]:
            list(enumerate_tau_subgraphs(inst, 3, 4))
    subgraphs = [H for H in SEEN + own if is_tau_subgraph(H, 3)]
    zetas = [Fraction(1, 5), Fraction(1, 2), SPARSE_ZETA]
    bad_identity = sum(1 for H in subgraphs for z in zetas if not accounting_identity(H, 3, z))
    bad_union = bad_loss = 0
    mixed = [build_fixture("block"), build_fixture("star:4:1")] + [h for h, _, _ in hosts[2:8]] + \
        [generate(10, 8, "kxor:4:1", s) for s in range(4)]
    for _ in range(500):
        inst = rng.choice(mixed)
        H, H2 = random_tau_plus(inst, rng), random_tau_plus(inst, rng)
        H2 = Subgraph(H2.edges)                      # the second argument has no isolated part
        r = account(H, 3, 0).revenue
        U = H | H2
        s = sum(1 for i in H2.leaves if i not in H.vbls)
        b = sum(1 for f, i in H2.edges - H.edges if (f in H.cons) != (i in H.vbls))
        RU = account(U, 3, 0).revenue
        bad_union += RU > r + s
        bad_loss += RU > r + s - b
    dt = time.perf_counter() - t0
    ok = subgraphs and not bad_identity and not bad_union and not bad_loss
    record(capsys, 9, ok, f"identity on {len(subgraphs)} enumerated tau-subgraphs x {len(zetas)} "
                          f"zetas: failures={bad_identity}; 500 union pairs: union-revenue "
                          f"failures={bad_union}, boundary failures={bad_loss} time={dt:.1f}s")


def test_criterion_10_delta_refutation(capsys):
    t0 = time.perf_counter()
    zeta = general_zeta(10)
    plausible, ineq_bad, low_opt, opts = 0, 0, 0, []
    for seed in range(10):
        inst = generate(18, 180, "one-in-three", seed)
        small, res = certified_small(inst, 3, zeta, 4)
        if small >= 1:
            plausible += 1
            sf = satisfied_fraction(PseudoExpectation(inst, small, zeta))
            ineq_bad += not (sf.delta == Fraction(1, 4) and sf.value >= sf.floor)
        o = brute_opt(inst).opt
        opts.append(str(o))
        low_opt += o <= Fraction(11, 20)
    dt = time.perf_counter() - t0
    ok = plausible > 0 and ineq_bad == 0 and low_opt >= 8 and dt < 600
    record(capsys, 10, ok, f"plausible seeds={plausible}/10 (inequality failures={ineq_bad}), "
                           f"Opt<=0.55 in {low_opt}/10 seeds {opts} time={dt:.1f}s")


def test_criterion_11_parameters(capsys):
    t0 = time.perf_counter()
    checked, bad = 0, []
    for n in (10 ** 6, 10 ** 8, 10 ** 12, 10 ** 20, 10 ** 40):
        for Delta in (10, 50, 1000):
            for K in (3, 5):
                for tau in (3, 4, 6):
                    for beta in (Fraction(1, 2), Fraction(1, 1000)):
                        p = suggest_parameters(n, Delta, K, tau, beta, strict=False)
                        c = 2 * p.small
                        if not weirdness_holds(n, Delta, K, tau - 2, p.zeta, beta, c):
                            bad.append((n, Delta, K, tau, str(beta), "holds"))
                        if not p.meta["capped"] and weirdness_holds(n, Delta, K, tau - 2, p.zeta,
                                                                    beta, c + 2):
                            bad.append((n, Delta, K, tau, str(beta), "tight"))
                        checked += 1
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    record(capsys, 11, ok, f"{checked} grid points, violations={bad[:3]} time={dt:.1f}s")


def test_criterion_12_negative_controls(capsys):
    inst = build_fixture("star:4:1")
    pe = PseudoExpectation(inst, 4, Fraction(9, 10))
    assert identity_check(pe, 2).ok
    pe.cache[((1, 1),)] = Fraction(1, 3)
    rep = identity_check(pe, 2)
    res = find_implausible(build_fixture("block"), 3, Fraction(1, 2), 6)
    tripped_id = not rep.ok
    tripped_pl = res.witness is not None and len(res.witness.cons) == 5 and res.income < 0
    record(capsys, 12, tripped_id and tripped_pl,
           f"corrupted cache: identity violation={rep.violation}; block at zeta=1/2: "
           f"witness constraints={sorted(res.witness.cons) if res.witness else None} "
           f"income={res.income}")
