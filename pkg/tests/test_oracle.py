import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from csp_sos.instance import Instance, build_fixture, generate, xor_constraint
from csp_sos.oracle import (NotXorError, OracleBudgetExceeded, brute_opt, marginal_bruteforce,
                            twise_check, xor_satisfiable)
from csp_sos.planted import planted_marginal
from csp_sos.predicates import Predicate, RationalDistribution, builtin
from csp_sos.subgraph import EMPTY, full_neighborhood
from csp_sos.twise import delta


def test_brute_examples():
    one = Instance(3, 2, 3, (xor_constraint((0, 1, 2), 1),))
    assert brute_opt(one).opt == 1
    clash = Instance(3, 2, 3, (xor_constraint((0, 1, 2), 1), xor_constraint((0, 1, 2), -1)))
    assert brute_opt(clash).opt == Fraction(1, 2)
    assert not xor_satisfiable(clash)


@given(st.integers(0, 10 ** 6), st.integers(1, 12), st.sampled_from(["one-in-three", "kxor:3:1", "ksat:3"]))
def test_brute_matches_plain_enumeration(seed, m, pred):
    inst = generate(7, m, pred, seed)
    best = max(sum(c.predicate.table[sum(x[i] * 2 ** (2 - j) for j, i in enumerate(c.scope))]
                   for c in inst.constraints)
               for x in itertools.product(range(2), repeat=inst.n))
    res = brute_opt(inst, chunk=16)
    assert res.opt == Fraction(best, m)
    x = res.argmax
    assert sum(c.predicate.table[sum(x[i] * 2 ** (2 - j) for j, i in enumerate(c.scope))]
               for c in inst.constraints) == best


def test_brute_budget():
    with pytest.raises(OracleBudgetExceeded):
        brute_opt(generate(30, 5, "kxor:3:1", 0))


def test_xor_examples():
    blk = build_fixture("block")
    assert xor_satisfiable(blk)
    # product of x1 over both blocks' equations: append x1 x2 x3 = -1
    bad = blk.with_constraints(list(blk.constraints) + [xor_constraint((0, 1, 2), -1)])
    assert not xor_satisfiable(bad)
    assert xor_satisfiable(Instance(3, 2, 3, ()))
    with pytest.raises(NotXorError):
        xor_satisfiable(generate(6, 3, "one-in-three", 0))


@given(st.integers(0, 10_000), st.integers(4, 16))
def test_elimination_matches_brute_force(seed, m):
    inst = generate(12, m, "kxor:3:%d" % (seed % 2), seed)
    assert brute_opt(inst).satisfiable == xor_satisfiable(inst)


def test_mod3_elimination():
    # x0 + x1 + x2 = 0 (mod 3) and x0 + x1 + x2 = 1 cannot both hold
    table0 = tuple(sum(z) % 3 == 0 for z in __import__("itertools").product(range(3), repeat=3))
    table1 = tuple(sum(z) % 3 == 1 for z in __import__("itertools").product(range(3), repeat=3))
    from csp_sos.instance import Constraint
    P0, P1 = Predicate(3, 3, table0), Predicate(3, 3, table1)
    mu0 = RationalDistribution.uniform_on(3, 3, P0.satisfying())
    mu1 = RationalDistribution.uniform_on(3, 3, P1.satisfying())
    inst = Instance(4, 3, 3, (Constraint((0, 1, 2), mu0, P0), Constraint((1, 2, 3), mu1, P1)))
    assert xor_satisfiable(inst) and brute_opt(inst).opt == 1
    inst = Instance(4, 3, 3, (Constraint((0, 1, 2), mu0, P0), Constraint((0, 1, 2), mu1, P1)))
    assert not xor_satisfiable(inst) and brute_opt(inst).opt == Fraction(1, 2)


def test_twise_check():
    ok, v = twise_check(RationalDistribution.uniform(2, 3), 3)
    assert ok and v is None
    ok, v = twise_check(RationalDistribution.point(2, 3, (1, 0, 0)), 1)
    assert not ok and v[0] == (0,) and v[2] == 0
    for name in ("one-in-three", "kxor:3:1", "ksat:3", "kxor:4:0"):
        P = builtin(name)
        for t in range(1, P.k + 1):
            assert twise_check(delta(P, t)[1], t)[0]


def test_marginal_bruteforce_examples():
    inst = generate(6, 3, "one-in-three", 4)
    m = marginal_bruteforce(inst, EMPTY, [0, 1])
    assert set(m.probs.values()) == {Fraction(1, 4)}
    H = full_neighborhood(inst, 1)
    assert marginal_bruteforce(inst, H, inst.scope(1)) == planted_marginal(inst, H, inst.scope(1))


def test_one_in_three_opt_band():
    inst = generate(16, 320, "one-in-three", 3)
    assert brute_opt(inst).opt < Fraction(11, 20)
