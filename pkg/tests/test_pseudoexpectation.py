import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from csp_sos.instance import build_fixture, generate
from csp_sos.params import Params
from csp_sos.plausibility import certified_small
from csp_sos.polynomial import Polynomial, mono, parse_poly, spin
from csp_sos.pseudoexpectation import (DegreeCapExceeded, PseudoExpectation, identity_check,
                                       moment_matrix, psd_check, satisfied_fraction)

Z = Fraction(1, 10)


@pytest.fixture(scope="module")
def block():
    inst = build_fixture("block")
    return inst, PseudoExpectation(inst, 10, Z)


@pytest.fixture(scope="module")
def star():
    inst = build_fixture("star:4:1")
    return inst, PseudoExpectation(inst, 4, Fraction(9, 10))


def test_block_values(block):
    inst, pe = block
    x1, y1 = inst.var_index("x1"), inst.var_index("y1")
    assert pe.eval(spin(x1)) == 1
    assert pe.eval(spin(y1)) == -1
    assert pe.eval(spin(x1) * spin(y1)) == -1
    assert pe.eval(spin(x1) * spin(y1), joint=True) == -1
    assert pe.eval(parse_poly("2*[x1=1] - 1", inst)) == 1


def test_star_values(star):
    inst, pe = star
    b = inst.meta["b"]
    pairs = [spin(2 * i - 1) * spin(2 * i) for i in range(1, 5)]
    for i, p in enumerate(pairs):
        assert pe.eval(p) == 0
        for j, r in enumerate(pairs):
            assert pe.eval(p * r) == (1 if i == j else b[i] * b[j])
        assert pe.eval(p * spin(0)) == b[i]


def test_cached_and_fresh_agree(star):
    inst, pe = star
    for m in list(pe.cache)[:40]:
        assert pe.recompute(m) == pe(m)


def test_full_and_reduced_psd_agree(star):
    _, pe = star
    full = psd_check(moment_matrix(pe, 2, "full"))
    red = psd_check(moment_matrix(pe, 2, "reduced"))
    assert full.psd and red.psd and full.rank == red.rank


def test_psd_counterexample():
    r = psd_check([[1, 2], [2, 1]])
    assert not r.psd and r.value < 0
    v = r.counterexample
    assert v[0] * v[0] + 4 * v[0] * v[1] + v[1] * v[1] == r.value
    # the textbook direction also works
    u = (1, -1)
    assert u[0] ** 2 + 4 * u[0] * u[1] + u[1] ** 2 == -2


def test_psd_zero_pivot_with_coupling():
    r = psd_check([[0, 1], [1, 0]])
    assert not r.psd and r.value < 0


@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 1000))
def test_psd_on_gram_matrices(n, r, seed):
    rng = np.random.default_rng(seed)
    B = rng.integers(-3, 4, size=(n, r))
    G = (B @ B.T).tolist()
    res = psd_check(G)
    assert res.psd and res.rank == np.linalg.matrix_rank(B)
    assert psd_check(G, mode="float").psd
    G[0][0] -= 1 + sum(abs(v) for v in G[0])
    bad = psd_check(G)
    assert not bad.psd


def test_psd_rejects_asymmetric():
    with pytest.raises(ValueError):
        psd_check([[1, 0], [1, 1]])


def test_identities(star, block):
    assert identity_check(star[1], 4).ok
    assert identity_check(block[1], 3).ok


def test_corrupted_cache_trips_identity():
    inst = build_fixture("star:3:0")
    pe = PseudoExpectation(inst, 3, Fraction(9, 10))
    assert identity_check(pe, 2).ok
    pe.cache[((0, 1),)] = Fraction(1, 7)
    rep = identity_check(pe, 2)
    assert not rep.ok and rep.violation["identity"] == "sum_to_one"


def test_strict_caps():
    inst = build_fixture("star:3:0")
    pe = PseudoExpectation(inst, 3, Fraction(1, 2), strict=True)
    with pytest.raises(DegreeCapExceeded):
        pe(mono([(0, 1), (1, 1)]))
    lax = PseudoExpectation(inst, 3, Fraction(1, 2))
    lax(mono([(0, 1), (1, 1)]))
    assert lax.events["degree_over_cap"] == 1


def test_satisfied_fraction_star(star):
    sf = satisfied_fraction(star[1])
    assert sf.value == 1 and sf.census == 0 and sf.ok


@given(st.integers(0, 10_000))
def test_satisfied_fraction_floor(seed):
    inst = generate(24, 6, "one-in-three", seed)
    small, _ = certified_small(inst, 3, Fraction(1, 2), 6)
    assume(small >= 1)
    pe = PseudoExpectation(inst, small, Fraction(1, 2))
    sf = satisfied_fraction(pe)
    assert sf.delta == Fraction(1, 4)
    assert sf.value >= sf.floor


def sparse_plausible(seed):
    inst = generate(30, 10, "kxor:3:1", seed)
    small, _ = certified_small(inst, 3, Fraction(99, 100), 14)
    return inst, small


@pytest.mark.slow
def test_psd_within_hypotheses():
    inst, small = sparse_plausible(0)
    zeta = Fraction(99, 100)
    assert small == 7 and Params.manual(3, zeta, small, 2, 3).violations(inst.n) == []
    pe = PseudoExpectation(inst, small, zeta, strict=True)
    assert psd_check(moment_matrix(pe, 2, "reduced")).psd
    assert identity_check(pe, 4).ok
    assert pe.events == {"degree_over_cap": 0, "closure_not_small": 0}


@given(st.integers(0, 10_000))
def test_polynomial_ring(seed):
    rng = random.Random(seed)

    def rand_poly():
        return Polynomial({mono([(v, rng.randint(0, 1)) for v in rng.sample(range(4), rng.randint(0, 2))]):
                           rng.randint(-3, 3) for _ in range(3)})
    a, b, c = rand_poly(), rand_poly(), rand_poly()
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - a == Polynomial()
