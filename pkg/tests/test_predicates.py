import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from csp_sos.predicates import (LiteralPattern, Predicate, RationalDistribution,
                                TrivialPredicateWarning, all_tuples, apply_literals, builtin,
                                decode, encode, parse_predicate, predicate_from_table,
                                shift_distribution)
from csp_sos.rational import Q, frac_str, parse_frac


def test_rational_helpers():
    assert Q("3/6") == Fraction(1, 2)
    assert frac_str(Fraction(2)) == "2/1"
    assert parse_frac(" -4/8 ") == Fraction(-1, 2)
    with pytest.raises(TypeError):
        Q(0.5)
    with pytest.raises(TypeError):
        Q(True)


@given(st.integers(2, 5), st.integers(1, 5), st.data())
def test_encode_roundtrip(q, k, data):
    z = tuple(data.draw(st.lists(st.integers(0, q - 1), min_size=k, max_size=k)))
    assert decode(encode(z, q), q, k) == z


def test_first_coordinate_most_significant():
    assert encode((1, 0, 0), 2) == 4
    assert list(all_tuples(2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_builtin_predicates():
    one = builtin("one-in-three")
    assert one.sat_count == 3 and one.mu_P == Fraction(3, 8)
    assert one((0, 1, 0)) and not one((1, 1, 0))
    x = builtin("kxor:3:1")
    assert x.sat_count == 4 and x((1, 1, 1)) and not x((1, 1, 0))
    sat = builtin("ksat:3")
    assert sat.sat_count == 7 and not sat((0, 0, 0))
    assert parse_predicate("1in3") == one


def test_trivial_predicate_warns():
    with pytest.warns(TrivialPredicateWarning):
        predicate_from_table(2, 2, [1, 1, 1, 1])


def test_predicate_json_roundtrip():
    P = builtin("one-in-three")
    assert Predicate.from_json(P.to_json()) == P


def test_dimension_caps():
    with pytest.raises(ValueError):
        Predicate(9, 1, tuple([True] * 9))


def perms(q, k):
    return st.lists(st.permutations(list(range(q))), min_size=k, max_size=k).map(
        lambda ps: LiteralPattern(tuple(tuple(p) for p in ps)))


@given(perms(3, 3), perms(3, 3))
def test_literal_group_laws(a, b):
    for z in itertools.product(range(3), repeat=3):
        assert a.compose(b)(z) == a(b(z))
        assert a.inverse()(a(z)) == z
    assert a.compose(a.inverse()).is_identity


@given(perms(2, 3))
def test_literals_preserve_satisfied_mass(lit):
    P = builtin("one-in-three")
    mu = RationalDistribution.uniform_on(2, 3, P.satisfying())
    Qp = apply_literals(P, lit)
    mu2 = shift_distribution(mu, lit)
    assert mu2.mass_off(Qp) == 0
    assert Qp.sat_count == P.sat_count


def test_from_signs():
    lit = LiteralPattern.from_signs([1, -1, 1])
    assert lit((0, 0, 1)) == (0, 1, 1)


def test_distribution_validation():
    with pytest.raises(ValueError):
        RationalDistribution(2, 1, (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        RationalDistribution(2, 1, (Fraction(3, 2), Fraction(-1, 2)))
    mu = RationalDistribution.uniform(2, 2)
    assert mu.marginal((1,)) == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}
    pt = RationalDistribution.point(2, 2, (1, 0))
    assert pt.support() == [(1, 0)]
