import decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from csp_sos.params import (ParameterError, Params, epsilon, general_zeta, suggest_parameters,
                            weirdness_holds)

decimal.getcontext().prec = 120


def holds_by_logs(n, Delta, K, lam, zeta, beta, c):
    """Same inequality compared through 120-digit logarithms."""
    D = decimal.Decimal
    e = (D(lam) - D(zeta.numerator) / D(zeta.denominator)) / 2
    lhs = D(20 ** K).ln() + (D(Delta.numerator) / D(Delta.denominator)).ln() \
        + e * (D(K * c) / D(n)).ln()
    rhs = (D(beta.numerator) / D(beta.denominator)).ln() - D(50 ** K).ln()
    return lhs <= rhs


GRID = [(n, Fraction(Delta), K, tau, beta)
        for n in (10 ** 6, 10 ** 9, 10 ** 15, 10 ** 40)
        for Delta in (10, 100)
        for K in (3, 4)
        for tau in (3, 4)
        for beta in (Fraction(1, 2), Fraction(1, 100))]


@pytest.mark.parametrize("n,Delta,K,tau,beta", GRID)
def test_small_is_tight(n, Delta, K, tau, beta):
    p = suggest_parameters(n, Delta, K, tau, beta, strict=False)
    lam = tau - 2
    c = 2 * p.small
    assert weirdness_holds(n, Delta, K, lam, p.zeta, beta, c)
    if not p.meta["capped"]:
        assert not weirdness_holds(n, Delta, K, lam, p.zeta, beta, c + 2)
        if p.small:
            assert holds_by_logs(n, Delta, K, lam, p.zeta, beta, c)
        assert not holds_by_logs(n, Delta, K, lam, p.zeta, beta, c + 2)
    assert p.D == (p.zeta * p.small / 3).__floor__()


def test_strict_rejects_small_smallness():
    with pytest.raises(ParameterError) as e:
        suggest_parameters(10 ** 6, 10, 3, 3, Fraction(1, 2))
    assert e.value.params is not None and e.value.params.small < 3 / e.value.params.zeta


def test_large_lambda_mode():
    p = suggest_parameters(10 ** 40, 10, 3, 5, Fraction(1, 2), mode="large-lambda", strict=False)
    assert p.zeta == Fraction(3, 2)


def test_zeta_and_epsilon():
    assert general_zeta(16) == Fraction(1, 4)
    assert general_zeta(10) == Fraction(301, 1000)
    # 2^(log n / (2 log Delta)) / sqrt(n) at n = 10^4, Delta = 100 is 2 / 100
    assert epsilon(10 ** 4, 100) == pytest.approx(Fraction(1, 50))


def test_violations():
    assert Params.manual(3, Fraction(1, 5), 1, 2, 3).violations(20)
    assert Params.manual(3, Fraction(99, 100), 7, 2, 3).violations(30) == []


@given(st.integers(10, 10 ** 6), st.integers(1, 50))
def test_monotone_in_c(n, c):
    z = Fraction(1, 3)
    if weirdness_holds(n, 10, 3, 1, z, Fraction(1, 2), c + 1):
        assert weirdness_holds(n, 10, 3, 1, z, Fraction(1, 2), c)
