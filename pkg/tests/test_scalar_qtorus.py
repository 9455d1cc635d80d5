from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallscatter.qtorus import (
    QTAlgebra,
    QTError,
    dilog_wall_function,
    qt_bracket,
    qt_exp,
    qt_log,
    qt_mul,
)
from hallscatter.scalar import (
    ONE,
    Q,
    T,
    ScalarRF,
    parse_scalar,
    quantum_integer,
    r_k,
    r_prime,
    r_scl,
    t_pow,
)


def test_r_k_closed_forms():
    # R_k = (-1)^(k-1) / (k (q^k - 1)); evaluate() takes t, so q = 4 below
    assert r_k(1) == ONE / (Q - ONE)
    assert r_k(2) == -ONE / ((Q**2 - ONE) * 2)
    assert r_k(3).evaluate(2) == Fraction(1, 3 * (2**6 - 1))


def test_r_prime_closed_forms():
    assert r_prime(1) == ONE / (T - t_pow(-1))
    assert r_prime(2).evaluate(2) == Fraction(-1, 2 * (4 - Fraction(1, 4)))


def test_r_scl_flags():
    assert r_scl(1, "alternating") == Fraction(-1)
    assert r_scl(1, "dilog") == Fraction(1)
    assert r_scl(2, "alternating") == Fraction(1, 4)
    assert r_scl(2, "dilog") == Fraction(-1, 4)


def test_quantum_integer():
    assert quantum_integer(1) == ONE
    assert quantum_integer(3) == t_pow(2) + ONE + t_pow(-2)


def test_parse_roundtrip():
    for x in (r_k(3), r_prime(2), Q - ONE, ScalarRF.of(Fraction(-7, 3))):
        assert parse_scalar(x.text()) == x


def test_q_is_t_squared():
    assert Q == T * T


def _alg(order=4):
    return QTAlgebra([[0, 1], [-1, 0]], order)


def test_form_must_be_skew():
    with pytest.raises(QTError):
        QTAlgebra([[0, 1], [1, 0]], 3)


def test_mismatched_orders_rejected():
    with pytest.raises(QTError):
        _alg(3).one() + _alg(4).one()


def test_truncation_drops_high_degree():
    a = _alg(2)
    x = a.monomial((1, 1))
    assert qt_mul(x, x).is_zero()


def test_exp_log_inverse():
    a = _alg(5)
    g = dilog_wall_function(a, (1, 0)) + dilog_wall_function(a, (0, 1))
    assert qt_log(qt_exp(g)) == g


def test_dilog_rejects_non_primitive():
    with pytest.raises(QTError):
        dilog_wall_function(_alg(), (2, 0))


exps = st.tuples(st.integers(0, 2), st.integers(0, 2))
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
elements = st.dictionaries(exps, coeffs, max_size=3)


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_associativity_and_jacobi(x, y, z):
    a = _alg(5)
    x, y, z = a.element(x), a.element(y), a.element(z)
    assert qt_mul(qt_mul(x, y), z) == qt_mul(x, qt_mul(y, z))
    jac = qt_bracket(x, qt_bracket(y, z)) + qt_bracket(y, qt_bracket(z, x)) + qt_bracket(z, qt_bracket(x, y))
    assert jac.is_zero()


@settings(max_examples=40, deadline=None)
@given(exps, exps)
def test_commutation_rule(n1, n2):
    a = _alg(6)
    lhs = qt_mul(a.monomial(n1), a.monomial(n2))
    rhs = qt_mul(a.monomial(n2), a.monomial(n1)).scale(t_pow(2 * a.pairing(n1, n2)))
    assert lhs == rhs


def test_bracket_matches_commutator():
    a = _alg(4)
    x = a.monomial((1, 0), Fraction(2)) + a.monomial((0, 1))
    y = a.monomial((1, 1)) + a.monomial((0, 2), Fraction(-1, 3))
    assert qt_bracket(x, y) == qt_mul(x, y) - qt_mul(y, x)
