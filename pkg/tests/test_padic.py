from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from errors import DivisionByIndeterminate, NonUnitLinearTerm, SingularRoot
from padic import (
    PadicSeries,
    TruncatedPadic,
    compose,
    derivative,
    evaluate,
    formal_integrate,
    guard_digits,
    hensel_root,
    identity_series,
    inverse,
    multiply,
    padic_arith,
    reverse,
    series_compose_reverse,
)

PRIMES = st.sampled_from([2, 3, 5, 7])
INTS = st.integers(min_value=-(10**6), max_value=10**6)


def test_from_rational_unit_denominator():
    x = TruncatedPadic.from_rational(5, Fraction(1, 3), 4)
    assert x.is_unit
    assert (x * 3).contains(1)


def test_negative_valuation():
    x = TruncatedPadic.from_rational(3, Fraction(1, 9), 5)
    assert x.valuation == -2
    assert x.lift() == Fraction(1, 9)


def test_zero_has_valuation_equal_to_precision():
    z = TruncatedPadic.from_int(3, 3**7, 5)
    assert z.is_zero
    assert z.valuation == 5


def test_multiplication_precision_is_sharp():
    x = TruncatedPadic.from_int(3, 3, 5)
    y = TruncatedPadic.from_int(3, 9, 5)
    prod = x * y
    assert prod.precision == 6
    assert prod.contains(27)


def test_division_by_indeterminate():
    x = TruncatedPadic.from_int(5, 7, 4)
    with pytest.raises(DivisionByIndeterminate):
        x / TruncatedPadic.zero(5, 4)


@settings(max_examples=200, deadline=None)
@given(PRIMES, INTS, INTS, st.integers(min_value=1, max_value=8), st.sampled_from(["add", "sub", "mul", "div"]))
def test_truncated_arithmetic_contains_exact_result(p, a, b, m, op):
    x = TruncatedPadic.from_int(p, a, m)
    y = TruncatedPadic.from_int(p, b, m)
    if op == "div":
        assume(not y.is_zero)
    exact = {
        "add": lambda: Fraction(a + b),
        "sub": lambda: Fraction(a - b),
        "mul": lambda: Fraction(a * b),
        "div": lambda: Fraction(a, b),
    }[op]()
    assert padic_arith(x, y, op).contains(exact)


def test_padic_arith_unknown_op():
    x = TruncatedPadic.from_int(3, 1, 2)
    with pytest.raises(ValueError):
        padic_arith(x, x, "pow")


def test_power():
    x = TruncatedPadic.from_int(7, 3, 6)
    assert (x**5).contains(243)
    assert (x**-1 * x).contains(1)


def test_json_preserves_value():
    x = TruncatedPadic.from_rational(3, Fraction(5, 27), 6)
    assert TruncatedPadic.from_json(x.to_json()) == x


@pytest.mark.parametrize("ell,terms,expected", [(3, 10, 3), (2, 1, 0), (5, 25, 2), (5, 26, 3)])
def test_guard_digits(ell, terms, expected):
    assert guard_digits(ell, terms) == expected


def _series(ell, values, m=8):
    return PadicSeries.from_rationals(ell, values, m)


def test_derivative_undoes_integration():
    s = _series(5, [1, 2, 3, 4, 5, 6, 7])
    assert derivative(formal_integrate(s)).agrees(s)


def test_integration_loses_digits_at_multiples_of_ell():
    s = _series(3, [1] * 9)
    integ = formal_integrate(s)
    # c₂/3 と c₈/9
    assert integ[3].precision == 7
    assert integ[9].precision == 6


def test_inverse():
    s = _series(5, [1, 2, 3, 4, 5, 6])
    prod = multiply(s, inverse(s))
    assert prod.agrees(_series(5, [1, 0, 0, 0, 0, 0]))


def test_inverse_needs_unit_constant():
    with pytest.raises(DivisionByIndeterminate):
        inverse(_series(5, [0, 1, 2]))


def test_reverse_is_compositional_inverse():
    s = _series(5, [0, 1, 3, 4, 1, 2, 7])
    r = reverse(s)
    assert compose(s, r).agrees(identity_series(5, len(s), 8))
    assert compose(r, s).agrees(identity_series(5, len(s), 8))


def test_reverse_needs_unit_linear_term():
    with pytest.raises(NonUnitLinearTerm):
        reverse(_series(3, [0, 3, 1]))


def test_compose_rejects_nonzero_constant():
    with pytest.raises(ValueError):
        compose(_series(3, [1, 1]), _series(3, [1, 1]))


def test_series_compose_reverse_dispatch():
    s = _series(7, [0, 1, 1, 1])
    assert series_compose_reverse(s, "reverse").agrees(reverse(s))
    with pytest.raises(ValueError):
        series_compose_reverse(s, "compose")
    with pytest.raises(ValueError):
        series_compose_reverse(s, "invert")


def test_evaluate_polynomial():
    s = _series(5, [1, 2, 3])
    t = TruncatedPadic.from_int(5, 5, 6)
    assert evaluate(s, t).contains(1 + 10 + 75)


def test_hensel_lifts_square_roots():
    roots = hensel_root([-2, 0, 1], 7, 5)
    assert len(roots) == 2
    for r in roots:
        assert (r * r).contains(2)


def test_hensel_singular_root():
    with pytest.raises(SingularRoot):
        hensel_root([0, 0, 1], 3, 4)
