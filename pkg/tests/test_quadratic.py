import math
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Poly, Symbol, discriminant

from errors import (
    DiscriminantMismatch,
    FactorBaseInsufficient,
    InvalidDiscriminant,
    NotPositiveDefinite,
)
from quadratic import (
    QuadForm,
    _bezout3,
    class_number,
    cm_point,
    compose,
    enumerate_class_group,
    factor_class,
    form_order,
    form_power,
    hilbert_class_poly,
    hilbert_class_poly_auto,
    inverse_form,
    j_invariant,
    prime_form,
    principal_form,
    reduce_form,
    word_bound,
)

DISCS = [-23, -47, -71, -56, -84, -103, -199]


def test_class_group_minus_23():
    forms = enumerate_class_group(-23)
    assert [f.to_json() for f in forms] == [[1, 1, 6], [2, 1, 3], [2, -1, 3]]


@pytest.mark.parametrize(
    "disc,h",
    [(-3, 1), (-4, 1), (-7, 1), (-15, 2), (-20, 2), (-23, 3), (-47, 5), (-56, 4), (-71, 7), (-84, 4)],
)
def test_class_number(disc, h):
    assert class_number(disc) == h


@pytest.mark.parametrize("disc", [0, 5, -1, -6])
def test_invalid_discriminant(disc):
    with pytest.raises(InvalidDiscriminant):
        enumerate_class_group(disc)


@pytest.mark.parametrize("raw,reduced", [((1, 1, 6), (1, 1, 6)), ((3, -1, 2), (2, 1, 3)), ((6, 7, 3), (2, 1, 3))])
def test_reduce_form_examples(raw, reduced):
    assert reduce_form(QuadForm(*raw)) == QuadForm(*reduced)


def test_compose_table_minus_23():
    assert compose(QuadForm(2, 1, 3), QuadForm(2, -1, 3)) == QuadForm(1, 1, 6)
    assert compose(QuadForm(2, 1, 3), QuadForm(2, 1, 3)) == QuadForm(2, -1, 3)


def test_reduce_form_is_idempotent():
    f = reduce_form(QuadForm(6, 5, 2))
    assert f.is_reduced
    assert reduce_form(f) == f
    assert f.disc == 25 - 48


def test_reduce_form_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        reduce_form(QuadForm(1, 5, 1))


def test_compose_rejects_mixed_discriminants():
    with pytest.raises(DiscriminantMismatch):
        compose(principal_form(-23), principal_form(-47))


def _form_triples():
    return st.sampled_from(DISCS).flatmap(
        lambda d: st.tuples(*(st.sampled_from(enumerate_class_group(d)) for _ in range(3)))
    )


@settings(max_examples=60, deadline=None)
@given(_form_triples())
def test_group_axioms(triple):
    f, g, k = triple
    identity = principal_form(f.disc)
    assert compose(f, identity) == f
    assert compose(f, inverse_form(f)) == identity
    assert compose(f, g) == compose(g, f)
    assert compose(compose(f, g), k) == compose(f, compose(g, k))
    assert compose(f, g).is_reduced


# |Δ| ≤ 10⁴ から等間隔に 50 個
SWEEP_DISCS = [d for d in range(-10000, -2) if d % 4 in (0, 1)][::100]


@pytest.mark.parametrize("disc", SWEEP_DISCS)
def test_group_axioms_on_random_triples(disc):
    forms = enumerate_class_group(disc)
    identity = principal_form(disc)
    rng = random.Random(disc)
    for _ in range(200):
        f, g, k = (rng.choice(forms) for _ in range(3))
        assert compose(f, identity) == f
        assert compose(f, inverse_form(f)) == identity
        assert compose(f, g) == compose(g, f)
        assert compose(compose(f, g), k) == compose(f, compose(g, k))


@pytest.mark.parametrize("disc", DISCS)
def test_order_divides_class_number(disc):
    h = class_number(disc)
    for f in enumerate_class_group(disc):
        assert h % form_order(f) == 0
        assert form_power(f, h) == principal_form(disc)


def test_form_power_negative_exponent():
    f = QuadForm(2, 1, 3)
    assert form_power(f, -1) == inverse_form(f)


def test_prime_form():
    assert prime_form(-23, 2) == QuadForm(2, 1, 3)
    # [2,2,1] は分岐類で主類に簡約される
    assert prime_form(-4, 2) == QuadForm(1, 0, 1)
    # (−23/5) = −1 で 5 は惰性
    assert prime_form(-23, 5) is None


def test_prime_form_rejects_composite():
    with pytest.raises(ValueError):
        prime_form(-23, 4)


@pytest.mark.parametrize("disc", [-23, -47, -71, -199])
def test_factor_class_reaches_every_class(disc):
    base = [2, 3, 5, 7, 11, 13]
    for f in enumerate_class_group(disc):
        word = factor_class(f, base)
        assert len(word) <= word_bound(class_number(disc))
        acc = principal_form(disc)
        for step in word:
            acc = compose(acc, step)
        assert acc == f


def test_factor_class_words_over_single_prime():
    assert factor_class(QuadForm(2, 1, 3), [2]) == [QuadForm(2, 1, 3)]
    assert factor_class(QuadForm(2, -1, 3), [2]) == [QuadForm(2, 1, 3), QuadForm(2, 1, 3)]


def test_factor_class_identity_is_empty_word():
    assert factor_class(principal_form(-71), [2, 3]) == []


def test_factor_class_insufficient_base():
    # Δ=−23 で 5 は惰性、素形式が得られない
    with pytest.raises(FactorBaseInsufficient):
        factor_class(QuadForm(2, 1, 3), [5])


def test_cm_point_of_gaussian_form():
    p = cm_point(QuadForm(1, 0, 1))
    tau = p.tau(80)
    assert abs(tau - 1j) < mpmath.mpf(2) ** -70


def test_j_invariant_at_i():
    with mpmath.workprec(120):
        j = j_invariant(cm_point(QuadForm(1, 0, 1)).tau(120))
        assert abs(j - 1728) < mpmath.mpf(10) ** -20


@pytest.mark.parametrize(
    "disc,expected",
    [
        (-3, [0, 1]),
        (-4, [-1728, 1]),
        (-7, [3375, 1]),
        (-15, [-121287375, 191025, 1]),
        (-23, [12771880859375, -5151296875, 3491750, 1]),
    ],
)
def test_hilbert_class_poly(disc, expected):
    assert hilbert_class_poly_auto(disc) == expected


def test_hilbert_class_poly_is_monic_with_class_number_degree():
    coeffs = hilbert_class_poly_auto(-47)
    assert coeffs[-1] == 1
    assert len(coeffs) == class_number(-47) + 1


def test_hilbert_class_poly_bound():
    with pytest.raises(InvalidDiscriminant):
        hilbert_class_poly(-4003, 256, max_abs_disc=4000)


@pytest.mark.parametrize("disc", DISCS)
def test_hilbert_class_poly_is_squarefree(disc):
    x = Symbol("x")
    poly = Poly(list(reversed(hilbert_class_poly_auto(disc))), x)
    assert poly.degree() == class_number(disc)
    assert discriminant(poly) != 0


@pytest.mark.parametrize("xyz", [(12, 18, 8), (7, -3, 5), (0, 9, -6), (4, 6, 0), (-15, 10, -21)])
def test_bezout3_identity(xyz):
    x, y, z = xyz
    g, u, v, w = _bezout3(x, y, z)
    assert g == math.gcd(x, y, z)
    assert u * x + v * y + w * z == g
