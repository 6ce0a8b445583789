import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import SingularRoot
from fields import Fp2, GaloisRing, hensel_lift, poly_divmod, poly_from_ints, poly_gcd, poly_mul, poly_roots

FIELDS = {p: Fp2(p) for p in (7, 11, 13, 101)}


@st.composite
def elements(draw, nonzero=False):
    p = draw(st.sampled_from(sorted(FIELDS)))
    fld = FIELDS[p]
    a = draw(st.integers(0, p - 1))
    b = draw(st.integers(0, p - 1))
    if nonzero and a == 0 and b == 0:
        a = 1
    return fld(a, b)


def test_nonresidue_is_smallest():
    assert Fp2(7).nonresidue == 3
    assert Fp2(11).nonresidue == 2
    assert Fp2(13).nonresidue == 2


def test_field_needs_odd_characteristic():
    with pytest.raises(ValueError):
        Fp2(2)


def test_elements_count():
    assert len(list(Fp2(7).elements())) == 49


@settings(max_examples=100, deadline=None)
@given(elements(), st.data())
def test_field_axioms(x, data):
    fld = x.field
    y = fld(*data.draw(st.tuples(st.integers(0, fld.p - 1), st.integers(0, fld.p - 1))))
    z = fld(*data.draw(st.tuples(st.integers(0, fld.p - 1), st.integers(0, fld.p - 1))))
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == fld.zero
    assert (x * y).norm() == x.norm() * y.norm() % fld.p


@settings(max_examples=100, deadline=None)
@given(elements(nonzero=True))
def test_inverse(x):
    assert x * x.inv() == x.field.one
    assert x / x == x.field.one


@settings(max_examples=50, deadline=None)
@given(elements())
def test_frobenius_is_conjugation(x):
    assert x ** x.field.p == x.conj()


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        Fp2(7).zero.inv()


def test_str_and_json():
    fld = Fp2(13)
    assert str(fld(5)) == "5"
    assert str(fld(3, 4)) == "3+4i"
    assert fld(3, 4).to_json() == [3, 4]


def test_poly_divmod():
    fld = Fp2(11)
    f = poly_from_ints([1, 0, 0, 1], fld)
    g = poly_from_ints([1, 1], fld)
    q, r = poly_divmod(f, g)
    assert r == []
    assert poly_mul(q, g) == f


def test_poly_gcd_is_monic():
    fld = Fp2(13)
    f = poly_mul(poly_from_ints([-2, 1], fld), poly_from_ints([-3, 1], fld))
    g = poly_mul(poly_from_ints([-2, 1], fld), poly_from_ints([-5, 1], fld))
    assert poly_gcd(f, g) == poly_from_ints([-2, 1], fld)


def test_poly_roots_with_multiplicity():
    fld = Fp2(13)
    f = poly_mul(poly_from_ints([-4, 1], fld), poly_mul(poly_from_ints([-2, 1], fld), poly_from_ints([-2, 1], fld)))
    assert poly_roots(f) == [(fld(2), 2), (fld(4), 1)]


def test_irreducible_quadratic_splits_in_extension():
    fld = Fp2(7)
    # Y² − 3 は F_7 上既約で、根は ±i
    roots = poly_roots(poly_from_ints([-3, 0, 1], fld))
    assert roots == [(fld(0, 1), 1), (fld(0, 6), 1)]


def test_poly_roots_of_constant():
    fld = Fp2(7)
    assert poly_roots(poly_from_ints([3], fld)) == []
    with pytest.raises(ValueError):
        poly_roots([])


@pytest.mark.parametrize(("coeffs", "root"), [([-2, 0, 1], (3, 0)), ([-5, 0, 1], (0, 2)), ([1, 1, 1], (2, 0))])
def test_hensel_lift_is_a_root_mod_p_power(coeffs, root):
    # p = 7: √2 ≡ 3、√5 = 2i（i² = 3）、1 + x + x² は 2 と 4 を根にもつ
    ring = GaloisRing(7, 20)
    r = hensel_lift(coeffs, Fp2(7)(*root), ring)
    assert r.reduce() == Fp2(7)(*root)
    value = sum((ring(c) * r**k for k, c in enumerate(coeffs)), ring.zero)
    assert not value
    assert r.a < ring.modulus and r.b < ring.modulus


def test_lift_arithmetic_matches_residue_field():
    ring = GaloisRing(11, 6)
    x, y = ring(123456, 7890), ring(42, 1001)
    assert (x * y).reduce() == x.reduce() * y.reduce()
    assert (x / y) * y == x
    assert (x - x) == ring.zero
    with pytest.raises(ZeroDivisionError):
        ring(11, 22).inv()


def test_hensel_lift_rejects_repeated_root():
    ring = GaloisRing(7, 8)
    with pytest.raises(SingularRoot):
        hensel_lift([1, -2, 1], Fp2(7)(1), ring)
    with pytest.raises(ValueError):
        hensel_lift([1, 0, 1], Fp2(7)(1), ring)
