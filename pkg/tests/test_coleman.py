from fractions import Fraction

import pytest

from coleman import (
    LocalExpansion,
    PeriodMatrix,
    PeriodVector,
    eigenform_qexp,
    expansion_at_cusp,
    expansion_in_j,
    hecke_symmetrize,
    j_qexp,
    j_value,
    parameter_at,
    period_matrix,
    period_vector_rational,
    qexp_from_eigenvalues,
    recenter,
    tiny_integral,
)
from errors import MissingEigenvalue, NonUnitNormalizer, OutOfDisc
from modsym import default_gamma0, hecke_apply, symbol_from_cusps
from padic import PadicSeries, TruncatedPadic

LEVEL_11_QEXP = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2]


def test_j_qexp_leading_coefficients():
    j = j_qexp(4)
    assert j.offset == -1
    assert [j.coeff(n) for n in (-1, 0, 1, 2)] == [1, 744, 196884, 21493760]


def test_qexp_coefficient_out_of_range():
    with pytest.raises(IndexError):
        j_qexp(3).coeff(5)


def test_level_11_qexp(eig11):
    f = eigenform_qexp(eig11[0], 10)
    assert [f.coeff(n) for n in range(1, 11)] == LEVEL_11_QEXP
    assert f.coeff(0) == 0


def test_qexp_prime_power_recurrence():
    assert qexp_from_eigenvalues(11, {2: -2, 3: -1, 5: 1, 7: -2}, 9).coeff(9) == -2
    # U_11 の冪は a_11^k
    f = qexp_from_eigenvalues(11, {2: -2, 3: -1, 5: 1, 7: -2, 11: 1, 13: 4}, 13)
    assert f.coeff(11) == 1


def test_qexp_missing_eigenvalue():
    with pytest.raises(MissingEigenvalue):
        qexp_from_eigenvalues(11, {2: -2}, 5)


def _cusp_expansion(eig11, ell=5, m=6, terms=20):
    f = eigenform_qexp(eig11[0], 30)
    return expansion_at_cusp(f, ell, m, terms)


def test_tiny_integral_at_cusp_matches_rational_sum(eig11):
    exp = _cusp_expansion(eig11)
    q = TruncatedPadic.from_int(5, 5, 8)
    value = tiny_integral(exp, q)
    exact = sum(Fraction(a * 5**n, n) for n, a in enumerate(LEVEL_11_QEXP, start=1))
    # 11 項目以降は 5^11/11 以下の寄与
    assert value.with_precision(6).contains(exact)


def test_tiny_integral_outside_disc(eig11):
    exp = _cusp_expansion(eig11)
    with pytest.raises(OutOfDisc):
        tiny_integral(exp, TruncatedPadic.from_int(5, 2, 8))


def test_recentered_integrals_add_up(eig11):
    exp = _cusp_expansion(eig11)
    q0 = TruncatedPadic.from_int(5, 5, 8)
    q1 = TruncatedPadic.from_int(5, 30, 8)
    direct = tiny_integral(exp, q1)
    moved = recenter(exp, q0)
    split = tiny_integral(exp, q0) + tiny_integral(moved, q1 - q0)
    assert direct.agrees(split)
    assert min(direct.precision, split.precision) >= 2


def test_integral_in_j_parameter_matches_cusp_parameter(eig11):
    f = eigenform_qexp(eig11[0], 30)
    jexp = j_qexp(30)
    qP = TruncatedPadic.from_int(5, 5, 8)
    qQ = TruncatedPadic.from_int(5, 30, 8)
    jP, jQ = j_value(qP, jexp), j_value(qQ, jexp)

    cusp = expansion_at_cusp(f, 5, 6, 20)
    via_q = tiny_integral(cusp, qQ) - tiny_integral(cusp, qP)

    local = expansion_in_j(f, jP, qP, 5, 6, 12)
    via_j = tiny_integral(local, parameter_at(local, jQ))
    assert via_q.agrees(via_j)
    assert min(via_q.precision, via_j.precision) >= 2


def test_expansion_in_j_rejects_inconsistent_point(eig11):
    f = eigenform_qexp(eig11[0], 30)
    qP = TruncatedPadic.from_int(5, 5, 8)
    wrong = TruncatedPadic.from_int(5, 1, 8)
    with pytest.raises(ValueError):
        expansion_in_j(f, wrong, qP, 5, 6, 8)


def test_parameter_at_cusp_is_identity(eig11):
    exp = _cusp_expansion(eig11)
    q = TruncatedPadic.from_int(5, 25, 8)
    assert parameter_at(exp, q) == q


def test_local_expansion_prime(eig11):
    exp = _cusp_expansion(eig11, ell=7)
    assert isinstance(exp, LocalExpansion)
    assert exp.prime == 7


def test_hecke_symmetrize():
    x = TruncatedPadic.from_int(3, 14, 6)
    y = TruncatedPadic.from_int(3, 4, 6)
    # ℓ + 1 − a_ℓ = 3 + 1 + 1 = 5
    result = hecke_symmetrize([(x, y)], -1, 3)
    assert result.contains(2)


def test_hecke_symmetrize_non_unit():
    x = TruncatedPadic.from_int(5, 1, 4)
    with pytest.raises(NonUnitNormalizer):
        hecke_symmetrize([(x, x)], 1, 5)


def test_hecke_symmetrize_empty():
    with pytest.raises(ValueError):
        hecke_symmetrize([], -2, 2)


def test_period_vector_is_additive(basis11, eig11):
    g1 = default_gamma0(basis11)
    g2 = symbol_from_cusps(0, Fraction(1, 3), basis11)
    lhs = period_vector_rational(g1 + g2, eig11, 3, 6)
    rhs = period_vector_rational(g1, eig11, 3, 6) + period_vector_rational(g2, eig11, 3, 6)
    assert lhs.residues() == rhs.residues()


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_period_vector_is_hecke_equivariant(basis11, eig11, n):
    gamma = symbol_from_cusps(0, Fraction(2, 7), basis11)
    lhs = period_vector_rational(hecke_apply(basis11, n, gamma), eig11, 3, 6)
    rhs = period_vector_rational(gamma, eig11, 3, 6).scale(eig11[0].eigenvalues[n])
    assert lhs.residues() == rhs.residues()


def test_period_matrix_matches_functionals(basis11, eig11, period11):
    assert period11.nrows == 2
    assert period11.ncols == basis11.rank
    for gamma in (default_gamma0(basis11), symbol_from_cusps(Fraction(1, 2), Fraction(3, 5), basis11)):
        expected = period_vector_rational(gamma, eig11, 3, 6)
        assert period11.vector(gamma.coords).residues() == expected.residues()


def test_period_matrix_plus_only(basis11, eig11):
    a = period_matrix(basis11, eig11, 3, 6, plus_only=True)
    assert a.nrows == 1
    assert a.form_ids == ((11, 0, 1),)


def test_period_matrix_apply_checks_width(period11):
    with pytest.raises(ValueError):
        period11.apply([1, 2])


def test_generator_matrix_columns(period11):
    cols = [(1, 0, 0), (1, 1, 0), (0, 0, 2)]
    g = period11.generator_matrix(cols)
    assert g.ncols == 3
    for k, c in enumerate(cols):
        assert tuple(row[k] for row in g.rows) == period11.apply(c)


def test_period_matrix_json(period11):
    assert PeriodMatrix.from_json(period11.to_json()) == period11


def test_synthetic_matrix_is_seeded():
    a = PeriodMatrix.synthetic(4, 6, 3, 5, seed="x")
    assert a == PeriodMatrix.synthetic(4, 6, 3, 5, seed="x")
    assert all(0 <= x < 3**5 for row in a.rows for x in row)


def test_period_vector_rejects_mixed_precision():
    with pytest.raises(ValueError):
        PeriodVector(
            (TruncatedPadic.from_int(3, 1, 4), TruncatedPadic.from_int(3, 1, 5)),
            ((11, 0, 1), (11, 0, -1)),
        )


def test_period_vector_json():
    v = PeriodVector.from_residues(3, 6, [5, 700], [(11, 0, 1), (11, 0, -1)])
    back = PeriodVector.from_json(v.to_json())
    assert back.residues() == (5, 700)
    assert back.form_ids == v.form_ids


def test_padic_series_helper_for_local_expansion():
    s = PadicSeries.from_rationals(3, [1, 0, 1], 5)
    exp = LocalExpansion("q", TruncatedPadic.zero(3, 5), s, TruncatedPadic.from_int(3, 1, 5))
    # ∫₀^t (1 + t²) dt = t + t³/3
    assert tiny_integral(exp, TruncatedPadic.from_int(3, 3, 5)).contains(3 + 9)
