"""固有形式と j の q 展開、微小 Coleman 積分、Hecke 対称化、切り捨て周期写像 Π_m。

Π_m の規範的な実現は有理固有射影を ℓ^m で簡約したもの（``period_vector_rational``）で、
微小積分エンジンはその検算と局所計算の実演として使う。
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from sympy import divisor_sigma, factorint, primerange
from sympy.polys.domains import QQ
from sympy.polys.ring_series import rs_mul, rs_pow, rs_series_inversion
from sympy.polys.rings import ring

from errors import DenominatorNotUnit, MissingEigenvalue, NonUnitNormalizer, OutOfDisc
from linalg import mat_vec_mod, valuation
from modsym import EigenData, HomologyClass, ManinBasis
from padic import (
    PadicSeries,
    TruncatedPadic,
    compose,
    derivative,
    evaluate,
    formal_integrate,
    guard_digits,
    multiply,
    reverse,
)

# --- q-expansions -----------------------------------------------------------


@dataclass(frozen=True)
class QExpansion:
    """q 展開。``coefficients[k]`` は q^(k + offset) の係数。"""

    coefficients: tuple[Fraction, ...]
    kind: str
    offset: int = 0

    def coeff(self, n: int) -> Fraction:
        k = n - self.offset
        if k < 0 or k >= len(self.coefficients):
            raise IndexError(f"q^{n} is outside the computed range")
        return self.coefficients[k]

    @property
    def terms(self) -> int:
        return len(self.coefficients) + self.offset - 1


def qexp_from_eigenvalues(level: int, eigenvalues: dict[int, int], terms: int) -> QExpansion:
    """素数での固有値から乗法性と Hecke 漸化式で a₁..a_T を作る。"""
    missing = [q for q in primerange(2, terms + 1) if q not in eigenvalues]
    if missing:
        raise MissingEigenvalue(f"eigenvalues missing for primes {missing}")
    prime_powers: dict[tuple[int, int], int] = {}

    def a_prime_power(q: int, k: int) -> int:
        if k == 0:
            return 1
        if k == 1:
            return eigenvalues[q]
        key = (q, k)
        if key not in prime_powers:
            if level % q == 0:
                prime_powers[key] = eigenvalues[q] ** k
            else:
                prime_powers[key] = eigenvalues[q] * a_prime_power(q, k - 1) - q * a_prime_power(q, k - 2)
        return prime_powers[key]

    coeffs = [Fraction(0)] * (terms + 1)
    for n in range(1, terms + 1):
        coeffs[n] = Fraction(math.prod(a_prime_power(q, k) for q, k in factorint(n).items()))
    return QExpansion(tuple(coeffs), kind="eigenform")


def eigenform_qexp(f: EigenData, terms: int) -> QExpansion:
    """新形式の q 展開 Σ aₙqⁿ（a₀ = 0、a₁ = 1）。"""
    return qexp_from_eigenvalues(f.level, f.eigenvalues, terms)


def j_qexp(terms: int) -> QExpansion:
    """j = 1/q + 744 + 196884q + … の最初の terms 個の係数（q^{−1} から）。

    q·j = E₄³ / ∏(1 − qⁿ)^24 を有理係数の冪級数環で計算する。
    """
    if terms < 2:
        raise ValueError("j expansion needs at least two terms")
    _, q = ring("q", QQ)
    prec = terms
    e4 = 1 + sum(240 * int(divisor_sigma(n, 3)) * q**n for n in range(1, prec))
    eta = q**0
    for n in range(1, prec):
        eta = rs_mul(eta, 1 - q**n, q, prec)
    qj = rs_mul(rs_pow(e4, 3, q, prec), rs_series_inversion(rs_pow(eta, 24, q, prec), q, prec), q, prec)
    raw = dict(qj)
    coeffs = []
    for k in range(prec):
        value = QQ.to_sympy(raw.get((k,), QQ.zero))
        coeffs.append(Fraction(int(value.p), int(value.q)))
    return QExpansion(tuple(coeffs), kind="j", offset=-1)


# --- local expansions and tiny integrals ------------------------------------


@dataclass(frozen=True)
class LocalExpansion:
    """円板上の局所パラメータ t に関する微分形式 ω = (Σ cₙtⁿ) dt。

    j 展開では t = q_P·(j − j(P)) と q_P で正規化したパラメータを使う
    （線形項が単数になる）。``scale`` はその係数で、カスプ展開では 1。
    """

    parameter_name: str
    base_value: TruncatedPadic
    series: PadicSeries
    scale: TruncatedPadic

    @property
    def prime(self) -> int:
        return self.series.prime


def _tail_bound(series_length: int, v: int, ell: int) -> int:
    """打ち切り後の項 Σ_{k>T} c t^k/k の付値の下界（係数は整と仮定）。"""
    return min(k * v - valuation(k, ell) for k in range(series_length + 1, 2 * series_length + 2))


def tiny_integral(exp: LocalExpansion, t_value: TruncatedPadic) -> TruncatedPadic:
    """同じ剰余円板内の微小積分 ∫₀^t ω = F(t)。

    Raises
    ------
    OutOfDisc
        t の付値が 1 未満。
    """
    if t_value.valuation < 1:
        raise OutOfDisc(f"parameter valuation {t_value.valuation} is outside the open unit disc")
    primitive = formal_integrate(exp.series)
    value = evaluate(primitive, t_value)
    return value.with_precision(_tail_bound(len(exp.series), t_value.valuation, exp.prime))


def parameter_at(exp: LocalExpansion, value: TruncatedPadic) -> TruncatedPadic:
    """目標点の座標（カスプなら q、j 展開なら j 値）から局所パラメータを求める。"""
    if exp.parameter_name == "q":
        return value
    return exp.scale * (value - exp.base_value)


def recenter(exp: LocalExpansion, t1: TruncatedPadic) -> LocalExpansion:
    """ω を t₁ を中心とするパラメータ s = t − t₁ で展開し直す。"""
    if t1.valuation < 1:
        raise OutOfDisc("recentering point must lie in the disc")
    coeffs = exp.series.coefficients
    length = len(coeffs)
    powers = [TruncatedPadic.from_int(exp.prime, 1, exp.series.working_precision)]
    for _ in range(1, length):
        powers.append(powers[-1] * t1)
    out = []
    for k in range(length):
        acc = TruncatedPadic.zero(exp.prime, exp.series.working_precision)
        for n in range(k, length):
            acc = acc + coeffs[n] * powers[n - k] * math.comb(n, k)
        out.append(acc.with_precision((length - k) * t1.valuation))
    return LocalExpansion(
        parameter_name=exp.parameter_name,
        base_value=exp.base_value,
        series=PadicSeries(tuple(out)),
        scale=exp.scale,
    )


def expansion_at_cusp(f: QExpansion, ell: int, m: int, terms: int, guard: int | None = None) -> LocalExpansion:
    """カスプ円板での ω_f = Σ aₙ q^{n−1} dq。"""
    if guard is None:
        guard = guard_digits(ell, terms)
    w = m + guard
    series = PadicSeries.from_rationals(ell, [f.coeff(n) for n in range(1, terms + 1)], w)
    return LocalExpansion(
        parameter_name="q",
        base_value=TruncatedPadic.zero(ell, w),
        series=series,
        scale=TruncatedPadic.from_int(ell, 1, w),
    )


def j_value(q_value: TruncatedPadic, jexp: QExpansion) -> TruncatedPadic:
    """付値正の q における j(q) = 1/q + Σ c_k q^k。"""
    if q_value.valuation < 1:
        raise OutOfDisc("j is evaluated only inside the cusp disc")
    total = 1 / q_value
    power: TruncatedPadic | None = None
    for n in range(0, jexp.terms + 1):
        c = jexp.coeff(n)
        if n > 0:
            power = q_value if power is None else power * q_value
            total = total + power * c
        else:
            total = total + c
    return total.with_precision((jexp.terms + 1) * q_value.valuation)


def expansion_in_j(
    f: QExpansion,
    jP: TruncatedPadic,
    qP: TruncatedPadic,
    ell: int,
    m: int,
    terms: int,
    guard: int | None = None,
) -> LocalExpansion:
    """点 P（q 座標 q_P）のまわりで ω_f を j のパラメータで展開する。

    q = q_P(1 + u) と置くと q_P·(j(q) − j(P)) は u の冪級数で線形項が単数になる。
    これを反転して u を t の級数とし、ω_f = Σ aₙ q_Pⁿ (1 + u)^{n−1} du に代入する。

    Raises
    ------
    OutOfDisc
        q_P がカスプ円板にない。
    NonUnitLinearTerm
        作業精度で dj/dq が退化している。
    """
    if qP.valuation < 1:
        raise OutOfDisc("base point must have a q-coordinate of positive valuation")
    if guard is None:
        guard = guard_digits(ell, terms)
    w = m + guard
    qP = qP.with_precision(w)
    vq = qP.valuation
    inner = -(-w // vq) + 1
    jexp = j_qexp(inner + 2)
    if not j_value(qP, jexp).agrees(jP):
        raise ValueError("jP does not match j(qP) at the working precision")

    zero = TruncatedPadic.zero(ell, w)
    f_terms = min(f.terms, inner + terms)
    q_powers = [TruncatedPadic.from_int(ell, 1, w)]
    for _ in range(max(inner + 1, f_terms)):
        q_powers.append(q_powers[-1] * qP)

    j_coeffs = [zero]
    for k in range(1, terms):
        acc = TruncatedPadic.from_int(ell, (-1) ** k, w)
        for n in range(max(k, 1), inner):
            acc = acc + q_powers[n + 1] * (jexp.coeff(n) * math.comb(n, k))
        j_coeffs.append(acc)
    j_series = PadicSeries(tuple(j_coeffs))

    omega_u = []
    for k in range(terms):
        acc = zero
        for n in range(k + 1, f_terms + 1):
            acc = acc + q_powers[n] * (f.coeff(n) * math.comb(n - 1, k))
        omega_u.append(acc.with_precision((f_terms + 1) * vq))
    omega_series = PadicSeries(tuple(omega_u))

    u_of_t = reverse(j_series)
    series = multiply(compose(omega_series, u_of_t), derivative(u_of_t))
    return LocalExpansion(parameter_name="j-minus-jP", base_value=jP, series=series, scale=qP)


def hecke_symmetrize(pairs: Sequence[tuple[TruncatedPadic, TruncatedPadic]], a_ell: int, ell: int) -> TruncatedPadic:
    """(ℓ + 1 − a_ℓ)⁻¹ · Σ (rightᵢ − leftᵢ)。

    Parameters
    ----------
    pairs : Sequence[tuple[TruncatedPadic, TruncatedPadic]]
        (∫_{Qᵢ}^{Q} ω, ∫_{Pᵢ}^{P} ω) の組。
    a_ell : int
        Hecke 固有値 a_ℓ。
    ell : int
        素数 ℓ。
    """
    normalizer = ell + 1 - a_ell
    if normalizer % ell == 0:
        raise NonUnitNormalizer(f"ℓ + 1 − a_ℓ = {normalizer} is not a unit mod {ell}")
    if not pairs:
        raise ValueError("no correspondence pairs given")
    total = pairs[0][0] - pairs[0][1]
    for right, left in pairs[1:]:
        total = total + (right - left)
    return total / normalizer


# --- the period map Π_m -----------------------------------------------------


FormId = tuple[int, int, int]


@dataclass(frozen=True)
class PeriodVector:
    """(Z/ℓ^m)^d の元と、その座標ラベル (level, newform, sign)。"""

    entries: tuple[TruncatedPadic, ...]
    form_ids: tuple[FormId, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != len(self.form_ids):
            raise ValueError("entries and form labels differ in length")
        if len({(e.prime, e.precision) for e in self.entries}) > 1:
            raise ValueError("period vector entries must share ℓ and m")

    @property
    def prime(self) -> int:
        return self.entries[0].prime

    @property
    def precision(self) -> int:
        return self.entries[0].precision

    @property
    def modulus(self) -> int:
        return self.prime**self.precision

    def residues(self) -> tuple[int, ...]:
        return tuple(e.residue for e in self.entries)

    @classmethod
    def from_residues(cls, ell: int, m: int, residues: Sequence[int], form_ids: Sequence[FormId]) -> PeriodVector:
        return cls(tuple(TruncatedPadic.from_int(ell, r, m) for r in residues), tuple(form_ids))

    def __add__(self, other: PeriodVector) -> PeriodVector:
        return PeriodVector(tuple(a + b for a, b in zip(self.entries, other.entries, strict=True)), self.form_ids)

    def __sub__(self, other: PeriodVector) -> PeriodVector:
        return PeriodVector(tuple(a - b for a, b in zip(self.entries, other.entries, strict=True)), self.form_ids)

    def scale(self, k: int) -> PeriodVector:
        mod = self.modulus
        scaled = [k * r % mod for r in self.residues()]
        return PeriodVector.from_residues(self.prime, self.precision, scaled, self.form_ids)

    def to_json(self) -> dict:
        return {
            "l": self.prime,
            "m": self.precision,
            "entries": [str(r) for r in self.residues()],
            "forms": [list(f) for f in self.form_ids],
        }

    @classmethod
    def from_json(cls, data: dict) -> PeriodVector:
        forms = [tuple(int(x) for x in f) for f in data["forms"]]
        return cls.from_residues(int(data["l"]), int(data["m"]), [int(e) for e in data["entries"]], forms)


def _form_ids(eigendata: Sequence[EigenData], plus_only: bool) -> list[tuple[EigenData, int]]:
    signs = (1,) if plus_only else (1, -1)
    return [(f, s) for f in eigendata for s in signs]


def _check_denominators(eigendata: Sequence[EigenData], ell: int) -> None:
    for f in eigendata:
        for w in (*f.dual_plus, *f.dual_minus):
            if w.denominator % ell == 0:
                raise DenominatorNotUnit(
                    f"dual functional of newform {f.newform_id} at level {f.level} has denominator divisible by {ell}"
                )


def period_vector_rational(
    gamma: HomologyClass, eigendata: Sequence[EigenData], ell: int, m: int, plus_only: bool = False
) -> PeriodVector:
    """Π_m(γ) = (λ_{f,ε}(γ) mod ℓ^m)_{f,ε}。"""
    _check_denominators(eigendata, ell)
    labels = _form_ids(eigendata, plus_only)
    entries = tuple(TruncatedPadic.from_rational(ell, f.functional(gamma, s), m) for f, s in labels)
    return PeriodVector(entries, tuple((f.level, f.newform_id, s) for f, s in labels))


@dataclass(frozen=True)
class PeriodMatrix:
    """Π_m を表す d × r 行列 A ∈ M_{d×r}(Z/ℓ^m)。"""

    ell: int
    m: int
    rows: tuple[tuple[int, ...], ...]
    form_ids: tuple[FormId, ...]
    ncols: int

    @property
    def modulus(self) -> int:
        return self.ell**self.m

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def apply(self, coords: Sequence[int]) -> tuple[int, ...]:
        if len(coords) != self.ncols:
            raise ValueError(f"expected {self.ncols} coordinates, got {len(coords)}")
        return mat_vec_mod(self.rows, coords, self.modulus)

    def vector(self, coords: Sequence[int]) -> PeriodVector:
        return PeriodVector.from_residues(self.ell, self.m, self.apply(coords), self.form_ids)

    def generator_matrix(self, columns: Sequence[Sequence[int]]) -> PeriodMatrix:
        """新しい列を A·cⱼ とする行列（生成元空間への引き戻し）。"""
        images = [self.apply(c) for c in columns]
        rows = tuple(tuple(img[i] for img in images) for i in range(self.nrows))
        return PeriodMatrix(self.ell, self.m, rows, self.form_ids, len(columns))

    @classmethod
    def synthetic(cls, nrows: int, ncols: int, ell: int, m: int, seed: int | bytes | str) -> PeriodMatrix:
        """モジュラー周期写像がない実験用の一様乱数行列。"""
        rng = random.Random(seed)
        mod = ell**m
        rows = tuple(tuple(rng.randrange(mod) for _ in range(ncols)) for _ in range(nrows))
        return cls(ell, m, rows, tuple((0, i, 1) for i in range(nrows)), ncols)

    def to_json(self) -> dict:
        return {
            "l": self.ell,
            "m": self.m,
            "rows": self.nrows,
            "cols": self.ncols,
            "data": [str(x) for row in self.rows for x in row],
            "forms": [list(f) for f in self.form_ids],
        }

    @classmethod
    def from_json(cls, data: dict) -> PeriodMatrix:
        nrows, ncols = int(data["rows"]), int(data["cols"])
        flat = [int(x) for x in data["data"]]
        rows = tuple(tuple(flat[i * ncols : (i + 1) * ncols]) for i in range(nrows))
        forms = tuple(tuple(int(x) for x in f) for f in data["forms"])
        return cls(int(data["l"]), int(data["m"]), rows, forms, ncols)


def period_matrix(
    basis: ManinBasis, eigendata: Sequence[EigenData], ell: int, m: int, plus_only: bool = False
) -> PeriodMatrix:
    """A·coords(γ) ≡ Π_m(γ) を満たす行列。"""
    _check_denominators(eigendata, ell)
    mod = ell**m
    labels = _form_ids(eigendata, plus_only)
    rows = []
    for f, s in labels:
        rows.append(tuple(w.numerator * pow(w.denominator, -1, mod) % mod for w in f.dual(s)))
    return PeriodMatrix(ell, m, tuple(rows), tuple((f.level, f.newform_id, s) for f, s in labels), basis.rank)
