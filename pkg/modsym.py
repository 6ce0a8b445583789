"""Manin 記号による H₁(X₀(N), cusps; Z) の表示、境界写像、Hecke 作用素、固有分解。

類群の表現（構成 1, 2）もここで扱う。
"""

from __future__ import annotations

import math
import random
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import (
    ImmutableMatrix,
    Matrix,
    Poly,
    Rational,
    eye,
    factor_list,
    factorint,
    primerange,
    symbols,
    totient,
)
from sympy.core.intfunc import igcdex
from sympy.ntheory.continued_fraction import continued_fraction_iterator

from errors import DiscriminantLevelClash, DiscriminantMismatch, ParameterError, UnsupportedHeckeField
from linalg import integer_echelon, lattice_coordinates
from quadratic import CMPoint, QuadForm, enumerate_class_group, factor_class, prime_form

Cusp = Fraction | int | str
INFINITY = "oo"


# --- P¹(Z/N) ----------------------------------------------------------------


def p1_list(n: int) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
    """P¹(Z/N) の代表元と、(c, d) → 代表元番号の表（P¹ に属さない対は −1）。

    代表元は単数倍による軌道の辞書式最小元。
    """
    if n < 1:
        raise ParameterError(f"level must be positive, got {n}")
    units = [u for u in range(n) if math.gcd(u, n) == 1] or [0]
    rep_of: dict[tuple[int, int], tuple[int, int]] = {}
    for c in range(n):
        for d in range(n):
            if (c, d) in rep_of or math.gcd(math.gcd(c, d), n) != 1:
                continue
            orbit = {(u * c % n, u * d % n) for u in units}
            rep = min(orbit)
            for pair in orbit:
                rep_of[pair] = rep
    reps = tuple(sorted(set(rep_of.values())))
    position = {r: i for i, r in enumerate(reps)}
    table = [-1] * (n * n)
    for (c, d), rep in rep_of.items():
        table[c * n + d] = position[rep]
    return reps, tuple(table)


def _cusp_key(p: int, q: int, n: int) -> tuple[int, int]:
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q


def _cusp_s(p: int, q: int) -> int:
    if q == 0:
        return 1
    if q == 1:
        return 0
    return pow(p, -1, q)


def cusps_equivalent(x: tuple[int, int], y: tuple[int, int], n: int) -> bool:
    """Γ₀(N) 同値性: s₁q₂ ≡ s₂q₁ (mod gcd(q₁q₂, N))、ただし sᵢpᵢ ≡ 1 (mod qᵢ)。"""
    p1, q1 = x
    p2, q2 = y
    modulus = math.gcd(q1 * q2, n)
    return (_cusp_s(p1, q1) * q2 - _cusp_s(p2, q2) * q1) % modulus == 0


def cusp_list(n: int) -> tuple[tuple[int, int], ...]:
    """カスプ類の代表元 (p, q)。先頭は ∞ = (1, 0)、次は 0 = (0, 1)。"""
    reps: list[tuple[int, int]] = [(1, 0)]
    for d in range(1, n + 1):
        if n % d:
            continue
        for a in range(d):
            if math.gcd(a, d) != 1:
                continue
            cand = (a, d)
            if not any(cusps_equivalent(cand, r, n) for r in reps):
                reps.append(cand)
    return tuple(reps)


def genus_oracle(n: int) -> tuple[int, int]:
    """古典公式による X₀(N) の種数とカスプ数。"""
    primes = list(factorint(n))
    mu = Fraction(n)
    for p in primes:
        mu *= Fraction(p + 1, p)

    def kron_m1(p: int) -> int:
        return 0 if p == 2 else (1 if p % 4 == 1 else -1)

    def kron_m3(p: int) -> int:
        return 0 if p == 3 else (1 if p % 3 == 1 else -1)

    nu2 = 0 if n % 4 == 0 else math.prod(1 + kron_m1(p) for p in primes)
    nu3 = 0 if n % 9 == 0 else math.prod(1 + kron_m3(p) for p in primes)
    cusps = sum(int(totient(math.gcd(d, n // d))) for d in range(1, n + 1) if n % d == 0)
    genus = 1 + mu / 12 - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    return int(genus), cusps


# --- basis ------------------------------------------------------------------


@dataclass(frozen=True)
class ManinBasis:
    """Manin 記号の商加群の整数格基底。

    Attributes
    ----------
    level : int
        レベル N。
    symbols : tuple
        P¹(Z/N) の代表元。
    relation_matrix : tuple
        i 行目は記号 i の格子座標（2 項・3 項関係による商写像）。
    rank : int
        格子の階数 2g + c − 1。
    free_symbols : tuple
        自由生成元となる記号の番号。
    lattice : tuple
        格子基底を自由生成元座標で表したもの。
    cusps : tuple
        カスプ類の代表元。
    """

    level: int
    symbols: tuple[tuple[int, int], ...]
    relation_matrix: tuple[tuple[int, ...], ...]
    rank: int
    free_symbols: tuple[int, ...]
    lattice: tuple[tuple[Fraction, ...], ...]
    cusps: tuple[tuple[int, int], ...]
    table: tuple[int, ...] = field(repr=False)

    def index(self, c: int, d: int) -> int | None:
        n = self.level
        i = self.table[(c % n) * n + d % n]
        return None if i < 0 else i

    def symbol_coords(self, c: int, d: int) -> tuple[int, ...]:
        i = self.index(c, d)
        if i is None:
            raise ValueError(f"({c}:{d}) is not in P^1(Z/{self.level})")
        return self.relation_matrix[i]

    def zero(self) -> HomologyClass:
        return HomologyClass(self, (0,) * self.rank)

    def cusp_index(self, cusp: Cusp) -> int:
        p, q = _cusp_pair(cusp)
        key = _cusp_key(p, q, self.level)
        for i, rep in enumerate(self.cusps):
            if cusps_equivalent(key, rep, self.level):
                return i
        raise ValueError(f"cusp {cusp} matches no class")


def build_manin_basis(level: int) -> ManinBasis:
    """2 項・3 項 Manin 関係による商を計算し、整数格基底を選ぶ。

    2 項関係 x + xσ = 0 は符号付きの同一視で先に消去し、残りの 3 項関係を
    有理数上で行簡約して自由生成元を決める。最後に全記号の像が張る整数格の
    階段形基底をとり、各記号の座標を整数にする。
    """
    symbols_, table = p1_list(level)
    n = level

    def idx(c: int, d: int) -> int:
        return table[(c % n) * n + d % n]

    # 2 項関係: sign_rep[i] = (代表, 符号) または None（2x = 0 で消える）
    sign_rep: list[tuple[int, int] | None] = []
    for i, (c, d) in enumerate(symbols_):
        j = idx(d, -c)
        if j == i:
            sign_rep.append(None)
        elif i < j:
            sign_rep.append((i, 1))
        else:
            sign_rep.append((j, -1))
    reps = sorted({sr[0] for sr in sign_rep if sr is not None})
    col = {r: k for k, r in enumerate(reps)}

    rows = []
    seen_orbits = set()
    for i, (c, d) in enumerate(symbols_):
        orbit = (i, idx(d, -c - d), idx(-c - d, c))
        key = frozenset(orbit)
        if key in seen_orbits:
            continue
        seen_orbits.add(key)
        row = [0] * len(reps)
        for k in orbit:
            if sign_rep[k] is not None:
                r, s = sign_rep[k]
                row[col[r]] += s
        if any(row):
            rows.append(row)

    if rows and reps:
        rref, pivots = Matrix(rows).rref()
    else:
        rref, pivots = Matrix.zeros(0, len(reps)), ()
    free_cols = [k for k in range(len(reps)) if k not in pivots]
    free_pos = {k: f for f, k in enumerate(free_cols)}
    rank = len(free_cols)

    rep_images: list[list[Fraction]] = []
    for k in range(len(reps)):
        vec = [Fraction(0)] * rank
        if k in free_pos:
            vec[free_pos[k]] = Fraction(1)
        else:
            e = pivots.index(k)
            for f, kf in enumerate(free_cols):
                entry = rref[e, kf]
                vec[f] = -Fraction(int(entry.p), int(entry.q))
        rep_images.append(vec)

    images = []
    for sr in sign_rep:
        if sr is None:
            images.append([Fraction(0)] * rank)
        else:
            r, s = sr
            images.append([s * x for x in rep_images[col[r]]])

    denom = math.lcm(1, *(x.denominator for img in images for x in img))
    scaled = [[int(x * denom) for x in img] for img in images]
    echelon = integer_echelon(scaled)
    if len(echelon) != rank:
        raise ArithmeticError(f"lattice rank {len(echelon)} differs from quotient rank {rank}")
    relation = tuple(tuple(lattice_coordinates(echelon, row)) for row in scaled)
    lattice = tuple(tuple(Fraction(x, denom) for x in row) for row in echelon)

    return ManinBasis(
        level=level,
        symbols=symbols_,
        relation_matrix=relation,
        rank=rank,
        free_symbols=tuple(reps[k] for k in free_cols),
        lattice=lattice,
        cusps=cusp_list(level),
        table=table,
    )


# --- homology classes -------------------------------------------------------


@dataclass(frozen=True)
class HomologyClass:
    """Manin 基底に関する整数座標ベクトル。"""

    basis: ManinBasis = field(compare=False, repr=False)
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.basis.rank:
            raise ValueError(f"expected {self.basis.rank} coordinates, got {len(self.coords)}")

    @property
    def level(self) -> int:
        return self.basis.level

    def __add__(self, other: HomologyClass) -> HomologyClass:
        return HomologyClass(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords, strict=True)))

    def __sub__(self, other: HomologyClass) -> HomologyClass:
        return HomologyClass(self.basis, tuple(a - b for a, b in zip(self.coords, other.coords, strict=True)))

    def __neg__(self) -> HomologyClass:
        return HomologyClass(self.basis, tuple(-a for a in self.coords))

    def __mul__(self, k: int) -> HomologyClass:
        return HomologyClass(self.basis, tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_json(self) -> dict:
        return {"N": self.basis.level, "coords": list(self.coords)}

    @classmethod
    def from_json(cls, data: dict, basis: ManinBasis) -> HomologyClass:
        if int(data["N"]) != basis.level:
            raise ValueError(f"class of level {data['N']} does not belong to level {basis.level}")
        return cls(basis, tuple(int(x) for x in data["coords"]))


@dataclass(frozen=True)
class CuspDivisor:
    """カスプ類ごとの重複度。"""

    multiplicities: tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)


# --- operators --------------------------------------------------------------


def _operator_columns(basis: ManinBasis, image_of_symbol: Callable[[int, int], Sequence[int]]) -> list[list[int]]:
    """記号ごとの像から、格子基底への作用の列ベクトルを組み立てる。"""
    per_free = [image_of_symbol(*basis.symbols[i]) for i in basis.free_symbols]
    columns = []
    for vec in basis.lattice:
        acc = [Fraction(0)] * (len(per_free[0]) if per_free else 0)
        for coeff, img in zip(vec, per_free, strict=True):
            if coeff:
                for t, x in enumerate(img):
                    acc[t] += coeff * x
        if any(x.denominator != 1 for x in acc):
            raise ArithmeticError("operator image is not integral on the lattice basis")
        columns.append([int(x) for x in acc])
    return columns


def _columns_to_matrix(columns: list[list[int]], nrows: int) -> ImmutableMatrix:
    if not columns:
        return ImmutableMatrix.zeros(nrows, 0)
    return ImmutableMatrix(nrows, len(columns), lambda i, j: columns[j][i])


def _symbol_boundary(basis: ManinBasis, c: int, d: int) -> list[int]:
    """(c:d) を SL₂(Z) へ持ち上げ、[a/c] − [b/d] を返す。"""
    n = basis.level
    out = [0] * len(basis.cusps)
    c0 = c % n if c % n else n
    d0 = d % n
    while math.gcd(c0, d0) != 1:
        d0 += n
    x, y, _ = igcdex(d0, c0)
    a, b = int(x), -int(y)
    out[basis.cusp_index(Fraction(a, c0))] += 1
    out[basis.cusp_index(_fraction_or_inf(b, d0))] -= 1
    return out


def _fraction_or_inf(p: int, q: int) -> Cusp:
    return INFINITY if q == 0 else Fraction(p, q)


@lru_cache(maxsize=64)
def boundary_matrix(basis: ManinBasis) -> ImmutableMatrix:
    """c × rank の境界写像行列。"""
    return _columns_to_matrix(_operator_columns(basis, lambda c, d: _symbol_boundary(basis, c, d)), len(basis.cusps))


def boundary(gamma: HomologyClass) -> CuspDivisor:
    """境界 ∂γ ∈ Z[cusps]。"""
    basis = gamma.basis
    if basis.rank == 0:
        return CuspDivisor((0,) * len(basis.cusps))
    vec = boundary_matrix(basis) * Matrix(gamma.coords)
    return CuspDivisor(tuple(int(x) for x in vec))


@lru_cache(maxsize=64)
def star_matrix(basis: ManinBasis) -> ImmutableMatrix:
    """対合 (c:d) ↦ (−c:d)。"""
    return _columns_to_matrix(_operator_columns(basis, lambda c, d: basis.symbol_coords(-c, d)), basis.rank)


def heilbronn_merel(n: int) -> list[tuple[int, int, int, int]]:
    """行列式 n、a > b ≥ 0、d > c ≥ 0 を満たす Merel の行列族 (a, b, c, d)。"""
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 1):
            bc = a * d - n
            if bc < 0:
                continue
            if bc == 0:
                out.extend((a, 0, c, d) for c in range(d))
                out.extend((a, b, 0, d) for b in range(1, a))
                continue
            for b in range(1, a):
                if bc % b == 0 and bc // b < d:
                    out.append((a, b, bc // b, d))
    return out


def hecke_matrix_merel(basis: ManinBasis, n: int) -> ImmutableMatrix:
    """Merel の公式で T_n を直接計算する（合成数 n の検算用にも使う）。"""
    hs = heilbronn_merel(n)

    def image(c: int, d: int) -> list[int]:
        acc = [0] * basis.rank
        for p, q, r, s in hs:
            i = basis.index(c * p + d * r, c * q + d * s)
            if i is not None:
                for t, x in enumerate(basis.relation_matrix[i]):
                    acc[t] += x
        return acc

    return _columns_to_matrix(_operator_columns(basis, image), basis.rank)


@lru_cache(maxsize=512)
def hecke_matrix(basis: ManinBasis, n: int) -> ImmutableMatrix:
    """Hecke 作用素 T_n（q | N なら U_q）の行列。

    素数では Merel の公式、合成数では乗法性と
    T_{q^{k+1}} = T_q T_{q^k} − q T_{q^{k−1}}（q ∤ N）、U_q^k（q | N）で組み立てる。
    """
    if n < 1:
        raise ValueError(f"Hecke index must be positive, got {n}")
    if n == 1:
        return ImmutableMatrix.eye(basis.rank)
    factors = factorint(n)
    if len(factors) == 1:
        (q, k), = factors.items()
        if k == 1:
            return hecke_matrix_merel(basis, q)
        tq = hecke_matrix(basis, q)
        if basis.level % q == 0:
            return ImmutableMatrix(tq ** k)
        return ImmutableMatrix(tq * hecke_matrix(basis, q ** (k - 1)) - q * hecke_matrix(basis, q ** (k - 2)))
    result = ImmutableMatrix.eye(basis.rank)
    for q, k in factors.items():
        result = ImmutableMatrix(result * hecke_matrix(basis, q**k))
    return result


def hecke_apply(basis: ManinBasis, n: int, gamma: HomologyClass) -> HomologyClass:
    if basis.rank == 0:
        return gamma
    vec = hecke_matrix(basis, n) * Matrix(gamma.coords)
    return HomologyClass(basis, tuple(int(x) for x in vec))


# --- modular symbols {r → s} -------------------------------------------------


def _cusp_pair(cusp: Cusp) -> tuple[int, int]:
    if isinstance(cusp, str):
        if cusp in ("oo", "inf", "∞"):
            return 1, 0
        cusp = Fraction(cusp)
    x = Fraction(cusp)
    return x.numerator, x.denominator


def _convergents(p: int, q: int) -> list[tuple[int, int]]:
    """p/q の連分数の収束分数 (p_k, q_k)、k = −2, −1, 0, …。"""
    out = [(0, 1), (1, 0)]
    for a in continued_fraction_iterator(Rational(p, q)):
        a = int(a)
        out.append((a * out[-1][0] + out[-2][0], a * out[-1][1] + out[-2][1]))
    return out


def _zero_to(basis: ManinBasis, cusp: Cusp) -> list[int]:
    """{0 → cusp} の座標（Manin の連分数法）。"""
    p, q = _cusp_pair(cusp)
    coords = list(basis.symbol_coords(0, 1))
    if q == 0:
        return coords
    conv = _convergents(p, q)
    for k in range(len(conv) - 2):
        pk, qk = conv[k + 2]
        _, q_prev = conv[k + 1]
        sign = -1 if k % 2 == 0 else 1
        for t, x in enumerate(basis.symbol_coords(sign * qk, q_prev)):
            coords[t] += x
    return coords


def symbol_from_cusps(r: Cusp, s: Cusp, basis: ManinBasis) -> HomologyClass:
    """モジュラー記号 {r → s} = {0 → s} − {0 → r}。"""
    if basis.rank == 0:
        return basis.zero()
    if _cusp_pair(r) == _cusp_pair(s):
        return basis.zero()
    a = _zero_to(basis, s)
    b = _zero_to(basis, r)
    return HomologyClass(basis, tuple(x - y for x, y in zip(a, b, strict=True)))


def manin_symbol_class(basis: ManinBasis, c: int, d: int) -> HomologyClass:
    return HomologyClass(basis, basis.symbol_coords(c, d))


# --- eigen decomposition ----------------------------------------------------


@dataclass(frozen=True)
class EigenData:
    """有理新形式の固有値系、± 生成元、双対汎関数。"""

    level: int
    newform_id: int
    eigenvalues: dict[int, int] = field(hash=False)
    plus_generator: HomologyClass
    minus_generator: HomologyClass
    dual_plus: tuple[Fraction, ...]
    dual_minus: tuple[Fraction, ...]

    def generator(self, sign: int) -> HomologyClass:
        return self.plus_generator if sign > 0 else self.minus_generator

    def dual(self, sign: int) -> tuple[Fraction, ...]:
        return self.dual_plus if sign > 0 else self.dual_minus

    def functional(self, gamma: HomologyClass, sign: int) -> Fraction:
        """λ_{f,±}(γ)。"""
        return sum((w * x for w, x in zip(self.dual(sign), gamma.coords, strict=True)), Fraction(0))


def _to_fraction(x) -> Fraction:
    x = Rational(x)
    return Fraction(int(x.p), int(x.q))


def _primitive(vec: Matrix) -> tuple[int, ...]:
    fracs = [_to_fraction(x) for x in vec]
    denom = math.lcm(1, *(f.denominator for f in fracs))
    ints = [int(f * denom) for f in fracs]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def _restrict(op: Matrix, space: Matrix) -> Matrix:
    """不変部分空間 space（列基底）への op の制限。"""
    proj = (space.T * space).inv() * space.T
    return proj * op * space


def default_splitting_primes(level: int, bound: int = 13) -> list[int]:
    return [q for q in primerange(2, bound + 1) if level % q]


def cuspidal_basis(basis: ManinBasis) -> list[tuple[int, ...]]:
    """境界写像の核（階数 2g）の整数基底。"""
    if basis.rank == 0:
        return []
    return [_primitive(v) for v in Matrix(boundary_matrix(basis)).nullspace()]


def eigen_decompose(
    basis: ManinBasis, primes: Sequence[int] | None = None, eigen_bound: int = 30
) -> list[EigenData]:
    """カスプ部分空間を有理固有直線の系に分解し、新形式ごとの EigenData を返す。

    Parameters
    ----------
    basis : ManinBasis
        Manin 基底。
    primes : Sequence[int], optional
        分解に使う素数。省略時は N と素な 13 以下の素数。
    eigen_bound : int
        固有値を記録する素数の上限（q | N の U_q を含む）。

    Returns
    -------
    list[EigenData]
        分解素数上の固有値の組で整列した新形式。

    Raises
    ------
    UnsupportedHeckeField
        特性多項式に 2 次以上の既約因子が現れた。
    """
    if basis.rank == 0:
        return []
    cusp_vectors = Matrix(boundary_matrix(basis)).nullspace()
    if not cusp_vectors:
        return []
    if primes is None:
        primes = default_splitting_primes(basis.level)
    x = symbols("x")
    r = basis.rank

    systems: list[tuple[Matrix, dict[int, int]]] = [(Matrix.hstack(*cusp_vectors), {})]
    for q in primes:
        tq = Matrix(hecke_matrix(basis, q))
        refined = []
        for space, eig in systems:
            restricted = _restrict(tq, space)
            _, factors = factor_list(restricted.charpoly(x).as_expr(), x)
            for fac, mult in factors:
                poly = Poly(fac, x)
                if poly.degree() > 1:
                    raise UnsupportedHeckeField(f"T_{q} at level {basis.level} has irreducible factor {fac}")
                lead, const = poly.all_coeffs()
                a = -const / lead
                kernel = ((restricted - a * eye(space.cols)) ** mult).nullspace()
                refined.append((space * Matrix.hstack(*kernel), {**eig, q: int(a)}))
        systems = refined

    star = Matrix(star_matrix(basis))
    found = []
    for space, eig in systems:
        if space.cols != 2:
            print(
                f"[WARN] level {basis.level}: eigen-system {eig} has dimension {space.cols}, skipped",
                file=sys.stderr,
            )
            continue
        s_restricted = _restrict(star, space)
        plus = (s_restricted - eye(2)).nullspace()
        minus = (s_restricted + eye(2)).nullspace()
        if len(plus) != 1 or len(minus) != 1:
            print(f"[WARN] level {basis.level}: star does not split {eig}, skipped", file=sys.stderr)
            continue
        e_plus = _primitive(space * plus[0])
        e_minus = _primitive(space * minus[0])

        images = []
        for q, a in eig.items():
            shifted = Matrix(hecke_matrix(basis, q)) - a * eye(r)
            mult = _root_multiplicity(Matrix(hecke_matrix(basis, q)), a, x)
            images.extend((shifted**mult).columnspace())
        complement = Matrix.hstack(*images).columnspace() if images else []
        if len(complement) != r - 2:
            print(f"[WARN] level {basis.level}: complement of {eig} has rank {len(complement)}", file=sys.stderr)
            continue
        frame = Matrix.hstack(Matrix(e_plus), Matrix(e_minus), *complement)
        inv = frame.inv()
        found.append(
            (
                tuple(eig[q] for q in primes),
                eig,
                e_plus,
                e_minus,
                tuple(_to_fraction(v) for v in inv.row(0)),
                tuple(_to_fraction(v) for v in inv.row(1)),
            )
        )

    found.sort(key=lambda item: item[0])
    result = []
    for newform_id, (_, eig, e_plus, e_minus, dual_plus, dual_minus) in enumerate(found):
        plus_class = HomologyClass(basis, e_plus)
        eigenvalues = {}
        for q in primerange(2, eigen_bound + 1):
            image = hecke_apply(basis, q, plus_class).coords
            pivot = next(i for i, v in enumerate(e_plus) if v)
            eigenvalues[q] = image[pivot] // e_plus[pivot]
        eigenvalues.update(eig)
        result.append(
            EigenData(
                level=basis.level,
                newform_id=newform_id,
                eigenvalues=eigenvalues,
                plus_generator=plus_class,
                minus_generator=HomologyClass(basis, e_minus),
                dual_plus=dual_plus,
                dual_minus=dual_minus,
            )
        )
    return result


def _root_multiplicity(matrix: Matrix, a: int, x) -> int:
    poly = Poly(matrix.charpoly(x).as_expr(), x)
    mult = 0
    linear = Poly(x - a, x)
    while True:
        quotient, remainder = poly.div(linear)
        if not remainder.is_zero:
            return mult
        poly = quotient
        mult += 1


# --- class group representations --------------------------------------------


def prime_form_norms(disc: int, factor_base: Sequence[int]) -> dict[QuadForm, int]:
    """素形式からノルムへの対応（同じ類に複数の素数が落ちたら最初のもの）。"""
    norms: dict[QuadForm, int] = {}
    for q in factor_base:
        pf = prime_form(disc, q)
        if pf is None:
            continue
        norms.setdefault(pf, q)
    return norms


def construction1_class(
    cls: QuadForm,
    gamma0: HomologyClass,
    factor_base: Sequence[int],
    max_length: int | None = None,
    ell: int | None = None,
) -> HomologyClass:
    """ρ([a])(γ₀): 素形式分解の語の順に T_q を適用する。

    ell を渡すと、周期を ℓ 進で読む素数 ℓ が因子基底に含まれないことも確かめる。
    """
    basis = gamma0.basis
    for q in factor_base:
        if math.gcd(q, basis.level) != 1:
            raise ParameterError(f"factor-base prime {q} divides the level {basis.level}")
        if ell is not None and q == ell:
            raise ParameterError(f"factor-base prime {q} equals the period prime ell")
    word = factor_class(cls, list(factor_base), max_length)
    norms = prime_form_norms(cls.disc, factor_base)
    gamma = gamma0
    for step in word:
        gamma = hecke_apply(basis, norms[step], gamma)
    return gamma


def default_gamma0(basis: ManinBasis) -> HomologyClass:
    """γ₀ の既定値 {0 → ∞}。"""
    return symbol_from_cusps(0, INFINITY, basis)


def _transport_matrix(x: Fraction) -> tuple[int, int, int, int]:
    """連分数の最後の収束分数から作る g ∈ SL₂(Z)、g·∞ = x。"""
    conv = _convergents(x.numerator, x.denominator)
    n = len(conv) - 3
    pn, qn = conv[-1]
    pp, qp = conv[-2]
    sign = -1 if n % 2 == 0 else 1
    return sign * pn, pp, sign * qn, qp


def _moebius(g: tuple[int, int, int, int], cusp: Cusp) -> Cusp:
    a, b, c, d = g
    p, q = _cusp_pair(cusp)
    num, den = a * p + b * q, c * p + d * q
    return INFINITY if den == 0 else Fraction(num, den)


def construction2_class(x0: CMPoint, xa: CMPoint, base_cusp: Cusp, basis: ManinBasis) -> HomologyClass:
    """CM 点 x₀, x_a から相対類 {r₀ → r_a} + {r_a → g_a·b} − {r₀ → g₀·b} を作る。

    r_x = Re(τ_x)、g_x は r_x の連分数から得る SL₂(Z) の元、b は基点カスプ。
    絶対ホモロジーの不定性はこの経路の取り方で固定している。
    """
    if x0.disc != xa.disc:
        raise DiscriminantMismatch(f"CM points have discriminants {x0.disc} and {xa.disc}")
    if math.gcd(x0.disc, basis.level) != 1:
        raise DiscriminantLevelClash(f"discriminant {x0.disc} is not coprime to level {basis.level}")
    r0, ra = x0.tau_re, xa.tau_re
    b0 = _moebius(_transport_matrix(r0), base_cusp)
    ba = _moebius(_transport_matrix(ra), base_cusp)
    return symbol_from_cusps(r0, ra, basis) + symbol_from_cusps(ra, ba, basis) - symbol_from_cusps(r0, b0, basis)


def sample_stabilizer(
    gamma0: HomologyClass,
    disc: int,
    factor_base: Sequence[int],
    samples: int,
    seed: int | bytes | str,
    ell: int | None = None,
) -> list[QuadForm]:
    """構成 1 の作用で γ₀ を固定する類を無作為に探す。

    見つかった類の個数については何も主張しない。
    """
    forms = enumerate_class_group(disc)
    rng = random.Random(seed)
    fixed = []
    for _ in range(samples):
        f = rng.choice(forms)
        if f in fixed:
            continue
        if construction1_class(f, gamma0, factor_base, ell=ell) == gamma0:
            fixed.append(f)
    return sorted(fixed)
