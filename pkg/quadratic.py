"""二元二次形式による虚二次整環の類群、CM 点、Hilbert 類多項式。"""

from __future__ import annotations

import math
import sys
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from sympy import divisor_sigma, isprime
from sympy.core.intfunc import igcdex
from sympy.ntheory import sqrt_mod

from errors import (
    DiscriminantMismatch,
    FactorBaseInsufficient,
    InvalidDiscriminant,
    NotPositiveDefinite,
    PrecisionExhausted,
)

DEFAULT_MAX_ABS_DISC = 4000


def check_discriminant(disc: int) -> int:
    """判別式の妥当性を検査して返す。"""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise InvalidDiscriminant(f"discriminant must be negative and 0 or 1 mod 4, got {disc}")
    return disc


@dataclass(frozen=True, order=True)
class QuadForm:
    """正定値二元二次形式 ax² + bxy + cy²。"""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        return not ((abs(b) == a or a == c) and b < 0)

    @property
    def is_primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    def to_json(self) -> list[int]:
        return [self.a, self.b, self.c]

    @classmethod
    def from_json(cls, data: list[int]) -> QuadForm:
        a, b, c = (int(x) for x in data)
        return cls(a, b, c)


def reduce_form(f: QuadForm) -> QuadForm:
    """Gauss 簡約。同値類のただ一つの簡約形式を返す。

    Parameters
    ----------
    f : QuadForm
        正定値かつ原始的な形式。

    Returns
    -------
    QuadForm
        簡約形式（冪等）。
    """
    a, b, c = f.a, f.b, f.c
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise NotPositiveDefinite(f"[{a},{b},{c}] is not positive definite")
    while True:
        # b を (-a, a] に正規化
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            c = a * r * r + b * r + c
            b = b + 2 * r * a
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        return QuadForm(a, b, c)


def principal_form(disc: int) -> QuadForm:
    """単位元となる主形式。"""
    check_discriminant(disc)
    k = disc % 2
    return QuadForm(1, k, (k - disc) // 4)


def inverse_form(f: QuadForm) -> QuadForm:
    return reduce_form(QuadForm(f.a, -f.b, f.c))


def _bezout3(x: int, y: int, z: int) -> tuple[int, int, int, int]:
    """u·x + v·y + w·z = gcd(x, y, z) を満たす (g, u, v, w)。"""
    u1, v1, g1 = igcdex(x, y)
    s, w, g = igcdex(g1, z)
    return int(g), int(s * u1), int(s * v1), int(w)


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss 合成（Shanks の NUCOMP ではなく素直な Dirichlet 合成）。

    Parameters
    ----------
    f, g : QuadForm
        同じ判別式をもつ原始形式。

    Returns
    -------
    QuadForm
        簡約された合成形式。
    """
    disc = f.disc
    if g.disc != disc:
        raise DiscriminantMismatch(f"{f.to_json()} has disc {disc}, {g.to_json()} has disc {g.disc}")
    a1, b1 = f.a, f.b
    a2, b2 = g.a, g.b
    beta = (b1 + b2) // 2
    e, u, v, w = _bezout3(a1, a2, beta)
    a3 = a1 * a2 // (e * e)
    b3 = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + disc) // 2) // e
    b3 %= 2 * a3
    c3 = (b3 * b3 - disc) // (4 * a3)
    return reduce_form(QuadForm(a3, b3, c3))


def form_power(f: QuadForm, n: int) -> QuadForm:
    """f の n 乗（負の指数は逆元）。"""
    if n < 0:
        return form_power(inverse_form(f), -n)
    result = principal_form(f.disc)
    base = reduce_form(f)
    while n:
        if n & 1:
            result = compose(result, base)
        base = compose(base, base)
        n >>= 1
    return result


def form_order(f: QuadForm) -> int:
    """類群における f の位数。"""
    identity = principal_form(f.disc)
    current = reduce_form(f)
    order = 1
    while current != identity:
        current = compose(current, f)
        order += 1
    return order


def _sort_key(f: QuadForm) -> tuple[int, int, int]:
    return (f.a, abs(f.b), -f.b)


def enumerate_class_group(disc: int) -> list[QuadForm]:
    """判別式 disc の簡約原始形式をすべて列挙する。

    並び順は (a, |b|, b の正を先) で、Δ=−23 なら [1,1,6], [2,1,3], [2,−1,3]。
    """
    check_discriminant(disc)
    forms = []
    a_max = math.isqrt(-disc // 3)
    for a in range(1, a_max + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - disc
            if num % (4 * a):
                continue
            c = num // (4 * a)
            f = QuadForm(a, b, c)
            if c >= a and f.is_reduced and f.is_primitive:
                forms.append(f)
    return sorted(forms, key=_sort_key)


def class_number(disc: int) -> int:
    return len(enumerate_class_group(disc))


def prime_form(disc: int, q: int) -> QuadForm | None:
    """ノルム q の素イデアルに対応する簡約形式。q が惰性なら ``None``。"""
    check_discriminant(disc)
    if not isprime(q):
        raise ValueError(f"{q} is not prime")
    roots = sqrt_mod(disc % (4 * q), 4 * q, all_roots=True)
    if not roots:
        return None
    b = min(roots)
    if b > q:
        b -= 2 * q
    f = QuadForm(q, b, (b * b - disc) // (4 * q))
    if not f.is_primitive:
        return None
    return reduce_form(f)


def word_bound(h: int) -> int:
    """factor_class の語長上限 3·⌈log₂ h⌉（最低 1）。"""
    return max(1, 3 * math.ceil(math.log2(h))) if h > 1 else 1


def factor_class(f: QuadForm, factor_base: list[int], max_length: int | None = None) -> list[QuadForm]:
    """f を因子基底の素形式の積として表す語を幅優先探索で求める。

    Parameters
    ----------
    f : QuadForm
        分解する類。
    factor_base : list[int]
        素数のリスト。分岐・分解する素数の素形式を生成元とする（逆元は冪で表す）。
    max_length : int, optional
        語長上限。省略時は ``word_bound(h)``。

    Returns
    -------
    list[QuadForm]
        順に合成すると f と同値になる素形式の列。主類なら空リスト。

    Raises
    ------
    FactorBaseInsufficient
        上限内の語で f に到達できない。
    """
    disc = f.disc
    target = reduce_form(f)
    identity = principal_form(disc)
    if target == identity:
        return []
    if max_length is None:
        max_length = word_bound(class_number(disc))
    steps: list[QuadForm] = []
    for q in factor_base:
        pf = prime_form(disc, q)
        if pf is None:
            continue
        if pf != identity and pf not in steps:
            steps.append(pf)
    parent: dict[QuadForm, tuple[QuadForm, QuadForm] | None] = {identity: None}
    frontier = deque([(identity, 0)])
    while frontier:
        node, depth = frontier.popleft()
        if depth >= max_length:
            continue
        for s in steps:
            nxt = compose(node, s)
            if nxt in parent:
                continue
            parent[nxt] = (node, s)
            if nxt == target:
                word = []
                cur = nxt
                while parent[cur] is not None:
                    prev, step = parent[cur]
                    word.append(step)
                    cur = prev
                return list(reversed(word))
            frontier.append((nxt, depth + 1))
    raise FactorBaseInsufficient(f"{target.to_json()} not reachable over base {factor_base} within {max_length} steps")


@dataclass(frozen=True)
class CMPoint:
    """CM 点 τ = (−b + √Δ)/(2a)。

    虚部は平方 ``tau_im_sq = |Δ|/(4a²)`` として厳密に保持する。
    """

    form: QuadForm
    tau_re: Fraction
    tau_im_sq: Fraction

    @property
    def disc(self) -> int:
        return self.form.disc

    def tau(self, prec_bits: int = 53) -> mpmath.mpc:
        with mpmath.workprec(prec_bits):
            return mpmath.mpc(self.tau_re.numerator, 0) / self.tau_re.denominator + 1j * mpmath.sqrt(
                mpmath.mpf(self.tau_im_sq.numerator) / self.tau_im_sq.denominator
            )


def cm_point(f: QuadForm) -> CMPoint:
    f = reduce_form(f)
    return CMPoint(form=f, tau_re=Fraction(-f.b, 2 * f.a), tau_im_sq=Fraction(-f.disc, 4 * f.a * f.a))


def j_invariant(tau: mpmath.mpc, terms: int | None = None) -> mpmath.mpc:
    """j(τ) = E₄(τ)³/Δ(τ) を q 級数で評価する（作業精度は呼び出し側の mpmath 設定）。"""
    q = mpmath.exp(2j * mpmath.pi * tau)
    if terms is None:
        # |q|^n が作業精度を下回るまで
        bits = mpmath.mp.prec
        decay = -mpmath.log(abs(q), 2)
        terms = int(bits / decay) + 10
    e4 = mpmath.mpf(1)
    qn = mpmath.mpf(1)
    for n in range(1, terms + 1):
        qn *= q
        e4 += 240 * int(divisor_sigma(n, 3)) * qn
    # Δ = q ∏ (1 − qⁿ)^24
    prod = mpmath.mpf(1)
    qn = mpmath.mpf(1)
    for _ in range(1, terms + 1):
        qn *= q
        prod *= 1 - qn
    delta = q * prod**24
    return e4**3 / delta


def precision_estimate(disc: int) -> int:
    """H_Δ の係数の大きさから作業ビット数を見積もる。"""
    total = sum(Fraction(1, f.a) for f in enumerate_class_group(disc))
    return int(math.pi * math.sqrt(-disc) * float(total) / math.log(2)) + 64


def hilbert_class_poly(disc: int, float_precision: int, max_abs_disc: int = DEFAULT_MAX_ABS_DISC) -> list[int]:
    """Hilbert 類多項式 H_Δ を複素数値評価と丸めで求める。

    Parameters
    ----------
    disc : int
        判別式。
    float_precision : int
        mpmath の作業ビット数。
    max_abs_disc : int
        |Δ| の上限。

    Returns
    -------
    list[int]
        係数（定数項から順に、最後はモニックの 1）。

    Raises
    ------
    PrecisionExhausted
        いずれかの係数の丸め残差が 0.25 以上。
    """
    check_discriminant(disc)
    if -disc > max_abs_disc:
        raise InvalidDiscriminant(f"|{disc}| exceeds the configured bound {max_abs_disc}")
    forms = enumerate_class_group(disc)
    with mpmath.workprec(float_precision):
        coeffs = [mpmath.mpc(1)]
        for f in forms:
            j = j_invariant(cm_point(f).tau(float_precision))
            # (X − j) を掛ける
            shifted = [mpmath.mpc(0)] + coeffs
            for i in range(len(coeffs)):
                shifted[i] -= j * coeffs[i]
            coeffs = shifted
        result = []
        for c in coeffs:
            nearest = int(mpmath.nint(c.real))
            residual = abs(c - nearest)
            if residual >= 0.25:
                raise PrecisionExhausted(f"rounding residual {mpmath.nstr(residual, 5)} at {float_precision} bits")
            result.append(nearest)
    return result


def hilbert_class_poly_auto(disc: int, max_abs_disc: int = DEFAULT_MAX_ABS_DISC, max_bits: int = 1 << 16) -> list[int]:
    """精度不足なら作業ビット数を倍にして再試行する。"""
    bits = precision_estimate(disc)
    while True:
        try:
            return hilbert_class_poly(disc, bits, max_abs_disc)
        except PrecisionExhausted as e:
            if bits >= max_bits:
                raise
            print(f"[WARN] {e}; retrying with {2 * bits} bits", file=sys.stderr)
            bits *= 2
