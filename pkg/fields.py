"""有限体 F_{p²} = F_p[i]/(i² − n)、その上の一変数多項式の根、W(F_{p²})/p^k への Hensel 持ち上げ。"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

from sympy import legendre_symbol

from errors import SingularRoot

Poly = list["Fp2Elem"]


@dataclass(frozen=True)
class Fp2:
    """F_{p²}。``nonresidue`` は最小の平方非剰余。

    直列化した元の座標はこれに依存する。
    """

    p: int

    def __post_init__(self) -> None:
        if self.p < 3:
            raise ValueError("characteristic must be an odd prime")

    @cached_property
    def nonresidue(self) -> int:
        return next(n for n in range(2, self.p) if legendre_symbol(n, self.p) == -1)

    def __call__(self, a: int, b: int = 0) -> Fp2Elem:
        return Fp2Elem(a % self.p, b % self.p, self)

    @property
    def zero(self) -> Fp2Elem:
        return self(0)

    @property
    def one(self) -> Fp2Elem:
        return self(1)

    @property
    def order(self) -> int:
        return self.p * self.p

    def elements(self):
        for a in range(self.p):
            for b in range(self.p):
                yield self(a, b)


@dataclass(frozen=True, order=True)
class Fp2Elem:
    """a + b·i。順序は (a, b) の辞書式で、グラフの頂点ラベル順に使う。"""

    a: int
    b: int
    field: Fp2 = dataclasses.field(compare=False, repr=False)

    def _coerce(self, other: Fp2Elem | int) -> Fp2Elem:
        if isinstance(other, Fp2Elem):
            return other
        return self.field(other)

    def __add__(self, other: Fp2Elem | int) -> Fp2Elem:
        o = self._coerce(other)
        return self.field(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> Fp2Elem:
        return self.field(-self.a, -self.b)

    def __sub__(self, other: Fp2Elem | int) -> Fp2Elem:
        return self + (-self._coerce(other))

    def __rsub__(self, other: int) -> Fp2Elem:
        return self._coerce(other) - self

    def __mul__(self, other: Fp2Elem | int) -> Fp2Elem:
        o = self._coerce(other)
        n = self.field.nonresidue
        return self.field(self.a * o.a + n * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self) -> Fp2Elem:
        return self.field(self.a, -self.b)

    def norm(self) -> int:
        return (self.a * self.a - self.field.nonresidue * self.b * self.b) % self.field.p

    def inv(self) -> Fp2Elem:
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero in F_p^2")
        return self.conj() * pow(nrm, -1, self.field.p)

    def __truediv__(self, other: Fp2Elem | int) -> Fp2Elem:
        return self * self._coerce(other).inv()

    def __pow__(self, n: int) -> Fp2Elem:
        if n < 0:
            return self.inv() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def in_base_field(self) -> bool:
        return self.b == 0

    def to_json(self) -> list[int]:
        return [self.a, self.b]

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}i"


# --- polynomials over F_{p²} (constant term first) --------------------------


def poly_trim(f: Poly) -> Poly:
    out = list(f)
    while out and not out[-1]:
        out.pop()
    return out


def poly_from_ints(coeffs: list[int], fld: Fp2) -> Poly:
    return poly_trim([fld(c) for c in coeffs])


def poly_eval(f: Poly, x: Fp2Elem) -> Fp2Elem:
    acc = x.field.zero
    for c in reversed(f):
        acc = acc * x + c
    return acc


def poly_sub(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    zero = (f or g)[0].field.zero
    return poly_trim([(f[i] if i < len(f) else zero) - (g[i] if i < len(g) else zero) for i in range(n)])


def poly_mul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return []
    zero = f[0].field.zero
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_divmod(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    g = poly_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    rem = poly_trim(f)
    if len(rem) < len(g):
        return [], rem
    lead_inv = g[-1].inv()
    quo = [g[0].field.zero] * (len(rem) - len(g) + 1)
    while len(rem) >= len(g) and rem:
        shift = len(rem) - len(g)
        c = rem[-1] * lead_inv
        quo[shift] = c
        for i, b in enumerate(g):
            rem[shift + i] = rem[shift + i] - c * b
        rem = poly_trim(rem)
    return poly_trim(quo), rem


def poly_monic(f: Poly) -> Poly:
    inv = f[-1].inv()
    return [c * inv for c in f]


def poly_gcd(f: Poly, g: Poly) -> Poly:
    a, b = poly_trim(f), poly_trim(g)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return poly_monic(a) if a else []


def poly_powmod(base: Poly, n: int, modulus: Poly) -> Poly:
    fld = modulus[0].field
    result: Poly = [fld.one]
    base = poly_divmod(base, modulus)[1]
    while n:
        if n & 1:
            result = poly_divmod(poly_mul(result, base), modulus)[1]
        base = poly_divmod(poly_mul(base, base), modulus)[1]
        n >>= 1
    return result


def _split_linear(g: Poly, fld: Fp2) -> list[Fp2Elem]:
    """相異なる一次因子の積 g を Cantor–Zassenhaus で分解する。"""
    if len(g) == 1:
        return []
    if len(g) == 2:
        return [-(g[0] / g[1])]
    half = (fld.order - 1) // 2
    for delta in fld.elements():
        h = poly_powmod([delta, fld.one], half, g)
        d = poly_gcd(g, poly_sub(h, [fld.one]))
        if 1 < len(d) < len(g):
            return _split_linear(d, fld) + _split_linear(poly_divmod(g, d)[0], fld)
    raise ArithmeticError("failed to split a product of linear factors")


def poly_roots(f: Poly) -> list[tuple[Fp2Elem, int]]:
    """F_{p²} 内の根と重複度をラベル順で返す。

    Parameters
    ----------
    f : Poly
        非ゼロ多項式（定数項が先頭）。

    Returns
    -------
    list[tuple[Fp2Elem, int]]
        (根, 重複度) のリスト。
    """
    f = poly_trim(f)
    if not f:
        raise ValueError("zero polynomial has every element as a root")
    if len(f) == 1:
        return []
    fld = f[0].field
    f = poly_monic(f)
    x = [fld.zero, fld.one]
    frob = poly_powmod(x, fld.order, f)
    distinct = poly_gcd(f, poly_sub(frob, x))
    roots = sorted(_split_linear(distinct, fld))
    out = []
    for r in roots:
        mult = 0
        rest = f
        while True:
            q, rem = poly_divmod(rest, [-r, fld.one])
            if rem:
                break
            mult += 1
            rest = q
        out.append((r, mult))
    return out


# --- Witt vectors W(F_{p²}) / p^k --------------------------------------------


@dataclass(frozen=True)
class GaloisRing:
    """W(F_{p²})/p^k = (Z/p^k)[i]/(i² − n)。

    n は ``Fp2(p).nonresidue`` と同じ整数なので、mod p の還元は Fp2 の座標をそのまま与える。
    """

    p: int
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("lifting precision must be positive")

    @cached_property
    def residue_field(self) -> Fp2:
        return Fp2(self.p)

    @cached_property
    def modulus(self) -> int:
        return self.p**self.k

    @property
    def nonresidue(self) -> int:
        return self.residue_field.nonresidue

    def __call__(self, a: int, b: int = 0) -> LiftElem:
        return LiftElem(a % self.modulus, b % self.modulus, self)

    @property
    def zero(self) -> LiftElem:
        return self(0)

    @property
    def one(self) -> LiftElem:
        return self(1)

    def lift(self, x: Fp2Elem) -> LiftElem:
        """座標をそのまま持ち上げた代表元（Teichmüller 代表ではない）。"""
        return self(x.a, x.b)


@dataclass(frozen=True)
class LiftElem:
    """a + b·i mod p^k。"""

    a: int
    b: int
    ring: GaloisRing = dataclasses.field(compare=False, repr=False)

    def _coerce(self, other: LiftElem | int) -> LiftElem:
        if isinstance(other, LiftElem):
            return other
        return self.ring(other)

    def __add__(self, other: LiftElem | int) -> LiftElem:
        o = self._coerce(other)
        return self.ring(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> LiftElem:
        return self.ring(-self.a, -self.b)

    def __sub__(self, other: LiftElem | int) -> LiftElem:
        o = self._coerce(other)
        return self.ring(self.a - o.a, self.b - o.b)

    def __mul__(self, other: LiftElem | int) -> LiftElem:
        o = self._coerce(other)
        n = self.ring.nonresidue
        return self.ring(self.a * o.a + n * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> LiftElem:
        result = self.ring.one
        for _ in range(n):
            result = result * self
        return result

    def is_unit(self) -> bool:
        return bool(self.reduce())

    def inv(self) -> LiftElem:
        if not self.is_unit():
            raise ZeroDivisionError("element of W(F_p^2)/p^k is not a unit")
        mod = self.ring.modulus
        nrm = (self.a * self.a - self.ring.nonresidue * self.b * self.b) % mod
        return self.ring(self.a, -self.b) * pow(nrm, -1, mod)

    def __truediv__(self, other: LiftElem | int) -> LiftElem:
        return self * self._coerce(other).inv()

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def reduce(self) -> Fp2Elem:
        return self.ring.residue_field(self.a, self.b)


def _lift_eval(coeffs: list[LiftElem], x: LiftElem) -> LiftElem:
    acc = x.ring.zero
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def hensel_lift(coeffs: list[int], root: Fp2Elem, ring: GaloisRing) -> LiftElem:
    """整数係数多項式（定数項が先頭）の単根 root を Newton 法で p^k まで持ち上げる。

    Raises
    ------
    SingularRoot
        root が f' の根でもある。
    """
    f = [ring(c) for c in coeffs]
    df = [ring(k * c) for k, c in enumerate(coeffs)][1:]
    r = ring.lift(root)
    if _lift_eval(f, r).reduce():
        raise ValueError(f"{root} is not a root of the polynomial mod {ring.p}")
    if not _lift_eval(df, r).is_unit():
        raise SingularRoot(f"{root} is a multiple root mod {ring.p}")
    # 1 回ごとに正しい桁数が倍になる
    for _ in range(ring.k.bit_length() + 1):
        value = _lift_eval(f, r)
        if not value:
            return r
        r = r - value / _lift_eval(df, r)
    return r
