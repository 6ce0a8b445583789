"""精度を追跡する切り捨て ℓ 進数と、その係数をもつ冪級数。

精度は「既知の桁数（絶対精度）と付値の下界」で表す区間意味論である。
真の値は常に報告された剰余類 ``residue + ℓ^precision Z_ℓ`` に含まれる。
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from errors import DivisionByIndeterminate, NonUnitLinearTerm, SingularRoot
from linalg import valuation

Scalar = int | Fraction


def rational_valuation(x: Fraction, p: int) -> int:
    """有理数の ℓ 進付値（x ≠ 0）。"""
    return valuation(x.numerator, p) - valuation(x.denominator, p)


def guard_digits(ell: int, terms: int) -> int:
    """長さ terms の級数を積分するときの保護桁数 ⌈log_ℓ T⌉。"""
    digits, power = 0, 1
    while power < terms:
        power *= ell
        digits += 1
    return digits


@dataclass(frozen=True)
class TruncatedPadic:
    """ℓ^precision を法として既知の ℓ 進数。

    ``valuation >= 0`` のとき ``residue`` は値そのもの（0 ≤ residue < ℓ^precision）。
    付値が負の値（カスプ近傍の j など）は ``residue / ℓ^(-valuation)`` を表し、
    ``residue`` は単数部分の代表元になる。ゼロは ``residue = 0`` かつ
    ``valuation = precision``（付値の下界としてのみ既知）。
    """

    prime: int
    residue: int
    precision: int
    valuation: int

    # --- constructors -------------------------------------------------
    @classmethod
    def zero(cls, prime: int, precision: int) -> TruncatedPadic:
        return cls(prime, 0, precision, precision)

    @classmethod
    def from_rational(cls, prime: int, value: Scalar, precision: int) -> TruncatedPadic:
        """有理数を ℓ^precision を法として表す。"""
        x = Fraction(value)
        if x == 0:
            return cls.zero(prime, precision)
        vn = valuation(x.numerator, prime)
        vd = valuation(x.denominator, prime)
        v = vn - vd
        if v >= precision:
            return cls.zero(prime, precision)
        mod = prime ** (precision - v)
        unit = (x.numerator // prime**vn) * pow(x.denominator // prime**vd, -1, mod) % mod
        residue = unit * prime**v if v >= 0 else unit
        return cls(prime, residue, precision, v)

    @classmethod
    def from_int(cls, prime: int, value: int, precision: int) -> TruncatedPadic:
        return cls.from_rational(prime, value, precision)

    # --- inspection ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        """現在の精度でゼロと区別できないか。"""
        return self.residue == 0

    @property
    def is_unit(self) -> bool:
        return not self.is_zero and self.valuation == 0

    def lift(self) -> Fraction:
        """剰余類の標準代表元。"""
        if self.valuation >= 0 or self.is_zero:
            return Fraction(self.residue)
        return Fraction(self.residue, self.prime ** (-self.valuation))

    def contains(self, value: Scalar) -> bool:
        """value がこの剰余類に属するか。"""
        diff = Fraction(value) - self.lift()
        return diff == 0 or rational_valuation(diff, self.prime) >= self.precision

    def agrees(self, other: TruncatedPadic) -> bool:
        """二つの値が共通の精度で一致するか。"""
        diff = self.lift() - other.lift()
        return diff == 0 or rational_valuation(diff, self.prime) >= min(self.precision, other.precision)

    def with_precision(self, precision: int) -> TruncatedPadic:
        return TruncatedPadic.from_rational(self.prime, self.lift(), min(precision, self.precision))

    # --- arithmetic ---------------------------------------------------
    def _check(self, other: TruncatedPadic) -> None:
        if other.prime != self.prime:
            raise ValueError(f"prime mismatch: {self.prime} vs {other.prime}")

    def __neg__(self) -> TruncatedPadic:
        return TruncatedPadic.from_rational(self.prime, -self.lift(), self.precision)

    def __add__(self, other: TruncatedPadic | Scalar) -> TruncatedPadic:
        if isinstance(other, TruncatedPadic):
            self._check(other)
            prec = min(self.precision, other.precision)
            return TruncatedPadic.from_rational(self.prime, self.lift() + other.lift(), prec)
        return TruncatedPadic.from_rational(self.prime, self.lift() + Fraction(other), self.precision)

    __radd__ = __add__

    def __sub__(self, other: TruncatedPadic | Scalar) -> TruncatedPadic:
        return self + (-other)

    def __rsub__(self, other: Scalar) -> TruncatedPadic:
        return (-self) + other

    def __mul__(self, other: TruncatedPadic | Scalar) -> TruncatedPadic:
        if isinstance(other, TruncatedPadic):
            self._check(other)
            prec = min(self.precision + other.valuation, other.precision + self.valuation)
            return TruncatedPadic.from_rational(self.prime, self.lift() * other.lift(), prec)
        k = Fraction(other)
        if k == 0:
            return TruncatedPadic.zero(self.prime, self.precision)
        prec = self.precision + rational_valuation(k, self.prime)
        return TruncatedPadic.from_rational(self.prime, self.lift() * k, prec)

    __rmul__ = __mul__

    def __truediv__(self, other: TruncatedPadic | Scalar) -> TruncatedPadic:
        if isinstance(other, TruncatedPadic):
            self._check(other)
            if other.is_zero:
                raise DivisionByIndeterminate(f"divisor is 0 mod {self.prime}^{other.precision}")
            vy = other.valuation
            prec = min(self.precision - vy, other.precision + self.valuation - 2 * vy)
            return TruncatedPadic.from_rational(self.prime, self.lift() / other.lift(), prec)
        k = Fraction(other)
        if k == 0:
            raise ZeroDivisionError("exact division by zero")
        return self * (1 / k)

    def __rtruediv__(self, other: Scalar) -> TruncatedPadic:
        if self.is_zero:
            raise DivisionByIndeterminate(f"divisor is 0 mod {self.prime}^{self.precision}")
        v = self.valuation
        prec = self.precision - 2 * v + rational_valuation(Fraction(other), self.prime) if other else self.precision
        return TruncatedPadic.from_rational(self.prime, Fraction(other) / self.lift(), prec)

    def __pow__(self, n: int) -> TruncatedPadic:
        if n < 0:
            return 1 / (self**-n)
        result: TruncatedPadic | None = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            return TruncatedPadic.from_int(self.prime, 1, self.precision - min(self.valuation, 0))
        return result

    # --- serialization ------------------------------------------------
    def to_json(self) -> dict:
        return {"l": self.prime, "m": self.precision, "residue": str(self.residue), "val": self.valuation}

    @classmethod
    def from_json(cls, data: dict) -> TruncatedPadic:
        return cls(int(data["l"]), int(data["residue"]), int(data["m"]), int(data["val"]))


def padic_arith(x: TruncatedPadic, y: TruncatedPadic, op: str) -> TruncatedPadic:
    """op ∈ {add, sub, mul, div} を適用する。"""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown op: {op}")


# --- power series -----------------------------------------------------

# 内部表現では None を「厳密なゼロ」として扱う
_Coeffs = list[TruncatedPadic | None]


def _add(a: TruncatedPadic | None, b: TruncatedPadic | None) -> TruncatedPadic | None:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _mul(a: TruncatedPadic | None, b: TruncatedPadic | None) -> TruncatedPadic | None:
    if a is None or b is None:
        return None
    return a * b


def _mul_trunc(a: _Coeffs, b: _Coeffs, n: int) -> _Coeffs:
    out: _Coeffs = [None] * n
    for i, x in enumerate(a[:n]):
        if x is None:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] = _add(out[i + j], _mul(x, y))
    return out


@dataclass(frozen=True)
class PadicSeries:
    """係数 c₀ + c₁t + … + c_{T−1}t^{T−1}（T = series_precision 項が既知）。"""

    coefficients: tuple[TruncatedPadic, ...]

    def __post_init__(self) -> None:
        primes = {c.prime for c in self.coefficients}
        if len(primes) > 1:
            raise ValueError(f"mixed primes in series: {sorted(primes)}")

    @property
    def prime(self) -> int:
        return self.coefficients[0].prime

    @property
    def series_precision(self) -> int:
        return len(self.coefficients)

    @property
    def working_precision(self) -> int:
        return max(c.precision for c in self.coefficients)

    def __getitem__(self, k: int) -> TruncatedPadic:
        return self.coefficients[k]

    def __len__(self) -> int:
        return len(self.coefficients)

    @classmethod
    def from_rationals(cls, prime: int, values: Sequence[Scalar], precision: int) -> PadicSeries:
        return cls(tuple(TruncatedPadic.from_rational(prime, v, precision) for v in values))

    @classmethod
    def _from_internal(cls, coeffs: _Coeffs, prime: int, precision: int) -> PadicSeries:
        return cls(tuple(TruncatedPadic.zero(prime, precision) if c is None else c for c in coeffs))

    def _internal(self) -> _Coeffs:
        return list(self.coefficients)

    def agrees(self, other: PadicSeries) -> bool:
        n = min(len(self), len(other))
        return all(self[k].agrees(other[k]) for k in range(n))

    def to_json(self) -> list[dict]:
        return [c.to_json() for c in self.coefficients]

    @classmethod
    def from_json(cls, data: list[dict]) -> PadicSeries:
        return cls(tuple(TruncatedPadic.from_json(d) for d in data))


def formal_integrate(s: PadicSeries) -> PadicSeries:
    """項別積分 Σ cₙ/(n+1)·t^{n+1}。各係数の精度は v_ℓ(n+1) 桁だけ落ちる。"""
    head = TruncatedPadic.zero(s.prime, s.working_precision)
    return PadicSeries((head, *(c / (n + 1) for n, c in enumerate(s.coefficients))))


def derivative(s: PadicSeries) -> PadicSeries:
    """項別微分。"""
    if len(s) == 1:
        return PadicSeries((TruncatedPadic.zero(s.prime, s.working_precision),))
    return PadicSeries(tuple(c * n for n, c in enumerate(s.coefficients) if n > 0))


def evaluate(s: PadicSeries, t: TruncatedPadic) -> TruncatedPadic:
    """s(t) = Σ cₙ tⁿ（打ち切り誤差は呼び出し側で評価する）。"""
    total = s[0]
    power: TruncatedPadic | None = None
    for c in s.coefficients[1:]:
        power = t if power is None else power * t
        total = total + c * power
    return total


def multiply(s: PadicSeries, g: PadicSeries) -> PadicSeries:
    n = min(len(s), len(g))
    prec = max(s.working_precision, g.working_precision)
    return PadicSeries._from_internal(_mul_trunc(s._internal(), g._internal(), n), s.prime, prec)


def inverse(s: PadicSeries) -> PadicSeries:
    """定数項が単数の級数の逆元。"""
    c0 = s[0]
    if c0.is_zero:
        raise DivisionByIndeterminate("constant term of the series is not invertible")
    out = [1 / c0]
    for k in range(1, len(s)):
        acc: TruncatedPadic | None = None
        for i in range(1, k + 1):
            acc = _add(acc, s[i] * out[k - i])
        out.append(-(acc / c0))
    return PadicSeries(tuple(out))


def compose(s: PadicSeries, g: PadicSeries) -> PadicSeries:
    """s(g(t))。g の定数項はゼロでなければならない。"""
    if not g[0].is_zero:
        raise ValueError("inner series must have zero constant term")
    n = min(len(s), len(g))
    inner: _Coeffs = [None, *g.coefficients[1:n]]
    out: _Coeffs = [s[0], *([None] * (n - 1))]
    power: _Coeffs = [None] * n
    power[0] = TruncatedPadic.from_int(s.prime, 1, max(s.working_precision, g.working_precision))
    for k in range(1, n):
        power = _mul_trunc(power, inner, n)
        for i, c in enumerate(power):
            if c is not None:
                out[i] = _add(out[i], s[k] * c)
    return PadicSeries._from_internal(out, s.prime, max(s.working_precision, g.working_precision))


def reverse(s: PadicSeries) -> PadicSeries:
    """合成逆 r（s(r(t)) = t）を Lagrange 反転で求める。

    r_k = (1/k)·[u^{k−1}] (u/s(u))^k。k による割り算で v_ℓ(k) 桁を失う。
    """
    if len(s) < 2:
        raise NonUnitLinearTerm("series too short to reverse")
    if not s[0].is_zero or not s[1].is_unit:
        raise NonUnitLinearTerm("reversion needs s(0) = 0 and a unit linear coefficient")
    n = len(s)
    phi = inverse(PadicSeries(s.coefficients[1:]))
    out: _Coeffs = [None]
    power: _Coeffs = [None] * (n - 1)
    power[0] = TruncatedPadic.from_int(s.prime, 1, s.working_precision)
    for k in range(1, n):
        power = _mul_trunc(power, phi._internal(), n - 1)
        coeff = power[k - 1]
        out.append(None if coeff is None else coeff / k)
    return PadicSeries._from_internal(out, s.prime, s.working_precision)


def identity_series(prime: int, length: int, precision: int) -> PadicSeries:
    """t そのもの。"""
    return PadicSeries.from_rationals(prime, [0, 1] + [0] * (length - 2), precision)


def series_compose_reverse(s: PadicSeries, mode: str, g: PadicSeries | None = None) -> PadicSeries:
    """mode が ``compose`` なら s∘g、``reverse`` なら s の合成逆。"""
    if mode == "compose":
        if g is None:
            raise ValueError("compose needs an inner series")
        return compose(s, g)
    if mode == "reverse":
        return reverse(s)
    raise ValueError(f"unknown mode: {mode}")


# --- Hensel ------------------------------------------------------------


def _poly_eval(coeffs: Sequence[int], x: int, mod: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % mod
    return acc


def _poly_deriv(coeffs: Sequence[int]) -> list[int]:
    return [k * c for k, c in enumerate(coeffs)][1:]


def hensel_root(poly: Sequence[int], ell: int, m: int) -> list[TruncatedPadic]:
    """整数多項式（定数項から）の単純根を ℓ^m まで持ち上げる。

    Raises
    ------
    SingularRoot
        ℓ を法として多項式と導関数が共通根をもつ。
    """
    deriv = _poly_deriv(poly)
    roots = []
    for r in range(ell):
        if _poly_eval(poly, r, ell):
            continue
        if _poly_eval(deriv, r, ell) == 0:
            raise SingularRoot(f"root {r} mod {ell} is not simple")
        root, prec = r, 1
        while prec < m:
            prec = min(2 * prec, m)
            mod = ell**prec
            root = (root - _poly_eval(poly, root, mod) * pow(_poly_eval(deriv, root, mod), -1, mod)) % mod
        roots.append(TruncatedPadic.from_int(ell, root, m))
    return roots
