"""整数格と Z/ℓ^m 上の厳密な線形代数。

modsym（Manin 記号の整数格基底）と msi（制約なし線形攻撃）から共通に使う。
行列は ``list[list[int]]`` の行優先表現で受け渡す。
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from sympy import multiplicity


def valuation(n: int, ell: int) -> int:
    """整数 ``n`` の ℓ 進付値。``n == 0`` のときは例外を送出する。"""
    if n == 0:
        raise ValueError("valuation of zero is unbounded")
    return int(multiplicity(ell, abs(n)))


def integer_echelon(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """整数行列の行階段形を Euclid 行変形で求める。

    Parameters
    ----------
    rows : Sequence[Sequence[int]]
        生成元の行ベクトル。

    Returns
    -------
    list[list[int]]
        同じ格子を張る一次独立な行。ピボット列は狭義単調増加で、ピボットは正。
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    ncols = len(work[0])
    result: list[list[int]] = []
    col = 0
    while work and col < ncols:
        nonzero = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not nonzero:
            col += 1
            continue
        while len(nonzero) > 1:
            nonzero.sort(key=lambda r: abs(r[col]))
            piv = nonzero[0]
            kept = [piv]
            for r in nonzero[1:]:
                q = r[col] // piv[col]
                reduced = [a - q * b for a, b in zip(r, piv, strict=True)]
                if reduced[col] != 0:
                    kept.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            nonzero = kept
        piv = nonzero[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        result.append(piv)
        work = [r for r in rest if any(r)]
        col += 1
    return result


def pivot_columns(echelon: Sequence[Sequence[int]]) -> list[int]:
    """各行の先頭非ゼロ列を返す。"""
    return [next(j for j, a in enumerate(row) if a != 0) for row in echelon]


def lattice_coordinates(echelon: Sequence[Sequence[int]], vec: Sequence[int]) -> list[int]:
    """``integer_echelon`` の出力を基底とする整数座標を求める。

    ``vec`` が格子に属さない場合は ``ValueError``。
    """
    residual = list(vec)
    coords = []
    for row, p in zip(echelon, pivot_columns(echelon), strict=True):
        q, r = divmod(residual[p], row[p])
        if r:
            raise ValueError("vector is not in the lattice")
        coords.append(q)
        if q:
            residual = [a - q * b for a, b in zip(residual, row, strict=True)]
    if any(residual):
        raise ValueError("vector is not in the lattice")
    return coords


def mat_vec_mod(matrix: Sequence[Sequence[int]], vec: Sequence[int], modulus: int) -> tuple[int, ...]:
    """``matrix · vec mod modulus``。"""
    return tuple(sum(a * x for a, x in zip(row, vec, strict=True)) % modulus for row in matrix)


@dataclass(frozen=True)
class LinearSolutionSet:
    """``A x ≡ y (mod ℓ^m)`` の解集合 ``particular + span(kernel)``。

    ``particular`` が ``None`` のとき解なし。
    """

    modulus: int
    particular: tuple[int, ...] | None
    kernel: tuple[tuple[int, ...], ...]

    @property
    def solvable(self) -> bool:
        return self.particular is not None

    def members(self) -> Iterator[tuple[int, ...]]:
        """剰余類の全要素を列挙する（小さな例の検証用）。"""
        if self.particular is None:
            return
        seen = set()
        orders = [self.modulus // _content(g, self.modulus) for g in self.kernel]
        for coeffs in itertools.product(*(range(o) for o in orders)):
            x = list(self.particular)
            for c, g in zip(coeffs, self.kernel, strict=True):
                x = [(a + c * b) for a, b in zip(x, g, strict=True)]
            member = tuple(a % self.modulus for a in x)
            if member not in seen:
                seen.add(member)
                yield member


def _content(vec: Sequence[int], modulus: int) -> int:
    g = modulus
    for a in vec:
        g = math.gcd(g, a % modulus)
    return g


def solve_mod_prime_power(
    matrix: Sequence[Sequence[int]], target: Sequence[int], ell: int, m: int, ncols: int | None = None
) -> LinearSolutionSet:
    """Z/ℓ^m 上の連立合同式を Smith 標準形で解く。

    Z/ℓ^m は鎖環なので、残りの部分行列で付値最小の成分をピボットに選べば
    同じ行と列の他の成分はすべてピボットで割り切れる。行変形は右辺へ、
    列変形は変換行列 ``V`` へ記録し、``x = V z`` で元の座標へ戻す。

    Parameters
    ----------
    matrix : Sequence[Sequence[int]]
        d × r 行列。
    target : Sequence[int]
        右辺 y。
    ell, m : int
        法 ℓ^m。
    ncols : int, optional
        行がない場合の列数。

    Returns
    -------
    LinearSolutionSet
        特殊解と核の生成系。解がなければ ``particular=None``。
    """
    mod = ell**m
    nrows = len(matrix)
    cols = ncols if ncols is not None else (len(matrix[0]) if nrows else 0)
    a = [[x % mod for x in row] for row in matrix]
    b = [x % mod for x in target]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]
    exps: list[int] = []

    k = 0
    while k < min(nrows, cols):
        best = None
        for i in range(k, nrows):
            for j in range(k, cols):
                if a[i][j]:
                    e = valuation(a[i][j], ell)
                    if best is None or e < best[2]:
                        best = (i, j, e)
        if best is None:
            break
        i, j, e = best
        a[k], a[i] = a[i], a[k]
        b[k], b[i] = b[i], b[k]
        if j != k:
            for row in a:
                row[k], row[j] = row[j], row[k]
            for row in v:
                row[k], row[j] = row[j], row[k]
        scale = ell**e
        unit_inv = pow(a[k][k] // scale, -1, mod)
        a[k] = [x * unit_inv % mod for x in a[k]]
        b[k] = b[k] * unit_inv % mod
        for i2 in range(nrows):
            if i2 != k and a[i2][k]:
                f = a[i2][k] // scale
                a[i2] = [(x - f * y) % mod for x, y in zip(a[i2], a[k], strict=True)]
                b[i2] = (b[i2] - f * b[k]) % mod
        for j2 in range(k + 1, cols):
            if a[k][j2]:
                f = a[k][j2] // scale
                for row in a:
                    row[j2] = (row[j2] - f * row[k]) % mod
                for row in v:
                    row[j2] = (row[j2] - f * row[k]) % mod
        exps.append(e)
        k += 1

    kernel_z: list[list[int]] = []
    for i, e in enumerate(exps):
        if e > 0:
            kernel_z.append([ell ** (m - e) if t == i else 0 for t in range(cols)])
    for j in range(len(exps), cols):
        kernel_z.append([int(t == j) for t in range(cols)])
    kernel = tuple(tuple(sum(v[r][t] * z[t] for t in range(cols)) % mod for r in range(cols)) for z in kernel_z)

    if any(b[i] % ell ** exps[i] for i in range(len(exps))) or any(b[len(exps) :]):
        return LinearSolutionSet(modulus=mod, particular=None, kernel=kernel)
    z = [b[i] // ell ** exps[i] for i in range(len(exps))] + [0] * (cols - len(exps))
    particular = tuple(sum(v[r][t] * z[t] for t in range(cols)) % mod for r in range(cols))
    return LinearSolutionSet(modulus=mod, particular=particular, kernel=kernel)
