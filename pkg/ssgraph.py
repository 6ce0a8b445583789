"""F_{p²} 上の超特異 ℓ 同種写像グラフ、CM 還元の歩行、全域木による閉路化。"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from sympy import isprime, legendre_symbol

from errors import DisconnectedComponent, ParameterError, PrecisionExhausted, RamifiedOrInert, UnsupportedEll
from fields import (
    Fp2,
    Fp2Elem,
    GaloisRing,
    LiftElem,
    Poly,
    hensel_lift,
    poly_eval,
    poly_from_ints,
    poly_gcd,
    poly_roots,
    poly_trim,
)
from quadratic import (
    DEFAULT_MAX_ABS_DISC,
    QuadForm,
    check_discriminant,
    compose,
    hilbert_class_poly_auto,
    inverse_form,
    prime_form,
    principal_form,
)

# CM 根を持ち上げる p 進桁数の初期値と上限
DEFAULT_LIFT_PRECISION = 32
MAX_LIFT_PRECISION = 1024

# Φ_ℓ(X, Y) の係数 {(i, j): c}。対称なので i ≥ j の項だけ書いて展開する。
_PHI2_HALF = {
    (3, 0): 1,
    (2, 2): -1,
    (2, 1): 1488,
    (2, 0): -162000,
    (1, 1): 40773375,
    (1, 0): 8748000000,
    (0, 0): -157464000000000,
}

_PHI3_HALF = {
    (4, 0): 1,
    (3, 3): -1,
    (3, 2): 2232,
    (3, 1): -1069956,
    (3, 0): 36864000,
    (2, 2): 2587918086,
    (2, 1): 8900222976000,
    (2, 0): 452984832000000,
    (1, 1): -770845966336000000,
    (1, 0): 1855425871872000000000,
}

# 類数 1 の CM j 不変量。超特異な種の候補として順に試す。
_CLASS_NUMBER_ONE_J = (0, 1728, -3375, 8000, -32768, 54000, 287496, -884736, -12288000, 16581375, -884736000,
                       -147197952000, -262537412640768000)


def _symmetrize(half: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    full = {}
    for (i, j), c in half.items():
        full[(i, j)] = c
        full[(j, i)] = c
    return full


_PHI = {2: _symmetrize(_PHI2_HALF), 3: _symmetrize(_PHI3_HALF)}


def modular_polynomial(ell: int) -> dict[tuple[int, int], int]:
    """古典的モジュラー多項式 Φ_ℓ(X, Y) を {(i, j): 係数} で返す。

    Raises
    ------
    UnsupportedEll
        ℓ ∉ {2, 3}。
    """
    if ell not in _PHI:
        raise UnsupportedEll(f"modular polynomial for ell={ell} is not shipped")
    return dict(_PHI[ell])


def phi_specialize(ell: int, j: Fp2Elem) -> Poly:
    """Φ_ℓ(j, Y) を Y の多項式（定数項が先頭）として返す。"""
    phi = modular_polynomial(ell)
    fld = j.field
    coeffs = [fld.zero] * (ell + 2)
    for (i, k), c in phi.items():
        coeffs[k] = coeffs[k] + (j**i) * c
    return poly_trim(coeffs)


def phi_eval(ell: int, x: Fp2Elem, y: Fp2Elem) -> Fp2Elem:
    return poly_eval(phi_specialize(ell, x), y)


# --- supersingularity -------------------------------------------------------


def curve_model(j: Fp2Elem) -> tuple[Fp2Elem, Fp2Elem]:
    """j 不変量 j をもつ y² = x³ + Ax + B の (A, B)。"""
    fld = j.field
    if not j:
        return fld.zero, fld.one
    if j == fld(1728):
        return fld.one, fld.zero
    k = 1728 - j
    return 3 * j * k, 2 * j * k * k


def hasse_invariant(j: Fp2Elem) -> Fp2Elem:
    """(x³ + Ax + B)^{(p−1)/2} の x^{p−1} の係数。"""
    p = j.field.p
    a_coef, b_coef = curve_model(j)
    k = (p - 1) // 2
    total = j.field.zero
    # x^{3a} (Ax)^b B^c で 3a + b = p − 1、a + b + c = k
    for a in range(0, (p - 1) // 3 + 1):
        b = p - 1 - 3 * a
        c = k - a - b
        if b < 0 or c < 0:
            continue
        multinomial = math.comb(k, a) * math.comb(k - a, b) % p
        total = total + (a_coef**b) * (b_coef**c) * multinomial
    return total


def is_supersingular(j: Fp2Elem) -> bool:
    return not hasse_invariant(j)


def expected_supersingular_count(p: int) -> int:
    return p // 12 + {1: 0, 5: 1, 7: 1, 11: 2}[p % 12]


def supersingular_seed(fld: Fp2) -> Fp2Elem:
    """超特異 j 不変量を一つ見つける。"""
    for value in _CLASS_NUMBER_ONE_J:
        j = fld(value)
        if is_supersingular(j):
            return j
    for value in range(fld.p):
        j = fld(value)
        if is_supersingular(j):
            return j
    raise ArithmeticError(f"no supersingular j-invariant found in F_{fld.p}")


def _check_prime(p: int) -> None:
    if p < 5 or not isprime(p):
        raise ParameterError(f"p must be a prime ≥ 5, got {p}")


def supersingular_j_list(p: int) -> list[Fp2Elem]:
    """F_{p²} 上の超特異 j 不変量をすべてラベル順で返す。

    種から 2 同種グラフを幅優先探索し、各頂点を Hasse 不変量で検証する。
    """
    _check_prime(p)
    fld = Fp2(p)
    seed = supersingular_seed(fld)
    seen = {seed}
    queue = deque([seed])
    while queue:
        j = queue.popleft()
        for nbr, _ in poly_roots(phi_specialize(2, j)):
            if nbr not in seen:
                seen.add(nbr)
                queue.append(nbr)
    vertices = sorted(seen)
    if not all(is_supersingular(j) for j in vertices):
        raise ArithmeticError("isogeny walk left the supersingular locus")
    expected = expected_supersingular_count(p)
    if len(vertices) != expected:
        raise ArithmeticError(f"found {len(vertices)} supersingular invariants, expected {expected}")
    return vertices


# --- graphs -----------------------------------------------------------------


@dataclass(frozen=True)
class IsogenyGraph:
    """超特異 ℓ 同種グラフ。``adjacency[j]`` は重複度込みの隣接頂点（ラベル順）。"""

    p: int
    ell: int
    vertices: tuple[Fp2Elem, ...]
    adjacency: dict[Fp2Elem, tuple[Fp2Elem, ...]]

    def __hash__(self) -> int:
        return hash((self.p, self.ell, self.vertices))

    @property
    def field(self) -> Fp2:
        return self.vertices[0].field

    def neighbors(self, j: Fp2Elem) -> tuple[Fp2Elem, ...]:
        return self.adjacency[j]

    def distinct_neighbors(self, j: Fp2Elem) -> list[Fp2Elem]:
        return sorted(set(self.adjacency[j]))

    def is_adjacent(self, u: Fp2Elem, v: Fp2Elem) -> bool:
        return v in self.adjacency.get(u, ())

    def directed_edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency.values())

    def edge_list(self) -> list[tuple[Fp2Elem, Fp2Elem, int]]:
        """無向辺 (u, v, 重複度)、u ≤ v。重複度は u 側の数え方。"""
        out = []
        for u in self.vertices:
            for v in self.distinct_neighbors(u):
                if u <= v:
                    out.append((u, v, self.adjacency[u].count(v)))
        return out

    def bfs_tree(self, root: Fp2Elem | None = None) -> dict[Fp2Elem, Fp2Elem | None]:
        """最小ラベルの頂点を根とする幅優先全域木（親へのポインタ）。"""
        root = self.vertices[0] if root is None else root
        parent: dict[Fp2Elem, Fp2Elem | None] = {root: None}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in self.distinct_neighbors(u):
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        return parent

    def diameter(self) -> int:
        best = 0
        for root in self.vertices:
            dist = {root: 0}
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v in self.distinct_neighbors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            if len(dist) < len(self.vertices):
                raise DisconnectedComponent("graph is not connected")
            best = max(best, *dist.values())
        return best

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "l": self.ell,
            "vertices": [v.to_json() for v in self.vertices],
            "adjacency": [[n.to_json() for n in self.adjacency[v]] for v in self.vertices],
        }


def _neighbors(ell: int, j: Fp2Elem) -> tuple[Fp2Elem, ...]:
    out: list[Fp2Elem] = []
    for root, mult in poly_roots(phi_specialize(ell, j)):
        out.extend([root] * mult)
    return tuple(out)


def build_graph(p: int, ell: int, threads: int = 1) -> IsogenyGraph:
    """Φ_ℓ(j, Y) の F_{p²} 内の根を隣接頂点とするグラフを作る。"""
    _check_prime(p)
    if ell == p:
        raise ParameterError(f"ell={ell} must differ from p")
    modular_polynomial(ell)
    vertices = tuple(supersingular_j_list(p))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            neighbor_lists = list(pool.map(lambda j: _neighbors(ell, j), vertices))
    else:
        neighbor_lists = [_neighbors(ell, j) for j in vertices]
    adjacency = dict(zip(vertices, neighbor_lists, strict=True))
    for j, nbrs in adjacency.items():
        if len(nbrs) != ell + 1:
            raise ArithmeticError(f"vertex {j} has {len(nbrs)} neighbors, expected {ell + 1}")
    return IsogenyGraph(p, ell, vertices, adjacency)


# --- CM reduction -----------------------------------------------------------


@dataclass(frozen=True)
class CMWalk:
    """CM j 不変量の還元列と、それぞれに対応する形式類。"""

    vertices: tuple[Fp2Elem, ...]
    forms: tuple[QuadForm, ...]

    def to_json(self) -> dict:
        return {"vertices": [v.to_json() for v in self.vertices], "forms": [f.to_json() for f in self.forms]}


def _simple_roots(coeffs: list[int], disc: int, p: int) -> list[Fp2Elem]:
    fld = Fp2(p)
    h = poly_from_ints(coeffs, fld)
    deriv = poly_trim([c * k for k, c in enumerate(h)][1:])
    if len(poly_gcd(h, deriv)) > 1:
        raise RamifiedOrInert(f"Hilbert class polynomial of {disc} has repeated roots mod {p}")
    roots = poly_roots(h)
    if sum(m for _, m in roots) != len(h) - 1:
        raise RamifiedOrInert(f"Hilbert class polynomial of {disc} does not split over F_{p}^2")
    return [r for r, _ in roots]


def reduced_hilbert_roots(disc: int, p: int, max_abs_disc: int = DEFAULT_MAX_ABS_DISC) -> list[Fp2Elem]:
    """H_Δ mod p の F_{p²} 内の根（単根であることを検査する）。"""
    return _simple_roots(hilbert_class_poly_auto(disc, max_abs_disc=max_abs_disc), disc, p)


def _lifted_phi_table(ell: int, lifts: Sequence[LiftElem]) -> list[list[int]]:
    """Φ_ℓ(J_r, J_s) ≡ 0 (mod p^k) となる s の添字を r ごとに並べる。"""
    phi = modular_polynomial(ell)
    powers = [[x**i for i in range(ell + 2)] for x in lifts]
    table = []
    for xr in powers:
        row = []
        for s, xs in enumerate(powers):
            value = sum((xr[i] * xs[k] * c for (i, k), c in phi.items()), lifts[0].ring.zero)
            if not value:
                row.append(s)
        table.append(row)
    return table


def horizontal_adjacency(
    coeffs: list[int], roots: Sequence[Fp2Elem], ell: int, degree: int, precision: int = DEFAULT_LIFT_PRECISION
) -> list[list[int]]:
    """H_Δ の根を W(F_{p²}) に持ち上げ、その上で Φ_ℓ が消える組だけを辺とする。

    mod p では無関係な CM 点どうしが偶然 ℓ 隣接することがあるが、持ち上げた根の上では
    Φ_ℓ(j(𝔞), j(𝔟)) = 0 は 𝔟 = 𝔞𝔩^{±1} のときに限る。どの根の次数も degree になるまで
    精度を倍にする。

    Raises
    ------
    PrecisionExhausted
        MAX_LIFT_PRECISION 桁でも余分な隣接が消えない。
    """
    p = roots[0].field.p
    k = precision
    while k <= MAX_LIFT_PRECISION:
        ring = GaloisRing(p, k)
        table = _lifted_phi_table(ell, [hensel_lift(coeffs, r, ring) for r in roots])
        if all(len(row) == degree for row in table):
            return table
        k *= 2
    raise PrecisionExhausted(f"spurious {ell}-adjacencies survive at {p}^{MAX_LIFT_PRECISION}")


def cm_reduction_walk(
    disc: int,
    p: int,
    ell: int,
    steps: int,
    max_abs_disc: int = DEFAULT_MAX_ABS_DISC,
    precision: int = DEFAULT_LIFT_PRECISION,
) -> CMWalk:
    """ノルム ℓ の素形式を steps 回作用させた CM j 不変量の mod p 還元列。

    主形式には H_Δ mod p の最小ラベルの根を割り当てる。最初の一歩で 𝔩 と 𝔩̄ のどちらに
    最小ラベルの隣接根を割り当てるかは複素共役の自由度で、以降は後戻りしない隣接根が
    一意に決まる。各形式類は自分の根をひとつだけ受け取る。

    Raises
    ------
    ParameterError
        steps が負。
    RamifiedOrInert
        p が惰性でない、ℓ が分解しない、または H_Δ が mod p で重根をもつ。
    """
    if steps < 0:
        raise ParameterError(f"steps must be non-negative, got {steps}")
    check_discriminant(disc)
    _check_prime(p)
    modular_polynomial(ell)
    if disc % p == 0 or legendre_symbol(disc % p, p) != -1:
        raise RamifiedOrInert(f"p={p} is not inert in Q(sqrt({disc}))")
    step_form = prime_form(disc, ell)
    if step_form is None or disc % ell == 0:
        raise RamifiedOrInert(f"ell={ell} does not split in the order of discriminant {disc}")

    coeffs = hilbert_class_poly_auto(disc, max_abs_disc=max_abs_disc)
    roots = _simple_roots(coeffs, disc, p)
    degree = len({step_form, inverse_form(step_form)})
    adjacency = horizontal_adjacency(coeffs, roots, ell, degree, precision)

    form = principal_form(disc)
    assigned: dict[QuadForm, int] = {form: 0}
    path = [0]
    forms = [form]
    for _ in range(steps):
        cur = path[-1]
        form = compose(form, step_form)
        if form not in assigned:
            previous = path[-2] if len(path) > 1 else None
            forward = [s for s in adjacency[cur] if s != previous]
            assigned[form] = min(forward or adjacency[cur])
        path.append(assigned[form])
        forms.append(form)
    return CMWalk(tuple(roots[i] for i in path), tuple(forms))


# --- cycles -----------------------------------------------------------------


@dataclass(frozen=True)
class GraphCycle:
    """基点から出て基点へ戻る閉じた歩行（頂点列、先頭と末尾は基点）。"""

    basepoint: Fp2Elem
    vertices: tuple[Fp2Elem, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1] == self.basepoint

    def edges(self) -> list[tuple[Fp2Elem, Fp2Elem]]:
        return list(zip(self.vertices, self.vertices[1:], strict=False))

    def to_json(self) -> dict:
        return {"basepoint": self.basepoint.to_json(), "vertices": [v.to_json() for v in self.vertices]}


def _route_to_root(parent: dict[Fp2Elem, Fp2Elem | None], v: Fp2Elem) -> list[Fp2Elem]:
    route = [v]
    while parent[route[-1]] is not None:
        route.append(parent[route[-1]])
    return route


def tree_route(parent: dict[Fp2Elem, Fp2Elem | None], a: Fp2Elem, b: Fp2Elem) -> list[Fp2Elem]:
    """全域木の中の a から b への唯一の経路。"""
    up_a = _route_to_root(parent, a)
    up_b = _route_to_root(parent, b)
    on_b = set(up_b)
    meet = next(v for v in up_a if v in on_b)
    head = up_a[: up_a.index(meet) + 1]
    tail = up_b[: up_b.index(meet)]
    return head + tail[::-1]


def reduce_walk(vertices: Sequence[Fp2Elem]) -> list[Fp2Elem]:
    """u → v → u の即時後戻りを取り除く。"""
    stack: list[Fp2Elem] = []
    for v in vertices:
        if len(stack) >= 2 and stack[-2] == v:
            stack.pop()
        else:
            stack.append(v)
    return stack


def cycle_from_path(g: IsogenyGraph, path: Sequence[Fp2Elem]) -> GraphCycle:
    """経路の終点から始点へ全域木の経路を継ぎ足して閉路にする。

    Raises
    ------
    DisconnectedComponent
        経路の頂点が木の根と同じ連結成分にない。
    """
    if not path:
        raise ValueError("empty path")
    for u, v in zip(path, path[1:], strict=False):
        if not g.is_adjacent(u, v):
            raise ValueError(f"{u} and {v} are not {g.ell}-isogenous")
    parent = g.bfs_tree()
    for v in (path[0], path[-1]):
        if v not in parent:
            raise DisconnectedComponent(f"vertex {v} is not reachable from the tree root")
    closing = tree_route(parent, path[-1], path[0])
    walk = reduce_walk(list(path) + closing[1:])
    return GraphCycle(path[0], tuple(walk))


def cycle_basis_edges(g: IsogenyGraph) -> list[tuple[Fp2Elem, Fp2Elem]]:
    """全域木に含まれない無向辺（頂点対）。閉路座標の基底の添字になる。"""
    parent = g.bfs_tree()
    tree = {(min(v, u), max(v, u)) for v, u in parent.items() if u is not None}
    return [(u, v) for u, v, _ in g.edge_list() if (u, v) not in tree]


def cycle_coordinates(g: IsogenyGraph, cycle: GraphCycle) -> tuple[int, ...]:
    """非木辺ごとの巻き数。

    小さいラベルから大きいラベルへ通る回数から逆向きの回数を引く。
    自己ループは通るたびに +1。平行辺は頂点対で同一視する。
    """
    basis = cycle_basis_edges(g)
    index = {e: i for i, e in enumerate(basis)}
    coords = [0] * len(basis)
    for u, v in cycle.edges():
        key = (min(u, v), max(u, v))
        if key in index:
            coords[index[key]] += 1 if u <= v else -1
    return tuple(coords)
