"""経路モデル 𝒲_L、MSI インスタンスの生成、求解器、衝突実験、パラメータ検査。"""

from __future__ import annotations

import hashlib
import random
import sys
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from coleman import PeriodMatrix, PeriodVector
from errors import EmptyModel, ParameterError, WorkCapExceeded
from linalg import LinearSolutionSet, solve_mod_prime_power
from modsym import ManinBasis
from ssgraph import IsogenyGraph

DEFAULT_WORK_CAP = 1 << 24

Path = tuple[int, ...]
Seed = int | str | bytes


# --- seeds ------------------------------------------------------------------


def seed_bytes(seed: Seed) -> bytes:
    """16 進文字列・整数・バイト列の seed をバイト列に正規化する。"""
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    try:
        return bytes.fromhex(seed)
    except ValueError:
        return seed.encode()


def derive_seed(seed: Seed, label: str) -> bytes:
    """親 seed とラベルから独立な子 seed を作る（SHA-256）。"""
    return hashlib.sha256(seed_bytes(seed) + b"/" + label.encode()).digest()


def make_rng(seed: Seed, label: str) -> random.Random:
    return random.Random(derive_seed(seed, label))


# --- path model -------------------------------------------------------------


@dataclass(frozen=True)
class PathModel:
    """生成元集合 S と、どの生成元の後にどれが続けるかの関係。

    ``generators[i]`` は値空間（manin モードではホモロジー座標、graph モードでは
    無向辺の鎖空間）での σᵢ の座標。
    """

    generators: tuple[tuple[int, ...], ...]
    successors: tuple[tuple[int, ...], ...]
    initial: tuple[int, ...]
    L: int
    mode: str
    labels: tuple[str, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.generators)

    @property
    def dimension(self) -> int:
        return len(self.generators[0])

    @property
    def branching(self) -> Fraction:
        """B = 有効関係の平均出次数。"""
        return Fraction(sum(len(s) for s in self.successors), self.size)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "L": self.L,
            "B": str(self.branching),
            "generators": [list(g) for g in self.generators],
            "successors": [list(s) for s in self.successors],
            "initial": list(self.initial),
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, data: dict) -> PathModel:
        return cls(
            generators=tuple(tuple(g) for g in data["generators"]),
            successors=tuple(tuple(s) for s in data["successors"]),
            initial=tuple(data["initial"]),
            L=int(data["L"]),
            mode=data["mode"],
            labels=tuple(data.get("labels", ())),
        )


def _manin_model(basis: ManinBasis, L: int) -> PathModel:
    r = basis.rank
    gens = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    everything = tuple(range(r))
    labels = tuple(f"({basis.symbols[k][0]}:{basis.symbols[k][1]})" for k in basis.free_symbols)
    return PathModel(gens, tuple(everything for _ in range(r)), everything, L, "manin", labels)


def _graph_model(graph: IsogenyGraph, L: int) -> PathModel:
    pairs = [(u, v) for u, v, _ in graph.edge_list()]
    index = {pair: k for k, pair in enumerate(pairs)}
    directed: list[tuple[object, object]] = []
    gens: list[tuple[int, ...]] = []
    for u in graph.vertices:
        for v in graph.neighbors(u):
            key = (min(u, v), max(u, v))
            vec = [0] * len(pairs)
            vec[index[key]] = 1 if u <= v else -1
            directed.append((u, v))
            gens.append(tuple(vec))
    by_tail: dict[object, list[int]] = {}
    for k, (u, _) in enumerate(directed):
        by_tail.setdefault(u, []).append(k)
    successors = tuple(tuple(by_tail.get(v, ())) for _, v in directed)
    labels = tuple(f"{u}->{v}" for u, v in directed)
    return PathModel(tuple(gens), successors, tuple(range(len(gens))), L, "graph", labels)


def build_path_model(
    mode: str, L: int, basis: ManinBasis | None = None, graph: IsogenyGraph | None = None
) -> PathModel:
    """manin モード（完全な有効関係）か graph モード（頭と尾の接続）で 𝒲_L を作る。

    Raises
    ------
    EmptyModel
        生成元がない、L が負、または途中で行き止まりになる。
    """
    if L < 0:
        raise EmptyModel("path length bound must be non-negative")
    if mode == "manin":
        if basis is None:
            raise EmptyModel("manin mode needs a Manin basis")
        model = _manin_model(basis, L)
    elif mode == "graph":
        if graph is None:
            raise EmptyModel("graph mode needs an isogeny graph")
        model = _graph_model(graph, L)
    else:
        raise ValueError(f"unknown path model mode: {mode}")
    if model.size == 0 or not model.initial:
        raise EmptyModel(f"{mode} model has no generators")
    if L > 1 and any(not s for s in model.successors):
        raise EmptyModel("some generator has no valid successor")
    return model


def is_valid_path(model: PathModel, path: Sequence[int]) -> bool:
    if len(path) > model.L:
        return False
    if not path:
        return True
    if path[0] not in model.initial:
        return False
    return all(b in model.successors[a] for a, b in zip(path, path[1:], strict=False))


def path_counts(model: PathModel, path: Sequence[int]) -> tuple[int, ...]:
    """生成元空間での座標（各生成元の出現回数）。"""
    counts = [0] * model.size
    for i in path:
        counts[i] += 1
    return tuple(counts)


def path_value(model: PathModel, path: Sequence[int]) -> tuple[int, ...]:
    """γ = Σ σ_{i_j} の値空間での座標。"""
    total = [0] * model.dimension
    for i in path:
        total = [a + b for a, b in zip(total, model.generators[i], strict=True)]
    return tuple(total)


def count_paths(model: PathModel, length: int) -> int:
    """長さちょうど length の有効な経路の数。"""
    if length == 0:
        return 1
    ending = [int(i in model.initial) for i in range(model.size)]
    for _ in range(length - 1):
        nxt = [0] * model.size
        for i, c in enumerate(ending):
            if c:
                for j in model.successors[i]:
                    nxt[j] += c
        ending = nxt
    return sum(ending)


def _count_from(model: PathModel, length: int) -> int:
    """任意の生成元から始まる長さ length の接尾辞の数。"""
    if length == 0:
        return 1
    ending = [1] * model.size
    for _ in range(length - 1):
        nxt = [0] * model.size
        for i, c in enumerate(ending):
            for j in model.successors[i]:
                nxt[j] += c
        ending = nxt
    return sum(ending)


def enumerate_paths(model: PathModel, length: int, starts: Sequence[int] | None = None) -> Iterator[Path]:
    """長さちょうど length の経路を辞書式順に列挙する。"""
    if length == 0:
        yield ()
        return
    first = model.initial if starts is None else starts
    stack: list[Path] = [(i,) for i in reversed(first)]
    while stack:
        path = stack.pop()
        if len(path) == length:
            yield path
            continue
        for j in reversed(model.successors[path[-1]]):
            stack.append((*path, j))


# --- instances --------------------------------------------------------------


@dataclass(frozen=True)
class MSIInstance:
    """Π_m(γ) = y を満たす γ ∈ 𝒲_L を探す問題。``witness`` はテスト用にのみ持つ。"""

    params: dict
    target: PeriodVector
    witness: Path | None = None

    def to_json(self, include_witness: bool = True) -> dict:
        out = {"params": dict(self.params), "y": self.target.to_json()}
        out["witness"] = list(self.witness) if include_witness and self.witness is not None else None
        return out

    @classmethod
    def from_json(cls, data: dict) -> MSIInstance:
        witness = data.get("witness")
        return cls(dict(data["params"]), PeriodVector.from_json(data["y"]), None if witness is None else tuple(witness))


def generator_matrix(model: PathModel, A: PeriodMatrix) -> PeriodMatrix:
    """A·G：生成元空間から (Z/ℓ^m)^d への行列。"""
    if A.ncols != model.dimension:
        raise ValueError(f"period matrix has {A.ncols} columns, model lives in dimension {model.dimension}")
    return A.generator_matrix(model.generators)


def evaluate_path(model: PathModel, A: PeriodMatrix, path: Sequence[int]) -> PeriodVector:
    return A.vector(path_value(model, path))


def sample_path(model: PathModel, rng: random.Random, length: int | None = None) -> Path:
    """有効関係の上の一様ランダムウォーク。"""
    length = model.L if length is None else length
    if length == 0:
        return ()
    path = [rng.choice(model.initial)]
    while len(path) < length:
        path.append(rng.choice(model.successors[path[-1]]))
    return tuple(path)


def sample_instance(model: PathModel, A: PeriodMatrix, seed: Seed, params: dict | None = None) -> MSIInstance:
    """長さちょうど L の有効な経路を seed から決定的に引き、その像を y とする。"""
    witness = sample_path(model, make_rng(seed, "msi/sample"))
    record = {
        "l": A.ell,
        "m": A.m,
        "d": A.nrows,
        "L": model.L,
        "mode": model.mode,
        "generators": model.size,
        **(params or {}),
    }
    return MSIInstance(record, evaluate_path(model, A, witness), witness)


# --- solvers ----------------------------------------------------------------


@dataclass(frozen=True)
class SolveReport:
    """求解結果と展開したノード数。"""

    method: str
    witness: Path | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "found": self.found,
            "witness": None if self.witness is None else list(self.witness),
            "nodes": self.nodes,
        }


def _columns(model: PathModel, A: PeriodMatrix) -> list[tuple[int, ...]]:
    ag = generator_matrix(model, A)
    return [tuple(row[j] for row in ag.rows) for j in range(model.size)]


def _add_mod(a: tuple[int, ...], b: tuple[int, ...], mod: int) -> tuple[int, ...]:
    return tuple((x + y) % mod for x, y in zip(a, b, strict=True))


def _sub_mod(a: tuple[int, ...], b: tuple[int, ...], mod: int) -> tuple[int, ...]:
    return tuple((x - y) % mod for x, y in zip(a, b, strict=True))


def _dfs(
    model: PathModel, cols: list[tuple[int, ...]], mod: int, target: tuple[int, ...], start: int
) -> tuple[Path | None, int]:
    nodes = 0
    stack: list[tuple[Path, tuple[int, ...]]] = [((start,), cols[start])]
    while stack:
        path, image = stack.pop()
        nodes += 1
        if image == target:
            return path, nodes
        if len(path) < model.L:
            for j in reversed(model.successors[path[-1]]):
                stack.append(((*path, j), _add_mod(image, cols[j], mod)))
    return None, nodes


def solve_bruteforce(
    inst: MSIInstance,
    model: PathModel,
    A: PeriodMatrix,
    work_cap: int = DEFAULT_WORK_CAP,
    workers: int = 1,
) -> SolveReport:
    """𝒲_L 全体を深さ優先で調べる。最初の一歩で探索空間を分割できる。

    Raises
    ------
    WorkCapExceeded
        𝒲_L の大きさが work_cap を超える。
    """
    total = sum(count_paths(model, k) for k in range(model.L + 1))
    if total > work_cap:
        raise WorkCapExceeded(f"brute force needs {total} nodes, cap is {work_cap}")
    mod = A.modulus
    target = tuple(inst.target.residues())
    if not any(target):
        return SolveReport("bruteforce", (), 1)
    if model.L == 0:
        return SolveReport("bruteforce", None, 1)
    cols = _columns(model, A)
    starts = list(model.initial)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _dfs(model, cols, mod, target, s), starts))
    else:
        results = []
        for s in starts:
            found, nodes = _dfs(model, cols, mod, target, s)
            results.append((found, nodes))
            if found is not None:
                break
    nodes = 1 + sum(n for _, n in results)
    witness = next((w for w, _ in results if w is not None), None)
    return SolveReport("bruteforce", witness, nodes)


def mitm_budget(model: PathModel) -> int:
    """接頭辞の表と接尾辞の列挙に要するノード数（突き合わせは含まない）。"""
    half_pre = (model.L + 1) // 2
    half_suf = model.L // 2
    budget = sum(count_paths(model, k) for k in range(half_pre + 1))
    return budget + sum(_count_from(model, k) for k in range(half_suf + 1))


def solve_mitm(
    inst: MSIInstance, model: PathModel, A: PeriodMatrix, work_cap: int = DEFAULT_WORK_CAP
) -> SolveReport:
    """長さ ⌈L/2⌉ 以下の接頭辞の表と、⌊L/2⌋ 以下の接尾辞の列挙を突き合わせる。

    バケット内の候補の照合も 1 ノードとして数え、合計が work_cap を超えたら止める。
    """
    half_pre = (model.L + 1) // 2
    half_suf = model.L // 2
    budget = mitm_budget(model)
    if budget > work_cap:
        raise WorkCapExceeded(f"meet-in-the-middle needs {budget} nodes, cap is {work_cap}")
    mod = A.modulus
    target = tuple(inst.target.residues())
    cols = _columns(model, A)
    zero = (0,) * A.nrows

    table: dict[tuple[int, ...], list[Path]] = {}
    nodes = 0
    for k in range(half_pre + 1):
        for prefix in enumerate_paths(model, k):
            nodes += 1
            image = zero
            for i in prefix:
                image = _add_mod(image, cols[i], mod)
            table.setdefault(image, []).append(prefix)

    for k in range(half_suf + 1):
        for suffix in enumerate_paths(model, k, starts=range(model.size)):
            nodes += 1
            image = zero
            for i in suffix:
                image = _add_mod(image, cols[i], mod)
            for prefix in table.get(_sub_mod(target, image, mod), ()):
                nodes += 1
                if nodes > work_cap:
                    raise WorkCapExceeded(f"meet-in-the-middle exceeded {work_cap} nodes while matching buckets")
                if len(prefix) + len(suffix) > model.L:
                    continue
                candidate = prefix + suffix
                if is_valid_path(model, candidate):
                    return SolveReport("mitm", candidate, nodes)
    return SolveReport("mitm", None, nodes)


def solve_linear_unconstrained(A: PeriodMatrix, y: PeriodVector | Sequence[int]) -> LinearSolutionSet:
    """A·x ≡ y (mod ℓ^m) の解集合（経路の制約なし）。"""
    target = y.residues() if isinstance(y, PeriodVector) else tuple(y)
    return solve_mod_prime_power(A.rows, target, A.ell, A.m, ncols=A.ncols)


def round_to_path(model: PathModel, x: Sequence[int]) -> Path:
    """実験的: 値空間の整数ベクトル x に貪欲に生成元を当てはめて有効な経路を作る。

    各段で残差の ℓ1 ノルムを最も減らす生成元を選び、減らなくなったら止める。
    """
    print("[WARN] round_to_path is an experimental heuristic", file=sys.stderr)
    residual = list(x)
    path: list[int] = []
    while len(path) < model.L:
        options = model.initial if not path else model.successors[path[-1]]
        current = sum(abs(a) for a in residual)
        best = None
        for i in options:
            norm = sum(abs(a - b) for a, b in zip(residual, model.generators[i], strict=True))
            if norm < current and (best is None or norm < best[0]):
                best = (norm, i)
        if best is None:
            break
        path.append(best[1])
        residual = [a - b for a, b in zip(residual, model.generators[best[1]], strict=True)]
    return tuple(path)


# --- experiments ------------------------------------------------------------


@dataclass(frozen=True)
class CollisionReport:
    paths: int
    distinct_values: int
    path_colliding_pairs: int
    colliding_pairs: int
    predicted_paths: Fraction
    predicted: Fraction
    sampled: bool

    def to_json(self) -> dict:
        return {
            "paths": self.paths,
            "distinct_values": self.distinct_values,
            "path_colliding_pairs": self.path_colliding_pairs,
            "colliding_pairs": self.colliding_pairs,
            "predicted_paths": float(self.predicted_paths),
            "predicted": float(self.predicted),
            "sampled": self.sampled,
        }


def _pairs(counter: Counter) -> int:
    return sum(c * (c - 1) // 2 for c in counter.values())


def collision_experiment(
    model: PathModel,
    A: PeriodMatrix,
    trials: int | None = None,
    seed: Seed = 0,
    work_cap: int = DEFAULT_WORK_CAP,
) -> CollisionReport:
    """長さ L の経路の像 Π_m を数え、衝突対を (#𝒲_L)²/(2ℓ^{md}) と比べる。

    ``path_colliding_pairs`` は同じ像をもつ経路の対、``colliding_pairs`` は同じ像をもつ
    相異なるホモロジー値の対（経路の並べ替えによる自明な一致を除いたもの）。
    ``trials`` を与えると全列挙の代わりにその数だけ無作為に経路を引く。
    """
    if trials is None:
        total = count_paths(model, model.L)
        if total > work_cap:
            raise WorkCapExceeded(f"{total} paths exceed the work cap {work_cap}")
        paths: Iterator[Path] | list[Path] = enumerate_paths(model, model.L)
    else:
        if trials > work_cap:
            raise WorkCapExceeded(f"{trials} trials exceed the work cap {work_cap}")
        rng = make_rng(seed, "msi/collide")
        paths = [sample_path(model, rng) for _ in range(trials)]

    by_path: Counter = Counter()
    values: dict[tuple[int, ...], tuple[int, ...]] = {}
    n = 0
    for path in paths:
        n += 1
        value = path_value(model, path)
        image = values.get(value)
        if image is None:
            image = A.apply(value)
            values[value] = image
        by_path[image] += 1
    by_value = Counter(values.values())
    space = A.modulus**A.nrows
    return CollisionReport(
        paths=n,
        distinct_values=len(values),
        path_colliding_pairs=_pairs(by_path),
        colliding_pairs=_pairs(by_value),
        predicted_paths=Fraction(n * n, 2 * space),
        predicted=Fraction(len(values) ** 2, 2 * space),
        sampled=trials is not None,
    )


@dataclass(frozen=True)
class ParameterVerdict:
    ell: int
    m: int
    d: int
    B: Fraction
    L: int
    lam: int
    search_hardness: bool
    quantum_margin: bool
    separation: bool

    def to_json(self) -> dict:
        return {
            "l": self.ell,
            "m": self.m,
            "d": self.d,
            "B": str(self.B),
            "L": self.L,
            "lambda": self.lam,
            "search_hardness": self.search_hardness,
            "quantum_margin": self.quantum_margin,
            "separation": self.separation,
        }


def parameter_check(ell: int, m: int, d: int, B: int | Fraction, L: int, lam: int) -> ParameterVerdict:
    """B^L ≥ 2^λ、B^{L/2} ≥ 2^λ、ℓ^{md} ≥ B^{2L} を整数（有理数）で厳密に比べる。"""
    if min(ell, m, d, L) < 1 or B <= 0 or lam < 0:
        raise ParameterError(f"parameters must be positive: ell={ell} m={m} d={d} B={B} L={L} lambda={lam}")
    b = Fraction(B)
    paths = b**L
    return ParameterVerdict(
        ell=ell,
        m=m,
        d=d,
        B=b,
        L=L,
        lam=lam,
        search_hardness=paths >= 2**lam,
        quantum_margin=paths >= 2 ** (2 * lam),
        separation=Fraction(ell ** (m * d)) >= paths * paths,
    )
