"""MSI に基づく識別用シグマプロトコルと PRF。

応答は生成元空間の座標（各生成元の使用回数）で表し、𝒲_{L'} を ℓ1 球
‖resp‖₁ ≤ L' = L·q_ch に緩めている。検証は A·G·resp ≡ t + c·pk (mod ℓ^m)。

転送形式（すべて big-endian）::

    transcript := field(t) field(c) field(response)
    field(x)   := u32 len(x) || x
    t          := period_vector_bytes(t)
    c          := 符号なし整数（最小長、0 は長さ 0）
    response   := u32 個数 || 各座標 field(符号付き 2 の補数、最小長)

    period_vector_bytes(v) := u32 ℓ || u32 m || u32 d || 各成分 field(剰余、最小長)
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from coleman import FormId, PeriodMatrix, PeriodVector
from errors import ChallengeCollision, EmptyModel, ExperimentalFeature, ExtractionFailed, NormBoundExceeded
from msi import Path, PathModel, Seed, derive_seed, evaluate_path, make_rng, path_counts, sample_path

DEFAULT_CHALLENGE_SPACE = 2
MAX_COMMIT_ATTEMPTS = 64


def response_bound(L: int, challenge_space: int = DEFAULT_CHALLENGE_SPACE) -> int:
    """L' = L·(1 + q_ch − 1)。"""
    return L * challenge_space


@dataclass(frozen=True)
class KeyPair:
    sk: Path
    pk: PeriodVector

    def public(self) -> dict:
        return {"pk": self.pk.to_json()}

    def to_json(self) -> dict:
        return {"sk": list(self.sk), "pk": self.pk.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> KeyPair:
        return cls(tuple(data["sk"]), PeriodVector.from_json(data["pk"]))


@dataclass(frozen=True)
class Transcript:
    commitment: PeriodVector
    challenge: int
    response: tuple[int, ...]

    def to_json(self) -> dict:
        return {"t": self.commitment.to_json(), "c": self.challenge, "response": list(self.response)}

    @classmethod
    def from_json(cls, data: dict) -> Transcript:
        return cls(PeriodVector.from_json(data["t"]), int(data["c"]), tuple(int(x) for x in data["response"]))


def keygen(model: PathModel, A: PeriodMatrix, seed: Seed) -> KeyPair:
    """秘密鍵 γ_sk ∈ 𝒲_L を一様ランダムウォークで引き、pk = Π_m(γ_sk) とする。"""
    sk = sample_path(model, make_rng(seed, "protocol/keygen"))
    return KeyPair(sk, evaluate_path(model, A, sk))


def commit(model: PathModel, A: PeriodMatrix, seed: Seed, attempt: int = 0) -> tuple[Path, PeriodVector]:
    """γ_com を引いて t = Π_m(γ_com) を返す。"""
    gamma = sample_path(model, make_rng(seed, f"protocol/commit/{attempt}"))
    return gamma, evaluate_path(model, A, gamma)


def respond(model: PathModel, sk: Path, gamma_com: Path, challenge: int, bound: int) -> tuple[int, ...]:
    """coords(γ_com) + c·coords(γ_sk)。

    Raises
    ------
    NormBoundExceeded
        ℓ1 ノルムが bound を超える。
    """
    com = path_counts(model, gamma_com)
    key = path_counts(model, sk)
    response = tuple(a + challenge * b for a, b in zip(com, key, strict=True))
    norm = sum(abs(x) for x in response)
    if norm > bound:
        raise NormBoundExceeded(f"response norm {norm} exceeds {bound}")
    return response


def prove_round(
    model: PathModel,
    A: PeriodMatrix,
    sk: Path,
    seed: Seed,
    challenge: int,
    challenge_space: int = DEFAULT_CHALLENGE_SPACE,
) -> Transcript:
    """一回分の (t, c, resp)。ノルム超過なら γ_com を引き直す。"""
    if not 0 <= challenge < challenge_space:
        raise ValueError(f"challenge {challenge} outside [0, {challenge_space})")
    bound = response_bound(model.L, challenge_space)
    for attempt in range(MAX_COMMIT_ATTEMPTS):
        gamma_com, t = commit(model, A, seed, attempt)
        try:
            response = respond(model, sk, gamma_com, challenge, bound)
        except NormBoundExceeded:
            continue
        return Transcript(t, challenge, response)
    raise NormBoundExceeded(f"no commitment within the norm bound after {MAX_COMMIT_ATTEMPTS} attempts")


def _check_response(response: Sequence[int], generator_matrix: PeriodMatrix, bound: int) -> bool:
    return len(response) == generator_matrix.ncols and sum(abs(x) for x in response) <= bound


def verify(
    commitment: PeriodVector,
    challenge: int,
    response: Sequence[int],
    pk: PeriodVector,
    generator_matrix: PeriodMatrix,
    bound: int,
) -> bool:
    """‖resp‖₁ ≤ L' かつ A·G·resp ≡ t + c·pk。

    Parameters
    ----------
    generator_matrix : PeriodMatrix
        生成元空間から (Z/ℓ^m)^d への行列 A·G（``msi.generator_matrix``）。
    bound : int
        ℓ1 上限 L'。
    """
    if not _check_response(response, generator_matrix, bound):
        return False
    mod = generator_matrix.modulus
    lhs = generator_matrix.apply(response)
    rhs = tuple((t + challenge * y) % mod for t, y in zip(commitment.residues(), pk.residues(), strict=True))
    return lhs == rhs


def verify_transcript(tr: Transcript, pk: PeriodVector, generator_matrix: PeriodMatrix, bound: int) -> bool:
    return verify(tr.commitment, tr.challenge, tr.response, pk, generator_matrix, bound)


def extract(
    first: Transcript,
    second: Transcript,
    pk: PeriodVector | None = None,
    generator_matrix: PeriodMatrix | None = None,
) -> tuple[int, ...]:
    """同じ t に対する二つの受理トランスクリプトから x を取り出す。

    x = (resp − resp′)/(c − c′)。

    Raises
    ------
    ChallengeCollision
        c = c′。
    ExtractionFailed
        t が異なる、割り切れない、または得られた x が A·G·x ≡ pk を満たさない。
    """
    if first.challenge == second.challenge:
        raise ChallengeCollision(f"both transcripts use challenge {first.challenge}")
    if first.commitment.residues() != second.commitment.residues():
        raise ExtractionFailed("transcripts do not share a commitment")
    dc = first.challenge - second.challenge
    diff = [a - b for a, b in zip(first.response, second.response, strict=True)]
    if any(x % dc for x in diff):
        raise ExtractionFailed(f"response difference is not divisible by {dc}")
    x = tuple(v // dc for v in diff)
    if pk is not None and generator_matrix is not None and generator_matrix.apply(x) != pk.residues():
        raise ExtractionFailed("extracted vector does not open the public key")
    return x


def simulate(
    pk: PeriodVector,
    generator_matrix: PeriodMatrix,
    model: PathModel,
    challenge: int,
    seed: Seed,
) -> Transcript:
    """秘密鍵なしで受理されるトランスクリプトを作る（応答を先に引く）。

    応答は正直な応答と同じ形 coords(w₁) + c·coords(w₂) で、w₁, w₂ は同じ歩行で引く。
    """
    rng = make_rng(seed, "protocol/commit/0")
    w1 = sample_path(model, rng)
    w2 = sample_path(model, make_rng(seed, "protocol/simulate"))
    response = tuple(a + challenge * b for a, b in zip(path_counts(model, w1), path_counts(model, w2), strict=True))
    mod = generator_matrix.modulus
    image = generator_matrix.apply(response)
    t = tuple((v - challenge * y) % mod for v, y in zip(image, pk.residues(), strict=True))
    return Transcript(PeriodVector.from_residues(pk.prime, pk.precision, t, pk.form_ids), challenge, response)


# --- multi-round identification ---------------------------------------------


@dataclass(frozen=True)
class IdentificationReport:
    accepted: bool
    transcripts: tuple[Transcript, ...]
    verdicts: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "rounds": len(self.transcripts),
            "verdicts": list(self.verdicts),
            "transcripts": [t.to_json() for t in self.transcripts],
        }


def identify(
    model: PathModel,
    A: PeriodMatrix,
    generator_matrix: PeriodMatrix,
    keypair: KeyPair,
    rounds: int,
    seed: Seed,
    challenge_space: int = DEFAULT_CHALLENGE_SPACE,
    threads: int = 1,
) -> IdentificationReport:
    """τ 回の独立な正直ラウンドを実行して全部受理されたかを返す。"""
    bound = response_bound(model.L, challenge_space)

    def one(i: int) -> tuple[Transcript, bool]:
        c = make_rng(seed, f"protocol/challenge/{i}").randrange(challenge_space)
        tr = prove_round(model, A, keypair.sk, derive_seed(seed, f"round/{i}"), c, challenge_space)
        return tr, verify_transcript(tr, keypair.pk, generator_matrix, bound)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(rounds)))
    else:
        results = [one(i) for i in range(rounds)]
    verdicts = tuple(ok for _, ok in results)
    return IdentificationReport(all(verdicts), tuple(tr for tr, _ in results), verdicts)


# --- serialization ----------------------------------------------------------


def _field(payload: bytes) -> bytes:
    return struct.pack(">I", len(payload)) + payload


def _unsigned(n: int) -> bytes:
    return n.to_bytes((n.bit_length() + 7) // 8, "big")


def _signed(n: int) -> bytes:
    if n == 0:
        return b""
    return n.to_bytes((n.bit_length() + 8) // 8, "big", signed=True)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def u32(self) -> int:
        if self.pos + 4 > len(self.data):
            raise ValueError("truncated input")
        (value,) = struct.unpack_from(">I", self.data, self.pos)
        self.pos += 4
        return value

    def field(self) -> bytes:
        n = self.u32()
        if self.pos + n > len(self.data):
            raise ValueError("truncated field")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def done(self) -> bool:
        return self.pos == len(self.data)


def period_vector_bytes(v: PeriodVector) -> bytes:
    """PRF と転送形式で使う PeriodVector の正準バイト列。"""
    head = struct.pack(">III", v.prime, v.precision, len(v.entries))
    return head + b"".join(_field(_unsigned(r)) for r in v.residues())


def period_vector_from_bytes(data: bytes, form_ids: Sequence[FormId] | None = None) -> PeriodVector:
    reader = _Reader(data)
    ell, m, d = reader.u32(), reader.u32(), reader.u32()
    residues = [int.from_bytes(reader.field(), "big") for _ in range(d)]
    if not reader.done():
        raise ValueError("trailing bytes after period vector")
    labels = list(form_ids) if form_ids is not None else [(0, i, 1) for i in range(d)]
    return PeriodVector.from_residues(ell, m, residues, labels)


def encode_transcript(tr: Transcript) -> bytes:
    response = struct.pack(">I", len(tr.response)) + b"".join(_field(_signed(x)) for x in tr.response)
    return _field(period_vector_bytes(tr.commitment)) + _field(_unsigned(tr.challenge)) + _field(response)


def decode_transcript(data: bytes, form_ids: Sequence[FormId] | None = None) -> Transcript:
    reader = _Reader(data)
    t = period_vector_from_bytes(reader.field(), form_ids)
    c = int.from_bytes(reader.field(), "big")
    body = _Reader(reader.field())
    if not reader.done():
        raise ValueError("trailing bytes after transcript")
    count = body.u32()
    response = tuple(int.from_bytes(body.field(), "big", signed=True) for _ in range(count))
    if not body.done():
        raise ValueError("trailing bytes in response field")
    return Transcript(t, c, response)


# --- PRF --------------------------------------------------------------------


def word_base(model: PathModel) -> int:
    """入力を読むときの基数（どの段でも選べる生成元の最小数）。"""
    base = min(len(model.initial), *(len(s) for s in model.successors))
    if base < 2:
        raise EmptyModel("path model branches too little to encode input words")
    return base


def input_word(model: PathModel, x: bytes, after: int | None = None) -> Path:
    """x を基数 B の固定長の数字列として読み、生成元の語に変える。

    桁数は B^k ≥ 256^len(x) を満たす最小の k。各桁 δ は直前の生成元の後続候補の
    δ mod 候補数 番目を選ぶ。
    """
    base = word_base(model)
    limit = 256 ** len(x)
    k = 0
    while base**k < limit:
        k += 1
    value = int.from_bytes(x, "big")
    digits = []
    for _ in range(k):
        value, r = divmod(value, base)
        digits.append(r)
    digits.reverse()
    word: list[int] = []
    prev = after
    for digit in digits:
        options = model.initial if prev is None else model.successors[prev]
        prev = options[digit % len(options)]
        word.append(prev)
    return tuple(word)


def prf_eval(sk: Path, x: bytes, model: PathModel, A: PeriodMatrix) -> bytes:
    """F_sk(x) = SHA-256(period_vector_bytes(Π_m(sk ‖ γ_x)))。

    連結した経路の値は生成元の使用回数で決まり、Π_m は ℓ^m を法とするので
    回数を ℓ^m で簡約しても出力は変わらない。
    """
    word = input_word(model, x, sk[-1] if sk else None)
    counts = [
        (a + b) % A.modulus for a, b in zip(path_counts(model, sk), path_counts(model, word), strict=True)
    ]
    value = [0] * model.dimension
    for i, c in enumerate(counts):
        if c:
            value = [v + c * g for v, g in zip(value, model.generators[i], strict=True)]
    return hashlib.sha256(period_vector_bytes(A.vector(value))).digest()


# --- Fiat–Shamir (experimental) ---------------------------------------------


def fiat_shamir_challenges(
    commitments: Sequence[PeriodVector], pk: PeriodVector, message: bytes, challenge_space: int
) -> list[int]:
    """転送履歴のローリングハッシュから各ラウンドのチャレンジを導く。"""
    cache = hashlib.sha256(b"msi-forge/fiat-shamir").digest()
    for item in (period_vector_bytes(pk), message, *(period_vector_bytes(t) for t in commitments)):
        cache = hashlib.sha256(cache + _field(item)).digest()
    out = []
    for i in range(len(commitments)):
        digest = hashlib.sha256(cache + struct.pack(">I", i)).digest()
        out.append(int.from_bytes(digest, "big") % challenge_space)
    return out


def _require_experimental(enabled: bool) -> None:
    if not enabled:
        raise ExperimentalFeature("signatures are experimental; set protocol.experimental_signatures to enable")


def sign(
    model: PathModel,
    A: PeriodMatrix,
    keypair: KeyPair,
    message: bytes,
    rounds: int,
    seed: Seed,
    challenge_space: int = DEFAULT_CHALLENGE_SPACE,
    experimental: bool = False,
) -> list[Transcript]:
    """Fiat–Shamir 変換した τ ラウンドの署名（実験的）。"""
    _require_experimental(experimental)
    bound = response_bound(model.L, challenge_space)
    commits = [commit(model, A, derive_seed(seed, f"round/{i}")) for i in range(rounds)]
    challenges = fiat_shamir_challenges([t for _, t in commits], keypair.pk, message, challenge_space)
    return [
        Transcript(t, c, respond(model, keypair.sk, gamma, c, bound))
        for (gamma, t), c in zip(commits, challenges, strict=True)
    ]


def verify_signature(
    signature: Sequence[Transcript],
    pk: PeriodVector,
    generator_matrix: PeriodMatrix,
    message: bytes,
    L: int,
    challenge_space: int = DEFAULT_CHALLENGE_SPACE,
    experimental: bool = False,
) -> bool:
    _require_experimental(experimental)
    expected = fiat_shamir_challenges([tr.commitment for tr in signature], pk, message, challenge_space)
    bound = response_bound(L, challenge_space)
    return all(
        tr.challenge == c and verify_transcript(tr, pk, generator_matrix, bound)
        for tr, c in zip(signature, expected, strict=True)
    )
