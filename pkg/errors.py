"""msi-forge の例外階層。"""

from __future__ import annotations


class MsiForgeError(Exception):
    """ドメインエラーの基底クラス。CLI はこれを捕捉して終了コード 1 を返す。"""


class ParameterError(MsiForgeError, ValueError):
    """パラメータファイルまたはコマンドライン引数の不整合。ValueError としても捕捉できる。"""


# quadratic
class InvalidDiscriminant(MsiForgeError):
    pass


class NotPositiveDefinite(MsiForgeError):
    pass


class DiscriminantMismatch(MsiForgeError):
    pass


class FactorBaseInsufficient(MsiForgeError):
    pass


class PrecisionExhausted(MsiForgeError):
    """丸め残差が閾値を超えた、または p 進の持ち上げの桁数が足りない。より高い精度で再試行すること。"""


# modsym
class UnsupportedHeckeField(MsiForgeError):
    """有理数体上で分解しない固有値系を検出した。"""


class DiscriminantLevelClash(MsiForgeError):
    pass


# padic
class DivisionByIndeterminate(MsiForgeError):
    """除数が現在の精度でゼロと区別できない。"""


class NonUnitLinearTerm(MsiForgeError):
    pass


class SingularRoot(MsiForgeError):
    pass


# coleman
class MissingEigenvalue(MsiForgeError):
    pass


class OutOfDisc(MsiForgeError):
    pass


class NonUnitNormalizer(MsiForgeError):
    pass


class DenominatorNotUnit(MsiForgeError):
    """双対汎関数の分母が ℓ で割り切れる。別の ℓ を選ぶこと。"""


# ssgraph
class UnsupportedEll(MsiForgeError):
    pass


class RamifiedOrInert(MsiForgeError):
    pass


class DisconnectedComponent(MsiForgeError):
    pass


# msi
class EmptyModel(MsiForgeError):
    pass


class WorkCapExceeded(MsiForgeError):
    """探索ノード数が上限を超えた。黙って打ち切ることはしない。"""


# protocol
class NormBoundExceeded(MsiForgeError):
    pass


class ChallengeCollision(MsiForgeError):
    pass


class ExtractionFailed(MsiForgeError):
    pass


class ExperimentalFeature(MsiForgeError):
    pass
