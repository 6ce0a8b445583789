#!/usr/bin/env python3
"""msi-forge CLI。

二次形式の類群、モジュラー記号、周期写像、超特異同種グラフ、MSI 実験、
識別プロトコルと PRF をサブコマンドとして束ねる。出力はすべて JSON で
``"schema": "msi-forge/1"`` を持ち、進捗は標準エラーへ出す。

Subcommands
-----------
- ``classgroup``: 簡約形式の一覧と Hilbert 類多項式
- ``homology``: Manin 基底の階数、Hecke 行列、固有系
- ``periods``: 切り捨て周期写像 Π_m の行列と値
- ``graph``: 超特異 ℓ 同種グラフと CM 還元の歩行
- ``msi``: ``sample`` / ``solve`` / ``collide`` / ``params``
- ``idproto``: ``keygen`` / ``run`` / ``simulate`` / ``sign``（実験的）
- ``prf``: F_sk(x) の評価
- ``params``: パラメータの安全性検査
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import yaml
from sympy import isprime

import msi
import protocol
from coleman import PeriodMatrix, period_matrix, period_vector_rational
from errors import MsiForgeError, ParameterError
from modsym import (
    build_manin_basis,
    cusp_list,
    eigen_decompose,
    genus_oracle,
    hecke_matrix,
    prime_form_norms,
    symbol_from_cusps,
)
from quadratic import check_discriminant, enumerate_class_group, factor_class, hilbert_class_poly_auto
from ssgraph import build_graph, cm_reduction_walk, cycle_basis_edges

SCHEMA = "msi-forge/1"
DEFAULT_SEED = "00" * 32


def load_config(config_path: str = "config.yaml") -> dict:
    """YAML設定ファイルを読み込む。

    Parameters
    ----------
    config_path : str
        設定ファイルのパス。デフォルトは ``config.yaml``。ファイルがなければ空の設定。

    Returns
    -------
    dict
        設定内容の辞書。
    """
    if not Path(config_path).exists():
        return {"_config_path": None}
    with open(config_path) as f:
        cfg = yaml.safe_load(f) or {}
    if isinstance(cfg, dict):
        cfg["_config_path"] = config_path
    return cfg


@dataclass(frozen=True)
class ParameterFile:
    """大域パラメータ (p, Δ, N, ℓ, m, d, L, B, λ, seed)。"""

    p: int
    disc: int
    level: int
    ell: int
    m: int
    d: int
    L: int
    B: int
    lam: int
    seed: str


def validate_parameters(cfg: dict) -> ParameterFile:
    """設定辞書から ParameterFile を作り、不変条件を検査する。

    Raises
    ------
    ParameterError
        p が 5 以上の素数でない、ℓ | N·p、Δ が負の判別式でない、seed が 32 バイトの 16 進でない、など。
    """
    try:
        params = ParameterFile(
            p=int(cfg.get("p", 11)),
            disc=int(cfg.get("disc", -23)),
            level=int(cfg.get("level", 11)),
            ell=int(cfg.get("ell", 3)),
            m=int(cfg.get("m", 6)),
            d=int(cfg.get("d", 2)),
            L=int(cfg.get("L", 4)),
            B=int(cfg.get("B", 3)),
            lam=int(cfg.get("lam", 128)),
            seed=str(cfg.get("seed", DEFAULT_SEED)).lower(),
        )
    except (TypeError, ValueError) as e:
        raise ParameterError(f"malformed parameter: {e}") from e
    if params.p < 5 or not isprime(params.p):
        raise ParameterError(f"p={params.p} is not a prime ≥ 5")
    if params.level < 1:
        raise ParameterError(f"level must be positive, got {params.level}")
    if not isprime(params.ell):
        raise ParameterError(f"ell={params.ell} is not prime")
    if (params.level * params.p) % params.ell == 0:
        raise ParameterError(f"ell={params.ell} divides N·p = {params.level * params.p}")
    try:
        check_discriminant(params.disc)
    except MsiForgeError as e:
        raise ParameterError(str(e)) from e
    if len(params.seed) != 64:
        raise ParameterError("seed must be 32 bytes of hex")
    try:
        bytes.fromhex(params.seed)
    except ValueError as e:
        raise ParameterError("seed must be 32 bytes of hex") from e
    if min(params.m, params.d, params.B) < 1 or params.L < 0 or params.lam < 0:
        raise ParameterError("m, d, B must be positive and L, lam non-negative")
    return params


_OVERRIDES = {
    "p": "p",
    "disc": "disc",
    "level": "level",
    "ell": "ell",
    "m": "m",
    "d": "d",
    "L": "L",
    "B": "B",
    "lam": "lam",
    "seed": "seed",
}


def resolve_config(args: argparse.Namespace) -> dict:
    """設定ファイルにコマンドライン引数を上書きした辞書。"""
    cfg = load_config(args.config)
    for attr, key in _OVERRIDES.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "work_cap", None) is not None:
        cfg.setdefault("msi", {})["work_cap"] = args.work_cap
    if getattr(args, "threads", None) is not None:
        cfg["threads"] = args.threads
    return cfg


# --- output -----------------------------------------------------------------


def render_table(rows: list[dict]) -> str:
    """辞書のリストをマークダウンの表にする。"""
    if not rows:
        return "(empty)"
    headers = list(rows[0])
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(str(row.get(h, "")) for h in headers) + " |")
    return "\n".join(lines)


def emit(payload: dict, args: argparse.Namespace, table: list[dict] | None = None) -> None:
    """JSON を標準出力か ``--out`` へ書く。``--pretty`` なら表を標準出力へ。"""
    record = {"schema": SCHEMA, **payload}
    text = json.dumps(record, ensure_ascii=False, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as f:
            f.write(text + "\n")
        print(f"[*] Written to {args.out}", file=sys.stderr)
    if getattr(args, "pretty", False):
        print(render_table(table) if table is not None else json.dumps(record, ensure_ascii=False, indent=2))
    elif not args.out:
        print(text)


def read_artifact(path: str) -> dict:
    with open(path) as f:
        data = json.load(f)
    if data.get("schema") != SCHEMA:
        raise ParameterError(f"{path} is not a {SCHEMA} artifact")
    return data


def _progress(message: str) -> None:
    print(f"[*] {message}", file=sys.stderr)


# --- laboratory (model + period matrix) --------------------------------------


@dataclass(frozen=True)
class Laboratory:
    params: ParameterFile
    model: msi.PathModel
    A: PeriodMatrix
    generator_matrix: PeriodMatrix
    record: dict


def build_laboratory(cfg: dict) -> Laboratory:
    """設定から経路モデルと周期行列を組み立てる。

    manin モードは N の有理固有形式から Π_m を作り、graph モードは
    超特異グラフの辺と seed から作った合成行列を使う。
    """
    params = validate_parameters(cfg)
    msi_cfg = cfg.get("msi", {}) or {}
    mode = msi_cfg.get("mode", "manin")
    if mode == "manin":
        _progress(f"Building Manin basis for N={params.level}...")
        basis = build_manin_basis(params.level)
        eig = eigen_decompose(basis, primes=(cfg.get("periods", {}) or {}).get("hecke_primes"))
        if not eig:
            raise ParameterError(f"no rational newforms at level {params.level}")
        plus_only = bool((cfg.get("periods", {}) or {}).get("plus_only", False))
        A = period_matrix(basis, eig, params.ell, params.m, plus_only=plus_only)
        model = msi.build_path_model("manin", params.L, basis=basis)
        record = {"N": params.level}
    elif mode == "graph":
        graph_ell = int((cfg.get("graph", {}) or {}).get("ell", 2))
        _progress(f"Building supersingular {graph_ell}-isogeny graph for p={params.p}...")
        graph = build_graph(params.p, graph_ell, threads=int(cfg.get("threads", 1)))
        model = msi.build_path_model("graph", params.L, graph=graph)
        A = PeriodMatrix.synthetic(
            params.d, model.dimension, params.ell, params.m, msi.derive_seed(params.seed, "periods/synthetic")
        )
        record = {"p": params.p, "graph_l": graph_ell}
    else:
        raise ParameterError(f"unknown msi.mode: {mode}")
    print(f"    {model.size} generators, B={model.branching}, d={A.nrows}", file=sys.stderr)
    return Laboratory(params, model, A, msi.generator_matrix(model, A), record)


def _work_cap(cfg: dict) -> int:
    return int((cfg.get("msi", {}) or {}).get("work_cap", msi.DEFAULT_WORK_CAP))


def _threads(cfg: dict) -> int:
    return int(cfg.get("threads", 1))


# --- subcommands ------------------------------------------------------------


def run_classgroup(args: argparse.Namespace) -> int:
    """classgroup サブコマンドの実行。"""
    cfg = resolve_config(args)
    disc = validate_parameters(cfg).disc
    forms = enumerate_class_group(disc)
    payload = {"disc": disc, "h": len(forms), "forms": [f.to_json() for f in forms]}
    if args.words:
        base = list((cfg.get("classgroup", {}) or {}).get("factor_base", [2, 3, 5, 7, 11, 13]))
        norms = prime_form_norms(disc, base)
        words = []
        for f in forms:
            word = factor_class(f, base)
            words.append(
                {"form": f.to_json(), "norms": [norms[w] for w in word], "word": [w.to_json() for w in word]}
            )
        payload["words"] = words
    if args.hilbert:
        max_abs = int((cfg.get("hilbert", {}) or {}).get("max_abs_disc", 4000))
        _progress(f"Computing Hilbert class polynomial of {disc}...")
        payload["hilbert"] = [str(c) for c in hilbert_class_poly_auto(disc, max_abs_disc=max_abs)]
    table = [{"a": f.a, "b": f.b, "c": f.c} for f in forms]
    emit(payload, args, table)
    return 0


def run_homology(args: argparse.Namespace) -> int:
    """homology サブコマンドの実行。"""
    cfg = resolve_config(args)
    level = int(cfg.get("level", 11))
    if level < 1:
        raise ParameterError(f"level must be positive, got {level}")
    basis = build_manin_basis(level)
    if args.rank:
        print(basis.rank)
        return 0
    g, c = genus_oracle(level)
    payload: dict = {
        "N": level,
        "rank": basis.rank,
        "genus": g,
        "cusps": [list(x) for x in cusp_list(level)],
        "cusp_count": c,
        "symbols": [list(basis.symbols[k]) for k in basis.free_symbols],
    }
    if args.hecke:
        T = hecke_matrix(basis, args.hecke)
        payload["hecke"] = {"n": args.hecke, "matrix": [[str(T[i, j]) for j in range(T.cols)] for i in range(T.rows)]}
    if args.eigen:
        eig = eigen_decompose(basis)
        payload["newforms"] = [
            {"id": f.newform_id, "eigenvalues": {str(q): a for q, a in sorted(f.eigenvalues.items())}} for f in eig
        ]
    emit(payload, args, [{"N": level, "rank": basis.rank, "genus": g, "cusps": c}])
    return 0


def run_periods(args: argparse.Namespace) -> int:
    """periods サブコマンドの実行。"""
    cfg = resolve_config(args)
    params = validate_parameters(cfg)
    basis = build_manin_basis(params.level)
    plus_only = bool((cfg.get("periods", {}) or {}).get("plus_only", False)) or args.plus_only
    eig = eigen_decompose(basis, primes=(cfg.get("periods", {}) or {}).get("hecke_primes"))
    A = period_matrix(basis, eig, params.ell, params.m, plus_only=plus_only)
    payload: dict = {"N": params.level, "matrix": A.to_json()}
    if args.cusps:
        gamma = symbol_from_cusps(args.cusps[0], args.cusps[1], basis)
        payload["class"] = gamma.to_json()
        payload["vector"] = period_vector_rational(gamma, eig, params.ell, params.m, plus_only).to_json()
    table = [{"form": list(f), "row": " ".join(map(str, row))} for f, row in zip(A.form_ids, A.rows, strict=True)]
    emit(payload, args, table)
    return 0


def run_graph(args: argparse.Namespace) -> int:
    """graph サブコマンドの実行。"""
    cfg = resolve_config(args)
    p = validate_parameters(cfg).p
    if args.steps < 0:
        raise ParameterError(f"--steps must be non-negative, got {args.steps}")
    graph_ell = args.graph_ell if args.graph_ell is not None else int((cfg.get("graph", {}) or {}).get("ell", 2))
    if args.cm_walk is not None:
        walk = cm_reduction_walk(args.cm_walk, p, graph_ell, args.steps)
        emit({"p": p, "l": graph_ell, "disc": args.cm_walk, "walk": walk.to_json()}, args)
        return 0
    _progress(f"Building supersingular {graph_ell}-isogeny graph for p={p}...")
    graph = build_graph(p, graph_ell, threads=_threads(cfg))
    edges = [{"u": u.to_json(), "v": v.to_json(), "multiplicity": k} for u, v, k in graph.edge_list()]
    if args.edges:
        payload = {"p": p, "l": graph_ell, "edges": edges}
    else:
        payload = {
            "graph": graph.to_json(),
            "cycle_rank": len(cycle_basis_edges(graph)),
        }
    table = [{"u": str(u), "v": str(v), "mult": k} for u, v, k in graph.edge_list()]
    emit(payload, args, table)
    return 0


def run_msi_sample(args: argparse.Namespace) -> int:
    """msi sample サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    inst = msi.sample_instance(lab.model, lab.A, lab.params.seed, params=lab.record)
    emit({"instance": inst.to_json(include_witness=args.with_witness)}, args)
    return 0


def run_msi_solve(args: argparse.Namespace) -> int:
    """msi solve サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    inst = msi.MSIInstance.from_json(read_artifact(args.instance)["instance"])
    if args.method == "linear":
        sol = msi.solve_linear_unconstrained(lab.A, inst.target)
        payload = {
            "method": "linear",
            "solvable": sol.solvable,
            "particular": None if sol.particular is None else list(sol.particular),
            "kernel": [list(k) for k in sol.kernel],
        }
        if args.round and sol.particular is not None:
            payload["rounded"] = list(msi.round_to_path(lab.model, sol.particular))
        emit(payload, args)
        return 0
    _progress(f"Solving with {args.method}...")
    if args.method == "mitm":
        report = msi.solve_mitm(inst, lab.model, lab.A, work_cap=_work_cap(cfg))
    else:
        report = msi.solve_bruteforce(inst, lab.model, lab.A, work_cap=_work_cap(cfg), workers=_threads(cfg))
    if report.witness is not None and msi.evaluate_path(lab.model, lab.A, report.witness).residues() != (
        inst.target.residues()
    ):
        raise MsiForgeError("solver returned a path that does not re-verify")
    print(f"    nodes expanded: {report.nodes}", file=sys.stderr)
    emit(report.to_json(), args, [report.to_json()])
    return 0


def run_msi_collide(args: argparse.Namespace) -> int:
    """msi collide サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    report = msi.collision_experiment(lab.model, lab.A, args.trials, lab.params.seed, work_cap=_work_cap(cfg))
    emit(report.to_json(), args, [report.to_json()])
    return 0


def run_params(args: argparse.Namespace) -> int:
    """params / msi params サブコマンドの実行。"""
    params = validate_parameters(resolve_config(args))
    verdict = msi.parameter_check(params.ell, params.m, params.d, params.B, params.L, params.lam)
    emit(verdict.to_json(), args, [verdict.to_json()])
    return 0


def _protocol_cfg(cfg: dict) -> dict:
    return cfg.get("protocol", {}) or {}


def run_idproto_keygen(args: argparse.Namespace) -> int:
    """idproto keygen サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    keypair = protocol.keygen(lab.model, lab.A, msi.derive_seed(lab.params.seed, "keygen"))
    emit({"keypair": keypair.to_json()}, args)
    return 0


def run_idproto_run(args: argparse.Namespace) -> int:
    """idproto run サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    keypair = protocol.KeyPair.from_json(read_artifact(args.key)["keypair"])
    pcfg = _protocol_cfg(cfg)
    rounds = args.rounds if args.rounds is not None else int(pcfg.get("rounds", 16))
    q_ch = int(pcfg.get("challenge_space", protocol.DEFAULT_CHALLENGE_SPACE))
    _progress(f"Running {rounds} identification rounds...")
    report = protocol.identify(
        lab.model, lab.A, lab.generator_matrix, keypair, rounds, lab.params.seed, q_ch, threads=_threads(cfg)
    )
    if not report.accepted:
        print("[WARN] Verifier rejected at least one round", file=sys.stderr)
    payload = report.to_json()
    payload["wire"] = [protocol.encode_transcript(t).hex() for t in report.transcripts]
    emit(payload, args, [{"round": i, "c": t.challenge, "ok": ok} for i, (t, ok) in enumerate(
        zip(report.transcripts, report.verdicts, strict=True))])
    return 0


def run_idproto_simulate(args: argparse.Namespace) -> int:
    """idproto simulate サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    data = read_artifact(args.key)
    pk = protocol.KeyPair.from_json(data["keypair"]).pk if "keypair" in data else None
    if pk is None:
        raise ParameterError(f"{args.key} holds no public key")
    tr = protocol.simulate(pk, lab.generator_matrix, lab.model, args.challenge, lab.params.seed)
    q_ch = int(_protocol_cfg(cfg).get("challenge_space", protocol.DEFAULT_CHALLENGE_SPACE))
    ok = protocol.verify_transcript(tr, pk, lab.generator_matrix, protocol.response_bound(lab.model.L, q_ch))
    emit({"transcript": tr.to_json(), "verifies": ok, "wire": protocol.encode_transcript(tr).hex()}, args)
    return 0


def run_idproto_sign(args: argparse.Namespace) -> int:
    """idproto sign サブコマンドの実行（protocol.experimental_signatures が必要）。"""
    cfg = resolve_config(args)
    pcfg = _protocol_cfg(cfg)
    experimental = bool(pcfg.get("experimental_signatures", False))
    lab = build_laboratory(cfg)
    keypair = protocol.KeyPair.from_json(read_artifact(args.key)["keypair"])
    try:
        message = bytes.fromhex(args.message)
    except ValueError as e:
        raise ParameterError("--message must be hex") from e
    rounds = args.rounds if args.rounds is not None else int(pcfg.get("rounds", 16))
    q_ch = int(pcfg.get("challenge_space", protocol.DEFAULT_CHALLENGE_SPACE))
    seed = msi.derive_seed(lab.params.seed, "sign")
    signature = protocol.sign(lab.model, lab.A, keypair, message, rounds, seed, q_ch, experimental=experimental)
    ok = protocol.verify_signature(
        signature, keypair.pk, lab.generator_matrix, message, lab.model.L, q_ch, experimental=experimental
    )
    emit({"message": args.message, "signature": [t.to_json() for t in signature], "verifies": ok}, args)
    return 0


def run_prf(args: argparse.Namespace) -> int:
    """prf サブコマンドの実行。"""
    cfg = resolve_config(args)
    lab = build_laboratory(cfg)
    keypair = protocol.KeyPair.from_json(read_artifact(args.key)["keypair"])
    try:
        x = bytes.fromhex(args.input)
    except ValueError as e:
        raise ParameterError("--input must be hex") from e
    out = protocol.prf_eval(keypair.sk, x, lab.model, lab.A)
    emit({"input": args.input, "output": out.hex()}, args)
    return 0


# --- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="config.yaml", help="Path to config file")
    common.add_argument("--seed", default=None, help="32-byte seed as 64 hex characters")
    common.add_argument("--pretty", action="store_true", help="Render a table instead of JSON")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for long experiments")
    common.add_argument("--work-cap", type=int, default=None, help="Maximum node expansions for solvers")
    common.add_argument("--out", default=None, help="Write the JSON artifact to this path")
    common.add_argument("-p", type=int, default=None, help="Characteristic prime p")
    common.add_argument("--disc", type=int, default=None, help="Negative discriminant Δ")
    common.add_argument("--level", type=int, default=None, help="Level N")
    common.add_argument("-l", "--ell", dest="ell", type=int, default=None, help="Analysis prime ℓ")
    common.add_argument("-m", type=int, default=None, help="Precision m")
    common.add_argument("-d", type=int, default=None, help="Number of period coordinates d")
    common.add_argument("-L", type=int, default=None, help="Path length bound L")
    common.add_argument("-B", type=int, default=None, help="Branching factor B")
    common.add_argument("--lam", type=int, default=None, help="Security parameter λ")
    return common


def build_parser() -> argparse.ArgumentParser:
    """argparseパーサを構築する。"""
    common = _common()
    parser = argparse.ArgumentParser(
        description="msi-forge - Modular Symbol Inversion laboratory",
        epilog=f'All outputs are JSON objects carrying "schema": "{SCHEMA}".',
    )
    subparsers = parser.add_subparsers(dest="command")

    p_cg = subparsers.add_parser("classgroup", parents=[common], help="List reduced forms of Cl(Δ)")
    p_cg.add_argument("--hilbert", action="store_true", help="Also compute the Hilbert class polynomial")
    p_cg.add_argument("--words", action="store_true", help="Factor each class over classgroup.factor_base")
    p_cg.set_defaults(func=run_classgroup)

    p_hom = subparsers.add_parser("homology", parents=[common], help="Manin-symbol homology of X0(N)")
    p_hom.add_argument("--rank", action="store_true", help="Print only the rank")
    p_hom.add_argument("--hecke", type=int, default=None, help="Include the matrix of T_n")
    p_hom.add_argument("--eigen", action="store_true", help="Include rational newform eigenvalues")
    p_hom.set_defaults(func=run_homology)

    p_per = subparsers.add_parser("periods", parents=[common], help="Truncated period map Π_m")
    p_per.add_argument("--plus-only", action="store_true", help="Use only the + eigen-line")
    p_per.add_argument("--cusps", nargs=2, default=None, metavar=("R", "S"), help="Evaluate Π_m on {r → s}")
    p_per.set_defaults(func=run_periods)

    p_gr = subparsers.add_parser("graph", parents=[common], help="Supersingular isogeny graph")
    p_gr.add_argument("--graph-ell", type=int, default=None, help="Isogeny degree (2 or 3)")
    p_gr.add_argument("--edges", action="store_true", help="Emit an edge list")
    p_gr.add_argument("--cm-walk", type=int, default=None, metavar="DISC", help="CM reduction walk for Δ")
    p_gr.add_argument("--steps", type=int, default=3, help="Steps of the CM walk")
    p_gr.set_defaults(func=run_graph)

    p_msi = subparsers.add_parser("msi", help="MSI experiments")
    msi_sub = p_msi.add_subparsers(dest="msi_command")
    p_s = msi_sub.add_parser("sample", parents=[common], help="Sample an instance")
    p_s.add_argument("--with-witness", action="store_true", help="Keep the witness in the artifact")
    p_s.set_defaults(func=run_msi_sample)
    p_so = msi_sub.add_parser("solve", parents=[common], help="Solve an instance")
    p_so.add_argument("--instance", required=True, help="Instance artifact written by msi sample")
    p_so.add_argument("--method", choices=["bruteforce", "mitm", "linear"], default="mitm")
    p_so.add_argument("--round", action="store_true", help="Experimental: round the linear solution to a path")
    p_so.set_defaults(func=run_msi_solve)
    p_c = msi_sub.add_parser("collide", parents=[common], help="Collision experiment")
    p_c.add_argument("--trials", type=int, default=None, help="Sample this many paths instead of enumerating")
    p_c.set_defaults(func=run_msi_collide)
    p_mp = msi_sub.add_parser("params", parents=[common], help="Parameter check")
    p_mp.set_defaults(func=run_params)

    p_id = subparsers.add_parser("idproto", help="Identification protocol")
    id_sub = p_id.add_subparsers(dest="id_command")
    p_k = id_sub.add_parser("keygen", parents=[common], help="Generate a key pair")
    p_k.set_defaults(func=run_idproto_keygen)
    p_r = id_sub.add_parser("run", parents=[common], help="Run τ honest rounds")
    p_r.add_argument("--key", required=True, help="Key pair artifact")
    p_r.add_argument("--rounds", type=int, default=None, help="Number of rounds τ")
    p_r.set_defaults(func=run_idproto_run)
    p_sim = id_sub.add_parser("simulate", parents=[common], help="Simulate a transcript without the secret")
    p_sim.add_argument("--key", required=True, help="Artifact holding the public key")
    p_sim.add_argument("-c", "--challenge", type=int, default=1, help="Challenge")
    p_sim.set_defaults(func=run_idproto_simulate)
    p_sig = id_sub.add_parser("sign", parents=[common], help="Experimental: Fiat-Shamir signature")
    p_sig.add_argument("--key", required=True, help="Key pair artifact")
    p_sig.add_argument("--message", required=True, help="Message bytes as hex")
    p_sig.add_argument("--rounds", type=int, default=None, help="Number of rounds τ")
    p_sig.set_defaults(func=run_idproto_sign)

    p_prf = subparsers.add_parser("prf", parents=[common], help="Evaluate the PRF")
    p_prf.add_argument("--key", required=True, help="Key pair artifact")
    p_prf.add_argument("--input", required=True, help="Input bytes as hex")
    p_prf.set_defaults(func=run_prf)

    p_par = subparsers.add_parser("params", parents=[common], help="Parameter check")
    p_par.add_argument("--check", action="store_true", help="Evaluate the hardness and separation conditions")
    p_par.set_defaults(func=run_params)

    return parser


def main(argv: list[str] | None = None) -> None:
    """CLIエントリポイント。"""
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)

    if not hasattr(args, "func"):
        parser.print_help()
        raise SystemExit(2)

    try:
        status = args.func(args)
    except (MsiForgeError, ArithmeticError) as e:
        print(f"[!] {type(e).__name__}: {e}", file=sys.stderr)
        raise SystemExit(1) from e
    raise SystemExit(status)


if __name__ == "__main__":
    main()
