import itertools
from collections import Counter
from fractions import Fraction

import pytest
from scipy.stats import chisquare

from coleman import PeriodMatrix, PeriodVector, period_matrix
from errors import EmptyModel, WorkCapExceeded
from msi import (
    MSIInstance,
    PathModel,
    build_path_model,
    collision_experiment,
    count_paths,
    derive_seed,
    enumerate_paths,
    evaluate_path,
    generator_matrix,
    is_valid_path,
    make_rng,
    mitm_budget,
    parameter_check,
    path_value,
    round_to_path,
    sample_instance,
    sample_path,
    solve_bruteforce,
    solve_linear_unconstrained,
    solve_mitm,
)
from ssgraph import build_graph


@pytest.fixture(scope="module")
def model11(basis11):
    return build_path_model("manin", 4, basis=basis11)


def test_manin_model_level_11(model11):
    assert model11.size == 3
    assert model11.branching == 3
    assert count_paths(model11, 4) == 81
    assert model11.labels[0].startswith("(")


def test_graph_model_is_regular():
    model = build_path_model("graph", 3, graph=build_graph(11, 2))
    assert model.size == 6
    assert model.branching == 3
    for path in enumerate_paths(model, 3):
        assert is_valid_path(model, path)


def test_graph_model_edges_follow_head_to_tail():
    g = build_graph(37, 2)
    model = build_path_model("graph", 2, graph=g)
    for i, nxt in enumerate(model.successors):
        head = model.labels[i].split("->")[1]
        assert all(model.labels[j].split("->")[0] == head for j in nxt)


def test_empty_path_model(basis11):
    model = build_path_model("manin", 0, basis=basis11)
    assert list(enumerate_paths(model, 0)) == [()]
    assert path_value(model, ()) == (0, 0, 0)


def test_model_needs_basis_or_graph():
    with pytest.raises(EmptyModel):
        build_path_model("manin", 2)
    with pytest.raises(EmptyModel):
        build_path_model("graph", 2)


def test_model_rejects_negative_length(basis11):
    with pytest.raises(EmptyModel):
        build_path_model("manin", -1, basis=basis11)


def test_model_rejects_unknown_mode(basis11):
    with pytest.raises(ValueError):
        build_path_model("lattice", 2, basis=basis11)


def test_path_model_json(model11):
    assert PathModel.from_json(model11.to_json()) == model11


def test_generator_matrix_checks_dimension(model11):
    with pytest.raises(ValueError):
        generator_matrix(model11, PeriodMatrix.synthetic(2, 5, 3, 4, seed="w"))


def test_sample_instance_is_deterministic(model11, period11):
    a = sample_instance(model11, period11, "ab" * 32)
    b = sample_instance(model11, period11, "ab" * 32)
    assert a == b
    assert len(a.witness) == 4
    assert is_valid_path(model11, a.witness)
    assert evaluate_path(model11, period11, a.witness).residues() == a.target.residues()
    assert a.params["L"] == 4 and a.params["d"] == 2


def test_instance_json_can_hide_witness(model11, period11):
    inst = sample_instance(model11, period11, 5, params={"N": 11})
    public = inst.to_json(include_witness=False)
    assert public["witness"] is None
    back = MSIInstance.from_json(public)
    assert back.witness is None
    assert back.params["N"] == 11
    assert MSIInstance.from_json(inst.to_json()).witness == inst.witness


def test_first_step_is_uniform(model11):
    counts = Counter(sample_path(model11, make_rng(seed, "msi/sample"))[0] for seed in range(10_000))
    observed = [counts[i] for i in range(model11.size)]
    assert chisquare(observed).pvalue > 1e-3


def test_derived_seeds_differ_by_label():
    assert derive_seed("00" * 32, "a") != derive_seed("00" * 32, "b")
    assert len(derive_seed(7, "a")) == 32


def _exhaustive_witnesses(model, A, target):
    return [
        path
        for k in range(model.L + 1)
        for path in enumerate_paths(model, k)
        if A.apply(path_value(model, path)) == target
    ]


@pytest.fixture(scope="module")
def models11(basis11):
    return {L: build_path_model("manin", L, basis=basis11) for L in range(2, 7)}


@pytest.mark.parametrize("seed", range(100))
def test_bruteforce_and_mitm_agree(models11, period11, seed):
    model = models11[2 + seed % 5]
    inst = sample_instance(model, period11, seed)
    for report in (solve_bruteforce(inst, model, period11), solve_mitm(inst, model, period11)):
        assert report.found
        assert is_valid_path(model, report.witness)
        assert evaluate_path(model, period11, report.witness).residues() == inst.target.residues()


def test_threaded_bruteforce_finds_witness(model11, period11):
    inst = sample_instance(model11, period11, 99)
    report = solve_bruteforce(inst, model11, period11, workers=3)
    assert evaluate_path(model11, period11, report.witness).residues() == inst.target.residues()


@pytest.mark.parametrize("seed", range(4))
def test_perturbed_target_matches_exhaustive_search(model11, period11, seed):
    inst = sample_instance(model11, period11, seed)
    residues = list(inst.target.residues())
    residues[0] = (residues[0] + 1) % period11.modulus
    target = PeriodVector.from_residues(3, 6, residues, period11.form_ids)
    moved = MSIInstance(inst.params, target)
    expected = _exhaustive_witnesses(model11, period11, tuple(residues))
    assert solve_bruteforce(moved, model11, period11).found == bool(expected)
    assert solve_mitm(moved, model11, period11).found == bool(expected)


def test_zero_target_gives_empty_path(basis11, period11):
    model = build_path_model("manin", 0, basis=basis11)
    inst = sample_instance(model, period11, 1)
    assert inst.witness == ()
    assert solve_bruteforce(inst, model, period11).witness == ()
    assert solve_mitm(inst, model, period11).witness == ()


def test_mitm_with_single_step(basis11, period11):
    model = build_path_model("manin", 1, basis=basis11)
    inst = sample_instance(model, period11, 3)
    report = solve_mitm(inst, model, period11)
    assert report.found
    assert len(report.witness) <= 1
    assert evaluate_path(model, period11, report.witness).residues() == inst.target.residues()


def test_mitm_expansions_scale_with_half_length(model11, period11):
    for seed in range(8):
        report = solve_mitm(sample_instance(model11, period11, seed), model11, period11)
        assert report.nodes <= 4 * 3**2 * model11.L


def test_work_cap(model11, period11):
    inst = sample_instance(model11, period11, 0)
    with pytest.raises(WorkCapExceeded):
        solve_bruteforce(inst, model11, period11, work_cap=100)
    with pytest.raises(WorkCapExceeded):
        solve_mitm(inst, model11, period11, work_cap=10)


def _fork_instance(model):
    """同じ頂点から出る 2 本の辺の和。どちらの順でも繋がらないので解はない。"""
    ends = [label.split("->") for label in model.labels]
    i, j = next(
        (i, j)
        for i, (a, b) in enumerate(ends)
        for j, (c, d) in enumerate(ends)
        if i < j and a == c and b != a and d != a
    )
    dim = model.dimension
    identity = tuple(tuple(int(r == c) for c in range(dim)) for r in range(dim))
    A = PeriodMatrix(3, 4, identity, tuple((0, r, 1) for r in range(dim)), dim)
    target = [(x + y) % A.modulus for x, y in zip(path_value(model, (i,)), path_value(model, (j,)), strict=True)]
    return MSIInstance({}, PeriodVector.from_residues(3, 4, target, A.form_ids)), A


def test_mitm_charges_bucket_matches_against_cap():
    model = build_path_model("graph", 2, graph=build_graph(37, 2))
    inst, A = _fork_instance(model)
    report = solve_mitm(inst, model, A)
    assert not report.found
    assert report.nodes > mitm_budget(model)
    with pytest.raises(WorkCapExceeded):
        solve_mitm(inst, model, A, work_cap=mitm_budget(model))


def test_graph_mode_instance_solves():
    model = build_path_model("graph", 3, graph=build_graph(37, 2))
    A = PeriodMatrix.synthetic(2, model.dimension, 3, 6, seed="graph")
    inst = sample_instance(model, A, 11)
    report = solve_mitm(inst, model, A)
    assert report.found
    assert is_valid_path(model, report.witness)
    assert evaluate_path(model, A, report.witness).residues() == inst.target.residues()


def test_linear_zero_target(period11):
    sol = solve_linear_unconstrained(period11, (0, 0))
    assert sol.solvable
    assert not any(sol.particular)
    for k in sol.kernel:
        assert period11.apply(k) == (0, 0)


@pytest.mark.parametrize("seed", ["lin-a", "lin-b"])
def test_linear_coset_matches_exhaustive_search(seed):
    A = PeriodMatrix.synthetic(3, 5, 3, 2, seed=seed)
    rng = make_rng(seed, "x0")
    x0 = [rng.randrange(9) for _ in range(5)]
    y = A.apply(x0)
    sol = solve_linear_unconstrained(A, y)
    reported = set(sol.members())
    assert tuple(x0) in reported
    exhaustive = {x for x in itertools.product(range(9), repeat=5) if A.apply(x) == y}
    assert reported == exhaustive


def test_linear_unsolvable_is_a_value():
    A = PeriodMatrix(3, 2, ((3, 0), (0, 3)), ((0, 0, 1), (0, 1, 1)), 2)
    sol = solve_linear_unconstrained(A, (1, 0))
    assert not sol.solvable
    assert list(sol.members()) == []


def test_round_to_path_recovers_generator_counts(model11, capsys):
    path = round_to_path(model11, (2, 0, 1))
    assert sorted(path) == [0, 0, 2]
    assert "[WARN]" in capsys.readouterr().err


def test_collision_prediction(basis11, eig11, model11):
    A = period_matrix(basis11, eig11, 3, 2)
    report = collision_experiment(model11, A)
    assert report.paths == 81
    assert report.predicted_paths == Fraction(81, 2)
    images = Counter(A.apply(path_value(model11, p)) for p in enumerate_paths(model11, 4))
    assert report.path_colliding_pairs == sum(c * (c - 1) // 2 for c in images.values())
    # 並べ替えで一致する経路を除くと値は C(6,2) = 15 通り
    assert report.distinct_values == 15
    assert not report.sampled


def test_collisions_vanish_in_injective_regime(model11):
    # 3^36 ≥ 81²·16
    A = PeriodMatrix.synthetic(3, 3, 3, 12, seed="injective")
    assert collision_experiment(model11, A).colliding_pairs == 0


def test_single_path_space_has_no_collisions(basis11, period11):
    model = build_path_model("manin", 0, basis=basis11)
    report = collision_experiment(model, period11)
    assert report.paths == 1
    assert report.path_colliding_pairs == report.colliding_pairs == 0


def test_sampled_collision_experiment(model11, period11):
    report = collision_experiment(model11, period11, trials=50, seed=3)
    assert report.sampled
    assert report.paths == 50
    with pytest.raises(WorkCapExceeded):
        collision_experiment(model11, period11, trials=50, work_cap=10)


def test_parameter_check_separation_holds():
    v = parameter_check(3, 40, 2, 3, 20, 16)
    assert v.separation
    assert v.search_hardness
    assert v.quantum_margin


def test_parameter_check_separation_fails():
    assert not parameter_check(3, 1, 1, 3, 20, 16).separation


def test_parameter_check_zero_security_level():
    v = parameter_check(3, 1, 1, 3, 1, 0)
    assert v.search_hardness and v.quantum_margin


def test_parameter_check_quantum_margin_is_stricter():
    # 3^20 ≥ 2^31 だが 2^62 には届かない
    v = parameter_check(3, 40, 2, 3, 20, 31)
    assert v.search_hardness
    assert not v.quantum_margin


def test_parameter_check_rejects_nonpositive():
    with pytest.raises(ValueError):
        parameter_check(3, 0, 1, 3, 4, 16)
