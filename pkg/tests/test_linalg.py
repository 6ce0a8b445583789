import itertools
import random

import pytest

from linalg import (
    integer_echelon,
    lattice_coordinates,
    mat_vec_mod,
    solve_mod_prime_power,
    valuation,
)


def test_valuation():
    assert valuation(54, 3) == 3
    assert valuation(-8, 2) == 3
    assert valuation(7, 3) == 0


def test_valuation_zero_raises():
    with pytest.raises(ValueError):
        valuation(0, 5)


def test_integer_echelon_spans_same_lattice():
    echelon = integer_echelon([[2, 4], [3, 6]])
    assert echelon == [[1, 2]]


def test_integer_echelon_drops_zero_rows():
    assert integer_echelon([[0, 0, 0]]) == []


def test_lattice_coordinates_roundtrip():
    echelon = integer_echelon([[1, 2, 0], [0, 3, 1], [2, 1, 5]])
    vec = [5, 7, 12]
    coords = lattice_coordinates(echelon, vec)
    rebuilt = [sum(c * row[j] for c, row in zip(coords, echelon, strict=True)) for j in range(3)]
    assert rebuilt == vec


def test_lattice_coordinates_outside_lattice():
    echelon = integer_echelon([[2, 0], [0, 2]])
    with pytest.raises(ValueError):
        lattice_coordinates(echelon, [1, 0])


def _exhaustive(matrix, target, mod, ncols):
    return {
        x
        for x in itertools.product(range(mod), repeat=ncols)
        if mat_vec_mod(matrix, x, mod) == tuple(t % mod for t in target)
    }


@pytest.mark.parametrize("ell,m,d,r", [(3, 1, 2, 6), (3, 2, 3, 3), (2, 3, 2, 3)])
def test_solution_set_matches_exhaustive_search(ell, m, d, r):
    rng = random.Random(f"{ell}-{m}-{d}-{r}")
    mod = ell**m
    for _ in range(3):
        matrix = [[rng.randrange(mod) for _ in range(r)] for _ in range(d)]
        x0 = [rng.randrange(mod) for _ in range(r)]
        target = mat_vec_mod(matrix, x0, mod)
        sol = solve_mod_prime_power(matrix, target, ell, m)
        assert sol.solvable
        assert set(sol.members()) == _exhaustive(matrix, target, mod, r)


def test_unsolvable_system():
    # 3x ≡ 1 (mod 9) は解をもたない
    sol = solve_mod_prime_power([[3]], [1], 3, 2)
    assert not sol.solvable
    assert list(sol.members()) == []


def test_zero_target_contains_zero():
    sol = solve_mod_prime_power([[1, 2], [4, 5]], [0, 0], 5, 2)
    assert (0, 0) in set(sol.members())
