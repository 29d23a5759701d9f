"""Nash solver tests: classic games, brute-force cross-checks, degeneracy."""

import random

import pytest

from rumorgame.core import PayoffMatrix
from rumorgame.nash import (
    NumericalFailureError,
    enumerate_equilibria,
    expected_payoffs,
    select_equilibrium,
    solve_selected,
    verify_equilibrium,
)


def bimatrix(rows, cols):
    """Build a PayoffMatrix from two payoff grids."""
    r = len(rows)
    c = len(rows[0])
    entries = [[(float(rows[i][j]), float(cols[i][j])) for j in range(c)] for i in range(r)]
    return PayoffMatrix(tuple(range(r)), tuple(range(c)), entries)


MATCHING_PENNIES = bimatrix([[1, -1], [-1, 1]], [[-1, 1], [1, -1]])
PRISONERS_DILEMMA = bimatrix([[3, 0], [5, 1]], [[3, 5], [0, 1]])
BATTLE_OF_SEXES = bimatrix([[2, 0], [0, 1]], [[1, 0], [0, 2]])


def random_game(rng: random.Random, rows=4, cols=4) -> PayoffMatrix:
    entries = [
        [(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(cols)] for _ in range(rows)
    ]
    return PayoffMatrix(tuple(range(rows)), tuple(range(cols)), entries)


def brute_force_pure(m: PayoffMatrix):
    """Exhaustive best-response scan, independent of the solver."""
    found = []
    for i in range(m.rows):
        for j in range(m.cols):
            a, b = m.entries[i][j]
            if all(m.entries[x][j][0] <= a for x in range(m.rows)) and all(
                m.entries[i][y][1] <= b for y in range(m.cols)
            ):
                found.append((i, j))
    return found


class TestExpectedPayoffs:
    def test_point_masses_pick_entry(self):
        m = MATCHING_PENNIES
        assert expected_payoffs(m, (1.0, 0.0), (0.0, 1.0)) == (-1.0, 1.0)

    def test_uniform_on_matching_pennies_is_zero(self):
        u = (0.5, 0.5)
        assert expected_payoffs(MATCHING_PENNIES, u, u) == pytest.approx((0.0, 0.0))

    def test_uniform_on_all_ones(self):
        m = bimatrix([[1, 1], [1, 1]], [[1, 1], [1, 1]])
        assert expected_payoffs(m, (0.5, 0.5), (0.5, 0.5)) == pytest.approx((1.0, 1.0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            expected_payoffs(MATCHING_PENNIES, (1.0,), (0.5, 0.5))


class TestVerify:
    def test_mixed_pennies_residual_zero(self):
        profs = enumerate_equilibria(MATCHING_PENNIES)
        assert len(profs) == 1
        assert verify_equilibrium(MATCHING_PENNIES, profs[0]) <= 1e-12

    def test_pure_pennies_residual_two(self):
        profs = enumerate_equilibria(PRISONERS_DILEMMA)  # any profile object works
        prof = profs[0]
        bad = type(prof)(
            sigma_row=(1.0, 0.0),
            sigma_col=(1.0, 0.0),
            payoff_row=1.0,
            payoff_col=-1.0,
            residual=0.0,
            support_row=(0,),
            support_col=(0,),
        )
        # Column player gains 1 - (-1) = 2 by switching columns.
        assert verify_equilibrium(MATCHING_PENNIES, bad) == pytest.approx(2.0)

    def test_one_by_one_game(self):
        m = bimatrix([[7]], [[-3]])
        profs = enumerate_equilibria(m)
        assert len(profs) == 1
        assert verify_equilibrium(m, profs[0]) == 0.0


class TestClassicGames:
    def test_matching_pennies_unique_mixed(self):
        profs = enumerate_equilibria(MATCHING_PENNIES)
        assert len(profs) == 1
        p = profs[0]
        assert p.sigma_row == pytest.approx((0.5, 0.5))
        assert p.sigma_col == pytest.approx((0.5, 0.5))

    def test_prisoners_dilemma_mutual_defection(self):
        profs = enumerate_equilibria(PRISONERS_DILEMMA)
        assert len(profs) == 1
        p = profs[0]
        assert p.sigma_row == pytest.approx((0.0, 1.0))
        assert p.sigma_col == pytest.approx((0.0, 1.0))
        assert (p.payoff_row, p.payoff_col) == pytest.approx((1.0, 1.0))

    def test_battle_of_sexes_three_equilibria_and_selection(self):
        profs = enumerate_equilibria(BATTLE_OF_SEXES)
        assert len(profs) == 3
        welfares = sorted(p.welfare for p in profs)
        # mixed equilibrium welfare 4/3 < 3 of either pure profile
        assert welfares[-1] == pytest.approx(3.0)
        assert welfares[0] == pytest.approx(4 / 3)
        best = select_equilibrium(profs, BATTLE_OF_SEXES)
        assert best.support_row == (0,) and best.support_col == (0,)
        assert best.sigma_row == pytest.approx((1.0, 0.0))


class TestDegenerateGames:
    def test_duplicated_rows_and_columns_terminate(self):
        # Rows 0/1 and columns 0/1 identical: the moot-bit pattern.
        rows = [[1, 1, 0, 2], [1, 1, 0, 2], [0, 0, 3, 1], [2, 2, 1, 0]]
        cols = [[1, 1, 2, 0], [1, 1, 2, 0], [2, 2, 0, 3], [0, 0, 3, 1]]
        m = bimatrix(rows, cols)
        profs = enumerate_equilibria(m)
        assert profs
        for p in profs:
            assert verify_equilibrium(m, p) <= 1e-9

    def test_constant_game_fully_degenerate(self):
        m = bimatrix([[1, 1], [1, 1]], [[2, 2], [2, 2]])
        profs = enumerate_equilibria(m)
        assert profs
        for p in profs:
            assert verify_equilibrium(m, p) <= 1e-9


class TestRandomGames:
    def test_pure_equilibria_all_found_and_all_verified(self):
        rng = random.Random(2024)
        for _ in range(300):
            m = random_game(rng)
            profs = enumerate_equilibria(m)
            for p in profs:
                assert p.residual <= 1e-9
                assert verify_equilibrium(m, p) <= 1e-9
            pure_supports = {
                (p.support_row, p.support_col) for p in profs if len(p.support_row) == 1
            }
            for i, j in brute_force_pure(m):
                assert ((i,), (j,)) in pure_supports

    def test_translation_invariance(self):
        rng = random.Random(77)
        for _ in range(50):
            m = random_game(rng)
            shift = rng.uniform(-5, 5)
            shifted = PayoffMatrix(
                m.row_strategies,
                m.col_strategies,
                [[(a + shift, b) for a, b in row] for row in m.entries],
            )
            base = enumerate_equilibria(m)
            moved = enumerate_equilibria(shifted)
            assert [(p.support_row, p.support_col) for p in base] == [
                (p.support_row, p.support_col) for p in moved
            ]
            for p, q in zip(base, moved):
                assert p.sigma_row == pytest.approx(q.sigma_row, abs=1e-9)
                assert p.sigma_col == pytest.approx(q.sigma_col, abs=1e-9)

    def test_solve_selected_agrees_with_full_pipeline(self):
        rng = random.Random(5150)
        checked = 0
        for _ in range(200):
            m = random_game(rng)
            fast = solve_selected(m)
            full = select_equilibrium(enumerate_equilibria(m), m)
            if brute_force_pure(m):
                # On generic random games the best pure equilibrium is the
                # welfare optimum whenever mixed profiles do not dominate.
                assert fast.welfare <= full.welfare + 1e-9
                if fast.welfare >= full.welfare - 1e-9:
                    checked += 1
                    assert fast.support_row == full.support_row
                    assert fast.support_col == full.support_col
        assert checked > 50  # the agreement path is actually exercised


class TestSelect:
    def test_single_candidate(self):
        profs = enumerate_equilibria(PRISONERS_DILEMMA)
        assert select_equilibrium(profs, PRISONERS_DILEMMA) is profs[0]

    def test_max_welfare_wins(self):
        profs = enumerate_equilibria(bimatrix([[1, 0], [0, 2]], [[1, 0], [0, 2]]))
        best = select_equilibrium(profs)
        assert (best.payoff_row, best.payoff_col) == pytest.approx((2.0, 2.0))

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            select_equilibrium([])

    def test_deterministic_across_runs(self):
        rng = random.Random(31337)
        games = [random_game(rng) for _ in range(30)]
        first = [select_equilibrium(enumerate_equilibria(m), m) for m in games]
        second = [select_equilibrium(enumerate_equilibria(m), m) for m in games]
        assert first == second


class TestErrors:
    def test_oversized_matrix_rejected(self):
        m = bimatrix([[0.0] * 9 for _ in range(9)], [[0.0] * 9 for _ in range(9)])
        with pytest.raises(ValueError, match="8x8"):
            enumerate_equilibria(m)

    def test_non_finite_entries_rejected(self):
        m = bimatrix([[float("nan"), 0], [0, 0]], [[0, 0], [0, 0]])
        with pytest.raises(ValueError, match="non-finite"):
            enumerate_equilibria(m)
