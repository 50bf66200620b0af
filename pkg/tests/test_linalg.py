"""Tests for the shared linear-algebra helpers."""

import numpy as np
import pytest

from rkhs_oed.linalg import (IllConditionedWarning, dedupe_rows, inv_spd,
                             min_eig, pinv, solve_spd, sym)


def test_sym_symmetrizes():
    a = np.array([[1.0, 2.0], [0.0, 3.0]])
    s = sym(a)
    assert np.array_equal(s, s.T)
    assert np.allclose(s, [[1.0, 1.0], [1.0, 3.0]])


def test_pinv_matches_numpy_on_random_matrices():
    rng = np.random.default_rng(0)
    for shape in [(3, 5), (5, 3), (4, 4)]:
        a = rng.standard_normal(shape)
        assert np.allclose(pinv(a), np.linalg.pinv(a), atol=1e-10)


def test_pinv_rank_deficient():
    a = np.array([[1.0, 0.0], [2.0, 0.0]])
    p = pinv(a)
    # Moore-Penrose identities
    assert np.allclose(a @ p @ a, a, atol=1e-12)
    assert np.allclose(p @ a @ p, p, atol=1e-12)


def test_pinv_zero_matrix():
    assert np.array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))


def test_solve_spd_matches_direct_solve():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((4, 4))
    a = a @ a.T + np.eye(4)
    b = rng.standard_normal((4, 2))
    assert np.allclose(solve_spd(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_solve_spd_warns_on_ill_conditioning():
    a = np.diag([1.0, 1e-13])
    with pytest.warns(IllConditionedWarning):
        solve_spd(a, np.ones(2))


def test_solve_spd_singular_falls_back_to_pseudo_solve():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([2.0, 2.0])
    with pytest.warns(IllConditionedWarning):
        x = solve_spd(a, b)
    # least-squares solution of the consistent singular system
    assert np.allclose(a @ x, b, atol=1e-10)


def test_inv_spd():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 3))
    a = a @ a.T + np.eye(3)
    inv = inv_spd(a)
    assert np.allclose(inv @ a, np.eye(3), atol=1e-10)
    assert np.array_equal(inv, inv.T)


def test_min_eig():
    assert min_eig(np.diag([3.0, -1.0, 2.0])) == pytest.approx(-1.0)


def test_dedupe_rows_averages_duplicates_in_order():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
    y = np.array([1.0, 5.0, 3.0, 2.0])
    xu, yu = dedupe_rows(x, y)
    assert np.array_equal(xu, [[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(yu, [2.0, 5.0])


def test_dedupe_rows_without_y():
    xu, yu = dedupe_rows(np.array([[1.0], [1.0], [2.0]]))
    assert np.array_equal(xu, [[1.0], [2.0]])
    assert yu is None


def test_dedupe_rows_no_duplicates_is_identity():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((5, 3))
    y = rng.standard_normal(5)
    xu, yu = dedupe_rows(x, y)
    assert np.array_equal(xu, x)
    assert np.array_equal(yu, y)
