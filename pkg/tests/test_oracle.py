from __future__ import annotations

import numpy as np
import pytest

from saddlebench.exceptions import InvalidInputError, UnsupportedSizeError
from saddlebench.game import Game, gaussian_perturb, identity_game, matching_pennies, zero_game
from saddlebench.oracle import certify_nondegenerate, solve_and_certify, solve_exact

from conftest import lp_value_and_x


def test_illcond_closed_form(illcond):
    _, eq, cert = illcond
    expected = np.array([4, 2, 1]) / 7
    np.testing.assert_allclose(eq.x_star, expected, atol=1e-12)
    np.testing.assert_allclose(eq.y_star, expected, atol=1e-12)
    assert eq.value == pytest.approx(1 / 7, abs=1e-12)
    assert eq.support_x == eq.support_y == (0, 1, 2)
    assert cert.is_nondegenerate and cert.tight_count_x == 3 and cert.tight_count_y == 3


def test_matching_pennies():
    eq, cert = solve_and_certify(matching_pennies())
    np.testing.assert_allclose(eq.x_star, [0.5, 0.5])
    assert eq.value == pytest.approx(0.0, abs=1e-15)
    assert cert.is_nondegenerate


def test_identity_2x2():
    eq, cert = solve_and_certify(identity_game(2))
    np.testing.assert_allclose(eq.z_vec, [0.5] * 4)
    assert cert.is_nondegenerate


def test_zero_game_is_degenerate():
    g = zero_game(2, 2)
    eq = solve_exact(g)
    cert = certify_nondegenerate(g, eq)
    assert not cert.is_nondegenerate
    assert cert.tight_count_x == 3


def test_pure_equilibrium():
    A = np.array([[0.0, 1.0], [1.0, 2.0]])  # row 0 dominates for the minimizer
    eq, cert = solve_and_certify(Game(A))
    assert eq.support_x == (0,) and eq.support_y == (1,)
    assert eq.value == 1.0
    assert cert.is_nondegenerate


@pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 5), (6, 6)])
def test_value_matches_lp(shape):
    for seed in range(5):
        g = gaussian_perturb(np.zeros(shape), 0.7, seed)
        eq = solve_exact(g)
        v, _ = lp_value_and_x(g.A)
        assert eq.value == pytest.approx(v, abs=1e-8)
        gap = np.max(g.A.T @ eq.x_star) - np.min(g.A @ eq.y_star)
        assert gap <= 1e-9


def test_lp_guided_path_for_large_games():
    g = gaussian_perturb(np.zeros((15, 15)), 1.0, 3)
    eq, cert = solve_and_certify(g)
    v, _ = lp_value_and_x(g.A)
    assert eq.value == pytest.approx(v, abs=1e-8)
    assert cert.is_nondegenerate


def test_deterministic():
    g = gaussian_perturb(np.zeros((5, 5)), 0.5, 9)
    a, b = solve_exact(g), solve_exact(g)
    np.testing.assert_array_equal(a.x_star, b.x_star)


def test_tolerance_and_size_limits():
    with pytest.raises(InvalidInputError):
        solve_exact(identity_game(2), tol=1e-3)
    with pytest.raises(UnsupportedSizeError):
        solve_exact(zero_game(21, 2))


def test_strict_complementarity_on_random_games():
    sizes_equal = 0
    nondeg = 0
    for seed in range(100):
        eq, cert = solve_and_certify(gaussian_perturb(np.zeros((5, 5)), 0.5, seed))
        if cert.is_nondegenerate:
            nondeg += 1
            sizes_equal += len(eq.support_x) == len(eq.support_y)
    assert nondeg >= 99
    assert sizes_equal == nondeg
