from __future__ import annotations

import json

import numpy as np
import pytest

from saddlebench.exceptions import InvalidInputError
from saddlebench.game import (Game, JointStrategy, Provenance, Trajectory, check_simplex, derive_seed,
                              duality_gap, game_from_json, game_to_json, gaussian_perturb,
                              identity_game, make_illcond_game, matching_pennies, operator_F,
                              project_joint, project_simplex, read_game, spectral_norm, write_game,
                              zero_game)

from conftest import bisect_projection, brute_gap


class TestProjection:
    def test_fixed_point_on_simplex(self):
        np.testing.assert_allclose(project_simplex([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5], atol=1e-15)

    def test_vertex_attractor(self):
        np.testing.assert_array_equal(project_simplex([2.0, 0.0, 0.0]), [1.0, 0.0, 0.0])

    @pytest.mark.parametrize("v", [[0.5, 0.5, 0.5], [3.0, -1.0, 2.0, 0.1], [-5.0, -5.0], [1e6, 1e6 + 1]])
    def test_matches_bisection_oracle(self, v):
        np.testing.assert_allclose(project_simplex(v), bisect_projection(v), atol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            project_simplex([np.nan, 1.0])
        with pytest.raises(InvalidInputError):
            project_simplex([])

    def test_joint_projects_blocks_separately(self):
        z = project_joint([1.0, 1.0, 5.0, 0.0, 0.0], 2)
        np.testing.assert_allclose(z, [0.5, 0.5, 1.0, 0.0, 0.0])


class TestGap:
    def test_pennies_pure_profile(self):
        g = matching_pennies()
        z = JointStrategy([1, 0], [1, 0])
        assert duality_gap(g, z) == 2.0
        assert duality_gap(g, z) == brute_gap(g.A, z.x, z.y)

    def test_illcond_vertex_pair(self):
        g = make_illcond_game(0.25)
        assert duality_gap(g, JointStrategy([1, 0, 0], [0, 0, 1])) == 0.25

    def test_uniform_gap(self):
        g = make_illcond_game(0.25)
        assert duality_gap(g, JointStrategy.uniform(3, 3)) == pytest.approx(0.25, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            duality_gap(matching_pennies(), JointStrategy.uniform(3, 2))

    def test_operator(self):
        g = matching_pennies()
        F = operator_F(g, JointStrategy([1, 0], [1, 0]))
        np.testing.assert_array_equal(F, [1, -1, -1, 1])
        np.testing.assert_array_equal(operator_F(g, JointStrategy.uniform(2, 2)), 0)


class TestTypes:
    def test_game_validation(self):
        with pytest.raises(InvalidInputError):
            Game(np.zeros((0, 3)))
        with pytest.raises(InvalidInputError):
            Game([[1.0, np.inf]])
        with pytest.raises(InvalidInputError):
            Game([1.0, 2.0])

    def test_game_is_read_only(self):
        g = identity_game(2)
        with pytest.raises(ValueError):
            g.A[0, 0] = 3.0

    def test_simplex_check(self):
        with pytest.raises(InvalidInputError):
            check_simplex([0.5, 0.6])
        with pytest.raises(InvalidInputError):
            check_simplex([1.5, -0.5])
        with pytest.raises(InvalidInputError):
            check_simplex([0.5, 0.5], dim=3)
        assert check_simplex([0.25, 0.75]).sum() == 1.0

    def test_trajectory_sequence(self):
        t = Trajectory(np.array([0, 5]), np.array([1.0, 0.5]), None)
        assert len(t) == 2
        assert t[1].iter == 5 and t[1].dist_to_eq is None
        assert [r.phi for r in t] == [1.0, 0.5]

    def test_spectral_norm(self):
        assert spectral_norm(np.diag([0.25, 0.5, 1.0])) == pytest.approx(1.0)
        assert spectral_norm(np.zeros((2, 2))) == 0.0


class TestGenerators:
    def test_illcond(self):
        np.testing.assert_array_equal(make_illcond_game(0.25).A, np.diag([0.25, 0.5, 1.0]))
        np.testing.assert_array_equal(make_illcond_game(0.5).A, np.diag([0.5, 1.0, 1.0]))
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(InvalidInputError):
                make_illcond_game(bad)

    def test_perturb_reproducible(self):
        a = gaussian_perturb(np.zeros((3, 3)), 0.5, 42)
        b = gaussian_perturb(np.zeros((3, 3)), 0.5, 42)
        np.testing.assert_array_equal(a.A, b.A)
        assert a.provenance.seed == 42 and a.provenance.sigma == 0.5

    def test_perturb_uses_pcg64_stream(self):
        ref = np.random.Generator(np.random.PCG64(7)).normal(0.0, 0.3, size=(2, 4))
        np.testing.assert_array_equal(gaussian_perturb(np.zeros((2, 4)), 0.3, 7).A, ref)

    @pytest.mark.parametrize("sigma", [0.0, -0.1, 1.5])
    def test_perturb_sigma_range(self, sigma):
        with pytest.raises(InvalidInputError):
            gaussian_perturb(np.zeros((2, 2)), sigma, 0)

    def test_perturb_base_range(self):
        with pytest.raises(InvalidInputError):
            gaussian_perturb(np.full((2, 2), 2.0), 0.1, 0)

    def test_derive_seed(self):
        assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
        assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
        assert 0 <= derive_seed(5, 3) < 2**64

    def test_other_generators(self):
        assert zero_game(2, 3).shape == (2, 3)
        np.testing.assert_array_equal(identity_game(3).A, np.eye(3))


class TestFileFormat:
    def test_roundtrip_exact(self, tmp_path):
        g = gaussian_perturb(np.diag([0.25, 0.5, 1.0]), 0.1, 123)
        path = tmp_path / "g.json"
        write_game(g, path)
        h = read_game(path)
        np.testing.assert_array_equal(g.A, h.A)
        np.testing.assert_array_equal(g.provenance.A_bar, h.provenance.A_bar)
        assert h.provenance.seed == 123

    def test_schema(self):
        doc = json.loads(game_to_json(identity_game(2)))
        assert doc == {"n": 2, "m": 2, "A": [1, 0, 0, 1]}

    def test_bad_files(self, tmp_path):
        with pytest.raises(InvalidInputError, match="missing.json"):
            read_game(tmp_path / "missing.json")
        with pytest.raises(InvalidInputError):
            game_from_json("{not json")
        with pytest.raises(InvalidInputError):
            game_from_json('{"n": 2, "m": 2, "A": [1, 2, 3]}')

    def test_provenance_validation(self):
        with pytest.raises(InvalidInputError):
            Provenance(np.zeros((2, 2)), 2.0, 0)
