"""Property-based checks of the structural invariants."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import bisect_projection, brute_gap
from saddlebench import errorbound as eb
from saddlebench.game import Game, JointStrategy, duality_gap, gaussian_perturb, project_simplex
from saddlebench.oracle import solve_and_certify
from saddlebench.solvers import SolverConfig, egda_gap_bound, run_omwu

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _simplex(draw, k):
    w = draw(arrays(np.float64, k, elements=st.floats(0, 1)))
    w = w + 1e-3
    return w / w.sum()


@st.composite
def game_and_point(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 6))
    A = draw(arrays(np.float64, (n, m), elements=finite))
    return A, _simplex(draw, n), _simplex(draw, m)


@st.composite
def perturbed_game(draw):
    d = draw(st.integers(2, 5))
    seed = draw(st.integers(0, 2**31 - 1))
    sigma = draw(st.sampled_from([0.1, 0.5, 1.0]))
    return gaussian_perturb(np.zeros((d, d)), sigma, seed)


@SETTINGS
@given(arrays(np.float64, st.integers(1, 12), elements=finite))
def test_projection_properties(v):
    p = project_simplex(v)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(p, bisect_projection(v), atol=1e-9)
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)
    # variational characterisation: <v - p, q - p> <= 0 at every vertex q
    for k in range(v.size):
        e = np.zeros(v.size)
        e[k] = 1.0
        assert float((v - p) @ (e - p)) <= 1e-9 * (1 + np.abs(v).max())


@SETTINGS
@given(game_and_point())
def test_gap_nonnegative_and_matches_brute_force(case):
    A, x, y = case
    phi = duality_gap(Game(A), JointStrategy(x, y))
    assert phi >= -1e-12
    assert phi == pytest.approx(brute_gap(A, x, y), abs=1e-9 * (1 + np.abs(A).max()))


@SETTINGS
@given(game_and_point(), st.floats(0.01, 1.0))
def test_egda_gap_bound_random(case, eta_scale):
    A, x, y = case
    g = Game(A)
    L = max(np.linalg.norm(A, 2), 1e-12)
    eta = eta_scale / L
    z = JointStrategy(x, y)
    assert duality_gap(g, z) <= egda_gap_bound(g, z, eta) * (1 + 1e-9) + 1e-9


@SETTINGS
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_T_unimodular(nb, nn, data):
    B = tuple(sorted(data.draw(st.sets(st.integers(0, 9), min_size=nb, max_size=nb))))
    N = tuple(sorted(data.draw(st.sets(st.integers(0, 9), min_size=nn, max_size=nn))))
    i = data.draw(st.sampled_from(B))
    j = data.draw(st.sampled_from(N))
    T = eb.build_T(B, N, i, j)
    assert T.shape == (nb * nn, nb * nn)
    assert abs(abs(np.linalg.det(T)) - 1.0) <= 1e-9


@SETTINGS
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_negative_second_moment(d, seed):
    M = np.random.default_rng(seed).standard_normal((d, d))
    assume(np.linalg.cond(M) < 1e6)
    s, r, c = eb.neg_second_moment(M)
    assert r == pytest.approx(s, rel=1e-8)
    assert c == pytest.approx(s, rel=1e-8)


@SETTINGS
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_lb_sigma_and_coefficient_norm(d, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((d, d))
    assume(np.linalg.cond(M) < 1e8)
    smin = eb.sigma_min(M)
    assert smin >= eb.lb_sigma_bound(M) * (1 - 1e-10)
    x = rng.standard_normal(d)
    p = eb.column_coefficients(M, x)
    np.testing.assert_allclose(M @ p, x, atol=1e-8 * (1 + np.abs(x).max()) * np.linalg.cond(M))
    assert np.linalg.norm(p) <= np.linalg.norm(x) / smin * (1 + 1e-10)


@settings(max_examples=40, deadline=None)
@given(perturbed_game())
def test_equilibrium_structure(g):
    eq, cert = solve_and_certify(g)
    assert duality_gap(g, JointStrategy(eq.x_star, eq.y_star)) <= 1e-8
    assume(cert.is_nondegenerate)
    qs = eb.q_transform(g, eq)
    rc, rb, rd = qs.residuals()
    assert max(rc, rb) <= 1e-8
    assert len(eq.support_x) == len(eq.support_y)
    gP, gD = eb.compute_gamma(qs)
    if qs.empty:
        return
    assert gD >= gP / math.sqrt(len(qs.B_tilde)) * (1 - 1e-9)
    Qbar = eb.bar_Q(qs, eq)
    assert eb.sigma_min(Qbar) >= eb.lb_sigma_bound(Qbar) * (1 - 1e-10)
    assert gP <= eb.barq_factor(qs) * eb.column_distances(Qbar).min() * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(perturbed_game(), st.sampled_from([0.01, 0.05, 0.2]))
def test_omwu_iterates_stay_interior(g, eta):
    res = run_omwu(g, SolverConfig("omwu", eta=eta, max_iters=200, eps=1e-12))
    assert np.all(res.z_final.x > 0) and np.all(res.z_final.y > 0)
    assert abs(res.z_final.x.sum() - 1) < 1e-12 and abs(res.z_final.y.sum() - 1) < 1e-12
    assert np.all(np.asarray(res.trajectory.phi) >= -1e-12)
