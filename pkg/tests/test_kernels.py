from __future__ import annotations

import numpy as np
import pytest

from saddlebench import _pykernels, kernels
from saddlebench.game import gaussian_perturb, make_illcond_game

needs_compiled = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled extension not built")


def _games():
    yield make_illcond_game(0.25).A
    for seed in range(3):
        yield gaussian_perturb(np.zeros((4, 3)), 0.5, seed).A


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python") is _pykernels
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("v", [[0.3, -1.0, 2.5], [1.0, 1.0, 1.0, 1.0], [-3.0, 7.0]])
def test_projection_agrees(v):
    c = kernels.get_backend("cython")
    np.testing.assert_allclose(c.project_simplex(np.array(v)), _pykernels.project_simplex(np.array(v)),
                               atol=1e-15)


@needs_compiled
@pytest.mark.parametrize("name", ["run_ogda", "run_egda"])
def test_projected_solvers_agree(name):
    c = kernels.get_backend("cython")
    for A in _games():
        n, m = A.shape
        x0, y0 = np.full(n, 1 / n), np.full(m, 1 / m)
        a = getattr(c, name)(A, x0, y0, 0.1, 1e-5, 2000, 50, True, x0, y0)
        b = getattr(_pykernels, name)(A, x0, y0, 0.1, 1e-5, 2000, 50, True, x0, y0)
        assert a[2] == b[2]
        np.testing.assert_allclose(a[0], b[0], atol=1e-12)
        np.testing.assert_array_equal(a[4], b[4])
        np.testing.assert_allclose(a[5], b[5], atol=1e-12)
        np.testing.assert_allclose(a[6], b[6], atol=1e-12)


@needs_compiled
def test_omwu_agrees():
    c = kernels.get_backend("cython")
    for A in _games():
        a = c.run_omwu(A, 0.05, 1e-4, 3000, 100, True)
        b = _pykernels.run_omwu(A, 0.05, 1e-4, 3000, 100, True)
        assert a[2] == b[2]
        np.testing.assert_allclose(a[1], b[1], atol=1e-12)
        np.testing.assert_allclose(a[5], b[5], atol=1e-12)


@needs_compiled
def test_smoothing_agrees():
    c = kernels.get_backend("cython")
    for A in _games():
        n, m = A.shape
        x0, y0 = np.full(n, 1 / n), np.full(m, 1 / m)
        L = np.linalg.norm(A, 2)
        a = c.smoothing(A, x0, y0, 0.01, L, 5000)
        b = _pykernels.smoothing(A, x0, y0, 0.01, L, 5000)
        assert a[2] == b[2] and a[3] == b[3]
        np.testing.assert_allclose(a[0], b[0], atol=1e-12)


@needs_compiled
def test_read_only_inputs_accepted():
    c = kernels.get_backend("cython")
    A = make_illcond_game(0.25).A  # read-only
    v = np.full(3, 1 / 3)
    v.setflags(write=False)
    assert c.duality_gap(A, v, v) == pytest.approx(0.25)
    c.run_ogda(A, v, v, 0.1, 1e-3, 10, 1, True, v, v)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@pytest.mark.parametrize("backend", ["python", "cython"])
def test_omwu_overflow_reports_iteration(backend):
    if backend == "cython" and not kernels.compiled_available():
        pytest.skip("compiled extension not built")
    A = np.array([[1e308, 0.0], [0.0, 0.0]])
    with pytest.raises(OverflowError) as info:
        kernels.get_backend(backend).run_omwu(A, 10.0, 0.0, 10, 1, True)
    assert info.value.args[0] == 1
