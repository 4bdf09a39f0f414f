import numpy as np
import pytest
import scipy.sparse as sp

from reflspde import _pykernels, kernels
from reflspde.grid import build_grid

compiled = kernels.backends().get("cython")
needs_cython = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _system(n, seed):
    g = build_grid(1, n)
    rng = np.random.default_rng(seed)
    M = (g.laplacian + sp.diags(rng.uniform(0, 2, n))).tocsr()
    M.sort_indices()
    rhs = rng.normal(0, 50, n)
    lo, hi = -np.abs(rng.normal(0, 1, n)) - 0.1, np.abs(rng.normal(0, 1, n)) + 0.1
    return M, rhs, lo, hi


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.backends()


@needs_cython
@pytest.mark.parametrize("seed", range(5))
def test_psor_backends_match(seed):
    M, rhs, lo, hi = _system(30, seed)
    args = (M.indptr.astype(np.int32), M.indices.astype(np.int32), M.data.astype(float), rhs, lo, hi)
    ua, ub = np.zeros(30), np.zeros(30)
    ca = compiled.psor_sweeps(*args, ua, 1.3, 50)
    cb = _pykernels.psor_sweeps(*args, ub, 1.3, 50)
    np.testing.assert_allclose(ua, ub, rtol=0, atol=1e-13)
    assert ca == pytest.approx(cb, abs=1e-13)
    assert np.all(ua >= lo) and np.all(ua <= hi)


@needs_cython
@pytest.mark.parametrize("seed", range(5))
def test_enumeration_backends_match(seed):
    M, rhs, lo, hi = _system(7, seed)
    Md = np.ascontiguousarray(M.toarray())
    a = compiled.enumerate_active_sets(Md, rhs, lo, hi, 1e-11)
    b = _pykernels.enumerate_active_sets(Md, rhs, lo, hi, 1e-11)
    assert a[0] == b[0] == 1 and a[1] == b[1]
    np.testing.assert_allclose(np.asarray(a[2]), b[2], atol=1e-10)


def test_pure_python_env(monkeypatch):
    import importlib
    monkeypatch.setenv("REFLSPDE_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("REFLSPDE_PURE_PYTHON")
        importlib.reload(kernels)
