import numpy as np

from qgraph import kernels
from qgraph.solver import bond_basis, bond_matrix

from conftest import random_k4


def test_numpy_and_numba_paths_agree(rng):
    if kernels.eigenphases_numba is None:
        import pytest

        pytest.skip("numba unavailable")
    g = random_k4(rng, phase_scale=1.5)
    lengths, chis, smat = bond_basis(g)
    ks = np.linspace(0.5, 40.0, 257)
    a = np.sort(kernels.eigenphases_numpy(ks, lengths, chis, smat), axis=1)
    b = np.sort(kernels.eigenphases_numba(ks, lengths, chis, smat), axis=1)
    assert np.abs(a - b).max() < 1e-12


def test_unitarity_of_bond_matrix(rng):
    # 1000 random (graph, k) draws: every singular value of U equals 1
    for _ in range(50):
        g = random_k4(rng, phase_scale=float(rng.uniform(0, 2)))
        for k in rng.uniform(0.1, 60.0, size=20):
            u = bond_matrix(g, float(k))
            sv = np.linalg.svd(u, compute_uv=False)
            assert np.abs(sv - 1.0).max() < 1e-10


def test_norm_preservation_random_vectors(rng):
    g = random_k4(rng, phase_scale=0.7)
    for k in rng.uniform(0.5, 30.0, size=10):
        u = bond_matrix(g, float(k))
        x = rng.normal(size=u.shape[0]) + 1j * rng.normal(size=u.shape[0])
        assert abs(np.linalg.norm(u @ x) - np.linalg.norm(x)) < 1e-12 * np.linalg.norm(x)


def test_dispatch_respects_env_flag():
    # the active kernel is one of the two implementations
    assert kernels.eigenphases in (kernels.eigenphases_numba, kernels.eigenphases_numpy)
    if kernels.NUMBA_ENABLED:
        assert kernels.eigenphases is kernels.eigenphases_numba
    else:
        assert kernels.eigenphases is kernels.eigenphases_numpy
