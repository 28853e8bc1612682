"""The numba and numpy variants of every hot loop agree."""

import math

import numpy as np
import pytest

from subrk import kernels
from subrk.models import heisenberg, random_carnot


def test_distance_backends_agree():
    rng = np.random.default_rng(0)
    r = np.abs(rng.normal(size=2000)) * rng.choice([1e-6, 1.0, 10.0], 2000)
    z = np.abs(rng.normal(size=2000)) * rng.choice([0.0, 1e-8, 1.0, 100.0], 2000)
    a = kernels.h1_distance_numba(r, z)
    b = kernels.h1_distance_numpy(r, z)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_distance_special_cases():
    d = kernels.h1_distance_numba(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    assert d[0] == 1.0 and d[2] == 0.0
    assert math.isclose(d[1], math.sqrt(4 * math.pi), rel_tol=1e-15)


@pytest.mark.parametrize("model", [heisenberg(1), random_carnot(3, 2, seed=0)])
def test_diffusion_backends_agree(model):
    rng = np.random.default_rng(1)
    normals = rng.standard_normal((50, 64, model.d))
    start = rng.normal(size=model.n)
    a = kernels.diffusion_endpoints_numba(start, normals, 0.01, model.B)
    b = kernels.diffusion_endpoints_numpy(start, normals, 0.01, model.B)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


def test_kernel_sum_backends_agree():
    nodes, weights = kernels.kernel_nodes(1.0, 64.0)
    rng = np.random.default_rng(2)
    a = rng.uniform(0, 30, 500)
    w = rng.uniform(0, 5, 500)
    assert np.allclose(kernels.h1_kernel_sum_numba(a, w, nodes, weights),
                       kernels.h1_kernel_sum_numpy(a, w, nodes, weights), rtol=1e-12, atol=1e-15)


def test_kernel_nodes_integrate_polynomials():
    nodes, weights = kernels.kernel_nodes(2.0, 8.0)
    assert math.isclose(weights @ nodes**5, 8.0**6 / 6, rel_tol=1e-14)


def test_backend_flag():
    assert kernels.BACKEND in ("numba", "numpy")


def test_env_flag_selects_numpy(tmp_path):
    import os
    import subprocess
    import sys

    code = ("import numpy as np; from subrk import kernels; "
            "print(kernels.BACKEND, kernels.h1_distance(np.array([0.3]), np.array([0.2]))[0])")
    env = dict(os.environ, SUBRK_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    backend, value = out.split()
    assert backend == "numpy"
    assert math.isclose(float(value), kernels.h1_distance_numba(np.array([0.3]), np.array([0.2]))[0], rel_tol=1e-13)
