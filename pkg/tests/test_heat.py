import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subrk.heat import (DiffusionSimulator, KernelEvaluator, ball_mass, complement_mass, complement_mass_series,
                        h1_kernel, h1_kernel_rz, heat_content, kernel_box_average, kernel_h1, kernel_mass,
                        log_derivatives, mc_density, semigroup_apply)
from subrk.models import heisenberg, random_carnot

H = heisenberg(1)

# (x, y, z, t) -> p(0, (x, y, z), t), from arbitrary precision oscillatory quadrature
KERNEL = {
    (0.0, 0.0, 0.0, 1.0): 0.0625,
    (0.5, -0.3, 0.2, 1.0): 0.048779458658861925,
    (1.0, 0.0, 0.5, 0.5): 0.039009320165951466,
    (0.0, 0.0, 1.0, 1.0): 0.0099269745737539578,
    (2.0, 1.0, -0.7, 2.0): 0.0048026942434501283,
    (0.3, 0.2, 0.05, 0.1): 2.4708764818667735,
}

# (r, t) -> mass of the kernel outside the unit-scaled ball B(0, r)
COMPLEMENT = {
    (1.0, 0.02): 1.813136275476553e-05,
    (1.0, 0.1): 0.20111611143106817,
    (1.0, 1.0): 0.958878484917056,
    (0.5, 2.0): 0.9992165097907691,
    (2.0, 0.3): 0.09782826881529097,
}


@pytest.mark.parametrize("key", list(KERNEL))
def test_kernel_frozen(key):
    *p, t = key
    assert math.isclose(h1_kernel(np.array([p]), t)[0], KERNEL[key], rel_tol=1e-11)
    assert math.isclose(kernel_h1(np.array(p), t), KERNEL[key], rel_tol=1e-9)


@given(st.floats(0.05, 20.0))
def test_kernel_on_diagonal(t):
    assert math.isclose(h1_kernel(np.zeros((1, 3)), t)[0], 1.0 / (16.0 * t * t), rel_tol=1e-11)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3.0), st.floats(0.3, 3.0))
def test_kernel_scaling(x, y, z, t, lam):
    a = h1_kernel(np.array([[x, y, z]]), t)[0]
    b = h1_kernel(np.array([[lam * x, lam * y, lam * lam * z]]), lam * lam * t)[0]
    # absolute accuracy is measured against the diagonal value 1/(16 t^2)
    assert math.isclose(b * lam**4, a, rel_tol=1e-9, abs_tol=1e-13 / (16 * t * t))


def test_fast_kernel_matches_adaptive():
    rng = np.random.default_rng(4)
    pts = rng.uniform(-3, 3, size=(60, 3))
    ts = rng.uniform(0.05, 3.0, size=60)
    for p, t in zip(pts, ts):
        fast = h1_kernel(p[None, :], t)[0]
        assert abs(fast - kernel_h1(p, t)) * t * t < 1e-11


def test_kernel_symmetric_and_radial():
    ev = KernelEvaluator()
    x, y = np.array([0.2, -0.4, 0.1]), np.array([-0.7, 0.3, 0.9])
    assert math.isclose(ev(x, y, 0.8)[0], ev(y, x, 0.8)[0], rel_tol=1e-12)
    c, s = math.cos(1.1), math.sin(1.1)
    p = np.array([0.6, -0.2, 0.35])
    q = np.array([c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]])
    assert math.isclose(h1_kernel(p[None], 0.5)[0], h1_kernel(q[None], 0.5)[0], rel_tol=1e-12)
    assert math.isclose(h1_kernel_rz(np.array([math.hypot(*p[:2])]), np.array([-p[2]]), 0.5)[0],
                        h1_kernel(p[None], 0.5)[0], rel_tol=1e-12)


def test_evaluator_rejects_other_groups():
    with pytest.raises(ValueError):
        KernelEvaluator(random_carnot(3, 2, seed=0))


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_mass_one(t):
    assert abs(kernel_mass(t) - 1.0) < 1e-8


@pytest.mark.parametrize("key", list(COMPLEMENT))
def test_complement_frozen(key):
    r, t = key
    assert math.isclose(complement_mass(r, t), COMPLEMENT[key], rel_tol=1e-8)
    assert abs(1.0 - ball_mass(r, t) - COMPLEMENT[key]) < 1e-10


def test_complement_series_monotone():
    vals = complement_mass_series(1.0, [0.05, 0.1, 0.3, 1.0, 3.0])
    assert np.all(np.diff(vals) > 0)


def test_semigroup_constant():
    est = semigroup_apply(lambda u: np.ones(len(u)), 0.7, np.array([0.3, 0.1, -0.2]))
    assert abs(est.value - 1.0) < 1e-6


def test_semigroup_property():
    # P_t p(., y, s)(x) = p(x, y, s + t)
    x, y0 = np.array([0.3, -0.1, 0.2]), np.array([-0.2, 0.4, 0.1])
    f = lambda u: h1_kernel(H.mul(H.inv(y0)[None, :], u), 0.4)
    est = semigroup_apply(f, 0.6, x, n_xy=48, n_z=72)
    exact = h1_kernel(H.mul(H.inv(y0), x)[None, :], 1.0)[0]
    assert abs(est.value - exact) < 1e-4


def test_semigroup_montecarlo_constant_and_bound():
    est = semigroup_apply(lambda u: np.ones(len(u)), 0.5, np.zeros(3), method="montecarlo", n_paths=500)
    assert est.value == 1.0
    with pytest.raises(ValueError):
        semigroup_apply(lambda u: np.full(len(u), np.inf), 0.5, np.zeros(3), method="montecarlo", n_paths=10)
    with pytest.raises(ValueError):
        semigroup_apply(lambda u: np.ones(len(u)), -1.0, np.zeros(3))


def test_diffusion_deterministic_across_workers(monkeypatch):
    sim = DiffusionSimulator(H, seed=3)
    monkeypatch.setenv("SUBRK_WORKERS", "1")
    a = sim.endpoints(np.zeros(3), 0.3, 9000)
    monkeypatch.setenv("SUBRK_WORKERS", "4")
    b = sim.endpoints(np.zeros(3), 0.3, 9000)
    assert np.array_equal(a, b)


def test_mc_density_matches_box_average():
    sim = DiffusionSimulator(H, seed=0)
    pts = np.array([[0.0, 0.0, 0.0], [0.6, -0.3, 0.2], [0.2, 0.9, -0.4]])
    half = (0.15, 0.15, 0.1)
    ests = mc_density(sim, np.zeros(3), 1.0, pts, half, 60_000)
    for p, e in zip(pts, ests):
        assert abs(e.value - kernel_box_average(p, half, 1.0)) < 4 * e.stderr


def test_diffusion_on_general_group_has_mean_zero():
    G = random_carnot(3, 2, seed=1)
    ends = DiffusionSimulator(G, seed=2).endpoints(np.zeros(G.n), 0.5, 20_000)
    se = ends.std(axis=0) / math.sqrt(len(ends))
    assert np.all(np.abs(ends.mean(axis=0)) < 5 * se)
    # horizontal part is Brownian motion with variance 2t
    assert np.allclose(ends[:, :3].var(axis=0), 1.0, rtol=0.05)


def test_log_derivatives_heat_equation():
    # for the shifted kernel, d/dt P = L P
    d = log_derivatives(0.5, np.array([0.4, -0.2, 0.3]), h=1e-3)
    assert math.isclose(d.dt_log * d.P, d.LP, rel_tol=1e-5)
    d2 = log_derivatives(0.5, np.array([0.4, -0.2, 0.3]), h=2e-3)
    assert math.isclose(d.gamma, d2.gamma, rel_tol=1e-4)
    assert d.gamma > 0 and d.gamma_Z > 0


def test_heat_content_limits():
    short = heat_content(H, np.zeros(3), 1.0, 0.01, n_paths=4000, seed=0)
    assert short.value > 0.99
    val = heat_content(H, np.zeros(3), 1.0, 0.3, n_paths=20_000, seed=0)
    exact = 1.0 - complement_mass(1.0, 0.3)
    assert abs(val.value - exact) < 4 * val.stderr + 5e-3
    with pytest.raises(ValueError):
        heat_content(H, np.zeros(3), 0.0, 1.0)
