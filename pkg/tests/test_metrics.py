import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subrk.metrics import (TauMetric, ball_inclusion_check, ball_volume, chord_lower_bound, d_cc, d_tau,
                           distances_from, exponential_map, h1_unit_ball_volume, hamiltonian_endpoint,
                           homogeneous_norm, monotonicity_check, path_energy_extrapolated, sample_tau_ball,
                           shoot_geodesic)
from subrk.models import heisenberg, random_carnot

H = heisenberg(1)
G32 = random_carnot(3, 2, seed=0)
O3 = np.zeros(3)

# frozen by independent routes: shooting at tau = 0 for d, root finding on the
# distance function for the unit ball volume
D_CC = {(0.3, 0.4, 0.2): 1.1721112473501962, (1.0, -0.5, -0.8): 2.2956851332184196}
V1 = 0.8258757622091627

coord = st.floats(-1.5, 1.5)
pt = st.tuples(coord, coord, coord).map(np.array)


@pytest.mark.parametrize("model,tau", [(H, 0.0), (H, 0.7), (G32, 0.0), (G32, 1.3)])
def test_exponential_map_matches_hamiltonian_flow(model, tau):
    rng = np.random.default_rng(3)
    for _ in range(3):
        h0 = rng.normal(size=model.d)
        q = rng.normal(size=model.m) * 2
        a = exponential_map(model, h0, q, tau)
        b = hamiltonian_endpoint(model, h0, q, tau)
        assert np.allclose(a, b, atol=1e-9)


def test_closed_form_values():
    assert d_cc(H, O3, (1.0, 0, 0)).length == 1.0
    for h in (1e-3, 0.5, 2.0):
        assert math.isclose(d_cc(H, O3, (0, 0, h)).length, math.sqrt(4 * math.pi * h), rel_tol=1e-14)
    for p, v in D_CC.items():
        assert math.isclose(d_cc(H, O3, p).length, v, rel_tol=1e-12)


@pytest.mark.parametrize("p", list(D_CC))
def test_shooting_matches_closed_form(p):
    res = shoot_geodesic(H, O3, p, 0.0)
    assert res.converged
    assert math.isclose(res.length, D_CC[p], rel_tol=1e-9)


def test_path_energy_matches_closed_form():
    p = (0.3, 0.4, 0.2)
    est = path_energy_extrapolated(H, O3, p, 0.0, n_segments=32)
    assert math.isclose(est.length, D_CC[p], rel_tol=1e-4)


def test_path_energy_matches_shooting_tau():
    p = (1.0, -0.5, -0.8)
    est = path_energy_extrapolated(H, O3, p, 1.0, n_segments=32)
    assert math.isclose(est.length, d_tau(H, O3, p, 1.0).length, rel_tol=1e-6)


def test_general_group_shooting_vs_path_energy():
    p = np.array([0.4, -0.3, 0.2, 0.3, -0.1])
    a = d_cc(G32, np.zeros(5), p).length
    b = path_energy_extrapolated(G32, np.zeros(5), p, 0.0, n_segments=32).length
    assert math.isclose(a, b, rel_tol=1e-4)


@given(pt, pt, pt)
def test_triangle_inequality_h1(a, b, c):
    ab = d_cc(H, a, b, with_path=False).length
    bc = d_cc(H, b, c, with_path=False).length
    ac = d_cc(H, a, c, with_path=False).length
    assert ac <= ab + bc + 1e-12


@given(pt, pt)
def test_symmetry_and_left_invariance_h1(a, b):
    d = d_cc(H, a, b, with_path=False).length
    assert math.isclose(d, d_cc(H, b, a, with_path=False).length, rel_tol=1e-12, abs_tol=1e-14)
    g = np.array([0.2, -0.7, 0.4])
    assert math.isclose(d, d_cc(H, H.mul(g, a), H.mul(g, b), with_path=False).length, rel_tol=1e-9, abs_tol=1e-12)


@given(pt, st.floats(0.2, 5.0))
def test_dilation_h1(p, lam):
    d = d_cc(H, O3, p, with_path=False).length
    assert math.isclose(d_cc(H, O3, H.dil(lam, p), with_path=False).length, lam * d, rel_tol=1e-10, abs_tol=1e-13)


def test_dtau_dilation_rule():
    p = np.array([0.5, 0.2, 0.6])
    lam, tau = 1.7, 0.8
    a = d_tau(H, O3, p, tau).length
    b = d_tau(H, O3, H.dil(lam, p), lam * tau).length / lam
    assert math.isclose(a, b, rel_tol=1e-8)


def test_dtau_vertical_line_bound():
    for h in (1e-2, 0.3, 1.0):
        assert d_tau(H, O3, (0, 0, h), 1.0).length <= h + 1e-10


def test_dtau_bounded_by_dcc_and_chord():
    p = np.array([0.4, -0.9, 0.7])
    lo = chord_lower_bound(H, p, 0.5)
    val = d_tau(H, O3, p, 0.5).length
    assert lo <= val <= d_cc(H, O3, p).length


def test_monotone_in_tau():
    rep = monotonicity_check(H, O3, (0.3, -0.2, 0.6), [0.25, 0.5, 1.0, 2.0, 4.0])
    assert rep.ok, rep.violations


def test_tau_zero_routes_to_dcc():
    p = (0.3, 0.4, 0.2)
    assert d_tau(H, O3, p, 0.0).length == d_cc(H, O3, p).length


def test_bad_points_rejected():
    with pytest.raises(ValueError):
        d_cc(H, O3, (1.0, 2.0))
    with pytest.raises(ValueError):
        d_cc(H, O3, (np.nan, 0, 0))
    with pytest.raises(ValueError):
        TauMetric(H, -1.0)


def test_homogeneous_norm_scaling():
    p = np.array([0.3, -0.4, 0.9])
    assert math.isclose(homogeneous_norm(H, H.dil(3.0, p)), 3.0 * homogeneous_norm(H, p), rel_tol=1e-12)


def test_unit_ball_volume_oracle():
    assert math.isclose(h1_unit_ball_volume(), V1, rel_tol=1e-12)


def test_ball_volume_monte_carlo():
    v = ball_volume(H, O3, 0.7, n_samples=200_000, seed=11)
    exact = V1 * 0.7**4
    assert abs(v.value - exact) < 4 * v.stderr


def test_ball_volume_translation_invariant():
    x = np.array([0.8, -0.5, 0.3])
    v = ball_volume(H, x, 0.5, n_samples=100_000, seed=2)
    assert abs(v.value - V1 * 0.5**4) < 4 * v.stderr


def test_ball_volume_worker_independent(monkeypatch):
    monkeypatch.setenv("SUBRK_WORKERS", "1")
    a = ball_volume(H, O3, 1.0, n_samples=70_000, seed=5)
    monkeypatch.setenv("SUBRK_WORKERS", "3")
    b = ball_volume(H, O3, 1.0, n_samples=70_000, seed=5)
    assert a.value == b.value and a.stderr == b.stderr


def test_tau_ball_volume_general_route():
    v = ball_volume(H, O3, 0.5, metric=TauMetric(H, 0.5), n_samples=400, seed=1)
    # B_tau(0, r) contains B(0, r)
    assert v.value + 4 * v.stderr >= V1 * 0.5**4


def test_sampled_tau_ball_points_are_inside():
    pts = sample_tau_ball(H, O3, 0.6, 1.0, 20, seed=0)
    d, ok = distances_from(TauMetric(H, 1.0), O3, pts)
    assert ok.all() and (d <= 0.6 + 1e-7).all()


def test_ball_inclusion_vertical_constant():
    rep = ball_inclusion_check(H, O3, 0.5, 1.0, math.sqrt(4 * math.pi), 0.0, n_samples=300, seed=0)
    assert rep.ok
    assert rep.max_dcc <= rep.radius_cc
