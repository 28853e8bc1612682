import math
from fractions import Fraction
from types import SimpleNamespace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from subrk.bounds import (A_of_r, G_decay_check, G_lower_check, GrowthFunctions, decide, doubling_check,
                          doubling_traced_constant, harnack_check, harnack_exponent, harnack_rhs, kernel_lower_bound,
                          kernel_lower_bound_diag, kernel_upper_bound, li_yau_constant, li_yau_residual,
                          li_yau_tau_residual, reverse_harnack_residual, reverse_harnack_residual_g,
                          reverse_logsob_residual, small_time_residual, traced_C5_C6, upper_bound_alpha,
                          volume_upper_bound, fit_C5, comparison_ratio, distance_comparison_bound)
from subrk.calculus import CDParams

P0 = CDParams(0, Fraction(1, 2), 1, 2)
PNEG = CDParams(-1, 1, 1, 4)
GF0 = GrowthFunctions(P0)
GFN = GrowthFunctions(PNEG)

# closed-form growth constants for the parameters above
C0 = -2.1836254012384697
C0_2STAR = 3.0123264809310477
U0 = 0.049177135902317974
A0 = 0.0024183906955550514


def terms(P, gamma, gamma_Z, LP):
    return SimpleNamespace(P=P, gamma=gamma, gamma_Z=gamma_Z, LP=LP)


def test_g_at_one():
    assert math.isclose(float(GF0.g(1.0)), 1.0 / (2.0 + 2.0 * GF0.c), rel_tol=1e-15)
    assert GF0.c == math.sqrt(5.0)


def test_growth_constants():
    assert math.isclose(GF0.C0, C0, rel_tol=1e-13)
    assert math.isclose(GF0.C0_closed(), C0, rel_tol=1e-15)
    assert math.isclose(GF0.C0_2star, C0_2STAR, rel_tol=1e-13)
    assert math.isclose(GF0.U(1.0), U0, rel_tol=1e-12)
    assert math.isclose(GF0.A(1.0), A0, rel_tol=1e-12)
    assert math.isclose(GF0.C0_star, C0 - math.log(2), rel_tol=1e-15)


@pytest.mark.parametrize("params", [P0, PNEG, CDParams(0, 1, 0, 2)])
@given(u=st.floats(1e-6, 1e9))
def test_G_numeric_matches_closed(params, u):
    gf = GrowthFunctions(params)
    assert abs(gf.G(u) - gf.G_closed(u)) < 1e-11 * max(1.0, abs(gf.G_closed(u)))


def test_C0_for_unit_c():
    gf = GrowthFunctions(CDParams(0, 1, 0, 2))
    assert gf.c == 1.0 and gf.C0_closed() == -1.5
    assert math.isclose(gf.C0, -1.5, rel_tol=1e-13)


@given(u=st.floats(0.01, 100.0))
def test_G_derivative_is_g(u):
    h = 1e-5 * u
    fd = (GF0.G(u + h) - GF0.G(u - h)) / (2 * h)
    assert math.isclose(fd, float(GF0.g(u)), rel_tol=1e-6)


def test_remainder_decays():
    vals = [abs(GF0.R(u)) for u in (1e2, 1e4, 1e6, 1e8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-4


@pytest.mark.parametrize("R", [0.0, 0.3, 1.0, 4.0])
def test_U_lower_bound(R):
    assert GFN.U(R) >= GFN.U_lower(R) * (1 - 1e-12)
    assert math.isclose(GFN.psi(R, GFN.U(R)), GFN.C0_2star, rel_tol=1e-12)


def test_A_behaviour():
    assert len({GF0.A(r) for r in (0.1, 1.0, 10.0)}) == 1
    vals = [A_of_r(GFN, r) for r in (0.1, 0.5, 1.0, 2.0, 5.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        A_of_r(GFN, -1.0)


def test_li_yau_constants():
    assert math.isclose(li_yau_constant(CDParams(-1, Fraction(1, 2), 1, 2), 1.0), 61 / 3, rel_tol=1e-14)
    t = 0.7
    p = P0.as_floats()
    assert math.isclose(li_yau_residual(terms(1.0, 0, 0, 0), P0, t), p.D**2 / (2 * p.d * t), rel_tol=1e-14)
    with pytest.raises(ValueError):
        li_yau_residual(terms(0.0, 0, 0, 0), P0, t)
    with pytest.raises(ValueError):
        li_yau_residual(terms(1.0, 0, 0, 0), P0, 0.0)


def test_li_yau_tau_form_limits():
    tm = terms(0.3, 1.2, 0.4, -0.5)
    # at tau = 0 the tau form reduces to gamma on the left
    r0 = li_yau_tau_residual(tm, P0, 1.0, 0.0)
    assert math.isclose(r0, li_yau_residual(terms(0.3, 1.2, 0.0, -0.5), P0, 1.0), rel_tol=1e-14)
    # the left side tends to 2 rho2 t / 3 gamma_Z as tau grows
    big = li_yau_tau_residual(tm, P0, 1.0, 1e7)
    assert math.isclose(big, li_yau_residual(terms(0.3, 0.0, 0.4, -0.5), P0, 1.0), rel_tol=1e-9)


def test_harnack_values():
    assert math.isclose(harnack_rhs(P0, 0.0, 1.0, 0.5, 1.0), 16 * math.e**2, rel_tol=1e-14)
    with pytest.raises(ValueError):
        harnack_rhs(P0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        harnack_rhs(P0, 0.0, -1.0, 0.5, 1.0)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0.01, 0.99), st.floats(0.1, 5), st.floats(0.2, 5))
def test_harnack_parabolic_scaling(tau, dist, frac, t, lam):
    s = frac * t
    a = harnack_exponent(P0, tau, dist, s, t)
    b = harnack_exponent(P0, lam * tau, lam * dist, lam * lam * s, lam * lam * t)
    assert math.isclose(a, b, rel_tol=1e-10, abs_tol=1e-12)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0.01, 0.99), st.floats(0.1, 5))
def test_harnack_monotone(tau, d1, d2, frac, t):
    lo, hi = sorted((d1, d2))
    assert harnack_exponent(PNEG, tau, lo, frac * t, t) <= harnack_exponent(PNEG, tau, hi, frac * t, t)
    assert harnack_exponent(PNEG, 0.0, lo, frac * t, t) <= harnack_exponent(PNEG, tau, lo, frac * t, t)


def test_harnack_kernel_check():
    x, y, z = np.array([0.2, 0.1, -0.3]), np.array([-0.4, 0.5, 0.2]), np.array([0.6, -0.2, 0.1])
    for reading in ("yz", "xy"):
        v = harnack_check(x, y, z, 0.5, 1.0, 1.0, P0, reading=reading)
        assert v.verdict == "pass" and v.lhs > 0
    same = harnack_check(x, y, y, 1.0, 1.0, 1.0, P0)
    assert same.rhs == 1.0 and math.isclose(same.lhs, 1.0, rel_tol=1e-15)
    with pytest.raises(ValueError):
        harnack_check(x, y, z, 0.5, 1.0, 1.0, P0, reading="zz")


@given(st.floats(1e-3, 50.0), st.floats(-5, 5), st.floats(0.05, 10))
def test_reverse_harnack_forms_agree(u, u_t, t):
    for params, gf in ((P0, GF0), (PNEG, GFN)):
        a = reverse_harnack_residual(u, u_t, params, t)
        b = reverse_harnack_residual_g(u, u_t, gf, t)
        assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12 * (abs(u_t) * t + 1 / float(gf.g(u))))


def test_reverse_logsob_without_C():
    p = P0.as_floats()
    r = reverse_logsob_residual(0.4, 1.0, 0.5, 0.3, 0.2, P0, 0.0, 1.0, 2.0)
    expect = (1 / p.rho2) * (1 + 2 * p.kappa / p.rho2) * 0.2 - (2.0 / p.rho2 * 0.4 * 1.0 + 4.0 * 0.4 * 0.5)
    assert math.isclose(r, expect, rel_tol=1e-14)
    # delta does not enter when C = 0
    assert r == reverse_logsob_residual(0.4, 1.0, 0.5, 0.3, 0.2, P0, 0.0, 7.0, 2.0)
    with pytest.raises(ValueError):
        reverse_logsob_residual(0.4, 1.0, 0.5, 0.3, 0.2, P0, -1.0, 1.0, 2.0)


# --- independent arbitrary precision evaluators -----------------------------

def _mp_params(p):
    rho1, rho2, kappa, d = (mp.mpf(float(v)) for v in (p.rho1, p.rho2, p.kappa, p.d))
    rm = max(-rho1, mp.mpf(0))
    D = d * (1 + 3 * kappa / (2 * rho2))
    return rho2, kappa, d, rm, D


def mp_li_yau(P, g, gz, LP, p, t):
    rho2, kappa, d, rm, D = _mp_params(p)
    lhs = g + 2 * rho2 * t / 3 * gz
    rhs = (D / d + 2 * rm * t / 3) * LP / P + d * rm**2 * t / 6 + rm * D / 2 + D**2 / (2 * d * t)
    return rhs - lhs


def mp_harnack(p, tau, dist, s, t):
    rho2, kappa, d, rm, D = _mp_params(p)
    br = D / d + tau**2 * rm / rho2 + rm * (t + s) / 3 + 3 * tau**2 * D / (2 * (t - s) * rho2 * d) * mp.log(t / s)
    return D / 2 * mp.log(t / s) + d * rm * (t - s) / 4 + dist**2 / (4 * (t - s)) * br


def mp_logsob(P, g, gz, LP, ent, p, C, delta, t):
    rho2, kappa, d, rm, D = _mp_params(p)
    lhs = t / rho2 * P * g + t**2 * P * gz
    rhs = (1 / rho2) * (1 + 2 * kappa / rho2 + 4 * C / d + 2 * t * rm) * ent \
        - 4 * C / (d * rho2) * t / (1 + delta) * LP + 2 * C**2 / (d * rho2) * mp.log(1 + 1 / delta) * P
    return rhs - lhs, abs(rhs) + abs(lhs)


def test_dual_evaluation_against_mpmath():
    mp.mp.dps = 40
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = CDParams(float(rng.uniform(-2, 2)), float(rng.uniform(0.1, 3)), float(rng.uniform(0, 2)),
                     float(rng.integers(1, 6)))
        P, g, gz, LP, ent = rng.uniform(0.1, 2), rng.uniform(0, 3), rng.uniform(0, 3), rng.normal(), rng.uniform(0, 1)
        t = rng.uniform(0.05, 5)
        ref = mp_li_yau(*(mp.mpf(v) for v in (P, g, gz, LP)), p, mp.mpf(t))
        val = li_yau_residual(terms(P, g, gz, LP), p, t)
        assert math.isclose(val, float(ref), rel_tol=1e-12, abs_tol=1e-11)

        tau, dist, s = rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0.01, 0.99) * t
        ref = mp_harnack(p, mp.mpf(tau), mp.mpf(dist), mp.mpf(s), mp.mpf(t))
        assert math.isclose(harnack_exponent(p, tau, dist, s, t), float(ref), rel_tol=1e-12, abs_tol=1e-12)

        C, delta = rng.uniform(0, 2), rng.uniform(0.1, 3)
        ref, scale = mp_logsob(*(mp.mpf(v) for v in (P, g, gz, LP, ent)), p, mp.mpf(C), mp.mpf(delta), mp.mpf(t))
        val = reverse_logsob_residual(P, g, gz, LP, ent, p, C, delta, t)
        assert abs(val - float(ref)) <= 1e-12 * float(scale)


# --- decay checks ------------------------------------------------------------

def test_G_decay_equal_times_is_tight():
    (pc,) = G_decay_check([0.5, 0.5], [0.3, 0.3], GF0)
    assert pc.residual == 0.0 and pc.ok
    with pytest.raises(ValueError):
        G_decay_check([1.0, 0.5], [0.3, 0.4], GF0)
    with pytest.raises(ValueError):
        G_decay_check([0.5, 1.0], [0.3, 1.0], GF0)


def test_G_lower_check_residual():
    (pc,) = G_lower_check([0.25], [0.5], 1.0, GF0)
    assert math.isclose(pc.rhs, math.log(2.0) + GF0.C0_star, rel_tol=1e-14)


def test_small_time_report():
    s = [0.2, 0.1, 0.05, 0.025]
    vals = [math.exp(-0.3 / x) for x in s]
    rep = small_time_residual(1.0, s, vals)
    assert rep.ok and not rep.resolution_limited and math.isclose(rep.running_inf, 0.3)
    rep = small_time_residual(1.0, s, [0.5, 0.1, 1e-16, 0.0])
    assert rep.resolution_limited and len(rep.values) == 2
    with pytest.raises(ValueError):
        small_time_residual(1.0, [0.1, 0.2], [0.5, 0.5])


# --- kernel, volume, doubling, distance --------------------------------------

def test_upper_bound_alpha_identity():
    for eps in (0.1, 0.5, 1.0, 3.0):
        a = upper_bound_alpha(eps)
        assert math.isclose(4 * (1 + a) ** 4, 4 + eps, rel_tol=1e-14)
    with pytest.raises(ValueError):
        upper_bound_alpha(0.0)


def test_traced_C5_decreases_in_eps():
    c5 = [traced_C5_C6(P0, e)[0] for e in (0.25, 0.5, 1.0, 2.0)]
    assert all(b < a for a, b in zip(c5, c5[1:]))


def test_fit_C5_is_tight():
    samples = [{"p": 0.1, "vol_x": 2.0, "vol_y": 2.0, "dist": 1.0, "t": 1.0},
               {"p": 0.01, "vol_x": 1.0, "vol_y": 4.0, "dist": 2.0, "t": 0.5}]
    C5 = fit_C5(P0, 1.0, 0.0, samples)
    ub = [kernel_upper_bound(P0, 1.0, s["vol_x"], s["vol_y"], s["dist"], s["t"], C5, 0.0) for s in samples]
    assert all(u >= s["p"] * (1 - 1e-14) for u, s in zip(ub, samples))
    assert any(math.isclose(u, s["p"], rel_tol=1e-14) for u, s in zip(ub, samples))


def test_kernel_lower_bounds_positive_and_gaussian():
    a = kernel_lower_bound(P0, GF0, 1.0, 0.0, 1.0)
    b = kernel_lower_bound(P0, GF0, 1.0, 1.0, 1.0)
    p = P0.as_floats()
    assert math.isclose(b / a, math.exp(-p.D / (2 * p.d)), rel_tol=1e-14)
    assert kernel_lower_bound_diag(P0, GF0, 1.0, 1.0) > 0
    with pytest.raises(ValueError):
        kernel_lower_bound(P0, GF0, 0.0, 1.0, 1.0)


def test_volume_upper_bound_homogeneous():
    p = P0.as_floats()
    a = volume_upper_bound(P0, 1.0, 1.0, 2.0, 0.0625)
    assert math.isclose(a, 2.0**p.D / 0.0625, rel_tol=1e-14)
    with pytest.raises(ValueError):
        volume_upper_bound(P0, 1.0, 1.0, 0.5, 0.0625)


def test_doubling_checks():
    C = doubling_traced_constant(P0, GF0, 1.0, 1.0)
    assert math.isclose(C, 2.0**6 * A0**-4, rel_tol=1e-11)
    v = doubling_check(P0, 1.0, 16.0, 1.0, 16.0, 0.0)
    assert v.verdict == "pass" and v.residual == 0.0
    assert doubling_check(P0, 1.0, 17.0, 1.0, 16.0, 0.0, stderr_2r=0.5).verdict == "inconclusive"
    assert doubling_check(P0, 1.0, 17.0, 1.0, 16.0, 0.0, stderr_2r=0.1).verdict == "fail"


def test_decide():
    assert decide(0.0, None, 0.0) == "pass"
    assert decide(-1.0, 0.4, 0.0) == "inconclusive"
    assert decide(-1.0, 0.2, 0.0) == "fail"
    assert decide(-1.0, 0.4, 0.0, k=1) == "fail"


def test_distance_comparison():
    assert comparison_ratio(2.0, 4.0) == 0.5
    assert comparison_ratio(1.0, 0.25) == 2.0
    assert comparison_ratio(0.0, 0.0) == 0.0
    assert distance_comparison_bound(PNEG, 1.0, 4.0) == 8.0
