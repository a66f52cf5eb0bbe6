import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import argrelmin

from spinsqueeze import oat
from spinsqueeze.errors import SearchError
from spinsqueeze.spin import DickeState, coherent_state, moments, optimal_xi_squared

from oracles import coherent_x, dense_moments, dense_twist, spin_matrices

GAUSS_I = (2 * np.pi) ** -1.5


def gaussian_consts(a=6e-3):
    g = 4 * np.pi * a
    return oat.InteractionConstants(g, g, g / 2, GAUSS_I)


def test_evolve_identity_at_zero():
    s = coherent_state(9)
    out = oat.evolve(s, oat.TwistingParams(1.0, 9), 0.0)
    assert np.array_equal(out.amplitudes, s.amplitudes)


def test_evolve_full_period_even_n():
    n = 10
    s = coherent_state(n)
    out = oat.evolve(s, oat.TwistingParams(1.0, n), 2 * np.pi)
    overlap = np.vdot(s.amplitudes, out.amplitudes)
    assert abs(overlap) == pytest.approx(1.0, abs=1e-12)


def test_evolve_n3_matches_dense():
    n = 3
    psi = dense_twist(n, 0.3) @ coherent_x(n)
    mean, cov = dense_moments(psi, spin_matrices(n))
    moms = moments(oat.evolve(coherent_state(n), oat.TwistingParams(1.0, n), 0.3))
    assert np.abs(moms.mean - mean).max() < 1e-12
    assert np.abs(moms.cov - cov).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 500), st.floats(-5, 5), st.floats(0, 50))
def test_evolve_unitary_and_conserves_jz(n, chi, t):
    s = coherent_state(n, 1.1, 0.3)
    out = oat.evolve(s, oat.TwistingParams(chi, n), t)
    assert np.allclose(np.abs(out.amplitudes), np.abs(s.amplitudes), atol=1e-14)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-14
    m0, m1 = moments(s), moments(out)
    assert m1.mean[2] == pytest.approx(m0.mean[2], abs=1e-9)
    assert m1.cov[2, 2] == pytest.approx(m0.cov[2, 2], abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 300), st.floats(0.01, 5), st.floats(0, 20))
def test_time_reversal(n, chi, t):
    s = coherent_state(n)
    fwd = oat.evolve(s, oat.TwistingParams(chi, n), t)
    back = oat.evolve(fwd, oat.TwistingParams(-chi, n), t)
    assert np.abs(back.amplitudes - s.amplitudes).max() < 1e-12


def test_evolve_rejects_mismatch():
    with pytest.raises(ValueError):
        oat.evolve(coherent_state(3), oat.TwistingParams(1.0, 4), 1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        oat.TwistingParams(np.inf, 10)
    with pytest.raises(ValueError):
        oat.TwistingParams(1.0, 0)


def test_curve_starts_at_one():
    res = oat.xi2_curve(oat.TwistingParams(1.0, 100), [0.0, 0.01])
    assert res[0].xi2 == pytest.approx(1.0, abs=1e-12)
    assert res[1].xi2 < 1


def test_curve_rejects_unsorted():
    with pytest.raises(ValueError):
        oat.xi2_curve(oat.TwistingParams(1.0, 10), [0.2, 0.1])


def _scalar_xi2(n, mu):
    """Independent scalar implementation from the closed-form OAT moments."""
    j = n / 2
    a = 1 - np.cos(2 * mu) ** (n - 2)
    b = 4 * np.sin(mu) * np.cos(mu) ** (n - 2)
    sx = j * np.cos(mu) ** (n - 1)
    var_min = j / 2 * (1 + 0.25 * (n - 1) * (a - np.sqrt(a * a + b * b)))
    return n * var_min / sx**2


def test_scalar_oracle_agrees_with_dense_oracle():
    for n in (3, 5, 6):
        for mu in (0.1, 0.4):
            psi = dense_twist(n, mu) @ coherent_x(n)
            mean, cov = dense_moments(psi, spin_matrices(n))
            block = cov[1:, 1:]
            lam = np.linalg.eigvalsh(block)[0]
            assert _scalar_xi2(n, mu) == pytest.approx(n * lam / mean[0] ** 2, rel=1e-12)


def test_curve_minimum_n100_matches_scalar_oracle():
    n = 100
    from scipy.optimize import minimize_scalar

    golden = minimize_scalar(lambda m: _scalar_xi2(n, m), bracket=(0.01, 0.05, 0.2), method="golden", tol=1e-12)
    mus = np.linspace(golden.x - 1e-4, golden.x + 1e-4, 2001)
    vals = np.array([r.xi2 for r in oat.xi2_curve(oat.TwistingParams(1.0, n), mus)])
    assert vals.min() == pytest.approx(golden.fun, abs=1e-10)


@pytest.mark.parametrize("n", [10, 100, 1000, 10_000])
def test_curve_matches_scalar_oracle(n):
    mus = np.geomspace(1e-4, min(0.3, 3 / np.sqrt(n)), 25)
    vals = np.array([r.xi2 for r in oat.xi2_curve(oat.TwistingParams(1.0, n), mus)])
    ref = np.array([_scalar_xi2(n, m) for m in mus])
    assert np.allclose(vals, ref, rtol=1e-8)


def test_asymptotic_values():
    assert oat.asymptotic_min(3) == pytest.approx(0.5)
    assert oat.asymptotic_min(100_000) == pytest.approx(4.827e-4, rel=1e-3)


def test_optimum_n1e5_three_orders():
    t, xi2 = oat.find_optimal_time(oat.TwistingParams(1.0, 100_000))
    assert xi2 == pytest.approx(4.83e-4, rel=0.05)
    assert 6e-4 / 1.5 <= t <= 6e-4 * 1.5


def test_optimal_time_n10_grid_scan():
    n = 10
    t, xi2 = oat.find_optimal_time(oat.TwistingParams(1.0, n))
    grid = np.linspace(1e-4, 0.6, 6001)
    vals = np.array([r.xi2 for r in oat.xi2_curve(oat.TwistingParams(1.0, n), grid)])
    i = argrelmin(vals)[0][0]
    assert abs(t - grid[i]) <= grid[1] - grid[0]
    assert xi2 <= vals[i] + 1e-12


def test_optimal_time_scales_with_chi():
    t1, x1 = oat.find_optimal_time(oat.TwistingParams(1.0, 500))
    t2, x2 = oat.find_optimal_time(oat.TwistingParams(4.0, 500))
    assert t2 == pytest.approx(t1 / 4, rel=1e-5)
    assert x2 == pytest.approx(x1, rel=1e-10)


def _mp_optimum(n, guess):
    """Ternary search on the closed form in 50-digit arithmetic."""
    import mpmath as mp

    with mp.workdps(50):
        def xi(mu):
            a = 1 - mp.cos(2 * mu) ** (n - 2)
            b = 4 * mp.sin(mu) * mp.cos(mu) ** (n - 2)
            var = mp.mpf(n) / 4 * (1 + mp.mpf(n - 1) / 4 * (a - mp.sqrt(a * a + b * b)))
            return n * var / (mp.mpf(n) / 2 * mp.cos(mu) ** (n - 1)) ** 2

        lo, hi = mp.mpf(guess) / 2, mp.mpf(guess) * 2
        for _ in range(120):
            m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
            if xi(m1) < xi(m2):
                hi = m2
            else:
                lo = m1
        return float(lo), float(xi(lo))


def test_optimal_time_scaling_slope():
    ns = [1000, 10_000, 100_000]
    found = [oat.find_optimal_time(oat.TwistingParams(1.0, n)) for n in ns]
    ref = [_mp_optimum(n, n ** (-2 / 3)) for n in ns]
    for (t, x), (tr, xr) in zip(found, ref):
        assert t == pytest.approx(tr, rel=1e-6)
        assert x == pytest.approx(xr, rel=1e-10)
    slope = np.polyfit(np.log(ns), np.log([f[0] for f in found]), 1)[0]
    assert slope == pytest.approx(np.polyfit(np.log(ns), np.log([r[0] for r in ref]), 1)[0], abs=1e-5)


@pytest.mark.parametrize("n", [2, 3, 10, 1000, 100_000])
def test_closed_form_xi2_matches_exact_evolution(n):
    mus = np.geomspace(1e-5, min(0.5, 2 / np.sqrt(n)), 15)
    exact = np.array([r.xi2 for r in oat.xi2_curve(oat.TwistingParams(1.0, n), mus)])
    assert np.allclose(oat.closed_form_xi2(n, mus), exact, rtol=1e-9)


def test_optimal_time_zero_chi():
    with pytest.raises(SearchError):
        oat.find_optimal_time(oat.TwistingParams(0.0, 100))


def test_initial_rate_examples():
    c = gaussian_consts()
    assert oat.initial_rate(c, 11, 0.0) == 0.0
    assert oat.initial_rate(c, 11, np.pi / 4) == pytest.approx(0.02394, rel=1e-3)
    bal = oat.InteractionConstants(1.0, 3.0, 2.0, GAUSS_I)
    assert oat.initial_rate(bal, 11, 0.7) == 0.0
    assert oat.estimate_chi(bal) == 0.0


def test_estimate_chi_gaussian():
    # (g_aa + g_bb - 2 g_ab)/2 * I = 0.0754/2 * 0.06349
    assert oat.estimate_chi(gaussian_consts()) == pytest.approx(2.394e-3, rel=1e-3)


def test_from_scattering_lengths():
    c = oat.InteractionConstants.from_scattering_lengths(1e-3, 2e-3, 5e-4, 0.1)
    assert c.g_bb == pytest.approx(4 * np.pi * 2e-3)
    with pytest.raises(ValueError):
        oat.InteractionConstants(1, 1, 1, 0.0)


def _richardson_rate(params, theta, h=1e-4):
    from spinsqueeze.spin import SpinFrame, xi_squared

    def xi(t):
        s = oat.evolve(coherent_state(params.n_atoms), params, t)
        return xi_squared(moments(s), params.n_atoms, SpinFrame.from_theta(theta))

    d1 = (xi(h) - xi(0)) / h
    d2 = (xi(h / 2) - xi(0)) / (h / 2)
    return 2 * d2 - d1


@pytest.mark.parametrize("theta", [np.pi / 4, 0.3, -0.9])
def test_frozen_mode_rate_consistency(theta):
    c = gaussian_consts()
    n = 11
    params = oat.TwistingParams(oat.estimate_chi(c), n)
    assert _richardson_rate(params, theta) == pytest.approx(oat.initial_rate(c, n, theta), rel=1e-3)


@pytest.mark.parametrize("n", [1, 2, 5, 100, 10_000])
def test_jx_closed_form(n):
    mus = np.linspace(0, 0.05, 11)
    vals = [r.moments.mean[0] for r in oat.xi2_curve(oat.TwistingParams(1.0, n), mus)]
    assert np.allclose(vals, oat.jx_closed_form(n, mus), atol=1e-10 * max(1, n))


@pytest.mark.parametrize("n", [2, 4, 6])
def test_jx_closed_form_dense(n):
    for mu in (0.2, 1.3):
        psi = dense_twist(n, mu) @ coherent_x(n)
        mean, _ = dense_moments(psi, spin_matrices(n))
        assert mean[0] == pytest.approx(oat.jx_closed_form(n, mu), abs=1e-12)


def test_xi2_at_consistent_with_curve():
    p = oat.TwistingParams(0.5, 40)
    assert oat.xi2_at(p, 0.1).xi2 == pytest.approx(oat.xi2_curve(p, [0.1])[0].xi2, rel=1e-14)
