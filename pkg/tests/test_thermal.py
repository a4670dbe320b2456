import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from reliable_drive.thermal import (BOLTZMANN_EV, LifetimeParams, LossParams, ThermalCycleBin,
                                    ThermalParams, calibrate_lifetime, conduction_loss,
                                    cycles_to_failure, lifetime_projection, miner_damage,
                                    on_state_current, step_junction_temperature)

TP = ThermalParams(R_theta=0.4, C_theta=2.0, T_ambient=40.0)


def test_conduction_loss_formula():
    lp = LossParams(V_ce0=0.8, r_CE=5e-3, duty=0.5)
    assert conduction_loss(100.0, lp) == pytest.approx(0.5 * (80.0 + 50.0))
    assert conduction_loss(0.0, lp) == 0.0
    with pytest.raises(ValueError):
        conduction_loss(-1.0, lp)


def test_on_state_current():
    assert on_state_current(3.0, -4.0) == 5.0


@pytest.mark.parametrize("P,dt", [(0.0, 1e-3), (150.0, 1e-3), (150.0, 0.37), (42.0, 5.0)])
def test_step_matches_analytic_exponential(P, dt):
    T0 = 55.0
    T_ss = TP.T_ambient + P * TP.R_theta
    T = T0
    for k in range(1, 201):
        T = step_junction_temperature(T, P, dt, TP)
        exact = T_ss + (T0 - T_ss) * math.exp(-k * dt / TP.time_constant)
        assert abs(T - exact) <= 1e-9


def test_steady_state_is_fixed_point():
    P = 123.0
    T_ss = TP.T_ambient + P * TP.R_theta
    assert step_junction_temperature(T_ss, P, 0.1, TP) == T_ss


def test_piecewise_power_against_ode_solver():
    # independent route: integrate C dT/dt = P - (T - Ta)/R numerically
    dt = 0.05
    rng = np.random.default_rng(0)
    P = rng.uniform(0, 200, size=80)
    T = TP.T_ambient
    Ts = [T]
    for p in P:
        T = step_junction_temperature(T, p, dt, TP)
        Ts.append(T)

    def rhs(t, y):
        p = P[min(int(t / dt), len(P) - 1)]
        return [(p - (y[0] - TP.T_ambient) / TP.R_theta) / TP.C_theta]

    sol = solve_ivp(rhs, (0, dt * len(P)), [TP.T_ambient], t_eval=dt * np.arange(len(P) + 1),
                    rtol=1e-10, atol=1e-10, max_step=dt / 4)
    np.testing.assert_allclose(Ts, sol.y[0], atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 200), st.floats(0, 500), st.floats(1e-6, 10))
def test_step_contracts_toward_steady_state(T, P, dt):
    T_ss = TP.T_ambient + P * TP.R_theta
    T_next = step_junction_temperature(T, P, dt, TP)
    assert abs(T_next - T_ss) <= abs(T - T_ss)
    if T != T_ss:
        assert abs(T_next - T_ss) < abs(T - T_ss)


def test_step_rejects_bad_inputs():
    with pytest.raises(ValueError):
        step_junction_temperature(40.0, 1.0, 0.0, TP)
    with pytest.raises(ValueError):
        step_junction_temperature(40.0, -1.0, 0.1, TP)


def test_shipped_lifetime_anchors(cfg):
    lp = cfg.lifetime
    n40 = cycles_to_failure(40.0, 150.0, 10.0, lp)
    n80 = cycles_to_failure(80.0, 150.0, 10.0, lp)
    assert n40 == pytest.approx(922e3, rel=1e-9)
    assert n80 == pytest.approx(30e3, rel=1e-9)


def test_shipped_constants_match_calibration(cfg):
    fit = calibrate_lifetime(cfg.lifetime, *cfg.anchors)
    assert fit.A0 == pytest.approx(cfg.lifetime.A0, rel=1e-12)
    assert fit.alpha == pytest.approx(cfg.lifetime.alpha, rel=1e-12)


def test_model_by_hand(cfg):
    lp = cfg.lifetime
    dT, Tm, ton = 30.0, 80.0, 3.0
    beta = math.exp(-(dT - lp.T0) / lp.lam)
    by_hand = (lp.A0 * lp.A1**beta * dT ** (lp.alpha - beta)
               * math.exp(lp.Ea / (BOLTZMANN_EV * (Tm + 273.15)))
               * (lp.C_ton + ton**lp.gamma_ton) / (lp.C_ton + 2**lp.gamma_ton) * lp.k_thick)
    assert cycles_to_failure(dT, Tm, ton, lp) == pytest.approx(by_hand, rel=1e-12)


def test_monotone_in_delta_T(cfg):
    n = [cycles_to_failure(dT, 100.0, 2.0, cfg.lifetime) for dT in np.linspace(10, 120, 221)]
    assert np.all(np.diff(n) < 0)


def test_non_increasing_in_t_on(cfg):
    n = [cycles_to_failure(40.0, 100.0, t, cfg.lifetime) for t in np.logspace(-1, 2, 200)]
    assert np.all(np.diff(n) <= 0)


def test_hotter_mean_temperature_shortens_life(cfg):
    assert cycles_to_failure(40, 120, 2, cfg.lifetime) < cycles_to_failure(40, 60, 2, cfg.lifetime)


def test_calibration_recovers_known_constants():
    truth = LifetimeParams(A0=3e10, A1=50, alpha=-3.9, T0=40, lam=40, Ea=0.0606, C_ton=1.43,
                           gamma_ton=-1.21)
    a = (30.0, 90.0, 1.5, cycles_to_failure(30.0, 90.0, 1.5, truth))
    b = (70.0, 120.0, 6.0, cycles_to_failure(70.0, 120.0, 6.0, truth))
    fit = calibrate_lifetime(replace(truth, A0=1.0, alpha=0.0), a, b)
    assert fit.alpha == pytest.approx(-3.9, rel=1e-10)
    assert fit.A0 == pytest.approx(3e10, rel=1e-9)


def test_lifetime_params_validation():
    base = dict(A0=1.0, A1=50, alpha=-4, T0=40, lam=40, Ea=0.06, C_ton=1.43, gamma_ton=-1.21)
    with pytest.raises(ValueError):
        LifetimeParams(**base, kB=1.38e-23)
    with pytest.raises(ValueError):
        LifetimeParams(**{**base, "A0": 0.0})
    with pytest.raises(ValueError):
        LifetimeParams(**{**base, "alpha": math.nan})


def test_cycles_to_failure_domain(cfg):
    with pytest.raises(ValueError):
        cycles_to_failure(0.0, 50.0, 1.0, cfg.lifetime)
    with pytest.raises(ValueError):
        cycles_to_failure(10.0, -300.0, 1.0, cfg.lifetime)
    with pytest.raises(OverflowError):
        cycles_to_failure(1e-300, 50.0, 1.0, cfg.lifetime)


def test_miner_sum(cfg):
    lp = cfg.lifetime
    bins = [ThermalCycleBin(40.0, 150.0, 10.0, 2.0), ThermalCycleBin(80.0, 150.0, 10.0, 3.0)]
    assert miner_damage(bins, lp) == pytest.approx(2 / 922e3 + 3 / 30e3, rel=1e-9)
    assert miner_damage([], lp) == 0.0


def test_lifetime_projection():
    cycles, years = lifetime_projection(1e-4, 2.0)
    assert cycles == pytest.approx(1e4)
    assert years == pytest.approx(1e4 / 730)
    assert lifetime_projection(0.0) == (math.inf, math.inf)
    with pytest.raises(ValueError):
        lifetime_projection(-1.0)


@pytest.mark.parametrize("D,cycles,years", [(1.6e-4, 6250.0, 8.56), (1.1e-4, 9090.9, 12.45),
                                            (1.0, 1.0, 1 / 730)])
def test_projection_examples(D, cycles, years):
    n, y = lifetime_projection(D, 2.0)
    assert n == pytest.approx(cycles, rel=1e-5)
    assert y == pytest.approx(years, rel=1e-3)


def test_one_lifetime_of_cycles_is_failure(cfg):
    N = cycles_to_failure(25.0, 70.0, 1.0, cfg.lifetime)
    assert miner_damage([ThermalCycleBin(25.0, 70.0, 1.0, N)], cfg.lifetime) == pytest.approx(1.0)


def test_miner_additive_and_order_free(cfg):
    rng = np.random.default_rng(5)
    bins = [ThermalCycleBin(*rng.uniform([5, 40, 0.2, 0.5], [60, 140, 50, 30])) for _ in range(12)]
    lp = cfg.lifetime
    total = miner_damage(bins, lp)
    assert total == pytest.approx(miner_damage(bins[:5], lp) + miner_damage(bins[5:], lp),
                                  rel=1e-12)
    assert total == pytest.approx(miner_damage(bins[::-1], lp), rel=1e-12)
