import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import chi2

from oucap import (
    ChannelParams,
    SimConfig,
    abel_for_channel,
    arma_recursion_residual,
    decode_message,
    integrate_abel,
    ljung_box,
    run_sk_scheme,
    simulate_noise,
    stationary_arma_noise,
)

from oracles import variance_of_z

P_STD = ChannelParams(lam=-1.0, kappa=1.0, power=2.0)


def make_traj(params, horizon):
    return integrate_abel(abel_for_channel(params), horizon=horizon, step=horizon / 1000.0)


@pytest.fixture(scope="module")
def traj_std():
    return make_traj(P_STD, 10.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(horizon=0.0, steps=200, trials=1, master_seed=0)
    with pytest.raises(ValueError):
        SimConfig(horizon=1.0, steps=99, trials=1, master_seed=0)
    with pytest.raises(ValueError):
        SimConfig(horizon=1.0, steps=200, trials=0, master_seed=0)
    with pytest.raises(ValueError):
        SimConfig(horizon=1.0, steps=200, trials=1, master_seed=-3)


def test_noise_path_white_case_is_pure_brownian():
    cfg = SimConfig(horizon=5.0, steps=500, trials=4, master_seed=11)
    path = simulate_noise(ChannelParams(0.0, 1.0, 1.0), cfg, trial=2)
    assert np.array_equal(path.z_increments, path.brownian_increments)
    assert path.ou_state[0] == 0.0


def test_noise_path_deterministic_per_trial():
    cfg = SimConfig(horizon=5.0, steps=500, trials=4, master_seed=11)
    a = simulate_noise(P_STD, cfg, trial=1)
    b = simulate_noise(P_STD, cfg, trial=1)
    c = simulate_noise(P_STD, cfg, trial=3)
    assert np.array_equal(a.z_increments, b.z_increments)
    assert not np.array_equal(a.z_increments, c.z_increments)
    with pytest.raises(ValueError):
        simulate_noise(P_STD, cfg, trial=4)


def test_noise_ou_one_step_recursion():
    kappa = 0.8
    params = ChannelParams(-0.4, kappa, 1.0)
    cfg = SimConfig(horizon=2.0, steps=200, trials=3000, master_seed=3)
    u = math.exp(-kappa * cfg.delta)
    sig2 = -math.expm1(-2.0 * kappa * cfg.delta) / (2.0 * kappa)
    for i in range(0, cfg.trials, 500):
        path = simulate_noise(params, cfg, trial=i)
        eta = path.ou_state[1:] - u * path.ou_state[:-1]
        # increments must be mean-zero with the exact one-step variance
        z = np.mean(eta) / math.sqrt(sig2 / eta.size)
        assert abs(z) < 5.0
        ratio = np.var(eta) / sig2
        assert abs(ratio - 1.0) < 5.0 * math.sqrt(2.0 / eta.size)


def test_tail_variance_across_trials():
    kappa = 1.3
    params = ChannelParams(-0.5, kappa, 1.0)
    trials = 4000
    cfg = SimConfig(horizon=1.0, steps=100, trials=trials, master_seed=21)
    tails = np.array([simulate_noise(params, cfg, trial=i).tail for i in range(trials)])
    target = 1.0 / (2.0 * kappa)
    emp = np.var(tails)
    se = target * math.sqrt(2.0 / trials)
    assert abs(emp - target) < 3.0 * se


def test_terminal_noise_variance_matches_quadrature_oracle():
    params = ChannelParams(1.0, 1.0, 1.0)
    horizon = 10.0
    trials = 4000
    cfg = SimConfig(horizon=horizon, steps=2000, trials=trials, master_seed=9)
    z_final = np.empty(trials)
    for i in range(trials):
        z_final[i] = simulate_noise(params, cfg, trial=i).z_increments.sum()
    oracle = variance_of_z(1.0, 1.0, horizon)
    emp = np.var(z_final)
    se = oracle * math.sqrt(2.0 / trials)
    # 3 sigma Monte Carlo band plus a small Euler-drift allowance
    assert abs(emp - oracle) < 3.0 * se + 0.3


def test_stationary_noise_recursion_and_flat_variance():
    params = ChannelParams(-1.0, 1.0, 1.0)
    cfg = SimConfig(horizon=10.0, steps=200, trials=3000, master_seed=17)
    z = stationary_arma_noise(params, cfg)
    assert z.shape == (3000, 200)
    scaled_var = np.var(z, axis=0) / cfg.delta
    # no index trend: the spread across indices stays inside the sampling band
    level = scaled_var.mean()
    se = level * math.sqrt(2.0 / cfg.trials)
    assert scaled_var.max() - scaled_var.min() < 8.0 * se


def test_stationary_noise_white_case_is_brownian():
    params = ChannelParams(0.0, 1.0, 1.0)
    cfg = SimConfig(horizon=5.0, steps=150, trials=4, master_seed=23)
    z = stationary_arma_noise(params, cfg)
    # with lam = 0 the tail weight vanishes: rows are raw Brownian increments
    for i in range(cfg.trials):
        g = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)[i])
        )
        g.standard_normal(2)
        xi = g.standard_normal((2, cfg.steps))
        assert np.array_equal(z[i], math.sqrt(cfg.delta) * xi[0])


def test_recursion_residual_helper():
    params = ChannelParams(-0.7, 1.0, 1.0)
    cfg = SimConfig(horizon=10.0, steps=200, trials=5, master_seed=29)
    z = stationary_arma_noise(params, cfg)
    for i in range(cfg.trials):
        g = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)[i])
        )
        g.standard_normal(2)
        xi = g.standard_normal((2, cfg.steps))
        b = math.sqrt(cfg.delta) * xi[0]
        assert arma_recursion_residual(z[i], b, params, cfg.delta) < 1e-12


def test_run_sk_deterministic_and_backend_independent():
    cfg = SimConfig(horizon=5.0, steps=500, trials=300, master_seed=31)
    traj = make_traj(P_STD, 5.0)
    a = run_sk_scheme(P_STD, cfg, traj, backend="numpy")
    b = run_sk_scheme(P_STD, cfg, traj, backend="numpy")
    assert np.array_equal(a.mmse_emp, b.mmse_emp)
    assert np.array_equal(a.power_emp, b.power_emp)
    from oucap import available_backends

    if "cython" in available_backends():
        c = run_sk_scheme(P_STD, cfg, traj, backend="cython")
        assert np.array_equal(a.mmse_emp, c.mmse_emp)
        assert np.array_equal(a.power_emp, c.power_emp)


def test_run_sk_batch_size_invariance(traj_std):
    cfg = SimConfig(horizon=10.0, steps=300, trials=257, master_seed=37)
    a = run_sk_scheme(P_STD, cfg, traj_std)
    b = run_sk_scheme(P_STD, replace(cfg, batch_size=32), traj_std)
    assert np.array_equal(a.mmse_emp, b.mmse_emp)
    assert np.array_equal(a.mmse_hw, b.mmse_hw)


def test_run_sk_thread_invariance(traj_std, monkeypatch):
    cfg = SimConfig(horizon=10.0, steps=300, trials=500, master_seed=41, batch_size=64)
    monkeypatch.setenv("OUCAP_THREADS", "1")
    a = run_sk_scheme(P_STD, cfg, traj_std)
    monkeypatch.setenv("OUCAP_THREADS", "4")
    b = run_sk_scheme(P_STD, cfg, traj_std)
    assert np.array_equal(a.mmse_emp, b.mmse_emp)


def test_white_channel_mmse_matches_exponential_law(traj_std):
    params = ChannelParams(0.0, 1.0, 2.0)
    traj = make_traj(params, 10.0)
    cfg = SimConfig(horizon=10.0, steps=2000, trials=2000, master_seed=43)
    rep = run_sk_scheme(params, cfg, traj)
    # analytic MMSE for P=2 white: (1 + int 2e^{2s})^{-1} = e^{-2t}
    assert np.allclose(rep.mmse_analytic, np.exp(-2.0 * rep.times), rtol=1e-8)
    sig = rep.mmse_hw / 1.96
    allow = 3.0 * sig + 10.0 * cfg.delta * rep.mmse_analytic
    assert np.all(np.abs(rep.mmse_emp - rep.mmse_analytic) <= allow)
    assert rep.empirical_rate == pytest.approx(1.0, abs=1e-9)


def test_filter_variance_tracks_analytic_with_first_order_bias():
    params = P_STD
    traj = make_traj(params, 6.0)
    rel = {}
    for steps in (600, 1200):
        cfg = SimConfig(horizon=6.0, steps=steps, trials=1, master_seed=1)
        rep = run_sk_scheme(params, cfg, traj)
        err = np.abs(rep.mmse_filter - rep.mmse_analytic) / rep.mmse_analytic
        rel[steps] = err.max()
        assert rel[steps] < 6.0 * cfg.delta
    ratio = rel[600] / rel[1200]
    assert 1.5 < ratio < 2.7  # halving delta roughly halves the bias


def test_power_curve_flat_at_budget(traj_std):
    cfg = SimConfig(horizon=10.0, steps=2000, trials=3000, master_seed=47)
    rep = run_sk_scheme(P_STD, cfg, traj_std)
    sig = rep.power_hw / 1.96
    assert np.all(np.abs(rep.power_emp - P_STD.power) <= 3.0 * sig + 1e-12)


def test_innovations_are_white(traj_std):
    cfg = SimConfig(horizon=10.0, steps=2000, trials=200, master_seed=53)
    rep = run_sk_scheme(P_STD, cfg, traj_std, return_innovations=True)
    assert rep.innovations.shape == (200, 2000)
    lags = 20
    stats = ljung_box(rep.innovations, lags=lags)
    accepted = np.mean(stats < chi2.ppf(0.99, lags))
    assert accepted >= 0.95
    # standardized innovations should also have near-unit variance
    v = rep.innovations.var()
    assert abs(v - 1.0) < 0.02


def test_trials_one_reports_infinite_half_widths(traj_std):
    cfg = SimConfig(horizon=10.0, steps=200, trials=1, master_seed=59)
    rep = run_sk_scheme(P_STD, cfg, traj_std)
    assert np.all(np.isinf(rep.mmse_hw))
    assert np.all(np.isinf(rep.power_hw))


def test_traj_mismatch_raises(traj_std):
    cfg = SimConfig(horizon=20.0, steps=2000, trials=2, master_seed=61)
    with pytest.raises(ValueError):
        run_sk_scheme(P_STD, cfg, traj_std)  # horizon too short
    other = ChannelParams(-1.0, 1.0, 1.0)
    cfg2 = SimConfig(horizon=10.0, steps=200, trials=2, master_seed=61)
    with pytest.raises(ValueError):
        run_sk_scheme(other, cfg2, traj_std)  # power mismatch


def test_decode_trivial_and_two_messages(traj_std):
    params = ChannelParams(0.0, 1.0, 2.0)
    traj = make_traj(params, 10.0)
    cfg = SimConfig(horizon=10.0, steps=1000, trials=2000, master_seed=67)
    assert decode_message(params, cfg, traj, grid_size=1) == 0.0
    err = decode_message(params, cfg, traj, grid_size=2)
    assert err < 1e-3
    with pytest.raises(ValueError):
        decode_message(params, cfg, traj, grid_size=0)


def test_decode_error_rate_decreases_with_horizon():
    params = ChannelParams(0.0, 1.0, 2.0)
    rate = 0.8  # fraction of capacity P/2 = 1
    errs = []
    for horizon in (5.0, 10.0):
        traj = make_traj(params, horizon)
        cfg = SimConfig(horizon=horizon, steps=int(200 * horizon), trials=1500,
                        master_seed=71)
        m = max(2, int(math.exp(rate * horizon)))
        errs.append(decode_message(params, cfg, traj, grid_size=m))
    assert errs[1] <= errs[0]
    assert errs[0] < 0.2


def test_ljung_box_rejects_correlated_series():
    rng = np.random.default_rng(5)
    white = rng.standard_normal((50, 1000))
    corr = np.cumsum(white, axis=1) * 0.1
    lags = 10
    q_white = ljung_box(white, lags=lags)
    q_corr = ljung_box(corr, lags=lags)
    thresh = chi2.ppf(0.99, lags)
    assert np.mean(q_white < thresh) > 0.9
    assert np.all(q_corr > thresh)
    with pytest.raises(ValueError):
        ljung_box(white, lags=0)
