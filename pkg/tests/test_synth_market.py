import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from mnaevent import event_study as es
from mnaevent import synth_market as sm
from mnaevent.errors import DataError


def quiet(**kw):
    return sm.DgpParams(noise_sd_return=0.0, noise_sd_rate=0.0, **kw)


def test_zero_effects_zero_returns():
    panel = sm.generate_panel(quiet(a1=0.0, a2g1=0.0, n_events=50))
    assert (panel["R"] == 0).all()


def test_direct_arithmetic():
    panel = sm.generate_panel(quiet(mu_process=sm.MuProcess("constant", (1.0,)), n_events=20))
    np.testing.assert_allclose(panel["R"], 0.07 * panel["Surprise"], rtol=1e-12)
    np.testing.assert_allclose(panel["dI"], 2.93 * panel["Surprise"], rtol=1e-12)


def test_default_calibration():
    p = sm.DgpParams()
    assert (p.a1, p.a2g1, p.gamma0, p.gamma1) == (0.30, -0.23, 0.0, 2.93)
    assert str(p.mu_process) == "uniform:0.3:1.7"


def test_mu_process_parsing():
    assert sm.MuProcess.parse("ar1:1:0.95:0.05") == sm.MuProcess("ar1", (1.0, 0.95, 0.05))
    with pytest.raises(DataError):
        sm.MuProcess.parse("ar1:1:1.0:0.05")
    with pytest.raises(DataError):
        sm.DgpParams(noise_sd_rate=-1.0)


def test_zero_noise_exact_recovery():
    _, summary = sm.recovery_experiment(quiet(n_events=200), reps=3)
    by = summary.set_index("parameter")
    for name in ("a1", "a2g1", "gamma0", "gamma1"):
        assert by.loc[name, "mean"] == pytest.approx(by.loc[name, "truth"], abs=1e-10)


def test_recovery_small_scale():
    params = sm.DgpParams(n_events=2000, seed=5)
    per_rep, summary = sm.recovery_experiment(params, reps=40)
    by = summary.set_index("parameter")
    for name in ("a1", "a2g1", "gamma1"):
        assert abs(by.loc[name, "mean"] - by.loc[name, "truth"]) < 4 * by.loc[name, "sd"] / math.sqrt(40)
    assert by.loc["gamma0", "share_abs_t_below_2"] >= 0.8


def test_threads_match_serial():
    params = sm.DgpParams(n_events=300, seed=9)
    a, _ = sm.recovery_experiment(params, reps=6)
    b, _ = sm.recovery_experiment(params, reps=6, threads=3)
    pd.testing.assert_frame_equal(a, b)


def test_halving_noise_halves_se():
    base = sm.DgpParams(n_events=2000, seed=2)
    _, s1 = sm.recovery_experiment(base, reps=20)
    _, s2 = sm.recovery_experiment(replace(base, noise_sd_return=0.25, noise_sd_rate=2.5), reps=20)
    ratio = s2.set_index("parameter")["mean_se"] / s1.set_index("parameter")["mean_se"]
    np.testing.assert_allclose(ratio, 0.5, rtol=0.05)


def test_surprises_have_unit_sd():
    n = 20_000
    eps = sm.generate_panel(sm.DgpParams(n_events=n, seed=4))["Surprise"]
    assert abs(eps.std(ddof=1) - 1) < 3 / math.sqrt(n)


def test_intraday_zero_noise_recovers_jump():
    params = sm.IntradayParams(effect=0.2, minute_noise_sd=0.0, day_noise_sd=0.0, n_events=25, seed=1)
    data = sm.generate_intraday(params)
    r = es.window_returns(data.bars["ES"], data.calendar["minute"].to_numpy())
    np.testing.assert_allclose(r, 0.2 * data.calendar["surprise"], rtol=1e-12, atol=1e-13)


def test_intraday_seeded():
    params = sm.IntradayParams(n_events=10, seed=7)
    a, b = sm.generate_intraday(params), sm.generate_intraday(params)
    np.testing.assert_array_equal(a.bars["ES"].prices, b.bars["ES"].prices)
    pd.testing.assert_frame_equal(a.calendar, b.calendar)


def test_noise_calibration():
    minute_sd, day_sd = sm.calibrate_noise(0.35, 1.0)
    params = sm.IntradayParams(effect=0.0, minute_noise_sd=minute_sd, day_noise_sd=day_sd, n_events=4000, seed=3)
    data = sm.generate_intraday(params)
    s, minutes = data.bars["ES"], data.calendar["minute"].to_numpy()
    window_sd = np.std(es.window_returns(s, minutes), ddof=1)
    daily_sd = np.nanstd(es.daily_window_returns(s, minutes), ddof=1)
    assert abs(window_sd / 0.35 - 1) < 0.05
    assert abs(daily_sd / 1.0 - 1) < 0.05


def test_no_extra_daily_noise_equal_t():
    params = sm.IntradayParams(minute_noise_sd=0.35 / math.sqrt(30), day_noise_sd=0.0, seed=6)
    _, summary = sm.window_power_experiment(params, 0.16, reps=30)
    t = summary.set_index("window")["t"]
    # the three windows see the same noise up to compounding
    assert t["daily"] == pytest.approx(t["30min"], rel=0.02)
    assert t["halfday"] == pytest.approx(t["30min"], rel=0.02)


def test_noise_ratio_three_scales_t():
    minute_sd, day_sd = sm.calibrate_noise(0.35, 1.05)
    params = sm.IntradayParams(minute_noise_sd=minute_sd, day_noise_sd=day_sd, seed=8)
    _, summary = sm.window_power_experiment(params, 0.16, reps=60)
    t = summary.set_index("window")["t"]
    assert abs(t["30min"] / t["daily"] / 3 - 1) < 0.15


def test_screen_samples_variance_ratio():
    rng = sm.make_rng(0)
    event, base = sm.simulate_screen_samples(rng, 50_000, 50_000, variance_ratio=2.0)
    assert (event >= 0).all() and (base >= 0).all()
    assert np.mean(event**2) / np.mean(base**2) == pytest.approx(2.0, rel=0.03)


def test_cross_section_generator_shapes():
    data = sm.generate_cross_section(sm.CrossSectionParams(n_stocks=12, n_months=30, seed=1))
    assert data.stock_event_returns.shape == (30, 12)
    assert len(data.monthly_returns) == 360 and list(data.factors.columns) == list(sm.FACTOR_NAMES)
    assert sorted(data.true_betas) == pytest.approx(list(np.linspace(-1, 1, 12)))
