import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnaevent import kalman as kf
from mnaevent.errors import DataError, DegenerateDataError


@pytest.mark.parametrize("p, m, k", [(1.0, 1.0, 0.5), (0.0, 1.0, 0.0), (1.0, 0.0, 1.0)])
def test_gain_cases(p, m, k):
    assert kf.kalman_gain(p, m) == k


def test_gain_zero_over_zero():
    with pytest.raises(DegenerateDataError):
        kf.kalman_gain(0.0, 0.0)


def test_negative_variance_rejected():
    with pytest.raises(DataError):
        kf.KalmanParams(-0.1, 1.0)


def test_step_moves_halfway():
    step = kf.kalman_step(0.0, 1.0, 4.0, kf.KalmanParams(0.5, 1.0))
    assert step.state.i_post == 2.0
    assert step.state.p_post == 0.5
    assert step.state.p_pred == 1.0


def test_p_post_three_quarters():
    step = kf.kalman_step(0.0, 1.0, 0.0, kf.KalmanParams(0.0, 3.0))
    assert step.gain == 0.25 and step.state.p_post == 0.75


@pytest.mark.parametrize("w, m, p, k", [(1.0, 2.0, 2.0, 0.5), (0.0, 1.0, 0.0, 0.0), (0.3, 0.0, 0.3, 1.0)])
def test_steady_state_closed_forms(w, m, p, k):
    ss = kf.steady_state(kf.KalmanParams(w, m))
    assert ss["p_pred"] == pytest.approx(p, abs=1e-15)
    assert ss["gain"] == pytest.approx(k, abs=1e-15)


def test_converges_to_steady_state():
    params = kf.KalmanParams(0.01, 0.09)
    target = kf.steady_state(params)
    trace = kf.run_filter(params, np.zeros(300), p0=5.0)
    assert abs(trace["p_pred"].iloc[199] - target["p_pred"]) < 1e-10
    assert abs(trace["gain"].iloc[199] - target["gain"]) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 10), st.floats(1e-4, 10), st.lists(st.floats(-100, 100), min_size=1, max_size=40),
       st.floats(-50, 50))
def test_revision_identity_and_shift(w, m, signals, c):
    params = kf.KalmanParams(w, m)
    trace = kf.run_filter(params, signals, i0=1.0, p0=1.0)
    np.testing.assert_allclose(trace["revision"], trace["gain"] * trace["innovation"], rtol=0, atol=1e-12 * 200)
    assert ((trace["gain"] >= 0) & (trace["gain"] <= 1)).all()
    assert (trace["p_post"] <= trace["p_pred"] - w + 1e-12).all()
    shifted = kf.run_filter(params, np.asarray(signals) + c, i0=1.0 + c, p0=1.0)
    np.testing.assert_allclose(shifted["i_post"], trace["i_post"] + c, rtol=0, atol=1e-9)
    np.testing.assert_array_equal(shifted["gain"], trace["gain"])


def test_filter_error_matches_posterior_variance():
    params = kf.KalmanParams(0.01, 0.09)
    trace = kf.simulate_latent(params, 10_000, seed=3)
    err = (trace["i_post"] - trace["true_state"]).to_numpy()[100:]
    p_post = kf.steady_state(params)["p_post"]
    assert abs(np.mean(err**2) / p_post - 1) < 0.10


def test_zero_noise_filter_is_exact():
    trace = kf.simulate_latent(kf.KalmanParams(0.0, 0.0), 20, seed=1, i0=0.7)
    assert (trace["i_post"] == 0.7).all()
    assert (trace["true_state"] == 0.7).all()


def test_simulation_is_seeded():
    a = kf.simulate_latent(kf.KalmanParams(0.01, 0.09), 50, seed=42)
    b = kf.simulate_latent(kf.KalmanParams(0.01, 0.09), 50, seed=42)
    c = kf.simulate_latent(kf.KalmanParams(0.01, 0.09), 50, seed=43)
    assert a.equals(b) and not a.equals(c)
    assert math.isfinite(a["i_post"].sum())
