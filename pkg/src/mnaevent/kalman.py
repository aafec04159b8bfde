"""Scalar signal-extraction model for the latent short rate.

State:   i_t = i_{t-1} + w_t,   w_t ~ N(0, sigma_w2)
Signal:  m_t = i_t + v_t,       v_t ~ N(0, sigma_m2)

Each step updates the prediction ``(i_pred, p_pred)`` with the signal and
then extrapolates it, so the rate revision equals the gain times the
innovation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataError, DegenerateDataError

RNG_ALGORITHM = "numpy PCG64 + ziggurat standard_normal"


@dataclass(frozen=True)
class KalmanParams:
    sigma_w2: float
    sigma_m2: float

    def __post_init__(self):
        if not (self.sigma_w2 >= 0 and self.sigma_m2 >= 0):
            raise DataError("noise variances must be non-negative")
        if not (math.isfinite(self.sigma_w2) and math.isfinite(self.sigma_m2)):
            raise DataError("noise variances must be finite")


@dataclass(frozen=True)
class KalmanState:
    i_post: float
    p_post: float
    i_pred: float
    p_pred: float


@dataclass(frozen=True)
class FilterStep:
    state: KalmanState
    gain: float
    innovation: float
    revision: float


def kalman_gain(p_pred: float, sigma_m2: float) -> float:
    if p_pred < 0 or sigma_m2 < 0:
        raise DataError("variances must be non-negative")
    denom = p_pred + sigma_m2
    if denom == 0:
        raise DegenerateDataError("Kalman gain is 0/0 when both variances are zero")
    return p_pred / denom


def kalman_step(i_pred: float, p_pred: float, m: float, params: KalmanParams) -> FilterStep:
    """Measurement update followed by extrapolation.

    A prior with zero variance is already exact; its gain is 0 even when
    the signal is also noiseless.
    """
    k = 0.0 if p_pred == 0 else kalman_gain(p_pred, params.sigma_m2)
    innovation = m - i_pred
    i_post = i_pred + k * innovation
    p_post = (1.0 - k) * p_pred
    state = KalmanState(i_post=i_post, p_post=p_post, i_pred=i_post, p_pred=p_post + params.sigma_w2)
    return FilterStep(state, k, innovation, i_post - i_pred)


def steady_state(params: KalmanParams) -> dict[str, float]:
    """Fixed point of the prediction-variance recursion.

    ``p_pred`` solves ``p**2 - sigma_w2*p - sigma_w2*sigma_m2 = 0``.
    """
    w, m = params.sigma_w2, params.sigma_m2
    p = 0.5 * (w + math.sqrt(w * w + 4.0 * w * m))
    gain = 0.0 if p == 0 else p / (p + m)
    return {"p_pred": p, "gain": gain, "p_post": (1.0 - gain) * p}


def run_filter(params: KalmanParams, signals, i0: float = 0.0, p0: float | None = None) -> pd.DataFrame:
    """Filter a signal sequence starting from prediction ``(i0, p0)``.

    ``p0`` defaults to the steady-state prediction variance. Columns:
    ``step, signal, prior, i_post, p_post, i_pred, p_pred, gain,
    innovation, revision`` where ``prior`` is the prediction the step
    started from.
    """
    if p0 is None:
        p0 = steady_state(params)["p_pred"]
        if p0 <= 0:
            raise DataError("steady-state prediction variance is 0; pass an explicit p0 > 0")
    if not p0 > 0:
        raise DataError("initial prediction variance p0 must be positive")
    signals = np.asarray(signals, dtype=float)
    n = len(signals)
    cols = {name: np.empty(n) for name in ("prior", "i_post", "p_post", "i_pred", "p_pred", "gain", "innovation", "revision")}
    i_pred, p_pred = float(i0), float(p0)
    for t, m in enumerate(signals):
        step = kalman_step(i_pred, p_pred, float(m), params)
        cols["prior"][t] = i_pred
        cols["i_post"][t] = step.state.i_post
        cols["p_post"][t] = step.state.p_post
        cols["i_pred"][t] = step.state.i_pred
        cols["p_pred"][t] = step.state.p_pred
        cols["gain"][t] = step.gain
        cols["innovation"][t] = step.innovation
        cols["revision"][t] = step.revision
        i_pred, p_pred = step.state.i_pred, step.state.p_pred
    out = pd.DataFrame({"step": np.arange(1, n + 1), "signal": signals, **cols})
    return out


def simulate_latent(params: KalmanParams, steps: int, seed: int, i0: float = 0.0, p0: float | None = None) -> pd.DataFrame:
    """Draw a state path and its signals, then filter them.

    The filter starts from the known initial state ``i0``. Returns the
    :func:`run_filter` frame with a leading ``true_state`` column.
    """
    if steps < 1:
        raise DataError("need at least one step")
    rng = np.random.Generator(np.random.PCG64(seed))
    w = rng.standard_normal(steps) * math.sqrt(params.sigma_w2)
    v = rng.standard_normal(steps) * math.sqrt(params.sigma_m2)
    true_state = i0 + np.cumsum(w)
    signals = true_state + v
    if p0 is None:
        p0 = steady_state(params)["p_pred"] or 1.0
    trace = run_filter(params, signals, i0=i0, p0=p0)
    trace.insert(1, "true_state", true_state)
    return trace


TRACE_COLUMNS = ("step", "true_state", "signal", "i_pred", "i_post", "p_pred", "p_post", "gain", "innovation")
