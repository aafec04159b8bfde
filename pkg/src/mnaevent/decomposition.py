"""Monetary-uncertainty proxies and the cash-flow / risk-free-rate split of
the stock response."""

from __future__ import annotations

import math

import numpy as np
import pandas as pd

from .errors import DataError, DegenerateDataError, InsufficientDataError

REALIZED_WINDOW = 63
ANNUALIZATION = 252


def implied_mu(black_vol, rate_level):
    """Rescale a Black (percent-of-rate) volatility to yield units, in percent.

    Works elementwise on arrays and Series.
    """
    vol = np.asarray(black_vol, dtype=float)
    rate = np.asarray(rate_level, dtype=float)
    if (vol < 0).any() or (rate < 0).any():
        raise DataError("implied volatility and rate level must be non-negative")
    out = vol * rate / 100.0
    if isinstance(black_vol, pd.Series):
        return pd.Series(out, index=black_vol.index, name="MU_implied")
    return float(out) if out.ndim == 0 else out


def realized_mu(changes_bps, window: int = REALIZED_WINDOW, annualization: int = ANNUALIZATION) -> pd.Series:
    """Rolling sample SD (ddof=1) of daily yield changes, annualized, in percent.

    Only complete windows are returned, labelled by their last date.
    """
    s = pd.Series(changes_bps, dtype=float) if not isinstance(changes_bps, pd.Series) else changes_bps.astype(float)
    s = s.dropna()
    if len(s) < window:
        raise InsufficientDataError(f"realized volatility needs {window} observations, got {len(s)}")
    sd = s.rolling(window, min_periods=window).std(ddof=1)
    return (sd * math.sqrt(annualization) / 100.0).iloc[window - 1:].rename("MU_realized")


def breakeven_mu(b: float, d: float) -> float:
    """Uncertainty level at which the two channels cancel: ``-b / d``."""
    if d == 0:
        raise DegenerateDataError("interaction coefficient is zero; no breakeven level")
    return -b / d


def estimate_a2(d_stock: float, gamma1_rate: float) -> float:
    """Stock return in bps per bp of rate revision.

    ``d_stock`` (percent per surprise per MU) is the stock interaction
    coefficient and ``gamma1_rate`` (bps per surprise per MU) the rate one.
    """
    if gamma1_rate == 0:
        raise DegenerateDataError("rate interaction coefficient is zero")
    return d_stock * 100.0 / gamma1_rate


def channel_series(b: float, d: float, mu_series: pd.Series) -> pd.DataFrame:
    """Constant cash-flow channel ``b`` and rate channel ``d * MU`` per date.

    ``mu_series`` is the uncertainty level known before each date (already
    lagged). A zero total counts as the positive regime.
    """
    mu = pd.Series(mu_series, dtype=float).dropna()
    if mu.empty:
        raise InsufficientDataError("empty uncertainty series")
    cash = np.full(len(mu), float(b))
    risk = float(d) * mu.to_numpy()
    total = cash + risk
    return pd.DataFrame(
        {
            "date": mu.index,
            "cash_flow": cash,
            "risk_free": risk,
            "total": total,
            "regime": np.where(total >= 0, "positive", "negative"),
        }
    )


def regime_crossings(channels: pd.DataFrame) -> pd.DataFrame:
    """Dates where the total channel changes regime, interpolated linearly
    between neighbouring observations."""
    rows = []
    dates = pd.to_datetime(channels["date"]).to_numpy()
    total = channels["total"].to_numpy()
    regime = channels["regime"].to_numpy()
    for i in range(1, len(channels)):
        if regime[i] == regime[i - 1]:
            continue
        y0, y1 = total[i - 1], total[i]
        frac = 0.0 if y1 == y0 else -y0 / (y1 - y0)
        frac = min(max(frac, 0.0), 1.0)
        span = (dates[i] - dates[i - 1]).astype("timedelta64[s]").astype(np.int64)
        when = dates[i - 1].astype("datetime64[s]") + np.timedelta64(int(round(frac * span)), "s")
        rows.append({"date": when, "from_regime": regime[i - 1], "to_regime": regime[i]})
    return pd.DataFrame(rows, columns=["date", "from_regime", "to_regime"])
