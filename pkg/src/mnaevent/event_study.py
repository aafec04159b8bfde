"""Announcement-window returns, no-news baselines, relevance tests and
summary statistics.

Returns are simple returns in percent. A boundary price is the last trade at
or before the boundary minute, carried forward at most ``max_carry`` minutes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd
from scipy import stats

from .errors import DataError, DegenerateDataError, InsufficientDataError, MissingDataError
from .market_data import MINUTES_PER_DAY, PriceSeries, minute_to_date, minute_to_iso, parse_clock, to_minute
from .ranking import rank_buckets

DEFAULT_PRE = 10
DEFAULT_POST = 20
DEFAULT_CARRY = 5
# 4 pm New York in winter; producers supply UTC, so this is a parameter
DEFAULT_CLOSE_CLOCK = 21 * 60
EXACT_MWW_MAX = 12


@dataclass(frozen=True)
class EventReturn:
    announcement_id: int | None
    window_return: float
    pre_drift: float | None = None

    @property
    def abs_return(self) -> float:
        return abs(self.window_return)


@dataclass(frozen=True)
class ScreenRow:
    kind: str
    mean_abs: float
    median_abs: float
    p_t: float
    p_mww: float
    relevant: bool
    n_events: int = 0
    n_baseline: int = 0


# --------------------------------------------------------------------------
# window extraction


def _pct(p_start, p_end):
    return 100.0 * (p_end - p_start) / p_start


def prior_close(series: PriceSeries, t0: int, close_clock: int = DEFAULT_CLOSE_CLOCK) -> float:
    """Close of the last trading day strictly before ``t0``'s date."""
    day_start = (t0 // MINUTES_PER_DAY) * MINUTES_PER_DAY
    idx = np.searchsorted(series.minutes, day_start, side="left") - 1
    if idx < 0:
        raise MissingDataError(f"{series.symbol}: no trading day before {minute_to_iso(t0)}")
    prev_date = minute_to_date(series.minutes[idx])
    price = series.last_on_date(prev_date, close_clock)
    if math.isnan(price):
        raise MissingDataError(f"{series.symbol}: no close on {prev_date}")
    return price


def extract_event_return(
    series: PriceSeries,
    t0,
    pre: int = DEFAULT_PRE,
    post: int = DEFAULT_POST,
    max_carry: int = DEFAULT_CARRY,
    announcement_id: int | None = None,
    drift: bool = False,
    close_clock: int = DEFAULT_CLOSE_CLOCK,
) -> EventReturn:
    """Return over ``[t0 - pre, t0 + post]``; optionally the pre-announcement drift
    from the prior close to ``t0 - pre``."""
    t0 = to_minute(t0)
    p_start = series.price_at(t0 - pre, max_carry)
    p_end = series.price_at(t0 + post, max_carry)
    pre_drift = None
    if drift:
        pre_drift = _pct(prior_close(series, t0, close_clock), p_start)
    return EventReturn(announcement_id, _pct(p_start, p_end), pre_drift)


def window_returns(series: PriceSeries, minutes, pre=DEFAULT_PRE, post=DEFAULT_POST, max_carry=DEFAULT_CARRY):
    """Vectorized window returns; NaN where a boundary price is unavailable."""
    minutes = np.asarray(minutes, dtype=np.int64)
    p0 = series.prices_at(minutes - pre, max_carry)
    p1 = series.prices_at(minutes + post, max_carry)
    return _pct(p0, p1)


def event_returns(
    series: PriceSeries,
    events: pd.DataFrame,
    pre: int = DEFAULT_PRE,
    post: int = DEFAULT_POST,
    max_carry: int = DEFAULT_CARRY,
) -> tuple[pd.DataFrame, int]:
    """Window returns for every row of ``events`` (needs ``id`` and ``minute``).

    Events whose boundaries are missing are dropped; the count is returned.
    Output is ordered by announcement id.
    """
    r = window_returns(series, events["minute"].to_numpy(), pre, post, max_carry)
    out = events.assign(window_return=r, abs_return=np.abs(r))
    keep = np.isfinite(r)
    out = out.loc[keep].sort_values("id", kind="mergesort").reset_index(drop=True)
    return out, int((~keep).sum())


def daily_window_returns(series: PriceSeries, minutes, close_clock=DEFAULT_CLOSE_CLOCK) -> np.ndarray:
    """Close-to-close return of each announcement day; NaN where unavailable."""
    out = np.full(len(minutes), np.nan)
    for i, t0 in enumerate(np.asarray(minutes, dtype=np.int64)):
        try:
            prev = prior_close(series, int(t0), close_clock)
        except MissingDataError:
            continue
        close = series.last_on_date(minute_to_date(t0), close_clock)
        out[i] = _pct(prev, close)
    return out


def halfday_window_returns(series: PriceSeries, minutes, post=DEFAULT_POST, max_carry=DEFAULT_CARRY,
                           close_clock=DEFAULT_CLOSE_CLOCK) -> np.ndarray:
    """Prior close to ``t0 + post``."""
    out = np.full(len(minutes), np.nan)
    for i, t0 in enumerate(np.asarray(minutes, dtype=np.int64)):
        try:
            prev = prior_close(series, int(t0), close_clock)
        except MissingDataError:
            continue
        end = series.prices_at([t0 + post], max_carry)[0]
        out[i] = _pct(prev, end)
    return out


def baseline_abs_returns(
    series: PriceSeries,
    time_of_day,
    announcement_calendar: Iterable,
    pre: int = DEFAULT_PRE,
    post: int = DEFAULT_POST,
    max_carry: int = DEFAULT_CARRY,
) -> np.ndarray:
    """Absolute window returns at ``time_of_day`` (UTC) on days without any
    tracked announcement, in date order.

    ``announcement_calendar`` holds dates or timestamps of every
    announcement of every kind; any day appearing there is excluded.
    """
    tod = parse_clock(time_of_day)
    excluded = _calendar_dates(announcement_calendar)
    days = series.trading_dates()
    days = days[~np.isin(days, excluded)]
    if len(days):
        t0 = days.astype(np.int64) * MINUTES_PER_DAY + tod
        r = window_returns(series, t0, pre, post, max_carry)
        r = np.abs(r[np.isfinite(r)])
    else:
        r = np.zeros(0)
    if len(r) == 0:
        raise InsufficientDataError(f"{series.symbol}: no no-news days with data at {time_of_day}")
    return r


def _calendar_dates(calendar) -> np.ndarray:
    if isinstance(calendar, pd.DataFrame):
        calendar = calendar["date"] if "date" in calendar else minute_to_date(calendar["minute"].to_numpy())
    values = list(calendar)
    if not values:
        return np.zeros(0, dtype="datetime64[D]")
    first = values[0]
    if isinstance(first, (int, np.integer)):
        return np.unique(minute_to_date(np.asarray(values, dtype=np.int64)))
    return np.unique(pd.to_datetime(pd.Series(values)).dt.tz_localize(None).to_numpy().astype("datetime64[D]"))


# --------------------------------------------------------------------------
# two-sample tests


def welch_ttest(a, b) -> tuple[float, float, float]:
    """Two-sided Welch t-test. Returns ``(t, df, p)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InsufficientDataError("each sample needs at least 2 observations")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    if va == 0 and vb == 0:
        raise DegenerateDataError("both samples have zero variance; t-test undefined")
    diff = a.mean() - b.mean()
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    p = 2.0 * stats.t.sf(abs(t), df)
    return float(t), float(df), float(min(1.0, p))


def _doubled_midranks(x, y) -> np.ndarray:
    ranks = stats.rankdata(np.concatenate([x, y]))
    return np.rint(2 * ranks).astype(np.int64)


def mww_exact_pvalue(x, y) -> float:
    """Two-sided exact p-value of the rank-sum statistic under the permutation
    distribution (conditional on ties).

    The null distribution of the doubled rank sum is built by dynamic
    programming over subsets; p is the mass at least as far from the mean
    as the observed value.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = len(x), len(y)
    ranks = _doubled_midranks(x, y)
    total = int(ranks.sum())
    counts = np.zeros((n1 + 1, total + 1), dtype=np.int64)
    counts[0, 0] = 1
    for r in ranks:
        for k in range(n1, 0, -1):
            counts[k, r:] += counts[k - 1, : total + 1 - r]
    dist = counts[n1]
    observed = int(ranks[:n1].sum())
    centre = n1 * (n1 + n2 + 1)  # mean of the doubled rank sum
    sums = np.arange(total + 1)
    extreme = np.abs(sums - centre) >= abs(observed - centre)
    return float(min(1.0, dist[extreme].sum() / dist.sum()))


def mww_normal_pvalue(x, y) -> float:
    """Normal approximation with tie correction and continuity correction."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = len(x), len(y)
    n = n1 + n2
    ranks = stats.rankdata(np.concatenate([x, y]))
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float((tie_counts**3 - tie_counts).sum()) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = max(0.0, abs(u1 - n1 * n2 / 2.0) - 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * stats.norm.sf(z)))


def mww_pvalue(x, y, exact_max: int = EXACT_MWW_MAX) -> float:
    """Exact when both samples have at most ``exact_max`` observations."""
    if len(x) < 1 or len(y) < 1:
        raise InsufficientDataError("Mann-Whitney test needs non-empty samples")
    if len(x) <= exact_max and len(y) <= exact_max:
        return mww_exact_pvalue(x, y)
    return mww_normal_pvalue(x, y)


def relevance_screen(event_abs, baseline_abs, kind: str = "", alpha: float = 0.05) -> ScreenRow:
    event_abs = np.asarray(event_abs, dtype=float)
    baseline_abs = np.asarray(baseline_abs, dtype=float)
    if len(event_abs) < 2 or len(baseline_abs) < 2:
        raise InsufficientDataError("relevance screen needs at least 2 observations per sample")
    _, _, p_t = welch_ttest(event_abs, baseline_abs)
    p_mww = mww_pvalue(event_abs, baseline_abs)
    return ScreenRow(
        kind=kind,
        mean_abs=float(event_abs.mean()),
        median_abs=float(np.median(event_abs)),
        p_t=p_t,
        p_mww=p_mww,
        relevant=bool(p_t < alpha),
        n_events=len(event_abs),
        n_baseline=len(baseline_abs),
    )


# --------------------------------------------------------------------------
# descriptive statistics

PERCENTILES = (1, 10, 25, 50, 75, 90, 99)


def nearest_rank(sorted_values: np.ndarray, pct: int) -> float:
    """Nearest-rank percentile: the value at 1-based rank ceil(pct/100 * n)."""
    n = len(sorted_values)
    rank = max(1, -(-pct * n // 100))
    return float(sorted_values[rank - 1])


def summarize(values) -> dict[str, float]:
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        raise InsufficientDataError("cannot summarize an empty sample")
    out = {"min": float(v[0])}
    for pct in PERCENTILES:
        key = "median" if pct == 50 else f"p{pct}"
        out[key] = nearest_rank(v, pct)
    out["max"] = float(v[-1])
    out["mean"] = float(v.mean())
    out["sd"] = float(v.std(ddof=1)) if len(v) > 1 else float("nan")
    out["n"] = len(v)
    return out


SUMMARY_COLUMNS = ("min", "p1", "p10", "p25", "median", "p75", "p90", "p99", "max", "mean", "sd", "n")


def price_path_by_quartile(
    series: PriceSeries,
    events: pd.DataFrame,
    horizon: int = 30,
    pre: int = DEFAULT_PRE,
    max_carry: int = DEFAULT_CARRY,
) -> tuple[pd.DataFrame, int]:
    """Mean cumulative return paths by surprise quartile.

    ``events`` needs ``id``, ``minute`` and ``normalized``. Each path is in
    percent relative to the price one minute before the announcement and
    runs from ``-pre`` to ``horizon`` minutes. Events lacking any price on
    the path are dropped before bucketing; their count is returned.
    """
    if len(events) < 4:
        raise InsufficientDataError("quartile paths need at least 4 events")
    offsets = np.arange(-pre, horizon + 1)
    t0 = events["minute"].to_numpy(dtype=np.int64)
    grid = t0[:, None] + offsets[None, :]
    prices = series.prices_at(grid.ravel(), max_carry).reshape(grid.shape)
    ref = series.prices_at(t0 - 1, max_carry)
    paths = 100.0 * (prices - ref[:, None]) / ref[:, None]
    ok = np.isfinite(paths).all(axis=1) & np.isfinite(events["normalized"].to_numpy(dtype=float))
    if ok.sum() < 4:
        raise InsufficientDataError("fewer than 4 events with complete price paths")
    kept = events.loc[ok]
    quart = rank_buckets(kept["normalized"].to_numpy(dtype=float), kept["id"].to_numpy(), 4)
    rows = []
    for q in range(1, 5):
        mean_path = paths[ok][quart == q].mean(axis=0)
        rows.extend({"minute": int(m), "quartile": q, "mean_return": float(v)} for m, v in zip(offsets, mean_path))
    return pd.DataFrame(rows), int((~ok).sum())


def surprise_quartiles(events: pd.DataFrame) -> np.ndarray:
    return rank_buckets(events["normalized"].to_numpy(dtype=float), events["id"].to_numpy(), 4)
