"""Synthetic announcement economies and Monte Carlo experiments.

Everything here is a pure function of its parameters and seed. Replication
``r`` of an experiment seeded with ``s`` draws from
``PCG64(SeedSequence([s, r]))``, so serial and threaded runs agree.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy import stats

from .cross_section import (
    assign_quintiles,
    estimate_event_betas,
    mean_t,
    portfolio_returns,
    post_ranking_betas,
    quintile_event_returns,
)
from .errors import DataError
from .event_study import (
    DEFAULT_CLOSE_CLOCK,
    daily_window_returns,
    halfday_window_returns,
    window_returns,
)
from .market_data import MINUTES_PER_DAY, BarSeries, DailySeries, parse_clock
from .ranking import rank_buckets
from .regress import DesignSpec, interaction_regression, response_regression

# yield responses by maturity (bps per one-SD surprise) used for the synthetic curve
CURVE_SLOPES = {1: 1.92, 2: 2.77, 3: 2.91, 5: 2.77, 7: 2.56, 10: 2.29, 20: 1.66, 30: 1.26}


def make_rng(seed: int, rep: int | None = None) -> np.random.Generator:
    entropy = [int(seed)] if rep is None else [int(seed), int(rep)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _map_reps(func, reps: int, threads: int = 1):
    if threads <= 1:
        return [func(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(reps)))


# --------------------------------------------------------------------------
# uncertainty processes


@dataclass(frozen=True)
class MuProcess:
    """``constant(level)``, ``uniform(low, high)`` or ``ar1(mean, phi, innov_sd)``."""

    kind: str = "uniform"
    params: tuple[float, ...] = (0.3, 1.7)

    def __post_init__(self):
        expected = {"constant": 1, "uniform": 2, "ar1": 3}
        if self.kind not in expected:
            raise DataError(f"unknown MU process {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise DataError(f"{self.kind} MU process takes {expected[self.kind]} parameters")
        if self.kind == "uniform" and self.params[0] > self.params[1]:
            raise DataError("uniform MU process needs low <= high")
        if self.kind == "ar1" and not (abs(self.params[1]) < 1 and self.params[2] >= 0):
            raise DataError("AR(1) MU process needs |phi| < 1 and innov_sd >= 0")

    @classmethod
    def parse(cls, text: str) -> "MuProcess":
        """``"uniform:0.3:1.7"``, ``"constant:1"`` or ``"ar1:1:0.95:0.05"``."""
        kind, *rest = text.split(":")
        return cls(kind, tuple(float(x) for x in rest))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.params[0])
        if self.kind == "uniform":
            return rng.uniform(self.params[0], self.params[1], n)
        mean, phi, sd = self.params
        shocks = rng.standard_normal(n) * sd
        out = np.empty(n)
        level = mean + shocks[0] / math.sqrt(1 - phi * phi) if n else mean
        for i in range(n):
            if i:
                level = mean + phi * (level - mean) + shocks[i]
            out[i] = level
        return out

    def __str__(self):
        return ":".join([self.kind] + [repr(p) for p in self.params])


@dataclass(frozen=True)
class DgpParams:
    a1: float = 0.30
    a2g1: float = -0.23
    gamma0: float = 0.0
    gamma1: float = 2.93
    noise_sd_return: float = 0.5
    noise_sd_rate: float = 5.0
    mu_process: MuProcess = field(default_factory=MuProcess)
    n_events: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.noise_sd_return < 0 or self.noise_sd_rate < 0:
            raise DataError("noise SDs must be non-negative")
        if self.n_events < 1:
            raise DataError("n_events must be positive")


def generate_panel(params: DgpParams, rng: np.random.Generator | None = None) -> pd.DataFrame:
    """Events with ``Surprise`` (standard normal), ``MU`` (level before the
    event), stock return ``R`` (percent) and rate change ``dI`` (bps)."""
    rng = rng or make_rng(params.seed)
    n = params.n_events
    eps = rng.standard_normal(n)
    mu = params.mu_process.sample(rng, n)
    e1 = rng.standard_normal(n) * params.noise_sd_return
    e2 = rng.standard_normal(n) * params.noise_sd_rate
    R = params.a1 * eps + params.a2g1 * mu * eps + e1
    dI = (params.gamma0 + params.gamma1 * mu) * eps + e2
    return pd.DataFrame({"Surprise": eps, "MU": mu, "R": R, "dI": dI})


INTERACTION_TERMS = ("Surprise", "MU", "Surprise*MU")


def _recovery_rep(params: DgpParams, rep: int, se: str) -> dict:
    panel = generate_panel(params, make_rng(params.seed, rep))
    stock = interaction_regression(DesignSpec("R", INTERACTION_TERMS, se), panel)
    rate = interaction_regression(DesignSpec("dI", INTERACTION_TERMS, se), panel)
    crit = stats.t.ppf(0.975, stock.n - stock.k)
    out = {"rep": rep}
    for name, res, term, truth in (
        ("a1", stock, "Surprise", params.a1),
        ("a2g1", stock, "Surprise*MU", params.a2g1),
        ("gamma0", rate, "Surprise", params.gamma0),
        ("gamma1", rate, "Surprise*MU", params.gamma1),
    ):
        est, s, t = res[term]
        out[f"{name}_est"] = est
        out[f"{name}_se"] = s
        out[f"{name}_t"] = t
        out[f"{name}_covered"] = abs(est - truth) <= crit * s
    return out


def recovery_experiment(params: DgpParams, reps: int, se: str = "classical", threads: int = 1):
    """Refit the stock interaction model and the rate model on fresh panels.

    Returns ``(per_rep, summary)``. The summary has one row per parameter
    with its truth, mean and SD of estimates, mean SE, 95% interval
    coverage and the share of replications with ``|t| < 2``.
    """
    if reps < 1:
        raise DataError("reps must be at least 1")
    per_rep = pd.DataFrame(_map_reps(lambda r: _recovery_rep(params, r, se), reps, threads))
    truths = {"a1": params.a1, "a2g1": params.a2g1, "gamma0": params.gamma0, "gamma1": params.gamma1}
    rows = []
    for name, truth in truths.items():
        est = per_rep[f"{name}_est"]
        rows.append(
            {
                "parameter": name,
                "truth": truth,
                "mean": est.mean(),
                "sd": est.std(ddof=1) if reps > 1 else 0.0,
                "mean_se": per_rep[f"{name}_se"].mean(),
                "coverage": per_rep[f"{name}_covered"].mean(),
                "share_abs_t_below_2": (per_rep[f"{name}_t"].abs() < 2).mean(),
                "reps": reps,
            }
        )
    return per_rep, pd.DataFrame(rows)


# --------------------------------------------------------------------------
# intraday price paths


@dataclass(frozen=True)
class IntradayParams:
    """Minute-bar generator settings (percent units).

    Minute noise applies only inside the ``(-pre, +post]`` window around the
    release, so the window noise SD is ``minute_noise_sd * sqrt(pre + post)``.
    ``day_noise_sd`` is the extra noise outside it, split equally between
    the overnight-to-morning move and the move into the close.
    ``pre_drift`` shifts the pre-announcement move on announcement days.
    """

    effect: float = 0.16
    jump_minute: int = 0
    minute_noise_sd: float = 0.35 / math.sqrt(30)
    day_noise_sd: float = math.sqrt(1.0 - 0.35**2)
    n_events: int = 266
    n_baseline_days: int = 0
    pre: int = 10
    post: int = 20
    pre_drift: float = 0.0
    clock: str = "13:30"
    close_clock: int = DEFAULT_CLOSE_CLOCK
    start: str = "2000-01-03"
    symbol: str = "ES"
    margin: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.minute_noise_sd < 0 or self.day_noise_sd < 0:
            raise DataError("noise SDs must be non-negative")
        if not -self.pre < self.jump_minute <= self.post:
            raise DataError("jump minute must lie inside the window")
        if parse_clock(self.clock) + self.post >= self.close_clock:
            raise DataError("window must end before the close")


def calibrate_noise(window_sd: float, daily_sd: float, window_minutes: int = 30) -> tuple[float, float]:
    """Minute SD and extra-day SD giving the requested window and daily noise SDs."""
    if daily_sd < window_sd:
        raise DataError("daily noise SD cannot be below the window noise SD")
    return window_sd / math.sqrt(window_minutes), math.sqrt(daily_sd**2 - window_sd**2)


@dataclass(frozen=True)
class IntradayData:
    bars: BarSeries
    calendar: pd.DataFrame  # id, kind, minute, date, surprise


def generate_intraday(params: IntradayParams, rng: np.random.Generator | None = None, surprises=None,
                      kind: str = "SYN") -> IntradayData:
    """Business-day price paths with one announcement jump of
    ``effect * surprise`` percent per announcement day.

    Bars are written every minute from ``t0 - pre - margin`` to
    ``t0 + post`` and at the close; a close bar on the business day before
    the first day anchors the first prior close at 100.
    """
    rng = rng or make_rng(params.seed)
    n_ev, n_base = params.n_events, params.n_baseline_days
    n_days = n_ev + n_base
    eps = rng.standard_normal(n_ev) if surprises is None else np.asarray(surprises, dtype=float)
    if len(eps) != n_ev:
        raise DataError("surprises must have n_events entries")
    days = pd.bdate_range(params.start, periods=n_days + 1).to_numpy().astype("datetime64[D]").astype(np.int64)
    anchor, days = days[0], days[1:]
    is_event = np.zeros(n_days, dtype=bool)
    if n_base == 0:
        is_event[:] = True
    else:
        is_event[np.round(np.linspace(0, n_days - 1, n_ev)).astype(int)] = True

    tod = parse_clock(params.clock)
    n_win = params.pre + params.post
    z_morning = rng.standard_normal(n_days)
    z_minutes = rng.standard_normal((n_days, n_win))
    z_close = rng.standard_normal(n_days)
    half_sd = params.day_noise_sd / math.sqrt(2.0)
    morning = z_morning * half_sd + np.where(is_event, params.pre_drift, 0.0)
    minute_moves = z_minutes * params.minute_noise_sd
    jump_col = params.pre + params.jump_minute - 1
    jumps = np.zeros(n_days)
    jumps[is_event] = params.effect * eps
    minute_factors = 1.0 + minute_moves / 100.0
    minute_factors[:, jump_col] *= 1.0 + jumps / 100.0
    close_factor = 1.0 + z_close * half_sd / 100.0
    morning_factor = 1.0 + morning / 100.0

    day_factor = morning_factor * minute_factors.prod(axis=1) * close_factor
    prev_close = 100.0 * np.concatenate([[1.0], np.cumprod(day_factor)[:-1]])
    open_px = prev_close * morning_factor
    path = open_px[:, None] * np.cumprod(minute_factors, axis=1)
    close_px = path[:, -1] * close_factor

    t0 = days * MINUTES_PER_DAY + tod
    flat = np.arange(-params.pre - params.margin, -params.pre + 1)
    moving = np.arange(-params.pre + 1, params.post + 1)
    minutes = np.concatenate(
        [
            np.array([anchor * MINUTES_PER_DAY + params.close_clock]),
            (t0[:, None] + np.concatenate([flat, moving])[None, :]).ravel(),
            days * MINUTES_PER_DAY + params.close_clock,
        ]
    )
    prices = np.concatenate(
        [
            np.array([100.0]),
            np.hstack([np.repeat(open_px[:, None], len(flat), axis=1), path]).ravel(),
            close_px,
        ]
    )
    bars = BarSeries.from_arrays(minutes, np.full(len(minutes), params.symbol, dtype=object), prices)
    ev_days = days[is_event]
    calendar = pd.DataFrame(
        {
            "id": np.arange(1, n_ev + 1),
            "kind": kind,
            "minute": ev_days * MINUTES_PER_DAY + tod,
            "date": ev_days.astype("datetime64[D]"),
            "surprise": eps,
        }
    )
    return IntradayData(bars, calendar)


WINDOWS = ("daily", "halfday", "30min")


def _power_rep(params: IntradayParams, rep: int) -> list[dict]:
    data = generate_intraday(params, make_rng(params.seed, rep))
    series = data.bars[params.symbol]
    minutes = data.calendar["minute"].to_numpy()
    eps = data.calendar["surprise"].to_numpy()
    returns = {
        "daily": daily_window_returns(series, minutes, params.close_clock),
        "halfday": halfday_window_returns(series, minutes, params.post, close_clock=params.close_clock),
        "30min": window_returns(series, minutes, params.pre, params.post),
    }
    rows = []
    for window in WINDOWS:
        res = response_regression(eps, returns[window])
        b, s, t = res["Surprise"]
        rows.append({"rep": rep, "window": window, "b": b, "se": s, "t": t, "adj_r2": res.adj_r2,
                     "resid_sd": float(np.std(res.resid, ddof=2))})
    return rows


def window_power_experiment(params: IntradayParams, true_b: float, reps: int, threads: int = 1):
    """Regress daily, half-day and 30-minute returns on the surprise.

    Returns ``(per_rep, summary)`` where the summary averages ``b, se, t,
    adj_r2`` per window and reports the SD of ``b`` across replications.
    """
    params = replace(params, effect=true_b)
    per_rep = pd.DataFrame([row for rows in _map_reps(lambda r: _power_rep(params, r), reps, threads) for row in rows])
    g = per_rep.groupby("window", sort=False)
    summary = g[["b", "se", "t", "adj_r2", "resid_sd"]].mean()
    summary["b_sd"] = g["b"].std(ddof=1) if reps > 1 else 0.0
    summary["reps"] = reps
    return per_rep, summary.reset_index()


# --------------------------------------------------------------------------
# relevance-screen simulation


def simulate_screen_samples(rng: np.random.Generator, n_events: int = 276, n_baseline: int = 1000,
                            window_sd: float = 0.34, variance_ratio: float = 1.0):
    """Absolute window returns for one simulated announcement kind and its
    no-news baseline; the announcement window variance is scaled by
    ``variance_ratio``."""
    baseline = np.abs(rng.standard_normal(n_baseline) * window_sd)
    event = np.abs(rng.standard_normal(n_events) * window_sd * math.sqrt(variance_ratio))
    return event, baseline


# --------------------------------------------------------------------------
# cross-section simulation


FACTOR_NAMES = ("MKT", "SMB", "HML", "UMD", "RMW", "CMA", "STR")


@dataclass(frozen=True)
class CrossSectionParams:
    n_stocks: int = 50
    n_months: int = 168
    beta_low: float = -1.0
    beta_high: float = 1.0
    event_noise_sd: float = 0.5
    market_effect: float = 0.25
    market_noise_sd: float = 0.3
    premium: float = 0.0
    monthly_mean: float = 0.8
    factor_sd: float = 4.0
    idio_sd: float = 6.0
    window: int = 48
    min_events: int = 24
    start_month: int = 360  # 2000-01
    seed: int = 0


@dataclass(frozen=True)
class CrossSectionData:
    stock_event_returns: pd.DataFrame
    surprises: np.ndarray
    market_event_returns: np.ndarray
    event_months: np.ndarray
    monthly_returns: pd.DataFrame
    caps: pd.DataFrame
    true_betas: pd.Series
    factors: pd.DataFrame


def generate_cross_section(params: CrossSectionParams, rng: np.random.Generator | None = None) -> CrossSectionData:
    """One announcement per month; planted per-stock announcement betas.

    Expected monthly returns are linear in the true beta and scaled so the
    Q5 - Q1 spread of a sort on true betas equals ``premium``.
    """
    rng = rng or make_rng(params.seed)
    n, T = params.n_stocks, params.n_months
    tickers = [f"S{i:03d}" for i in range(n)]
    betas = rng.permutation(np.linspace(params.beta_low, params.beta_high, n))
    beta_mkt = rng.uniform(0.5, 1.5, n)
    eps = rng.standard_normal(T)
    mkt = params.market_effect * eps + rng.standard_normal(T) * params.market_noise_sd
    event_ret = betas[None, :] * eps[:, None] + beta_mkt[None, :] * mkt[:, None] + rng.standard_normal((T, n)) * params.event_noise_sd

    q_true = rank_buckets(betas, np.arange(n), 5)
    spread = betas[q_true == 5].mean() - betas[q_true == 1].mean()
    tilt = params.premium * (betas - betas.mean()) / spread if spread else np.zeros(n)
    factor = rng.standard_normal(T) * params.factor_sd
    monthly = params.monthly_mean + tilt[None, :] + beta_mkt[None, :] * factor[:, None] + rng.standard_normal((T, n)) * params.idio_sd
    caps = np.exp(rng.normal(9.0, 1.0, n))[None, :] * np.exp(np.cumsum(rng.standard_normal((T, n)) * 0.02, axis=0))

    months = params.start_month + np.arange(T)
    # unpriced extra factors, drawn last so earlier draws do not move
    other = rng.standard_normal((T, len(FACTOR_NAMES) - 1)) * 2.0
    factors = pd.DataFrame(np.column_stack([factor, other]), index=months, columns=list(FACTOR_NAMES))
    long_months = np.repeat(months, n)
    long_tickers = np.tile(np.asarray(tickers, dtype=object), T)
    return CrossSectionData(
        stock_event_returns=pd.DataFrame(event_ret, columns=tickers),
        surprises=eps,
        market_event_returns=mkt,
        event_months=months,
        monthly_returns=pd.DataFrame({"month": long_months, "ticker": long_tickers, "return": monthly.ravel()}),
        caps=pd.DataFrame({"month": long_months, "ticker": long_tickers, "cap": caps.ravel()}),
        true_betas=pd.Series(betas, index=tickers, name="beta_mna"),
        factors=factors,
    )


def _xsection_rep(params: CrossSectionParams, rep: int) -> dict:
    data = generate_cross_section(params, make_rng(params.seed, rep))
    panel = estimate_event_betas(
        data.stock_event_returns, data.surprises, data.market_event_returns, data.event_months,
        window=params.window, min_events=params.min_events,
    )
    assignments = assign_quintiles(panel)
    port, ls = portfolio_returns(assignments, data.monthly_returns, data.caps)
    ls_mean, ls_t = mean_t(ls["ew"])
    vw_mean, vw_t = mean_t(ls["vw"])
    q_events = quintile_event_returns(data.stock_event_returns, data.event_months, assignments)
    post = post_ranking_betas(q_events, data.surprises, data.market_event_returns)
    post_b = post["post_beta"].to_numpy()
    est = panel.dropna(subset=["beta_mna"])
    last = est[est["month"] == est["month"].max()].set_index("ticker")["beta_mna"]
    corr = float(np.corrcoef(last, data.true_betas.loc[last.index])[0, 1])
    return {
        "rep": rep,
        "ls_mean": ls_mean,
        "ls_t": ls_t,
        "ls_se": ls_mean / ls_t if ls_t else math.nan,
        "ls_vw_mean": vw_mean,
        "ls_vw_t": vw_t,
        "months": int(ls["ew"].notna().sum()),
        "post_monotone": bool(np.all(np.diff(post_b) > 0)),
        "beta_corr": corr,
        **{f"post_beta_q{i + 1}": b for i, b in enumerate(post_b)},
    }


def cross_section_experiment(params: CrossSectionParams, reps: int, threads: int = 1) -> pd.DataFrame:
    """Run the full beta-sort pipeline on ``reps`` simulated panels."""
    return pd.DataFrame(_map_reps(lambda r: _xsection_rep(params, r), reps, threads))


# --------------------------------------------------------------------------
# file-level synthetic economy


@dataclass(frozen=True)
class Economy:
    panel: pd.DataFrame
    announcements: pd.DataFrame
    bars: BarSeries
    daily: DailySeries


def synthetic_economy(params: DgpParams, kinds=("NFP", "PMI", "RETAIL", "CONF"), clock: str = "13:30",
                      start: str = "1997-01-02", market_symbol: str = "ES", rate_symbol: str = "TU",
                      quiet_days: int = 0) -> Economy:
    """Write a generated panel into the package's file contracts.

    Announcements cycle through ``kinds``, each followed by ``quiet_days``
    business days without news. The stock index jumps by ``R`` percent and
    the rate instrument (quoted as a yield in percent) by ``dI`` bps at the
    release; on quiet days the index moves by noise alone at the same
    clock. An overnight noise move precedes every release window.
    ``MU_implied_2y`` is dated the business day before each release,
    and the ``yield_{m}y`` curve moves by ``CURVE_SLOPES`` times the
    surprise plus rate noise.
    """
    rng = make_rng(params.seed)
    panel = generate_panel(params, rng)
    n = len(panel)
    step = quiet_days + 1
    days = pd.bdate_range(start, periods=n * step + 1).to_numpy().astype("datetime64[D]")
    is_event = np.zeros(len(days), dtype=bool)
    is_event[1::step] = True
    ev_days = days[is_event]
    tod = parse_clock(clock)
    t0_all = days[1:].astype(np.int64) * MINUTES_PER_DAY + tod
    t0 = ev_days.astype(np.int64) * MINUTES_PER_DAY + tod
    kind_col = np.asarray([kinds[i % len(kinds)] for i in range(n)], dtype=object)
    announcements = pd.DataFrame(
        {
            "id": np.arange(1, n + 1),
            "kind": kind_col,
            "minute": t0,
            "actual": panel["Surprise"].to_numpy(),
            "survey_median": np.zeros(n),
            "sign": np.ones(n),
        }
    )

    moves = np.zeros(len(days) - 1)
    moves[is_event[1:]] = panel["R"].to_numpy()
    quiet = ~is_event[1:]
    moves[quiet] = rng.standard_normal(int(quiet.sum())) * params.noise_sd_return
    rate_moves = np.zeros(len(days) - 1)
    rate_moves[is_event[1:]] = panel["dI"].to_numpy() / 100.0

    curve_noise = rng.standard_normal((n, len(CURVE_SLOPES))) * params.noise_sd_rate
    overnight = rng.standard_normal(len(days) - 1) * params.noise_sd_return

    before = np.arange(-12, 0)
    after = np.arange(0, 31)
    offsets = np.concatenate([before, after])
    # each day: overnight move into the pre-release level, then the release move
    growth = np.column_stack([1.0 + overnight / 100.0, 1.0 + moves / 100.0]).ravel()
    es_points = 100.0 * np.cumprod(growth)
    rate_level = 5.0 + np.concatenate([[0.0], np.cumsum(rate_moves)])
    grid = (t0_all[:, None] + offsets[None, :]).ravel()

    def path(lo, hi):
        return np.hstack([np.repeat(lo[:, None], len(before), 1), np.repeat(hi[:, None], len(after), 1)]).ravel()

    bars = BarSeries.from_arrays(
        np.concatenate([grid, grid]),
        np.concatenate([np.full(len(grid), market_symbol, dtype=object), np.full(len(grid), rate_symbol, dtype=object)]),
        np.concatenate([path(es_points[0::2], es_points[1::2]), path(rate_level[:-1], rate_level[1:])]),
    )

    prev_days = days[np.flatnonzero(is_event) - 1]
    frames = [pd.DataFrame({"date": prev_days, "series": "MU_implied_2y", "value": panel["MU"].to_numpy()})]
    for j, (maturity, slope) in enumerate(CURVE_SLOPES.items()):
        curve = np.zeros(len(days) - 1)
        curve[is_event[1:]] = (slope * panel["Surprise"].to_numpy() + curve_noise[:, j]) / 100.0
        level = 3.0 + np.concatenate([[0.0], np.cumsum(curve)])
        frames.append(pd.DataFrame({"date": days, "series": f"yield_{maturity}y", "value": level}))
    daily = DailySeries(pd.concat(frames, ignore_index=True))
    return Economy(panel, announcements, bars, daily)


@dataclass(frozen=True)
class CrossSectionFiles:
    announcements: pd.DataFrame
    bars: BarSeries
    daily: DailySeries
    membership: pd.DataFrame
    monthly_returns: pd.DataFrame


def _month_end(months) -> np.ndarray:
    first = pd.PeriodIndex.from_ordinals(np.asarray(months, dtype=np.int64), freq="M").to_timestamp(how="start")
    return (first + pd.offsets.BMonthEnd(0)).to_numpy().astype("datetime64[D]")


def cross_section_files(data: CrossSectionData, kind: str = "NFP", clock: str = "13:30",
                        market_symbol: str = "ES", horizon: int = 240) -> CrossSectionFiles:
    """Lay a simulated cross-section out in the package's file contracts.

    Each month's announcement falls on its first business day. Every stock
    and the index jump by their event return at the release and then print
    flat every 5 minutes for ``horizon`` minutes, so any window ending
    within the horizon sees the full move. Caps and factor returns are dated at month end.
    """
    months = np.asarray(data.event_months, dtype=np.int64)
    first = pd.PeriodIndex.from_ordinals(months, freq="M").to_timestamp(how="start")
    days = (first + pd.offsets.BDay(0)).to_numpy().astype("datetime64[D]")
    t0 = days.astype(np.int64) * MINUTES_PER_DAY + parse_clock(clock)
    n = len(months)
    announcements = pd.DataFrame({
        "id": np.arange(1, n + 1), "kind": kind, "minute": t0,
        "actual": data.surprises, "survey_median": np.zeros(n), "sign": np.ones(n),
    })

    after = np.arange(0, horizon + 1, 5)
    offsets = np.concatenate([[-11, -10], after])
    grid = (t0[:, None] + offsets[None, :]).ravel()
    minutes, symbols, prices = [], [], []
    columns = {market_symbol: data.market_event_returns}
    columns.update({t: data.stock_event_returns[t].to_numpy() for t in data.stock_event_returns.columns})
    for sym, rets in columns.items():
        level = 50.0 * np.concatenate([[1.0], np.cumprod(1.0 + np.asarray(rets) / 100.0)])
        before = level[:-1]
        prices.append(np.column_stack([before, before] + [level[1:]] * len(after)).ravel())
        minutes.append(grid)
        symbols.append(np.full(len(grid), sym, dtype=object))
    bars = BarSeries.from_arrays(np.concatenate(minutes), np.concatenate(symbols), np.concatenate(prices))

    ends = _month_end(months)
    caps = data.caps.copy()
    caps["date"] = ends[caps["month"].to_numpy() - months[0]]
    frames = [pd.DataFrame({"date": caps["date"], "series": "market_cap_" + caps["ticker"], "value": caps["cap"]})]
    for name in data.factors.columns:
        frames.append(pd.DataFrame({"date": ends, "series": name, "value": data.factors[name].to_numpy()}))
    daily = DailySeries(pd.concat(frames, ignore_index=True))

    tickers = list(data.stock_event_returns.columns)
    years = np.unique(1970 + months // 12)
    membership = pd.DataFrame({
        "year": np.repeat(np.concatenate([[years[0] - 1], years]), len(tickers)),
        "ticker": np.tile(np.asarray(tickers, dtype=object), len(years) + 1),
    })
    return CrossSectionFiles(announcements, bars, daily, membership, data.monthly_returns.copy())
