"""Announcement betas in the cross-section of stocks.

Months are integer indices (months since 1970-01, see
:func:`mnaevent.market_data.month_index`). Portfolios formed at the end of
month ``m`` are held during month ``m + 1``.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd
from scipy.linalg import solve_triangular

from .errors import (
    DataError,
    DegenerateDataError,
    InsufficientDataError,
    MalformedRowError,
    MissingDataError,
)
from .event_study import DEFAULT_CARRY, DEFAULT_CLOSE_CLOCK, DEFAULT_PRE, extract_event_return
from .market_data import PriceSeries, _parse_floats, _read_rows, parse_month
from .ranking import rank_buckets
from .regress import RANK_TOL, fit_ols

BETA_WINDOW = 48
MIN_EVENTS = 24
XSECTION_POST = 120

FACTOR_MODELS = {
    "CAPM": ("MKT",),
    "FF3": ("MKT", "SMB", "HML"),
    "Carhart": ("MKT", "SMB", "HML", "UMD"),
    "FF5": ("MKT", "SMB", "HML", "RMW", "CMA"),
    "FF5+UMD+STR": ("MKT", "SMB", "HML", "RMW", "CMA", "UMD", "STR"),
}


# --------------------------------------------------------------------------
# inputs


def load_membership(path) -> pd.DataFrame:
    """``membership.csv``: index constituents at the end of each year."""
    _, rows = _read_rows(path, ("year", "ticker"))
    years = []
    for ln, row in rows:
        try:
            years.append(int(row[0]))
        except ValueError:
            raise MalformedRowError(path, ln, f"year {row[0]!r} is not an integer") from None
    return pd.DataFrame({"year": years, "ticker": [r[1] for _, r in rows]}).drop_duplicates()


def load_monthly_returns(path) -> pd.DataFrame:
    """``monthly_returns.csv`` (month as YYYY-MM, return in percent)."""
    _, rows = _read_rows(path, ("month", "ticker", "return"))
    linenos = [ln for ln, _ in rows]
    months = []
    for ln, row in rows:
        try:
            months.append(parse_month(row[0]))
        except ValueError:
            raise MalformedRowError(path, ln, f"malformed month {row[0]!r}") from None
    rets = _parse_floats(path, linenos, [r[2] for _, r in rows], "return")
    frame = pd.DataFrame({"month": np.asarray(months, dtype=np.int64), "ticker": [r[1] for _, r in rows], "return": rets})
    if frame.duplicated(["month", "ticker"]).any():
        raise DataError(f"{path}: more than one return per (month, ticker)")
    return frame


def eligible_tickers(membership: pd.DataFrame | None, month: int, tickers) -> list:
    """Constituents at the end of the year before ``month``'s year."""
    if membership is None:
        return list(tickers)
    year = 1970 + month // 12
    members = set(membership.loc[membership["year"] == year - 1, "ticker"])
    return [t for t in tickers if t in members]


# --------------------------------------------------------------------------
# rolling announcement betas


def _multi_ols(X: np.ndarray, Y: np.ndarray):
    """Coefficients and SEs for several responses sharing one design."""
    n, k = X.shape
    Q, R = np.linalg.qr(X)
    if (np.abs(np.diag(R)) <= RANK_TOL * np.linalg.norm(X, axis=0)).any():
        return None
    coef = solve_triangular(R, Q.T @ Y)
    resid = Y - X @ coef
    sigma2 = (resid**2).sum(axis=0) / (n - k)
    Rinv = solve_triangular(R, np.eye(k))
    var = np.diag(Rinv @ Rinv.T)
    se = np.sqrt(np.outer(var, sigma2))
    return coef, se


def estimate_event_betas(
    stock_returns: pd.DataFrame,
    surprises,
    market_returns,
    event_months,
    formation_months=None,
    window: int = BETA_WINDOW,
    min_events: int = MIN_EVENTS,
) -> pd.DataFrame:
    """Rolling ``R_i = alpha + beta_mna * Surprise + beta * R_market`` per stock.

    ``stock_returns`` has one row per event (aligned with ``surprises``,
    ``market_returns`` and ``event_months``) and one column per ticker;
    NaN marks a missing stock return. For formation month ``m`` the window
    holds events in months ``m - window + 1 .. m``. Betas are NaN when
    fewer than ``min_events`` usable events remain or the design is
    singular.
    """
    eps = np.asarray(surprises, dtype=float)
    mkt = np.asarray(market_returns, dtype=float)
    months = np.asarray(event_months, dtype=np.int64)
    Y_all = stock_returns.to_numpy(dtype=float)
    tickers = list(stock_returns.columns)
    if formation_months is None:
        formation_months = np.arange(months.min(), months.max() + 1) if len(months) else np.zeros(0, np.int64)
    formation_months = np.asarray(formation_months, dtype=np.int64)

    n_t = len(tickers)
    shape = (len(formation_months), n_t)
    b_mna = np.full(shape, np.nan)
    b_mkt = np.full(shape, np.nan)
    counts = np.zeros(shape, dtype=np.int64)
    base_ok = np.isfinite(eps) & np.isfinite(mkt)
    for f, m in enumerate(formation_months):
        in_window = base_ok & (months > m - window) & (months <= m)
        if in_window.sum() < min_events:
            counts[f] = (np.isfinite(Y_all[in_window])).sum(axis=0)
            continue
        X = np.column_stack([np.ones(in_window.sum()), eps[in_window], mkt[in_window]])
        Y = Y_all[in_window]
        finite = np.isfinite(Y)
        counts[f] = finite.sum(axis=0)
        full = finite.all(axis=0)
        if full.any():
            fit = _multi_ols(X, Y[:, full])
            if fit is not None:
                b_mna[f, full] = fit[0][1]
                b_mkt[f, full] = fit[0][2]
        for j in np.flatnonzero(~full & (counts[f] >= min_events)):
            rows = finite[:, j]
            fit = _multi_ols(X[rows], Y[rows, j][:, None])
            if fit is not None:
                b_mna[f, j] = fit[0][1, 0]
                b_mkt[f, j] = fit[0][2, 0]
    b_mna[counts < min_events] = np.nan
    b_mkt[counts < min_events] = np.nan
    return pd.DataFrame(
        {
            "month": np.repeat(formation_months, n_t),
            "ticker": np.tile(np.asarray(tickers, dtype=object), len(formation_months)),
            "beta_mna": b_mna.ravel(),
            "beta_mkt": b_mkt.ravel(),
            "n_events": counts.ravel(),
        }
    )


# --------------------------------------------------------------------------
# sorts and portfolio returns


def form_quintiles(betas: pd.Series, ids=None) -> pd.Series:
    """Quintile (1 = lowest beta) per ticker.

    Ties are broken by the permanent id (default: the ticker label itself);
    the ``n mod 5`` leftover stocks go to the lowest quintiles.
    """
    betas = betas.dropna()
    if len(betas) < 5:
        raise InsufficientDataError(f"need at least 5 stocks with betas, got {len(betas)}")
    order_key = np.asarray([ids[t] for t in betas.index]) if ids is not None else np.asarray(betas.index, dtype=object)
    if order_key.dtype == object:
        order_key = pd.Series(order_key).rank(method="dense").to_numpy()
    labels = rank_buckets(betas.to_numpy(), order_key, 5)
    return pd.Series(labels, index=betas.index, name="quintile")


def assign_quintiles(beta_panel: pd.DataFrame, membership: pd.DataFrame | None = None, ids=None) -> pd.DataFrame:
    """Monthly quintile assignments from a beta panel; months with fewer
    than 5 eligible stocks are skipped."""
    panel = beta_panel[np.isfinite(beta_panel["beta_mna"].to_numpy(dtype=float))]
    if membership is not None:
        year_before = 1970 + panel["month"].to_numpy() // 12 - 1
        members = set(zip(membership["year"], membership["ticker"]))
        keep = np.fromiter((k in members for k in zip(year_before, panel["ticker"])), bool, len(panel))
        panel = panel[keep]
    tickers = panel["ticker"].to_numpy()
    if ids is not None:
        key = np.asarray([ids[t] for t in tickers])
    else:
        key = pd.Series(tickers).rank(method="dense").to_numpy()
    months = panel["month"].to_numpy()
    betas = panel["beta_mna"].to_numpy(dtype=float)
    labels = np.zeros(len(panel), dtype=np.int64)
    order = np.argsort(months, kind="mergesort")
    bounds = np.flatnonzero(np.diff(months[order])) + 1
    for chunk in np.split(order, bounds):
        if len(chunk) >= 5:
            labels[chunk] = rank_buckets(betas[chunk], key[chunk], 5)
    ok = labels > 0
    out = pd.DataFrame({"month": months[ok], "ticker": tickers[ok], "quintile": labels[ok], "beta_mna": betas[ok]})
    return out.sort_values(["month", "quintile", "beta_mna", "ticker"], kind="mergesort").reset_index(drop=True)


def portfolio_returns(assignments: pd.DataFrame, returns: pd.DataFrame, caps: pd.DataFrame | None = None):
    """Equal- and value-weighted returns of each quintile in the month after formation.

    ``returns`` has ``month, ticker, return`` (percent, holding month);
    ``caps`` has ``month, ticker, cap`` at formation month end. A stock
    without a return is dropped from that month; one without a cap only
    from the value-weighted portfolio.

    Returns ``(panel, long_short)``: panel rows ``month, quintile, ew, vw,
    count`` keyed by holding month, and the Q5 - Q1 series per weighting.
    """
    held = assignments[["month", "ticker", "quintile"]].copy()
    held["formation"] = held["month"]
    held["month"] = held["month"] + 1
    data = held.merge(returns[["month", "ticker", "return"]], on=["month", "ticker"], how="inner")
    data = data[np.isfinite(data["return"])]
    if caps is not None:
        data = data.merge(
            caps[["month", "ticker", "cap"]].rename(columns={"month": "formation"}), on=["formation", "ticker"], how="left"
        )
    else:
        data["cap"] = np.nan
    data["w"] = data["cap"].where(data["cap"] > 0)
    data["wr"] = data["w"] * data["return"]
    g = data.groupby(["month", "quintile"], sort=True)
    panel = pd.DataFrame(
        {
            "ew": g["return"].mean(),
            "vw": g["wr"].sum(min_count=1) / g["w"].sum(min_count=1),
            "count": g["return"].size(),
        }
    ).reset_index()
    wide_ew = panel.pivot(index="month", columns="quintile", values="ew")
    wide_vw = panel.pivot(index="month", columns="quintile", values="vw")
    ls = pd.DataFrame(index=wide_ew.index)
    ls["ew"] = wide_ew.get(5) - wide_ew.get(1) if {1, 5} <= set(wide_ew.columns) else np.nan
    ls["vw"] = wide_vw.get(5) - wide_vw.get(1) if {1, 5} <= set(wide_vw.columns) else np.nan
    ls = ls.dropna(how="all").reset_index()
    return panel, ls


def mean_t(values) -> tuple[float, float]:
    """Sample mean and its t-statistic against zero."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if len(v) < 2:
        raise InsufficientDataError("need at least 2 observations for a t-statistic")
    sd = v.std(ddof=1)
    t = v.mean() / (sd / math.sqrt(len(v))) if sd > 0 else math.copysign(math.inf, v.mean()) if v.mean() else math.nan
    return float(v.mean()), float(t)


def quintile_summary(panel: pd.DataFrame, ls: pd.DataFrame) -> pd.DataFrame:
    """Time-series means and t-statistics per quintile and for L/S."""
    rows = []
    for weight in ("ew", "vw"):
        for q in range(1, 6):
            series = panel.loc[panel["quintile"] == q, weight]
            if series.notna().sum() >= 2:
                mu, t = mean_t(series)
                rows.append({"portfolio": f"Q{q}", "weight": weight, "mean": mu, "t": t, "months": int(series.notna().sum())})
        if ls[weight].notna().sum() >= 2:
            mu, t = mean_t(ls[weight])
            rows.append({"portfolio": "L/S", "weight": weight, "mean": mu, "t": t, "months": int(ls[weight].notna().sum())})
    return pd.DataFrame(rows)


def alpha_table(ls_returns: pd.Series, factors: pd.DataFrame, models=None, se: str = "classical") -> pd.DataFrame:
    """Intercepts of the long-short return on each factor set.

    ``ls_returns`` and ``factors`` are indexed by month. Factor columns
    that are identically zero over the sample carry no information and
    are left out of the fit.
    """
    models = models or FACTOR_MODELS
    joined = pd.concat([ls_returns.rename("LS"), factors], axis=1, join="inner").dropna()
    rows = []
    for name, cols in models.items():
        missing = [c for c in cols if c not in joined]
        if missing:
            raise DataError(f"factor model {name} needs missing factors {missing}")
        used = [c for c in cols if (joined[c] != 0).any()]
        X = np.column_stack([np.ones(len(joined))] + [joined[c].to_numpy() for c in used])
        res = fit_ols(X, joined["LS"].to_numpy(), ("alpha",) + tuple(used), se=se)
        a, s, t = res["alpha"]
        rows.append({"model": name, "alpha": a, "se": s, "t": t, "n": res.n, "factors": "+".join(used)})
    return pd.DataFrame(rows)


# --------------------------------------------------------------------------
# post-ranking diagnostics


def quintile_event_returns(stock_returns: pd.DataFrame, event_months, assignments: pd.DataFrame) -> pd.DataFrame:
    """Equal-weighted event-window return of each quintile portfolio.

    An event in month ``m`` uses the portfolios formed at the end of
    ``m - 1``. Rows align with ``stock_returns``; NaN where no portfolio
    was formed.
    """
    months = np.asarray(event_months, dtype=np.int64)
    col = {t: j for j, t in enumerate(stock_returns.columns)}
    Y = stock_returns.to_numpy(dtype=float)
    known = assignments[assignments["ticker"].isin(col)]
    form_months = np.unique(known["month"].to_numpy())
    row_of = {int(m): i for i, m in enumerate(form_months)}
    label = np.zeros((len(form_months), Y.shape[1]), dtype=np.int64)
    label[[row_of[int(m)] for m in known["month"]], [col[t] for t in known["ticker"]]] = known["quintile"].to_numpy()
    out = np.full((len(months), 5), np.nan)
    for i, m in enumerate(months):
        r = row_of.get(int(m) - 1)
        if r is None:
            continue
        for q in range(1, 6):
            vals = Y[i, label[r] == q]
            vals = vals[np.isfinite(vals)]
            if len(vals):
                out[i, q - 1] = vals.mean()
    return pd.DataFrame(out, columns=[1, 2, 3, 4, 5], index=stock_returns.index)


def post_ranking_betas(portfolio_event_returns: pd.DataFrame, surprises, market_returns, se: str = "classical") -> pd.DataFrame:
    """Full-sample ``beta_mna`` of each quintile portfolio."""
    eps = np.asarray(surprises, dtype=float)
    mkt = np.asarray(market_returns, dtype=float)
    rows = []
    for q in portfolio_event_returns.columns:
        y = portfolio_event_returns[q].to_numpy(dtype=float)
        ok = np.isfinite(y) & np.isfinite(eps) & np.isfinite(mkt)
        X = np.column_stack([np.ones(ok.sum()), eps[ok], mkt[ok]])
        res = fit_ols(X, y[ok], ("const", "Surprise", "Market"), se=se)
        b, s, t = res["Surprise"]
        rows.append({"quintile": q, "post_beta": b, "se": s, "t": t, "beta_mkt": res["Market"][0], "n": res.n})
    return pd.DataFrame(rows)


def pre_ranking_betas(assignments: pd.DataFrame) -> pd.DataFrame:
    """Average pre-ranking ``beta_mna`` of each quintile over formation months."""
    per_month = assignments.groupby(["month", "quintile"])["beta_mna"].mean().reset_index()
    return per_month.groupby("quintile")["beta_mna"].mean().rename("pre_beta").reset_index()


# --------------------------------------------------------------------------
# announcement premium and pre-announcement drift


def announcement_drift(
    series: PriceSeries,
    calendar: pd.DataFrame,
    pre: int = DEFAULT_PRE,
    post: int = 20,
    max_carry: int = DEFAULT_CARRY,
    close_clock: int = DEFAULT_CLOSE_CLOCK,
) -> pd.DataFrame:
    """Per kind: mean announcement-window return and pre-announcement drift
    (prior close to ``t0 - pre``), their t-statistics, and their correlation.

    Events without the needed prices are skipped and counted in ``dropped``.
    """
    rows = []
    for kind, group in calendar.groupby("kind", sort=True):
        ann, drift = [], []
        dropped = 0
        for row in group.sort_values("id").itertuples(index=False):
            try:
                er = extract_event_return(series, int(row.minute), pre, post, max_carry, int(row.id), True, close_clock)
            except MissingDataError:
                dropped += 1
                continue
            ann.append(er.window_return)
            drift.append(er.pre_drift)
        ann = np.asarray(ann)
        drift = np.asarray(drift)
        if len(ann) < 3:
            raise InsufficientDataError(f"kind {kind!r}: fewer than 3 usable events")
        if ann.std() == 0 or drift.std() == 0:
            raise DegenerateDataError(f"kind {kind!r}: correlation undefined because a series is constant")
        ann_mean, ann_t = mean_t(ann)
        drift_mean, drift_t = mean_t(drift)
        rows.append(
            {
                "kind": kind,
                "n": len(ann),
                "ann_mean": ann_mean,
                "ann_t": ann_t,
                "drift_mean": drift_mean,
                "drift_t": drift_t,
                "corr": float(np.corrcoef(drift, ann)[0, 1]),
                "dropped": dropped,
            }
        )
    return pd.DataFrame(rows)
