"""``mnaevent`` command-line front end.

Every subcommand reads the package's CSV contracts (or generates synthetic
ones), writes CSV files into ``--out`` and, with ``--figures``, PNG files
next to them. Settings can come from a flat ``key=value`` file passed with
``--config``; flags on the command line win.

Exit codes: 0 success, 1 data or validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import re
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from . import cross_section as xs
from . import decomposition as dc
from . import event_study as es
from . import kalman as kf
from . import market_data as md
from . import regress as rg
from . import synth_market as sm
from .errors import DataError, MissingDataError
from .output import metadata_lines, regression_frame, write_table

COMMANDS = ("screen", "summarize", "respond", "decompose", "termstructure", "channels",
            "kalman", "simulate", "power", "xsection", "drift")

MU_PROXIES = {
    "implied_2y": "MU_implied_2y",
    "implied_5y": "MU_implied_5y",
    "implied_10y": "MU_implied_10y",
    "realized": "MU_realized_2y",
}

# settings that never change the numbers in an output
_NOT_HASHED = {"out", "threads", "fixed_clock", "figures", "config"}
_PATH_KEYS = ("announcements", "bars", "daily", "membership", "monthly_returns")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, post_default: int = es.DEFAULT_POST):
    g = p.add_argument_group("run")
    g.add_argument("--config", help="flat key=value settings file; flags override it")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--mu-proxy", default="implied_2y", choices=sorted(MU_PROXIES))
    g.add_argument("--se", default="classical", choices=["classical", "hc1"])
    g.add_argument("--pre", type=int, default=es.DEFAULT_PRE, help="minutes before the release")
    g.add_argument("--post", type=int, default=post_default, help="minutes after the release")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--fixed-clock", help="timestamp written as 'generated' instead of the wall clock")
    g.add_argument("--figures", action="store_true", help="also render PNG figures")


def _inputs(p: argparse.ArgumentParser, daily=False, bars=True):
    g = p.add_argument_group("inputs")
    g.add_argument("--announcements")
    if bars:
        g.add_argument("--bars")
        g.add_argument("--symbol", default="ES", help="index instrument in the bars file")
    if daily:
        g.add_argument("--daily")
    g.add_argument("--kinds", help="comma-separated announcement kinds (default: all)")
    g.add_argument("--normalization", default="full_sample", choices=["full_sample", "expanding", "rolling"])
    g.add_argument("--norm-window", type=int, help="window for rolling normalization")
    g.add_argument("--max-carry", type=int, default=es.DEFAULT_CARRY, help="carry-forward cap in minutes")
    g.add_argument("--close-clock", default="21:00", help="UTC clock of the daily close")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mnaevent", description="Macro-news event-study pipeline.")
    parser.add_argument("--version", action="version", version=f"mnaevent {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("screen", help="relevance screen per announcement kind")
    _inputs(p)
    _common(p)

    p = sub.add_parser("summarize", help="summary statistics and quartile price paths")
    _inputs(p, daily=True)
    _common(p)
    p.add_argument("--horizon", type=int, default=30, help="minutes after the release in paths.csv")

    p = sub.add_parser("respond", help="response regressions of window returns on surprises")
    _inputs(p, daily=True)
    _common(p)
    p.add_argument("--window", default="30min", choices=["30min", "halfday", "daily"])
    p.add_argument("--split", default="none", choices=["none", "mu", "cfnai", "recession"])

    p = sub.add_parser("decompose", help="interaction regressions and the channel split")
    _inputs(p, daily=True)
    _common(p)
    p.add_argument("--rate-symbol", default="TU", help="rate instrument quoted as a yield in percent")
    p.add_argument("--controls", help="comma-separated daily series added with their surprise interaction")
    p.add_argument("--realized-window", type=int, default=dc.REALIZED_WINDOW)
    p.add_argument("--annualization", type=int, default=dc.ANNUALIZATION)

    p = sub.add_parser("termstructure", help="yield response by maturity")
    _inputs(p, daily=True, bars=False)
    _common(p)

    p = sub.add_parser("channels", help="historical cash-flow and rate channels")
    _inputs(p, daily=True)
    _common(p)
    p.add_argument("--b", type=float, help="cash-flow coefficient (estimated when omitted)")
    p.add_argument("--d", type=float, help="interaction coefficient (estimated when omitted)")
    p.add_argument("--realized-window", type=int, default=dc.REALIZED_WINDOW)
    p.add_argument("--annualization", type=int, default=dc.ANNUALIZATION)

    p = sub.add_parser("kalman", help="simulate and filter the latent-rate model")
    _common(p)
    p.add_argument("--sigma-w2", type=float, default=0.01)
    p.add_argument("--sigma-m2", type=float, default=0.09)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--i0", type=float, default=0.0)
    p.add_argument("--p0", type=float)

    p = sub.add_parser("simulate", help="write a synthetic economy and a recovery experiment")
    _common(p)
    p.add_argument("--design", default="panel", choices=["panel", "xsection"])
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n-events", type=int, default=2000)
    p.add_argument("--quiet-days", type=int, default=1, help="news-free business days after each release")
    p.add_argument("--a1", type=float, default=0.30)
    p.add_argument("--a2g1", type=float, default=-0.23)
    p.add_argument("--gamma0", type=float, default=0.0)
    p.add_argument("--gamma1", type=float, default=2.93)
    p.add_argument("--noise-sd-return", type=float, default=0.5)
    p.add_argument("--noise-sd-rate", type=float, default=5.0)
    p.add_argument("--mu-process", default="uniform:0.3:1.7", help="constant:L | uniform:LO:HI | ar1:MEAN:PHI:SD")
    p.add_argument("--n-stocks", type=int, default=50)
    p.add_argument("--n-months", type=int, default=168)
    p.add_argument("--premium", type=float, default=0.0, help="monthly Q5-Q1 premium in percent")

    p = sub.add_parser("power", help="window-width power experiment")
    _common(p)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--true-b", type=float, default=0.16)
    p.add_argument("--window-sd", type=float, default=0.35, help="30-minute noise SD in percent")
    p.add_argument("--daily-sd", type=float, default=1.0, help="daily noise SD in percent")
    p.add_argument("--n-events", type=int, default=266)

    p = sub.add_parser("xsection", help="announcement-beta sorts, alphas and pre/post-ranking betas")
    _inputs(p, daily=True)
    _common(p, post_default=xs.XSECTION_POST)
    p.add_argument("--membership")
    p.add_argument("--monthly-returns")
    p.add_argument("--beta-window", type=int, default=xs.BETA_WINDOW, help="rolling window in months")
    p.add_argument("--min-events", type=int, default=xs.MIN_EVENTS)

    p = sub.add_parser("drift", help="announcement returns and pre-announcement drift")
    _inputs(p)
    _common(p)
    return parser


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment line."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _truthy(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(config) - set(actions) - {"command"})
        if unknown:
            raise UsageError(f"{args.config}: unknown setting(s) for {args.command}: {', '.join(unknown)}")
        config.pop("command", None)
        config.pop("config", None)
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
        for key in config:
            if isinstance(actions[key], argparse._StoreTrueAction):
                setattr(args, key, _truthy(getattr(args, key)))
        for key, action in actions.items():
            if action.choices is not None and key in config and getattr(args, key) not in action.choices:
                raise UsageError(f"{args.config}: {key} must be one of {', '.join(map(str, action.choices))}")
    return args


# --------------------------------------------------------------------------
# shared helpers


class Run:
    """Per-invocation context: settings, output directory and metadata."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out)
        self.config = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}
        self.generated = args.fixed_clock or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        self.extra: dict[str, object] = {}
        self.written: list[Path] = []

    def header(self) -> list[str]:
        return metadata_lines(self.args.command, self.config, self.args.seed, self.generated, self.extra)

    def table(self, name: str, frame: pd.DataFrame, footer=()) -> Path:
        path = write_table(self.out / name, frame, self.header(), footer)
        self.written.append(path)
        return path

    def regression(self, name: str, result) -> Path:
        table, footer = regression_frame(result)
        return self.table(name, table, footer)

    def figure(self, func, frame, name: str):
        if self.args.figures:
            from . import plots

            self.written.append(getattr(plots, func)(frame, self.out / name))


def _need(args, *keys):
    for key in keys:
        if not getattr(args, key, None):
            raise UsageError(f"{args.command}: --{key.replace('_', '-')} is required")


def _check_paths(args):
    for key in _PATH_KEYS:
        value = getattr(args, key, None)
        if value and not Path(value).is_file():
            raise DataError(f"input file not found: {value}")


def _kinds(args):
    return [k.strip() for k in args.kinds.split(",") if k.strip()] if getattr(args, "kinds", None) else None


def _load_events(args):
    """All announcements (for calendars) and the selected, normalized ones."""
    frame = md.load_announcements(args.announcements)
    kinds = _kinds(args)
    chosen = frame
    if kinds:
        missing = sorted(set(kinds) - set(frame["kind"]))
        if missing:
            raise MissingDataError(f"{args.announcements}: no announcements of kind(s) {', '.join(missing)}")
        chosen = frame[frame["kind"].isin(kinds)]
    chosen = md.compute_surprises(chosen, args.normalization, args.norm_window)
    return frame, chosen


def _series(args, symbol: str) -> md.PriceSeries:
    bars = md.load_bars(args.bars)
    if symbol not in bars:
        raise MissingDataError(f"{args.bars}: no bars for symbol {symbol!r}")
    return bars[symbol]


def _bars(args) -> md.BarSeries:
    return md.load_bars(args.bars)


def _clock(minute: int) -> str:
    tod = int(minute) % md.MINUTES_PER_DAY
    return f"{tod // 60:02d}:{tod % 60:02d}"


def _close_clock(args) -> int:
    return md.parse_clock(args.close_clock)


def _returns(args, series, events, window="30min") -> np.ndarray:
    minutes = events["minute"].to_numpy()
    if window == "30min":
        return es.window_returns(series, minutes, args.pre, args.post, args.max_carry)
    if window == "halfday":
        return es.halfday_window_returns(series, minutes, args.post, args.max_carry, _close_clock(args))
    return es.daily_window_returns(series, minutes, _close_clock(args))


def _mu_series(args, daily: md.DailySeries) -> pd.Series:
    name = MU_PROXIES[args.mu_proxy]
    if name in daily:
        return daily.get(name)
    if args.mu_proxy == "realized":
        yields = daily.get("yield_2y")
        changes = yields.diff().iloc[1:] * 100.0
        window = getattr(args, "realized_window", dc.REALIZED_WINDOW)
        annual = getattr(args, "annualization", dc.ANNUALIZATION)
        return dc.realized_mu(changes, window, annual)
    raise MissingDataError(f"{args.daily}: daily series {name!r} not present")


def _lag(series: pd.Series, dates) -> np.ndarray:
    """Most recent value strictly before each date."""
    known = series.index.to_numpy().astype("datetime64[D]")
    query = np.asarray(dates).astype("datetime64[D]")
    idx = np.searchsorted(known, query, side="left") - 1
    out = np.full(query.shape, np.nan)
    ok = idx >= 0
    out[ok] = series.to_numpy()[idx[ok]]
    return out


def _event_data(args, events, series, daily, controls=()) -> pd.DataFrame:
    data = pd.DataFrame({
        "id": events["id"].to_numpy(),
        "kind": events["kind"].to_numpy(),
        "date": events["date"].to_numpy(),
        "Surprise": events["normalized"].to_numpy(dtype=float),
        "R": _returns(args, series, events),
    })
    if daily is not None:
        data["MU"] = _lag(_mu_series(args, daily), data["date"])
        for name in controls:
            data[name] = daily.lagged(name, data["date"])
    return data.sort_values("id", kind="mergesort").reset_index(drop=True)


# --------------------------------------------------------------------------
# subcommands


def cmd_screen(run: Run):
    args = run.args
    _need(args, "announcements", "bars")
    calendar, events = _load_events(args)
    series = _series(args, args.symbol)
    baselines: dict[str, np.ndarray] = {}
    rows = []
    for kind, group in events.groupby("kind", sort=True):
        ev, dropped = es.event_returns(series, group, args.pre, args.post, args.max_carry)
        clock = _clock(pd.Series(group["minute"].to_numpy() % md.MINUTES_PER_DAY).mode().iloc[0])
        if clock not in baselines:
            baselines[clock] = es.baseline_abs_returns(series, clock, calendar, args.pre, args.post, args.max_carry)
        row = asdict(es.relevance_screen(ev["abs_return"].to_numpy(), baselines[clock], kind))
        row["clock"] = clock
        row["dropped"] = dropped
        rows.append(row)
    run.table("screen.csv", pd.DataFrame(rows))


def cmd_summarize(run: Run):
    args = run.args
    _need(args, "announcements", "bars")
    _, events = _load_events(args)
    series = _series(args, args.symbol)
    rows = []
    for kind, group in events.groupby("kind", sort=True):
        ev, _ = es.event_returns(series, group, args.pre, args.post, args.max_carry)
        rows.append({"kind": kind, "variable": "Surprise", **es.summarize(group["normalized"].dropna())})
        if len(ev):
            rows.append({"kind": kind, "variable": "Return", **es.summarize(ev["window_return"])})
    if args.daily:
        daily = md.load_daily(args.daily)
        for name in daily.names:
            if name.startswith("market_cap_"):
                continue
            rows.append({"kind": "daily", "variable": name, **es.summarize(daily.get(name).to_numpy())})
    summary = pd.DataFrame(rows)[["kind", "variable", *es.SUMMARY_COLUMNS]]
    run.table("summary.csv", summary)
    paths, dropped = es.price_path_by_quartile(series, events.dropna(subset=["normalized"]), args.horizon, args.pre,
                                               args.max_carry)
    run.extra["paths_dropped"] = dropped
    run.table("paths.csv", paths)
    run.figure("quartile_paths", paths, "paths.png")


def _response_row(kind, window, res):
    b, s, t = res["Surprise"]
    return {"kind": kind, "window": window, "a": res["const"][0], "b": b, "se": s, "t": t,
            "r2": res.r2, "adj_r2": res.adj_r2, "n": res.n, "dropped": res.dropped}


def _safe_name(kind: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", kind)


def cmd_respond(run: Run):
    args = run.args
    _need(args, "announcements", "bars")
    _, events = _load_events(args)
    series = _series(args, args.symbol)
    events = events.assign(R=_returns(args, series, events, args.window))
    rows = []
    groups = list(events.groupby("kind", sort=True))
    if len(groups) > 1:
        groups.append(("ALL", events))
    for kind, group in groups:
        res = rg.response_regression(group["normalized"], group["R"], args.se)
        rows.append(_response_row(kind, args.window, res))
        run.regression(f"regression_{_safe_name(kind)}.csv", res)
    run.table("response.csv", pd.DataFrame(rows))

    if args.split != "none":
        _need(args, "daily")
        daily = md.load_daily(args.daily)
        data = events.rename(columns={"normalized": "Surprise"})[["id", "date", "Surprise", "R"]].copy()
        if args.split == "mu":
            data["MU"] = _lag(_mu_series(args, daily), data["date"])
        elif args.split == "cfnai":
            data["CFNAI"] = daily.lagged("CFNAI", data["date"])
        else:
            data["USREC"] = daily.lagged("USREC", data["date"])
        halves = rg.split_regression(data, args.split, "R", args.se)
        split_rows = []
        for half, res in halves.items():
            b, s, t = res["Surprise"]
            split_rows.append({"splitter": args.split, "half": half, "b": b, "se": s, "t": t,
                               "adj_r2": res.adj_r2, "n": res.n})
        run.table("split.csv", pd.DataFrame(split_rows))


def _interaction_terms(controls):
    terms = ["Surprise", "MU", "Surprise*MU"]
    for c in controls:
        terms += [c, f"Surprise*{c}"]
    return tuple(terms)


def _fit_channels(args, events, series, daily, controls=()):
    data = _event_data(args, events, series, daily, controls)
    spec = rg.DesignSpec("R", _interaction_terms(controls), args.se)
    return data, rg.interaction_regression(spec, data)


def cmd_decompose(run: Run):
    args = run.args
    _need(args, "announcements", "bars", "daily")
    _, events = _load_events(args)
    bars = _bars(args)
    if args.symbol not in bars:
        raise MissingDataError(f"{args.bars}: no bars for symbol {args.symbol!r}")
    daily = md.load_daily(args.daily)
    controls = _kinds_list(args.controls)
    data, stock = _fit_channels(args, events, bars[args.symbol], daily, controls)
    run.extra["mu_proxy"] = args.mu_proxy
    run.regression("regression.csv", stock)
    b, d = stock["Surprise"][0], stock["Surprise*MU"][0]
    rows = [
        {"quantity": "a1", "value": b},
        {"quantity": "a2g1", "value": d},
        {"quantity": "breakeven_mu", "value": dc.breakeven_mu(b, d)},
    ]
    if args.rate_symbol in bars:
        rate = bars[args.rate_symbol]
        minutes = events["minute"].to_numpy()
        p0 = rate.prices_at(minutes - args.pre, args.max_carry)
        p1 = rate.prices_at(minutes + args.post, args.max_carry)
        di = pd.Series((p1 - p0) * 100.0, index=events["id"].to_numpy())
        data["dI"] = di.loc[data["id"]].to_numpy()
        rate_res = rg.interaction_regression(rg.DesignSpec("dI", _interaction_terms(controls), args.se), data)
        run.regression("regression_rate.csv", rate_res)
        g0, g1 = rate_res["Surprise"], rate_res["Surprise*MU"]
        rows += [
            {"quantity": "gamma0", "value": g0[0]},
            {"quantity": "gamma0_t", "value": g0[2]},
            {"quantity": "gamma1", "value": g1[0]},
            {"quantity": "a2", "value": dc.estimate_a2(d, g1[0])},
        ]
    rows += [{"quantity": "n", "value": stock.n}, {"quantity": "dropped", "value": stock.dropped}]
    run.table("decomposition.csv", pd.DataFrame(rows, dtype=object))


def _kinds_list(text):
    return [c.strip() for c in text.split(",") if c.strip()] if text else []


def cmd_termstructure(run: Run):
    args = run.args
    _need(args, "announcements", "daily")
    _, events = _load_events(args)
    daily = md.load_daily(args.daily)
    maturities = sorted(
        (float(m.group(1)), name) for name in daily.names if (m := re.fullmatch(r"yield_(\d+(?:\.\d+)?)y", name))
    )
    if not maturities:
        raise MissingDataError(f"{args.daily}: no yield_<m>y series")
    dates = events["date"].to_numpy()
    changes = pd.DataFrame({
        (int(m) if m == int(m) else m): daily.changes(name, dates, scale=100.0) for m, name in maturities
    })
    _, curve = rg.term_structure_curve(changes, events["normalized"].to_numpy(), args.se)
    run.table("termstructure.csv", curve)
    run.figure("term_structure", curve, "termstructure.png")


def cmd_channels(run: Run):
    args = run.args
    _need(args, "daily")
    daily = md.load_daily(args.daily)
    if args.b is None or args.d is None:
        _need(args, "announcements", "bars")
        _, events = _load_events(args)
        _, res = _fit_channels(args, events, _series(args, args.symbol), daily)
        b = res["Surprise"][0] if args.b is None else args.b
        d = res["Surprise*MU"][0] if args.d is None else args.d
    else:
        b, d = args.b, args.d
    mu = _mu_series(args, daily)
    lagged = pd.Series(mu.to_numpy()[:-1], index=mu.index[1:])
    frame = dc.channel_series(b, d, lagged)
    frame["date"] = np.asarray(frame["date"]).astype("datetime64[D]")
    run.extra.update({"b": repr(float(b)), "d": repr(float(d)), "mu_proxy": args.mu_proxy})
    if d != 0:
        run.extra["breakeven_mu"] = repr(dc.breakeven_mu(b, d))
    run.table("channels.csv", frame)
    crossings = dc.regime_crossings(frame)
    crossings["date"] = [pd.Timestamp(x).isoformat() for x in crossings["date"]]
    run.table("crossings.csv", crossings)
    run.figure("channels", frame, "channels.png")


def cmd_kalman(run: Run):
    args = run.args
    params = kf.KalmanParams(args.sigma_w2, args.sigma_m2)
    run.extra["rng"] = kf.RNG_ALGORITHM
    trace = kf.simulate_latent(params, args.steps, args.seed, args.i0, args.p0)
    run.table("kalman_trace.csv", trace[list(kf.TRACE_COLUMNS)])
    steady = kf.steady_state(params)
    err = trace["i_post"] - trace["true_state"]
    run.table("steady.csv", pd.DataFrame([{
        "p_pred": steady["p_pred"], "gain": steady["gain"], "p_post": steady["p_post"],
        "final_gain": float(trace["gain"].iloc[-1]), "filter_mse": float((err**2).mean()), "steps": args.steps,
    }]))
    run.figure("kalman_trace", trace, "kalman.png")


def _dgp(args) -> sm.DgpParams:
    return sm.DgpParams(
        a1=args.a1, a2g1=args.a2g1, gamma0=args.gamma0, gamma1=args.gamma1,
        noise_sd_return=args.noise_sd_return, noise_sd_rate=args.noise_sd_rate,
        mu_process=sm.MuProcess.parse(args.mu_process), n_events=args.n_events, seed=args.seed,
    )


def cmd_simulate(run: Run):
    args = run.args
    run.extra["rng"] = kf.RNG_ALGORITHM
    header = run.header()
    out = run.out
    if args.design == "panel":
        params = _dgp(args)
        economy = sm.synthetic_economy(params, quiet_days=args.quiet_days)
        md.write_announcements(out / "announcements.csv", economy.announcements, header)
        md.write_bars(out / "bars.csv", economy.bars, header)
        md.write_daily(out / "daily.csv", economy.daily, header)
        if args.reps > 0:
            _, summary = sm.recovery_experiment(params, args.reps, args.se, args.threads)
            run.table("experiment.csv", summary)
    else:
        params = sm.CrossSectionParams(n_stocks=args.n_stocks, n_months=args.n_months, premium=args.premium,
                                       seed=args.seed)
        files = sm.cross_section_files(sm.generate_cross_section(params))
        md.write_announcements(out / "announcements.csv", files.announcements, header)
        md.write_bars(out / "bars.csv", files.bars, header)
        md.write_daily(out / "daily.csv", files.daily, header)
        write_table(out / "membership.csv", files.membership, header)
        monthly = files.monthly_returns.assign(month=[md.month_label(m) for m in files.monthly_returns["month"]])
        write_table(out / "monthly_returns.csv", monthly, header)
        if args.reps > 0:
            per_rep = sm.cross_section_experiment(params, args.reps, args.threads)
            summary = per_rep.drop(columns=["rep"]).astype(float).agg(["mean", "std"]).T.reset_index()
            summary.columns = ["statistic", "mean", "sd"]
            summary["reps"] = args.reps
            run.table("experiment.csv", summary)


def cmd_power(run: Run):
    args = run.args
    minute_sd, day_sd = sm.calibrate_noise(args.window_sd, args.daily_sd, args.pre + args.post)
    params = sm.IntradayParams(minute_noise_sd=minute_sd, day_noise_sd=day_sd, n_events=args.n_events,
                               pre=args.pre, post=args.post, seed=args.seed)
    run.extra["rng"] = kf.RNG_ALGORITHM
    _, summary = sm.window_power_experiment(params, args.true_b, args.reps, args.threads)
    run.table("power.csv", summary)


def _monthly_daily(daily: md.DailySeries, prefix: str = "", names=None) -> pd.DataFrame:
    """Last value per month of selected daily series, long form."""
    frame = daily.frame
    if names is not None:
        frame = frame[frame["series"].isin(names)]
    else:
        frame = frame[frame["series"].str.startswith(prefix)]
    frame = frame.assign(month=md.month_index(frame["date"].to_numpy()))
    return frame.sort_values("date").groupby(["series", "month"], sort=True).last().reset_index()


def cmd_xsection(run: Run):
    args = run.args
    _need(args, "announcements", "bars", "monthly_returns")
    _, events = _load_events(args)
    events = events.dropna(subset=["normalized"]).sort_values("minute", kind="mergesort").reset_index(drop=True)
    bars = _bars(args)
    if args.symbol not in bars:
        raise MissingDataError(f"{args.bars}: no bars for symbol {args.symbol!r}")
    monthly = xs.load_monthly_returns(args.monthly_returns)
    membership = xs.load_membership(args.membership) if args.membership else None
    tickers = sorted(set(monthly["ticker"]))
    minutes = events["minute"].to_numpy()

    def window(sym):
        if sym not in bars:
            return np.full(len(minutes), np.nan)
        return es.window_returns(bars[sym], minutes, args.pre, args.post, args.max_carry)

    stock = pd.DataFrame({t: window(t) for t in tickers})
    market = window(args.symbol)
    eps = events["normalized"].to_numpy(dtype=float)
    months = md.month_index(events["date"].to_numpy())
    panel = xs.estimate_event_betas(stock, eps, market, months, window=args.beta_window, min_events=args.min_events)
    betas = panel.assign(month=[md.month_label(m) for m in panel["month"]])
    run.table("betas.csv", betas)

    assignments = xs.assign_quintiles(panel, membership)
    if assignments.empty:
        raise DataError("no formation month has 5 or more stocks with betas")
    caps = factors = None
    if args.daily:
        daily = md.load_daily(args.daily)
        cap_rows = _monthly_daily(daily, prefix="market_cap_")
        if len(cap_rows):
            caps = pd.DataFrame({"month": cap_rows["month"], "ticker": cap_rows["series"].str[len("market_cap_"):],
                                 "cap": cap_rows["value"]})
        names = sorted({c for cols in xs.FACTOR_MODELS.values() for c in cols} & set(daily.names))
        if names:
            f = _monthly_daily(daily, names=names)
            factors = f.pivot(index="month", columns="series", values="value")
    port, ls = xs.portfolio_returns(assignments, monthly, caps)
    long_short = ls.assign(quintile="LS", count=np.nan)[["month", "quintile", "ew", "vw", "count"]]
    portfolios = pd.concat([port.astype({"quintile": object}), long_short], ignore_index=True)
    portfolios = portfolios.assign(
        month=[md.month_label(m) for m in portfolios["month"]],
        count=pd.Series([None if pd.isna(c) else int(c) for c in portfolios["count"]], dtype=object),
    )
    run.table("portfolios.csv", portfolios)
    run.table("quintile_summary.csv", xs.quintile_summary(port, ls))

    if factors is not None:
        models = {k: v for k, v in xs.FACTOR_MODELS.items() if set(v) <= set(factors.columns)}
        if models:
            run.table("alphas.csv", xs.alpha_table(ls.set_index("month")["ew"], factors, models, args.se))

    q_events = xs.quintile_event_returns(stock, months, assignments)
    post = xs.post_ranking_betas(q_events, eps, market, args.se)
    prepost = xs.pre_ranking_betas(assignments).merge(post, on="quintile")
    run.table("prepost.csv", prepost)
    run.figure("pre_post", prepost, "prepost.png")


def cmd_drift(run: Run):
    args = run.args
    _need(args, "announcements", "bars")
    calendar, _ = _load_events(args)
    kinds = _kinds(args)
    if kinds:
        calendar = calendar[calendar["kind"].isin(kinds)]
    series = _series(args, args.symbol)
    table = xs.announcement_drift(series, calendar, args.pre, args.post, args.max_carry, _close_clock(args))
    run.table("drift.csv", table)


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# --------------------------------------------------------------------------
# entry point


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        ctx = Run(args)
        _check_paths(args)
        ctx.out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](ctx)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"mnaevent: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"mnaevent: error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
