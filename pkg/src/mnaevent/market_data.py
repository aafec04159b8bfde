"""Loading, validating and aligning the input series.

All timestamps are UTC and carried internally as integer minutes since the
Unix epoch; dates are ``numpy.datetime64[D]``. Input files may start with
``#``-prefixed metadata lines (as written by this package) before the header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (
    DataError,
    DegenerateDataError,
    DuplicateIdError,
    InsufficientDataError,
    MalformedRowError,
    MissingDataError,
)

ANNOUNCEMENT_COLUMNS = ("id", "kind", "timestamp", "actual", "survey_median", "sign")
BAR_COLUMNS = ("timestamp", "symbol", "price")
DAILY_COLUMNS = ("date", "series", "value")

NS_PER_MINUTE = 60 * 10**9
MINUTES_PER_DAY = 1440


# --------------------------------------------------------------------------
# time helpers


def to_minute(ts) -> int:
    """Convert a timestamp-like value to integer UTC minutes since the epoch."""
    if isinstance(ts, (int, np.integer)):
        return int(ts)
    stamp = pd.Timestamp(ts)
    if stamp.tzinfo is None:
        stamp = stamp.tz_localize("UTC")
    ns = stamp.value
    if ns % NS_PER_MINUTE:
        raise DataError(f"timestamp {ts!r} is not on a whole minute")
    return ns // NS_PER_MINUTE


def minute_to_iso(minute: int) -> str:
    return pd.Timestamp(int(minute) * NS_PER_MINUTE, tz="UTC").strftime("%Y-%m-%dT%H:%M:%SZ")


def minute_to_date(minutes) -> np.ndarray:
    """UTC calendar date(s) of minute stamps."""
    return (np.asarray(minutes, dtype=np.int64) // MINUTES_PER_DAY).astype("datetime64[D]")


def parse_clock(clock) -> int:
    """``"13:30"`` -> minutes after UTC midnight."""
    if isinstance(clock, (int, np.integer)):
        return int(clock)
    hh, mm = str(clock).split(":")
    value = int(hh) * 60 + int(mm)
    if not 0 <= value < MINUTES_PER_DAY:
        raise DataError(f"invalid clock time {clock!r}")
    return value


def month_index(dates) -> np.ndarray:
    """Months since 1970-01 for dates or minute stamps given as datetime64."""
    months = np.asarray(dates).astype("datetime64[M]").astype(np.int64)
    return months


def month_label(index: int) -> str:
    return str(np.datetime64(int(index), "M"))


def parse_month(label: str) -> int:
    return int(np.datetime64(str(label)[:7], "M").astype(np.int64))


# --------------------------------------------------------------------------
# CSV reading


def _read_rows(path, expected: tuple[str, ...], optional: tuple[str, ...] = ()):
    """Read a headered CSV, skipping leading ``#`` lines.

    Returns the header and a list of ``(line_number, row)`` pairs.
    """
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with handle:
        lines = handle.read().splitlines(keepends=True)
    start = 0
    while start < len(lines) and lines[start].startswith("#"):
        start += 1
    if start >= len(lines):
        raise MalformedRowError(path, start + 1, "missing header row")
    reader = csv.reader(lines[start:])
    header = [h.strip() for h in next(reader)]
    required = [c for c in expected if c not in optional]
    if header[: len(required)] != required or any(h not in expected for h in header):
        raise MalformedRowError(
            path, start + 1, f"header {','.join(header)!r} does not match {','.join(expected)!r}"
        )
    rows = []
    for offset, row in enumerate(reader):
        lineno = start + 2 + offset
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedRowError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        rows.append((lineno, [field.strip() for field in row]))
    return header, rows


def _to_float(text) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def _parse_floats(path, linenos, values, column, finite=True):
    # float() is correctly rounded; pandas' fast parser can be off by an ulp
    out = np.fromiter((_to_float(v) for v in values), dtype=float, count=len(values))
    bad = np.isnan(out) if not finite else ~np.isfinite(out)
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedRowError(path, linenos[i], f"non-finite or unparsable {column} {values[i]!r}")
    return out


def _parse_minutes(path, linenos, values):
    stamps = pd.to_datetime(pd.Series(values, dtype=object), format="ISO8601", utc=True, errors="coerce")
    bad = stamps.isna().to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedRowError(path, linenos[i], f"malformed timestamp {values[i]!r}")
    ns = stamps.astype("int64").to_numpy() if len(values) else np.zeros(0, dtype=np.int64)
    off_minute = ns % NS_PER_MINUTE != 0
    if off_minute.any():
        i = int(np.argmax(off_minute))
        raise MalformedRowError(path, linenos[i], f"timestamp {values[i]!r} is not on a whole minute")
    return ns // NS_PER_MINUTE


def _parse_dates(path, linenos, values):
    out = pd.to_datetime(pd.Series(values, dtype=object), format="%Y-%m-%d", errors="coerce")
    bad = out.isna().to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedRowError(path, linenos[i], f"malformed date {values[i]!r}")
    return out.to_numpy().astype("datetime64[D]")


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# announcements and surprises


def load_announcements(path) -> pd.DataFrame:
    """Load ``announcements.csv`` and compute raw surprises.

    The ``sign`` column is optional (default +1). The result is sorted by
    ``(kind, timestamp)`` and carries the columns ``id, kind, minute,
    timestamp, date, actual, survey_median, sign, raw``, where ``raw`` is
    ``sign * (actual - survey_median)``.
    """
    header, rows = _read_rows(path, ANNOUNCEMENT_COLUMNS, optional=("sign",))
    linenos = [ln for ln, _ in rows]
    cols = {name: [row[i] for _, row in rows] for i, name in enumerate(header)}

    ids = []
    for ln, value in zip(linenos, cols["id"]):
        try:
            ids.append(int(value))
        except ValueError:
            raise MalformedRowError(path, ln, f"id {value!r} is not an integer") from None
    seen: dict[int, int] = {}
    for ln, ident in zip(linenos, ids):
        if ident in seen:
            raise DuplicateIdError(f"{path}:{ln}: duplicate announcement id {ident} (first on line {seen[ident]})")
        seen[ident] = ln
    for ln, kind in zip(linenos, cols["kind"]):
        if not kind:
            raise MalformedRowError(path, ln, "empty kind")

    minutes = _parse_minutes(path, linenos, cols["timestamp"])
    actual = _parse_floats(path, linenos, cols["actual"], "actual")
    median = _parse_floats(path, linenos, cols["survey_median"], "survey_median")
    if "sign" in cols:
        sign = _parse_floats(path, linenos, cols["sign"], "sign")
        bad = ~np.isin(sign, (-1.0, 1.0))
        if bad.any():
            i = int(np.argmax(bad))
            raise MalformedRowError(path, linenos[i], "sign must be +1 or -1")
    else:
        sign = np.ones(len(rows))

    frame = pd.DataFrame(
        {
            "id": np.asarray(ids, dtype=np.int64),
            "kind": pd.Series(cols["kind"], dtype=object),
            "minute": np.asarray(minutes, dtype=np.int64),
            "actual": actual,
            "survey_median": median,
            "sign": sign,
            "line": np.asarray(linenos, dtype=np.int64),
        }
    )
    frame["raw"] = frame["sign"] * (frame["actual"] - frame["survey_median"])
    frame = frame.sort_values(["kind", "minute"], kind="mergesort").reset_index(drop=True)
    dup = frame.duplicated(["kind", "minute"])
    if dup.any():
        row = frame[dup].iloc[0]
        raise MalformedRowError(path, int(row["line"]), f"repeated timestamp within kind {row['kind']!r}")
    frame["timestamp"] = pd.to_datetime(frame["minute"] * NS_PER_MINUTE, utc=True)
    frame["date"] = minute_to_date(frame["minute"].to_numpy())
    return frame.drop(columns="line")[
        ["id", "kind", "minute", "timestamp", "date", "actual", "survey_median", "sign", "raw"]
    ]


def write_announcements(path, frame: pd.DataFrame, header_lines: Iterable[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ANNOUNCEMENT_COLUMNS)
        for row in frame.itertuples(index=False):
            sign = getattr(row, "sign", 1.0)
            writer.writerow(
                [int(row.id), row.kind, minute_to_iso(row.minute), _fmt(row.actual),
                 _fmt(row.survey_median), int(sign)]
            )


def compute_surprises(frame: pd.DataFrame, mode: str = "full_sample", window: int | None = None) -> pd.DataFrame:
    """Normalize raw surprises per kind by a sample standard deviation (ddof=1).

    ``mode`` is ``"full_sample"``, ``"expanding"`` or ``"rolling"`` (with
    ``window``). Windowed modes include the current observation, so the
    first observation (expanding) or the first ``window - 1`` (rolling)
    have no defined scale and are NaN; so is any window with zero spread.
    Returns a copy of ``frame`` with a ``normalized`` column added.
    """
    if mode not in ("full_sample", "expanding", "rolling"):
        raise DataError(f"unknown normalization mode {mode!r}")
    if mode == "rolling" and (window is None or window < 2):
        raise DataError("rolling normalization needs window >= 2")
    out = frame.copy()
    out = out.sort_values(["kind", "minute"], kind="mergesort") if "minute" in out else out
    normalized = pd.Series(np.nan, index=out.index)
    for kind, group in out.groupby("kind", sort=True):
        raw = group["raw"].astype(float)
        need = window if mode == "rolling" else 2
        if len(raw) < need:
            raise InsufficientDataError(f"kind {kind!r}: {len(raw)} surprises, need at least {need}")
        full_sd = raw.std(ddof=1)
        if not full_sd > 0:
            raise DegenerateDataError(f"kind {kind!r}: all raw surprises are equal (zero standard deviation)")
        if mode == "full_sample":
            sd = pd.Series(full_sd, index=raw.index)
        elif mode == "expanding":
            sd = raw.expanding(min_periods=2).std(ddof=1)
        else:
            sd = raw.rolling(window, min_periods=window).std(ddof=1)
        sd = sd.where(sd > 0)
        normalized.loc[group.index] = raw / sd
    out["normalized"] = normalized
    return out


# --------------------------------------------------------------------------
# bars


@dataclass(frozen=True)
class PriceSeries:
    """Minute-stamped prices for one instrument, strictly increasing in time."""

    symbol: str
    minutes: np.ndarray
    prices: np.ndarray

    def __len__(self) -> int:
        return len(self.minutes)

    def prices_at(self, minutes, max_carry: int = 5) -> np.ndarray:
        """Last price at or before each minute, NaN beyond the carry-forward cap."""
        query = np.asarray(minutes, dtype=np.int64)
        idx = np.searchsorted(self.minutes, query, side="right") - 1
        out = np.full(query.shape, np.nan)
        ok = idx >= 0
        if ok.any():
            stale = query[ok] - self.minutes[idx[ok]]
            vals = self.prices[idx[ok]]
            vals = np.where(stale <= max_carry, vals, np.nan)
            out[ok] = vals
        return out

    def price_at(self, minute, max_carry: int = 5) -> float:
        value = float(self.prices_at([to_minute(minute)], max_carry)[0])
        if math.isnan(value):
            raise MissingDataError(
                f"{self.symbol}: no price within {max_carry} min at or before {minute_to_iso(to_minute(minute))}"
            )
        return value

    def last_on_date(self, date, at_or_before_clock: int) -> float:
        """Last price on ``date`` at or before the given clock minute, NaN if none."""
        day = np.datetime64(date, "D").astype(np.int64)
        lo = day * MINUTES_PER_DAY
        hi = lo + at_or_before_clock
        idx = np.searchsorted(self.minutes, hi, side="right") - 1
        if idx < 0 or self.minutes[idx] < lo:
            return float("nan")
        return float(self.prices[idx])

    def trading_dates(self) -> np.ndarray:
        return np.unique(minute_to_date(self.minutes))


class BarSeries(Mapping):
    """Immutable collection of :class:`PriceSeries` keyed by symbol."""

    def __init__(self, series: Mapping[str, PriceSeries]):
        self._series = dict(sorted(series.items()))

    def __getitem__(self, symbol: str) -> PriceSeries:
        try:
            return self._series[symbol]
        except KeyError:
            raise MissingDataError(f"no bars for symbol {symbol!r}") from None

    def __iter__(self):
        return iter(self._series)

    def __len__(self) -> int:
        return len(self._series)

    @property
    def n_bars(self) -> int:
        return sum(len(s) for s in self._series.values())

    @classmethod
    def from_arrays(cls, minutes, symbols, prices) -> "BarSeries":
        minutes = np.asarray(minutes, dtype=np.int64)
        prices = np.asarray(prices, dtype=float)
        symbols = np.asarray(symbols, dtype=object)
        if len(prices) and not (np.isfinite(prices).all() and (prices > 0).all()):
            raise DataError("bar prices must be finite and positive")
        return cls._build(minutes, symbols, prices, None, None)

    @classmethod
    def _build(cls, minutes, symbols, prices, path, linenos):
        out = {}
        for sym in sorted(set(symbols.tolist())):
            mask = symbols == sym
            m, p = minutes[mask], prices[mask]
            lines = linenos[mask] if linenos is not None else None
            order = np.argsort(m, kind="mergesort")
            m, p = m[order], p[order]
            same = np.diff(m) == 0
            if same.any():
                conflict = same & (np.diff(p) != 0)
                if conflict.any():
                    i = int(np.argmax(conflict)) + 1
                    where = f"{path}:{lines[order][i]}: " if lines is not None else ""
                    raise DataError(f"{where}conflicting prices for {sym} at {minute_to_iso(m[i])}")
                keep = np.concatenate([[True], ~same])
                m, p = m[keep], p[keep]
            m.setflags(write=False)
            p.setflags(write=False)
            out[sym] = PriceSeries(sym, m, p)
        return cls(out)

    def to_frame(self) -> pd.DataFrame:
        parts = [
            pd.DataFrame({"minute": s.minutes, "symbol": sym, "price": s.prices})
            for sym, s in self._series.items()
        ]
        if not parts:
            return pd.DataFrame({"minute": np.zeros(0, np.int64), "symbol": [], "price": []})
        return pd.concat(parts, ignore_index=True)


def load_bars(path) -> BarSeries:
    """Load ``bars.csv``. Exact duplicate rows are dropped; conflicting ones rejected."""
    _, rows = _read_rows(path, BAR_COLUMNS)
    linenos = np.asarray([ln for ln, _ in rows], dtype=np.int64)
    minutes = _parse_minutes(path, linenos, [r[0] for _, r in rows])
    symbols = np.asarray([r[1] for _, r in rows], dtype=object)
    for ln, sym in zip(linenos, symbols):
        if not sym:
            raise MalformedRowError(path, int(ln), "empty symbol")
    prices = _parse_floats(path, linenos, [r[2] for _, r in rows], "price")
    nonpos = prices <= 0
    if nonpos.any():
        i = int(np.argmax(nonpos))
        raise MalformedRowError(path, int(linenos[i]), f"price must be positive, got {rows[i][1][2]}")
    return BarSeries._build(np.asarray(minutes, dtype=np.int64), symbols, prices, path, linenos)


def write_bars(path, bars: BarSeries, header_lines: Iterable[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BAR_COLUMNS)
        for sym in bars:
            s = bars[sym]
            for m, p in zip(s.minutes.tolist(), s.prices.tolist()):
                writer.writerow([minute_to_iso(m), sym, _fmt(p)])


# --------------------------------------------------------------------------
# daily covariates


class DailySeries:
    """Dated covariates in long form, one value per (date, series)."""

    def __init__(self, frame: pd.DataFrame):
        frame = frame[["date", "series", "value"]].copy()
        frame["date"] = np.asarray(frame["date"]).astype("datetime64[D]")
        frame = frame.sort_values(["series", "date"], kind="mergesort").reset_index(drop=True)
        if frame.duplicated(["series", "date"]).any():
            raise DataError("daily series has more than one value per (date, series)")
        rec = frame.loc[frame["series"] == "USREC", "value"]
        if not rec.isin([0.0, 1.0]).all():
            raise DataError("USREC values must be 0 or 1")
        self._frame = frame
        self._cache: dict[str, pd.Series] = {}

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame.copy()

    @property
    def names(self) -> list[str]:
        return sorted(self._frame["series"].unique().tolist())

    def __contains__(self, name) -> bool:
        return name in set(self._frame["series"])

    def get(self, name: str) -> pd.Series:
        if name not in self._cache:
            sub = self._frame[self._frame["series"] == name]
            if sub.empty:
                raise MissingDataError(f"daily series {name!r} not present")
            s = pd.Series(sub["value"].to_numpy(), index=pd.DatetimeIndex(sub["date"].to_numpy()), name=name)
            self._cache[name] = s
        return self._cache[name].copy()

    def lagged(self, name: str, dates) -> np.ndarray:
        """Most recent value strictly before each date; NaN where none exists."""
        s = self.get(name)
        known = s.index.to_numpy().astype("datetime64[D]")
        query = np.asarray(dates).astype("datetime64[D]")
        idx = np.searchsorted(known, query, side="left") - 1
        out = np.full(query.shape, np.nan)
        ok = idx >= 0
        out[ok] = s.to_numpy()[idx[ok]]
        return out

    def changes(self, name: str, dates, scale: float = 1.0) -> np.ndarray:
        """Change from the previous observation to the one dated exactly ``date``."""
        s = self.get(name)
        known = s.index.to_numpy().astype("datetime64[D]")
        vals = s.to_numpy()
        query = np.asarray(dates).astype("datetime64[D]")
        idx = np.searchsorted(known, query, side="left")
        out = np.full(query.shape, np.nan)
        ok = (idx > 0) & (idx < len(known))
        ok[ok] = known[idx[ok]] == query[ok]
        out[ok] = (vals[idx[ok]] - vals[idx[ok] - 1]) * scale
        return out


def load_daily(path) -> DailySeries:
    _, rows = _read_rows(path, DAILY_COLUMNS)
    linenos = [ln for ln, _ in rows]
    dates = _parse_dates(path, linenos, [r[0] for _, r in rows])
    names = [r[1] for _, r in rows]
    for ln, name in zip(linenos, names):
        if not name:
            raise MalformedRowError(path, ln, "empty series name")
    values = _parse_floats(path, linenos, [r[2] for _, r in rows], "value")
    frame = pd.DataFrame({"date": dates, "series": pd.Series(names, dtype=object), "value": values})
    dup = frame.duplicated(["series", "date"])
    if dup.any():
        i = int(np.argmax(dup.to_numpy()))
        raise MalformedRowError(path, linenos[i], f"second value for {names[i]!r} on {rows[i][1][0]}")
    rec = (frame["series"] == "USREC") & ~frame["value"].isin([0.0, 1.0])
    if rec.any():
        i = int(np.argmax(rec.to_numpy()))
        raise MalformedRowError(path, linenos[i], "USREC must be 0 or 1")
    return DailySeries(frame)


def write_daily(path, daily: DailySeries, header_lines: Iterable[str] = ()) -> None:
    frame = daily.frame.sort_values(["date", "series"], kind="mergesort")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DAILY_COLUMNS)
        for row in frame.itertuples(index=False):
            writer.writerow([str(np.datetime64(row.date, "D")), row.series, _fmt(row.value)])
