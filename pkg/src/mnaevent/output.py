"""Delimited output with ``#`` metadata headers."""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from . import __version__


def config_hash(config: Mapping[str, object]) -> str:
    text = "\n".join(f"{k}={config[k]}" for k in sorted(config))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def metadata_lines(command: str, config: Mapping[str, object], seed, generated: str, extra: Mapping[str, object] = ()) -> list[str]:
    lines = [
        f"# mnaevent {__version__}",
        f"# command: {command}",
        f"# seed: {seed}",
        f"# config_hash: {config_hash(config)}",
        f"# generated: {generated}",
    ]
    for key, value in dict(extra).items():
        lines.append(f"# {key}: {value}")
    return lines


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else repr(v)
    if isinstance(value, (np.datetime64, pd.Timestamp)):
        return str(np.datetime64(value, "D")) if pd.Timestamp(value) == pd.Timestamp(value).normalize() else pd.Timestamp(value).isoformat()
    return str(value)


def write_table(path, frame: pd.DataFrame, header_lines: Iterable[str] = (), footer: Iterable[tuple] = ()) -> Path:
    """Write ``frame`` as CSV after the metadata lines.

    Floats are written with ``repr`` so they reload bit-exactly; NaN is an
    empty field. ``footer`` rows are appended verbatim.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([str(c) for c in frame.columns])
        for row in frame.itertuples(index=False, name=None):
            writer.writerow([format_value(v) for v in row])
        for row in footer:
            writer.writerow([format_value(v) for v in row])
    return path


def regression_frame(result) -> tuple[pd.DataFrame, list[tuple]]:
    """``term,coef,se,t`` rows plus the ``n, r2, adj_r2`` footer."""
    table = pd.DataFrame({"term": list(result.terms), "coef": result.coef, "se": result.se, "t": result.t})
    footer = [("n", int(result.n), "", ""), ("r2", result.r2, "", ""), ("adj_r2", result.adj_r2, "", "")]
    return table, footer


def read_table(path) -> pd.DataFrame:
    """Load a file written by :func:`write_table`, skipping metadata."""
    return pd.read_csv(path, comment=None, skiprows=_count_meta(path))


def _count_meta(path) -> int:
    n = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            n += 1
    return n
