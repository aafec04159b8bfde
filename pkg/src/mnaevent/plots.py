"""Figures rendered next to the CSV outputs when ``--figures`` is given.

Each function takes the same frame that was written to CSV, so a figure
never shows data that is not on disk.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

# no software/version stamp, so reruns give identical bytes
_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return path


def quartile_paths(paths: pd.DataFrame, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for q, group in paths.groupby("quartile"):
        ax.plot(group["minute"], group["mean_return"], label=f"Q{q}")
    ax.axvline(0, color="grey", lw=0.8, ls="--")
    ax.axhline(0, color="grey", lw=0.5)
    ax.set_xlabel("minutes from release")
    ax.set_ylabel("mean return (%)")
    ax.legend(title="surprise quartile")
    return _save(fig, path)


def term_structure(curve: pd.DataFrame, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = curve["maturity_years"].to_numpy(dtype=float)
    b = curve["b"].to_numpy(dtype=float)
    se = curve["se"].to_numpy(dtype=float)
    ax.plot(x, b, marker="o")
    ax.fill_between(x, b - 1.96 * se, b + 1.96 * se, alpha=0.2)
    ax.set_xlabel("maturity (years)")
    ax.set_ylabel("bps per 1-SD surprise")
    return _save(fig, path)


def channels(frame: pd.DataFrame, path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    dates = pd.to_datetime(frame["date"])
    ax.plot(dates, frame["cash_flow"], label="cash flow")
    ax.plot(dates, frame["risk_free"], label="risk-free rate")
    ax.plot(dates, frame["total"], label="total", color="black")
    neg = (frame["regime"] == "negative").to_numpy()
    ax.fill_between(dates, 0, 1, where=neg, transform=ax.get_xaxis_transform(), color="grey", alpha=0.2, lw=0)
    ax.axhline(0, color="grey", lw=0.5)
    ax.set_ylabel("% per 1-SD surprise")
    ax.legend()
    return _save(fig, path)


def pre_post(prepost: pd.DataFrame, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(prepost["pre_beta"], prepost["post_beta"])
    for row in prepost.itertuples(index=False):
        ax.annotate(f"Q{row.quintile}", (row.pre_beta, row.post_beta), textcoords="offset points", xytext=(4, 4))
    lo = min(prepost["pre_beta"].min(), prepost["post_beta"].min())
    hi = max(prepost["pre_beta"].max(), prepost["post_beta"].max())
    ax.plot([lo, hi], [lo, hi], color="grey", lw=0.8, ls="--")
    ax.set_xlabel("pre-ranking beta")
    ax.set_ylabel("post-ranking beta")
    return _save(fig, path)


def kalman_trace(trace: pd.DataFrame, path) -> Path:
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    if "true_state" in trace:
        top.plot(trace["step"], trace["true_state"], label="state", color="black")
    top.plot(trace["step"], trace["signal"], label="signal", lw=0.6, alpha=0.6)
    top.plot(trace["step"], trace["i_post"], label="filtered")
    top.legend()
    bottom.plot(trace["step"], trace["gain"])
    bottom.set_ylabel("gain")
    bottom.set_xlabel("step")
    return _save(fig, path)
