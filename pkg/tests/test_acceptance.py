"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal
summary under "acceptance criteria".
"""

import filecmp
import itertools
import math
import time

import numpy as np
import pytest

from conftest import CLOCK
from mnaevent import decomposition as dc
from mnaevent import event_study as es
from mnaevent import kalman as kf
from mnaevent import regress as rg
from mnaevent import synth_market as sm
from mnaevent.cli import run
from oracles import exact_ols, mww_enumerated_pvalue


def _instance(rng):
    """Random design with an intercept and condition number spread up to 1e6."""
    n = int(rng.integers(10, 201))
    k = min(int(rng.integers(1, 9)), n - 2)
    Z = rng.standard_normal((n, k - 1))
    U, _, Vt = np.linalg.svd(Z, full_matrices=False)
    spread = np.geomspace(1.0, 10 ** -rng.uniform(0, 6), k - 1) if k > 1 else np.ones(0)
    X = np.column_stack([np.ones(n), (U * spread) @ Vt * rng.uniform(0.1, 10)])
    y = X @ rng.standard_normal(k) + rng.standard_normal(n) * rng.uniform(0.1, 3)
    return X, y


def _rel(a, b):
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def test_criterion_01_ols_oracle(criterion):
    rng = np.random.default_rng(2024)
    instances = []
    while len(instances) < 100:
        X, y = _instance(rng)
        if np.linalg.cond(X) < 1e6:
            instances.append((X, y))
    start = time.perf_counter()
    fits = [rg.fit_ols(X, y) for X, y in instances]
    elapsed = time.perf_counter() - start
    worst = 0.0
    for (X, y), res in zip(instances, fits):
        ref = exact_ols(X, y)
        worst = max(worst, _rel(res.coef, ref["coef"]), _rel(res.se, ref["se"]), _rel(res.t, ref["t"]))
        if X.shape[1] > 1:
            worst = max(worst, _rel(res.adj_r2, ref["adj_r2"]))
    max_cond = max(np.linalg.cond(X) for X, _ in instances)
    ok = worst <= 1e-8 and elapsed < 5
    criterion(1, ok, f"max rel err {worst:.2e} vs exact oracle (max cond {max_cond:.1e}), fits {elapsed:.3f}s")
    assert ok


def test_criterion_02_hand_fixture(criterion):
    res = rg.fit_ols(np.column_stack([np.ones(3), [0.0, 1.0, 2.0]]), [0.0, 2.0, 3.0], ("const", "x"))
    slope, intercept = res["x"][0], res["const"][0]
    ok = abs(slope - 1.5) <= 1e-12 and abs(intercept - 1 / 6) <= 1e-12
    criterion(2, ok, f"slope {slope!r}, intercept {intercept!r}")
    assert ok


def test_criterion_03_recovery(criterion):
    start = time.perf_counter()
    _, summary = sm.recovery_experiment(sm.DgpParams(n_events=10_000, seed=0), reps=200)
    elapsed = time.perf_counter() - start
    by = summary.set_index("parameter")
    gaps = (by["mean"] - by["truth"]).abs()
    coverage = by["coverage"]
    gamma0_quiet = by.loc["gamma0", "share_abs_t_below_2"]
    ok = (gaps < 0.01).all() and coverage.between(0.90, 0.99).all() and gamma0_quiet >= 0.90 and elapsed < 60
    criterion(3, ok, f"max |mean-truth| {gaps.max():.4f}, coverage {coverage.min():.3f}-{coverage.max():.3f}, "
                     f"gamma0 |t|<2 in {gamma0_quiet:.1%}, {elapsed:.1f}s")
    assert ok


def test_criterion_04_kalman(criterion):
    params = kf.KalmanParams(1.0, 2.0)
    ss = kf.steady_state(params)
    exact = ss["p_pred"] == 2.0 and ss["gain"] == 0.5
    conv = kf.run_filter(params, np.zeros(250), p0=50.0)
    conv_err = abs(conv["gain"].iloc[199] - 0.5)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        w, m = 10 ** rng.uniform(-3, 1, 2)
        signals = np.cumsum(rng.standard_normal(300)) + rng.standard_normal(300)
        trace = kf.run_filter(kf.KalmanParams(w, m), signals, i0=float(rng.normal()), p0=float(10 ** rng.uniform(-2, 2)))
        revision = trace["i_post"] - trace["prior"]
        worst = max(worst, float(np.max(np.abs(revision - trace["gain"] * trace["innovation"]))))
    ok = exact and conv_err <= 1e-10 and worst <= 1e-12
    criterion(4, ok, f"steady (p={ss['p_pred']!r}, K={ss['gain']!r}), |K_200-K| {conv_err:.1e}, identity err {worst:.1e}")
    assert ok


def test_criterion_05_mww(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    worst_normal = 0.0
    for n1, n2 in itertools.product(range(1, 9), repeat=2):
        for rep in range(50):
            if rep % 2:
                x, y = rng.standard_normal(n1), rng.standard_normal(n2) + rng.uniform(-1, 1)
            else:
                levels = int(rng.integers(2, 7))
                x, y = rng.integers(0, levels, n1).astype(float), rng.integers(0, levels, n2).astype(float)
            ref = mww_enumerated_pvalue(x, y)
            worst = max(worst, abs(es.mww_pvalue(x, y) - ref))
            if n1 >= 5 and n2 >= 5 and rep % 2:
                worst_normal = max(worst_normal, abs(es.mww_normal_pvalue(x, y) - ref))
    ok = worst <= 0.01
    criterion(5, ok, f"max |p - enumeration| {worst:.2e} over 64 size pairs x 50 inputs "
                     f"(normal approximation alone, n>=5 continuous: {worst_normal:.3f}, not asserted)")
    assert ok


def test_criterion_06_window_power(criterion):
    minute_sd, day_sd = sm.calibrate_noise(0.35, 1.0)
    params = sm.IntradayParams(minute_noise_sd=minute_sd, day_noise_sd=day_sd, seed=6)
    per_rep, summary = sm.window_power_experiment(params, 0.16, reps=200)
    t = summary.set_index("window")["t"]
    ratio = t["30min"] / t["daily"]
    target = 1.0 / 0.35
    wide = per_rep.pivot(index="rep", columns="window", values="b")
    diff = wide["daily"] - wide["30min"]
    diff_se = diff.std(ddof=1) / math.sqrt(len(diff))
    agree = abs(diff.mean()) < 3 * diff_se
    ok = abs(ratio / target - 1) <= 0.15 and agree
    criterion(6, ok, f"t ratio {ratio:.3f} vs noise ratio {target:.3f} ({t['30min']:.2f} vs {t['daily']:.2f}); "
                     f"mean b daily-30min {diff.mean():+.4f} (SE {diff_se:.4f})")
    assert ok


def test_criterion_07_breakeven(criterion):
    mu = dc.breakeven_mu(0.30, -0.23)
    a2 = dc.estimate_a2(-0.23, 2.93)
    ok = abs(mu - 1.3043) <= 1e-4 and abs(a2 - (-7.85)) <= 0.01
    criterion(7, ok, f"breakeven {mu:.5f}, a2 {a2:.4f}")
    assert ok


def test_criterion_08_screen(criterion):
    def flagged(ratio, seed):
        rng = sm.make_rng(seed)
        hits = 0
        for _ in range(1000):
            event, base = sm.simulate_screen_samples(rng, variance_ratio=ratio)
            hits += es.relevance_screen(event, base).relevant
        return hits / 1000

    size = flagged(1.0, 80)
    power = flagged(2.0, 81)
    ok = abs(size - 0.05) <= 0.02 and power > 0.90
    criterion(8, ok, f"null flag rate {size:.3f}, power at doubled variance {power:.3f}")
    assert ok


def test_criterion_09_cross_section(criterion):
    null = sm.cross_section_experiment(sm.CrossSectionParams(premium=0.0, seed=90), reps=500)
    quiet = float((null["ls_t"].abs() < 2).mean())
    planted = sm.cross_section_experiment(sm.CrossSectionParams(premium=0.5, seed=91), reps=500)
    mean_ls = planted["ls_mean"].mean()
    mc_se = planted["ls_mean"].std(ddof=1) / math.sqrt(len(planted))
    own = float(((planted["ls_mean"] - 0.5).abs() < 3 * planted["ls_se"]).mean())
    monotone = float(planted["post_monotone"].mean())
    ok = abs(quiet - 0.95) <= 0.03 and abs(mean_ls - 0.5) < 3 * mc_se and monotone >= 0.95
    criterion(9, ok, f"null |t|<2 in {quiet:.3f}; planted L/S mean {mean_ls:.3f} (MC SE {mc_se:.3f}, "
                     f"{own:.1%} of reps within 3 own SEs); post betas monotone in {monotone:.3f}")
    assert ok


def _commands(eco, xs, out):
    ins = ["--announcements", str(eco / "announcements.csv"), "--bars", str(eco / "bars.csv")]
    daily = ["--daily", str(eco / "daily.csv")]
    xins = ["--announcements", str(xs / "announcements.csv"), "--bars", str(xs / "bars.csv"),
            "--daily", str(xs / "daily.csv"), "--membership", str(xs / "membership.csv"),
            "--monthly-returns", str(xs / "monthly_returns.csv")]
    common = ["--seed", "7", "--fixed-clock", CLOCK, "--figures"]
    return {
        "screen": ["screen", *ins],
        "summarize": ["summarize", *ins, *daily],
        "respond": ["respond", *ins, *daily, "--split", "mu"],
        "decompose": ["decompose", *ins, *daily],
        "termstructure": ["termstructure", "--announcements", str(eco / "announcements.csv"), *daily],
        "channels": ["channels", *ins, *daily],
        "kalman": ["kalman", "--steps", "200"],
        "simulate": ["simulate", "--n-events", "60", "--reps", "3"],
        "power": ["power", "--reps", "4"],
        "xsection": ["xsection", *xins],
        "drift": ["drift", *ins],
    }, common


def test_criterion_10_determinism(criterion, economy, xsection_files, tmp_path):
    commands, common = _commands(economy, xsection_files, tmp_path)
    problems = []
    n_files = 0
    for name, argv in commands.items():
        dirs = [tmp_path / f"{name}_{i}" for i in (1, 2)]
        codes = [run([*argv, *common, "--out", str(d)]) for d in dirs]
        if codes != [0, 0]:
            problems.append(f"{name} exit {codes}")
            continue
        files = sorted(p.name for p in dirs[0].iterdir())
        if files != sorted(p.name for p in dirs[1].iterdir()) or not files:
            problems.append(f"{name} file sets differ")
            continue
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], files, shallow=False)
        problems += [f"{name}/{f}" for f in mismatch + errors]
        n_files += len(files)
    ok = not problems
    criterion(10, ok, f"{len(commands)} subcommands, {n_files} files byte-identical" if ok else "; ".join(problems))
    assert ok
