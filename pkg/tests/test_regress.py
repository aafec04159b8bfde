import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnaevent import regress as rg
from mnaevent.errors import DataError, InsufficientDataError, RankDeficiencyError
from oracles import normal_equations_ols


def line(x, y):
    x = np.asarray(x, dtype=float)
    return rg.fit_ols(np.column_stack([np.ones(len(x)), x]), y, ("const", "x"))


def test_exact_line():
    res = line([0, 1, 2], [0, 1, 2])
    assert res["const"][0] == pytest.approx(0.0, abs=1e-14)
    assert res["x"][0] == pytest.approx(1.0, abs=1e-14)
    assert res.r2 == pytest.approx(1.0, abs=1e-14)


def test_hand_solved_normal_equations():
    res = line([0, 1, 2], [0, 2, 3])
    assert abs(res["x"][0] - 1.5) < 1e-12
    assert abs(res["const"][0] - 1 / 6) < 1e-12


def test_duplicated_column_names_offender():
    x = np.arange(6.0)
    X = np.column_stack([np.ones(6), x, x])
    with pytest.raises(RankDeficiencyError) as info:
        rg.fit_ols(X, x**2, ("const", "a", "b"))
    assert info.value.column == "b"


def test_too_few_observations():
    with pytest.raises(InsufficientDataError):
        rg.fit_ols(np.column_stack([np.ones(2), [0.0, 1.0]]), [1.0, 2.0])


def test_response_regression_recovers_b():
    rng = np.random.default_rng(21)
    eps = rng.standard_normal(10_000)
    r = 0.25 * eps + rng.standard_normal(10_000) * 0.5
    res = rg.response_regression(eps, r)
    b, se, _ = res["Surprise"]
    assert abs(b - 0.25) < 3 * se
    # signal variance 0.0625 against noise 0.25 gives R^2 = 0.2
    assert res.r2 == pytest.approx(0.20, abs=0.02)


def test_response_regression_noiseless():
    eps = np.random.default_rng(1).standard_normal(50)
    res = rg.response_regression(eps, 0.1 * eps)
    assert res["Surprise"][0] == pytest.approx(0.1, abs=1e-12)
    assert res.r2 == pytest.approx(1.0, abs=1e-12)


def test_constant_surprise_rank_error():
    with pytest.raises(RankDeficiencyError):
        rg.response_regression(np.full(10, 0.7), np.arange(10.0))


def test_interaction_regression_recovers_channels():
    rng = np.random.default_rng(22)
    n = 10_000
    eps = rng.standard_normal(n)
    mu = rng.uniform(0.4, 1.6, n)
    r = 0.3 * eps - 0.23 * mu * eps + rng.standard_normal(n) * 0.5
    res = rg.interaction_regression(rg.DesignSpec(), pd.DataFrame({"Surprise": eps, "MU": mu, "R": r}))
    b, sb, _ = res["Surprise"]
    d, sd, _ = res["Surprise*MU"]
    assert abs(b - 0.3) < 3 * sb and abs(d + 0.23) < 3 * sd
    assert res.marginal_effect("Surprise", "Surprise*MU", 1.1) == b + d * 1.1


def test_missing_covariate_dropped_and_counted():
    data = pd.DataFrame({"Surprise": [1.0, -1, 2, 0.5, -0.3], "MU": [1.0, np.nan, 0.8, 1.2, 0.9],
                         "R": [0.1, 0.2, 0.3, 0.0, -0.1]})
    res = rg.interaction_regression(rg.DesignSpec(terms=("Surprise", "MU")), data)
    assert res.n == 4 and res.dropped == 1


def test_unknown_column():
    with pytest.raises(DataError):
        rg.interaction_regression(rg.DesignSpec(terms=("Surprise", "MEU")), pd.DataFrame({"Surprise": [1.0], "R": [1.0]}))


def test_median_split_sizes_with_ties_low():
    data = pd.DataFrame({"Surprise": [1.0, -1, 2, 0.5, -0.3, 0.2, 1.5], "R": np.arange(7.0) * 0.1 + [0, 1, 0, 1, 0, 1, 0],
                         "MU": [0.5, 0.7, 0.9, 1.0, 1.2, 1.3, 1.4]})
    halves = rg.split_regression(data, "mu")
    assert halves["low"].n == 4 and halves["high"].n == 3
    tied = data.assign(MU=[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
    halves = rg.split_regression(tied, "mu")
    assert halves["low"].n == 4


def test_recession_split_uses_flag():
    rng = np.random.default_rng(2)
    data = pd.DataFrame({"Surprise": rng.standard_normal(20), "R": rng.standard_normal(20),
                         "USREC": [0] * 14 + [1] * 6})
    halves = rg.split_regression(data, "recession")
    assert halves["low"].n == 14 and halves["high"].n == 6


def test_split_half_too_small():
    data = pd.DataFrame({"Surprise": [1.0, 2, 3, 4], "R": [1.0, 2, 3, 5], "USREC": [0, 0, 0, 1]})
    with pytest.raises(InsufficientDataError):
        rg.split_regression(data, "recession")


def test_split_size_under_identical_slopes():
    rng = np.random.default_rng(23)
    ok = 0
    reps = 500
    for _ in range(reps):
        n = 400
        eps = rng.standard_normal(n)
        mu = rng.uniform(0.3, 1.7, n)
        r = 0.2 * eps + rng.standard_normal(n) * 0.5
        halves = rg.split_regression(pd.DataFrame({"Surprise": eps, "R": r, "MU": mu}), "mu")
        (b1, s1, _), (b2, s2, _) = halves["low"]["Surprise"], halves["high"]["Surprise"]
        ok += abs(b1 - b2) < 3 * np.hypot(s1, s2)
    assert ok / reps >= 0.95


def test_term_structure_unit_response():
    eps = np.random.default_rng(3).standard_normal(30)
    changes = pd.DataFrame({m: eps for m in (1, 2, 5, 10, 30)})
    _, curve = rg.term_structure_curve(changes, eps)
    np.testing.assert_allclose(curve["b"], 1.0, atol=1e-12)
    assert list(curve["maturity_years"]) == [1, 2, 5, 10, 30]


def test_term_structure_planted_hump():
    rng = np.random.default_rng(24)
    eps = rng.standard_normal(2000)
    hump = {1: 2.2, 2: 2.8, 3: 2.91, 5: 2.6, 10: 2.1, 30: 1.26}
    changes = pd.DataFrame({m: b * eps + rng.standard_normal(2000) * 5 for m, b in hump.items()})
    _, curve = rg.term_structure_curve(changes, eps)
    for row in curve.itertuples():
        assert abs(row.b - hump[row.maturity_years]) < 3 * row.se


@st.composite
def design(draw):
    n = draw(st.integers(12, 120))
    k = draw(st.integers(1, 8))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))]) if k > 1 else np.ones((n, 1))
    y = X @ rng.standard_normal(k) + rng.standard_normal(n)
    return X, y


@settings(max_examples=80, deadline=None)
@given(design())
def test_matches_normal_equation_oracle(data):
    X, y = data
    res = rg.fit_ols(X, y)
    ref = normal_equations_ols(X, y)
    np.testing.assert_allclose(res.coef, ref["coef"], rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(res.se, ref["se"], rtol=1e-8)
    np.testing.assert_allclose(res.t, ref["t"], rtol=1e-8, atol=1e-12)
    if X.shape[1] > 1:
        assert res.adj_r2 == pytest.approx(ref["adj_r2"], rel=1e-8, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(design(), st.floats(1e-3, 1e3), st.booleans())
def test_invariances(data, k, negate):
    X, y = data
    k = -k if negate else k
    res = rg.fit_ols(X, y)
    np.testing.assert_allclose(res.fitted + res.resid, y, rtol=0, atol=1e-12 * max(1.0, np.abs(y).max()))
    scale = np.abs(X).sum(axis=0) * np.abs(res.resid).sum()
    assert (np.abs(X.T @ res.resid) <= 1e-8 * np.maximum(scale, 1e-300)).all()
    scaled = rg.fit_ols(X, k * y)
    np.testing.assert_allclose(scaled.coef, k * res.coef, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(scaled.se, abs(k) * res.se, rtol=1e-10)
    np.testing.assert_allclose(scaled.t, np.sign(k) * res.t, rtol=1e-10, atol=1e-10)
    assert scaled.r2 == pytest.approx(res.r2, abs=1e-10)
    assert res.adj_r2 <= res.r2 + 1e-12 and -1e-12 <= res.r2 <= 1 + 1e-12


def test_intercept_only_is_mean():
    y = np.array([1.0, 4.0, 2.5, 7.0])
    res = rg.fit_ols(np.ones((4, 1)), y, ("const",))
    assert res.coef[0] == pytest.approx(y.mean(), rel=1e-14)


def test_hc1_matches_sandwich():
    rng = np.random.default_rng(9)
    n = 200
    x = rng.standard_normal(n)
    X = np.column_stack([np.ones(n), x])
    y = 1 + 2 * x + rng.standard_normal(n) * (0.5 + np.abs(x))
    res = rg.fit_ols(X, y, se="hc1")
    bread = np.linalg.inv(X.T @ X)
    e = res.resid
    cov = bread @ (X.T * e**2) @ X @ bread * n / (n - 2)
    np.testing.assert_allclose(res.se, np.sqrt(np.diag(cov)), rtol=1e-10)
    assert res.se_type == "hc1"
