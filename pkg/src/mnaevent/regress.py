"""OLS engine and the announcement-response regression specifications."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.linalg import solve_triangular

from .errors import DataError, InsufficientDataError, RankDeficiencyError

# |R_jj| / ||X_j|| below this marks column j as dependent on earlier columns
RANK_TOL = 1e-10
# refinement needs residuals in a wider type; plain double gains nothing
_EXTENDED = np.finfo(np.longdouble).eps < np.finfo(np.float64).eps
REFINE_STEPS = 2


@dataclass(frozen=True)
class RegressionResult:
    terms: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    r2: float
    adj_r2: float
    n: int
    se_type: str = "classical"
    fitted: np.ndarray = field(default=None, repr=False)
    resid: np.ndarray = field(default=None, repr=False)
    cov: np.ndarray = field(default=None, repr=False)
    dropped: int = 0

    @property
    def k(self) -> int:
        return len(self.terms)

    def index(self, term: str) -> int:
        try:
            return self.terms.index(term)
        except ValueError:
            raise KeyError(f"term {term!r} not in regression ({', '.join(self.terms)})") from None

    def __getitem__(self, term: str) -> tuple[float, float, float]:
        i = self.index(term)
        return float(self.coef[i]), float(self.se[i]), float(self.t[i])

    def params(self) -> dict[str, float]:
        return {name: float(c) for name, c in zip(self.terms, self.coef)}

    def marginal_effect(self, term: str, interaction: str, at: float) -> float:
        """d(prediction)/d(term) when the interaction moderator equals ``at``."""
        return float(self.coef[self.index(term)] + self.coef[self.index(interaction)] * at)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame({"term": self.terms, "coef": self.coef, "se": self.se, "t": self.t})


def _has_intercept(X: np.ndarray) -> bool:
    return bool(np.any(np.all(X == X[:1, :], axis=0) & (X[0] != 0)))


def fit_ols(X, y, terms: Sequence[str] | None = None, se: str = "classical") -> RegressionResult:
    """Least squares through a QR factorization of the design.

    ``X`` should already carry its intercept column. ``se`` is ``"classical"``
    (homoskedastic) or ``"hc1"`` (White with n/(n-k) scaling).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    terms = tuple(terms) if terms is not None else tuple(f"x{j}" for j in range(k))
    if len(terms) != k:
        raise DataError(f"{len(terms)} term names for {k} columns")
    if y.shape != (n,):
        raise DataError(f"y has shape {y.shape}, expected ({n},)")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DataError("non-finite values in regression data")
    if n <= k:
        raise InsufficientDataError(f"need more observations than terms (n={n}, k={k})")
    if se not in ("classical", "hc1"):
        raise DataError(f"unknown standard-error type {se!r}")

    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    norms = np.linalg.norm(X, axis=0)
    for j in range(k):
        # part of column j orthogonal to the earlier columns is negligible
        if diag[j] <= RANK_TOL * norms[j]:
            raise RankDeficiencyError(terms[j])

    coef = _solve_upper(R, Q.T @ y)
    if _EXTENDED:
        coef = _refine(X, y, Q, R, coef)
    fitted = X @ coef
    resid = y - fitted
    rss = float(resid @ resid)
    Rinv = _solve_upper(R, np.eye(k))
    if se == "classical":
        sigma2 = rss / (n - k)
        cov = sigma2 * (Rinv @ Rinv.T)
    else:
        QtE = Q * resid[:, None]
        meat = QtE.T @ QtE
        cov = (n / (n - k)) * (Rinv @ meat @ Rinv.T)
    se_vec = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = coef / se_vec

    if _has_intercept(X):
        tss = float(((y - y.mean()) ** 2).sum())
        df_tot = n - 1
    else:
        tss = float(y @ y)
        df_tot = n
    if tss > 0:
        r2 = 1.0 - rss / tss
        adj = 1.0 - (1.0 - r2) * df_tot / (n - k)
    else:
        r2 = adj = float("nan")
    return RegressionResult(terms, coef, se_vec, tstat, r2, adj, n, se, fitted, resid, cov)


def _solve_upper(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    return solve_triangular(R, b, lower=False)


def _refine(X, y, Q, R, coef):
    """Iterative refinement on the augmented system ``[I X; X' 0][r; b] = [y; 0]``.

    Residuals of both block equations are formed in extended precision and
    the corrections solved with the existing QR factors. This removes the
    cond(X)**2 term that a large LS residual otherwise feeds into the
    coefficients.
    """
    XL = X.astype(np.longdouble)
    yL = y.astype(np.longdouble)
    bL = coef.astype(np.longdouble)
    rL = yL - XL @ bL
    for _ in range(REFINE_STEPS):
        f = (yL - rL - XL @ bL).astype(np.float64)
        g = (-(XL.T @ rL)).astype(np.float64)
        h = solve_triangular(R, g, trans="T", lower=False)
        d = Q.T @ f
        bL += _solve_upper(R, d - h)
        rL += Q @ (h - d) + f
    return bL.astype(np.float64)


# --------------------------------------------------------------------------
# design construction


@dataclass(frozen=True)
class DesignSpec:
    """Dependent column plus regressors; ``"A*B"`` denotes the product term.

    An intercept named ``const`` is always prepended. Parent terms of an
    interaction are not added automatically, so models that omit them
    can be fitted as written.
    """

    dependent: str = "R"
    terms: tuple[str, ...] = ("Surprise", "MU", "Surprise*MU")
    se: str = "classical"

    def columns(self) -> list[str]:
        needed = [self.dependent]
        for term in self.terms:
            for part in term.split("*"):
                if part not in needed:
                    needed.append(part)
        return needed


def design_matrix(data: pd.DataFrame, terms: Sequence[str]) -> np.ndarray:
    cols = [np.ones(len(data))]
    for term in terms:
        parts = term.split("*")
        col = np.ones(len(data))
        for part in parts:
            if part not in data:
                raise DataError(f"column {part!r} required by term {term!r} is missing")
            col = col * data[part].to_numpy(dtype=float)
        cols.append(col)
    return np.column_stack(cols)


def interaction_regression(spec: DesignSpec, data: pd.DataFrame) -> RegressionResult:
    """Fit ``spec`` on ``data``; rows missing a needed value are dropped and counted."""
    needed = spec.columns()
    for col in needed:
        if col not in data:
            raise DataError(f"column {col!r} missing from regression data")
    complete = data[needed].notna().all(axis=1).to_numpy()
    if "Surprise" in data:
        complete &= np.isfinite(data["Surprise"].to_numpy(dtype=float))
    sub = data.loc[complete]
    X = design_matrix(sub, spec.terms)
    res = fit_ols(X, sub[spec.dependent].to_numpy(dtype=float), ("const",) + tuple(spec.terms), se=spec.se)
    return replace(res, dropped=int((~complete).sum()))


def response_regression(surprises, returns, se: str = "classical") -> RegressionResult:
    """``R = a + b * Surprise``: b is the percent response to a one-SD surprise."""
    data = pd.DataFrame({"Surprise": np.asarray(surprises, float), "R": np.asarray(returns, float)})
    return interaction_regression(DesignSpec("R", ("Surprise",), se), data)


SPLITTERS = ("recession", "mu", "cfnai")


def split_regression(
    events: pd.DataFrame,
    splitter: str,
    dependent: str = "R",
    se: str = "classical",
    column: str | None = None,
) -> dict[str, RegressionResult]:
    """Response regression on two halves of the event sample.

    ``splitter`` is ``"recession"`` (uses the USREC flag: ``low`` = 0,
    ``high`` = 1) or ``"median"`` / ``"mu"`` / ``"cfnai"`` for a median split
    of ``column`` (defaults MU / CFNAI) with ties assigned to the low half.
    """
    if splitter == "recession":
        flag = events[column or "USREC"]
        valid = flag.notna()
        low_mask = (flag == 0) & valid
        high_mask = (flag == 1) & valid
    else:
        col = column or {"mu": "MU", "cfnai": "CFNAI"}.get(splitter)
        if col is None:
            raise DataError(f"unknown splitter {splitter!r}")
        values = events[col]
        valid = values.notna()
        med = float(np.median(values[valid]))
        low_mask = (values <= med) & valid
        high_mask = (values > med) & valid
    spec = DesignSpec(dependent, ("Surprise",), se)
    out = {}
    for label, mask in (("low", low_mask), ("high", high_mask)):
        half = events.loc[mask.to_numpy()]
        if len(half) < 3:
            raise InsufficientDataError(f"{label} half has {len(half)} events, too few to fit")
        out[label] = interaction_regression(spec, half)
    return out


def term_structure_curve(yield_changes: pd.DataFrame, surprises, se: str = "classical"):
    """One ``dy = a + b * Surprise`` regression per maturity column (bps).

    Column names of ``yield_changes`` are maturities in years. Returns the
    per-maturity results and a frame of ``maturity_years, b, se, t, adj_r2, n``.
    """
    surprises = np.asarray(surprises, dtype=float)
    results = {}
    rows = []
    for maturity in yield_changes.columns:
        data = pd.DataFrame({"Surprise": surprises, "dy": yield_changes[maturity].to_numpy(dtype=float)})
        res = interaction_regression(DesignSpec("dy", ("Surprise",), se), data)
        results[maturity] = res
        b, s, t = res["Surprise"]
        rows.append({"maturity_years": maturity, "b": b, "se": s, "t": t, "adj_r2": res.adj_r2, "n": res.n})
    return results, pd.DataFrame(rows)
