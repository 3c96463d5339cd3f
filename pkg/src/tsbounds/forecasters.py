"""Fixed-memory least-squares forecasters: global mean, AR(d) and VAR(k, d)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import DimensionError, Predictor, as_series


class RankDeficientError(np.linalg.LinAlgError):
    """The regression design does not have full column rank."""


@dataclass(frozen=True, eq=False)
class LinearFit(Predictor):
    """Intercept plus ``d`` lag matrices.

    The forecast of ``y_{t+1}`` is ``intercept + sum_l coefs[l] @ y_{t-l}``,
    ``l = 0..d-1``.  ``sigma2`` is the residual covariance (``k x k``).
    """

    intercept: np.ndarray
    coefs: np.ndarray
    sigma2: np.ndarray
    n: int
    name: str = "linear"

    @property
    def d(self) -> int:
        return self.coefs.shape[0]

    @property
    def k(self) -> int:
        return self.intercept.shape[0]

    # Predictor interface
    @property
    def memory(self) -> int:  # type: ignore[override]
        return self.d

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.k

    @property
    def kind(self) -> str:  # type: ignore[override]
        if self.d == 0:
            return "mean"
        return "ar" if self.k == 1 else "var"

    def predict_path(self, values) -> np.ndarray:
        y = np.asarray(values, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        n, k = y.shape
        if k != self.k:
            raise DimensionError(f"series dimension {k} does not match fit dimension {self.k}")
        out = np.full((n, k), np.nan)
        if n > self.d:
            acc = np.broadcast_to(self.intercept, (n - self.d, k)).copy()
            for lag in range(self.d):
                acc += y[self.d - 1 - lag : n - 1 - lag] @ self.coefs[lag].T
            out[self.d :] = acc
        return out

    def forecast(self, history) -> np.ndarray:
        return forecast(self, history)

    def to_statespace(self):
        """Companion-form state-space model started at the stationary law."""
        from .statespace import StateSpaceModel, stationary_covariance

        k, d = self.k, max(self.d, 1)
        m = k * d
        T = np.zeros((m, m))
        for lag in range(self.d):
            T[:k, lag * k : (lag + 1) * k] = self.coefs[lag]
        T[k:, :-k] = np.eye(m - k)
        Q = np.zeros((m, m))
        Q[:k, :k] = self.sigma2
        A_sum = self.coefs.sum(axis=0) if self.d else np.zeros((k, k))
        mean = np.linalg.solve(np.eye(k) - A_sum, self.intercept)
        Z = np.zeros((k, m))
        Z[:, :k] = np.eye(k)
        return StateSpaceModel(Z, T, np.zeros((k, k)), Q, np.zeros(m), stationary_covariance(T, Q), mean)


def _lstsq(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    cond = max(X.shape) * np.finfo(float).eps
    beta, _, rank, _ = linalg.lstsq(X, Y, cond=cond, lapack_driver="gelsy")
    if rank < X.shape[1]:
        raise RankDeficientError(f"design matrix has rank {rank} < {X.shape[1]} columns")
    return beta


def fit_mean(series) -> LinearFit:
    y = as_series(series).values
    mu = y.mean(axis=0)
    r = y - mu
    return LinearFit(mu, np.zeros((0, y.shape[1], y.shape[1])), np.atleast_2d(r.T @ r / y.shape[0]),
                     y.shape[0], "mean")


def fit_var(series, d: int, intercept: bool = True) -> LinearFit:
    """Least-squares VAR(d), one regression per equation.

    Regresses ``y_{t+1}`` on ``(1, y_t, ..., y_{t-d+1})`` for ``t = d..n-1``.
    """
    y = as_series(series).values
    n, k = y.shape
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return fit_mean(y) if intercept else LinearFit(
            np.zeros(k), np.zeros((0, k, k)), np.atleast_2d(y.T @ y / n), n, "zero")
    if n <= d + 1:
        raise ValueError(f"need n > d + 1, got n={n}, d={d}")
    target = y[d:]
    cols = [y[d - 1 - lag : n - 1 - lag] for lag in range(d)]
    X = np.hstack(cols)
    if intercept:
        X = np.hstack([np.ones((n - d, 1)), X])
    beta = np.column_stack([_lstsq(X, target[:, i]) for i in range(k)])
    if intercept:
        c, beta = beta[0], beta[1:]
    else:
        c = np.zeros(k)
    coefs = np.stack([beta[lag * k : (lag + 1) * k].T for lag in range(d)])
    resid = target - X @ (np.vstack([c, beta]) if intercept else beta)
    sigma2 = np.atleast_2d(resid.T @ resid / resid.shape[0])
    name = f"AR({d})" if k == 1 else f"VAR({d})"
    return LinearFit(c, coefs, sigma2, n, name)


def fit_ar(series, d: int, intercept: bool = True) -> LinearFit:
    """Least-squares AR(d) for a scalar series."""
    s = as_series(series)
    if s.p != 1:
        raise DimensionError("fit_ar expects a scalar series; use fit_var")
    return fit_var(s, d, intercept)


def forecast(fit: LinearFit, history) -> np.ndarray:
    """One-step forecast from the last ``d`` rows of ``history``."""
    h = np.asarray(history, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if h.shape[0] < fit.d:
        raise ValueError(f"history of length {h.shape[0]} shorter than memory {fit.d}")
    out = fit.intercept.copy()
    for lag in range(fit.d):
        out = out + fit.coefs[lag] @ h[-1 - lag]
    return out
