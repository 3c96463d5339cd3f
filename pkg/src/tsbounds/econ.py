"""Macro data preparation (FRED per-capita transforms, HP filter,
detrending) and penalised maximum likelihood for state-space families."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import solveh_banded

from .core import TimeSeries, as_series
from .optim import OptimizerConfig, box_nelder_mead
from .statespace import NonStationaryError, StateSpaceModel, kalman_filter, scalar_neg_loglik

FRED_IDS = ("PCESVC96", "PCNDGC96", "GDPIC1", "HOANBS", "CNP16OV")


@dataclass(frozen=True)
class MacroSeries:
    consumption: np.ndarray
    investment: np.ndarray
    output: np.ndarray
    hours: np.ndarray
    index: Optional[tuple] = None

    def as_series(self) -> TimeSeries:
        return TimeSeries(
            np.column_stack([self.output, self.consumption, self.investment, self.hours]),
            index=self.index, name="y,c,i,h",
        )


def _col(x) -> np.ndarray:
    return as_series(x).values[:, 0]


def fred_transform(pcesvc, pcndgc, gdpic, hoanbs, cnp16ov) -> MacroSeries:
    """Per-capita consumption, investment, output and hours::

        c = 2.5e5 (PCESVC96 + PCNDGC96) / CNP16OV
        i = 2.5e5 GDPIC1 / CNP16OV
        y = c + i
        h = 6000 HOANBS / CNP16OV
    """
    cols = [_col(x) for x in (pcesvc, pcndgc, gdpic, hoanbs, cnp16ov)]
    if len({c.shape[0] for c in cols}) != 1:
        raise ValueError("input series must have equal length")
    svc, ndg, inv, hrs, pop = cols
    if np.any(pop == 0):
        raise ZeroDivisionError("population series contains zeros")
    c = 2.5e5 * (svc + ndg) / pop
    i = 2.5e5 * inv / pop
    index = getattr(cnp16ov, "index", None)
    return MacroSeries(c, i, c + i, 6000.0 * hrs / pop, index)


def read_fred_csv(path) -> Dict[str, TimeSeries]:
    """Load FRED data, either long format (``series_id,date,value`` rows) or
    the wide ``DATE,<ID>,...`` download format.  Missing values (``.``) are
    rejected."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = [h.strip() for h in rows[0]]
    lower = [h.lower() for h in header]
    out: Dict[str, TimeSeries] = {}
    if {"series_id", "date", "value"} <= set(lower):
        si, di, vi = lower.index("series_id"), lower.index("date"), lower.index("value")
        grouped: Dict[str, list] = {}
        for r in rows[1:]:
            grouped.setdefault(r[si], []).append((r[di], float(r[vi])))
        for sid, items in grouped.items():
            items.sort()
            out[sid] = TimeSeries([v for _, v in items], index=tuple(d for d, _ in items), name=sid)
        return out
    dates = tuple(r[0] for r in rows[1:])
    for j, sid in enumerate(header[1:], start=1):
        out[sid] = TimeSeries([float(r[j]) for r in rows[1:]], index=dates, name=sid)
    return out


def _hp_banded(n: int, lam: float) -> np.ndarray:
    """Upper banded storage of ``I + lam D'D`` with ``D`` the second-difference
    operator, for :func:`scipy.linalg.solveh_banded`."""
    D = sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(n - 2, n))
    A = (sparse.identity(n) + lam * (D.T @ D)).todia()
    ab = np.zeros((3, n))
    for k in range(3):
        ab[2 - k, k:] = A.diagonal(k)
    return ab


def hp_filter(series, lam: float = 1600.0) -> np.ndarray:
    """Hodrick-Prescott trend.

    Solves ``(I + lam D'D) z = x`` exactly with a banded Cholesky
    factorisation (``O(n)``).  Columns of a multivariate input are filtered
    separately.
    """
    x = as_series(series).values
    n = x.shape[0]
    if n < 3:
        raise ValueError("HP filter needs at least 3 observations")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0:
        trend = x.copy()
    else:
        trend = solveh_banded(_hp_banded(n, lam), x, check_finite=False)
    return trend[:, 0] if trend.shape[1] == 1 else trend


def detrend(raw, trend) -> np.ndarray:
    """Log deviation from trend, ``log raw - log trend``."""
    r = np.asarray(raw.values if isinstance(raw, TimeSeries) else raw, dtype=float)
    tr = np.asarray(trend.values if isinstance(trend, TimeSeries) else trend, dtype=float)
    if r.shape != tr.shape:
        tr = tr.reshape(r.shape)
    if np.any(r <= 0) or np.any(tr <= 0):
        raise ValueError("detrending requires positive values")
    return np.log(r) - np.log(tr)


@dataclass(frozen=True)
class ParamPrior:
    name: str
    lower: float
    upper: float
    mean: Optional[float] = None
    variance: Optional[float] = None

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower bound must be below upper bound")
        if (self.mean is None) != (self.variance is None):
            raise ValueError(f"{self.name}: give both prior mean and variance, or neither")
        if self.variance is not None and not self.variance > 0:
            raise ValueError(f"{self.name}: prior variance must be positive")

    def penalty(self, value: float) -> float:
        if self.mean is None:
            return 0.0
        return (value - self.mean) ** 2 / (2.0 * self.variance)


@dataclass(frozen=True)
class PriorSpec:
    """Independent normal priors (optional) and hard boxes, one per parameter."""

    params: Tuple[ParamPrior, ...]

    @classmethod
    def boxes(cls, lower, upper, names=None) -> "PriorSpec":
        names = names or [f"theta{i}" for i in range(len(lower))]
        return cls(tuple(ParamPrior(nm, lo, hi) for nm, lo, hi in zip(names, lower, upper)))

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.lower for p in self.params])

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.upper for p in self.params])

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def penalty(self, theta) -> float:
        return float(sum(p.penalty(v) for p, v in zip(self.params, theta)))

    def inside(self, theta) -> bool:
        theta = np.asarray(theta)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))


# RBC deep-parameter priors and strict constraints; the sigma entries carry
# no prior, only a box.
RBC_PRIORS = PriorSpec((
    ParamPrior("alpha", 0.1, 0.5, 0.29, 2.5e-2),
    ParamPrior("beta", 0.90, 1.0, 0.99, 1.25e-3),
    ParamPrior("phi", 1.0, 5.0, 1.5, 2.5),
    ParamPrior("varphi", 0.0, 1.0, 0.6, 0.1),
    ParamPrior("delta", 0.0, 0.2, 2.5e-2, 1e-3),
    ParamPrior("rho", 0.80, 1.0, 0.95, 2.5e-2),
    ParamPrior("sigma_eps", 0.0, 0.05, 1e-4, 2e-5),
    ParamPrior("sigma_y", 0.0, 1.0),
    ParamPrior("sigma_c", 0.0, 1.0),
    ParamPrior("sigma_i", 0.0, 1.0),
    ParamPrior("sigma_n", 0.0, 1.0),
))


def neg_loglik(model: StateSpaceModel, data) -> float:
    """Kalman negative log-likelihood, using the scalar fast path when possible."""
    y = as_series(data).values
    if model.p == 1 and model.m == 1:
        return scalar_neg_loglik(
            y[:, 0], model.Z[0, 0], model.T[0, 0], model.H[0, 0], model.Q[0, 0],
            model.a1[0], model.P1[0, 0], model.c[0],
        )
    return kalman_filter(model, y).neg_loglik


@dataclass
class PenalizedFit:
    theta: np.ndarray
    objective: float
    objective_init: float
    converged: bool
    n_iter: int
    names: Tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return dict(zip(self.names, map(float, self.theta)))


def penalized_mle(
    builder: Callable[[np.ndarray], StateSpaceModel],
    data,
    priors: PriorSpec,
    init,
    config: Optional[OptimizerConfig] = None,
) -> PenalizedFit:
    """Minimise Kalman negative log-likelihood plus Gaussian prior penalties
    over the prior boxes.

    ``builder`` maps a parameter vector to a :class:`StateSpaceModel`; points
    where it raises (e.g. a nonstationary transition) score ``+inf``.
    """
    y = as_series(data)
    init = np.asarray(init, dtype=float)
    if init.shape != (len(priors.params),):
        raise ValueError("init must have one entry per parameter")

    def objective(theta):
        try:
            model = builder(theta)
        except (NonStationaryError, ValueError, np.linalg.LinAlgError):
            return math.inf
        try:
            return neg_loglik(model, y) + priors.penalty(theta)
        except (np.linalg.LinAlgError, ValueError, OverflowError):
            return math.inf

    if not math.isfinite(objective(init)):
        raise ValueError("objective is infinite at the initial point; start inside the feasible region")
    res = box_nelder_mead(objective, init, priors.lower, priors.upper, config)
    return PenalizedFit(res.x, res.fun, res.fun_init, res.converged, res.n_iter, priors.names)


def var1_builder(k: int, measurement_var: float = 0.0) -> Callable[[np.ndarray], StateSpaceModel]:
    """VAR(1)-as-state-space family.

    ``theta`` holds the ``k*k`` transition entries (row-major) followed by
    ``k`` innovation variances.  This stands in for a structural model whose
    state-space mapping would otherwise be supplied by the user.
    """
    from .statespace import stationary_covariance

    def build(theta) -> StateSpaceModel:
        theta = np.asarray(theta, dtype=float)
        A = theta[: k * k].reshape(k, k)
        Q = np.diag(theta[k * k : k * k + k])
        return StateSpaceModel(
            np.eye(k), A, measurement_var * np.eye(k), Q, np.zeros(k),
            stationary_covariance(A, Q) if np.max(np.abs(np.linalg.eigvals(A))) < 1 else Q,
        )

    return build


def var1_priors(k: int, max_var: float = 10.0) -> PriorSpec:
    names = [f"A{i}{j}" for i in range(1, k + 1) for j in range(1, k + 1)]
    names += [f"q{i}" for i in range(1, k + 1)]
    lower = [-0.999] * (k * k) + [1e-8] * k
    upper = [0.999] * (k * k) + [max_var] * k
    return PriorSpec.boxes(lower, upper, names)
