"""Stochastic volatility via the log-squared-return linearisation.

``y_t = sigma z_t exp(rho_t / 2)`` with ``rho_{t+1} = phi rho_t + w_t`` is
turned into the linear observation equation

    log y_t^2 = kappa + rho_t / 2 + xi_t,    Var(xi_t) = pi^2 / 2

and fitted by maximising the Kalman (quasi-)likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import TimeSeries, as_series
from .optim import OptimizerConfig
from .statespace import StateSpaceModel

OBS_LOADING = 0.5
OBS_VARIANCE = math.pi**2 / 2
# E[log z^2] for z ~ N(0, 1)
E_LOG_CHI2 = -1.2703628454614782

PHI_MAX = 1 - 1e-6
SIGMA_W2_MIN = 1e-12


@dataclass(frozen=True)
class SvParams:
    kappa: float
    phi: float
    sigma_w2: float

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError("|phi| must be < 1")
        if not self.sigma_w2 > 0:
            raise ValueError("sigma_w2 must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.kappa, self.phi, self.sigma_w2])


def linearize_returns(returns) -> Tuple[TimeSeries, int]:
    """Drop exact zero returns and take ``log y^2``.

    Returns the transformed series and the number of observations dropped.
    """
    s = as_series(returns)
    if s.p != 1:
        raise ValueError("expected a scalar return series")
    y = s.values[:, 0]
    keep = y != 0
    if not keep.any():
        raise ValueError("all returns are zero")
    index = None if s.index is None else tuple(i for i, k in zip(s.index, keep) if k)
    out = TimeSeries(np.log(y[keep] ** 2), index=index, name=f"log sq {s.name}".strip())
    return out, int((~keep).sum())


def log_returns(prices) -> TimeSeries:
    s = as_series(prices)
    if np.any(s.values <= 0):
        raise ValueError("prices must be positive")
    index = None if s.index is None else s.index[1:]
    return TimeSeries(np.diff(np.log(s.values[:, 0])), index=index, name=s.name)


def sv_to_statespace(params: SvParams) -> StateSpaceModel:
    phi, q = params.phi, params.sigma_w2
    if not abs(phi) < 1:
        raise ValueError("|phi| must be < 1")
    return StateSpaceModel(
        Z=[[OBS_LOADING]], T=[[phi]], H=[[OBS_VARIANCE]], Q=[[q]],
        a1=[0.0], P1=[[q / (1 - phi * phi)]], c=[params.kappa],
    )


def _sv_builder(theta) -> StateSpaceModel:
    return sv_to_statespace(SvParams(*theta))


SV_LOWER = (-np.inf, -PHI_MAX, SIGMA_W2_MIN)
SV_UPPER = (np.inf, PHI_MAX, np.inf)


@dataclass
class SvFit:
    params: SvParams
    neg_loglik: float
    neg_loglik_init: float
    converged: bool
    n_iter: int

    @property
    def model(self) -> StateSpaceModel:
        return sv_to_statespace(self.params)


def moment_init(transformed) -> SvParams:
    """Starting values from sample autocovariances.

    For lags ``k >= 1`` the transformed series has autocovariance
    ``OBS_LOADING^2 Var(rho) phi^k``, so ``phi ~ gamma(2)/gamma(1)``.
    """
    y = as_series(transformed).values[:, 0]
    yc = y - y.mean()
    g1 = float(np.mean(yc[1:] * yc[:-1]))
    g2 = float(np.mean(yc[2:] * yc[:-2]))
    phi = g2 / g1 if g1 > 0 and g2 > 0 else 0.9
    phi = min(max(phi, 0.5), 0.99)
    var_rho = max(g1 / phi, 1e-3) / OBS_LOADING**2
    return SvParams(float(y.mean()), phi, var_rho * (1 - phi * phi))


def fit_sv(transformed, init: Optional[SvParams] = None,
           config: Optional[OptimizerConfig] = None) -> SvFit:
    """Quasi-maximum likelihood for ``(kappa, phi, sigma_w2)`` under
    ``|phi| <= 1 - 1e-6`` and ``sigma_w2 >= 1e-12``.

    Without ``init`` the search starts from :func:`moment_init`.
    """
    from .econ import PriorSpec, penalized_mle

    y = as_series(transformed)
    if init is None:
        init = moment_init(y)
    x0 = np.array([init.kappa, init.phi, init.sigma_w2])
    priors = PriorSpec.boxes(SV_LOWER, SV_UPPER, names=("kappa", "phi", "sigma_w2"))
    res = penalized_mle(_sv_builder, y, priors, x0, config)
    return SvFit(SvParams(*res.theta), res.objective, res.objective_init, res.converged, res.n_iter)


def simulate_sv(params: SvParams, n: int, seed: int = 0, textbook: bool = False) -> TimeSeries:
    """Simulate returns ``sigma z_t exp(c rho_t)`` with ``log sigma^2 = kappa - E[log z^2]``
    and ``rho`` started from its stationary law.

    By default ``c = 1/4`` so that ``log y^2 = kappa + rho/2 + xi`` holds
    exactly, matching the fitted observation equation; ``textbook=True``
    uses ``c = 1/2``.
    """
    rng = np.random.default_rng(seed)
    phi, q = params.phi, params.sigma_w2
    rho = np.empty(n)
    rho[0] = rng.normal(0.0, math.sqrt(q / (1 - phi * phi)))
    w = rng.normal(0.0, math.sqrt(q), n)
    for t in range(1, n):
        rho[t] = phi * rho[t - 1] + w[t - 1]
    sigma = math.exp(0.5 * (params.kappa - E_LOG_CHI2))
    z = rng.standard_normal(n)
    c = 0.5 if textbook else 0.5 * OBS_LOADING
    return TimeSeries(sigma * z * np.exp(c * rho), name="sv")
