"""Simulation checks: true-risk estimation and empirical bound coverage."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats

from .bounds import BoundInputs, Variant, risk_bound
from .core import SQUARED, DimensionError, LossSpec, Predictor, TimeSeries, training_error
from .forecasters import LinearFit, fit_ar, fit_mean
from .mixing import MixingProfile, choose_blocks
from .statespace import StateSpaceModel, simulate_paths, stationary_covariance

Process = Union[StateSpaceModel, LinearFit]


def _as_model(process: Process) -> StateSpaceModel:
    if isinstance(process, LinearFit):
        return process.to_statespace()
    return process


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    reps: int


def estimate_true_risk(process: Process, predictor: Predictor, n: int, loss: LossSpec = SQUARED,
                       reps: int = 1000, seed: int = 0) -> RiskEstimate:
    """Average ``l(Y_{n+1} - f(Y_1..Y_n))`` over fresh simulated paths."""
    if reps < 100:
        raise ValueError("use at least 100 replications")
    model = _as_model(process)
    if predictor.dim is not None and predictor.dim != model.p:
        raise DimensionError("predictor and generator dimensions differ")
    rng = np.random.default_rng(seed)
    paths = simulate_paths(model, n + 1, reps, rng)
    losses = np.empty(reps)
    for r in range(reps):
        f = predictor.forecast(paths[r, :n])
        losses[r] = loss(paths[r, n] - f)
    return RiskEstimate(float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(reps)), reps)


def marginal_covariance(process: Process) -> np.ndarray:
    model = _as_model(process)
    P = stationary_covariance(model.T, model.Q)
    return model.Z @ P @ model.Z.T + model.H


def moment_bound(process: Process, loss: LossSpec = SQUARED, inflation: float = 1.1) -> float:
    """Root second moment of the loss of the marginal-mean forecast under the
    stationary Gaussian law, inflated by ``inflation``."""
    S = marginal_covariance(process)
    if loss.kind == "squared":
        m2 = np.trace(S) ** 2 + 2 * np.trace(S @ S)  # E||e||^4
    elif loss.kind == "euclidean-norm":
        m2 = np.trace(S)
    else:
        # E(sum |e_i|)^2 for centred Gaussian e
        sd = np.sqrt(np.diag(S))
        corr = S / np.outer(sd, sd)
        e_abs = (2 / math.pi) * (np.sqrt(1 - np.clip(corr, -1, 1) ** 2) + corr * np.arcsin(np.clip(corr, -1, 1)))
        m2 = float(np.sum(np.outer(sd, sd) * e_abs))
    return inflation * math.sqrt(m2)


@dataclass(frozen=True)
class ModelClass:
    """A fixed-memory class: name, memory ``d``, VC dimension and an ERM fitter."""

    name: str
    d: int
    vcd: int
    fit: Callable[[TimeSeries], Predictor]


MEAN_CLASS = ModelClass("mean", 0, 1, fit_mean)


def ar_class(d: int) -> ModelClass:
    return ModelClass(f"ar({d})", d, d + 1, lambda s: fit_ar(s, d))


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    hits: int
    reps: int
    eta: float
    mean_slack: float
    mean_bound: float
    mean_risk: float
    p_value: float
    trivial_reps: int

    def passes(self, level: float = 0.99) -> bool:
        """Fail only if coverage falls significantly below ``1 - eta``."""
        return self.p_value >= 1 - level


def binomial_coverage_pvalue(hits: int, reps: int, target: float) -> float:
    """One-sided p-value of ``H0: coverage >= target`` given ``hits`` successes."""
    return float(stats.binom.cdf(hits, reps, target))


def coverage_experiment(
    process: Process,
    model_class: ModelClass,
    loss: LossSpec = SQUARED,
    eta: float = 0.15,
    profile: Optional[MixingProfile] = None,
    n: int = 500,
    reps: int = 500,
    seed: int = 0,
    risk_reps: int = 200,
    M: Optional[float] = None,
    variant: Variant = "as-printed",
) -> CoverageResult:
    """Fraction of simulated samples on which the fitted predictor's true risk
    lies below its bound.

    Replication ``r`` uses seed ``seed + r`` for the sample and a derived
    stream for the true-risk estimate.
    """
    model = _as_model(process)
    profile = profile if profile is not None else MixingProfile.independent()
    if M is None:
        M = moment_bound(model, loss)
    plan = choose_blocks(n, model_class.d, profile, eta, model_class.vcd, M, variant)
    hits = trivial = 0
    slack = bound_sum = risk_sum = 0.0
    for r in range(reps):
        rng = np.random.default_rng(seed + r)
        sample = TimeSeries(simulate_paths(model, n, 1, rng)[0])
        f = model_class.fit(sample)
        train = training_error(sample, f, model_class.d, loss)
        report = risk_bound(BoundInputs(plan, model_class.vcd, eta, M, train, 0.0), variant)
        risk = estimate_true_risk(model, f, n, loss, risk_reps, seed=10**6 + seed + r).mean
        trivial += report.trivial
        hits += risk <= report.total_bound
        slack += report.total_bound - risk
        bound_sum += report.total_bound
        risk_sum += risk
    return CoverageResult(
        coverage=hits / reps, hits=hits, reps=reps, eta=eta,
        mean_slack=slack / reps, mean_bound=bound_sum / reps, mean_risk=risk_sum / reps,
        p_value=binomial_coverage_pvalue(hits, reps, 1 - eta), trivial_reps=trivial,
    )
