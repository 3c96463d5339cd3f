"""Finite-sample risk bounds for time-series forecasters under beta-mixing."""

from .bounds import (
    BoundInputs,
    BoundReport,
    Penalty,
    corollary_penalty,
    exact_exponent,
    lambert_w_minus1,
    oracle_rates,
    risk_bound,
    simplified_exponent,
    theorem1_rhs,
    tradeoff_grid,
    trivial_boundary,
)
from .capacity import InfiniteCapacityError, ModelClassDescriptor, finite_vcd, vc_dimension
from .core import ABSOLUTE, EUCLIDEAN, SQUARED, DimensionError, LossSpec, Predictor, TimeSeries, training_error
from .econ import PriorSpec, detrend, fred_transform, hp_filter, penalized_mle
from .forecasters import LinearFit, fit_ar, fit_mean, fit_var
from .mixing import (
    IBM_PROFILE,
    BlockingPlan,
    InfeasibleBlockingError,
    MixingProfile,
    beta_at,
    block_partition,
    choose_blocks,
)
from .montecarlo import coverage_experiment, estimate_true_risk
from .srm import CandidateModel, srm_select
from .statespace import (
    KalmanPredictor,
    NonStationaryError,
    StateSpaceModel,
    delta_d_statespace,
    kalman_filter,
    prediction_weights,
)
from .volatility import SvParams, fit_sv, linearize_returns, simulate_sv

__version__ = "0.1.0"

__all__ = [
    "ABSOLUTE",
    "BlockingPlan",
    "BoundInputs",
    "BoundReport",
    "CandidateModel",
    "DimensionError",
    "EUCLIDEAN",
    "IBM_PROFILE",
    "InfeasibleBlockingError",
    "InfiniteCapacityError",
    "KalmanPredictor",
    "LinearFit",
    "LossSpec",
    "MixingProfile",
    "ModelClassDescriptor",
    "NonStationaryError",
    "Penalty",
    "Predictor",
    "PriorSpec",
    "SQUARED",
    "StateSpaceModel",
    "SvParams",
    "TimeSeries",
    "beta_at",
    "block_partition",
    "choose_blocks",
    "corollary_penalty",
    "coverage_experiment",
    "delta_d_statespace",
    "detrend",
    "estimate_true_risk",
    "exact_exponent",
    "finite_vcd",
    "fit_ar",
    "fit_mean",
    "fit_sv",
    "fit_var",
    "fred_transform",
    "hp_filter",
    "kalman_filter",
    "lambert_w_minus1",
    "linearize_returns",
    "oracle_rates",
    "penalized_mle",
    "prediction_weights",
    "risk_bound",
    "simplified_exponent",
    "simulate_sv",
    "srm_select",
    "theorem1_rhs",
    "tradeoff_grid",
    "training_error",
    "trivial_boundary",
    "vc_dimension",
]
