import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsbounds.core import DimensionError, TimeSeries, training_error
from tsbounds.forecasters import RankDeficientError, fit_ar, fit_mean, fit_var, forecast
from tsbounds.statespace import kalman_filter


def ar_noiseless(coefs, c, n, start):
    y = list(start)
    while len(y) < n:
        y.append(c + sum(a * y[-1 - i] for i, a in enumerate(coefs)))
    return np.array(y)


def test_noiseless_ar_recovery():
    # a damped oscillation is exactly AR(2) and has a full-rank design
    y = ar_noiseless([1.2, -0.5], 0.3, 60, [1.0, -2.0])
    fit = fit_ar(y, 2)
    assert np.allclose(fit.coefs[:, 0, 0], [1.2, -0.5], atol=1e-8)
    assert fit.intercept[0] == pytest.approx(0.3, abs=1e-8)
    assert training_error(y, fit, 2) < 1e-16


def test_residuals_orthogonal_to_regressors():
    rng = np.random.default_rng(0)
    y = rng.normal(size=(200, 2)).cumsum(axis=0) * 0.1 + rng.normal(size=(200, 2))
    fit = fit_var(y, 2)
    pred = fit.predict_path(y)
    r = y[2:] - pred[2:]
    X = np.hstack([np.ones((198, 1)), y[1:-1], y[:-2]])
    assert np.abs(X.T @ r).max() < 1e-8


def test_var_matches_equationwise_lstsq():
    rng = np.random.default_rng(1)
    y = rng.normal(size=(100, 3))
    fit = fit_var(y, 1)
    X = np.hstack([np.ones((99, 1)), y[:-1]])
    beta = np.linalg.lstsq(X, y[1:], rcond=None)[0]
    assert np.allclose(fit.intercept, beta[0])
    assert np.allclose(fit.coefs[0], beta[1:].T)


def test_mean_fit():
    y = np.array([1.0, 2.0, 6.0])
    fit = fit_mean(y)
    assert fit.d == 0 and fit.kind == "mean"
    assert forecast(fit, y)[0] == pytest.approx(3.0)


def test_forecast_matches_predict_path():
    rng = np.random.default_rng(2)
    y = rng.normal(size=50)
    fit = fit_ar(y, 3)
    assert forecast(fit, y)[0] == pytest.approx(fit.forecast(y)[0])
    assert fit.predict_path(y)[-1, 0] == pytest.approx(forecast(fit, y[:-1])[0])


def test_companion_statespace_reproduces_forecasts():
    rng = np.random.default_rng(4)
    y = ar_noiseless([0.5, 0.2], 0.1, 80, [0.0, 0.0]) + rng.normal(size=80)
    fit = fit_ar(y, 2)
    out = kalman_filter(fit.to_statespace(), y)
    assert np.allclose(out.yhat[2:-1, 0], fit.predict_path(y)[2:, 0], atol=1e-8)


def test_errors():
    with pytest.raises(RankDeficientError):
        fit_ar(np.ones(20), 1)
    with pytest.raises(DimensionError):
        fit_ar(np.zeros((10, 2)), 1)
    with pytest.raises(ValueError):
        fit_ar(np.arange(3.0), 2)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 4))
def test_fit_minimises_in_sample_loss(seed, d):
    rng = np.random.default_rng(seed)
    y = TimeSeries(rng.normal(size=60))
    fit = fit_ar(y, d)
    base = training_error(y, fit, d)
    bumped = type(fit)(fit.intercept + 0.01, fit.coefs, fit.sigma2, fit.n)
    assert training_error(y, bumped, d) >= base
