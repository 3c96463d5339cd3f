import math

import numpy as np
import pytest

from tsbounds.econ import PriorSpec, neg_loglik, penalized_mle
from tsbounds.econ import ParamPrior
from tsbounds.statespace import delta_d_statespace, kalman_filter
from tsbounds.volatility import (
    E_LOG_CHI2,
    OBS_VARIANCE,
    SV_LOWER,
    SV_UPPER,
    SvParams,
    _sv_builder,
    fit_sv,
    linearize_returns,
    log_returns,
    moment_init,
    simulate_sv,
    sv_to_statespace,
)

TRUE = SvParams(-1.0, 0.98, 0.2)


@pytest.fixture(scope="module")
def long_sample():
    y, _ = linearize_returns(simulate_sv(TRUE, 20_000, seed=0))
    return y


def test_log_chi2_constant():
    z = np.random.default_rng(0).standard_normal(2_000_000)
    assert np.mean(np.log(z * z)) == pytest.approx(E_LOG_CHI2, abs=5e-3)
    assert np.var(np.log(z * z)) == pytest.approx(OBS_VARIANCE, rel=5e-3)


def test_linearize_drops_zeros():
    y, dropped = linearize_returns([0.1, 0.0, -0.2, 0.0])
    assert dropped == 2
    assert np.allclose(y.values[:, 0], np.log([0.01, 0.04]))
    with pytest.raises(ValueError):
        linearize_returns([0.0, 0.0])


def test_log_returns():
    r = log_returns([1.0, math.e, math.e])
    assert np.allclose(r.values[:, 0], [1.0, 0.0])


def test_statespace_form():
    m = sv_to_statespace(TRUE)
    assert m.Z[0, 0] == 0.5 and m.H[0, 0] == pytest.approx(math.pi**2 / 2)
    assert m.T[0, 0] == 0.98 and m.c[0] == -1.0
    assert m.P1[0, 0] == pytest.approx(0.2 / (1 - 0.98**2))


def test_simulated_transform_moments(long_sample):
    y = long_sample.values[:, 0]
    assert y.mean() == pytest.approx(TRUE.kappa, abs=0.15)
    var_rho = TRUE.sigma_w2 / (1 - TRUE.phi**2)
    assert y.var() == pytest.approx(OBS_VARIANCE + 0.25 * var_rho, rel=0.1)


def test_self_recovery(long_sample):
    fit = fit_sv(long_sample)
    assert fit.converged
    assert abs(fit.params.phi - TRUE.phi) < 0.01
    assert fit.params.sigma_w2 == pytest.approx(TRUE.sigma_w2, rel=0.3)
    assert fit.neg_loglik <= fit.neg_loglik_init
    assert fit.neg_loglik <= neg_loglik(sv_to_statespace(TRUE), long_sample)


def test_moment_init_is_reasonable(long_sample):
    init = moment_init(long_sample)
    assert 0.9 < init.phi < 0.995


def test_flat_prior_matches_box_only_fit():
    y, _ = linearize_returns(simulate_sv(SvParams(0.0, 0.9, 0.3), 3000, seed=2))
    base = fit_sv(y)
    flat = PriorSpec((
        ParamPrior("kappa", -np.inf, np.inf, 0.0, 1e12),
        ParamPrior("phi", SV_LOWER[1], SV_UPPER[1], 0.0, 1e12),
        ParamPrior("sigma_w2", SV_LOWER[2], SV_UPPER[2], 0.0, 1e12),
    ))
    res = penalized_mle(_sv_builder, y, flat, moment_init(y).as_array())
    assert np.allclose(res.theta, base.params.as_array(), atol=2e-3)


def test_tight_prior_pins_parameter():
    y, _ = linearize_returns(simulate_sv(SvParams(0.0, 0.9, 0.3), 3000, seed=2))
    pinned = PriorSpec((
        ParamPrior("kappa", -np.inf, np.inf),
        ParamPrior("phi", SV_LOWER[1], SV_UPPER[1], 0.5, 1e-8),
        ParamPrior("sigma_w2", SV_LOWER[2], SV_UPPER[2]),
    ))
    res = penalized_mle(_sv_builder, y, pinned, np.array([0.0, 0.6, 0.3]))
    assert res.theta[1] == pytest.approx(0.5, abs=1e-3)


def test_textbook_scaling_differs():
    a = simulate_sv(TRUE, 5000, seed=1).values
    b = simulate_sv(TRUE, 5000, seed=1, textbook=True).values
    assert np.var(np.log(b**2)) > np.var(np.log(a**2))


def test_delta_d_on_fitted_model(long_sample):
    y = long_sample
    short = type(y)(y.values[:400])
    model = sv_to_statespace(fit_sv(short).params)
    dd = [delta_d_statespace(model, short, d, EY1=1.0) for d in (1, 2, 4, 8)]
    firsts = [x.first_term for x in dd]
    assert all(f2 <= f1 for f1, f2 in zip(firsts, firsts[1:]))
    assert all(x.total == x.first_term + x.second_term for x in dd)
    assert kalman_filter(model, short).neg_loglik == pytest.approx(neg_loglik(model, short), rel=1e-12)
