"""Linear-Gaussian state-space models: Kalman filtering, the linear weight
form of the one-step forecasts, and the truncation penalty ``delta_d``.

Model::

    y_t       = c + Z alpha_t + e_t,     e_t ~ N(0, H)
    alpha_t+1 = T alpha_t + w_t+1,       w_t ~ N(0, Q)
    alpha_1   ~ N(a1, P1)

Time indices in docstrings are 1-based; arrays are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import SQUARED, DimensionError, LossSpec, Predictor, TimeSeries, as_series

STATIONARITY_TOL = 1e-10
COND_LIMIT = 1e12


class NonStationaryError(ValueError):
    pass


def _mat(x, shape=None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if shape is not None and a.shape != shape:
        raise DimensionError(f"expected shape {shape}, got {a.shape}")
    return a


def spectral_radius(T: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(T)))) if T.size else 0.0


def _is_psd(A: np.ndarray, tol: float = 1e-10) -> bool:
    if not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max())):
        return False
    return bool(np.linalg.eigvalsh(A).min() >= -tol * max(1.0, np.abs(A).max()))


@dataclass(frozen=True)
class StateSpaceModel:
    Z: np.ndarray
    T: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    a1: np.ndarray
    P1: np.ndarray
    c: Optional[np.ndarray] = None
    check_stationary: bool = True

    def __post_init__(self):
        Z = _mat(self.Z)
        p, m = Z.shape
        T = _mat(self.T, (m, m))
        H = _mat(self.H, (p, p))
        Q = _mat(self.Q, (m, m))
        P1 = _mat(self.P1, (m, m))
        a1 = np.asarray(self.a1, dtype=float).reshape(-1)
        if a1.shape != (m,):
            raise DimensionError(f"a1 must have length {m}")
        c = np.zeros(p) if self.c is None else np.asarray(self.c, dtype=float).reshape(-1)
        if c.shape != (p,):
            raise DimensionError(f"c must have length {p}")
        for name, A in (("H", H), ("Q", Q), ("P1", P1)):
            if not _is_psd(A):
                raise ValueError(f"{name} must be symmetric positive semidefinite")
        if self.check_stationary and spectral_radius(T) >= 1 - STATIONARITY_TOL:
            raise NonStationaryError(f"spectral radius of T is {spectral_radius(T):.6g} >= 1")
        for name, v in (("Z", Z), ("T", T), ("H", H), ("Q", Q), ("P1", P1), ("a1", a1), ("c", c)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def p(self) -> int:
        return self.Z.shape[0]

    @property
    def m(self) -> int:
        return self.Z.shape[1]

    @classmethod
    def from_dict(cls, cfg: dict) -> "StateSpaceModel":
        """Build from a mapping of named matrices given as nested row-major
        lists; ``a1`` and ``P1`` default to zero and the stationary covariance."""
        Z = _mat(cfg["Z"])
        m = Z.shape[1]
        T = _mat(cfg["T"])
        Q = _mat(cfg["Q"])
        a1 = cfg.get("a1", np.zeros(m))
        P1 = cfg.get("P1")
        if P1 is None:
            P1 = stationary_covariance(T, Q)
        return cls(Z, T, _mat(cfg["H"]), Q, a1, P1, cfg.get("c"))

    @classmethod
    def from_yaml(cls, path) -> "StateSpaceModel":
        import yaml

        with Path(path).open() as fh:
            cfg = yaml.safe_load(fh)
        return cls.from_dict(cfg.get("model", cfg))


def stationary_covariance(T, Q) -> np.ndarray:
    """Solve ``P = T P T' + Q``."""
    from scipy.linalg import solve_discrete_lyapunov

    P = solve_discrete_lyapunov(_mat(T), _mat(Q))
    return 0.5 * (P + P.T)


def ar1_model(phi: float, sigma2: float = 1.0, mean: float = 0.0) -> StateSpaceModel:
    """Scalar AR(1) written as a state-space model started in stationarity."""
    if not abs(phi) < 1:
        raise NonStationaryError(f"|phi| = {abs(phi):.6g} >= 1")
    return StateSpaceModel(
        Z=[[1.0]], T=[[phi]], H=[[0.0]], Q=[[sigma2]], a1=[0.0],
        P1=[[sigma2 / (1 - phi**2)]], c=[mean],
    )


def white_noise_model(sigma2: float = 1.0, mean: float = 0.0, p: int = 1) -> StateSpaceModel:
    m = p
    return StateSpaceModel(
        Z=np.eye(p), T=np.zeros((m, m)), H=np.zeros((p, p)), Q=sigma2 * np.eye(m),
        a1=np.zeros(m), P1=sigma2 * np.eye(m), c=np.full(p, mean),
    )


@dataclass
class KalmanOutput:
    """Per-step filter quantities; index ``t-1`` holds step ``t``.

    ``F`` is the inverse innovation covariance; ``S`` the covariance itself.
    ``yhat[t-1]`` is the forecast of ``y_t`` given ``y_1..y_{t-1}``, with
    ``yhat[n]`` the out-of-sample forecast of ``y_{n+1}``.
    """

    F: np.ndarray
    S: np.ndarray
    K: np.ndarray
    L: np.ndarray
    P: np.ndarray
    a: np.ndarray
    v: np.ndarray
    yhat: np.ndarray
    neg_loglik: float

    @property
    def n(self) -> int:
        return self.v.shape[0]


def kalman_filter(model: StateSpaceModel, series) -> KalmanOutput:
    """Run the prediction-form Kalman recursions.

    The negative log-likelihood is ``0.5 * sum(log det S_t + v_t' S_t^-1 v_t)``
    with the ``2 pi`` constant dropped.
    """
    y = as_series(series).values
    n, p = y.shape
    if p != model.p:
        raise DimensionError(f"series has dimension {p}, model expects {model.p}")
    Z, T, H, Q, c = model.Z, model.T, model.H, model.Q, model.c
    m = model.m
    F = np.empty((n, p, p))
    S_all = np.empty((n, p, p))
    K = np.empty((n, m, p))
    L = np.empty((n, m, m))
    P = np.empty((n + 1, m, m))
    a = np.empty((n + 1, m))
    v = np.empty((n, p))
    yhat = np.empty((n + 1, p))
    P[0] = model.P1
    a[0] = model.a1
    nll = 0.0
    for t in range(n):
        Pt = P[t]
        S = Z @ Pt @ Z.T + H
        S = 0.5 * (S + S.T)
        try:
            C = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(f"innovation covariance not positive definite at t={t + 1}")
        cd = np.diag(C)
        if (cd.max() / cd.min()) ** 2 > COND_LIMIT:
            raise np.linalg.LinAlgError(f"innovation covariance near-singular at t={t + 1}")
        Cinv = np.linalg.inv(C)
        Finv = Cinv.T @ Cinv
        Kt = T @ Pt @ Z.T @ Finv
        Lt = T - Kt @ Z
        yhat[t] = c + Z @ a[t]
        vt = y[t] - yhat[t]
        w = Cinv @ vt
        nll += np.sum(np.log(cd)) + 0.5 * (w @ w)
        a[t + 1] = T @ a[t] + Kt @ vt
        Pn = T @ Pt @ Lt.T + Q
        P[t + 1] = 0.5 * (Pn + Pn.T)
        F[t], S_all[t], K[t], L[t], v[t] = Finv, S, Kt, Lt, vt
    yhat[n] = c + Z @ a[n]
    return KalmanOutput(F, S_all, K, L, P, a, v, yhat, float(nll))


def scalar_neg_loglik(y: np.ndarray, Z: float, T: float, H: float, Q: float,
                      a1: float, P1: float, c: float = 0.0) -> float:
    """Fast path of :func:`kalman_filter` for ``p = m = 1`` returning only the
    negative log-likelihood.

    Once the variance recursion reaches its fixed point the gain is constant
    and the remaining state recursion is run as a linear filter.
    """
    from scipy.signal import lfilter

    y = np.asarray(y, dtype=float) - c
    n = y.shape[0]
    a, P, nll = a1, P1, 0.0
    t = 0
    while t < n:
        S = Z * Z * P + H
        if S <= 0:
            return math.inf
        K = T * P * Z / S
        v = float(y[t]) - Z * a
        nll += 0.5 * (math.log(S) + v * v / S)
        a = T * a + K * v
        P_next = T * P * (T - K * Z) + Q
        t += 1
        if abs(P_next - P) <= 1e-15 * abs(P):
            P = P_next
            break
        P = P_next
    if t < n:
        # steady state: a_{s+1} = L a_s + K y_s with constant L, K and S
        S = Z * Z * P + H
        K = T * P * Z / S
        L = T - K * Z
        rest = y[t:]
        # direct form II transposed: out[0] = zi, out[k] = L out[k-1] + K rest[k-1]
        states, _ = lfilter([0.0, K], [1.0, -L], rest, zi=[a])
        v = rest - Z * states
        nll += 0.5 * ((n - t) * math.log(S) + float(v @ v) / S)
    return nll


@dataclass
class PredictionWeights:
    """Linear weight form of the one-step forecasts.

    ``B[t, j-1]`` (``p x p``) is the weight on ``y_j`` in the forecast of
    ``y_{t+1}``; entries with ``j > t`` are zero.  ``init[t]`` is the
    initial-state contribution (including any observation intercept).
    Rows ``0 .. n`` are stored; ``d`` records the truncation depth.
    """

    B: np.ndarray
    init: np.ndarray
    d: int = 0

    @property
    def n(self) -> int:
        return self.B.shape[0] - 1

    def forecasts(self, y) -> np.ndarray:
        """``yhat[t] = sum_j B[t, j] y_j + init[t]`` for ``t = 0..n``."""
        y = as_series(y).values
        return np.einsum("tjab,jb->ta", self.B, y[: self.B.shape[1]]) + self.init

    @classmethod
    def from_rows(cls, rows, p: int = 1, d: int = 0) -> "PredictionWeights":
        """Build from a list of rows, row ``t`` holding ``b_{t,1..t}``."""
        n = len(rows) - 1
        B = np.zeros((n + 1, max(n, 1), p, p))
        for t, row in enumerate(rows):
            for j, b in enumerate(row):
                B[t, j] = np.asarray(b, dtype=float).reshape(p, p)
        return cls(B, np.zeros((n + 1, p)), d)


def prediction_weights(model: StateSpaceModel, n: int, d: int = 0,
                       filter_out: Optional[KalmanOutput] = None) -> PredictionWeights:
    """Materialise ``b_{t,j} = Z L_t ... L_{j+1} K_j`` and the offset
    ``c + Z L_t ... L_1 a1 - sum_j b_{t,j} c`` for ``t = 0..n``.

    The gains do not depend on the data, so ``filter_out`` may come from any
    series of length at least ``n``.
    """
    if filter_out is None:
        filter_out = kalman_filter(model, np.zeros((n, model.p)))
    if filter_out.n < n:
        raise ValueError("filter output shorter than n")
    Z, K, L = model.Z, filter_out.K, filter_out.L
    p, m = model.p, model.m
    B = np.zeros((n + 1, max(n, 1), p, p))
    init = np.empty((n + 1, p))
    G = np.zeros((0, m, p))  # G[j-1] = L_t ... L_{j+1} K_j for the current row t
    s = np.array(model.a1, dtype=float)
    init[0] = model.c + Z @ s
    for t in range(1, n + 1):
        Lt = L[t - 1]
        G = np.concatenate([np.einsum("ab,jbc->jac", Lt, G), K[t - 1][None]], axis=0)
        B[t, :t] = np.einsum("pa,jab->jpb", Z, G)
        s = Lt @ s
        init[t] = model.c + Z @ s - B[t, :t].sum(axis=0) @ model.c
    return PredictionWeights(B, init, d)


def _matrix_loss(loss: LossSpec, A: np.ndarray) -> float:
    """Loss applied to the operator 2-norm of a weight matrix."""
    nrm = float(np.linalg.norm(A, 2)) if A.size else 0.0
    return nrm * nrm if loss.kind == "squared" else nrm


def _ey1(EY1: Optional[float], loss: LossSpec) -> float:
    if EY1 is None:
        EY1 = loss.M
    if EY1 is None:
        raise ValueError("give EY1 or a loss with a moment bound M")
    if EY1 < 0:
        raise ValueError("EY1 must be nonnegative")
    return float(EY1)


@dataclass(frozen=True)
class DeltaD:
    first_term: float
    second_term: float

    @property
    def total(self) -> float:
        return self.first_term + self.second_term

    def __iter__(self):
        return iter((self.first_term, self.second_term, self.total))


def delta_d_statespace(
    model: StateSpaceModel,
    series,
    d: int,
    loss: LossSpec = SQUARED,
    EY1: Optional[float] = None,
    filter_out: Optional[KalmanOutput] = None,
    observation_weights: bool = False,
) -> DeltaD:
    """Truncation penalty of the Kalman predictor at memory ``d``.

    first  = Delta^2 EY1 sum_{j=1}^{n-d} || L_n ... L_{j+1} K_j ||
    second = Delta/(n-d-1) sum_{t=d+1}^{n-1} l( sum_{j=1}^{t-d} L_t ... L_{j+1} K_j y_j )

    Matrix norms are operator 2-norms.  ``y_j`` is the series net of the
    observation intercept.  With ``observation_weights`` the products are
    premultiplied by ``Z`` so the terms live in observation space.
    ``EY1`` bounds ``E l(Y_1)`` and defaults to the loss moment bound ``loss.M``.
    """
    EY1 = _ey1(EY1, loss)
    y = as_series(series).values
    n = y.shape[0]
    if not 1 <= d < n - 1:
        raise ValueError(f"need 1 <= d < n - 1, got d={d}, n={n}")
    if filter_out is None:
        filter_out = kalman_filter(model, y)
    K, L = filter_out.K, filter_out.L
    Zmap = model.Z if observation_weights else np.eye(model.m)
    yc = y - model.c
    m = model.m

    # first term: right-to-left products R_j = L_n ... L_{j+1}
    R = np.eye(m)
    first = 0.0
    for j in range(n, 0, -1):
        if j <= n - d:
            nrm = float(np.linalg.norm(Zmap @ R @ K[j - 1], 2))
            first += nrm
        R = R @ L[j - 1]
    first *= loss.delta**2 * EY1

    # second term: u_k = L_k u_{k-1} + K_k y_k holds the data part of the state
    u = np.zeros((n + 1, m))
    for k in range(1, n + 1):
        u[k] = L[k - 1] @ u[k - 1] + K[k - 1] @ yc[k - 1]
    second = 0.0
    for t in range(d + 1, n):
        s = u[t - d]
        for i in range(t - d + 1, t + 1):
            s = L[i - 1] @ s
        second += loss(Zmap @ s)
    second *= loss.delta / (n - d - 1)
    return DeltaD(first, second)


def delta_d_linear(B: PredictionWeights, series, d: int, loss: LossSpec = SQUARED,
                   EY1: Optional[float] = None) -> float:
    """Truncation penalty for an arbitrary linear growing-memory predictor.

    first  = Delta^2 EY1 sum_{j=1}^{n-d-1} l(b_{n,j})
    second = Delta/(n-d-1) sum_{i=d+1}^{n-1} l( sum_{j=1}^{i-d} b_{i,j} y_j )
    """
    EY1 = _ey1(EY1, loss)
    y = as_series(series).values
    n = B.n
    if y.shape[0] < n:
        raise ValueError("series shorter than the weight structure")
    if not 1 <= d < n - 1:
        raise ValueError(f"need 1 <= d < n - 1, got d={d}, n={n}")
    W = B.B
    for t in range(W.shape[0]):
        if np.any(W[t, t:] != 0):
            raise ValueError(f"weight row {t} puts weight on future observations")
    first = sum(_matrix_loss(loss, W[n, j - 1]) for j in range(1, n - d))
    second = 0.0
    for i in range(d + 1, n):
        s = np.einsum("jab,jb->a", W[i, : i - d], y[: i - d])
        second += loss(s)
    return float(loss.delta**2 * EY1 * first + loss.delta / (n - d - 1) * second)


def _sqrt_psd(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return V * np.sqrt(np.clip(w, 0.0, None))


def simulate_paths(model: StateSpaceModel, n: int, reps: int, rng) -> np.ndarray:
    """Draw ``reps`` independent paths; returns an array ``(reps, n, p)``."""
    p, m = model.p, model.m
    sq_P1, sq_Q, sq_H = _sqrt_psd(model.P1), _sqrt_psd(model.Q), _sqrt_psd(model.H)
    alpha = model.a1 + rng.standard_normal((reps, m)) @ sq_P1.T
    out = np.empty((reps, n, p))
    for t in range(n):
        out[:, t] = model.c + alpha @ model.Z.T + rng.standard_normal((reps, p)) @ sq_H.T
        alpha = alpha @ model.T.T + rng.standard_normal((reps, m)) @ sq_Q.T
    return out


def simulate_statespace(model: StateSpaceModel, n: int, seed: int = 0) -> TimeSeries:
    """Simulate one path of length ``n``; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    return TimeSeries(simulate_paths(model, n, 1, rng)[0], name="simulated")


class KalmanPredictor(Predictor):
    """One-step Kalman forecasts as a (growing-memory) predictor."""

    kind = "statespace"

    def __init__(self, model: StateSpaceModel, memory: int = 0):
        self.model = model
        self.memory = memory
        self.dim = model.p

    def predict_path(self, values):
        return kalman_filter(self.model, values).yhat[:-1]


class LinearWeightsPredictor(Predictor):
    """Predictor defined directly by a :class:`PredictionWeights` structure."""

    kind = "custom-linear"

    def __init__(self, weights: PredictionWeights, memory: int = 0):
        self.weights = weights
        self.memory = memory
        self.dim = weights.init.shape[1]

    def predict_path(self, values):
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        if n > self.weights.n:
            raise ValueError("series longer than the weight structure")
        return self.weights.forecasts(np.vstack([values, np.zeros((1, self.dim))])[: self.weights.n])[:n]
