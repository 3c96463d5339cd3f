"""Shared data types: the observed sample, loss functions, predictors and
the time-series training error."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np

LossKind = Literal["squared", "absolute", "euclidean-norm"]

_TRIANGLE_CONSTANT = {"squared": 2.0, "absolute": 1.0, "euclidean-norm": 1.0}


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


@dataclass(frozen=True)
class TimeSeries:
    """An ordered ``n x p`` sample with an optional time index.

    One-dimensional input is promoted to a single column.
    """

    values: np.ndarray
    index: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionError(f"expected a non-empty n x p array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("series contains missing or non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.index is not None:
            index = tuple(self.index)
            if len(index) != values.shape[0]:
                raise ValueError("index length does not match number of observations")
            if any(b <= a for a, b in zip(index, index[1:])):
                raise ValueError("index must be strictly increasing")
            object.__setattr__(self, "index", index)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, j: int = 0) -> np.ndarray:
        return self.values[:, j]

    def __len__(self) -> int:
        return self.n


def as_series(data, name: str = "") -> TimeSeries:
    if isinstance(data, TimeSeries):
        return data
    return TimeSeries(np.asarray(data, dtype=float), name=name)


def read_series_csv(path, name: Optional[str] = None) -> TimeSeries:
    """Read a CSV with a header row; a non-numeric first column is taken
    as the date index."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    header, body = rows[0], rows[1:]

    def _is_number(s: str) -> bool:
        try:
            float(s)
            return True
        except ValueError:
            return False

    has_index = not all(_is_number(r[0]) for r in body)
    start = 1 if has_index else 0
    values = np.array([[float(c) for c in r[start:]] for r in body])
    index = tuple(r[0] for r in body) if has_index else None
    label = name if name is not None else ",".join(header[start:])
    return TimeSeries(values, index=index, name=label)


@dataclass(frozen=True)
class LossSpec:
    """Loss as a function of the forecast error.

    ``delta`` is the modified-triangle constant: ``l(x + y) <= delta (l(x) + l(y))``.
    ``K`` is an optional uniform bound and ``M`` a bound on the root second
    moment of the loss.
    """

    kind: LossKind = "squared"
    K: Optional[float] = None
    M: Optional[float] = None
    delta: float = field(default=None)  # type: ignore[assignment]
    submultiplicative: bool = True

    def __post_init__(self):
        if self.kind not in _TRIANGLE_CONSTANT:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        expected = _TRIANGLE_CONSTANT[self.kind]
        if self.delta is None:
            object.__setattr__(self, "delta", expected)
        elif self.delta != expected:
            raise ValueError(f"{self.kind} loss has triangle constant {expected}, got {self.delta}")
        for attr in ("K", "M"):
            v = getattr(self, attr)
            if v is not None and not v > 0:
                raise ValueError(f"{attr} must be positive")

    def __call__(self, residual) -> float:
        return loss_eval(self, residual)

    def rowwise(self, residuals: np.ndarray) -> np.ndarray:
        """Loss of each row of an ``m x p`` residual array."""
        r = np.asarray(residuals, dtype=float)
        if r.ndim == 1:
            r = r[:, None]
        if self.kind == "squared":
            return np.sum(r * r, axis=1)
        if self.kind == "absolute":
            return np.sum(np.abs(r), axis=1)
        return np.sqrt(np.sum(r * r, axis=1))


SQUARED = LossSpec("squared")
ABSOLUTE = LossSpec("absolute")
EUCLIDEAN = LossSpec("euclidean-norm")


def loss_eval(loss: LossSpec, residual, p: Optional[int] = None) -> float:
    """Evaluate ``loss`` at a single residual vector.

    For vector residuals the squared loss is the squared euclidean norm and
    the absolute loss the l1 norm.
    """
    r = np.atleast_1d(np.asarray(residual, dtype=float))
    if r.ndim != 1:
        raise DimensionError("residual must be a vector")
    if p is not None and r.shape[0] != p:
        raise DimensionError(f"residual has dimension {r.shape[0]}, expected {p}")
    return float(loss.rowwise(r[None, :])[0])


class Predictor:
    """A sequence of causal one-step forecasting functions.

    Subclasses implement :meth:`predict_path`; row ``t`` of its output is the
    forecast of observation ``t`` (0-based) built from ``values[:t]`` only.
    Rows that the predictor cannot produce (too little history) are NaN.
    ``memory`` is the fixed-memory length, or for growing-memory predictors
    the truncation depth used when bounding.
    """

    kind: str = "custom"
    memory: int = 0
    dim: Optional[int] = None

    def predict_path(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def forecast(self, history) -> np.ndarray:
        """Forecast of the observation following ``history``."""
        h = np.asarray(history, dtype=float)
        if h.ndim == 1:
            h = h[:, None]
        padded = np.vstack([h, np.zeros((1, h.shape[1]))])
        return self.predict_path(padded)[-1]


def _check_dim(series: TimeSeries, predictor: Predictor):
    if predictor.dim is not None and predictor.dim != series.p:
        raise DimensionError(
            f"predictor dimension {predictor.dim} does not match series dimension {series.p}"
        )


def training_error(
    series,
    predictor: Predictor,
    d: int,
    loss: LossSpec = SQUARED,
    normalization: Literal["shifted", "mean"] = "shifted",
) -> float:
    """Average in-sample one-step loss over forecast origins ``d .. n-1``.

    The ``n - d`` one-step losses are divided by ``n - d - 1`` by default;
    ``normalization="mean"`` divides by ``n - d`` instead.
    """
    series = as_series(series)
    _check_dim(series, predictor)
    n = series.n
    if d < 0:
        raise ValueError("d must be nonnegative")
    if normalization not in ("shifted", "mean"):
        raise ValueError(f"unknown normalization {normalization!r}")
    denom = n - d - 1 if normalization == "shifted" else n - d
    if n - d - 1 <= 0:
        raise ValueError(f"need n - d - 1 > 0, got n={n}, d={d}")
    preds = np.asarray(predictor.predict_path(series.values), dtype=float)
    if preds.ndim == 1:
        preds = preds[:, None]
    if preds.shape != series.values.shape:
        raise DimensionError(f"predictor returned shape {preds.shape}, expected {series.values.shape}")
    resid = series.values[d:] - preds[d:]
    if not np.all(np.isfinite(resid)):
        raise ValueError(f"predictor cannot forecast from origin d={d}")
    return float(np.sum(loss.rowwise(resid)) / denom)


class ConstantPredictor(Predictor):
    """Forecasts a fixed vector regardless of history (``memory = 0``)."""

    kind = "mean"
    memory = 0

    def __init__(self, value):
        self.value = np.atleast_1d(np.asarray(value, dtype=float))
        self.dim = self.value.shape[0]

    def predict_path(self, values):
        values = np.asarray(values, dtype=float)
        return np.broadcast_to(self.value, (values.shape[0], self.value.shape[0])).copy()
