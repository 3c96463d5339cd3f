"""Box-constrained derivative-free minimisation shared by the likelihood fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class OptimizerConfig:
    maxiter: int = 4000
    xatol: float = 1e-8
    fatol: float = 1e-8
    initial_step: float = 0.05
    restarts: int = 1


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    converged: bool
    n_iter: int
    n_eval: int
    fun_init: float
    message: str = ""


def project(x, lower, upper) -> np.ndarray:
    return np.minimum(np.maximum(np.asarray(x, dtype=float), lower), upper)


def _initial_simplex(x0, lower, upper, step):
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        h = step * abs(x0[i]) if x0[i] != 0 else 0.00025
        y = x0[i] + h
        if y > upper[i]:
            y = x0[i] - h
        simplex[i + 1, i] = y
    return project(simplex, lower, upper)


def box_nelder_mead(
    fun: Callable[[np.ndarray], float],
    x0: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    config: Optional[OptimizerConfig] = None,
) -> OptimResult:
    """Nelder-Mead simplex search clipped to ``[lower, upper]``.

    The start point is projected into the box.  Non-finite objective values
    are treated as ``+inf`` so infeasible trial points are rejected.  With
    ``config.restarts > 1`` the search is restarted from its own optimum,
    which helps the simplex escape premature collapse.
    """
    config = config or OptimizerConfig()
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower >= upper):
        raise ValueError("each lower bound must be below its upper bound")
    x = project(x0, lower, upper)

    def safe(z):
        v = fun(z)
        return v if math.isfinite(v) else math.inf

    f_init = safe(x)
    n_iter = n_eval = 0
    converged = False
    message = ""
    best_x, best_f = x, f_init
    for _ in range(max(1, config.restarts)):
        res = minimize(
            safe,
            best_x,
            method="Nelder-Mead",
            bounds=list(zip(lower, upper)),
            options=dict(
                maxiter=config.maxiter,
                maxfev=4 * config.maxiter,
                xatol=config.xatol,
                fatol=config.fatol,
                initial_simplex=_initial_simplex(best_x, lower, upper, config.initial_step),
                adaptive=best_x.size > 4,
            ),
        )
        n_iter += res.nit
        n_eval += res.nfev
        converged = bool(res.success)
        message = res.message
        if res.fun <= best_f:
            best_x, best_f = project(res.x, lower, upper), float(res.fun)
    return OptimResult(best_x, best_f, converged, n_iter, n_eval, f_init, message)
