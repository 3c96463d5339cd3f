"""Closed-form risk bounds for dependent data.

The central result controls, with probability at least ``1 - eta``, the gap
between expected and in-sample risk of every predictor in a class of finite
VC dimension ``h``, using ``mu`` pairs of blocks of length ``a``::

    P(sup (R - R_hat)/Q > eps) <= 8 (2 mu + 1)^h exp(-mu g(eps) / 4) + 2 mu beta_{a-d}

with ``g(eps) = exp(W_{-1}(-2 eps^2 / e^4) + 4)``.  Since ``W e^W = x`` gives
``g (4 - log g) = 2 eps^2``, the bound inverts in closed form to
``eps = M sqrt(E (4 - log E) / 2)`` for the appropriate ``E``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .capacity import finite_vcd
from .mixing import BlockingPlan, effective_eta

Variant = Literal["as-printed", "exact-inversion"]

E3 = math.exp(3.0)
EPS_MAX = math.sqrt(E3 / 2.0)  # largest eps for which W_{-1}(-2 eps^2/e^4) is real
_BRANCH_POINT = -math.exp(-1.0)


def lambert_w_minus1(x: float, tol: float = 1e-15, max_iter: int = 100) -> float:
    """Lower real branch of the Lambert W function.

    Returns the ``w <= -1`` solving ``w * exp(w) = x`` for ``x`` in
    ``[-1/e, 0)``, refined by Halley's method.
    """
    x = float(x)
    if not (_BRANCH_POINT - 1e-15 <= x < 0.0):
        raise ValueError(f"W_-1 is real only on [-1/e, 0), got {x!r}")
    if x <= _BRANCH_POINT:
        return -1.0
    if x > -0.25:
        lx = math.log(-x)
        w = lx - math.log(-lx)
    else:
        # series about the branch point
        p = -math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_new = w - step
        if w_new > -1.0:
            w_new = -1.0 - 0.5 * abs(wp1)
        if abs(w_new - w) <= tol * abs(w_new):
            w = w_new
            break
        w = w_new
    return w


def exact_exponent(eps: float) -> float:
    """``exp(W_{-1}(-2 eps^2 / e^4) + 4)``, increasing from 0 to ``e^3``."""
    if eps == 0:
        return 0.0
    x = -2.0 * eps * eps / math.e**4
    return math.exp(lambert_w_minus1(x) + 4.0)


def simplified_exponent(eps: float) -> float:
    """``eps^(8/3) / 4^(2/3)``; a lower bound on :func:`exact_exponent` for
    ``eps`` in ``(0, 1]``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return eps ** (8.0 / 3.0) / 4.0 ** (2.0 / 3.0)


def _check_eps(eps: float):
    if not 0.0 < eps <= EPS_MAX * (1 + 1e-15):
        raise ValueError(f"eps must lie in (0, sqrt(e^3/2)] = (0, {EPS_MAX:.6f}], got {eps}")


def theorem1_log_term(eps: float, mu: int, vcd, exponent: str = "exact") -> float:
    """Log of the block-VC term ``8 (2mu+1)^h exp(-mu g(eps)/4)``."""
    _check_eps(eps)
    h = finite_vcd(vcd)
    g = exact_exponent(eps) if exponent == "exact" else simplified_exponent(eps)
    return math.log(8.0) + h * math.log(2 * mu + 1) - mu * g / 4.0


def theorem1_rhs(eps: float, mu: int, vcd, beta_gap: float = 0.0, exponent: str = "exact") -> float:
    """Probability bound on the normalised risk gap exceeding ``eps``.

    Values of 1 or more are vacuous; see :func:`is_trivial_probability`.
    ``exponent="simplified"`` swaps in :func:`simplified_exponent`.
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    log_term = theorem1_log_term(eps, mu, vcd, exponent)
    return max(math.exp(log_term) + 2 * mu * beta_gap, 0.0)


def is_trivial_probability(p: float) -> bool:
    return p >= 1.0


@dataclass(frozen=True)
class Penalty:
    eps: float
    E: float
    trivial: bool
    eta_prime: float


def penalty_from_E(E: float, M: float) -> float:
    return M * math.sqrt(E * (4.0 - math.log(E)) / 2.0)


def corollary_penalty(
    plan: BlockingPlan,
    vcd,
    eta: float,
    M: float = 1.0,
    variant: Variant = "as-printed",
) -> Penalty:
    """Complexity penalty ``eps = M sqrt(E (4 - log E)/2)`` at confidence ``1 - eta``.

    ``as-printed`` uses ``E = (4 h log(2mu+1) + log(8/eta'))/mu``;
    ``exact-inversion`` multiplies the confidence term by 4, which is the
    exact algebraic inverse of :func:`theorem1_rhs`.  When ``E > e^3`` no
    ``eps`` attains the requested confidence: the result is flagged trivial
    and ``eps`` saturates at ``M sqrt(e^3/2)``.
    """
    h = finite_vcd(vcd)
    if M <= 0:
        raise ValueError("M must be positive")
    eta_prime = effective_eta(eta, plan.mu, plan.beta_gap)
    conf = math.log(8.0 / eta_prime)
    if variant == "as-printed":
        num = 4 * h * math.log(2 * plan.mu + 1) + conf
    elif variant == "exact-inversion":
        num = 4 * h * math.log(2 * plan.mu + 1) + 4 * conf
    else:
        raise ValueError(f"unknown variant {variant!r}")
    E = num / plan.mu
    if E > E3:
        return Penalty(M * EPS_MAX, E, True, eta_prime)
    return Penalty(penalty_from_E(E, M), E, False, eta_prime)


@dataclass(frozen=True)
class BoundInputs:
    plan: BlockingPlan
    vcd: int
    eta: float
    M: float
    train_err: float = 0.0
    delta_d: float = 0.0

    def __post_init__(self):
        finite_vcd(self.vcd)
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.train_err < 0 or self.delta_d < 0:
            raise ValueError("training error and delta_d must be nonnegative")
        effective_eta(self.eta, self.plan.mu, self.plan.beta_gap)


@dataclass(frozen=True)
class BoundReport:
    """Risk bound for one fitted predictor.

    If ``trivial`` the penalty is the saturation value, and the report should
    be read as carrying an unbounded penalty.
    """

    train_err: float
    delta_d: float
    penalty_eps: float
    total_bound: float
    eta: float
    eta_prime: float
    plan: BlockingPlan
    vcd: int
    E: float
    M: float
    variant: str
    trivial: bool

    @property
    def confidence(self) -> float:
        return 1.0 - self.eta

    def as_row(self) -> dict:
        row = {k: v for k, v in asdict(self).items() if k != "plan"}
        row.update(mu=self.plan.mu, a=self.plan.a, d=self.plan.d, n=self.plan.n, beta_gap=self.plan.beta_gap)
        return row

    def to_text(self) -> str:
        pen = f"{self.penalty_eps:.6g}"
        if self.trivial:
            pen = f"inf (trivial; saturated at {self.penalty_eps:.6g})"
        lines = [
            f"training error   {self.train_err:.6g}",
            f"delta_d          {self.delta_d:.6g}",
            f"penalty          {pen}",
            f"risk bound       {self.total_bound:.6g}",
            f"confidence       {self.confidence:.6g} (eta'={self.eta_prime:.6g})",
            f"plan             mu={self.plan.mu} a={self.plan.a} d={self.plan.d} n={self.plan.n} "
            f"beta={self.plan.beta_gap:.6g}",
            f"vcd={self.vcd} M={self.M:.6g} E={self.E:.6g} variant={self.variant}",
        ]
        return "\n".join(lines)


def risk_bound(inputs: BoundInputs, variant: Variant = "as-printed") -> BoundReport:
    """Training error plus truncation term plus complexity penalty."""
    pen = corollary_penalty(inputs.plan, inputs.vcd, inputs.eta, inputs.M, variant)
    total = inputs.train_err + inputs.delta_d + pen.eps
    return BoundReport(
        train_err=inputs.train_err,
        delta_d=inputs.delta_d,
        penalty_eps=pen.eps,
        total_bound=total,
        eta=inputs.eta,
        eta_prime=pen.eta_prime,
        plan=inputs.plan,
        vcd=int(inputs.vcd),
        E=pen.E,
        M=inputs.M,
        variant=variant,
        trivial=pen.trivial,
    )


def hoeffding_bound(n: int, eps: float, K: float) -> float:
    """Two-sided Hoeffding bound ``2 exp(-2 n eps^2 / K^2)`` for a single
    predictor with loss in ``[0, K]``."""
    if n < 1 or eps <= 0 or K <= 0:
        raise ValueError("need n >= 1, eps > 0, K > 0")
    return 2.0 * math.exp(-2.0 * n * eps * eps / (K * K))


def iid_vc_bound(n: int, vcd, eta: float, K1: float = 1.0) -> float:
    """IID uniform deviation ``K1 sqrt((h log(2n+1) + log(4/eta)) / n)``."""
    h = finite_vcd(vcd)
    if n < 1 or not 0 < eta or K1 <= 0:
        raise ValueError("need n >= 1, eta > 0, K1 > 0")
    return K1 * math.sqrt((h * math.log(2 * n + 1) + math.log(4.0 / eta)) / n)


def bounded_beta_bound(eps: float, mu: int, vcd, K1: float, beta_gap: float = 0.0) -> float:
    """Blocked bound for losses bounded by ``K``:
    ``8 (2mu+1)^h exp(-mu eps^2 / K1^2) + 2 mu beta``."""
    h = finite_vcd(vcd)
    if eps <= 0 or mu < 1 or K1 <= 0 or beta_gap < 0:
        raise ValueError("arguments must be positive")
    log_term = math.log(8.0) + h * math.log(2 * mu + 1) - mu * eps * eps / (K1 * K1)
    return math.exp(log_term) + 2 * mu * beta_gap


@dataclass(frozen=True)
class OracleRates:
    lower: float
    upper: float
    a_n: float
    mu_n: float


def oracle_rates(n: int, vcd, kappa: float, c: float = 1.0, C: float = 1.0) -> OracleRates:
    """Minimax rates for ERM under exponential mixing of order ``kappa``,
    with the balancing block schedule ``a_n = n^(1/(1+kappa))``,
    ``mu_n = n^(kappa/(1+kappa))``."""
    h = finite_vcd(vcd)
    if n < 2 or kappa <= 0 or c <= 0 or C <= 0:
        raise ValueError("need n >= 2 and positive kappa, c, C")
    if math.isinf(kappa):
        a_n, mu_n = 1.0, float(n)
    else:
        a_n = n ** (1.0 / (1.0 + kappa))
        mu_n = n ** (kappa / (1.0 + kappa))
    lower = c * math.sqrt(h / n)
    upper = C * math.sqrt(h * math.log(n) / mu_n)
    return OracleRates(lower, upper, a_n, mu_n)


@dataclass
class TradeoffGrid:
    """``log_prob[i, j]`` is ``log(min(RHS(eps_j; mu_i), 1))``; ``boundary[i]``
    is the smallest ``eps`` with ``RHS <= 1`` at ``mu_i`` (NaN if none)."""

    mu: np.ndarray
    eps: np.ndarray
    log_prob: np.ndarray
    boundary: np.ndarray
    vcd: int
    beta_gap: float
    exponent: str = "exact"

    def write_csv(self, grid_path, boundary_path=None):
        with Path(grid_path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu", "eps", "log_prob"])
            for i, mu in enumerate(self.mu):
                for j, eps in enumerate(self.eps):
                    w.writerow([int(mu), f"{eps:.6g}", f"{self.log_prob[i, j]:.6g}"])
        if boundary_path is not None:
            with Path(boundary_path).open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["mu", "eps_boundary"])
                for mu, b in zip(self.mu, self.boundary):
                    w.writerow([int(mu), f"{b:.6g}"])


def trivial_boundary(mu: int, vcd, beta_gap: float = 0.0, exponent: str = "exact") -> float:
    """Smallest ``eps`` for which the probability bound drops to 1."""
    h = finite_vcd(vcd)
    slack = 1.0 - 2 * mu * beta_gap
    if slack <= 0:
        return math.nan
    G = 4.0 * (math.log(8.0) + h * math.log(2 * mu + 1) - math.log(slack)) / mu
    if exponent == "exact":
        if G > E3:
            return math.nan
        return math.sqrt(G * (4.0 - math.log(G)) / 2.0)
    return (4.0 ** (2.0 / 3.0) * G) ** (3.0 / 8.0)


def tradeoff_grid(
    mu_range: Sequence[int],
    eps_range: Sequence[float],
    vcd,
    beta_gap: float = 0.0,
    exponent: str = "exact",
) -> TradeoffGrid:
    """Evaluate the log probability bound over a (mu, eps) grid."""
    h = finite_vcd(vcd)
    mu = np.asarray(list(mu_range), dtype=int)
    eps = np.asarray(list(eps_range), dtype=float)
    if mu.size == 0 or eps.size == 0:
        raise ValueError("empty grid")
    g = np.array([exact_exponent(e) if exponent == "exact" else simplified_exponent(e) for e in eps])
    for e in eps:
        _check_eps(e)
    log_prob = np.empty((mu.size, eps.size))
    for i, m in enumerate(mu):
        log_term = math.log(8.0) + h * math.log(2 * m + 1) - m * g / 4.0
        if beta_gap > 0:
            log_term = np.logaddexp(log_term, math.log(2 * m * beta_gap))
        log_prob[i] = np.minimum(log_term, 0.0)
    boundary = np.array([trivial_boundary(int(m), h, beta_gap, exponent) for m in mu])
    return TradeoffGrid(mu, eps, log_prob, boundary, h, beta_gap, exponent)
