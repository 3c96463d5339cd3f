"""Beta-mixing profiles and the independent-block decomposition."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np


class InfeasibleBlockingError(ValueError):
    """No blocking plan satisfies the sample-size or confidence constraints."""


@dataclass(frozen=True)
class MixingProfile:
    """Mixing coefficient ``beta_a`` as a function of the gap ``a``.

    Use the constructors :meth:`exponential`, :meth:`algebraic`, :meth:`table`
    and :meth:`independent` rather than calling this directly.
    """

    kind: Literal["exponential", "algebraic", "table"]
    params: Tuple[float, ...] = ()
    gaps: Tuple[int, ...] = ()
    betas: Tuple[float, ...] = ()

    @classmethod
    def exponential(cls, c1: float, c2: float, kappa: float = 1.0) -> "MixingProfile":
        """``beta_a = c1 * exp(-c2 * a**kappa)``."""
        if min(c1, c2, kappa) <= 0:
            raise ValueError("exponential profile constants must be positive")
        return cls("exponential", (float(c1), float(c2), float(kappa)))

    @classmethod
    def algebraic(cls, c1: float, r: float) -> "MixingProfile":
        """``beta_a = c1 * a**(-r)``."""
        if c1 <= 0 or r <= 0:
            raise ValueError("algebraic profile constants must be positive")
        return cls("algebraic", (float(c1), float(r)))

    @classmethod
    def table(cls, mapping: Dict[int, float]) -> "MixingProfile":
        if not mapping:
            raise ValueError("empty mixing table")
        items = sorted((int(a), float(b)) for a, b in mapping.items())
        gaps = tuple(a for a, _ in items)
        betas = tuple(b for _, b in items)
        if gaps[0] < 0:
            raise ValueError("negative gap in mixing table")
        if any(not 0.0 <= b <= 1.0 for b in betas):
            raise ValueError("tabulated beta outside [0, 1]")
        if any(b2 > b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("tabulated beta must be nonincreasing in the gap")
        return cls("table", gaps=gaps, betas=betas)

    @classmethod
    def independent(cls) -> "MixingProfile":
        """beta identically zero (IID data)."""
        return cls.table({0: 0.0})

    @classmethod
    def constant(cls, beta: float) -> "MixingProfile":
        return cls.table({0: beta})


# IBM daily volatility: beta_8 estimated at 0.017, zero beyond.
IBM_PROFILE = MixingProfile.table({8: 0.017, 9: 0.0})


def load_mixing_table(path) -> MixingProfile:
    """Read a two-column ``gap,beta`` CSV (header optional)."""
    mapping = {}
    with Path(path).open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                gap, beta = int(row[0]), float(row[1])
            except ValueError:
                continue
            mapping[gap] = beta
    return MixingProfile.table(mapping)


def beta_at(profile: MixingProfile, a: int) -> float:
    """Mixing coefficient at gap ``a``, clamped to [0, 1].

    Tabulated profiles return the last tabulated value beyond the table and
    1 (the trivial bound) for gaps below the first entry.
    """
    if a < 0:
        raise ValueError(f"gap must be nonnegative, got {a}")
    if profile.kind == "exponential":
        c1, c2, kappa = profile.params
        b = c1 * math.exp(-c2 * a**kappa)
    elif profile.kind == "algebraic":
        c1, r = profile.params
        b = 1.0 if a == 0 else c1 * a ** (-r)
    else:
        i = int(np.searchsorted(profile.gaps, a, side="right")) - 1
        b = 1.0 if i < 0 else profile.betas[i]
    return min(max(b, 0.0), 1.0)


@dataclass(frozen=True)
class BlockingPlan:
    """``mu`` pairs of blocks of length ``a`` carved out of ``n`` observations
    with memory ``d``; ``beta_gap`` is ``beta_{a-d}``."""

    mu: int
    a: int
    d: int
    n: int
    beta_gap: float = 0.0

    def __post_init__(self):
        if self.mu < 1 or self.a < 1 or self.d < 0:
            raise ValueError("need mu >= 1, a >= 1, d >= 0")
        if 2 * self.mu * self.a + self.d > self.n:
            raise InfeasibleBlockingError(
                f"2*mu*a + d = {2 * self.mu * self.a + self.d} exceeds n = {self.n}"
            )
        if not 0.0 <= self.beta_gap <= 1.0:
            raise ValueError("beta_gap must lie in [0, 1]")

    @classmethod
    def from_profile(cls, mu: int, a: int, d: int, n: int, profile: MixingProfile) -> "BlockingPlan":
        if a <= d:
            raise ValueError("block length must exceed the memory d")
        return cls(mu, a, d, n, beta_at(profile, a - d))


def block_partition(n: int, d: int, a: int, mu: int) -> Tuple[List[range], List[range]]:
    """Odd blocks ``U_j`` and even blocks ``V_j`` as 1-based index ranges.

    ``U_j = 2(j-1)a+1 .. (2j-1)a`` and ``V_j = (2j-1)a+1 .. 2ja``; indices
    after ``2 mu a`` are left unassigned.
    """
    if mu < 1 or a < 1:
        raise ValueError("need mu >= 1 and a >= 1")
    if 2 * mu * a + d > n:
        raise InfeasibleBlockingError(f"2*mu*a + d = {2 * mu * a + d} exceeds n = {n}")
    odd = [range(2 * (j - 1) * a + 1, (2 * j - 1) * a + 1) for j in range(1, mu + 1)]
    even = [range((2 * j - 1) * a + 1, 2 * j * a + 1) for j in range(1, mu + 1)]
    return odd, even


def effective_eta(eta: float, mu: int, beta_gap: float) -> float:
    """Confidence left after paying ``2 mu beta`` for the blocking."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    eta_prime = eta - 2 * mu * beta_gap
    if eta_prime <= 0:
        raise InfeasibleBlockingError(
            f"eta' = {eta_prime:.6g} <= 0: dependence too strong for the requested "
            "confidence; use longer blocks or a larger eta"
        )
    return eta_prime


def choose_blocks(
    n: int,
    d: int,
    profile: MixingProfile,
    eta: float,
    vcd: int,
    M: float = 1.0,
    variant: str = "as-printed",
) -> BlockingPlan:
    """Grid search over block lengths for the plan with the smallest penalty.

    For each ``a`` in ``d+1 .. (n-d)//2`` the number of block pairs is
    ``(n-d) // (2a)``.  Plans with nonpositive effective confidence are
    dropped; ties go to the smaller ``a``.
    """
    from .bounds import corollary_penalty

    if n <= d + 2:
        raise ValueError("need n > d + 2")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    best: Optional[Tuple[float, BlockingPlan]] = None
    for a in range(d + 1, (n - d) // 2 + 1):
        mu = (n - d) // (2 * a)
        if mu < 1:
            break
        beta = beta_at(profile, a - d)
        if eta - 2 * mu * beta <= 0:
            continue
        plan = BlockingPlan(mu, a, d, n, beta)
        eps = corollary_penalty(plan, vcd, eta, M, variant).eps
        if best is None or eps < best[0]:
            best = (eps, plan)
    if best is None:
        raise InfeasibleBlockingError("no blocking plan attains a positive effective confidence")
    return best[1]
