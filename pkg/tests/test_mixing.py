import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsbounds.bounds import corollary_penalty
from tsbounds.mixing import (
    IBM_PROFILE,
    BlockingPlan,
    InfeasibleBlockingError,
    MixingProfile,
    beta_at,
    block_partition,
    choose_blocks,
    effective_eta,
    load_mixing_table,
)


def test_exponential_profile():
    prof = MixingProfile.exponential(2.0, 0.5, 1.0)
    assert beta_at(prof, 4) == pytest.approx(2.0 * math.exp(-2.0))
    assert beta_at(prof, 0) == 1.0  # clamped


def test_algebraic_profile():
    prof = MixingProfile.algebraic(1.0, 2.0)
    assert beta_at(prof, 10) == pytest.approx(0.01)


def test_table_lookup():
    assert beta_at(IBM_PROFILE, 8) == 0.017
    assert beta_at(IBM_PROFILE, 9) == 0.0
    assert beta_at(IBM_PROFILE, 50) == 0.0
    assert beta_at(IBM_PROFILE, 3) == 1.0  # below the table: trivial bound


@pytest.mark.parametrize("mapping", [{}, {1: 0.1, 2: 0.2}, {1: 1.5}])
def test_bad_tables(mapping):
    with pytest.raises(ValueError):
        MixingProfile.table(mapping)


def test_load_table(tmp_path):
    f = tmp_path / "beta.csv"
    f.write_text("gap,beta\n8,0.017\n9,0\n")
    assert load_mixing_table(f) == IBM_PROFILE


def test_partition_layout():
    odd, even = block_partition(n=20, d=1, a=3, mu=3)
    assert [list(r) for r in odd] == [[1, 2, 3], [7, 8, 9], [13, 14, 15]]
    assert [list(r) for r in even] == [[4, 5, 6], [10, 11, 12], [16, 17, 18]]


@settings(max_examples=200, deadline=None)
@given(a=st.integers(1, 30), mu=st.integers(1, 30), d=st.integers(0, 10), extra=st.integers(0, 20))
def test_partition_disjoint_and_sized(a, mu, d, extra):
    n = 2 * mu * a + d + extra
    odd, even = block_partition(n, d, a, mu)
    idx = [i for r in odd + even for i in r]
    assert len(idx) == len(set(idx)) == 2 * mu * a
    assert max(idx) <= n
    assert all(len(r) == a for r in odd + even)


def test_plan_feasibility():
    with pytest.raises(InfeasibleBlockingError):
        BlockingPlan(10, 10, 1, 200)
    BlockingPlan(10, 10, 0, 200)


def test_effective_eta():
    assert effective_eta(0.15, 538, 0.0) == 0.15
    assert effective_eta(0.15, 10, 0.001) == pytest.approx(0.13)
    with pytest.raises(InfeasibleBlockingError):
        effective_eta(0.15, 100, 0.001)


def test_choose_blocks_iid_prefers_many_blocks():
    plan = choose_blocks(1000, 0, MixingProfile.independent(), 0.15, 1)
    assert plan.a == 1 and plan.mu == 500


def test_choose_blocks_is_grid_minimum():
    prof = MixingProfile.exponential(1.0, 0.3)
    n, d, h = 800, 2, 3
    plan = choose_blocks(n, d, prof, 0.15, h)
    best = math.inf
    for a in range(d + 1, (n - d) // 2 + 1):
        mu = (n - d) // (2 * a)
        beta = beta_at(prof, a - d)
        if 0.15 - 2 * mu * beta <= 0:
            continue
        best = min(best, corollary_penalty(BlockingPlan(mu, a, d, n, beta), h, 0.15).eps)
    assert corollary_penalty(plan, h, 0.15).eps == best


def test_choose_blocks_infeasible():
    with pytest.raises(InfeasibleBlockingError):
        choose_blocks(100, 0, MixingProfile.constant(0.5), 0.15, 1)
