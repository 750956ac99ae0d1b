import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from flexsector.allocation import exhaustive_alloc, solve_continuous
from flexsector.analysis import sum_rate_interior
from flexsector.errors import DomainError, InfeasibleError
from flexsector.geometry import CellConfig, ZoneProfile
from flexsector.planner import (equal_split, make_plan, optimize_flexible, plan_alloc_only,
                                plan_fixed, plan_rotation_only, rate_trace, sector_loads)
from flexsector.rates import max_min_rate


def test_flexible_example_distribution_I(dist1):
    cfg = dist1.cfg.replace(min_rate=0.0)
    plan = optimize_flexible(cfg, dist1.profile)
    assert plan.z0 == 6
    assert sector_loads(cfg, dist1.profile, 6).tolist() == [10, 30, 10]
    best = solve_continuous([10, 30, 10], 90, 0.0, 3, 1.0).sum_rate
    first = solve_continuous([10, 20, 20], 90, 0.0, 3, 1.0).sum_rate
    assert best == pytest.approx(sum_rate_interior([10, 30, 10], 50, 90, 3, 1.0), abs=1e-9)
    assert best == pytest.approx(278.58, abs=0.01)
    assert first == pytest.approx(271.03, abs=0.01)
    assert plan.sum_rate <= best
    assert plan.sum_rate == max(plan.trace)


def test_flexible_plan_with_min_rate(dist1):
    plan = optimize_flexible(dist1.cfg, dist1.profile)
    assert plan.feasible
    assert sum(plan.n) == 90
    assert plan.z0 == 6 and plan.n == (21, 48, 21)


def test_uniform_profile():
    cfg = CellConfig(N=60, B=3, Z=12, gamma0=2.0, min_rate=1.0)
    profile = ZoneProfile((2.0,) * 12)
    plan = optimize_flexible(cfg, profile)
    assert plan.z0 == 1
    assert max(plan.trace) - min(plan.trace) < 1e-9
    assert plan_alloc_only(cfg, profile).sum_rate == pytest.approx(plan.sum_rate, abs=1e-12)
    rot = plan_rotation_only(cfg, profile)
    K, N, B, g = 24, 60, 3, 2.0
    assert rot.sum_rate == pytest.approx(K * math.log2(1 + B * g * (N / B - K / B)), rel=1e-12)


def test_single_sector():
    cfg = CellConfig(N=40, B=1, Z=6)
    profile = ZoneProfile((1.0, 5.0, 0.0, 2.0, 3.0, 1.0))
    plan = optimize_flexible(cfg, profile)
    assert plan.n == (40,)
    assert plan.z0 == 1
    assert len(set(plan.trace)) == 1


def test_alloc_only_and_fixed(dist1, dist2):
    flex = optimize_flexible(dist1.cfg, dist1.profile)
    alloc = plan_alloc_only(dist1.cfg, dist1.profile)
    assert alloc.z0 == 1
    assert alloc.sum_rate == flex.trace[0]
    flex2 = optimize_flexible(dist2.cfg, dist2.profile)
    assert plan_alloc_only(dist2.cfg, dist2.profile).sum_rate < flex2.sum_rate
    fixed = plan_fixed(dist1.cfg, dist1.profile)
    assert fixed.n == (30, 30, 30) and fixed.z0 == 1


def test_rotation_only_distribution_I(dist1):
    plan = plan_rotation_only(dist1.cfg, dist1.profile)
    assert plan.n == (30, 30, 30)
    # the best rotation is the most balanced one
    spreads = [np.ptp(sector_loads(dist1.cfg, dist1.profile, z0)) for z0 in range(1, 11)]
    assert np.ptp(sector_loads(dist1.cfg, dist1.profile, plan.z0)) == min(spreads)


def test_rotation_only_flags_overloaded_sector():
    cfg = CellConfig(N=90, B=3, Z=6)
    profile = ZoneProfile((40.0, 1.0, 1.0, 1.0, 1.0, 1.0))
    plan = plan_rotation_only(cfg, profile)
    assert not plan.feasible
    assert 0.0 in plan.report.sector_sum


def test_equal_split_remainder():
    assert equal_split(10, 3).tolist() == [4, 3, 3]


def test_strict_infeasibility(dist1):
    too_high = dist1.cfg.replace(min_rate=max_min_rate(90, 50, 1.0) + 0.01)
    with pytest.raises(InfeasibleError):
        optimize_flexible(too_high, dist1.profile)
    lenient = optimize_flexible(too_high, dist1.profile, strict=False)
    assert not lenient.feasible


def test_make_plan_unknown_policy(dist1):
    with pytest.raises(DomainError):
        make_plan("random", dist1.cfg, dist1.profile)


def test_plan_json_clean(dist2):
    cfg = dist2.cfg.replace(B=15)
    plan = optimize_flexible(cfg, dist2.profile, strict=False)
    json.dumps(plan.to_dict(), allow_nan=False)


@pytest.mark.parametrize("B", [1, 2, 3, 5, 6, 10, 15, 30])
def test_trace_periodicity(dist2, B):
    cfg = dist2.cfg.replace(B=B, min_rate=2.0)
    c = cfg.c
    rates, flags, _ = rate_trace(cfg, dist2.profile, range(1, 2 * c + 1))
    for z0 in range(1, c + 1):
        a, b = rates[z0 - 1], rates[z0 - 1 + c]
        assert (math.isnan(a) and math.isnan(b)) or abs(a - b) <= 1e-9
        assert flags[z0 - 1] == flags[z0 - 1 + c]


def _profile(data, Z):
    k = data.draw(st.lists(st.integers(0, 4), min_size=Z, max_size=Z))
    assume(sum(k) > 0)
    return ZoneProfile(tuple(float(x) for x in k))


@settings(max_examples=60, deadline=None)
@given(st.data(), st.sampled_from([1, 2, 3, 4, 6]), st.integers(0, 40), st.floats(0, 1))
def test_dominance_chain(data, B, extra, frac):
    profile = _profile(data, 12)
    N = int(profile.K) + B + extra
    cfg = CellConfig(N=N, B=B, Z=12, min_rate=frac * max_min_rate(N, profile.K, 1.0))
    plans = {p: make_plan(p, cfg, profile, strict=False)
             for p in ("flexible", "alloc-only", "rotation-only", "fixed")}
    assume(all(p.feasible for p in plans.values()))
    R = {k: v.sum_rate for k, v in plans.items()}
    assert R["flexible"] >= R["alloc-only"] >= R["fixed"]
    assert R["flexible"] >= R["rotation-only"] >= R["fixed"]


@settings(max_examples=40, deadline=None)
@given(st.data(), st.sampled_from([1, 2, 3]), st.integers(0, 8), st.floats(0, 1))
def test_flexible_matches_joint_search(data, B, extra, frac):
    profile = _profile(data, 6)
    N = int(profile.K) + B + extra
    cfg = CellConfig(N=N, B=B, Z=6, min_rate=frac * max_min_rate(N, profile.K, 1.0))
    try:
        plan = optimize_flexible(cfg, profile)
    except InfeasibleError:
        assume(False)
    best = -math.inf
    for z0 in range(1, cfg.c + 1):
        q = sector_loads(cfg, profile, z0)
        try:
            best = max(best, exhaustive_alloc(q, N, cfg.min_rate, B, 1.0).sum_rate)
        except InfeasibleError:
            pass
    assert plan.sum_rate == pytest.approx(best, abs=1e-9)
