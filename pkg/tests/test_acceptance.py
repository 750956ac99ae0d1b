"""Acceptance criteria, one check per criterion at its stated tolerance.

Each test prints a PASS/FAIL line (collected again in the terminal summary)
and fails if either the property or its runtime budget is missed.
"""

import io
import json
import math
import sys
import time

import numpy as np
import pytest

from conftest import record_acceptance
from flexsector.allocation import (LN2, exhaustive_alloc, integer_minima, round_allocation,
                                   solve_continuous)
from flexsector.analysis import (enumerate_user_splits, extremal_distributions, regime_info,
                                 sector_split_compare, sum_rate_interior, theorem1_gap)
from flexsector.cli import main
from flexsector.experiments import validate_bounds
from flexsector.geometry import db_to_linear
from flexsector.planner import make_plan, rate_trace
from flexsector.rates import max_min_rate
from flexsector.scenarios import scenario_distribution_I, scenario_distribution_II

# frozen oracle values: 50 log2(121) and 50 log2(41)
R_MAX_REF = 345.94316186372976
R_MIN_REF = 267.8776002309042
SECTOR_COUNTS = (2, 3, 5, 6, 10, 15, 30)


def check(label, ok, detail, started, budget):
    elapsed = time.perf_counter() - started
    in_time = elapsed <= budget
    passed = bool(ok) and in_time
    line = f"{detail}; {elapsed:.2f}s of {budget:g}s"
    record_acceptance(label, passed, line)
    print(f"{'PASS' if passed else 'FAIL'}  {label}  {line}")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.2f}s exceeds {budget:g}s"


@pytest.mark.slow
def test_1_rate_bounds_sandwich():
    started = time.perf_counter()
    grid = [(n_b, q_b, B, g_db)
            for n_b, q_b in ((10, 5), (20, 10), (40, 20), (60, 50), (90, 50))
            for B in (1, 3) for g_db in (0.0, 10.0)]
    report = validate_bounds(grid, trials=100_000, seed=0, margin=3.0)
    sandwich = sum(r.passed for r in report.rows)
    wishart = [abs(r.inv_gram_mean / r.inv_gram_expected - 1) for r in report.rows
               if r.N_b - r.Q_b >= 2]
    ok = sandwich == len(grid) and max(wishart) <= 0.02
    check("1 rate-bound sandwich", ok,
          f"{sandwich}/{len(grid)} points inside bounds, worst Wishart error "
          f"{100 * max(wishart):.3f}%", started, 120)


def test_2_continuous_allocator():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_budget = worst_kkt = worst_closed = 0.0
    interior = 0
    for _ in range(500):
        B = int(rng.integers(1, 7))
        q = rng.uniform(0.5, 60.0 / B, B)
        K = float(q.sum())
        N = int(rng.integers(math.floor(K) + 1, 121))
        g = db_to_linear(rng.uniform(-5, 15))
        rbar = rng.uniform() * max_min_rate(N, K, g)
        cont = solve_continuous(q, N, rbar, B, g)
        n = cont.array
        worst_budget = max(worst_budget, abs(math.fsum(n.tolist()) - N))
        for b in range(B):
            if b not in cont.binding:
                mult = q[b] / (LN2 * (n[b] - q[b] + 1 / (B * g)))
                worst_kkt = max(worst_kkt, abs(mult / cont.nu - 1))
        info = regime_info(q, N, B, g, rbar)
        if info.interior:
            interior += 1
            worst_closed = max(worst_closed, float(np.max(np.abs(n - info.n))),
                               abs(cont.nu / info.nu - 1))
    ok = worst_budget <= 1e-9 and worst_kkt <= 1e-6 and worst_closed <= 1e-9
    check("2 continuous allocator", ok,
          f"budget residual {worst_budget:.1e}, KKT error {worst_kkt:.1e}, closed-form "
          f"error {worst_closed:.1e} on {interior} interior instances", started, 10)


def test_3_integer_rounding():
    started = time.perf_counter()
    rng = np.random.default_rng(7)
    ratios, infeasible, relax_fail, accepted = [], 0, 0, 0
    while accepted < 500:
        B = int(rng.integers(1, 5))
        q = rng.integers(0, 7, B).astype(float)
        K = q.sum()
        if K == 0 or K >= 24:
            continue
        N = int(rng.integers(int(K) + 1, 25))
        g = db_to_linear(rng.uniform(-5, 15))
        rbar = rng.uniform() * max_min_rate(N, K, g)
        if integer_minima(q, rbar, B, g).sum() > N:
            continue
        accepted += 1
        cont = solve_continuous(q, N, rbar, B, g)
        rounded = round_allocation(cont, q, N, rbar, B, g)
        best = exhaustive_alloc(q, N, rbar, B, g)
        infeasible += not rounded.feasible
        relax_fail += cont.sum_rate < best.sum_rate - 1e-9
        ratios.append(rounded.sum_rate / best.sum_rate if best.sum_rate > 0 else 1.0)
    ok = min(ratios) >= 0.98 and infeasible == 0 and relax_fail == 0
    check("3 integer rounding", ok,
          f"worst ratio to exhaustive {min(ratios):.6f}, {infeasible} infeasible, "
          f"relaxation below optimum on {relax_fail} of 500", started, 60)


def test_4_extremal_distributions():
    started = time.perf_counter()
    failures = 0
    for K in range(1, 11):
        for B in range(1, 5):
            splits = enumerate_user_splits(K, B)
            if splits.shape[0] == 0:
                continue
            N = 2 * K
            values = np.array([sum_rate_interior(q, K, N, B, 1.0) for q in splits])
            q_max = np.ones(B)
            q_max[0] = K - B + 1
            balanced = np.full(B, K // B)
            balanced[: K % B] += 1
            failures += abs(values.max() - sum_rate_interior(q_max, K, N, B, 1.0)) > 1e-9
            failures += abs(values.min() - sum_rate_interior(balanced, K, N, B, 1.0)) > 1e-9
            if K % B == 0:
                failures += not np.allclose(splits[np.argmin(values)], K // B)
    res = extremal_distributions(50, 3, 90, 1.0)
    err_max = abs(res.R_max - R_MAX_REF)
    err_min = abs(res.R_min - R_MIN_REF)
    # the same values from the general closed-form sum rate
    err_max = max(err_max, abs(sum_rate_interior([50, 0, 0], 50, 90, 3, 1.0) - R_MAX_REF))
    err_min = max(err_min, abs(sum_rate_interior([50 / 3] * 3, 50, 90, 3, 1.0) - R_MIN_REF))
    ok = failures == 0 and err_max <= 1e-9 and err_min <= 1e-9
    check("4 extremal distributions", ok,
          f"{failures} brute-force mismatches, R_max={res.R_max:.6f} (err {err_max:.1e}), "
          f"R_min={res.R_min:.6f} (err {err_min:.1e})", started, 5)


def test_5_gap_limit():
    started = time.perf_counter()
    errors = {B: abs(theorem1_gap(B, 1e5, 50, 1.0)[0] - math.log2(B)) for B in (2, 3, 6)}
    monotone = True
    for B in (2, 3, 6):
        gaps = [theorem1_gap(B, N, 50, 1.0)[0] for N in np.geomspace(51, 1e5, 200)]
        monotone &= bool(np.all(np.diff(gaps) >= 0))
    ok = max(errors.values()) <= 1e-4 and monotone
    check("5 per-user gap limit", ok,
          "errors " + ", ".join(f"B={B}: {e:.2e}" for B, e in errors.items())
          + f", monotone in N: {monotone}", started, 1)


def _reference_scenarios():
    return scenario_distribution_I(), scenario_distribution_II()


def test_6a_dominance_chain():
    started = time.perf_counter()
    lines, ok = [], True
    for scenario in _reference_scenarios():
        R = {p: make_plan(p, scenario.cfg, scenario.profile, strict=False).sum_rate
             for p in ("flexible", "alloc-only", "rotation-only", "fixed")}
        ok &= R["flexible"] >= R["alloc-only"] >= R["fixed"]
        ok &= R["flexible"] >= R["rotation-only"] >= R["fixed"]
        lines.append(f"{scenario.name}: " + "/".join(f"{v:.2f}" for v in R.values()))
    check("6(a) dominance chain", ok, "; ".join(lines), started, 30)


def test_6b_rate_grows_with_sector_count():
    started = time.perf_counter()
    lines, ok = [], True
    for scenario in _reference_scenarios():
        best = [make_plan("flexible", scenario.cfg.replace(B=B), scenario.profile,
                          strict=False).sum_rate for B in SECTOR_COUNTS]
        ok &= bool(np.all(np.diff(best) >= 0))
        at_top = best[-1] >= max(best)
        lines.append(f"{scenario.name}: " + ", ".join(
            f"B={B}:{r:.2f}" for B, r in zip(SECTOR_COUNTS, best))
            + f" (largest at B=30: {at_top})")
    check("6(b) max-over-z0 rate nondecreasing in B", ok, "; ".join(lines), started, 30)


def test_6c_clustered_gain_larger():
    started = time.perf_counter()
    gains = []
    for scenario in _reference_scenarios():
        flex = make_plan("flexible", scenario.cfg, scenario.profile).sum_rate
        fixed = make_plan("fixed", scenario.cfg, scenario.profile).sum_rate
        gains.append(flex - fixed)
    check("6(c) flexible gain larger when clustered", gains[1] > gains[0],
          f"gain dist1 {gains[0]:.3f}, dist2 {gains[1]:.3f}", started, 30)


def test_6d_trace_periodicity():
    started = time.perf_counter()
    worst, ok = 0.0, True
    for scenario in _reference_scenarios():
        for B in SECTOR_COUNTS:
            cfg = scenario.cfg.replace(B=B)
            c = cfg.c
            rates, flags, _ = rate_trace(cfg, scenario.profile, range(1, 2 * c + 1))
            for i in range(c):
                a, b = rates[i], rates[i + c]
                if math.isnan(a) or math.isnan(b):
                    ok &= math.isnan(a) and math.isnan(b)
                else:
                    worst = max(worst, abs(a - b))
                ok &= flags[i] == flags[i + c]
    ok &= worst <= 1e-9
    check("6(d) trace periodic in z0", ok, f"largest |R(z0) - R(z0+c)| {worst:.1e}", started, 30)


def test_7_sector_split():
    started = time.perf_counter()
    rng = np.random.default_rng(77)
    bad, even_count = 0, 0
    for i in range(200):
        B0 = int(rng.integers(1, 6))
        qc = rng.uniform(1, 20, B0)
        K = float(qc.sum())
        N = K + rng.uniform(1, 100)
        g = db_to_linear(rng.uniform(-5, 15))
        even = i % 2 == 0
        if even:
            frac = np.full(B0, 0.5)
        else:
            frac = rng.uniform(0.05, 0.45, B0)
            frac = np.where(rng.uniform(size=B0) < 0.5, frac, 1 - frac)
        qf = np.empty(2 * B0)
        qf[0::2] = frac * qc
        qf[1::2] = qc - qf[0::2]
        r1, r2, verdict = sector_split_compare(qc, qf, N, K, g)
        if even:
            even_count += 1
            bad += verdict != "equal" or abs(r1 - r2) > 1e-9
        else:
            bad += verdict != "increase" or not r2 - r1 > 1e-9
    check("7 sector split", bad == 0,
          f"{bad} violations over 200 pairs ({even_count} even splits)", started, 1)


def test_8_cli_end_to_end(capsys, monkeypatch):
    started = time.perf_counter()
    assert main(["gen-scenario", "dist1"]) == 0
    scenario = capsys.readouterr().out
    monkeypatch.setattr(sys, "stdin", io.StringIO(scenario))
    code_ok = main(["optimize"])
    plan = json.loads(capsys.readouterr().out)
    plan_ok = code_ok == 0 and plan["feasible"] and sum(plan["n"]) == 90

    monkeypatch.setattr(sys, "stdin", io.StringIO(scenario.replace('"zones"', '"zoens"')))
    code_bad = main(["optimize"])
    doc = json.loads(scenario)
    doc["min_rate"] = max_min_rate(90, 50, 1.0) + 0.1
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(doc)))
    code_infeasible = main(["optimize"])
    capsys.readouterr()
    ok = plan_ok and code_bad == 2 and code_infeasible == 3
    check("8 CLI end to end", ok,
          f"plan exit {code_ok}, corrupted exit {code_bad}, infeasible exit {code_infeasible}",
          started, 1)
