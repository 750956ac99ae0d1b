"""Joint rotation/allocation planning and the three benchmark policies.

``optimize_flexible`` searches every rotation index, allocating antennas
optimally at each one; the benchmarks freeze the rotation (``alloc-only``),
the allocation (``rotation-only``) or both (``fixed``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import IntegerAllocation, integer_minima, round_allocation, solve_continuous
from .errors import DomainError, InfeasibleError
from .geometry import CellConfig, ZoneProfile, users_per_sector, zone_sets, SectorView
from .rates import RateReport, max_min_rate, rate_report, sum_rate

__all__ = [
    "POLICIES",
    "Plan",
    "sector_loads",
    "allocate_for_rotation",
    "equal_split",
    "rate_trace",
    "optimize_flexible",
    "plan_alloc_only",
    "plan_rotation_only",
    "plan_fixed",
    "make_plan",
]

POLICIES = ("flexible", "alloc-only", "rotation-only", "fixed")


@dataclass(frozen=True)
class Plan:
    policy: str
    z0: int
    n: tuple[int, ...]
    report: RateReport
    trace: tuple[float, ...]
    trace_feasible: tuple[bool, ...]
    feasible: bool

    @property
    def sum_rate(self) -> float:
        return self.report.total

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "z0": self.z0,
            "n": list(self.n),
            "feasible": self.feasible,
            "sum_rate": self.report.total,
            "report": self.report.to_dict(),
            "trace": [None if math.isnan(r) else r for r in self.trace],
            "trace_feasible": list(self.trace_feasible),
        }


def sector_loads(cfg: CellConfig, profile: ZoneProfile, z0: int) -> np.ndarray:
    """``Q_b(z0)`` for any integer ``z0`` (indices wrap modulo ``Z``)."""
    if profile.Z != cfg.Z:
        raise DomainError(f"profile has {profile.Z} zones, config has Z={cfg.Z}")
    view = SectorView(z0, zone_sets(cfg.Z, cfg.B, z0))
    return np.asarray(users_per_sector(profile, view), dtype=float)


def allocate_for_rotation(q, cfg: CellConfig, strict: bool = True) -> IntegerAllocation:
    """Relaxed solve plus rounding for one rotation.

    With ``strict=False`` infeasible minima do not raise: the minimum-rate
    constraint is dropped if even the relaxation cannot meet it, and the
    returned allocation carries cleared feasibility flags.
    """
    try:
        cont = solve_continuous(q, cfg.N, cfg.min_rate, cfg.B, cfg.gamma0)
    except InfeasibleError:
        if strict:
            raise
        cont = solve_continuous(q, cfg.N, 0.0, cfg.B, cfg.gamma0)
    return round_allocation(cont, q, cfg.N, cfg.min_rate, cfg.B, cfg.gamma0, strict=strict)


def equal_split(N: int, B: int) -> np.ndarray:
    """``N // B`` antennas per sector, remainder to the lowest-index sectors."""
    n = np.full(B, N // B, dtype=np.int64)
    n[: N % B] += 1
    return n


def _equal_split_feasible(n, q, cfg: CellConfig) -> bool:
    req = integer_minima(q, cfg.min_rate, cfg.B, cfg.gamma0)
    return bool(np.all(n >= req) and np.all((q <= 0) | (n >= q)))


def _pick(trace, feasible, restrict_to_feasible: bool) -> int:
    """Index of the best rotation; ties go to the smallest ``z0``."""
    best, best_key = None, None
    for i, (r, ok) in enumerate(zip(trace, feasible)):
        if math.isnan(r) or (restrict_to_feasible and not ok):
            continue
        key = (r, -i)
        if best_key is None or key > best_key:
            best, best_key = i, key
    return best


def rate_trace(cfg: CellConfig, profile: ZoneProfile, z0_values=None, policy: str = "flexible",
               strict: bool = False):
    """Sum rate ``R(z0)`` for each rotation in ``z0_values`` (default ``1..c``).

    Rotations outside ``1..c`` are allowed; they wrap onto a cyclic
    relabeling of the sectors. Returns ``(rates, feasible, allocations)``.
    """
    if z0_values is None:
        z0_values = range(1, cfg.c + 1)
    rates, flags, allocs = [], [], []
    for z0 in z0_values:
        q = sector_loads(cfg, profile, z0)
        if policy in ("flexible", "alloc-only"):
            try:
                alloc = allocate_for_rotation(q, cfg, strict=strict)
            except InfeasibleError:
                rates.append(math.nan)
                flags.append(False)
                allocs.append(None)
                continue
            n, r, ok = alloc.array, alloc.sum_rate, alloc.feasible
        elif policy in ("rotation-only", "fixed"):
            n = equal_split(cfg.N, cfg.B)
            r = sum_rate(n, q, cfg.B, cfg.gamma0)
            ok = _equal_split_feasible(n, q, cfg)
        else:
            raise DomainError(f"unknown policy {policy!r}")
        rates.append(r)
        flags.append(ok)
        allocs.append(n)
    return rates, flags, allocs


def _build(policy, cfg, profile, z0_values, restrict_to_feasible, strict):
    rates, flags, allocs = rate_trace(cfg, profile, z0_values, policy, strict=strict)
    i = _pick(rates, flags, restrict_to_feasible)
    if i is None:
        raise InfeasibleError(f"policy {policy!r} has no feasible rotation")
    z0 = list(z0_values)[i]
    n = allocs[i]
    q = sector_loads(cfg, profile, z0)
    return Plan(
        policy=policy,
        z0=z0,
        n=tuple(int(x) for x in n),
        report=rate_report(n, q, cfg.B, cfg.gamma0, z0),
        trace=tuple(rates),
        trace_feasible=tuple(flags),
        feasible=flags[i],
    )


def _check_rate_budget(cfg, profile, strict):
    if strict:
        max_min_rate(cfg.N, profile.K, cfg.gamma0, required=cfg.min_rate)


def optimize_flexible(cfg: CellConfig, profile: ZoneProfile, strict: bool = True) -> Plan:
    """Joint rotation and antenna allocation.

    Every ``z0`` in ``1..c`` is tried; the allocation at each is the rounded
    relaxed optimum and the best rotation wins (smallest ``z0`` on ties).

    Raises:
        InfeasibleError: when ``strict`` and either the minimum rate exceeds
            ``log2(1 + gamma0 (N - K))`` or no rotation admits a feasible
            integer allocation.
    """
    _check_rate_budget(cfg, profile, strict)
    z0_values = list(range(1, cfg.c + 1))
    if strict:
        return _build("flexible", cfg, profile, z0_values, True, True)
    rates, flags, _ = rate_trace(cfg, profile, z0_values, "flexible", strict=False)
    return _build("flexible", cfg, profile, z0_values, any(flags), False)


def plan_alloc_only(cfg: CellConfig, profile: ZoneProfile, strict: bool = True) -> Plan:
    """Optimal allocation with the rotation frozen at ``z0 = 1``."""
    _check_rate_budget(cfg, profile, strict)
    return _build("alloc-only", cfg, profile, [1], strict, strict)


def plan_rotation_only(cfg: CellConfig, profile: ZoneProfile) -> Plan:
    """Equal antenna split with the best rotation.

    The rotation maximizes the sum rate; the plan is flagged infeasible when
    the equal split leaves some sector below its minimum antenna count.
    """
    return _build("rotation-only", cfg, profile, list(range(1, cfg.c + 1)), False, False)


def plan_fixed(cfg: CellConfig, profile: ZoneProfile) -> Plan:
    """Conventional sectors: ``z0 = 1`` and an equal split."""
    return _build("fixed", cfg, profile, [1], False, False)


def make_plan(policy: str, cfg: CellConfig, profile: ZoneProfile, strict: bool = True) -> Plan:
    if policy == "flexible":
        return optimize_flexible(cfg, profile, strict=strict)
    if policy == "alloc-only":
        return plan_alloc_only(cfg, profile, strict=strict)
    if policy == "rotation-only":
        return plan_rotation_only(cfg, profile)
    if policy == "fixed":
        return plan_fixed(cfg, profile)
    raise DomainError(f"unknown policy {policy!r}; expected one of {', '.join(POLICIES)}")
