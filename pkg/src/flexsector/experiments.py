"""Parameter sweeps, bound validation and their delimited-text tables."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import default_threads, rate_estimate, zf_gain_samples
from .errors import DomainError
from .geometry import db_to_linear
from .planner import POLICIES, make_plan, rate_trace
from .rates import rate_lower, rate_upper
from .scenarios import SCHEMA_VERSION, Scenario

__all__ = [
    "SweepRow",
    "SweepResult",
    "BoundsRow",
    "BoundsReport",
    "DEFAULT_BOUNDS_GRID",
    "build_id",
    "sweep_rotation",
    "sweep_antennas",
    "sweep_sectors",
    "validate_bounds",
    "read_sweep_csv",
]

SWEEP_COLUMNS = ("axis", "policy", "R_bps_hz", "feasible", "z0_star", "n_vector")
BOUNDS_COLUMNS = ("N_b", "Q_b", "B", "gamma0_db", "rate_lower", "mc_mean", "mc_se",
                  "rate_upper", "inv_gram_mean", "inv_gram_expected", "verdict")

DEFAULT_BOUNDS_GRID = tuple(
    (n_b, q_b, B, g_db)
    for n_b, q_b in ((10, 5), (20, 10), (40, 20), (60, 50), (90, 50), (10, 10))
    for B in (1, 3)
    for g_db in (0.0, 10.0)
)


def build_id() -> str:
    """Content hash of the package sources; stable across runs and machines."""
    digest = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()[:12]


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.10f}"


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    policy: str
    R: float
    feasible: bool
    z0_star: int
    n: tuple[int, ...]


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.axis_value, r.policy))
        keys = [(r.axis_value, r.policy) for r in self.rows]
        if len(set(keys)) != len(keys):
            raise DomainError("sweep has duplicate (axis value, policy) rows")

    def value(self, axis_value, policy) -> float:
        for row in self.rows:
            if row.axis_value == axis_value and row.policy == policy:
                return row.R
        raise KeyError((axis_value, policy))

    def series(self, policy):
        rows = [r for r in self.rows if r.policy == policy]
        return [r.axis_value for r in rows], [r.R for r in rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = " ".join(f"{k}={v}" for k, v in sorted(self.provenance.items()))
        buf.write(f"# schema_version={SCHEMA_VERSION} axis={self.axis} {meta}".rstrip() + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            axis_value = int(r.axis_value) if float(r.axis_value).is_integer() else r.axis_value
            writer.writerow([axis_value, r.policy, _fmt(r.R), str(r.feasible).lower(),
                             r.z0_star, ";".join(str(x) for x in r.n)])
        return buf.getvalue()


def read_sweep_csv(text: str) -> SweepResult:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DomainError("sweep table lacks its schema header line")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split() if "=" in tok)
    if meta.get("schema_version") != str(SCHEMA_VERSION):
        raise DomainError(f"unsupported sweep schema_version {meta.get('schema_version')!r}")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if tuple(header or ()) != SWEEP_COLUMNS:
        raise DomainError(f"unexpected sweep columns {header!r}")
    rows = []
    for rec in reader:
        n = tuple(int(x) for x in rec[5].split(";")) if rec[5] else ()
        rows.append(SweepRow(float(rec[0]), rec[1], float(rec[2]), rec[3] == "true",
                             int(rec[4]), n))
    axis = meta.pop("axis")
    meta.pop("schema_version")
    return SweepResult(axis, rows, meta)


def _provenance(scenario: Scenario) -> dict:
    return {"scenario": scenario.name, "seed": scenario.seed, "build": build_id()}


def _map(fn, items, threads):
    # results come back in submission order, so output never depends on scheduling
    workers = min(threads or default_threads(), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep_rotation(scenario: Scenario, B_values=None, threads: int | None = None) -> SweepResult:
    """Flexible-policy sum rate at every rotation ``z0 = 1..c``, for each ``B``.

    Rows are labelled ``flexible@B=<B>``; ``z0_star`` repeats the best
    rotation for that ``B``.
    """
    if B_values is None:
        B_values = [scenario.cfg.B]

    def one(B):
        cfg = scenario.cfg.replace(B=B)
        rates, flags, allocs = rate_trace(cfg, scenario.profile, None, "flexible", strict=False)
        candidates = [i for i, ok in enumerate(flags) if ok] or list(range(len(rates)))
        best = max(candidates, key=lambda i: (rates[i], -i))
        return [SweepRow(z0, f"flexible@B={B}", rates[z0 - 1], flags[z0 - 1], best + 1,
                         tuple(int(x) for x in allocs[z0 - 1]))
                for z0 in range(1, cfg.c + 1)]

    rows = [row for block in _map(one, list(B_values), threads) for row in block]
    return SweepResult("z0", rows, _provenance(scenario))


def _plan_row(scenario, policy, axis_value, **changes):
    plan = make_plan(policy, scenario.cfg.replace(**changes), scenario.profile, strict=False)
    return SweepRow(axis_value, policy, plan.sum_rate, plan.feasible, plan.z0, plan.n)


def sweep_antennas(scenario: Scenario, policies=POLICIES, N_values=None,
                   threads: int | None = None) -> SweepResult:
    """Sum rate of each policy as the antenna budget ``N`` varies."""
    if N_values is None:
        N_values = [90, 100, 120, 150, 200, 300]
    jobs = [(int(N), p) for N in N_values for p in policies]
    rows = _map(lambda job: _plan_row(scenario, job[1], job[0], N=job[0]), jobs, threads)
    return SweepResult("N", rows, _provenance(scenario))


def sweep_sectors(scenario: Scenario, policies=("flexible",), B_values=None,
                  threads: int | None = None) -> SweepResult:
    """Sum rate of each policy as the sector count ``B`` varies."""
    if B_values is None:
        B_values = [b for b in range(1, scenario.cfg.Z + 1) if scenario.cfg.Z % b == 0]
    jobs = [(int(B), p) for B in B_values for p in policies]
    rows = _map(lambda job: _plan_row(scenario, job[1], job[0], B=job[0]), jobs, threads)
    return SweepResult("B", rows, _provenance(scenario))


@dataclass(frozen=True)
class BoundsRow:
    N_b: int
    Q_b: int
    B: int
    gamma0_db: float
    lower: float
    mc_mean: float
    mc_se: float
    upper: float
    inv_gram_mean: float
    inv_gram_expected: float
    margin: float

    @property
    def passed(self) -> bool:
        lo = self.mc_mean + self.margin * self.mc_se
        hi = self.mc_mean - self.margin * self.mc_se
        return self.lower <= lo and hi <= self.upper


@dataclass
class BoundsReport:
    rows: list[BoundsRow]
    trials: int
    seed: int

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} table=bounds trials={self.trials} "
                  f"seed={self.seed} build={build_id()}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BOUNDS_COLUMNS)
        for r in self.rows:
            writer.writerow([r.N_b, r.Q_b, r.B, f"{r.gamma0_db:g}", _fmt(r.lower),
                             _fmt(r.mc_mean), _fmt(r.mc_se), _fmt(r.upper),
                             _fmt(r.inv_gram_mean), _fmt(r.inv_gram_expected),
                             "pass" if r.passed else "FAIL"])
        return buf.getvalue()


def _point_seed(seed, N_b, Q_b) -> int:
    return int(np.random.SeedSequence([seed, N_b, Q_b]).generate_state(1)[0])


def validate_bounds(grid=DEFAULT_BOUNDS_GRID, trials: int = 10_000, seed: int = 0,
                    margin: float = 3.0, threads: int | None = None) -> BoundsReport:
    """Check the closed-form rate bounds against Monte-Carlo ZF rates.

    ``grid`` holds ``(N_b, Q_b, B, gamma0_db)`` tuples. Points sharing
    ``(N_b, Q_b)`` reuse the same fading draws; only the SNR scaling differs.
    """
    gains = {}
    rows = []
    for N_b, Q_b, B, g_db in grid:
        key = (int(N_b), int(Q_b))
        if key not in gains:
            gains[key] = zf_gain_samples(key[0], key[1], trials, _point_seed(seed, *key),
                                         threads=threads)
        g = gains[key]
        gamma0 = db_to_linear(g_db)
        est = rate_estimate(g, B, gamma0, seed)
        dof = N_b - Q_b
        rows.append(BoundsRow(
            N_b=key[0], Q_b=key[1], B=int(B), gamma0_db=float(g_db),
            lower=rate_lower(N_b, Q_b, B, gamma0), mc_mean=est.mean, mc_se=est.se,
            upper=rate_upper(N_b, Q_b, B, gamma0),
            inv_gram_mean=float(np.mean(1.0 / g)),
            inv_gram_expected=1.0 / dof if dof > 0 else math.inf,
            margin=margin,
        ))
    return BoundsReport(rows, trials, seed)
