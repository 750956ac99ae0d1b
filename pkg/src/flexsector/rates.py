"""Closed-form ZF rate bounds, the sum-rate objective and feasibility thresholds.

Antenna and user counts are accepted as reals everywhere so the same
formulas serve the relaxed allocator and the closed-form analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError
from .geometry import CellConfig, SectorView, ZoneProfile, users_per_sector

__all__ = [
    "RateReport",
    "rate_report",
    "rate_upper",
    "rate_lower",
    "sector_rates",
    "sum_rate",
    "total_sum_rate",
    "min_antennas",
    "max_min_rate",
]


def rate_upper(N_b, Q_b, B, gamma0):
    """Per-user upper bound ``log2(1 + B*gamma0*(N_b - Q_b + 1)^+)``."""
    gain = np.maximum(np.asarray(N_b, dtype=float) - Q_b + 1.0, 0.0)
    out = np.log2(1.0 + B * gamma0 * gain)
    return float(out) if np.ndim(out) == 0 else out


def rate_lower(N_b, Q_b, B, gamma0):
    """Per-user lower bound ``log2(1 + B*gamma0*(N_b - Q_b)^+)``.

    This is the rate used as the design objective throughout.
    """
    gain = np.maximum(np.asarray(N_b, dtype=float) - Q_b, 0.0)
    out = np.log2(1.0 + B * gamma0 * gain)
    return float(out) if np.ndim(out) == 0 else out


def sector_rates(n, q, B, gamma0) -> np.ndarray:
    """Per-sector sum rates ``Q_b * r_b^(l)``; empty sectors give exactly 0."""
    n = np.asarray(n, dtype=float)
    q = np.asarray(q, dtype=float)
    if n.shape != q.shape:
        raise DomainError(f"allocation has length {n.size}, expected {q.size}")
    terms = q * np.log2(1.0 + B * gamma0 * np.maximum(n - q, 0.0))
    return np.where(q > 0, terms, 0.0)


def sum_rate(n, q, B, gamma0) -> float:
    """Total lower-bound sum rate; ``math.fsum`` keeps it order independent."""
    return math.fsum(sector_rates(n, q, B, gamma0).tolist())


@dataclass(frozen=True)
class RateReport:
    """Per-sector rates for one allocation ``n`` at rotation ``z0``."""

    n: tuple[float, ...]
    z0: int
    q: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    sector_sum: tuple[float, ...]
    total: float

    def to_dict(self) -> dict:
        return {
            "n": list(self.n), "z0": self.z0, "q": list(self.q),
            "rate_lower": list(self.lower), "rate_upper": list(self.upper),
            "sector_sum_rate": list(self.sector_sum), "sum_rate": self.total,
        }


def rate_report(n, q, B, gamma0, z0: int = 0) -> RateReport:
    n = np.asarray(n, dtype=float)
    q = np.asarray(q, dtype=float)
    per_sector = sector_rates(n, q, B, gamma0)
    return RateReport(
        n=tuple(n.tolist()),
        z0=int(z0),
        q=tuple(q.tolist()),
        lower=tuple(np.atleast_1d(rate_lower(n, q, B, gamma0)).tolist()),
        upper=tuple(np.atleast_1d(rate_upper(n, q, B, gamma0)).tolist()),
        sector_sum=tuple(per_sector.tolist()),
        total=math.fsum(per_sector.tolist()),
    )


def total_sum_rate(n, profile: ZoneProfile, view: SectorView, cfg: CellConfig) -> RateReport:
    """Sum rate of all users for allocation ``n`` under a sector view."""
    n = np.asarray(n, dtype=float)
    if n.ndim != 1 or n.size != cfg.B:
        raise DomainError(f"allocation must have length B={cfg.B}, got shape {n.shape}")
    if np.any(n < 0) or not np.all(np.isfinite(n)):
        raise DomainError("antenna counts must be finite and nonnegative")
    q = users_per_sector(profile, view)
    return rate_report(n, q, cfg.B, cfg.gamma0, view.z0)


def min_antennas(Q_b, min_rate, B, gamma0):
    """Antennas a sector needs so every user reaches ``min_rate``."""
    if np.any(np.asarray(min_rate) < 0):
        raise DomainError("min_rate must be nonnegative")
    out = np.asarray(Q_b, dtype=float) + (2.0 ** min_rate - 1.0) / (B * gamma0)
    return float(out) if np.ndim(out) == 0 else out


def max_min_rate(N, K, gamma0, *, required: float | None = None) -> float:
    """Largest min-rate any sectorization can support, ``log2(1 + gamma0 (N-K))``.

    Returns 0 when ``N <= K``. If ``required`` is given and exceeds the bound
    an :class:`InfeasibleError` is raised.
    """
    bound = math.log2(1.0 + gamma0 * (N - K)) if N > K else 0.0
    if required is not None and required > 0 and (N <= K or required > bound):
        raise InfeasibleError(
            f"minimum rate {required:g} bps/Hz exceeds the feasible maximum "
            f"log2(1 + gamma0 (N - K)) = {bound:.6g} bps/Hz (N={N:g}, K={K:g})",
            deficit=required - bound,
        )
    return bound
