"""Closed-form regime of the allocator and what it says about user layouts.

When the minimum-rate floors are slack the optimal allocation is affine in
the sector loads and the sum rate has the closed form

    R(q) = sum_b Q_b log2(Q_b * eta),   eta = B g0 (N - K + m/(B g0)) / K,

where ``m`` is the number of sectors holding users (``m = B`` normally;
empty sectors get no antennas).

From it follow the best and worst user layouts, the per-user gap between
them (which tends to ``log2 B``), and the effect of splitting sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import LN2, compositions
from .errors import DomainError
from .rates import min_antennas

__all__ = [
    "RegimeInfo",
    "ExtremalResult",
    "eta",
    "regime_threshold",
    "regime_info",
    "closed_form_allocation",
    "sum_rate_interior",
    "extremal_distributions",
    "theorem1_gap",
    "sector_split_compare",
    "enumerate_user_splits",
]


def eta(K, N, B, gamma0, occupied=None) -> float:
    m = B if occupied is None else occupied
    return B * gamma0 * (N - K + m / (B * gamma0)) / K


def _occupied(q) -> int:
    return int(np.count_nonzero(np.asarray(q, dtype=float) > 0))


def regime_threshold(K, N, B, gamma0, q_min, occupied=None) -> float:
    """Largest min-rate for which no sector's antenna floor binds.

    ``q_min`` is the smallest positive sector load and ``occupied`` the
    number of sectors with users (default ``B``).
    """
    if not N > K:
        raise DomainError(f"closed-form regime needs N > K, got N={N}, K={K}")
    if not q_min > 0:
        raise DomainError("q_min must be positive")
    m = B if occupied is None else occupied
    return math.log2(q_min * (B * gamma0 * (N - K) + m) / K)


@dataclass(frozen=True)
class RegimeInfo:
    threshold: float
    interior: bool
    nu: float
    n: tuple[float, ...]


def closed_form_allocation(q, K, N, B, gamma0):
    """``nu = K / ((N - K + 1/g0) ln 2)`` and ``N_b = (Q_b/K)(N + 1/g0) - 1/(B g0)``.

    Written for every sector occupied; with ``m < B`` occupied sectors the
    ``1/g0`` terms become ``m/(B g0)`` and empty sectors get 0. Only optimal
    in the interior regime; see :func:`regime_info`.
    """
    q = np.asarray(q, dtype=float)
    offset = _occupied(q) / (B * gamma0)
    nu = K / ((N - K + offset) * LN2)
    n = np.where(q > 0, q / K * (N + offset) - 1.0 / (B * gamma0), 0.0)
    return nu, n


def regime_info(q, N, B, gamma0, min_rate) -> RegimeInfo:
    q = np.asarray(q, dtype=float)
    K = float(q.sum())
    positive = q[q > 0]
    threshold = regime_threshold(K, N, B, gamma0, float(positive.min()), positive.size)
    nu, n = closed_form_allocation(q, K, N, B, gamma0)
    # equivalent to min over sectors of the per-sector rate bound being >= min_rate
    interior = bool(np.all(n[q > 0] >= min_antennas(positive, min_rate, B, gamma0)))
    return RegimeInfo(threshold, interior, nu, tuple(n.tolist()))


def _xlog(q, scale):
    q = np.asarray(q, dtype=float)
    safe = np.where(q > 0, q, 1.0)
    return np.where(q > 0, q * np.log2(safe * scale), 0.0)


def sum_rate_interior(q, K, N, B, gamma0) -> float:
    """Closed-form optimal sum rate; empty sectors contribute 0."""
    return math.fsum(_xlog(q, eta(K, N, B, gamma0, _occupied(q))).tolist())


def enumerate_user_splits(K: int, B: int, minimum: int = 1) -> np.ndarray:
    """Integer load vectors with every entry ``>= minimum`` summing to ``K``."""
    spare = K - minimum * B
    if spare < 0:
        return np.empty((0, B), dtype=np.int64)
    return compositions(spare, B) + minimum


@dataclass(frozen=True)
class ExtremalResult:
    K: float
    N: float
    B: int
    gamma0: float
    q_max: tuple[float, ...]
    n_max: tuple[float, ...]
    q_favorable: tuple[float, ...]
    n_favorable: tuple[float, ...]
    q_min: tuple[float, ...]
    n_min: tuple[float, ...]
    R_max: float
    R_min: float
    R_at_q_max: float
    gap_per_user: float
    asymptotic_gap: float

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def extremal_distributions(K, B, N, gamma0) -> ExtremalResult:
    """Best and worst sector loads for the closed-form sum rate.

    * best with every sector occupied: one sector holds ``K - B + 1`` users,
      the rest one each;
    * best overall: all ``K`` users and all ``N`` antennas in one sector,
      giving ``R_max = K log2(1 + B g0 (N - K))``;
    * worst: ``K/B`` users and ``N/B`` antennas per sector, giving
      ``R_min = K log2(1 + g0 (N - K))``.
    """
    if B < 1 or not K > 0 or not N > K:
        raise DomainError("need B >= 1 and 0 < K < N")
    e = eta(K, N, B, gamma0)
    if K >= B:
        q_max = np.ones(B)
        q_max[0] = K - B + 1
        n_first = (K - B + 1) / K * (N + 1.0 / gamma0) - 1.0 / (B * gamma0)
        n_max = np.full(B, (N - n_first) / (B - 1) if B > 1 else 0.0)
        n_max[0] = n_first
        r_at = math.fsum(_xlog(q_max, e).tolist())
    else:
        q_max = np.full(B, math.nan)
        n_max = np.full(B, math.nan)
        r_at = math.nan
    q_fav = np.zeros(B)
    q_fav[0] = K
    n_fav = np.zeros(B)
    n_fav[0] = N
    finite, asym = theorem1_gap(B, N, K, gamma0)
    return ExtremalResult(
        K=K, N=N, B=B, gamma0=gamma0,
        q_max=tuple(q_max.tolist()), n_max=tuple(n_max.tolist()),
        q_favorable=tuple(q_fav.tolist()), n_favorable=tuple(n_fav.tolist()),
        q_min=tuple([K / B] * B), n_min=tuple([N / B] * B),
        R_max=K * math.log2(1.0 + B * gamma0 * (N - K)),
        R_min=K * math.log2(1.0 + gamma0 * (N - K)),
        R_at_q_max=r_at,
        gap_per_user=finite,
        asymptotic_gap=asym,
    )


def theorem1_gap(B, N, K, gamma0):
    """Per-user gap ``(R_max - R_min) / K`` and its large-``N`` limit ``log2 B``."""
    x = gamma0 * (N - K)
    finite = math.log2((1.0 + B * x) / (1.0 + x))
    return finite, math.log2(B)


def sector_split_compare(q_coarse, q_fine, N, K, gamma0, tol: float = 1e-9):
    """Compare the closed-form sum rate before and after halving every sector.

    Sector ``i`` of the coarse layout must split into fine sectors
    ``2i-1, 2i``. Returns ``(R_coarse, R_fine, verdict)`` where the verdict
    is ``"equal"`` when every pair splits evenly and ``"increase"`` otherwise
    (the finer layout then has the strictly larger rate).
    """
    qc = np.asarray(q_coarse, dtype=float)
    qf = np.asarray(q_fine, dtype=float)
    B0 = qc.size
    if qf.size != 2 * B0:
        raise DomainError(f"fine layout needs {2 * B0} sectors, got {qf.size}")
    pair_sum = qf[0::2] + qf[1::2]
    if not np.allclose(pair_sum, qc, rtol=0.0, atol=tol * max(1.0, float(qc.max()))):
        raise DomainError("fine sectors do not pair up into the coarse sectors")
    r_coarse = sum_rate_interior(qc, K, N, B0, gamma0)
    r_fine = sum_rate_interior(qf, K, N, 2 * B0, gamma0)
    even = np.allclose(qf[0::2], qf[1::2], rtol=0.0, atol=tol)
    return r_coarse, r_fine, "equal" if even else "increase"
