"""Per-rotation antenna allocation.

The relaxed problem maximizes ``sum_b Q_b log2(1 + B g0 (N_b - Q_b))`` over
real ``N_b >= N_b,min`` with ``sum N_b <= N``. Its optimum has the
water-filling form

    N_b = max(Q_b (1 + 1 / (nu ln 2)) - 1 / (B g0), N_b,min)

with the dual level ``nu`` found by bisection. The integer allocation is
obtained by flooring, repairing violated minima, and handing leftover
antennas out greedily. An enumeration oracle gives the exact integer optimum
on small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError, NumericalError
from .rates import min_antennas, sum_rate

__all__ = [
    "ContinuousAllocation",
    "IntegerAllocation",
    "sector_minima",
    "integer_minima",
    "bisect_nu",
    "solve_continuous",
    "round_allocation",
    "exhaustive_alloc",
    "compositions",
]

LN2 = math.log(2.0)
# slack used when comparing a real bound against its integer ceiling/floor
_INT_SLACK = 1e-9


@dataclass(frozen=True)
class ContinuousAllocation:
    n: tuple[float, ...]
    nu: float
    binding: tuple[int, ...]
    residual: float
    sum_rate: float

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.n, dtype=float)


@dataclass(frozen=True)
class IntegerAllocation:
    n: tuple[int, ...]
    sum_rate: float
    budget_ok: bool
    min_rate_ok: tuple[bool, ...]
    zf_ok: tuple[bool, ...]

    @property
    def feasible(self) -> bool:
        return self.budget_ok and all(self.min_rate_ok) and all(self.zf_ok)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.n, dtype=np.int64)


def _as_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise DomainError("user counts must be a nonempty vector")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise DomainError("user counts must be finite and nonnegative")
    if not q.sum() > 0:
        raise DomainError("at least one sector must hold users")
    return q


def sector_minima(q, min_rate, B, gamma0) -> np.ndarray:
    """Real antenna floors ``N_b,min``; sectors without users need none."""
    q = np.asarray(q, dtype=float)
    return np.where(q > 0, min_antennas(q, min_rate, B, gamma0), 0.0)


def integer_minima(q, min_rate, B, gamma0) -> np.ndarray:
    """Smallest integer antenna counts meeting ``N_b,min``."""
    return np.ceil(sector_minima(q, min_rate, B, gamma0) - _INT_SLACK).astype(np.int64)


def _unconstrained(q, nu, B, gamma0):
    return q * (1.0 + 1.0 / (nu * LN2)) - 1.0 / (B * gamma0)


def _allocation_at(nu, q, nmin, B, gamma0):
    return np.where(q > 0, np.maximum(_unconstrained(q, nu, B, gamma0), nmin), 0.0)


def bisect_nu(q, N, min_rate, B, gamma0, tol: float = 1e-9, max_doublings: int = 200) -> float:
    """Dual level ``nu`` at which the water-filled allocation spends exactly ``N``.

    The allocated total is strictly decreasing in ``nu`` while any sector is
    unconstrained, so the root is unique. Bisection runs on ``log(nu)``.

    Raises:
        InfeasibleError: if the minima alone exceed the budget.
        NumericalError: if the bracket cannot be established or the
            tolerance cannot be met in floating point.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    q = _as_q(q)
    nmin = sector_minima(q, min_rate, B, gamma0)
    deficit = float(nmin.sum()) - N
    if deficit > tol:
        raise InfeasibleError(
            f"sector minima need {nmin.sum():.6g} antennas but only N={N:g} are available "
            "(minimum rate above log2(1 + gamma0 (N - K)) for this split)",
            deficit=deficit,
        )
    K = float(q.sum())
    if deficit >= -tol:
        # every sector sits on its floor; any large nu spends the budget, so
        # report the smallest one, where the last sector just starts to bind
        users = q[q > 0]
        return float(np.max(B * gamma0 * users / (2.0 ** min_rate * LN2)))

    def excess(nu):
        return float(_allocation_at(nu, q, nmin, B, gamma0).sum()) - N

    lo = K / ((N + 1.0 / gamma0) * LN2) * 1e-3
    hi = K / LN2 * 1e3
    for _ in range(max_doublings):
        if excess(lo) >= 0:
            break
        lo *= 0.5
    else:
        raise NumericalError("could not bracket nu from below")
    for _ in range(max_doublings):
        if excess(hi) <= 0:
            break
        hi *= 2.0
    else:
        raise NumericalError("could not bracket nu from above")

    f_lo, f_hi = excess(lo), excess(hi)
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi
    for _ in range(4000):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        f_mid = excess(mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    raise NumericalError(f"bisection on nu stalled before reaching tol={tol:g}")


def solve_continuous(q, N, min_rate, B, gamma0, tol: float = 1e-9) -> ContinuousAllocation:
    """Optimal real-valued allocation for fixed per-sector user counts ``q``."""
    q = _as_q(q)
    nmin = sector_minima(q, min_rate, B, gamma0)
    nu = bisect_nu(q, N, min_rate, B, gamma0, tol=tol)
    free = _unconstrained(q, nu, B, gamma0)
    n = _allocation_at(nu, q, nmin, B, gamma0)
    is_free = (q > 0) & (free > nmin)
    if is_free.any():
        # free entries are affine in 1/nu with slope q_b, so spreading the
        # leftover in proportion to q_b is a small move of nu itself
        w = np.where(is_free, q, 0.0)
        n = n + (N - math.fsum(n.tolist())) * w / w.sum()
    binding = tuple(int(b) for b in np.flatnonzero((q > 0) & ~is_free))
    return ContinuousAllocation(
        n=tuple(n.tolist()),
        nu=nu,
        binding=binding,
        residual=abs(math.fsum(n.tolist()) - N),
        sum_rate=sum_rate(n, q, B, gamma0),
    )


def _sector_value(n_b, q_b, B, gamma0):
    if q_b <= 0:
        return 0.0
    return q_b * math.log2(1.0 + B * gamma0 * max(n_b - q_b, 0.0))


def _gain(n_b, q_b, B, gamma0):
    return _sector_value(n_b + 1, q_b, B, gamma0) - _sector_value(n_b, q_b, B, gamma0)


def _fill(n, q, budget, B, gamma0):
    """Hand out spare antennas one at a time to the largest marginal gain."""
    users = np.flatnonzero(q > 0)
    spare = budget - int(n.sum())
    gains = {b: _gain(n[b], q[b], B, gamma0) for b in users}
    while spare > 0:
        best = max(users, key=lambda b: (gains[b], -b))
        n[best] += 1
        gains[best] = _gain(n[best], q[best], B, gamma0)
        spare -= 1
    return n


def _exchange(n, q, req, B, gamma0):
    """Move single antennas between sectors while that raises the sum rate.

    Above the integer minima every sector's value is concave in its antenna
    count, so a state with no improving move is a global optimum.
    """
    users = [int(b) for b in np.flatnonzero(q > 0)]
    while True:
        best = None
        for i in users:
            if n[i] <= req[i]:
                continue
            loss = _gain(n[i] - 1, q[i], B, gamma0)
            for j in users:
                if j == i:
                    continue
                delta = _gain(n[j], q[j], B, gamma0) - loss
                if delta > 1e-12 * max(loss, 1.0) and (best is None or delta > best[0]):
                    best = (delta, i, j)
        if best is None:
            return n
        _, i, j = best
        n[i] -= 1
        n[j] += 1


def _summarize(n, q, N, min_rate, B, gamma0) -> IntegerAllocation:
    req = integer_minima(q, min_rate, B, gamma0)
    return IntegerAllocation(
        n=tuple(int(x) for x in n),
        sum_rate=sum_rate(n, q, B, gamma0),
        budget_ok=int(n.sum()) <= N,
        min_rate_ok=tuple(bool(x) for x in (n >= req)),
        zf_ok=tuple(bool(x) for x in ((q <= 0) | (n >= q - _INT_SLACK))),
    )


def round_allocation(cont: ContinuousAllocation, q, N, min_rate, B, gamma0,
                     strict: bool = True) -> IntegerAllocation:
    """Map a relaxed allocation onto integers.

    Steps: floor every entry, lift sectors below ``ceil(N_b,min)``, trim
    the cheapest non-binding sectors if the lift overspent, give any
    remaining antennas to the sector with the largest marginal sum-rate
    gain (lowest index on ties), and finally swap single antennas between
    sectors while a swap still helps.

    With ``strict=False`` an instance whose integer minima do not fit in the
    budget is not an error: the plain floor is kept, leftovers are filled,
    and the result is returned with its feasibility flags cleared.
    """
    q = _as_q(q)
    N = int(N)
    n_star = cont.array
    if n_star.shape != q.shape:
        raise DomainError("continuous allocation and user counts differ in length")
    n = np.floor(n_star + _INT_SLACK).astype(np.int64)
    n[q <= 0] = 0
    req = integer_minima(q, min_rate, B, gamma0)

    if int(req.sum()) > N:
        if strict:
            raise InfeasibleError(
                f"integer minima need {int(req.sum())} antennas, budget is N={N}",
                deficit=int(req.sum()) - N,
            )
        while int(n.sum()) > N:
            b = int(np.argmax(n))
            n[b] -= 1
        return _summarize(_fill(n, q, N, B, gamma0), q, N, min_rate, B, gamma0)

    n = np.maximum(n, req)
    while int(n.sum()) > N:
        slack = [b for b in range(q.size) if n[b] > req[b]]
        if not slack:
            raise InfeasibleError("cannot trim allocation back within budget",
                                  deficit=int(n.sum()) - N)
        b = min(slack, key=lambda j: (_gain(n[j] - 1, q[j], B, gamma0), j))
        n[b] -= 1
    n = _exchange(_fill(n, q, N, B, gamma0), q, req, B, gamma0)
    return _summarize(n, q, N, min_rate, B, gamma0)


def compositions(total: int, parts: int):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``.

    Returned as one array in lexicographic order.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        rest = compositions(total - first, parts - 1)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def exhaustive_alloc(q, N, min_rate, B, gamma0, cap: int = 10**7) -> IntegerAllocation:
    """Exact integer optimum by enumerating every allocation spending ``N``.

    Only allocations that meet the integer minima are enumerated. Ties go to
    the lexicographically smallest allocation.

    Raises:
        DomainError: if ``C(N+B-1, B-1)`` exceeds ``cap``.
        InfeasibleError: if the minima do not fit in the budget.
    """
    q = _as_q(q)
    N = int(N)
    parts = q.size
    if math.comb(N + parts - 1, parts - 1) > cap:
        raise DomainError(
            f"enumeration of C({N + parts - 1}, {parts - 1}) allocations exceeds cap={cap}"
        )
    req = integer_minima(q, min_rate, B, gamma0)
    spare = N - int(req.sum())
    if spare < 0:
        raise InfeasibleError(f"integer minima need {int(req.sum())} antennas, budget is N={N}",
                              deficit=-spare)

    best_value, best_n = -math.inf, None
    # chunk on the first coordinate to bound memory
    for first in range(spare + 1):
        if parts == 1:
            if first != spare:
                continue
            cand = np.array([[first]], dtype=np.int64)
        else:
            rest = compositions(spare - first, parts - 1)
            cand = np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest])
        cand = cand + req
        gain = np.maximum(cand - q, 0.0)
        values = np.where(q > 0, q * np.log2(1.0 + B * gamma0 * gain), 0.0).sum(axis=1)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_n = float(values[i]), cand[i].copy()
    return _summarize(best_n, q, N, min_rate, B, gamma0)
