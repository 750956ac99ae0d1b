"""Directional Rayleigh channels, ZF combining and Monte-Carlo ergodic rates.

Users apply channel-inversion power control (``P_k = P0 / zeta_k``), so the
per-user SNR after ZF combining is ``B * gamma0 / [(G^H G)^-1]_kk`` and the
large-scale gains ``zeta_k`` drop out.  The Monte-Carlo estimator draws the
small-scale fading matrix ``G`` directly.

Trials are generated in fixed-size chunks, each with its own seed derived
from ``(seed, chunk index)``.  Chunks may run on any number of threads; the
result only depends on the seed and the trial count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError, InfeasibleError, SingularChannelError

__all__ = [
    "ChannelDraw",
    "McEstimate",
    "antenna_gain",
    "path_loss",
    "draw_channel",
    "zf_combiners",
    "per_user_snr",
    "combiner_snr",
    "zf_gain_samples",
    "rate_estimate",
    "mc_ergodic_rate",
    "default_threads",
]

RANK_TOL = 1e-10
CHUNK = 2048


def default_threads() -> int:
    """Worker cap from ``FLEXSECTOR_THREADS``, else the machine's core count."""
    env = os.environ.get("FLEXSECTOR_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise DomainError(f"FLEXSECTOR_THREADS must be an integer, got {env!r}") from None
        if value >= 1:
            return value
    return os.cpu_count() or 1


def antenna_gain(phi, B: int):
    """Truncated sector pattern: ``B`` inside ``[-pi/B, pi/B]``, zero outside."""
    if B < 1:
        raise DomainError("B must be at least 1")
    half = math.pi / B
    phi = np.asarray(phi, dtype=float)
    out = np.where((phi >= -half) & (phi <= half), float(B), 0.0)
    return float(out) if out.ndim == 0 else out


def path_loss(radius, D: float, alpha: float = 3.5, r_min: float = 1.0):
    """Average channel power gain ``(max(r, r_min) / D) ** -alpha``.

    Any positive model gives identical rates under channel inversion; this
    one only exists so realizations carry plausible ``zeta`` values.
    """
    r = np.maximum(np.asarray(radius, dtype=float), r_min)
    return (r / D) ** (-alpha)


def _complex_normal(rng, shape):
    x = rng.standard_normal(shape[:-1] + (2 * shape[-1],))
    return x.view(np.complex128) * np.sqrt(0.5)


@dataclass(frozen=True)
class ChannelDraw:
    """One sector's channel: fading ``G`` (``N_b x Q_b``) plus large-scale terms."""

    G: np.ndarray
    B: int
    zeta: np.ndarray
    noise_power: float = 1.0
    P0: float = 1.0

    @property
    def H(self) -> np.ndarray:
        return self.G * np.sqrt(self.B * self.zeta)[None, :]

    @property
    def tx_power(self) -> np.ndarray:
        """Channel-inversion transmit powers ``P0 / zeta_k``."""
        return self.P0 / self.zeta

    @property
    def gamma0(self) -> float:
        return self.P0 / self.noise_power


def draw_channel(N_b: int, Q_b: int, B: int, rng, zeta=None, noise_power: float = 1.0,
                 P0: float = 1.0) -> ChannelDraw:
    if zeta is None:
        zeta = np.ones(Q_b)
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (Q_b,) or np.any(zeta <= 0):
        raise DomainError("zeta must hold one positive gain per user")
    return ChannelDraw(_complex_normal(rng, (N_b, Q_b)), B, zeta, noise_power, P0)


def _gram_factor(H):
    N_b, Q_b = H.shape
    if N_b < Q_b:
        raise InfeasibleError(f"ZF needs N_b >= Q_b, got N_b={N_b}, Q_b={Q_b}", deficit=Q_b - N_b)
    gram = H.conj().T @ H
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError:
        raise SingularChannelError("channel Gram matrix is not positive definite") from None
    pivots = np.abs(np.diag(factor[0])) ** 2
    if pivots.min() < RANK_TOL * np.real(np.diag(gram)).max():
        raise SingularChannelError("channel Gram matrix is numerically rank deficient")
    return factor


def zf_combiners(H) -> np.ndarray:
    """Unit-norm ZF combiners, the normalized columns of ``H (H^H H)^-1``.

    Raises:
        InfeasibleError: if ``H`` has more columns than rows.
        SingularChannelError: if the Gram matrix is rank deficient; draw
            a new channel.
    """
    H = np.asarray(H, dtype=complex)
    factor = _gram_factor(H)
    W = H @ linalg.cho_solve(factor, np.eye(H.shape[1], dtype=complex))
    return W / np.linalg.norm(W, axis=0, keepdims=True)


def per_user_snr(H, gamma0: float, tx_power=None) -> np.ndarray:
    """Post-ZF SNR ``gamma0 * p_k / [(H^H H)^-1]_kk``.

    ``tx_power`` is each user's transmit power relative to ``P0`` (all ones
    when omitted).
    """
    H = np.asarray(H, dtype=complex)
    factor = _gram_factor(H)
    inv_diag = np.real(np.diag(linalg.cho_solve(factor, np.eye(H.shape[1], dtype=complex))))
    p = np.ones(H.shape[1]) if tx_power is None else np.asarray(tx_power, dtype=float)
    return gamma0 * p / inv_diag


def combiner_snr(H, W, gamma0: float, tx_power=None) -> np.ndarray:
    """Same SNR computed from the combiners, ``gamma0 * p_k * |w_k^H h_k|^2``."""
    H = np.asarray(H, dtype=complex)
    p = np.ones(H.shape[1]) if tx_power is None else np.asarray(tx_power, dtype=float)
    return gamma0 * p * np.abs(np.einsum("nk,nk->k", np.conj(W), H)) ** 2


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "trials": self.trials, "seed": self.seed}


def _chunk_gains(N_b, Q_b, size, seed, chunk_index):
    """ZF gains ``1 / [(G^H G)^-1]_11`` for one chunk of trials."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))
    G = _complex_normal(rng, (size, N_b, Q_b))
    gram = np.conj(np.swapaxes(G, 1, 2)) @ G
    e1 = np.zeros((Q_b, 1), dtype=complex)
    e1[0, 0] = 1.0
    try:
        x = np.real(np.linalg.solve(gram, np.broadcast_to(e1, (size, Q_b, 1)))[:, 0, 0])
        gains = 1.0 / x
    except np.linalg.LinAlgError:
        gains = np.full(size, np.nan)
    scale = np.real(np.diagonal(gram, axis1=1, axis2=2)).max(axis=1)
    bad = ~np.isfinite(gains) | (gains < RANK_TOL * scale)
    for t in np.flatnonzero(bad):
        gains[t] = _redraw_gain(N_b, Q_b, seed, chunk_index, int(t))
    return gains


def _redraw_gain(N_b, Q_b, seed, chunk_index, t):
    for attempt in range(1, 1000):
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(chunk_index, t, attempt)))
        G = _complex_normal(rng, (N_b, Q_b))
        try:
            factor = _gram_factor(G)
        except SingularChannelError:
            continue
        inv = linalg.cho_solve(factor, np.eye(Q_b, dtype=complex))
        return 1.0 / float(np.real(inv[0, 0]))
    raise SingularChannelError("could not draw a full-rank channel")


def zf_gain_samples(N_b: int, Q_b: int, trials: int, seed: int,
                    threads: int | None = None) -> np.ndarray:
    """Per-trial effective ZF gain of user 1, ``1 / [(G^H G)^-1]_11``.

    The gain is Gamma(N_b - Q_b + 1) distributed in theory; here it is
    computed by brute force from sampled fading matrices.
    """
    if not (isinstance(N_b, (int, np.integer)) and isinstance(Q_b, (int, np.integer))):
        raise DomainError("N_b and Q_b must be integers")
    if Q_b < 1:
        raise DomainError("Q_b must be at least 1")
    if N_b < Q_b:
        raise InfeasibleError(f"ZF needs N_b >= Q_b, got N_b={N_b}, Q_b={Q_b}", deficit=Q_b - N_b)
    if trials < 1:
        raise DomainError("trials must be at least 1")
    sizes = [min(CHUNK, trials - start) for start in range(0, trials, CHUNK)]
    workers = min(threads or default_threads(), len(sizes))
    jobs = [(int(N_b), int(Q_b), size, seed, i) for i, size in enumerate(sizes)]
    if workers <= 1:
        parts = [_chunk_gains(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk_gains(*job), jobs))
    return np.concatenate(parts)


def rate_estimate(gains, B: int, gamma0: float, seed: int = 0) -> McEstimate:
    """Ergodic-rate estimate from precomputed ZF gains."""
    gains = np.asarray(gains, dtype=float)
    rates = np.log2(1.0 + B * gamma0 * gains)
    n = rates.size
    se = float(np.std(rates, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return McEstimate(float(np.sum(rates) / n), se, n, seed)


def mc_ergodic_rate(N_b: int, Q_b: int, B: int, gamma0: float, trials: int, seed: int,
                    threads: int | None = None) -> McEstimate:
    """Monte-Carlo estimate of ``E[log2(1 + gamma_{b,1})]`` under ZF combining."""
    gains = zf_gain_samples(N_b, Q_b, trials, seed, threads=threads)
    return rate_estimate(gains, B, gamma0, seed)
