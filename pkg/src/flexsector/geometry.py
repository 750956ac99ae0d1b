"""Zone/sector geometry and the angular-domain user distribution.

Zones are 1-based and arranged counter-clockwise, zone 1 starting at azimuth
0.  A cell with ``Z`` zones and ``B`` sectors has ``c = Z / B`` zones per
sector; the common rotation index ``z0`` names the first zone of sector 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "CellConfig",
    "ZoneProfile",
    "SectorView",
    "UserRealization",
    "zone_sets",
    "build_sector_view",
    "users_per_sector",
    "sample_users",
    "check_user_assumptions",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class CellConfig:
    """Global scenario parameters.

    Attributes:
        N: total number of antennas at the base station.
        B: number of sectors.
        Z: number of angular zones; must be a multiple of ``B``.
        D: cell radius in meters.
        d: antenna track radius in meters. Carried as metadata only.
        gamma0: normalized SNR ``P0 / noise`` (linear).
        min_rate: per-user minimum rate in bps/Hz.
    """

    N: int
    B: int
    Z: int
    D: float = 100.0
    d: float = 0.0
    gamma0: float = 1.0
    min_rate: float = 0.0

    def __post_init__(self):
        for name in ("N", "B", "Z"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.Z % self.B != 0:
            raise DomainError(f"Z={self.Z} is not a multiple of B={self.B}")
        if not (self.D > 0 and math.isfinite(self.D)):
            raise DomainError(f"cell radius D must be positive, got {self.D!r}")
        if not (self.d >= 0 and math.isfinite(self.d)):
            raise DomainError(f"track radius d must be nonnegative, got {self.d!r}")
        if not (self.gamma0 > 0 and math.isfinite(self.gamma0)):
            raise DomainError(f"gamma0 must be positive and finite, got {self.gamma0!r}")
        if not (self.min_rate >= 0 and math.isfinite(self.min_rate)):
            raise DomainError(f"min_rate must be nonnegative, got {self.min_rate!r}")

    @property
    def c(self) -> int:
        """Zones per sector."""
        return self.Z // self.B

    @property
    def gamma0_db(self) -> float:
        return linear_to_db(self.gamma0)

    def replace(self, **changes) -> "CellConfig":
        values = {
            "N": self.N, "B": self.B, "Z": self.Z, "D": self.D, "d": self.d,
            "gamma0": self.gamma0, "min_rate": self.min_rate,
        }
        values.update(changes)
        return CellConfig(**values)


@dataclass(frozen=True)
class ZoneProfile:
    """Expected number of users ``K_z`` in each zone (index 0 is zone 1)."""

    expected_users: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(k) for k in self.expected_users)
        if not values:
            raise DomainError("zone profile needs at least one zone")
        if any(not math.isfinite(k) or k < 0 for k in values):
            raise DomainError("expected users per zone must be finite and nonnegative")
        if not sum(values) > 0:
            raise DomainError("total expected users K must be positive")
        object.__setattr__(self, "expected_users", values)

    @classmethod
    def from_densities(cls, densities, D: float) -> "ZoneProfile":
        """Build from per-zone user densities (users per square meter)."""
        densities = [float(x) for x in densities]
        psi = 2.0 * math.pi / len(densities)
        return cls(tuple(0.5 * psi * D * D * lam for lam in densities))

    @property
    def Z(self) -> int:
        return len(self.expected_users)

    @property
    def K(self) -> float:
        return math.fsum(self.expected_users)

    @property
    def psi(self) -> float:
        """Angular width of one zone in radians."""
        return 2.0 * math.pi / self.Z

    def densities(self, D: float) -> tuple[float, ...]:
        return tuple(k / (0.5 * self.psi * D * D) for k in self.expected_users)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.expected_users, dtype=float)


@dataclass(frozen=True)
class SectorView:
    """Partition of zones into sectors for one rotation index."""

    z0: int
    zone_sets: tuple[tuple[int, ...], ...]
    expected_users: tuple[float, ...] = field(default=())

    @property
    def B(self) -> int:
        return len(self.zone_sets)

    @property
    def q(self) -> np.ndarray:
        return np.asarray(self.expected_users, dtype=float)


def zone_sets(Z: int, B: int, z0: int) -> tuple[tuple[int, ...], ...]:
    """Zone indices of every sector for an arbitrary integer ``z0``.

    Raw indices ``z0 + (b-1)c ... z0 + bc - 1`` are wrapped into ``1..Z`` with
    ``((x - 1) mod Z) + 1``. No range check on ``z0``; see
    :func:`build_sector_view` for the validated entry point.
    """
    c = Z // B
    return tuple(
        tuple(((z0 + (b - 1) * c + j - 1) % Z) + 1 for j in range(c))
        for b in range(1, B + 1)
    )


def build_sector_view(cfg: CellConfig, z0: int, profile: ZoneProfile | None = None) -> SectorView:
    """Sector partition for rotation index ``z0`` in ``1..c``.

    If ``profile`` is given the per-sector expected user counts are filled in.
    """
    if isinstance(z0, bool) or int(z0) != z0 or not 1 <= z0 <= cfg.c:
        raise DomainError(f"rotation index z0={z0!r} outside 1..{cfg.c}")
    sets = zone_sets(cfg.Z, cfg.B, int(z0))
    view = SectorView(int(z0), sets)
    if profile is not None:
        view = SectorView(view.z0, sets, tuple(users_per_sector(profile, view)))
    return view


def users_per_sector(profile: ZoneProfile, view: SectorView) -> list[float]:
    """Expected users per sector, ``Q_b = sum of K_z over the sector's zones``."""
    Z = sum(len(s) for s in view.zone_sets)
    if Z != profile.Z:
        raise DomainError(f"profile has {profile.Z} zones but sector view covers {Z}")
    k = profile.expected_users
    return [math.fsum(k[z - 1] for z in zones) for zones in view.zone_sets]


def check_user_assumptions(profile: ZoneProfile, cfg: CellConfig, *,
                           require_zone_users: bool = False,
                           require_sector_users: bool = False) -> None:
    """Optionally enforce ``K_z >= 1`` and ``Q_b(z0) >= 1`` for every ``z0``.

    Both are off by default; clustered profiles routinely violate them.
    """
    if profile.Z != cfg.Z:
        raise DomainError(f"profile has {profile.Z} zones, config has Z={cfg.Z}")
    if require_zone_users and min(profile.expected_users) < 1:
        raise DomainError("every zone must hold at least one expected user")
    if require_sector_users:
        for z0 in range(1, cfg.c + 1):
            q = users_per_sector(profile, build_sector_view(cfg, z0))
            if min(q) < 1:
                raise DomainError(f"a sector holds fewer than one user at z0={z0}")


@dataclass(frozen=True)
class UserRealization:
    """One drop of users: polar coordinates plus the zone each user lives in."""

    radius: np.ndarray
    azimuth: np.ndarray
    zone: np.ndarray
    seed: int
    mode: str

    def __len__(self):
        return len(self.radius)

    def counts_per_zone(self, Z: int) -> np.ndarray:
        return np.bincount(self.zone - 1, minlength=Z)


def sample_users(profile: ZoneProfile, cfg: CellConfig, seed: int,
                 mode: str = "fixed") -> UserRealization:
    """Drop users inside the cell, zone by zone.

    In ``"fixed"`` mode each zone gets exactly ``round(K_z)`` users (halves
    round up); in ``"poisson"`` mode the count is Poisson with mean ``K_z``.
    Positions are uniform over the zone's circular sector, so the radius is
    ``D * sqrt(u)``.
    """
    if profile.Z != cfg.Z:
        raise DomainError(f"profile has {profile.Z} zones, config has Z={cfg.Z}")
    rng = np.random.default_rng(seed)
    k = profile.as_array()
    if mode == "fixed":
        counts = np.floor(k + 0.5).astype(np.int64)
    elif mode == "poisson":
        counts = rng.poisson(k)
    else:
        raise DomainError(f"unknown sampling mode {mode!r}")

    total = int(counts.sum())
    zone = np.repeat(np.arange(1, profile.Z + 1), counts)
    psi = profile.psi
    offset = rng.uniform(0.0, psi, size=total)
    azimuth = (zone - 1) * psi + offset
    # guard against (z-1)*psi + offset rounding onto the next zone's edge
    azimuth = np.minimum(azimuth, np.nextafter(zone * psi, 0.0))
    radius = cfg.D * np.sqrt(rng.uniform(0.0, 1.0, size=total))
    return UserRealization(radius, azimuth, zone, int(seed), mode)
