"""Scenario documents and the two reference user distributions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import DomainError
from .geometry import CellConfig, ZoneProfile, db_to_linear, linear_to_db

__all__ = [
    "SCHEMA_VERSION",
    "Scenario",
    "scenario_distribution_I",
    "scenario_distribution_II",
    "load_scenario",
    "check_schema",
]

SCHEMA_VERSION = 1

_REQUIRED = ("N", "B", "Z", "D", "gamma0_db", "min_rate", "zones")


def check_schema(doc: dict, kind: str) -> None:
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise DomainError(f"unsupported {kind} schema_version {version!r} "
                          f"(this build reads version {SCHEMA_VERSION})")


@dataclass(frozen=True)
class Scenario:
    name: str
    cfg: CellConfig
    profile: ZoneProfile
    seed: int = 0
    notes: str = ""

    def __post_init__(self):
        if self.profile.Z != self.cfg.Z:
            raise DomainError(f"scenario lists {self.profile.Z} zones but Z={self.cfg.Z}")

    def with_config(self, **changes) -> "Scenario":
        return Scenario(self.name, self.cfg.replace(**changes), self.profile, self.seed, self.notes)

    def to_dict(self) -> dict:
        cfg = self.cfg
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "N": cfg.N,
            "B": cfg.B,
            "Z": cfg.Z,
            "D": cfg.D,
            "d": cfg.d,
            "gamma0_db": linear_to_db(cfg.gamma0),
            "min_rate": cfg.min_rate,
            "zones": list(self.profile.expected_users),
            "seed": self.seed,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc) -> "Scenario":
        if not isinstance(doc, dict):
            raise DomainError("scenario document must be a JSON object")
        check_schema(doc, "scenario")
        missing = [key for key in _REQUIRED if key not in doc]
        if missing:
            raise DomainError(f"scenario is missing field(s): {', '.join(missing)}")
        zones = doc["zones"]
        if not isinstance(zones, list):
            raise DomainError("zones must be a list of expected user counts")
        try:
            gamma0_db = float(doc["gamma0_db"])
            if not math.isfinite(gamma0_db):
                raise ValueError
            cfg = CellConfig(
                N=doc["N"], B=doc["B"], Z=doc["Z"], D=float(doc["D"]),
                d=float(doc.get("d", 0.0)), gamma0=db_to_linear(gamma0_db),
                min_rate=float(doc["min_rate"]),
            )
            profile = ZoneProfile(tuple(zones))
            seed = int(doc.get("seed", 0))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed scenario field: {exc}") from None
        return cls(str(doc.get("name", "scenario")), cfg, profile, seed, str(doc.get("notes", "")))

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"scenario is not valid JSON: {exc}") from None
        return cls.from_dict(doc)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read scenario file {path}: {exc.strerror}") from None
    return Scenario.from_json(text)


def _reference_config(**overrides) -> CellConfig:
    values = dict(N=90, B=3, Z=30, D=100.0, d=0.0, gamma0=1.0, min_rate=5.0)
    values.update(overrides)
    return CellConfig(**values)


def scenario_distribution_I(**overrides) -> Scenario:
    """Quasi-uniform layout: 3 users per zone in zones 16-25, 1 elsewhere (K = 50)."""
    zones = [3.0 if 16 <= z <= 25 else 1.0 for z in range(1, 31)]
    return Scenario("dist1", _reference_config(**overrides), ZoneProfile(tuple(zones)), 0,
                    "quasi-uniform: zones 16-25 hold 3 users each, other zones 1")


def scenario_distribution_II(cluster_weight: float = 0.8, K: float = 50.0,
                             **overrides) -> Scenario:
    """Clustered layout.

    A fraction ``cluster_weight`` of the ``K`` users sits evenly in zones
    16-25; the rest are spread evenly over every other zone outside the
    cluster (1, 3, ..., 15, 27, 29), leaving the remaining zones empty. The
    defaults give 4 users per cluster zone and 1 per scattered zone.
    """
    if not 0.0 <= cluster_weight <= 1.0:
        raise DomainError("cluster_weight must lie in [0, 1]")
    if not K > 0:
        raise DomainError("K must be positive")
    cluster = range(16, 26)
    outside = [z for z in range(1, 31) if z not in cluster]
    scattered = outside[::2]
    zones = [0.0] * 30
    in_cluster = cluster_weight * K
    for z in cluster:
        zones[z - 1] = in_cluster / len(cluster)
    for z in scattered:
        zones[z - 1] = (K - in_cluster) / len(scattered)
    return Scenario("dist2", _reference_config(**overrides), ZoneProfile(tuple(zones)), 0,
                    f"clustered: {cluster_weight:g} of users in zones 16-25, "
                    "rest in alternate zones outside the cluster")
