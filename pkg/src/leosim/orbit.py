"""Constellation geometry: Walker star/delta generation and circular-orbit propagation.

Satellites move on circular orbits in a fixed Earth-centered frame; gateways are
static points on a spherical Earth. Positions are deterministic functions of
(constellation spec, time), so propagation is exactly periodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EARTH_RADIUS_M, MU_EARTH

WALKER_STAR = "walker_star"
WALKER_DELTA = "walker_delta"

SATELLITE = "sat"
GATEWAY = "gw"

# Gateway sites in the fixed serving order; a scenario with |G| gateways uses the
# first |G| entries.
GATEWAY_SITES = [
    ("malaga", 36.72, -4.42),
    ("losangeles", 34.05, -118.24),
    ("portlouis", -20.16, 57.50),
    ("vardo", 70.37, 31.11),
    ("nuuk", 64.18, -51.72),
    ("nemea", 37.82, 22.66),
    ("azores", 37.74, -25.67),
    ("bangalore", 12.97, 77.59),
]


@dataclass(frozen=True)
class ConstellationSpec:
    """Walker constellation parameters."""

    planes: int
    sats_per_plane: int
    altitude_m: float
    inclination_rad: float
    architecture: str = WALKER_STAR
    phasing_offset_rad: float = 0.0

    def __post_init__(self):
        if self.planes < 1:
            raise ValueError("planes must be >= 1")
        if self.sats_per_plane < 1:
            raise ValueError("sats_per_plane must be >= 1")
        if not (self.altitude_m > 0 and math.isfinite(self.altitude_m)):
            raise ValueError("altitude_m must be positive and finite")
        if not (0.0 < self.inclination_rad <= math.pi):
            raise ValueError("inclination_rad must lie in (0, pi]")
        if self.architecture not in (WALKER_STAR, WALKER_DELTA):
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def n_sats(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def orbit_radius_m(self) -> float:
        return EARTH_RADIUS_M + self.altitude_m

    @property
    def raan_span_rad(self) -> float:
        """Longitude-of-ascending-node span covered by the planes."""
        return math.pi if self.architecture == WALKER_STAR else 2.0 * math.pi

    def plane_raan(self, plane: int) -> float:
        return self.raan_span_rad * plane / self.planes

    @property
    def period_s(self) -> float:
        return orbital_period(self.orbit_radius_m)


PRESETS = {
    "kepler": ConstellationSpec(7, 20, 600e3, math.radians(90.0), WALKER_STAR),
    "iridium-next": ConstellationSpec(6, 11, 780e3, math.radians(90.0), WALKER_STAR),
    "oneweb": ConstellationSpec(36, 18, 1200e3, math.radians(90.0), WALKER_STAR),
    "starlink-550": ConstellationSpec(72, 22, 550e3, math.radians(53.0), WALKER_DELTA),
}


@dataclass
class NodePosition:
    """A node (satellite or gateway) with its position at one instant."""

    node_id: int
    name: str
    kind: str
    ecef: np.ndarray
    lat_deg: float
    lon_deg: float
    plane: int | None = None
    slot: int | None = None


def orbital_period(semi_major_axis_m: float) -> float:
    """Circular-orbit period 2*pi*sqrt(a^3/mu) in seconds."""
    a = float(semi_major_axis_m)
    if not math.isfinite(a) or a <= 0.0:
        raise ValueError(f"semi-major axis must be positive and finite, got {a}")
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


def geodetic_to_ecef(lat_deg: float, lon_deg: float, radius_m: float = EARTH_RADIUS_M) -> np.ndarray:
    lat = math.radians(lat_deg)
    lon = math.radians(lon_deg)
    return np.array(
        [
            radius_m * math.cos(lat) * math.cos(lon),
            radius_m * math.cos(lat) * math.sin(lon),
            radius_m * math.sin(lat),
        ]
    )


def ecef_to_lat_lon(ecef: np.ndarray) -> tuple[float, float]:
    x, y, z = ecef
    r = math.sqrt(x * x + y * y + z * z)
    lat = math.degrees(math.asin(z / r))
    lon = math.degrees(math.atan2(y, x))
    return lat, lon


def _satellite_ecef(radius_m: float, raan: float, inclination: float, arg_lat: float) -> np.ndarray:
    """Position on a circular orbit; arg_lat measured from the ascending node."""
    cu, su = math.cos(arg_lat), math.sin(arg_lat)
    ci, si = math.cos(inclination), math.sin(inclination)
    co, so = math.cos(raan), math.sin(raan)
    return np.array(
        [
            radius_m * (cu * co - su * ci * so),
            radius_m * (cu * so + su * ci * co),
            radius_m * su * si,
        ]
    )


def propagate(spec: ConstellationSpec, t: float) -> list[NodePosition]:
    """Satellite positions at time t, ordered by node id (= plane*S + slot)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    radius = spec.orbit_radius_m
    period = spec.period_s
    mean_motion = 2.0 * math.pi / period
    positions = []
    for plane in range(spec.planes):
        raan = spec.plane_raan(plane)
        for slot in range(spec.sats_per_plane):
            arg_lat = (
                2.0 * math.pi * slot / spec.sats_per_plane
                + spec.phasing_offset_rad * plane
                + mean_motion * t
            )
            ecef = _satellite_ecef(radius, raan, spec.inclination_rad, arg_lat)
            lat, lon = ecef_to_lat_lon(ecef)
            node_id = plane * spec.sats_per_plane + slot
            positions.append(
                NodePosition(
                    node_id=node_id,
                    name=f"S{plane}-{slot}",
                    kind=SATELLITE,
                    ecef=ecef,
                    lat_deg=lat,
                    lon_deg=lon,
                    plane=plane,
                    slot=slot,
                )
            )
    return positions


def gateway_positions(count: int, id_offset: int) -> list[NodePosition]:
    """The first `count` gateway sites, with node ids starting at id_offset."""
    if not (1 <= count <= len(GATEWAY_SITES)):
        raise ValueError(f"gateway count must be in 1..{len(GATEWAY_SITES)}")
    nodes = []
    for idx in range(count):
        name, lat, lon = GATEWAY_SITES[idx]
        nodes.append(
            NodePosition(
                node_id=id_offset + idx,
                name=f"G{idx}-{name}",
                kind=GATEWAY,
                ecef=geodetic_to_ecef(lat, lon),
                lat_deg=lat,
                lon_deg=lon,
            )
        )
    return nodes


def slant_range(a: NodePosition, b: NodePosition) -> float:
    """Euclidean distance between two nodes in meters."""
    return float(np.linalg.norm(a.ecef - b.ecef))
