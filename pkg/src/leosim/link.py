"""RF link budget and achievable-rate selection.

Received power uses parabolic antenna gains and free-space path loss; the data
rate is the bandwidth times the highest spectral efficiency whose SNR threshold
the link clears, or zero when even the most robust scheme is infeasible.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources

from .constants import BOLTZMANN, SPEED_OF_LIGHT


@dataclass(frozen=True)
class RadioParams:
    """One directed link's radio hardware.

    rx_antenna_diameter_m defaults to antenna_diameter_m; set it when the two
    ends carry different dishes (gateway vs satellite).
    """

    tx_power_w: float
    carrier_hz: float
    antenna_diameter_m: float
    antenna_efficiency: float = 0.6
    bandwidth_hz: float = 500e6
    system_noise_temp_k: float = 290.0
    rx_antenna_diameter_m: float | None = None

    def __post_init__(self):
        for field in ("tx_power_w", "carrier_hz", "antenna_diameter_m", "bandwidth_hz", "system_noise_temp_k"):
            if not getattr(self, field) > 0:
                raise ValueError(f"{field} must be positive")
        if not (0.0 < self.antenna_efficiency <= 1.0):
            raise ValueError("antenna_efficiency must lie in (0, 1]")
        if self.rx_antenna_diameter_m is not None and not self.rx_antenna_diameter_m > 0:
            raise ValueError("rx_antenna_diameter_m must be positive")

    @property
    def rx_diameter_m(self) -> float:
        return self.rx_antenna_diameter_m if self.rx_antenna_diameter_m is not None else self.antenna_diameter_m


def antenna_gain(diameter_m: float, carrier_hz: float, efficiency: float = 0.6) -> float:
    """Parabolic dish gain eta*(pi*D*f/c)^2, linear (not dB)."""
    if diameter_m <= 0 or carrier_hz <= 0:
        raise ValueError("diameter and carrier frequency must be positive")
    if not (0.0 < efficiency <= 1.0):
        raise ValueError("efficiency must lie in (0, 1]")
    return efficiency * (math.pi * diameter_m * carrier_hz / SPEED_OF_LIGHT) ** 2


def received_power(params: RadioParams, distance_m: float) -> float:
    """P_t * G_tx * G_rx * (c / (4*pi*d*f))^2 in watts."""
    if not distance_m > 0:
        raise ValueError("distance_m must be > 0")
    g_tx = antenna_gain(params.antenna_diameter_m, params.carrier_hz, params.antenna_efficiency)
    g_rx = antenna_gain(params.rx_diameter_m, params.carrier_hz, params.antenna_efficiency)
    path = (SPEED_OF_LIGHT / (4.0 * math.pi * distance_m * params.carrier_hz)) ** 2
    return params.tx_power_w * g_tx * g_rx * path


class McsTable:
    """Ordered (spectral efficiency, minimum SNR) pairs, strictly increasing in both."""

    def __init__(self, entries: list[tuple[float, float]]):
        if not entries:
            raise ValueError("MCS table must have at least one entry")
        for (r0, s0), (r1, s1) in zip(entries, entries[1:]):
            if not (r1 > r0 and s1 > s0):
                raise ValueError(
                    f"MCS entries must be strictly increasing in both columns; "
                    f"({r1}, {s1}) follows ({r0}, {s0})"
                )
        self.entries = [(float(r), float(s)) for r, s in entries]

    @classmethod
    def from_csv(cls, text: str) -> "McsTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["rho", "snr_min_db"]:
            raise ValueError(f"expected header rho,snr_min_db, got {header}")
        entries = []
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"malformed MCS row: {row}")
            entries.append((float(row[0]), float(row[1])))
        return cls(entries)

    @classmethod
    def default(cls) -> "McsTable":
        text = resources.files("leosim.data").joinpath("dvbs2_mcs.csv").read_text()
        return cls.from_csv(text)

    def best_efficiency(self, snr_linear: float) -> float:
        """Highest rho whose threshold the SNR clears, or 0.0."""
        snr_db = 10.0 * math.log10(snr_linear) if snr_linear > 0 else -math.inf
        best = 0.0
        for rho, snr_min_db in self.entries:
            if snr_db >= snr_min_db:
                best = rho
        return best


def select_rate(params: RadioParams, table: McsTable, distance_m: float) -> float:
    """Achievable rate W*rho in bits/s, or 0.0 when the link closes no scheme."""
    p_r = received_power(params, distance_m)
    snr = p_r / (BOLTZMANN * params.system_noise_temp_k * params.bandwidth_hz)
    return params.bandwidth_hz * table.best_efficiency(snr)


@dataclass(frozen=True)
class LinkBudgets:
    """Radio parameters for the three link classes plus the shared MCS table."""

    isl: RadioParams
    gsl_up: RadioParams
    gsl_down: RadioParams
    table: McsTable

    @classmethod
    def standard(
        cls,
        sat_tx_power_w: float = 10.0,
        gw_tx_power_w: float = 20.0,
        isl_hz: float = 26e9,
        uplink_hz: float = 30e9,
        downlink_hz: float = 20e9,
        sat_dish_m: float = 0.26,
        gw_dish_m: float = 0.33,
        antenna_efficiency: float = 0.6,
        bandwidth_hz: float = 500e6,
        system_noise_temp_k: float = 290.0,
        table: McsTable | None = None,
    ) -> "LinkBudgets":
        common = dict(
            antenna_efficiency=antenna_efficiency,
            bandwidth_hz=bandwidth_hz,
            system_noise_temp_k=system_noise_temp_k,
        )
        return cls(
            isl=RadioParams(sat_tx_power_w, isl_hz, sat_dish_m, **common),
            gsl_up=RadioParams(
                gw_tx_power_w, uplink_hz, gw_dish_m, rx_antenna_diameter_m=sat_dish_m, **common
            ),
            gsl_down=RadioParams(
                sat_tx_power_w, downlink_hz, sat_dish_m, rx_antenna_diameter_m=gw_dish_m, **common
            ),
            table=table if table is not None else McsTable.default(),
        )
