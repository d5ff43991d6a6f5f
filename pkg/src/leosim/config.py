"""Scenario configuration: validated model, YAML loading, RNG streams, CSV shapes.

A scenario file is a YAML mapping; every field has a default, so the minimal
valid file is one naming just a constellation preset.  ``load_config`` turns
validation failures into :class:`ConfigError` with dotted field paths so a CLI
can report them without a traceback.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .link import LinkBudgets, McsTable
from .orbit import PRESETS, WALKER_DELTA, WALKER_STAR, ConstellationSpec


class ConfigError(Exception):
    """A scenario file could not be read or did not validate."""


class ConstellationCfg(BaseModel):
    """Either a named preset or a fully explicit Walker geometry."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = "kepler"
    planes: int | None = Field(default=None, ge=1)
    sats_per_plane: int | None = Field(default=None, ge=1)
    altitude_km: float | None = Field(default=None, gt=0)
    inclination_deg: float | None = Field(default=None, ge=0, le=180)
    architecture: Literal["walker_star", "walker_delta"] = "walker_star"
    phasing_offset_rad: float = 0.0

    @model_validator(mode="after")
    def _preset_xor_explicit(self):
        explicit = [self.planes, self.sats_per_plane, self.altitude_km, self.inclination_deg]
        if any(v is not None for v in explicit):
            if self.preset is not None:
                raise ValueError("give either preset or explicit geometry, not both")
            if any(v is None for v in explicit):
                raise ValueError(
                    "explicit geometry needs planes, sats_per_plane, altitude_km "
                    "and inclination_deg together"
                )
        elif self.preset is None:
            raise ValueError("either preset or explicit geometry is required")
        elif self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; known: {sorted(PRESETS)}")
        return self

    def to_spec(self) -> ConstellationSpec:
        if self.preset is not None:
            base = PRESETS[self.preset]
            if self.phasing_offset_rad != base.phasing_offset_rad:
                return ConstellationSpec(
                    base.planes,
                    base.sats_per_plane,
                    base.altitude_m,
                    base.inclination_rad,
                    base.architecture,
                    self.phasing_offset_rad,
                )
            return base
        arch = WALKER_STAR if self.architecture == "walker_star" else WALKER_DELTA
        return ConstellationSpec(
            self.planes,
            self.sats_per_plane,
            self.altitude_km * 1e3,
            math.radians(self.inclination_deg),
            arch,
            self.phasing_offset_rad,
        )


class RadioCfg(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sat_tx_power_w: float = Field(default=10.0, gt=0)
    gw_tx_power_w: float = Field(default=20.0, gt=0)
    isl_carrier_ghz: float = Field(default=26.0, gt=0)
    uplink_carrier_ghz: float = Field(default=30.0, gt=0)
    downlink_carrier_ghz: float = Field(default=20.0, gt=0)
    sat_antenna_diameter_m: float = Field(default=0.26, gt=0)
    gw_antenna_diameter_m: float = Field(default=0.33, gt=0)
    antenna_efficiency: float = Field(default=0.6, gt=0, le=1)
    bandwidth_hz: float = Field(default=500e6, gt=0)
    system_noise_temp_k: float = Field(default=290.0, gt=0)
    mcs_table_path: str | None = None

    def to_budgets(self) -> LinkBudgets:
        if self.mcs_table_path is not None:
            with open(self.mcs_table_path, encoding="utf-8") as fh:
                table = McsTable.from_csv(fh.read())
        else:
            table = McsTable.default()
        return LinkBudgets.standard(
            sat_tx_power_w=self.sat_tx_power_w,
            gw_tx_power_w=self.gw_tx_power_w,
            isl_hz=self.isl_carrier_ghz * 1e9,
            uplink_hz=self.uplink_carrier_ghz * 1e9,
            downlink_hz=self.downlink_carrier_ghz * 1e9,
            sat_dish_m=self.sat_antenna_diameter_m,
            gw_dish_m=self.gw_antenna_diameter_m,
            antenna_efficiency=self.antenna_efficiency,
            bandwidth_hz=self.bandwidth_hz,
            system_noise_temp_k=self.system_noise_temp_k,
            table=table,
        )


class TrafficCfg(BaseModel):
    model_config = ConfigDict(extra="forbid")

    load_fraction: float = Field(default=0.01, ge=0)
    block_bits: float = Field(default=64800.0, gt=0)


class EngineCfg(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q_max: int = Field(default=100, ge=1)
    position_update_interval_s: float = Field(default=15.0, gt=0)
    max_hops: int = Field(default=64, ge=1)


class LearningCfg(BaseModel):
    """Mirrors the runtime learning-parameter record field for field."""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=1e-3, gt=0)
    gamma: float = Field(default=0.99, ge=0, le=1)
    batch_size: int = Field(default=32, ge=1)
    global_buffer: int = Field(default=200_000, ge=1)
    agent_buffer: int = Field(default=20_000, ge=1)
    target_update_period: int = Field(default=1000, ge=1)
    eps_min: float = Field(default=0.01, ge=0, le=1)
    eps_max: float = Field(default=1.0, ge=0, le=1)
    kappa: float = Field(default=-5.0, lt=0)
    online_epsilon: float = Field(default=0.01, ge=0, le=1)
    train_online: bool = True
    sigma: float = Field(default=20.0, gt=0)
    c_star: int = Field(default=10, ge=1)
    tq_unit_scale: float = Field(default=1.0, gt=0)
    w1: float = 20.0
    w2: float = 20.0
    w3: float = 1.0
    w4: float = Field(default=5.0, gt=0)
    r_deliver: float = 50.0
    r_loop: float = -5.0
    r_unavailable: float = -5.0
    qrouting_alpha: float = Field(default=0.1, gt=0, le=1)

    @model_validator(mode="after")
    def _eps_ordered(self):
        if self.eps_min > self.eps_max:
            raise ValueError("eps_min must not exceed eps_max")
        return self


class ScheduleCfg(BaseModel):
    """Aggregation cadence; everything disabled by default."""

    model_config = ConfigDict(extra="forbid")

    anticipation_enabled: bool = False
    anticipation_period_s: float = Field(default=290.0, gt=0)
    cluster_enabled: bool = False
    cluster_period_s: float = Field(default=1450.0, gt=0)
    global_enabled: bool = False
    global_period_s: float = Field(default=5800.0, gt=0)


class SeedsCfg(BaseModel):
    """One independent seed per randomness consumer, plus the generator name
    so an echoed config records exactly how streams were drawn."""

    model_config = ConfigDict(extra="forbid")

    topology: int = Field(default=1, ge=0)
    traffic: int = Field(default=2, ge=0)
    learning: int = Field(default=3, ge=0)
    probes: int = Field(default=4, ge=0)
    algorithm: Literal["pcg64"] = "pcg64"


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    constellation: ConstellationCfg = Field(default_factory=ConstellationCfg)
    gateway_count: int = Field(default=2, ge=1, le=8)
    min_elevation_deg: float | None = Field(default=None, ge=0, lt=90)
    horizon_s: float = Field(default=4.0, ge=0)
    radio: RadioCfg = Field(default_factory=RadioCfg)
    traffic: TrafficCfg = Field(default_factory=TrafficCfg)
    engine: EngineCfg = Field(default_factory=EngineCfg)
    learning: LearningCfg = Field(default_factory=LearningCfg)
    schedule: ScheduleCfg = Field(default_factory=ScheduleCfg)
    seeds: SeedsCfg = Field(default_factory=SeedsCfg)


def _error_lines(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(doc: object) -> ScenarioConfig:
    """Validate an already-parsed YAML document (a mapping or None)."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("scenario file must contain a mapping")
    try:
        return ScenarioConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_error_lines(exc)) from exc


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(doc)


def effective_config_yaml(cfg: ScenarioConfig) -> str:
    """Serialize the fully resolved config; reloading it gives an equal model."""
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


_STREAMS = ("topology", "traffic", "learning", "probes")


def rng_stream(cfg: ScenarioConfig, name: str) -> np.random.Generator:
    """A fresh generator for one named consumer; streams never share state."""
    if name not in _STREAMS:
        raise ValueError(f"unknown rng stream {name!r}; known: {list(_STREAMS)}")
    return np.random.default_rng(getattr(cfg.seeds, name))


# Column contracts for every CSV artifact the runs emit.  Writers and the
# drift-checked docs both read from here.
CSV_SCHEMAS: dict[str, tuple[str, ...]] = {
    "latency.csv": ("packet_id", "src", "dst", "created_t", "delivered_t", "e2e_s", "hops"),
    "cdf.csv": ("latency_s", "percentile"),
    "cdf_comparison.csv": ("percentile", "latency_s", "baseline_latency_s"),
    "heatmap.csv": ("node_a", "node_b", "packets"),
    "drops.csv": ("packet_id", "node", "t"),
    "rewards.csv": ("t", "agent", "reward", "r_queue", "r_distance", "r_event"),
    "epsilon.csv": ("t", "epsilon"),
    "aggregation_log.csv": ("t", "kind", "participants", "pre_mean_cka", "post_mean_cka"),
    "cka.csv": ("agent_i", "agent_j", "value"),
    "topology.csv": ("t", "node_a", "node_b", "kind", "distance_m", "rate_bps"),
    "nodes.csv": ("node_id", "name", "kind", "lat_deg", "lon_deg", "plane", "slot"),
}


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def csv_text(name: str, rows: list[tuple]) -> str:
    """Render rows under the registered header for ``name``.

    Floats use repr so equal runs produce byte-equal files; '\\n' endings.
    """
    header = CSV_SCHEMAS[name]
    out = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{name}: row has {len(row)} cells, header has {len(header)}")
        out.append(",".join(_cell(v) for v in row))
    return "\n".join(out) + "\n"


def config_schema() -> dict:
    """JSON schema of the scenario model (what the docs snapshot pins)."""
    return ScenarioConfig.model_json_schema()


def csv_schemas_markdown() -> str:
    """Human-readable listing of every CSV artifact and its columns."""
    lines = [
        "# CSV artifacts",
        "",
        "All files use ',' separators, '.' decimal points and '\\n' line",
        "endings; floats are written with repr so reruns are byte-identical.",
        "",
    ]
    for name in sorted(CSV_SCHEMAS):
        cols = ", ".join(CSV_SCHEMAS[name])
        lines.append(f"- `{name}`: {cols}")
    return "\n".join(lines) + "\n"
