"""Turn a validated scenario into simulation runs and their on-disk artifacts.

Every run function is pure in (config, seeds): it returns a mapping of
relative file names to text content plus a JSON-safe summary dict, and two
invocations with equal inputs produce byte-equal artifacts.  Writing to disk
is a separate step so services can return artifacts without touching the
filesystem.
"""

from __future__ import annotations

import dataclasses
import json
import pathlib

import numpy as np

from .analysis import (
    PROBE_COUNT,
    cka_matrix,
    collect_probes,
    latency_cdf,
    model_cka,
    percentile,
    random_observations,
)
from .config import ScenarioConfig, csv_text, effective_config_yaml, rng_stream
from .continual import AggregationSchedule, schedule_rounds
from .drlcore import LearningParams
from .engine import Simulation, SimulationResult
from .mlp import QNetwork
from .policies import (
    OnlineMultiAgentPolicy,
    OfflineGlobalPolicy,
    QRoutingPolicy,
    ShortestPathPolicy,
)
from .topology import build_snapshot, snapshot_rows
from .traffic import Packet, TrafficConfig, generate_arrivals, offered_uplink_rates

ARCHIVE_FORMAT_VERSION = 1

BASELINES = ("shortest-path", "q-routing", "ma-drl")


@dataclasses.dataclass
class RunResult:
    files: dict[str, str]
    summary: dict


def learning_params(cfg: ScenarioConfig) -> LearningParams:
    return LearningParams(**cfg.learning.model_dump())


def aggregation_schedule(cfg: ScenarioConfig) -> AggregationSchedule:
    return AggregationSchedule(**cfg.schedule.model_dump())


def snapshot_provider(cfg: ScenarioConfig):
    """Snapshot factory with a per-instant cache, shared across one run."""
    spec = cfg.constellation.to_spec()
    budgets = cfg.radio.to_budgets()
    cache: dict[float, object] = {}

    def provide(t: float):
        if t not in cache:
            cache[t] = build_snapshot(
                spec, t, cfg.gateway_count, budgets, cfg.min_elevation_deg
            )
        return cache[t]

    return provide


def make_packets(cfg: ScenarioConfig, snap0) -> list[Packet]:
    if cfg.horizon_s <= 0 or cfg.traffic.load_fraction <= 0:
        return []
    rates = offered_uplink_rates(snap0, cfg.traffic.load_fraction)
    tc = TrafficConfig(cfg.traffic.load_fraction, cfg.traffic.block_bits, rates)
    return generate_arrivals(tc, rng_stream(cfg, "traffic"), cfg.horizon_s)


def _empty_result() -> SimulationResult:
    return SimulationResult(0, [], [], 0, {}, {}, [])


def _run_simulation(cfg: ScenarioConfig, policy, schedule=None):
    """Build the world, optionally register learning rounds, run to horizon."""
    snapshot_fn = snapshot_provider(cfg)
    if cfg.horizon_s <= 0:
        policy.finish(None)
        return _empty_result()
    packets = make_packets(cfg, snapshot_fn(0.0))
    sim = Simulation(
        snapshot_fn,
        cfg.horizon_s,
        packets,
        policy,
        q_max=cfg.engine.q_max,
        position_update_interval_s=cfg.engine.position_update_interval_s,
        max_hops=cfg.engine.max_hops,
    )
    if schedule is not None:
        schedule_rounds(sim, schedule)
    return sim.run()


def _latency_rows(delivered: list[Packet]) -> list[tuple]:
    rows = []
    for p in delivered:
        rows.append(
            (
                p.id,
                p.src,
                p.dst,
                p.created_t,
                p.delivered_t,
                p.delivered_t - p.created_t,
                len(p.visited) + 1,
            )
        )
    rows.sort(key=lambda r: (r[4], r[0]))
    return rows


def _drop_rows(dropped: list[Packet]) -> list[tuple]:
    return sorted(((p.id, p.drop_node, p.drop_t) for p in dropped), key=lambda r: (r[2], r[0]))


def _heatmap_rows(edge_traffic: dict[tuple[int, int], int]) -> list[tuple]:
    return [(a, b, edge_traffic[(a, b)]) for a, b in sorted(edge_traffic)]


def _base_files(cfg: ScenarioConfig, result: SimulationResult) -> dict[str, str]:
    latencies = [p.delivered_t - p.created_t for p in result.delivered]
    files = {
        "effective_config.yaml": effective_config_yaml(cfg),
        "latency.csv": csv_text("latency.csv", _latency_rows(result.delivered)),
        "cdf.csv": csv_text("cdf.csv", latency_cdf(latencies) if latencies else []),
        "heatmap.csv": csv_text("heatmap.csv", _heatmap_rows(result.edge_traffic)),
        "drops.csv": csv_text("drops.csv", _drop_rows(result.dropped)),
    }
    return files


def _base_summary(policy_name: str, result: SimulationResult) -> dict:
    latencies = [p.delivered_t - p.created_t for p in result.delivered]
    summary = {
        "policy": policy_name,
        "generated": result.generated,
        "delivered": len(result.delivered),
        "dropped": len(result.dropped),
        "in_flight": result.in_flight,
        "mean_latency_s": float(np.mean(latencies)) if latencies else None,
        "p50_latency_s": percentile(latencies, 50.0) if latencies else None,
        "p95_latency_s": percentile(latencies, 95.0) if latencies else None,
    }
    return summary


def _finish(files: dict[str, str], summary: dict) -> RunResult:
    files["summary.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    return RunResult(files=files, summary=summary)


def run_offline(cfg: ScenarioConfig) -> RunResult:
    """Centralized training pass; saves the trained network alongside metrics."""
    policy = OfflineGlobalPolicy(
        learning_params(cfg), rng_stream(cfg, "learning"), n_gateways=cfg.gateway_count
    )
    result = _run_simulation(cfg, policy)
    files = _base_files(cfg, result)
    files["rewards.csv"] = csv_text("rewards.csv", policy.reward_rows)
    files["epsilon.csv"] = csv_text("epsilon.csv", policy.epsilon_rows)
    files["model.json"] = policy.agent.q_net.to_json()
    files["target_model.json"] = policy.agent.target_net.to_json()
    summary = _base_summary("offline", result)
    summary["train_steps_recorded"] = len(policy.reward_rows)
    summary["buffer_size"] = len(policy.agent.buffer.entries())
    return _finish(files, summary)


def _probe_provider(cfg: ScenarioConfig):
    """Probe matrix shared by every similarity measurement in one run; drawn
    once, from experience states when the buffers hold enough of them."""
    rng = rng_stream(cfg, "probes")
    params = learning_params(cfg)
    cache: dict[str, np.ndarray] = {}

    def provide(policy) -> np.ndarray:
        if "probes" not in cache:
            states = [
                e.s
                for sat_id in sorted(policy.agents)
                for e in policy.agents[sat_id].buffer.entries()
            ]
            cache["probes"] = collect_probes(
                states, rng, PROBE_COUNT, sigma=params.sigma, c_star=params.c_star
            )
        return cache["probes"]

    return provide


def _archive_doc(policy: OnlineMultiAgentPolicy) -> str:
    doc = {
        "format_version": ARCHIVE_FORMAT_VERSION,
        "planes": policy.planes,
        "sats_per_plane": policy.sats_per_plane,
        "agents": {str(i): policy.agents[i].q_net.to_doc() for i in sorted(policy.agents)},
    }
    return json.dumps(doc, sort_keys=True) + "\n"


def run_online(cfg: ScenarioConfig, model_doc: dict | None = None) -> RunResult:
    """Distributed phase: per-satellite agents, optional continual alignment."""
    spec = cfg.constellation.to_spec()
    base_net = QNetwork.from_doc(model_doc) if model_doc is not None else None
    policy = OnlineMultiAgentPolicy(
        learning_params(cfg),
        rng_stream(cfg, "learning"),
        spec.planes,
        spec.sats_per_plane,
        base_net=base_net,
        probe_fn=_probe_provider(cfg),
    )
    result = _run_simulation(cfg, policy, schedule=aggregation_schedule(cfg))
    files = _base_files(cfg, result)
    files["rewards.csv"] = csv_text("rewards.csv", policy.reward_rows)
    files["epsilon.csv"] = csv_text("epsilon.csv", policy.epsilon_rows)
    files["aggregation_log.csv"] = csv_text("aggregation_log.csv", policy.aggregation_rows)
    files["models_archive.json"] = _archive_doc(policy)
    summary = _base_summary("ma-drl", result)
    summary["agents"] = len(policy.agents)
    summary["aggregation_rounds"] = len(policy.aggregation_rows)
    summary["pretrained"] = model_doc is not None
    return _finish(files, summary)


def run_baseline(cfg: ScenarioConfig, policy_name: str, model_doc: dict | None = None) -> RunResult:
    """Reference policies sharing the exact same world and traffic."""
    if policy_name == "shortest-path":
        policy = ShortestPathPolicy()
    elif policy_name == "q-routing":
        policy = QRoutingPolicy(learning_params(cfg), rng_stream(cfg, "learning"))
    elif policy_name == "ma-drl":
        # frozen inference run of the learned policy, no alignment rounds
        spec = cfg.constellation.to_spec()
        params = dataclasses.replace(learning_params(cfg), train_online=False)
        base_net = QNetwork.from_doc(model_doc) if model_doc is not None else None
        policy = OnlineMultiAgentPolicy(
            params, rng_stream(cfg, "learning"), spec.planes, spec.sats_per_plane,
            base_net=base_net,
        )
    else:
        raise ValueError(f"unknown baseline policy {policy_name!r}; known: {list(BASELINES)}")
    result = _run_simulation(cfg, policy)
    files = _base_files(cfg, result)
    if hasattr(policy, "reward_rows"):
        files["rewards.csv"] = csv_text("rewards.csv", policy.reward_rows)
    summary = _base_summary(policy_name, result)
    return _finish(files, summary)


def run_topology(cfg: ScenarioConfig, t: float = 0.0) -> RunResult:
    snap = snapshot_provider(cfg)(t)
    node_rows = [
        (n.node_id, n.name, n.kind, n.lat_deg, n.lon_deg, n.plane, n.slot)
        for n in sorted(snap.nodes.values(), key=lambda n: n.node_id)
    ]
    files = {
        "effective_config.yaml": effective_config_yaml(cfg),
        "topology.csv": csv_text("topology.csv", snapshot_rows(snap)),
        "nodes.csv": csv_text("nodes.csv", node_rows),
    }
    summary = {
        "t": t,
        "satellites": snap.n_sats,
        "gateways": len(snap.gateways),
        "isl_edges": len(snap.edge_set.isl_edges),
        "gsl_edges": len(snap.edge_set.gsl_edges),
        "d_max_isl_m": float(snap.d_max_isl),
    }
    return _finish(files, summary)


def _archive_nets(archive: dict) -> dict[int, QNetwork]:
    if archive.get("format_version") != ARCHIVE_FORMAT_VERSION:
        raise ValueError("unsupported model archive format")
    return {int(k): QNetwork.from_doc(doc) for k, doc in archive["agents"].items()}


def run_cka(archive: dict, archive_b: dict | None = None, probe_seed: int = 4) -> RunResult:
    """Pairwise representation similarity for one archive, or across two."""
    nets = _archive_nets(archive)
    probes = random_observations(np.random.default_rng(probe_seed), PROBE_COUNT)
    rows: list[tuple] = []
    if archive_b is None:
        ids = sorted(nets)
        matrix = cka_matrix([nets[i] for i in ids], probes)
        off_diag = []
        for a in range(len(ids)):
            for b in range(a, len(ids)):
                rows.append((ids[a], ids[b], float(matrix[a, b])))
                if a != b:
                    off_diag.append(float(matrix[a, b]))
        mean = float(np.mean(off_diag)) if off_diag else 1.0
    else:
        nets_b = _archive_nets(archive_b)
        values = []
        for i in sorted(nets):
            for j in sorted(nets_b):
                v = model_cka(nets[i], nets_b[j], probes)
                rows.append((i, j, v))
                values.append(v)
        mean = float(np.mean(values))
    files = {"cka.csv": csv_text("cka.csv", rows)}
    summary = {
        "agents": len(nets),
        "pairs": len(rows),
        "mean_cka": mean,
        "probe_seed": probe_seed,
        "cross_archive": archive_b is not None,
    }
    return _finish(files, summary)


def cdf_comparison_rows(latencies: list[float], baseline: list[float]) -> list[tuple]:
    """Latency at every whole percentile for two runs, side by side."""
    if not latencies or not baseline:
        raise ValueError("both runs need delivered packets to compare")
    rows = []
    for q in range(1, 101):
        rows.append((float(q), percentile(latencies, q), percentile(baseline, q)))
    return rows


def write_artifacts(out_dir: str, files: dict[str, str]) -> list[str]:
    """Materialize a run's files under out_dir; returns the written paths."""
    root = pathlib.Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for rel, text in sorted(files.items()):
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(str(path))
    return written
