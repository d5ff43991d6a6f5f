"""Gateway-to-gateway traffic generation.

User data is aggregated into fixed-size blocks; each gateway emits blocks as a
Poisson process split evenly over the other gateways. The network-wide
capacity reference is the largest aggregate load whose per-gateway uplink and
downlink shares still fit the GSL rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_BLOCK_BITS = 64800.0


@dataclass
class Packet:
    """One block in flight. visited records node ids in traversal order."""

    id: int
    src: int
    dst: int
    size_bits: float
    created_t: float
    visited: list[int] = field(default_factory=list)
    delivered_t: float | None = None
    dropped: bool = False
    drop_node: int | None = None
    drop_t: float | None = None


@dataclass(frozen=True)
class TrafficConfig:
    """per_gateway_rates holds the offered uplink rate (bits/s) per gateway id,
    i.e. the load fraction already applied."""

    load_fraction: float
    block_bits: float
    per_gateway_rates: dict[int, float]

    def __post_init__(self):
        if self.load_fraction < 0:
            raise ValueError("load_fraction must be >= 0")
        if not self.block_bits > 0:
            raise ValueError("block_bits must be > 0")


def max_supported_load(snapshot) -> float:
    """Aggregate load (bits/s) at which the tightest GSL is exactly saturated.

    With the uplink split equally, each gateway carries load/|G| up and the
    same back down, so the binding constraint is the worst per-gateway rate.
    """
    gateways = snapshot.gateways
    if not gateways:
        raise ValueError("snapshot has no gateways")
    worst = None
    for gw in gateways:
        sat = snapshot.gw_to_sat[gw.node_id]
        up = snapshot.rate(gw.node_id, sat)
        down = snapshot.rate(sat, gw.node_id)
        if up <= 0.0 or down <= 0.0:
            raise ValueError(f"gateway {gw.node_id} has a zero-rate GSL; network infeasible")
        bound = min(up, down)
        worst = bound if worst is None else min(worst, bound)
    return len(gateways) * worst


def offered_uplink_rates(snapshot, load_fraction: float) -> dict[int, float]:
    """Per-gateway uplink rate at the given fraction of the supported maximum."""
    if load_fraction < 0:
        raise ValueError("load_fraction must be >= 0")
    lam_star = max_supported_load(snapshot)
    share = load_fraction * lam_star / len(snapshot.gateways)
    return {gw.node_id: share for gw in snapshot.gateways}


def generate_arrivals(config: TrafficConfig, rng: np.random.Generator, horizon_s: float) -> list[Packet]:
    """Time-ordered packets over [0, horizon).

    Each (src, dst) pair is an independent Poisson block stream at rate
    lambda_UL/(B*(|G|-1)); streams are drawn in sorted pair order from the
    single generator so a fixed seed reproduces the list exactly.
    """
    if not horizon_s > 0:
        raise ValueError("horizon_s must be > 0")
    gateways = sorted(config.per_gateway_rates)
    n_others = len(gateways) - 1
    if n_others < 1:
        return []
    arrivals: list[tuple[float, int, int]] = []
    for src in gateways:
        lam_ul = config.per_gateway_rates[src]
        block_rate = lam_ul / (config.block_bits * n_others)
        if block_rate <= 0.0:
            continue
        for dst in gateways:
            if dst == src:
                continue
            t = rng.exponential(1.0 / block_rate)
            while t < horizon_s:
                arrivals.append((t, src, dst))
                t += rng.exponential(1.0 / block_rate)
    arrivals.sort()
    return [
        Packet(id=i, src=src, dst=dst, size_bits=config.block_bits, created_t=t)
        for i, (t, src, dst) in enumerate(arrivals)
    ]


def packet_trace_rows(packets: list[Packet]) -> list[tuple]:
    return [(p.id, p.src, p.dst, p.created_t) for p in packets]
