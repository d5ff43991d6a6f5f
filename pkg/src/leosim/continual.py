"""Model alignment between agents: pairwise anticipation along each orbital
ring, per-plane cluster aggregation, and a global federated-averaging round.
All three are elementwise parameter means, so aggregating identical models is
an exact fixed point."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .mlp import QNetwork, average


@dataclass(frozen=True)
class AggregationSchedule:
    anticipation_enabled: bool = False
    anticipation_period_s: float = 290.0
    cluster_enabled: bool = False
    cluster_period_s: float = 1450.0
    global_enabled: bool = False
    global_period_s: float = 5800.0

    def __post_init__(self):
        for name, enabled, period in (
            ("anticipation", self.anticipation_enabled, self.anticipation_period_s),
            ("cluster", self.cluster_enabled, self.cluster_period_s),
            ("global", self.global_enabled, self.global_period_s),
        ):
            if enabled and not period > 0:
                raise ValueError(f"{name} period must be > 0 when enabled")
        periods = [
            p for on, p in (
                (self.anticipation_enabled, self.anticipation_period_s),
                (self.cluster_enabled, self.cluster_period_s),
                (self.global_enabled, self.global_period_s),
            ) if on
        ]
        if periods != sorted(periods):
            warnings.warn(
                "aggregation periods are usually ordered anticipation <= cluster <= global",
                stacklevel=2,
            )


def anticipate(net_ahead: QNetwork, net_behind: QNetwork) -> QNetwork:
    """New model for the trailing satellite: the mean of its own parameters
    and those of the satellite ahead of it in the ring."""
    return average([net_ahead, net_behind])


def anticipation_round(ring_nets: list[QNetwork]) -> list[QNetwork]:
    """One simultaneous anticipation sweep around an orbital ring.

    Every slot s is the predecessor of slot s+1 (mod ring size), so each
    result mixes the pre-round models only.
    """
    if not ring_nets:
        raise ValueError("ring must contain at least one model")
    n = len(ring_nets)
    return [anticipate(ring_nets[(s + 1) % n], ring_nets[s]) for s in range(n)]


def cluster_aggregate(nets: list[QNetwork]) -> QNetwork:
    """Plane-wide model mean, computed as the ring computes it: a running
    parameter sum forwarded hop by hop, divided once at the end."""
    if not nets:
        raise ValueError("cluster must contain at least one model")
    if any(net is None for net in nets):
        raise ValueError("broken ring: a cluster member is missing")
    base = nets[0]
    acc = base.copy()
    for k in range(len(acc.weights)):
        acc.weights[k][:] = 0.0
        acc.biases[k][:] = 0.0
    for net in nets[1:]:
        if net.dims != base.dims:
            raise ValueError("cluster members must share one architecture")
        # forward a running sum of offsets from the first hop's model; exact
        # when every member is identical, since all offsets are zero
        for k in range(len(acc.weights)):
            acc.weights[k] += net.weights[k] - base.weights[k]
            acc.biases[k] += net.biases[k] - base.biases[k]
    n = len(nets)
    for k in range(len(acc.weights)):
        acc.weights[k] = base.weights[k] + acc.weights[k] / n
        acc.biases[k] = base.biases[k] + acc.biases[k] / n
    return acc


def global_fedavg(cluster_nets: list[QNetwork]) -> QNetwork:
    """Mean of the per-plane cluster models; callers distribute the result
    back to every agent."""
    if not cluster_nets:
        raise ValueError("need at least one cluster model")
    return average(cluster_nets)


def schedule_rounds(sim, schedule: AggregationSchedule) -> list[tuple[float, str]]:
    """Registers periodic alignment rounds with the engine.

    Kinds are registered in anticipation, cluster, global order so that
    coinciding rounds fire in exactly that sequence.
    """
    emitted: list[tuple[float, str]] = []
    for kind, enabled, period in (
        ("anticipation", schedule.anticipation_enabled, schedule.anticipation_period_s),
        ("cluster", schedule.cluster_enabled, schedule.cluster_period_s),
        ("global", schedule.global_enabled, schedule.global_period_s),
    ):
        if not enabled:
            continue
        k = 1
        while k * period < sim.horizon_s:
            sim.schedule_learning_round(k * period, kind)
            emitted.append((k * period, kind))
            k += 1
    return emitted
