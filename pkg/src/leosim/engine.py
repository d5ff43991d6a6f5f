"""Discrete-event simulation core.

Every node (satellite or gateway) transmits through one serial FIFO server;
queued packets carry their chosen outgoing link, and per-direction occupancy
counters summarize the shared queue for the observation encoder. Events are
processed strictly before the horizon, chronologically, with deterministic
tie-breaking, so identical inputs replay identically.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constants import SPEED_OF_LIGHT
from .traffic import Packet

KIND_ARRIVAL = "Arrival"
KIND_HOP = "HopComplete"
KIND_DELIVERY = "Delivery"
KIND_DROP = "Drop"
KIND_POSITION = "PositionUpdate"
KIND_LEARNING = "LearningRound"

# heap ordering of simultaneous events
_ORDER = {KIND_ARRIVAL: 0, KIND_HOP: 1, "TxEnd": 2, KIND_POSITION: 3, KIND_LEARNING: 4}

DELIVER = -1  # route sentinel: the planned hop is the GSL downlink


class EngineError(RuntimeError):
    """A policy or configuration broke the engine's contract."""


class EventRecord(NamedTuple):
    t: float
    kind: str
    packet_id: int | None
    node_id: int | None


def one_hop_delay(queue_time_s: float, size_bits: float, rate_bps: float, distance_m: float) -> float:
    """Queueing + transmission + propagation for one link traversal."""
    if not rate_bps > 0:
        raise ValueError("rate_bps must be > 0")
    return queue_time_s + size_bits / rate_bps + distance_m / SPEED_OF_LIGHT


class RoutingPolicy:
    """Base policy: no-op hooks. Subclasses route packets at satellites.

    choose_direction must return a direction index whose antenna currently has
    a live link, or None when the packet cannot be forwarded at all.
    """

    def attach(self, engine: "Simulation"):
        pass

    def on_topology_update(self, engine: "Simulation"):
        pass

    def choose_direction(self, engine: "Simulation", pkt: Packet, sat_id: int) -> int | None:
        raise NotImplementedError

    def notify_arrival(self, engine: "Simulation", pkt: Packet, node_id: int,
                       deliverable: bool, looped: bool):
        pass

    def notify_service_start(self, engine: "Simulation", pkt: Packet, node_id: int, wait_s: float):
        pass

    def notify_drop(self, engine: "Simulation", pkt: Packet, node_id: int):
        pass

    def on_learning_round(self, engine: "Simulation", kind: str):
        pass

    def finish(self, engine: "Simulation"):
        pass


@dataclass
class _NodeQueue:
    waiting: deque = field(default_factory=deque)
    current: tuple | None = None  # (packet, target_node, txend_t, distance_m)


@dataclass
class SimulationResult:
    generated: int
    delivered: list[Packet]
    dropped: list[Packet]
    in_flight: int
    edge_traffic: dict[tuple[int, int], int]
    propagation_s: dict[int, float]
    events: list[EventRecord]


class Simulation:
    """Event loop binding topology snapshots, traffic, and a routing policy."""

    def __init__(
        self,
        snapshot_fn,
        horizon_s: float,
        packets: list[Packet],
        policy: RoutingPolicy,
        q_max: int = 100,
        position_update_interval_s: float = 15.0,
        max_hops: int = 64,
        record_events: bool = False,
    ):
        if not horizon_s > 0:
            raise ValueError("horizon_s must be > 0")
        if q_max < 1:
            raise ValueError("q_max must be >= 1")
        if not position_update_interval_s > 0:
            raise ValueError("position_update_interval_s must be > 0")
        if max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        self.snapshot_fn = snapshot_fn
        self.horizon_s = horizon_s
        self.policy = policy
        self.q_max = q_max
        self.max_hops = max_hops
        self.record_events = record_events

        self.now = 0.0
        self.snapshot = snapshot_fn(0.0)
        self._gateway_ids = {g.node_id for g in self.snapshot.gateways}

        self._heap: list[tuple] = []
        self._seq = 0
        self._queues: dict[int, _NodeQueue] = {}
        self._dir_counts: dict[int, np.ndarray] = {}
        self._route: dict[int, tuple[int, int]] = {}  # pkt id -> (direction, next node)
        self._enqueue_t: dict[int, float] = {}
        self._active: set[int] = set()

        self.generated = 0
        self.delivered: list[Packet] = []
        self.dropped: list[Packet] = []
        self.edge_traffic: dict[tuple[int, int], int] = {}
        self.propagation_s: dict[int, float] = {}
        self.events: list[EventRecord] = []

        for pkt in packets:
            if pkt.created_t < 0:
                raise ValueError("packet created before t=0")
            self._push(pkt.created_t, KIND_ARRIVAL, pkt.id, pkt)
        t = position_update_interval_s
        while t < horizon_s:
            self._push(t, KIND_POSITION, None, None)
            t += position_update_interval_s
        self.policy.attach(self)

    # -- scheduling helpers -------------------------------------------------

    def _push(self, t: float, kind: str, tiebreak: int | None, payload):
        self._seq += 1
        heapq.heappush(self._heap, (t, _ORDER[kind], -1 if tiebreak is None else tiebreak,
                                    self._seq, kind, payload))

    def schedule_learning_round(self, t: float, round_kind: str):
        if not 0.0 <= t < self.horizon_s:
            raise ValueError("learning round must fall inside [0, horizon)")
        self._push(t, KIND_LEARNING, None, round_kind)

    def _record(self, kind: str, packet_id: int | None, node_id: int | None):
        if self.record_events:
            self.events.append(EventRecord(self.now, kind, packet_id, node_id))

    # -- state inspection ---------------------------------------------------

    def is_gateway(self, node_id: int) -> bool:
        return node_id in self._gateway_ids

    def direction_occupancy(self, sat_id: int, direction: int) -> int:
        counts = self._dir_counts.get(sat_id)
        return 0 if counts is None else int(counts[direction])

    def _target_of(self, node_id: int, pkt: Packet) -> int | None:
        if self.is_gateway(node_id):
            return self.snapshot.gw_to_sat.get(node_id)
        direction, planned = self._route[pkt.id]
        return pkt.dst if direction == DELIVER else planned

    def queue_time(self, node_id: int, pkt: Packet) -> float:
        """Projected wait: remaining in-service time plus the transmission
        times of everything ahead, each at its own link's current rate."""
        q = self._queues.get(node_id)
        if q is None:
            raise ValueError(f"packet {pkt.id} is not enqueued at node {node_id}")
        total = 0.0
        if q.current is not None:
            total += q.current[2] - self.now
        for ahead in q.waiting:
            if ahead.id == pkt.id:
                return total
            target = self._target_of(node_id, ahead)
            rate = 0.0 if target is None else self.snapshot.rate(node_id, target)
            if rate > 0:
                total += ahead.size_bits / rate
        raise ValueError(f"packet {pkt.id} is not enqueued at node {node_id}")

    # -- event loop ---------------------------------------------------------

    def step(self, until_t: float) -> int:
        """Process every event strictly before until_t; returns the count."""
        processed = 0
        limit = min(until_t, self.horizon_s)
        while self._heap and self._heap[0][0] < limit:
            t, _order, _tie, _seq, kind, payload = heapq.heappop(self._heap)
            self.now = t
            if kind == KIND_ARRIVAL:
                self._handle_arrival(payload)
            elif kind == KIND_HOP:
                self._handle_hop(payload)
            elif kind == "TxEnd":
                self._handle_txend(payload)
            elif kind == KIND_POSITION:
                self._handle_position_update()
            else:
                self.policy.on_learning_round(self, payload)
                self._record(KIND_LEARNING, None, None)
            processed += 1
        return processed

    def run(self) -> SimulationResult:
        self.step(self.horizon_s)
        self.policy.finish(self)
        in_flight = self.generated - len(self.delivered) - len(self.dropped)
        assert in_flight == len(self._active)
        return SimulationResult(
            generated=self.generated,
            delivered=self.delivered,
            dropped=self.dropped,
            in_flight=in_flight,
            edge_traffic=self.edge_traffic,
            propagation_s=self.propagation_s,
            events=self.events,
        )

    # -- handlers -----------------------------------------------------------

    def _handle_arrival(self, pkt: Packet):
        self.generated += 1
        self._active.add(pkt.id)
        self.propagation_s[pkt.id] = 0.0
        self._record(KIND_ARRIVAL, pkt.id, pkt.src)
        self._enqueue(pkt.src, pkt)

    def _handle_hop(self, payload):
        pkt, node = payload
        if self.is_gateway(node):
            pkt.delivered_t = self.now
            self.delivered.append(pkt)
            self._active.discard(pkt.id)
            self._route.pop(pkt.id, None)
            self._record(KIND_DELIVERY, pkt.id, node)
            return
        if len(pkt.visited) >= self.max_hops:
            self._drop(pkt, node)
            return
        deliverable = (
            self.snapshot.gw_to_sat.get(pkt.dst) == node
            and self.snapshot.rate(node, pkt.dst) > 0.0
        )
        looped = node in pkt.visited
        self.policy.notify_arrival(self, pkt, node, deliverable, looped)
        if deliverable:
            self._route[pkt.id] = (DELIVER, pkt.dst)
        else:
            direction = self.policy.choose_direction(self, pkt, node)
            if direction is None:
                self._drop(pkt, node)
                return
            self._route[pkt.id] = (direction, self._resolve(node, direction))
        self._record(KIND_HOP, pkt.id, node)
        self._enqueue(node, pkt)

    def _resolve(self, sat_id: int, direction) -> int:
        if direction not in (0, 1, 2, 3):
            raise EngineError(f"policy returned direction {direction!r} for satellite {sat_id}")
        nbr = self.snapshot.neighbor(sat_id, direction)
        if nbr < 0 or self.snapshot.rate(sat_id, nbr) <= 0.0:
            raise EngineError(
                f"policy chose unavailable direction {direction} at satellite {sat_id}"
            )
        return nbr

    def _enqueue(self, node_id: int, pkt: Packet):
        q = self._queues.setdefault(node_id, _NodeQueue())
        if q.current is None and not q.waiting:
            if not self.is_gateway(node_id):
                pkt.visited.append(node_id)
            self._start_service(node_id, pkt, 0.0)
            return
        if len(q.waiting) >= self.q_max:
            self._drop(pkt, node_id)
            return
        if not self.is_gateway(node_id):
            pkt.visited.append(node_id)
            direction = self._route[pkt.id][0]
            if direction != DELIVER:
                counts = self._dir_counts.setdefault(node_id, np.zeros(4, dtype=int))
                counts[direction] += 1
        q.waiting.append(pkt)
        self._enqueue_t[pkt.id] = self.now

    def _start_service(self, node_id: int, pkt: Packet, wait_s: float):
        if self.is_gateway(node_id):
            target = self.snapshot.gw_to_sat.get(node_id)
            if target is None or self.snapshot.rate(node_id, target) <= 0.0:
                self._drop(pkt, node_id)
                self._serve_next(node_id)
                return
        else:
            self.policy.notify_service_start(self, pkt, node_id, wait_s)
            target = self._validated_target(node_id, pkt)
            if target is None:
                self._drop(pkt, node_id)
                self._serve_next(node_id)
                return
        rate = self.snapshot.rate(node_id, target)
        dist = self.snapshot.distance(node_id, target)
        txend = self.now + pkt.size_bits / rate
        self._queues[node_id].current = (pkt, target, txend, dist)
        self._push(txend, "TxEnd", node_id, node_id)

    def _validated_target(self, node_id: int, pkt: Packet) -> int | None:
        """Re-ask the policy when the planned hop no longer exists."""
        direction, planned = self._route[pkt.id]
        if direction == DELIVER:
            if (self.snapshot.gw_to_sat.get(pkt.dst) == node_id
                    and self.snapshot.rate(node_id, pkt.dst) > 0.0):
                return pkt.dst
        elif (self.snapshot.neighbor(node_id, direction) == planned
                and self.snapshot.rate(node_id, planned) > 0.0):
            return planned
        fresh = self.policy.choose_direction(self, pkt, node_id)
        if fresh is None:
            return None
        resolved = self._resolve(node_id, fresh)
        self._route[pkt.id] = (fresh, resolved)
        return resolved

    def _handle_txend(self, node_id: int):
        q = self._queues[node_id]
        pkt, target, _txend, dist = q.current
        q.current = None
        self.propagation_s[pkt.id] += dist / SPEED_OF_LIGHT
        edge = (min(node_id, target), max(node_id, target))
        self.edge_traffic[edge] = self.edge_traffic.get(edge, 0) + 1
        self._push(self.now + dist / SPEED_OF_LIGHT, KIND_HOP, pkt.id, (pkt, target))
        self._serve_next(node_id)

    def _serve_next(self, node_id: int):
        q = self._queues.get(node_id)
        if q is None or q.current is not None or not q.waiting:
            return
        pkt = q.waiting.popleft()
        wait = self.now - self._enqueue_t.pop(pkt.id)
        if not self.is_gateway(node_id):
            direction = self._route[pkt.id][0]
            if direction != DELIVER:
                self._dir_counts[node_id][direction] -= 1
        self._start_service(node_id, pkt, wait)

    def _handle_position_update(self):
        self.snapshot = self.snapshot_fn(self.now)
        self._gateway_ids = {g.node_id for g in self.snapshot.gateways}
        self.policy.on_topology_update(self)
        self._record(KIND_POSITION, None, None)

    def _drop(self, pkt: Packet, node_id: int):
        pkt.dropped = True
        pkt.drop_node = node_id
        pkt.drop_t = self.now
        self.dropped.append(pkt)
        self._active.discard(pkt.id)
        self._route.pop(pkt.id, None)
        self._enqueue_t.pop(pkt.id, None)
        self.policy.notify_drop(self, pkt, node_id)
        self._record(KIND_DROP, pkt.id, node_id)
