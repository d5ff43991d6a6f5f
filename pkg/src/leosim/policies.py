"""Routing policies: shortest path, tabular Q-routing, and learned DQN routing.

All policies speak the engine's callback protocol. The learning policies share
one bookkeeping flow: a decision is made when a packet arrives at a satellite,
the successor state is captured when it lands at the next hop, and the reward
is settled once the realized queueing delay is known at service start.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .drlcore import (
    Agent,
    ExperienceTuple,
    LearningParams,
    RewardBreakdown,
    compute_reward,
    encode_state,
    epsilon,
    select_action,
)
from .engine import RoutingPolicy, Simulation
from .mlp import DEFAULT_DIMS, QNetwork
from .traffic import Packet

DELIVERY_ACTION = -1


@dataclass(frozen=True)
class RoutingDecision:
    next_hop: int
    action_index: int  # 0..3 for ISL directions, DELIVERY_ACTION for the downlink


# -- graph search -----------------------------------------------------------


def dijkstra_route(graph: dict, src: int, dst: int) -> list[int] | None:
    """Minimum-weight path; equal-weight ties resolved to the lexicographically
    smallest node sequence. Returns None when dst is unreachable."""
    if src not in graph or dst not in graph:
        raise ValueError("src and dst must be graph nodes")
    if src == dst:
        return [src]
    best: dict[int, tuple[float, tuple]] = {}
    heap = [(0.0, (src,))]
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node in best and best[node] <= (dist, path):
            continue
        best[node] = (dist, path)
        if node == dst:
            return list(path)
        for nbr, w in graph.get(node, ()):
            if nbr in path:
                continue
            cand = (dist + w, path + (nbr,))
            if nbr not in best or cand < best[nbr]:
                heapq.heappush(heap, cand)
    return None


def shortest_path_tree(graph: dict, dst: int) -> dict[int, tuple[float, int]]:
    """Cost-to-dst and first hop for every node that can reach dst.

    Runs Dijkstra over reversed edges so one pass serves all sources; ties
    prefer the lower next-hop id.
    """
    reverse: dict[int, list[tuple[int, float]]] = {}
    for u, edges in graph.items():
        for v, w in edges:
            reverse.setdefault(v, []).append((u, w))
    dist: dict[int, float] = {dst: 0.0}
    next_hop: dict[int, int] = {dst: dst}
    heap = [(0.0, dst)]
    settled = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        for u, w in reverse.get(v, ()):
            cand = d + w
            known = dist.get(u)
            if known is None or cand < known or (cand == known and v < next_hop[u]):
                dist[u] = cand
                next_hop[u] = v
                heapq.heappush(heap, (cand, u))
    return {u: (dist[u], next_hop[u]) for u in dist}


# -- tabular Q-routing ------------------------------------------------------


class QTable:
    """Action values keyed by (satellite id, destination gateway id).

    Missing entries read as zeros.
    """

    def __init__(self):
        self._values: dict[tuple[int, int], np.ndarray] = {}

    def get(self, key: tuple[int, int]) -> np.ndarray:
        row = self._values.get(key)
        if row is None:
            row = np.zeros(4)
            self._values[key] = row
        return row

    def max_value(self, key: tuple[int, int]) -> float:
        row = self._values.get(key)
        return 0.0 if row is None else float(np.max(row))

    def __len__(self) -> int:
        return len(self._values)


def qrouting_update(
    table: QTable,
    key: tuple[int, int],
    action: int,
    reward: float,
    next_key: tuple[int, int] | None,
    alpha: float,
    gamma: float,
    terminal: bool = False,
):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    target = reward
    if not terminal and next_key is not None:
        target += gamma * table.max_value(next_key)
    row = table.get(key)
    row[action] = (1.0 - alpha) * row[action] + alpha * target


# -- learned inference ------------------------------------------------------


def madrl_select(net: QNetwork, obs: np.ndarray, mask) -> int | None:
    """Greedy argmax restricted to available actions; lowest index on ties."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    q = net.forward(obs)
    q = np.where(mask, q, -np.inf)
    return int(np.argmax(q))


# -- shared decision/settlement flow ---------------------------------------


@dataclass
class _HopRecord:
    state: object
    action: int
    from_node: int
    to_node: int
    dist_id: float
    dist_jd: float
    dist_ij: float
    d_max: float
    next_state: object = None
    terminal: bool = False
    looped: bool = False
    delivered: bool = False


def _available_mask(snapshot, sat_id: int) -> np.ndarray:
    mask = np.zeros(4, dtype=bool)
    for d in range(4):
        nbr = snapshot.neighbor(sat_id, d)
        mask[d] = nbr >= 0 and snapshot.rate(sat_id, nbr) > 0.0
    return mask


def _node_distance(snapshot, a: int, b: int) -> float:
    pa = snapshot.nodes[a].ecef
    pb = snapshot.nodes[b].ecef
    return float(np.linalg.norm(pa - pb))


class LearningFlowPolicy(RoutingPolicy):
    """Decision, arrival, and settlement bookkeeping shared by the learners."""

    def __init__(self, params: LearningParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng
        self._pending: dict[int, _HopRecord] = {}
        self._awaiting: dict[int, _HopRecord] = {}
        self.reward_rows: list[tuple] = []

    # subclass hooks
    def encode(self, engine: Simulation, pkt: Packet, sat_id: int):
        raise NotImplementedError

    def pick_action(self, engine, pkt, sat_id, state, mask) -> int | None:
        raise NotImplementedError

    def learn(self, engine, rec: _HopRecord, reward: RewardBreakdown):
        raise NotImplementedError

    def choose_direction(self, engine: Simulation, pkt: Packet, sat_id: int) -> int | None:
        snap = engine.snapshot
        state = self.encode(engine, pkt, sat_id)
        mask = _available_mask(snap, sat_id)
        action = self.pick_action(engine, pkt, sat_id, state, mask)
        if action is None:
            self._pending.pop(pkt.id, None)
            return None
        to_node = snap.neighbor(sat_id, action)
        self._pending[pkt.id] = _HopRecord(
            state=state,
            action=action,
            from_node=sat_id,
            to_node=to_node,
            dist_id=_node_distance(snap, sat_id, pkt.dst),
            dist_jd=_node_distance(snap, to_node, pkt.dst),
            dist_ij=_node_distance(snap, sat_id, to_node),
            d_max=snap.d_max_isl,
        )
        return action

    def notify_arrival(self, engine, pkt, node_id, deliverable, looped):
        rec = self._pending.pop(pkt.id, None)
        if rec is None:
            return  # first hop after the uplink: nothing was decided yet
        rec.next_state = self.encode(engine, pkt, node_id)
        rec.terminal = deliverable
        rec.delivered = deliverable
        rec.looped = looped
        self._awaiting[pkt.id] = rec

    def notify_service_start(self, engine, pkt, node_id, wait_s):
        rec = self._awaiting.pop(pkt.id, None)
        if rec is None:
            return
        weights = self.params.weights_for(rec.d_max)
        rb = compute_reward(
            weights,
            wait_s,
            rec.dist_id,
            rec.dist_jd,
            rec.dist_ij,
            looped=rec.looped,
            delivered=rec.delivered,
            unavailable=False,
            tq_unit_scale=self.params.tq_unit_scale,
        )
        self.learn(engine, rec, rb)
        self.reward_rows.append((engine.now, rec.from_node, rb.total, rb.rq, rb.rr, rb.rstar))

    def notify_drop(self, engine, pkt, node_id):
        self._pending.pop(pkt.id, None)
        self._awaiting.pop(pkt.id, None)


# -- concrete policies ------------------------------------------------------


class ShortestPathPolicy(RoutingPolicy):
    """Full-knowledge baseline: routes on 1/R edge weights over the live
    satellite graph, recomputed at every topology update."""

    def __init__(self):
        self._trees: dict[int, dict[int, tuple[float, int]]] = {}

    def _isl_graph(self, snapshot) -> dict:
        graph: dict[int, list[tuple[int, float]]] = {}
        for sat in snapshot.sats:
            edges = []
            for d in range(4):
                nbr = snapshot.neighbor(sat.node_id, d)
                if nbr < 0:
                    continue
                rate = snapshot.rate(sat.node_id, nbr)
                if rate > 0:
                    edges.append((nbr, 1.0 / rate))
            graph[sat.node_id] = edges
        return graph

    def _rebuild(self, engine):
        graph = self._isl_graph(engine.snapshot)
        self._trees = {}
        for gw, sat in sorted(engine.snapshot.gw_to_sat.items()):
            self._trees[gw] = shortest_path_tree(graph, sat)

    def attach(self, engine):
        self._rebuild(engine)

    def on_topology_update(self, engine):
        self._rebuild(engine)

    def choose_direction(self, engine, pkt, sat_id):
        tree = self._trees.get(pkt.dst)
        if tree is None or sat_id not in tree:
            return None
        nxt = tree[sat_id][1]
        snap = engine.snapshot
        for d in range(4):
            if snap.neighbor(sat_id, d) == nxt and snap.rate(sat_id, nxt) > 0:
                return d
        return None


class QRoutingPolicy(LearningFlowPolicy):
    """Tabular Q-routing: per-(satellite, destination) action values, updated
    one hop at a time with the same reward signal as the learned policy."""

    def __init__(self, params: LearningParams, rng: np.random.Generator):
        super().__init__(params, rng)
        self.table = QTable()

    def encode(self, engine, pkt, sat_id):
        return (sat_id, pkt.dst)

    def pick_action(self, engine, pkt, sat_id, state, mask):
        if not mask.any():
            return None
        available = np.flatnonzero(mask)
        if self.rng.random() < self.params.online_epsilon:
            return int(available[self.rng.integers(len(available))])
        q = np.where(mask, self.table.get(state), -np.inf)
        return int(np.argmax(q))

    def learn(self, engine, rec, rb):
        qrouting_update(
            self.table,
            rec.state,
            rec.action,
            rb.total,
            rec.next_state,
            self.params.qrouting_alpha,
            self.params.gamma,
            terminal=rec.terminal,
        )


class DqnPolicyBase(LearningFlowPolicy):
    """Shared mechanics of the learned policies: state encoding, exploration
    with an explicit penalty for picking a dead antenna, and training."""

    def __init__(self, params: LearningParams, rng: np.random.Generator, train: bool):
        super().__init__(params, rng)
        self.train = train

    def agent_for(self, sat_id: int) -> Agent:
        raise NotImplementedError

    def current_epsilon(self, engine) -> float:
        raise NotImplementedError

    def encode(self, engine, pkt, sat_id):
        return encode_state(
            sat_id,
            pkt.dst,
            engine.snapshot,
            engine.direction_occupancy,
            engine.q_max,
            sigma=self.params.sigma,
            c_star=self.params.c_star,
        )

    def _train_agent(self, agent: Agent):
        if self.train:
            agent.train_step(
                self.params.batch_size, self.params.alpha, self.params.gamma, self.rng
            )

    def pick_action(self, engine, pkt, sat_id, state, mask):
        agent = self.agent_for(sat_id)
        eps = self.current_epsilon(engine)
        action = select_action(agent.q_net, state, eps, self.rng)
        if mask[action]:
            return action
        # picked a dead antenna: penalize in place, then fall back to the best
        # live one so the packet still moves
        weights = self.params.weights_for(engine.snapshot.d_max_isl)
        rb = compute_reward(
            weights, 0.0, 0.0, 0.0, 0.0,
            looped=False, delivered=False, unavailable=True,
            tq_unit_scale=self.params.tq_unit_scale,
        )
        if self.train:
            agent.buffer.add(ExperienceTuple(state, action, rb.total, state, False))
            self._train_agent(agent)
        self.reward_rows.append((engine.now, sat_id, rb.total, rb.rq, rb.rr, rb.rstar))
        return madrl_select(agent.q_net, state, mask)

    def learn(self, engine, rec, rb):
        agent = self.agent_for(rec.from_node)
        if self.train:
            agent.buffer.add(
                ExperienceTuple(rec.state, rec.action, rb.total, rec.next_state, rec.terminal)
            )
            self._train_agent(agent)


class OfflineGlobalPolicy(DqnPolicyBase):
    """Centralized training phase: one shared network learns from every
    satellite's transitions while exploration decays over the run."""

    def __init__(self, params, rng, n_gateways: int, net: QNetwork | None = None):
        super().__init__(params, rng, train=True)
        if net is None:
            net = QNetwork(DEFAULT_DIMS, rng=rng)
        self.agent = Agent(net, params.global_buffer, params.target_update_period)
        self.n_gateways = n_gateways
        self.epsilon_rows: list[tuple[float, float]] = []

    def agent_for(self, sat_id):
        return self.agent

    def current_epsilon(self, engine):
        eps = epsilon(
            engine.now, self.n_gateways,
            self.params.eps_min, self.params.eps_max, self.params.kappa,
        )
        if not self.epsilon_rows or self.epsilon_rows[-1][0] != engine.now:
            self.epsilon_rows.append((engine.now, eps))
        return eps


class OnlineMultiAgentPolicy(DqnPolicyBase):
    """Distributed phase: every satellite runs its own copy of the trained
    network, optionally keeps training, and takes part in alignment rounds."""

    def __init__(
        self,
        params: LearningParams,
        rng: np.random.Generator,
        planes: int,
        sats_per_plane: int,
        base_net: QNetwork | None = None,
        probe_fn=None,
    ):
        super().__init__(params, rng, train=params.train_online)
        if base_net is None:
            base_net = QNetwork(DEFAULT_DIMS, rng=rng)
        self.planes = planes
        self.sats_per_plane = sats_per_plane
        self.agents: dict[int, Agent] = {}
        for sat_id in range(planes * sats_per_plane):
            self.agents[sat_id] = Agent(
                base_net.copy(), params.agent_buffer, params.target_update_period
            )
        self.probe_fn = probe_fn  # lazily yields the shared probe matrix
        self.aggregation_rows: list[tuple] = []
        self.epsilon_rows: list[tuple[float, float]] = []

    def agent_for(self, sat_id):
        return self.agents[sat_id]

    def current_epsilon(self, engine):
        eps = self.params.online_epsilon
        if not self.epsilon_rows or self.epsilon_rows[-1][0] != engine.now:
            self.epsilon_rows.append((engine.now, eps))
        return eps

    def _plane_agents(self, plane: int) -> list[Agent]:
        s = self.sats_per_plane
        return [self.agents[plane * s + slot] for slot in range(s)]

    def _mean_cka(self):
        if self.probe_fn is None:
            return None
        from .analysis import mean_pairwise_cka

        probes = self.probe_fn(self)
        nets = [self.agents[i].q_net for i in sorted(self.agents)]
        return mean_pairwise_cka(nets, probes)

    def on_learning_round(self, engine, kind):
        from .continual import anticipation_round, cluster_aggregate, global_fedavg

        pre = self._mean_cka()
        if kind == "anticipation":
            for plane in range(self.planes):
                agents = self._plane_agents(plane)
                new_nets = anticipation_round([a.q_net for a in agents])
                for agent, net in zip(agents, new_nets):
                    agent.q_net = net
                    agent.sync_target()
        elif kind == "cluster":
            for plane in range(self.planes):
                agents = self._plane_agents(plane)
                merged = cluster_aggregate([a.q_net for a in agents])
                for agent in agents:
                    agent.q_net = merged.copy()
                    agent.sync_target()
        elif kind == "global":
            clusters = [
                cluster_aggregate([a.q_net for a in self._plane_agents(p)])
                for p in range(self.planes)
            ]
            merged = global_fedavg(clusters)
            for agent in self.agents.values():
                agent.q_net = merged.copy()
                agent.sync_target()
        else:
            raise ValueError(f"unknown learning round kind: {kind!r}")
        post = self._mean_cka()
        self.aggregation_rows.append((engine.now, kind, len(self.agents), pre, post))
