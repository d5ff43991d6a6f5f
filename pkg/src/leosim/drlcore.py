"""Routing POMDP machinery: observations, rewards, exploration, replay, agents.

An observation is a 28-vector: 16 neighbor congestion levels (4 neighbors x 4
outgoing directions), 8 relative neighbor coordinates, 2 own absolute
coordinates, 2 relative coordinates of the satellite serving the destination
gateway. Congestion is log-encoded to an integer level; a missing neighbor or
link is marked with a sentinel level one past the top of the scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .mlp import QNetwork, hard_copy

SENTINEL_OFFSET = 1  # sentinel level = c_star + 1


@dataclass(frozen=True)
class RewardWeights:
    d_max: float
    w1: float = 20.0
    w2: float = 20.0
    w3: float = 1.0
    w4: float = 5.0
    r_deliver: float = 50.0
    r_loop: float = -5.0
    r_unavailable: float = -5.0

    def __post_init__(self):
        if not self.w4 > 0:
            raise ValueError("w4 must be > 0")
        if not self.d_max > 0:
            raise ValueError("d_max must be > 0")


class RewardBreakdown(NamedTuple):
    total: float
    rq: float
    rr: float
    rstar: float


def encode_congestion(q_t: int, q_max: int, c_star: int = 10) -> int:
    """Queue occupancy mapped to an integer level in [0, c_star].

    Logarithmic so small queues are resolved finely: floor(c_star *
    log10(q+1) / log10(q_max)), clamped at c_star.
    """
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    if q_t < 0 or q_t > q_max:
        raise ValueError(f"queue occupancy {q_t} outside [0, {q_max}]")
    level = math.floor(c_star * math.log10(q_t + 1) / math.log10(q_max))
    return min(c_star, level)


def relative_coords(lat_deg: float, lon_deg: float, ref_lat_deg: float, ref_lon_deg: float,
                    sigma: float) -> tuple[float, float]:
    """Coordinates of a node relative to a reference, normalized by sigma.

    Longitude differences wrap to (-180, 180]; latitude differences are halved
    so both fields fit the ranges [-90/sigma, 90/sigma] x [-180/sigma, 180/sigma].
    """
    dlat = (lat_deg - ref_lat_deg) / 2.0
    dlon = lon_deg - ref_lon_deg
    dlon = (dlon + 180.0) % 360.0 - 180.0
    if dlon == -180.0:
        dlon = 180.0
    return dlat / sigma, dlon / sigma


def absolute_coords(lat_deg: float, lon_deg: float, sigma: float) -> tuple[float, float]:
    """Own coordinates shifted non-negative: [0, 180/sigma] x [0, 360/sigma]."""
    return (lat_deg + 90.0) / sigma, (lon_deg + 180.0) / sigma


def encode_state(
    sat_id: int,
    dst_gw: int,
    snapshot,
    occupancy_fn,
    q_max: int,
    sigma: float = 20.0,
    c_star: int = 10,
) -> np.ndarray:
    """28-field observation for the agent on satellite sat_id.

    occupancy_fn(sat_id, direction) must return the waiting-queue occupancy
    for that satellite's directional antenna.
    """
    sentinel = float(c_star + SENTINEL_OFFSET)
    congestion = np.empty(16)
    coords = np.empty(8)
    own = snapshot.nodes[sat_id]
    for k in range(4):
        nbr = snapshot.neighbor(sat_id, k)
        present = nbr >= 0 and snapshot.rate(sat_id, nbr) > 0.0
        if not present:
            congestion[4 * k : 4 * k + 4] = sentinel
            coords[2 * k : 2 * k + 2] = 0.0
            continue
        for m in range(4):
            nn = snapshot.neighbor(nbr, m)
            if nn < 0 or snapshot.rate(nbr, nn) <= 0.0:
                congestion[4 * k + m] = sentinel
            else:
                congestion[4 * k + m] = encode_congestion(occupancy_fn(nbr, m), q_max, c_star)
        npos = snapshot.nodes[nbr]
        coords[2 * k : 2 * k + 2] = relative_coords(
            npos.lat_deg, npos.lon_deg, own.lat_deg, own.lon_deg, sigma
        )
    dst_sat = snapshot.nodes[snapshot.gw_to_sat[dst_gw]]
    obs = np.empty(28)
    obs[0:16] = congestion
    obs[16:24] = coords
    obs[24:26] = absolute_coords(own.lat_deg, own.lon_deg, sigma)
    obs[26:28] = relative_coords(dst_sat.lat_deg, dst_sat.lon_deg, own.lat_deg, own.lon_deg, sigma)
    return obs


def compute_reward(
    weights: RewardWeights,
    t_q_s: float,
    dist_id: float,
    dist_jd: float,
    dist_ij: float,
    looped: bool,
    delivered: bool,
    unavailable: bool,
    tq_unit_scale: float = 1.0,
) -> RewardBreakdown:
    """Per-hop reward: queue penalty + progress toward destination + events.

    t_q_s is the seconds the packet waited in the receiver's queue. dist_id /
    dist_jd are sender / receiver distances to the destination, dist_ij the
    hop length; progress is normalized by the longest ISL currently up.
    """
    rq = weights.w1 * (1.0 - 10.0 ** (t_q_s * tq_unit_scale))
    rr = weights.w2 * (dist_id - dist_jd - dist_ij / weights.w4) / weights.d_max
    events = 0.0
    if looped:
        events += weights.r_loop
    if delivered:
        events += weights.r_deliver
    if unavailable:
        events += weights.r_unavailable
    rstar = weights.w3 * events
    total = rq + rr + rstar
    return RewardBreakdown(total, rq, rr, rstar)


def epsilon(t: float, n_gateways: int, eps_min: float, eps_max: float, kappa: float) -> float:
    """Exploration probability decaying from eps_max toward eps_min."""
    if eps_min > eps_max:
        raise ValueError("eps_min must be <= eps_max")
    if not kappa < 0:
        raise ValueError("kappa must be < 0")
    if n_gateways < 1:
        raise ValueError("n_gateways must be >= 1")
    return eps_min + (eps_max - eps_min) * math.exp(kappa * t / n_gateways**2)


def select_action(net: QNetwork, obs: np.ndarray, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the 4 directions; the pick may be unavailable, in
    which case the caller records the penalty and reroutes."""
    if rng.random() < eps:
        return int(rng.integers(net.n_actions))
    return int(np.argmax(net.forward(obs)))


def td_target(r: float, gamma: float, target_net: QNetwork, s_next: np.ndarray, terminal: bool) -> float:
    if terminal:
        return r
    return r + gamma * float(np.max(target_net.forward(s_next)))


@dataclass
class ExperienceTuple:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    terminal: bool

    def __post_init__(self):
        if not 0 <= self.a < 4:
            raise ValueError(f"action {self.a} out of range")
        if not math.isfinite(self.r):
            raise ValueError("reward must be finite")


class ReplayBuffer:
    """Fixed-capacity ring with FIFO eviction."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: list[ExperienceTuple] = []
        self._head = 0

    def __len__(self) -> int:
        return len(self._entries)

    def add(self, exp: ExperienceTuple):
        if len(self._entries) < self.capacity:
            self._entries.append(exp)
        else:
            self._entries[self._head] = exp
            self._head = (self._head + 1) % self.capacity

    def entries(self) -> list[ExperienceTuple]:
        return list(self._entries)

    def sample_indices(self, k: int, rng: np.random.Generator) -> list[int]:
        """k distinct indices, uniform without replacement.

        Rejection sampling keeps this O(k) for k << n, which matters because
        the buffer may hold hundreds of thousands of entries.
        """
        n = len(self._entries)
        if k > n:
            raise ValueError(f"cannot sample {k} from {n} entries")
        chosen: list[int] = []
        seen: set[int] = set()
        while len(chosen) < k:
            i = int(rng.integers(n))
            if i not in seen:
                seen.add(i)
                chosen.append(i)
        return chosen

    def sample(self, k: int, rng: np.random.Generator) -> list[ExperienceTuple]:
        return [self._entries[i] for i in self.sample_indices(k, rng)]


class Agent:
    """A Q-network, its target copy, and a replay buffer."""

    def __init__(self, q_net: QNetwork, buffer_capacity: int, target_update_period: int = 1000):
        if target_update_period < 1:
            raise ValueError("target_update_period must be >= 1")
        self.q_net = q_net
        self.target_net = q_net.copy()
        self.buffer = ReplayBuffer(buffer_capacity)
        self.target_update_period = target_update_period
        self.train_iterations = 0

    def sync_target(self):
        hard_copy(self.q_net, self.target_net)

    def train_step(self, batch_size: int, alpha: float, gamma: float,
                   rng: np.random.Generator) -> float | None:
        """One SGD step on a uniform replay batch; None while underfull."""
        if len(self.buffer) < batch_size:
            return None
        batch = self.buffer.sample(batch_size, rng)
        xs = np.stack([e.s for e in batch])
        actions = np.array([e.a for e in batch])
        # one batched target forward instead of per-sample td_target calls
        rewards = np.array([e.r for e in batch])
        terminal = np.array([e.terminal for e in batch])
        q_next = self.target_net.forward(np.stack([e.s_next for e in batch]))
        targets = rewards + np.where(terminal, 0.0, gamma * q_next.max(axis=1))
        loss = self.q_net.sgd_step(xs, actions, targets, alpha)
        self.train_iterations += 1
        if self.train_iterations % self.target_update_period == 0:
            self.sync_target()
        return loss


@dataclass
class LearningParams:
    """Knobs for both training phases; everything is overridable in config."""

    alpha: float = 1e-3
    gamma: float = 0.99
    batch_size: int = 32
    global_buffer: int = 200_000
    agent_buffer: int = 20_000
    target_update_period: int = 1000
    eps_min: float = 0.01
    eps_max: float = 1.0
    kappa: float = -5.0
    online_epsilon: float = 0.01
    train_online: bool = True
    sigma: float = 20.0
    c_star: int = 10
    tq_unit_scale: float = 1.0
    w1: float = 20.0
    w2: float = 20.0
    w3: float = 1.0
    w4: float = 5.0
    r_deliver: float = 50.0
    r_loop: float = -5.0
    r_unavailable: float = -5.0
    qrouting_alpha: float = 0.1

    def weights_for(self, d_max: float) -> RewardWeights:
        return RewardWeights(
            d_max=d_max,
            w1=self.w1,
            w2=self.w2,
            w3=self.w3,
            w4=self.w4,
            r_deliver=self.r_deliver,
            r_loop=self.r_loop,
            r_unavailable=self.r_unavailable,
        )


@dataclass
class PendingTransition:
    """A decision waiting for its outcome at the receiving node."""

    s: np.ndarray
    action: int
    from_node: int
    to_node: int
    dist_id: float
    dist_jd: float
    dist_ij: float
    d_max: float
    s_next: np.ndarray | None = None
    terminal: bool = False
    looped: bool = False
    delivered: bool = False
