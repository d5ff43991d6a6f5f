import math

import pytest

from leosim.constants import SPEED_OF_LIGHT
from leosim.engine import (
    DELIVER,
    EngineError,
    RoutingPolicy,
    Simulation,
    one_hop_delay,
)
from leosim.traffic import Packet

B = 64800.0


class StubSnap:
    """Hand-built topology: directed rates, symmetric distances."""

    def __init__(self, gateways, gw_to_sat, neighbors, rates, dists=None):
        class _N:
            def __init__(self, node_id):
                self.node_id = node_id

        self.gateways = [_N(g) for g in gateways]
        self.gw_to_sat = dict(gw_to_sat)
        self._neighbors = {s: dict(n) for s, n in neighbors.items()}
        self._rates = dict(rates)
        self._dists = dict(dists or {})

    def neighbor(self, sat_id, direction):
        return self._neighbors.get(sat_id, {}).get(direction, -1)

    def rate(self, a, b):
        return self._rates.get((a, b), 0.0)

    def distance(self, a, b):
        return self._dists.get((min(a, b), max(a, b)), 0.0)


class FixedDirectionPolicy(RoutingPolicy):
    """Routes every packet along one direction; records callback traffic."""

    def __init__(self, direction=0):
        self.direction = direction
        self.arrivals = []
        self.waits = []
        self.drops = []
        self.choose_calls = []

    def choose_direction(self, engine, pkt, sat_id):
        self.choose_calls.append((pkt.id, sat_id))
        return self.direction

    def notify_arrival(self, engine, pkt, node_id, deliverable, looped):
        self.arrivals.append((pkt.id, node_id, deliverable, looped))

    def notify_service_start(self, engine, pkt, node_id, wait_s):
        self.waits.append((pkt.id, node_id, wait_s))

    def notify_drop(self, engine, pkt, node_id):
        self.drops.append((pkt.id, node_id))


def mk_packet(pid, src, dst, t=0.0, size=B):
    return Packet(id=pid, src=src, dst=dst, size_bits=size, created_t=t)


# -- one_hop_delay ----------------------------------------------------------


def test_one_hop_delay_transmission_only():
    # empty queue, zero distance: exactly the serialization time
    assert one_hop_delay(0.0, B, 500e6, 0.0) == B / 500e6
    assert one_hop_delay(0.0, B, 500e6, 0.0) == pytest.approx(1.296e-4, rel=0, abs=0)


def test_one_hop_delay_propagation_only():
    d = 1000e3
    assert one_hop_delay(0.0, B, 1e30, d) == pytest.approx(d / 299792458.0, rel=1e-15)
    assert one_hop_delay(0.0, B, 1e30, d) == pytest.approx(3.3356409519815204e-3, rel=1e-12)


def test_one_hop_delay_sums_terms():
    got = one_hop_delay(0.25, B, 1e6, 2_000_000.0)
    assert got == pytest.approx(0.25 + B / 1e6 + 2_000_000.0 / SPEED_OF_LIGHT, rel=1e-15)


def test_one_hop_delay_rejects_dead_link():
    with pytest.raises(ValueError):
        one_hop_delay(0.0, B, 0.0, 1.0)


# -- degenerate scenarios ---------------------------------------------------


def test_no_packets_runs_clean():
    snap = StubSnap([10], {10: 0}, {0: {}}, {(10, 0): 1e6})
    sim = Simulation(lambda t: snap, 1.0, [], FixedDirectionPolicy())
    res = sim.run()
    assert res.generated == 0
    assert res.delivered == [] and res.dropped == []
    assert res.in_flight == 0


def test_src_and_dst_share_one_satellite():
    r = 1e6
    d_up, d_dn = 1000e3, 2000e3
    snap = StubSnap(
        [10, 11], {10: 0, 11: 0}, {0: {}},
        {(10, 0): r, (0, 11): r},
        {(0, 10): d_up, (0, 11): d_dn},
    )
    policy = FixedDirectionPolicy()
    sim = Simulation(lambda t: snap, 5.0, [mk_packet(0, 10, 11)], policy, record_events=True)
    res = sim.run()
    assert len(res.delivered) == 1
    pkt = res.delivered[0]
    expect = 2 * B / r + (d_up + d_dn) / SPEED_OF_LIGHT
    assert pkt.delivered_t - pkt.created_t == pytest.approx(expect, rel=1e-14)
    assert pkt.visited == [0]
    # the relay satellite is terminal for this flow, so routing is never asked
    assert policy.choose_calls == []
    assert [e.kind for e in res.events] == ["Arrival", "HopComplete", "Delivery"]
    assert res.propagation_s[0] == pytest.approx((d_up + d_dn) / SPEED_OF_LIGHT, rel=1e-14)


def test_three_satellite_chain_matches_hand_sum():
    r_up, r_a, r_b, r_dn = 2e8, 1.1e8, 0.9e8, 2.5e8
    d_up, d_01, d_12, d_dn = 1.1e6, 2.2e6, 3.3e6, 0.9e6
    snap = StubSnap(
        [10, 11], {10: 0, 11: 2},
        {0: {0: 1}, 1: {0: 2, 1: 0}, 2: {1: 1}},
        {(10, 0): r_up, (0, 1): r_a, (1, 0): r_a, (1, 2): r_b, (2, 1): r_b, (2, 11): r_dn},
        {(0, 10): d_up, (0, 1): d_01, (1, 2): d_12, (2, 11): d_dn},
    )
    policy = FixedDirectionPolicy(direction=0)
    sim = Simulation(lambda t: snap, 5.0, [mk_packet(0, 10, 11)], policy)
    res = sim.run()
    assert len(res.delivered) == 1
    pkt = res.delivered[0]
    expect = (
        one_hop_delay(0.0, B, r_up, d_up)
        + one_hop_delay(0.0, B, r_a, d_01)
        + one_hop_delay(0.0, B, r_b, d_12)
        + one_hop_delay(0.0, B, r_dn, d_dn)
    )
    assert pkt.delivered_t == pytest.approx(expect, rel=1e-14)
    assert pkt.visited == [0, 1, 2]
    assert [w for (_, _, w) in policy.waits] == [0.0, 0.0, 0.0]
    assert res.edge_traffic == {(0, 10): 1, (0, 1): 1, (1, 2): 1, (2, 11): 1}


# -- queueing ---------------------------------------------------------------


class DstDirectionPolicy(RoutingPolicy):
    """Maps destination gateway to a fixed outgoing direction."""

    def __init__(self, table):
        self.table = table
        self.waits = {}

    def choose_direction(self, engine, pkt, sat_id):
        return self.table[pkt.dst]

    def notify_service_start(self, engine, pkt, node_id, wait_s):
        self.waits[(pkt.id, node_id)] = wait_s


def serial_queue_setup():
    # uplink 1 ms per block, UP link 10 ms, DOWN link 20 ms, downlinks 1 ms
    r_fast, r_up, r_dn = 64800e3, 6.48e6, 3.24e6
    snap = StubSnap(
        [10, 11, 12], {10: 0, 11: 1, 12: 2},
        {0: {0: 1, 1: 2}, 1: {1: 0}, 2: {0: 0}},
        {(10, 0): r_fast, (0, 1): r_up, (0, 2): r_dn, (1, 11): r_fast, (2, 12): r_fast},
    )
    policy = DstDirectionPolicy({11: 0, 12: 1})
    pkts = [mk_packet(0, 10, 11), mk_packet(1, 10, 12), mk_packet(2, 10, 11)]
    return snap, policy, pkts


def test_serial_service_waits_match_projection():
    snap, policy, pkts = serial_queue_setup()
    sim = Simulation(lambda t: snap, 1.0, pkts, policy)
    # pause after all three have reached the satellite queue (t = 3 ms)
    sim.step(0.004)
    assert sim.now == pytest.approx(0.003, rel=1e-12)
    p1, p2 = pkts[1], pkts[2]
    # in-service remainder 8 ms; plus packet 1's own 20 ms transmission ahead of packet 2
    assert sim.queue_time(0, p1) == pytest.approx(0.008, rel=1e-12)
    assert sim.queue_time(0, p2) == pytest.approx(0.028, rel=1e-12)
    assert sim.direction_occupancy(0, 0) == 1
    assert sim.direction_occupancy(0, 1) == 1
    res = sim.run()
    assert policy.waits[(1, 0)] == pytest.approx(0.009, rel=1e-12)
    assert policy.waits[(2, 0)] == pytest.approx(0.028, rel=1e-12)
    assert [p.id for p in res.delivered] == [0, 1, 2]
    assert [p.delivered_t for p in res.delivered] == pytest.approx([0.012, 0.032, 0.042], rel=1e-9)


def test_queue_time_requires_enqueued_packet():
    snap, policy, pkts = serial_queue_setup()
    sim = Simulation(lambda t: snap, 1.0, pkts, policy)
    with pytest.raises(ValueError):
        sim.queue_time(0, pkts[0])


def test_fifo_service_order_is_preserved():
    snap, policy, pkts = serial_queue_setup()
    sim = Simulation(lambda t: snap, 1.0, pkts, policy)
    res = sim.run()
    # equal-time arrivals tie-break on packet id, so delivery follows creation order
    assert [p.id for p in res.delivered] == sorted(p.id for p in pkts)
    assert all(
        a.delivered_t <= b.delivered_t for a, b in zip(res.delivered, res.delivered[1:])
    )


def test_queue_overflow_drops_excess():
    r = 64800e3
    snap = StubSnap([10, 11], {10: 0, 11: 0}, {0: {}}, {(10, 0): r, (0, 11): r})
    pkts = [mk_packet(i, 10, 11) for i in range(4)]
    policy = FixedDirectionPolicy()
    sim = Simulation(lambda t: snap, 1.0, pkts, policy, q_max=2)
    res = sim.run()
    assert res.generated == 4
    assert [p.id for p in res.delivered] == [0, 1, 2]
    assert [p.id for p in res.dropped] == [3]
    drop = res.dropped[0]
    assert drop.dropped and drop.drop_node == 10 and drop.drop_t == 0.0
    assert res.in_flight == 0


# -- drops, loops, contract violations --------------------------------------


def test_max_hops_drop_and_loop_flags():
    r = 64800e3
    snap = StubSnap(
        [10, 11], {10: 0},  # destination gateway has no live downlink anywhere
        {0: {0: 1}, 1: {0: 2}, 2: {0: 0}},
        {(10, 0): r, (0, 1): r, (1, 2): r, (2, 0): r},
    )
    policy = FixedDirectionPolicy(direction=0)
    sim = Simulation(lambda t: snap, 5.0, [mk_packet(0, 10, 11)], policy, max_hops=5)
    res = sim.run()
    assert res.delivered == []
    assert [p.id for p in res.dropped] == [0]
    assert res.dropped[0].drop_node == 2
    assert res.dropped[0].visited == [0, 1, 2, 0, 1]
    assert [looped for (_, _, _, looped) in policy.arrivals] == [False, False, False, True, True]


def test_policy_none_means_unroutable_drop():
    class RefusingPolicy(FixedDirectionPolicy):
        def choose_direction(self, engine, pkt, sat_id):
            return None

    r = 64800e3
    snap = StubSnap([10, 11], {10: 0, 11: 5}, {0: {0: 1}}, {(10, 0): r, (0, 1): r})
    policy = RefusingPolicy()
    sim = Simulation(lambda t: snap, 1.0, [mk_packet(0, 10, 11)], policy)
    res = sim.run()
    assert [p.id for p in res.dropped] == [0]
    assert policy.drops == [(0, 0)]


@pytest.mark.parametrize("bad", [7, -2, 1])
def test_policy_contract_violation_raises(bad):
    # direction 1 exists as an index but has no link at this satellite
    r = 64800e3
    snap = StubSnap([10, 11], {10: 0, 11: 5}, {0: {0: 1}}, {(10, 0): r, (0, 1): r})
    policy = FixedDirectionPolicy(direction=bad)
    sim = Simulation(lambda t: snap, 1.0, [mk_packet(0, 10, 11)], policy)
    with pytest.raises(EngineError):
        sim.run()


# -- topology churn ---------------------------------------------------------


class PreferUpPolicy(RoutingPolicy):
    def __init__(self):
        self.choose_calls = []

    def choose_direction(self, engine, pkt, sat_id):
        self.choose_calls.append((pkt.id, sat_id))
        snap = engine.snapshot
        for d in (0, 1, 2, 3):
            nbr = snap.neighbor(sat_id, d)
            if nbr >= 0 and snap.rate(sat_id, nbr) > 0:
                return d
        return None


def test_vanished_link_triggers_new_decision_at_service():
    r_fast = 64800e6
    slow = B / 12.0  # the first packet occupies the satellite server for 12 s
    snap_a = StubSnap(
        [10, 11], {10: 0, 11: 1},
        {0: {0: 1}, 1: {1: 0}},
        {(10, 0): r_fast, (0, 1): slow, (1, 11): r_fast},
    )
    snap_b = StubSnap(
        [10, 11], {10: 0, 11: 1},
        {0: {1: 2}, 1: {1: 0}, 2: {0: 1}},
        {(10, 0): r_fast, (0, 1): slow, (0, 2): r_fast, (2, 1): r_fast, (1, 11): r_fast},
    )
    policy = PreferUpPolicy()
    pkts = [mk_packet(0, 10, 11, t=0.0), mk_packet(1, 10, 11, t=1.0)]
    sim = Simulation(
        lambda t: snap_a if t < 10 else snap_b, 30.0, pkts, policy,
        position_update_interval_s=10.0,
    )
    res = sim.run()
    assert [p.id for p in sorted(res.delivered, key=lambda p: p.id)] == [0, 1]
    p1 = [p for p in res.delivered if p.id == 1][0]
    # planned UP hop vanished while queued; the reroute goes around via satellite 2
    assert p1.visited == [0, 2, 1]
    assert [c for c in policy.choose_calls if c[0] == 1] == [(1, 0), (1, 0), (1, 2)]


def test_position_update_cadence():
    calls = []

    def snap_fn(t):
        calls.append(t)
        return StubSnap([10], {10: 0}, {0: {}}, {(10, 0): 1e6})

    sim = Simulation(snap_fn, 50.0, [], FixedDirectionPolicy(), position_update_interval_s=15.0)
    sim.run()
    assert calls == [0.0, 15.0, 30.0, 45.0]


# -- global invariants ------------------------------------------------------


def test_conservation_with_in_flight_packet():
    slow = B / 10.0  # uplink takes 10 s but the horizon is 5 s
    snap = StubSnap([10, 11], {10: 0, 11: 0}, {0: {}}, {(10, 0): slow, (0, 11): slow})
    sim = Simulation(lambda t: snap, 5.0, [mk_packet(0, 10, 11)], FixedDirectionPolicy())
    res = sim.run()
    assert res.generated == 1
    assert res.delivered == [] and res.dropped == []
    assert res.in_flight == 1


def test_latency_bounded_below_by_propagation():
    snap, policy, pkts = serial_queue_setup()
    sim = Simulation(lambda t: snap, 1.0, pkts, policy)
    res = sim.run()
    for p in res.delivered:
        assert p.delivered_t - p.created_t >= res.propagation_s[p.id]


def test_identical_runs_are_identical():
    def build():
        snap, policy, pkts = serial_queue_setup()
        sim = Simulation(lambda t: snap, 1.0, pkts, policy, record_events=True)
        return sim.run()

    a, b = build(), build()
    assert [(p.id, p.delivered_t, tuple(p.visited)) for p in a.delivered] == [
        (p.id, p.delivered_t, tuple(p.visited)) for p in b.delivered
    ]
    assert a.edge_traffic == b.edge_traffic
    assert a.events == b.events


def test_learning_round_scheduling():
    snap = StubSnap([10], {10: 0}, {0: {}}, {(10, 0): 1e6})

    class Recorder(FixedDirectionPolicy):
        def __init__(self):
            super().__init__()
            self.rounds = []

        def on_learning_round(self, engine, kind):
            self.rounds.append((engine.now, kind))

    policy = Recorder()
    sim = Simulation(lambda t: snap, 10.0, [], policy)
    sim.schedule_learning_round(2.0, "anticipation")
    sim.schedule_learning_round(4.0, "cluster")
    with pytest.raises(ValueError):
        sim.schedule_learning_round(10.0, "late")
    sim.run()
    assert policy.rounds == [(2.0, "anticipation"), (4.0, "cluster")]
