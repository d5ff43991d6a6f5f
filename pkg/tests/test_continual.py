import numpy as np
import pytest

from leosim.continual import (
    AggregationSchedule,
    anticipate,
    anticipation_round,
    cluster_aggregate,
    global_fedavg,
    schedule_rounds,
)
from leosim.engine import RoutingPolicy, Simulation
from leosim.mlp import QNetwork
from leosim.orbit import orbital_period


def _net(seed=None, fill=None, dims=(6, 5, 4)):
    if fill is not None:
        net = QNetwork(dims)
        for k in range(len(net.weights)):
            net.weights[k][:] = fill
            net.biases[k][:] = fill
        return net
    return QNetwork(dims, rng=np.random.default_rng(seed))


def _params_equal(a, b):
    return all(
        np.array_equal(wa, wb) for wa, wb in zip(a.weights + a.biases, b.weights + b.biases)
    )


# -- anticipate -------------------------------------------------------------


def test_anticipate_identical_is_identity():
    a = _net(seed=1)
    out = anticipate(a, a.copy())
    assert _params_equal(out, a)


def test_anticipate_midpoint():
    out = anticipate(_net(fill=0.0), _net(fill=2.0))
    for w in out.weights + out.biases:
        assert np.all(w == 1.0)


def test_anticipate_elementwise_oracle():
    a, b = _net(seed=2), _net(seed=3)
    out = anticipate(a, b)
    for k in range(len(out.weights)):
        assert np.allclose(out.weights[k], (a.weights[k] + b.weights[k]) / 2.0, rtol=0, atol=1e-15)
        assert np.allclose(out.biases[k], (a.biases[k] + b.biases[k]) / 2.0, rtol=0, atol=1e-15)


def test_anticipate_shape_mismatch():
    with pytest.raises(ValueError):
        anticipate(_net(seed=1, dims=(6, 5, 4)), _net(seed=1, dims=(6, 4, 4)))


def test_anticipation_round_simultaneous_mix():
    ring = [_net(seed=s) for s in range(4)]
    out = anticipation_round(ring)
    for s in range(4):
        want = anticipate(ring[(s + 1) % 4], ring[s])
        assert _params_equal(out[s], want)


def test_anticipation_round_fixed_point_on_equal_ring():
    base = _net(seed=9)
    ring = [base.copy() for _ in range(5)]
    out = anticipation_round(ring)
    assert all(_params_equal(net, base) for net in out)


def test_anticipation_round_empty_ring():
    with pytest.raises(ValueError):
        anticipation_round([])


# -- cluster ----------------------------------------------------------------


def test_cluster_identical_agents():
    base = _net(seed=4)
    out = cluster_aggregate([base.copy() for _ in range(6)])
    assert _params_equal(out, base)


def test_cluster_opposite_params_cancel():
    a = _net(seed=5)
    b = a.copy()
    for k in range(len(b.weights)):
        b.weights[k] *= -1.0
        b.biases[k] *= -1.0
    out = cluster_aggregate([a, b])
    for w in out.weights + out.biases:
        assert np.all(w == 0.0)


def test_cluster_matches_direct_mean():
    nets = [_net(seed=s) for s in range(20)]
    out = cluster_aggregate(nets)
    for k in range(len(out.weights)):
        direct = np.mean([n.weights[k] for n in nets], axis=0)
        assert np.allclose(out.weights[k], direct, rtol=0, atol=1e-12)
        direct_b = np.mean([n.biases[k] for n in nets], axis=0)
        assert np.allclose(out.biases[k], direct_b, rtol=0, atol=1e-12)


def test_cluster_permutation_invariant():
    nets = [_net(seed=s) for s in range(7)]
    a = cluster_aggregate(nets)
    b = cluster_aggregate(nets[3:] + nets[:3])
    for k in range(len(a.weights)):
        assert np.allclose(a.weights[k], b.weights[k], rtol=0, atol=1e-12)


def test_cluster_rejects_broken_ring():
    with pytest.raises(ValueError):
        cluster_aggregate([])
    with pytest.raises(ValueError):
        cluster_aggregate([_net(seed=1), None, _net(seed=2)])
    with pytest.raises(ValueError):
        cluster_aggregate([_net(seed=1, dims=(6, 5, 4)), _net(seed=1, dims=(6, 6, 4))])


# -- global -----------------------------------------------------------------


def test_global_single_cluster_identity():
    base = _net(seed=6)
    assert _params_equal(global_fedavg([base.copy()]), base)


def test_global_matches_direct_mean():
    nets = [_net(seed=s) for s in range(7)]
    out = global_fedavg(nets)
    for k in range(len(out.weights)):
        direct = np.mean([n.weights[k] for n in nets], axis=0)
        assert np.allclose(out.weights[k], direct, rtol=0, atol=1e-12)


def test_global_requires_input():
    with pytest.raises(ValueError):
        global_fedavg([])


def test_aggregating_copies_is_exact():
    base = _net(seed=8)
    for agg in (cluster_aggregate, global_fedavg):
        out = agg([base.copy(), base.copy()])
        assert out.to_json() == base.to_json()


# -- schedule ---------------------------------------------------------------


def test_schedule_validation_and_ordering_warning():
    with pytest.raises(ValueError):
        AggregationSchedule(anticipation_enabled=True, anticipation_period_s=0.0)
    with pytest.warns(UserWarning):
        AggregationSchedule(
            anticipation_enabled=True, anticipation_period_s=100.0,
            cluster_enabled=True, cluster_period_s=10.0,
        )
    AggregationSchedule()  # defaults are quiet


class _Recorder(RoutingPolicy):
    def __init__(self):
        self.rounds = []

    def choose_direction(self, engine, pkt, sat_id):
        return None

    def on_learning_round(self, engine, kind):
        self.rounds.append((engine.now, kind))


class _SnapStub:
    gateways = ()
    gw_to_sat = {}

    def neighbor(self, s, d):
        return -1

    def rate(self, a, b):
        return 0.0

    def distance(self, a, b):
        return 0.0


def _sim(horizon):
    return Simulation(lambda t: _SnapStub(), horizon, [], _Recorder())


def test_schedule_disabled_emits_nothing():
    sim = _sim(100.0)
    assert schedule_rounds(sim, AggregationSchedule()) == []


def test_schedule_one_orbit_of_anticipation_rounds():
    from leosim.constants import EARTH_RADIUS_M

    period = orbital_period(EARTH_RADIUS_M + 600e3)
    sim = _sim(period)
    emitted = schedule_rounds(
        sim,
        AggregationSchedule(anticipation_enabled=True, anticipation_period_s=period / 20),
    )
    # the 20th round would land exactly at the horizon and is excluded
    assert len(emitted) == 19
    assert all(kind == "anticipation" for _, kind in emitted)
    assert emitted[0][0] == pytest.approx(period / 20, rel=1e-15)


def test_coinciding_rounds_fire_in_declared_order():
    sim = _sim(5.0)
    schedule_rounds(
        sim,
        AggregationSchedule(
            anticipation_enabled=True, anticipation_period_s=2.0,
            cluster_enabled=True, cluster_period_s=2.0,
            global_enabled=True, global_period_s=4.0,
        ),
    )
    res = sim.run()
    assert sim.policy.rounds == [
        (2.0, "anticipation"),
        (2.0, "cluster"),
        (4.0, "anticipation"),
        (4.0, "cluster"),
        (4.0, "global"),
    ]
