from dataclasses import dataclass

import numpy as np
import pytest

from leosim import orbit, topology, traffic
from leosim.link import LinkBudgets


@dataclass
class _GwStub:
    node_id: int


class _SnapStub:
    """Just enough of a topology snapshot for load computations."""

    def __init__(self, gsl: dict[int, tuple[float, float]]):
        self.gateways = [_GwStub(g) for g in sorted(gsl)]
        self.gw_to_sat = {g: 1000 + g for g in gsl}
        self._gsl = gsl

    def rate(self, a: int, b: int) -> float:
        if a in self._gsl:
            return self._gsl[a][0]
        return self._gsl[b][1]


def test_max_load_symmetric_pair():
    snap = _SnapStub({0: (1e9, 1e9), 1: (1e9, 1e9)})
    assert traffic.max_supported_load(snap) == pytest.approx(2e9)


def test_max_load_halved_downlink():
    symmetric = _SnapStub({0: (1e9, 1e9), 1: (1e9, 1e9), 2: (1e9, 1e9)})
    lopsided = _SnapStub({0: (1e9, 1e9), 1: (1e9, 1e9), 2: (1e9, 0.5e9)})
    assert traffic.max_supported_load(lopsided) == pytest.approx(
        traffic.max_supported_load(symmetric) / 2.0
    )


def test_max_load_eight_symmetric():
    snap = _SnapStub({g: (3e9, 3e9) for g in range(8)})
    assert traffic.max_supported_load(snap) == pytest.approx(24e9)


def test_max_load_rejects_dead_gsl():
    snap = _SnapStub({0: (1e9, 1e9), 1: (0.0, 1e9)})
    with pytest.raises(ValueError):
        traffic.max_supported_load(snap)


def test_max_load_kepler_snapshot():
    snap = topology.build_snapshot(orbit.PRESETS["kepler"], 0.0, 8, LinkBudgets.standard())
    # binding rate is the 1.976 Gbps downlink at the two far gateways
    assert traffic.max_supported_load(snap) == pytest.approx(8 * 500e6 * 3.952)
    rates = traffic.offered_uplink_rates(snap, 0.5)
    assert set(rates) == set(range(140, 148))
    assert all(v == pytest.approx(0.5 * 500e6 * 3.952) for v in rates.values())


def _config(lam: float, gateways: int = 2) -> traffic.TrafficConfig:
    return traffic.TrafficConfig(
        load_fraction=1.0,
        block_bits=traffic.DEFAULT_BLOCK_BITS,
        per_gateway_rates={g: lam for g in range(gateways)},
    )


def test_zero_load_means_no_packets():
    packets = traffic.generate_arrivals(_config(0.0), np.random.default_rng(0), 10.0)
    assert packets == []


def test_single_gateway_means_no_packets():
    cfg = traffic.TrafficConfig(1.0, 64800.0, {0: 1e9})
    assert traffic.generate_arrivals(cfg, np.random.default_rng(0), 10.0) == []


def test_arrivals_deterministic():
    cfg = _config(64800.0 * 50, gateways=3)
    a = traffic.generate_arrivals(cfg, np.random.default_rng(42), 5.0)
    b = traffic.generate_arrivals(cfg, np.random.default_rng(42), 5.0)
    assert [(p.id, p.src, p.dst, p.created_t) for p in a] == [
        (p.id, p.src, p.dst, p.created_t) for p in b
    ]
    assert len(a) > 0


def test_arrival_fields_and_ordering():
    cfg = _config(64800.0 * 100, gateways=4)
    packets = traffic.generate_arrivals(cfg, np.random.default_rng(7), 3.0)
    assert [p.id for p in packets] == list(range(len(packets)))
    times = [p.created_t for p in packets]
    assert times == sorted(times)
    assert all(0.0 <= t < 3.0 for t in times)
    for p in packets:
        assert p.src != p.dst
        assert p.size_bits == 64800.0
        assert p.visited == [] and p.delivered_t is None and not p.dropped


def test_empirical_rate_matches_offered():
    # law of large numbers: ~2000 blocks per stream at this rate and horizon
    lam = 64800.0 * 200
    cfg = _config(lam, gateways=2)
    horizon = 10.0
    packets = traffic.generate_arrivals(cfg, np.random.default_rng(123), horizon)
    for src in (0, 1):
        bits = sum(p.size_bits for p in packets if p.src == src)
        assert bits / horizon == pytest.approx(lam, rel=0.05)


def test_per_destination_split_is_even():
    cfg = _config(64800.0 * 300, gateways=4)
    packets = traffic.generate_arrivals(cfg, np.random.default_rng(9), 10.0)
    counts = {}
    for p in packets:
        counts[(p.src, p.dst)] = counts.get((p.src, p.dst), 0) + 1
    mean = np.mean(list(counts.values()))
    assert len(counts) == 12
    for c in counts.values():
        assert c == pytest.approx(mean, rel=0.15)


def test_trace_rows():
    cfg = _config(64800.0 * 10)
    packets = traffic.generate_arrivals(cfg, np.random.default_rng(1), 2.0)
    rows = traffic.packet_trace_rows(packets)
    assert rows == [(p.id, p.src, p.dst, p.created_t) for p in packets]
