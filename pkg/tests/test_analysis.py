import numpy as np
import pytest

from leosim.analysis import (
    cka,
    cka_matrix,
    collect_probes,
    latency_cdf,
    link_heatmap,
    mean_pairwise_cka,
    model_cka,
    percentile,
    random_observations,
)
from leosim.mlp import QNetwork


def rand_rep(rng, n=32, d=4):
    return rng.normal(size=(n, d))


# -- cka --------------------------------------------------------------------


def test_cka_self_is_one():
    x = rand_rep(np.random.default_rng(0))
    assert cka(x, x) == pytest.approx(1.0, rel=1e-12)


def test_cka_scale_invariant():
    x = rand_rep(np.random.default_rng(1))
    assert cka(x, 3.7 * x) == pytest.approx(1.0, rel=1e-12)
    assert cka(x, -2.0 * x) == pytest.approx(1.0, rel=1e-12)


def test_cka_orthogonal_representations():
    # zero-mean columns spanning orthogonal subspaces of sample space
    x = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    y = np.array([[1.0], [1.0], [-1.0], [-1.0]])
    assert cka(x, y) == pytest.approx(0.0, abs=1e-15)


def test_cka_symmetric():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = rand_rep(rng), rand_rep(rng)
        assert cka(x, y) == pytest.approx(cka(y, x), rel=1e-12)


def test_cka_orthogonal_transform_invariant():
    rng = np.random.default_rng(3)
    x, y = rand_rep(rng), rand_rep(rng)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    assert cka(x, y @ q) == pytest.approx(cka(x, y), rel=1e-10)
    assert cka(x @ q, y) == pytest.approx(cka(x, y), rel=1e-10)


def test_cka_bounds():
    rng = np.random.default_rng(4)
    for _ in range(50):
        v = cka(rand_rep(rng), rand_rep(rng))
        assert -1e-12 <= v <= 1.0 + 1e-12


def test_cka_rejects_degenerate_input():
    x = rand_rep(np.random.default_rng(5))
    with pytest.raises(ValueError):
        cka(x, np.ones((32, 4)))  # constant representation has zero norm
    with pytest.raises(ValueError):
        cka(x, rand_rep(np.random.default_rng(6), n=16))
    with pytest.raises(ValueError):
        cka(x[:1], x[:1])


# -- model_cka --------------------------------------------------------------


def probes():
    return random_observations(np.random.default_rng(7), 64)


def test_model_cka_copy_is_one():
    net = QNetwork(rng=np.random.default_rng(8))
    assert model_cka(net, net.copy(), probes()) == pytest.approx(1.0, rel=1e-12)


def test_model_cka_matches_two_pass_oracle():
    a = QNetwork(rng=np.random.default_rng(9))
    b = QNetwork(rng=np.random.default_rng(10))
    p = probes()
    got = model_cka(a, b, p)
    assert got < 1.0

    # independent recomputation from first principles
    x = a.forward(p)
    y = b.forward(p)
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    want = np.linalg.norm(y.T @ x, "fro") ** 2 / (
        np.linalg.norm(x.T @ x, "fro") * np.linalg.norm(y.T @ y, "fro")
    )
    assert got == pytest.approx(want, rel=1e-12)


def test_cka_matrix_shape_and_diagonal():
    nets = [QNetwork(rng=np.random.default_rng(s)) for s in range(3)]
    m = cka_matrix(nets, probes())
    assert m.shape == (3, 3)
    assert np.array_equal(np.diag(m), np.ones(3))
    assert np.allclose(m, m.T)
    mean = mean_pairwise_cka(nets, probes())
    iu = np.triu_indices(3, k=1)
    assert mean == pytest.approx(float(m[iu].mean()), rel=1e-12)


# -- probes -----------------------------------------------------------------


def test_collect_probes_samples_recorded_states():
    rng = np.random.default_rng(11)
    states = [np.full(28, float(i)) for i in range(600)]
    got = collect_probes(states, rng, n=512)
    assert got.shape == (512, 28)
    values = {row[0] for row in got}
    assert len(values) == 512  # sampled without replacement
    assert values <= set(float(i) for i in range(600))


def test_collect_probes_random_fallback_in_range():
    rng = np.random.default_rng(12)
    got = collect_probes([np.zeros(28)] * 10, rng, n=512)
    assert got.shape == (512, 28)
    cong = got[:, :16]
    assert cong.min() >= 0.0 and cong.max() <= 11.0
    assert np.all(got[:, 24] >= 0.0) and np.all(got[:, 24] <= 9.0)
    assert np.all(np.abs(got[:, 26]) <= 4.5)


def test_collect_probes_deterministic():
    a = collect_probes([], np.random.default_rng(13), n=64)
    b = collect_probes([], np.random.default_rng(13), n=64)
    assert np.array_equal(a, b)


# -- latency statistics -----------------------------------------------------


def test_latency_cdf_single_sample():
    assert latency_cdf([0.42]) == [(0.42, 100.0)]


def test_latency_cdf_percentile_interpolation():
    samples = list(range(1, 101))
    assert percentile(samples, 50) == pytest.approx(50.5)
    assert percentile(samples, 0) == 1.0
    assert percentile(samples, 100) == 100.0


def test_latency_cdf_monotone():
    rng = np.random.default_rng(14)
    samples = rng.exponential(size=200)
    rows = latency_cdf(samples)
    xs = [x for x, _ in rows]
    ps = [p for _, p in rows]
    assert xs == sorted(xs)
    assert ps == sorted(ps)
    assert ps[-1] == 100.0
    assert xs[0] == min(samples) and xs[-1] == max(samples)


def test_latency_cdf_empty_rejected():
    with pytest.raises(ValueError):
        latency_cdf([])


# -- heatmap ----------------------------------------------------------------


def test_link_heatmap_no_traffic():
    assert link_heatmap({}, {9}) == {}


def test_link_heatmap_single_path_is_full_load():
    traffic = {(9, 0): 5, (0, 1): 5, (1, 8): 5}
    out = link_heatmap(traffic, {8, 9})
    assert out == {(9, 0): 100.0, (0, 1): 100.0, (1, 8): 100.0}


def test_link_heatmap_normalizes_by_busiest_gsl():
    traffic = {(9, 0): 10, (8, 3): 4, (0, 1): 7, (1, 2): 15}
    out = link_heatmap(traffic, {8, 9})
    assert out[(9, 0)] == 100.0
    assert out[(8, 3)] == 40.0
    assert out[(0, 1)] == 70.0
    # a concentrated inter-satellite corridor can exceed the anchor
    assert out[(1, 2)] == 150.0


def test_link_heatmap_zero_gsl_traffic():
    assert link_heatmap({(0, 1): 3}, {9}) == {(0, 1): 0.0}
