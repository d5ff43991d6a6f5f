"""Run analytics: model-similarity scores over shared probe inputs, latency
distribution summaries, and link-load normalization."""

from __future__ import annotations

import numpy as np

from .mlp import QNetwork

PROBE_COUNT = 512


def cka(x: np.ndarray, y: np.ndarray) -> float:
    """Linear centered kernel alignment between two representations.

    Rows are samples. Column means are removed before comparison; the score
    is ||Y^T X||_F^2 / (||X^T X||_F * ||Y^T Y||_F), which is 1 for identical
    (or uniformly scaled) representations and 0 for orthogonal ones.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("representations must be 2-d (samples x features)")
    if x.shape[0] != y.shape[0]:
        raise ValueError("representations must share the sample count")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    denom_x = np.linalg.norm(xc.T @ xc)
    denom_y = np.linalg.norm(yc.T @ yc)
    if denom_x == 0.0 or denom_y == 0.0:
        raise ValueError("zero-norm representation: similarity is undefined")
    cross = np.linalg.norm(yc.T @ xc) ** 2
    return float(cross / (denom_x * denom_y))


def model_cka(net_a: QNetwork, net_b: QNetwork, probes: np.ndarray) -> float:
    """Similarity of two models' output activations over a shared probe set."""
    return cka(net_a.forward(probes), net_b.forward(probes))


def random_observations(
    rng: np.random.Generator, n: int, sigma: float = 20.0, c_star: int = 10
) -> np.ndarray:
    """Uniformly sampled observation vectors respecting the encoder's ranges."""
    obs = np.zeros((n, 28))
    lat_bound = 90.0 / sigma
    lon_bound = 180.0 / sigma
    for k in range(4):
        present = rng.random(n) >= 0.2
        levels = rng.integers(0, c_star + 1, size=(n, 4)).astype(float)
        levels[~present] = c_star + 1
        obs[:, 4 * k : 4 * k + 4] = levels
        coords = np.stack(
            [
                rng.uniform(-lat_bound, lat_bound, n),
                rng.uniform(-lon_bound, lon_bound, n),
            ],
            axis=1,
        )
        coords[~present] = 0.0
        obs[:, 16 + 2 * k : 18 + 2 * k] = coords
    obs[:, 24] = rng.uniform(0.0, 180.0 / sigma, n)
    obs[:, 25] = rng.uniform(0.0, 360.0 / sigma, n)
    obs[:, 26] = rng.uniform(-lat_bound, lat_bound, n)
    obs[:, 27] = rng.uniform(-lon_bound, lon_bound, n)
    return obs


def collect_probes(
    states: list[np.ndarray],
    rng: np.random.Generator,
    n: int = PROBE_COUNT,
    sigma: float = 20.0,
    c_star: int = 10,
) -> np.ndarray:
    """Probe matrix for similarity scoring: sampled from recorded experience
    states when enough exist, otherwise random in-range observations."""
    if len(states) >= max(n, 2):
        idx = rng.choice(len(states), size=n, replace=False)
        return np.stack([states[i] for i in idx])
    return random_observations(rng, n, sigma=sigma, c_star=c_star)


def cka_matrix(nets: list[QNetwork], probes: np.ndarray) -> np.ndarray:
    reps = [net.forward(probes) for net in nets]
    n = len(nets)
    out = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = cka(reps[i], reps[j])
    return out


def mean_pairwise_cka(nets: list[QNetwork], probes: np.ndarray) -> float:
    if len(nets) < 2:
        raise ValueError("need at least two models")
    m = cka_matrix(nets, probes)
    iu = np.triu_indices(len(nets), k=1)
    return float(m[iu].mean())


def latency_cdf(samples) -> list[tuple[float, float]]:
    """Empirical CDF rows (latency, percentile), percentile = 100 * rank / n."""
    xs = sorted(float(s) for s in samples)
    if not xs:
        raise ValueError("need at least one sample")
    n = len(xs)
    return [(x, 100.0 * (i + 1) / n) for i, x in enumerate(xs)]


def percentile(samples, q: float) -> float:
    """Percentile with linear interpolation; q=0 is the min, q=100 the max."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one sample")
    return float(np.percentile(arr, q))


def link_heatmap(
    edge_traffic: dict[tuple[int, int], int], gateway_ids: set[int]
) -> dict[tuple[int, int], float]:
    """Per-edge load as a percentage of the busiest ground-to-satellite link."""
    gsl_max = 0
    for (a, b), count in edge_traffic.items():
        if a in gateway_ids or b in gateway_ids:
            gsl_max = max(gsl_max, count)
    if gsl_max == 0:
        return {edge: 0.0 for edge in edge_traffic}
    return {edge: 100.0 * count / gsl_max for edge, count in edge_traffic.items()}
