"""Minimal fully-connected Q-network: forward, backprop, SGD, copy, serialization.

Hidden layers use ReLU, the output layer is linear, and everything runs in
float64. The loss is the mean squared TD error over the batch, taken only at
each sample's selected action output; untouched outputs get zero gradient.
"""

from __future__ import annotations

import json

import numpy as np

DEFAULT_DIMS = (28, 32, 32, 4)
FORMAT_VERSION = 1


class QNetwork:
    """Feed-forward net with dims[0] inputs and dims[-1] action values."""

    def __init__(self, dims: tuple[int, ...] = DEFAULT_DIMS, rng: np.random.Generator | None = None):
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"bad layer dims {dims}")
        self.dims = tuple(int(d) for d in dims)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.dims, self.dims[1:]):
            if rng is None:
                w = np.zeros((fan_out, fan_in))
                b = np.zeros(fan_out)
            else:
                bound = 1.0 / np.sqrt(fan_in)
                w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.weights.append(w)
            self.biases.append(b)

    @property
    def n_inputs(self) -> int:
        return self.dims[0]

    @property
    def n_actions(self) -> int:
        return self.dims[-1]

    def _check_input(self, x: np.ndarray):
        if x.shape[-1] != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input")

    def forward(self, x) -> np.ndarray:
        """Q-values for one observation (1-D) or a batch (2-D)."""
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        batch = arr[None, :] if single else arr
        self._check_input(batch)
        a = batch
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            a = z if i == last else np.maximum(z, 0.0)
        return a[0] if single else a

    def gradients(self, inputs, actions, targets) -> tuple[list[np.ndarray], list[np.ndarray], float]:
        """Parameter gradients of the mean squared selected-action error.

        Returns (weight grads, bias grads, pre-update loss).
        """
        x = np.asarray(inputs, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        self._check_input(x)
        acts = np.asarray(actions, dtype=int)
        tgts = np.asarray(targets, dtype=float)
        m = x.shape[0]
        if m == 0:
            raise ValueError("empty batch")
        if acts.shape != (m,) or tgts.shape != (m,):
            raise ValueError("actions and targets must match the batch size")
        if np.any(acts < 0) or np.any(acts >= self.n_actions):
            raise ValueError("action index out of range")
        if not np.all(np.isfinite(tgts)):
            raise ValueError("non-finite targets")

        pre = [x]  # layer inputs
        zs = []
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            zs.append(z)
            a = z if i == last else np.maximum(z, 0.0)
            pre.append(a)

        rows = np.arange(m)
        preds = zs[-1][rows, acts]
        loss = float(np.mean((preds - tgts) ** 2))

        delta = np.zeros_like(zs[-1])
        delta[rows, acts] = 2.0 * (preds - tgts) / m
        grads_w: list[np.ndarray] = [None] * len(self.weights)
        grads_b: list[np.ndarray] = [None] * len(self.weights)
        for i in range(last, -1, -1):
            grads_w[i] = delta.T @ pre[i]
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i]) * (zs[i - 1] > 0.0)
        return grads_w, grads_b, loss

    def sgd_step(self, inputs, actions, targets, learning_rate: float) -> float:
        """One SGD update; returns the loss measured before the update."""
        if not learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        grads_w, grads_b, loss = self.gradients(inputs, actions, targets)
        for w, b, gw, gb in zip(self.weights, self.biases, grads_w, grads_b):
            w -= learning_rate * gw
            b -= learning_rate * gb
        return loss

    def copy(self) -> "QNetwork":
        dup = QNetwork(self.dims)
        hard_copy(self, dup)
        return dup

    def to_doc(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "layer_dims": list(self.dims),
            "layers": [
                {"weights": w.tolist(), "bias": b.tolist()}
                for w, b in zip(self.weights, self.biases)
            ],
        }

    @classmethod
    def from_doc(cls, doc: dict, expected_dims: tuple[int, ...] | None = None) -> "QNetwork":
        try:
            version = doc["format_version"]
            dims = tuple(int(d) for d in doc["layer_dims"])
            layers = doc["layers"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model document: {exc}") from exc
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {version}")
        if expected_dims is not None and dims != tuple(expected_dims):
            raise ValueError(f"model dims {dims} do not match expected {tuple(expected_dims)}")
        if len(layers) != len(dims) - 1:
            raise ValueError("layer count does not match layer_dims")
        net = cls(dims)
        for i, layer in enumerate(layers):
            w = np.asarray(layer["weights"], dtype=float)
            b = np.asarray(layer["bias"], dtype=float)
            if w.shape != (dims[i + 1], dims[i]) or b.shape != (dims[i + 1],):
                raise ValueError(f"layer {i} has shape {w.shape}/{b.shape}, wants "
                                 f"({dims[i + 1]}, {dims[i]})/({dims[i + 1]},)")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} contains non-finite parameters")
            net.weights[i] = w
            net.biases[i] = b
        return net

    def to_json(self) -> str:
        return json.dumps(self.to_doc())

    @classmethod
    def from_json(cls, text: str, expected_dims: tuple[int, ...] | None = None) -> "QNetwork":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed model document: {exc}") from exc
        return cls.from_doc(doc, expected_dims)


def hard_copy(src: QNetwork, dst: QNetwork):
    """Copy src parameters into dst, bitwise, without aliasing."""
    if src.dims != dst.dims:
        raise ValueError(f"architecture mismatch: {src.dims} vs {dst.dims}")
    for i in range(len(src.weights)):
        dst.weights[i] = src.weights[i].copy()
        dst.biases[i] = src.biases[i].copy()


def average(nets: list[QNetwork]) -> QNetwork:
    """Elementwise mean of parameters across nets of identical architecture.

    Computed as base + mean(deltas) so that averaging any number of identical
    nets reproduces them bit for bit.
    """
    if not nets:
        raise ValueError("need at least one net")
    dims = nets[0].dims
    if any(n.dims != dims for n in nets):
        raise ValueError("all nets must share one architecture")
    base = nets[0]
    out = base.copy()
    for i in range(len(out.weights)):
        out.weights[i] = base.weights[i] + np.mean(
            [n.weights[i] - base.weights[i] for n in nets], axis=0
        )
        out.biases[i] = base.biases[i] + np.mean(
            [n.biases[i] - base.biases[i] for n in nets], axis=0
        )
    return out
