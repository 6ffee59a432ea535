"""Minimal dense network with hand-written backprop, plus an Adam optimizer.

Hidden layers use tanh, the output layer is linear. Gradients are exact
reverse-mode derivatives; no autodiff framework is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Mlp", "AdamState", "adam_step", "dnn_param_count", "save_mlp",
           "load_mlp"]


class Mlp:
    """Fully connected network ``layer_sizes[0] -> ... -> layer_sizes[-1]``.

    Weights are Xavier-uniform initialized (tanh gain 1), biases zero.
    ``forward`` caches activations so that ``backward`` can run afterwards.
    """

    def __init__(self, layer_sizes, rng: np.random.Generator | None = None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        self.layer_sizes = list(int(s) for s in layer_sizes)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self._cache = None

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.params)

    def copy_from(self, other: "Mlp") -> None:
        for dst, src in zip(self.params, other.params):
            np.copyto(dst, src)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the network; accepts a single vector or a (batch, in) array."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.layer_sizes[0]:
            raise ValueError(
                f"input size {h.shape[1]} != expected {self.layer_sizes[0]}")
        activations = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                h = np.tanh(h)
            activations.append(h)
        self._cache = activations
        return h[0] if squeeze else h

    def backward(self, output_gradient: np.ndarray):
        """Gradients of sum(output * output_gradient) w.r.t. all parameters.

        Must follow a ``forward`` call; returns (weight_grads, bias_grads)
        shaped like ``self.weights`` / ``self.biases``.
        """
        if self._cache is None:
            raise RuntimeError("backward() requires a preceding forward()")
        grad = np.atleast_2d(np.asarray(output_gradient, dtype=np.float64))
        if grad.shape != self._cache[-1].shape:
            raise ValueError(
                f"output gradient shape {grad.shape} != {self._cache[-1].shape}")
        w_grads = [None] * len(self.weights)
        b_grads = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            a_in = self._cache[i]
            w_grads[i] = a_in.T @ grad
            b_grads[i] = grad.sum(axis=0)
            if i > 0:
                grad = grad @ self.weights[i].T
                grad = grad * (1.0 - self._cache[i] ** 2)  # tanh'
        return w_grads, b_grads


def dnn_param_count(layer_sizes) -> int:
    """Trainable-parameter count: sum of (fan_in + 1) * fan_out over layers."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output layer")
    return sum((a + 1) * b for a, b in zip(layer_sizes, layer_sizes[1:]))


def save_mlp(path, mlp: Mlp) -> None:
    """Checkpoint as named arrays (.npz); round-trips bit-exactly."""
    arrays = {"layer_sizes": np.array(mlp.layer_sizes, dtype=np.int64)}
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    np.savez(path, **arrays)


def load_mlp(path) -> Mlp:
    with np.load(path) as data:
        mlp = Mlp(data["layer_sizes"].tolist())
        for i in range(len(mlp.weights)):
            np.copyto(mlp.weights[i], data[f"w{i}"])
            np.copyto(mlp.biases[i], data[f"b{i}"])
    return mlp


@dataclass
class AdamState:
    """Per-parameter-group Adam accumulators."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, lr: float, **kwargs) -> "AdamState":
        state = cls(lr=lr, **kwargs)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state


def adam_step(params, grads, state: AdamState):
    """One Adam update, in place on ``params``; returns ``params``."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ValueError("params, grads and optimizer state must align")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params
