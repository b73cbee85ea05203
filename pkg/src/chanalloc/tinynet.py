"""Minimal neural toolkit: MLPs with explicit backprop, Adam, categorical head.

Everything runs in 64-bit floats on plain numpy arrays. Networks are value
objects: cloneable, sendable, no hidden sharing. Hidden layers use tanh, the
output layer is affine.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

CHECKPOINT_MAGIC = b"MLPC"
CHECKPOINT_VERSION = 1


class ShapeError(ValueError):
    """Input/gradient shape does not match the network."""


class StaleCacheError(ValueError):
    """backward() called with a cache from a different network or pass."""


class CheckpointError(IOError):
    """Malformed or incompatible checkpoint file."""


class Mlp:
    """Fully connected tanh network. ``layer_sizes = [in, hidden..., out]``."""

    def __init__(self, layer_sizes, rng: np.random.Generator | None = None):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("layer_sizes needs >= 2 positive entries")
        self.layer_sizes = sizes
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """Flat view [W0, b0, W1, b1, ...]; arrays are the live ones."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def clone(self) -> "Mlp":
        other = Mlp(self.layer_sizes)
        other.copy_from(self)
        return other

    def copy_from(self, other: "Mlp") -> None:
        if other.layer_sizes != self.layer_sizes:
            raise ShapeError("cannot copy between different architectures")
        for mine, theirs in zip(self.parameters(), other.parameters()):
            mine[...] = theirs


@dataclass
class ForwardCache:
    net_id: int
    inputs: list[np.ndarray]  # input to each layer, 2-D (batch, fan_in)
    hidden: list[np.ndarray]  # tanh outputs per hidden layer, 2-D
    squeezed: bool  # original input was 1-D


@dataclass
class MlpGrads:
    """Gradients of sum(output * grad_output) over the batch."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray

    def flat(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


def forward(net: Mlp, x) -> tuple[np.ndarray, ForwardCache]:
    """Run the network; returns (output, cache for backward).

    Accepts a single input vector or a (batch, in) matrix.
    """
    x = np.asarray(x, dtype=float)
    squeezed = x.ndim == 1
    if squeezed:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.layer_sizes[0]:
        raise ShapeError(f"expected input width {net.layer_sizes[0]}, got shape {x.shape}")
    inputs, hidden = [], []
    a = x
    last = net.num_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ w + b
        if i < last:
            a = np.tanh(z)
            hidden.append(a)
        else:
            a = z
    out = a[0] if squeezed else a
    return out, ForwardCache(net_id=id(net), inputs=inputs, hidden=hidden, squeezed=squeezed)


def backward(net: Mlp, cache: ForwardCache, grad_output) -> MlpGrads:
    """Exact reverse-mode gradients w.r.t. every parameter and the input."""
    if cache.net_id != id(net):
        raise StaleCacheError("cache was produced by a different network")
    g = np.asarray(grad_output, dtype=float)
    if cache.squeezed:
        if g.ndim != 1:
            raise ShapeError("grad_output must be 1-D for a 1-D forward pass")
        g = g[None, :]
    if g.shape != (cache.inputs[0].shape[0], net.layer_sizes[-1]):
        raise ShapeError(f"grad_output shape {g.shape} does not match the forward pass")

    d_weights = [None] * net.num_layers
    d_biases = [None] * net.num_layers
    delta = g
    for i in range(net.num_layers - 1, -1, -1):
        d_weights[i] = cache.inputs[i].T @ delta
        d_biases[i] = delta.sum(axis=0)
        delta = delta @ net.weights[i].T
        if i > 0:
            delta = delta * (1.0 - cache.hidden[i - 1] ** 2)
    d_input = delta[0] if cache.squeezed else delta
    return MlpGrads(weights=d_weights, biases=d_biases, input=d_input)


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] | None = None
    second_moment: list[np.ndarray] | None = None

    @classmethod
    def for_params(cls, params, learning_rate, **kwargs) -> "AdamState":
        state = cls(learning_rate=learning_rate, **kwargs)
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
        return state

    @classmethod
    def for_net(cls, net: Mlp, learning_rate, **kwargs) -> "AdamState":
        return cls.for_params(net.parameters(), learning_rate, **kwargs)

    def clone(self) -> "AdamState":
        other = AdamState(self.learning_rate, self.beta1, self.beta2, self.epsilon, self.step_count)
        other.first_moment = [m.copy() for m in self.first_moment]
        other.second_moment = [v.copy() for v in self.second_moment]
        return other


def adam_update(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> None:
    """Standard bias-corrected Adam step, applied to params in place."""
    if len(params) != len(state.first_moment) or len(params) != len(grads):
        raise ShapeError("params, grads and optimizer state must align")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def entropy(logits: np.ndarray) -> np.ndarray:
    """Shannon entropy (nats) of the softmax distribution, last axis reduced."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    return -(p * logp).sum(axis=-1)


def categorical_sample(logits, rng: np.random.Generator) -> tuple[int, float, float]:
    """Sample an action index; returns (action, log_prob, entropy)."""
    logp = log_softmax(np.asarray(logits, dtype=float))
    p = np.exp(logp)
    u = rng.random()
    action = int(np.searchsorted(np.cumsum(p), u))
    action = min(action, p.size - 1)  # guard the u ~ 1.0 edge
    ent = float(-(p * logp).sum())
    return action, float(logp[action]), ent


def dueling_merge(raw: np.ndarray) -> np.ndarray:
    """Merge a (..., 1 + A) value/advantage head into Q = V + A - mean(A)."""
    v = raw[..., :1]
    adv = raw[..., 1:]
    return v + adv - adv.mean(axis=-1, keepdims=True)


def dueling_merge_backward(grad_q: np.ndarray) -> np.ndarray:
    """Backprop grad(Q) through dueling_merge to the raw (..., 1 + A) head."""
    total = grad_q.sum(axis=-1, keepdims=True)
    grad_adv = grad_q - total / grad_q.shape[-1]
    return np.concatenate([total, grad_adv], axis=-1)


def save_checkpoint(net: Mlp, path) -> None:
    """Write the portable checkpoint: magic, version, sizes, then per layer
    the row-major float64 little-endian weight matrix followed by the bias."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(net.layer_sizes)))
        fh.write(struct.pack(f"<{len(net.layer_sizes)}I", *net.layer_sizes))
        for w, b in zip(net.weights, net.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_checkpoint(path) -> Mlp:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f"bad magic {magic!r} in {path}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (n_sizes,) = struct.unpack("<I", fh.read(4))
        sizes = struct.unpack(f"<{n_sizes}I", fh.read(4 * n_sizes))
        net = Mlp(sizes)
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            w = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype="<f8")
            if w.size != fan_in * fan_out:
                raise CheckpointError(f"truncated weight block in {path}")
            b = np.frombuffer(fh.read(8 * fan_out), dtype="<f8")
            if b.size != fan_out:
                raise CheckpointError(f"truncated bias block in {path}")
            net.weights[i] = w.reshape(fan_in, fan_out).astype(float)
            net.biases[i] = b.astype(float)
        if fh.read(1):
            raise CheckpointError(f"trailing bytes in {path}")
    return net
