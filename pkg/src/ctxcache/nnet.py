"""Small feed-forward substrate for the two learning agents.

Fully connected layers with ReLU hidden activations and a per-network output
head (linear, tanh, or softmax), trained by hand-rolled backprop through an
adaptive-moment optimizer. Also provides Polyak-style soft target updates and
a bounded FIFO replay buffer. No external ML framework.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

HEADS = ("linear", "tanh", "softmax")


class ShapeMismatch(ValueError):
    pass


class Network:
    """Weights W[l] of shape (fan_in, fan_out); biases start at zero.

    Initial weights are uniform in +-sqrt(6 / (fan_in + fan_out)).
    """

    def __init__(self, layer_sizes, head: str = "linear", rng: np.random.Generator | None = None):
        if head not in HEADS:
            raise ValueError(f"unknown head {head!r}")
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        rng = rng or np.random.default_rng(0)
        self.layer_sizes = list(layer_sizes)
        self.head = head
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.skipped_steps = 0

    def parameters(self):
        return self.weights + self.biases

    def copy_from(self, other: "Network") -> None:
        _check_same_shape(self, other)
        self.weights = [w.copy() for w in other.weights]
        self.biases = [b.copy() for b in other.biases]

    def clone(self) -> "Network":
        dup = Network(self.layer_sizes, self.head, np.random.default_rng(0))
        dup.copy_from(self)
        return dup


def _check_same_shape(a: Network, b: Network) -> None:
    if a.layer_sizes != b.layer_sizes:
        raise ShapeMismatch(f"layer sizes differ: {a.layer_sizes} vs {b.layer_sizes}")


def _apply_head(head: str, z: np.ndarray) -> np.ndarray:
    if head == "linear":
        return z
    if head == "tanh":
        return np.tanh(z)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _as_batch(net: Network, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.layer_sizes[0]:
        raise ShapeMismatch(
            f"input of shape {np.asarray(x).shape} does not feed a {net.layer_sizes[0]}-wide network"
        )
    return arr, single


def forward(net: Network, x):
    """Pure forward pass. Accepts one vector or a batch; mirrors the shape back."""
    arr, single = _as_batch(net, x)
    out = _forward_cached(net, arr)[-1]
    return out[0] if single else out


def _forward_cached(net: Network, x: np.ndarray) -> list[np.ndarray]:
    activations = [x]
    a = x
    last = len(net.weights) - 1
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        a = _apply_head(net.head, z) if layer == last else np.maximum(z, 0.0)
        activations.append(a)
    return activations


def _backward(net: Network, activations: list[np.ndarray], dout: np.ndarray):
    """Backprop a gradient w.r.t. the network OUTPUT down to parameters and input.

    Returns (weight grads, bias grads, input grad). The softmax head uses the
    full Jacobian; callers with cross-entropy losses should prefer
    ce_train_step, which folds the Jacobian analytically.
    """
    out = activations[-1]
    if net.head == "linear":
        delta = dout
    elif net.head == "tanh":
        delta = dout * (1.0 - out * out)
    else:  # softmax Jacobian: p * (dout - p . dout)
        inner = (out * dout).sum(axis=1, keepdims=True)
        delta = out * (dout - inner)
    return _backward_from_delta(net, activations, delta)


def _backward_from_delta(net: Network, activations: list[np.ndarray], delta: np.ndarray):
    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.biases)
    for layer in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[layer]
        grads_w[layer] = a_prev.T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ net.weights[layer].T) * (activations[layer] > 0.0)
        else:
            delta = delta @ net.weights[layer].T
    return grads_w, grads_b, delta


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list | None = None
    v: list | None = None

    def _ensure(self, params):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]


def apply_gradients(net: Network, opt: AdamState, grads_w, grads_b) -> bool:
    """One optimizer step; skipped (and counted) when any gradient is non-finite."""
    grads = grads_w + grads_b
    if not all(np.isfinite(g).all() for g in grads):
        net.skipped_steps += 1
        return False
    params = net.parameters()
    opt._ensure(params)
    opt.step_count += 1
    t = opt.step_count
    for i, (p, g) in enumerate(zip(params, grads)):
        opt.m[i] = opt.beta1 * opt.m[i] + (1 - opt.beta1) * g
        opt.v[i] = opt.beta2 * opt.v[i] + (1 - opt.beta2) * (g * g)
        m_hat = opt.m[i] / (1 - opt.beta1**t)
        v_hat = opt.v[i] / (1 - opt.beta2**t)
        p -= opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.eps)
    return True


def mse_loss(out: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((out - target) ** 2))


def mse_train_step(net: Network, opt: AdamState, x, target) -> float:
    """One step on the batch-mean squared error; returns the pre-update loss."""
    arr, _ = _as_batch(net, x)
    tgt = np.asarray(target, dtype=float)
    if tgt.ndim == 1:
        tgt = tgt[None, :] if arr.shape[0] == 1 else tgt[:, None]
    activations = _forward_cached(net, arr)
    out = activations[-1]
    if tgt.shape != out.shape:
        raise ShapeMismatch(f"target shape {tgt.shape} vs output shape {out.shape}")
    loss = mse_loss(out, tgt)
    dout = 2.0 * (out - tgt) / out.size
    grads_w, grads_b, _ = _backward(net, activations, dout)
    apply_gradients(net, opt, grads_w, grads_b)
    return loss


def ce_train_step(net: Network, opt: AdamState, x, action_idx, weight) -> float:
    """Weighted cross-entropy step for a softmax head.

    Minimizes mean(weight * -log p[action]); positive weights push probability
    toward the chosen class, negative weights push away.
    """
    if net.head != "softmax":
        raise ShapeMismatch("cross-entropy step needs a softmax head")
    arr, _ = _as_batch(net, x)
    idx = np.atleast_1d(np.asarray(action_idx, dtype=int))
    w = np.atleast_1d(np.asarray(weight, dtype=float))
    activations = _forward_cached(net, arr)
    p = activations[-1]
    batch = arr.shape[0]
    loss = float(np.mean(w * -np.log(p[np.arange(batch), idx])))
    onehot = np.zeros_like(p)
    onehot[np.arange(batch), idx] = 1.0
    delta = (w[:, None] * (p - onehot)) / batch
    grads_w, grads_b, _ = _backward_from_delta(net, activations, delta)
    apply_gradients(net, opt, grads_w, grads_b)
    return loss


def grad_step(net: Network, opt: AdamState, x, dout) -> None:
    """Step with a caller-supplied gradient w.r.t. the network output."""
    arr, _ = _as_batch(net, x)
    activations = _forward_cached(net, arr)
    grads_w, grads_b, _ = _backward(net, activations, np.asarray(dout, dtype=float))
    apply_gradients(net, opt, grads_w, grads_b)


def input_gradient(net: Network, x, dout) -> np.ndarray:
    """Gradient of dout . output w.r.t. the network input (no parameter update)."""
    arr, single = _as_batch(net, x)
    activations = _forward_cached(net, arr)
    _, _, dinput = _backward(net, activations, np.asarray(dout, dtype=float))
    return dinput[0] if single else dinput


def soft_update(target: Network, online: Network, tau: float) -> None:
    """theta_target <- tau * theta_online + (1 - tau) * theta_target."""
    _check_same_shape(target, online)
    for tp, op in zip(target.parameters(), online.parameters()):
        tp *= 1.0 - tau
        tp += tau * op


class ReplayBuffer:
    """FIFO ring of transitions; uniform sampling without replacement."""

    def __init__(self, capacity: int = 100):
        self.buffer: deque = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.buffer)

    def push(self, transition) -> None:
        self.buffer.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list:
        if len(self.buffer) < batch_size:
            return []
        idx = rng.choice(len(self.buffer), size=batch_size, replace=False)
        return [self.buffer[int(i)] for i in idx]


def save_params(path, networks: dict[str, Network], scalars: dict[str, float] | None = None) -> None:
    """Persist named networks plus optional scalar state to one .npz file."""
    payload = {}
    for name, net in networks.items():
        payload[f"{name}__sizes"] = np.asarray(net.layer_sizes)
        for i, w in enumerate(net.weights):
            payload[f"{name}__w{i}"] = w
        for i, b in enumerate(net.biases):
            payload[f"{name}__b{i}"] = b
    for name, value in (scalars or {}).items():
        payload[f"scalar__{name}"] = np.asarray(float(value))
    np.savez(path, **payload)


def load_params(path, networks: dict[str, Network]) -> dict[str, float]:
    """Load parameters saved by save_params into the given networks.

    Returns stored scalars keyed by their bare names.
    """
    data = np.load(path, allow_pickle=False)
    scalars = {
        key.removeprefix("scalar__"): float(data[key])
        for key in data.files
        if key.startswith("scalar__")
    }
    for name, net in networks.items():
        sizes = data[f"{name}__sizes"].tolist()
        if sizes != net.layer_sizes:
            raise ShapeMismatch(f"{name}: stored sizes {sizes} vs network {net.layer_sizes}")
        net.weights = [data[f"{name}__w{i}"].copy() for i in range(len(net.weights))]
        net.biases = [data[f"{name}__b{i}"].copy() for i in range(len(net.biases))]
    return scalars
