"""Dense feed-forward network with backprop and ADAM, sized for Q regression.

Parameters live in one flat vector with per-layer views, so optimizer and
target-network updates are single vector operations; that keeps the
per-transition learning step cheap enough for CPU training loops.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mlp",
    "AdamState",
    "init_mlp",
    "init_adam",
    "forward",
    "backward_mse",
    "batch_backward_mse",
    "adam_step",
    "soft_update",
    "clone_mlp",
    "save_mlp",
    "load_mlp",
]

_ACTIVATIONS = ("relu", "linear")


class Mlp:
    """Fully connected net: ``layer_sizes[0]`` inputs to ``layer_sizes[-1]`` outputs.

    ``activations`` has one tag per weight layer; the output layer is linear
    by construction when built through :func:`init_mlp`.
    """

    __slots__ = ("layer_sizes", "activations", "flat", "weights", "biases")

    def __init__(self, layer_sizes, activations, flat: np.ndarray):
        self.layer_sizes = tuple(int(n) for n in layer_sizes)
        self.activations = tuple(activations)
        if len(self.activations) != len(self.layer_sizes) - 1:
            raise ValueError("need one activation per weight layer")
        for a in self.activations:
            if a not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        if flat.shape != (n_params(self.layer_sizes),):
            raise ValueError("flat parameter vector has the wrong length")
        self.flat = flat
        self.weights = []
        self.biases = []
        pos = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            self.weights.append(flat[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out))
            pos += fan_in * fan_out
            self.biases.append(flat[pos:pos + fan_out])
            pos += fan_out

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]


def n_params(layer_sizes) -> int:
    return sum((i + 1) * o for i, o in zip(layer_sizes[:-1], layer_sizes[1:]))


def init_mlp(layer_sizes, rng, hidden_activation: str = "relu") -> Mlp:
    """He-style fan-in uniform weights, zero biases, linear output layer."""
    sizes = tuple(layer_sizes)
    if len(sizes) < 2:
        raise ValueError("need at least input and output layer sizes")
    activations = [hidden_activation] * (len(sizes) - 2) + ["linear"]
    flat = np.zeros(n_params(sizes))
    net = Mlp(sizes, activations, flat)
    for w, act in zip(net.weights, activations):
        gain2 = 2.0 if act == "relu" else 1.0
        bound = math.sqrt(3.0 * gain2 / w.shape[0])
        w[...] = rng.gen.uniform(-bound, bound, size=w.shape)
    return net


def clone_mlp(net: Mlp) -> Mlp:
    return Mlp(net.layer_sizes, net.activations, net.flat.copy())


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Evaluate the net on one input vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if x.shape[-1] != net.n_inputs:
        raise ValueError(f"expected {net.n_inputs} input features, got {x.shape[-1]}")
    h = x.reshape(1, -1) if single else x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        h = h @ w + b
        if act == "relu":
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def _forward_batch(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Unchecked batch forward for hot loops (x must be 2-D float64)."""
    h = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        h = h @ w
        h += b
        if act == "relu":
            np.maximum(h, 0.0, out=h)
    return h


def _forward_cached(net: Mlp, x: np.ndarray):
    """Forward pass keeping pre/post-activation values for backprop."""
    pre, post = [], [x]
    h = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if act == "relu" else z
        post.append(h)
    return pre, post


def _backprop(net: Mlp, pre, post, dout: np.ndarray) -> np.ndarray:
    """Gradient of a scalar loss w.r.t. the flat parameter vector, given the
    loss gradient ``dout`` at the output layer."""
    grad = np.empty_like(net.flat)
    pos = grad.size
    delta = dout
    for k in range(len(net.weights) - 1, -1, -1):
        if net.activations[k] == "relu":
            np.multiply(delta, pre[k] > 0.0, out=delta)
        fan_out = net.biases[k].size
        np.sum(delta, axis=0, out=grad[pos - fan_out:pos])
        pos -= fan_out
        n_w = net.weights[k].size
        w_shape = net.weights[k].shape
        np.matmul(post[k].T, delta, out=grad[pos - n_w:pos].reshape(w_shape))
        pos -= n_w
        if k > 0:
            delta = delta @ net.weights[k].T
    return grad


def batch_backward_mse(net: Mlp, states: np.ndarray, actions: np.ndarray,
                       targets: np.ndarray) -> tuple[np.ndarray, float]:
    """Gradient and value of the mean over the batch of 1/2 (Q(s,a) - y)^2.

    Only the selected action's output error propagates; the other heads get
    zero gradient.
    """
    targets = np.asarray(targets, dtype=float)
    if not math.isfinite(float(targets.sum())):
        raise ValueError("non-finite regression target")
    pre, post = _forward_cached(net, states)
    q = post[-1]
    n = states.shape[0]
    idx = np.arange(n)
    err = q[idx, actions] - targets
    dout = np.zeros_like(q)
    dout[idx, actions] = err / n
    loss = 0.5 * float(err @ err) / n
    return _backprop(net, pre, post, dout), loss


def backward_mse(net: Mlp, state: np.ndarray, action_index: int,
                 target_q: float) -> np.ndarray:
    """Gradient of 1/2 (Q(state, action) - target)^2 for a single sample."""
    if not 0 <= action_index < net.n_outputs:
        raise ValueError(f"action index {action_index} out of range")
    grad, _ = batch_backward_mse(net, np.asarray(state, dtype=float).reshape(1, -1),
                                 np.array([action_index]), np.array([target_q]))
    return grad


@dataclass
class AdamState:
    """Moment accumulators for bias-corrected ADAM over a flat parameter vector."""

    learn_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)
    step_count: int = 0


def init_adam(net: Mlp, learn_rate: float = 0.01, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    return AdamState(learn_rate, beta1, beta2, epsilon,
                     np.zeros_like(net.flat), np.zeros_like(net.flat), 0)


def adam_step(net: Mlp, opt: AdamState, grad: np.ndarray) -> Mlp:
    """One bias-corrected ADAM update, applied in place.

    Bias correction is folded into the step size and epsilon:
    m_hat / (sqrt(v_hat) + eps) == c2 * m / (sqrt(v) + eps * c2) / (1 - b1^t)
    with c2 = sqrt(1 - b2^t), which avoids materializing m_hat and v_hat.
    """
    if grad.shape != net.flat.shape:
        raise ValueError("gradient shape does not match parameters")
    opt.step_count += 1
    t = opt.step_count
    opt.m *= opt.beta1
    opt.m += (1.0 - opt.beta1) * grad
    opt.v *= opt.beta2
    opt.v += (1.0 - opt.beta2) * (grad * grad)
    c2 = math.sqrt(1.0 - opt.beta2 ** t)
    step = opt.learn_rate * c2 / (1.0 - opt.beta1 ** t)
    denom = np.sqrt(opt.v)
    denom += opt.epsilon * c2
    update = opt.m / denom
    update *= step
    net.flat -= update
    if not math.isfinite(float(net.flat.sum())):
        raise FloatingPointError("non-finite parameters after ADAM update")
    return net


def soft_update(target: Mlp, main: Mlp, tau: float) -> Mlp:
    """Blend target parameters toward the main net: theta' <- tau*theta + (1-tau)*theta'."""
    if target.layer_sizes != main.layer_sizes or target.activations != main.activations:
        raise ValueError("target and main network architectures differ")
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    target.flat *= (1.0 - tau)
    target.flat += tau * main.flat
    return target


def save_mlp(path, net: Mlp, metadata: dict | None = None) -> None:
    """Write the net as self-describing JSON: sizes, activations, flat
    per-layer parameter arrays, and free-form training metadata."""
    doc = {
        "format": "cbmrl-mlp",
        "version": 1,
        "layer_sizes": list(net.layer_sizes),
        "activations": list(net.activations),
        "layers": [
            {"weights": w.ravel().tolist(), "bias": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
        "metadata": metadata or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_mlp(path) -> tuple[Mlp, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "cbmrl-mlp":
        raise ValueError(f"{path}: not a cbmrl model file")
    sizes = doc["layer_sizes"]
    flat = np.empty(n_params(sizes))
    net = Mlp(sizes, doc["activations"], flat)
    for layer, w, b in zip(doc["layers"], net.weights, net.biases):
        w[...] = np.asarray(layer["weights"]).reshape(w.shape)
        b[...] = np.asarray(layer["bias"])
    return net, doc.get("metadata", {})
