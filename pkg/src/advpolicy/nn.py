"""Dense Q-network: forward pass, softmax policy, hand-derived gradients, model files.

Observations are 2D float arrays with values in [0, 1]. A network is a stack of
dense layers, ReLU on hidden layers and identity on the output layer, whose
output has one Q-value per action.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

MODEL_FORMAT_VERSION = 1
ACTIVATIONS = ("relu", "identity")


class ShapeError(ValueError):
    """Observation or layer dimensions do not chain."""


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "relu"

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64).ravel()
        if self.weights.ndim != 2 or self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(f"bias {self.bias.shape} does not match weights {self.weights.shape}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("non-finite layer parameters")


@dataclass
class QNetwork:
    input_height: int
    input_width: int
    layers: list

    def __post_init__(self):
        if self.input_height < 1 or self.input_width < 1:
            raise ShapeError("input dimensions must be positive")
        if not self.layers:
            raise ShapeError("network needs at least one layer")
        fan_in = self.input_height * self.input_width
        for k, layer in enumerate(self.layers):
            if layer.weights.shape[1] != fan_in:
                raise ShapeError(f"layer {k} expects {layer.weights.shape[1]} inputs, gets {fan_in}")
            fan_in = layer.weights.shape[0]
        if self.action_count < 2:
            raise ShapeError("need at least two actions")

    @property
    def action_count(self):
        return self.layers[-1].weights.shape[0]

    @property
    def input_shape(self):
        return (self.input_height, self.input_width)

    def copy(self):
        return QNetwork(
            self.input_height,
            self.input_width,
            [DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
        )

    def kernel_args(self):
        return (
            [l.weights for l in self.layers],
            [l.bias for l in self.layers],
            [l.activation == "relu" for l in self.layers],
        )


def init_network(input_height, input_width, hidden, action_count, rng):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from ``rng``."""
    sizes = [input_height * input_width, *hidden, action_count]
    layers = []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 1.0 / math.sqrt(n_in)
        w = rng.uniform(-bound, bound, size=(n_out, n_in))
        b = rng.uniform(-bound, bound, size=n_out)
        layers.append(DenseLayer(w, b, "identity" if k == len(sizes) - 2 else "relu"))
    return QNetwork(input_height, input_width, layers)


def check_observation(net, obs):
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != net.input_shape:
        raise ShapeError(f"observation shape {obs.shape} != network input {net.input_shape}")
    return obs


def forward(net, obs):
    """Q-values for one observation, one per action."""
    obs = check_observation(net, obs)
    return kernels.forward(*net.kernel_args(), obs, net.input_height, net.input_width)


def occlusion_q_values(net, obs):
    """Q-values for every single-pixel-zeroed copy of ``obs``, shape (H*W, actions).

    Row ``i*W + j`` equals ``forward(net, obs with pixel (i, j) = 0)`` exactly.
    """
    obs = check_observation(net, obs)
    return kernels.occlusion_q(*net.kernel_args(), obs, net.input_height, net.input_width)


def argmax_action(q):
    """Index of the largest Q-value; ties go to the smallest index."""
    q = np.asarray(q, dtype=np.float64)
    if q.size == 0:
        raise ValueError("argmax of an empty sequence")
    return int(np.argmax(q))


@dataclass(frozen=True)
class PolicyDistribution:
    probabilities: np.ndarray
    temperature: float


def log_softmax(q, temperature=1.0):
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    z = np.asarray(q, dtype=np.float64) / temperature
    z = z - np.max(z, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def softmax_policy(q, temperature=1.0):
    """Boltzmann policy exp(Q/T) / sum exp(Q/T), computed with max subtraction."""
    return PolicyDistribution(np.exp(log_softmax(q, temperature)), float(temperature))


@dataclass(frozen=True)
class LossSpec:
    """Scalar loss of the Q-vector whose input gradient is requested.

    ``cross_entropy``: -log softmax(Q / T)[action].
    ``q_difference``: Q[action] - Q[other].
    """

    kind: str
    action: int
    other: int = None
    temperature: float = 1.0

    @classmethod
    def cross_entropy(cls, target, temperature=1.0):
        return cls("cross_entropy", target, temperature=temperature)

    @classmethod
    def q_difference(cls, a1, a2):
        return cls("q_difference", a1, other=a2)

    def check(self, action_count):
        for a in (self.action, self.other):
            if a is not None and not 0 <= a < action_count:
                raise IndexError(f"action {a} out of range for {action_count} actions")
        if self.kind not in ("cross_entropy", "q_difference"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "q_difference" and self.other is None:
            raise ValueError("q_difference needs two actions")

    def value_and_grad(self, q):
        """Loss value and dLoss/dQ."""
        grad = np.zeros_like(q)
        if self.kind == "cross_entropy":
            logp = log_softmax(q, self.temperature)
            grad[:] = np.exp(logp)
            grad[self.action] -= 1.0
            return -logp[self.action], grad / self.temperature
        grad[self.action] += 1.0
        grad[self.other] -= 1.0
        return q[self.action] - q[self.other], grad


def forward_batch(net, x):
    """Batched numpy forward pass on flattened inputs (B, H*W).

    Returns the output (B, actions) and the per-layer cache for ``backward_batch``.
    Used for training; decisions go through ``forward``.
    """
    cache = []
    a = x
    for layer in net.layers:
        z = a @ layer.weights.T + layer.bias
        cache.append((a, z))
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a, cache


def backward_batch(net, cache, grad_out, want_params=True):
    """Backpropagate dLoss/dOutput through the cached pass.

    Returns (dLoss/dInput, [(dW, db), ...]); parameter grads are summed over the batch.
    """
    grads = []
    delta = grad_out
    for layer, (a_in, z) in zip(reversed(net.layers), reversed(cache)):
        if layer.activation == "relu":
            delta = delta * (z > 0.0)
        if want_params:
            grads.append((delta.T @ a_in, delta.sum(axis=0)))
        delta = delta @ layer.weights
    grads.reverse()
    return delta, grads


def loss_and_input_gradient(net, obs, loss):
    obs = check_observation(net, obs)
    loss.check(net.action_count)
    q, cache = forward_batch(net, obs.reshape(1, -1))
    value, dq = loss.value_and_grad(q[0])
    dx, _ = backward_batch(net, cache, dq.reshape(1, -1), want_params=False)
    return float(value), dx.reshape(net.input_shape)


def input_gradient(net, obs, loss):
    """dLoss/dPixel for every pixel, as an (H, W) array."""
    return loss_and_input_gradient(net, obs, loss)[1]


# -- model files -----------------------------------------------------------

def _fmt(x):
    return "%.17g" % x


def dumps_model(net):
    """Text model document; every real is written with 17 significant digits."""
    lines = [
        "{",
        f'  "version": {MODEL_FORMAT_VERSION},',
        f'  "input_height": {net.input_height},',
        f'  "input_width": {net.input_width},',
        f'  "action_count": {net.action_count},',
        '  "layers": [',
    ]
    for k, layer in enumerate(net.layers):
        rows, cols = layer.weights.shape
        weights = ", ".join(_fmt(v) for v in layer.weights.ravel())
        bias = ", ".join(_fmt(v) for v in layer.bias)
        lines += [
            "    {",
            f'      "rows": {rows},',
            f'      "cols": {cols},',
            f'      "activation": "{layer.activation}",',
            f'      "weights": [{weights}],',
            f'      "bias": [{bias}]',
            "    }" + ("," if k < len(net.layers) - 1 else ""),
        ]
    lines += ["  ]", "}", ""]
    return "\n".join(lines)


def loads_model(text):
    doc = json.loads(text)
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    layers = []
    for spec in doc["layers"]:
        w = np.array(spec["weights"], dtype=np.float64)
        if w.size != spec["rows"] * spec["cols"]:
            raise ShapeError("weight list length does not match rows*cols")
        layers.append(DenseLayer(w.reshape(spec["rows"], spec["cols"]), spec["bias"], spec["activation"]))
    net = QNetwork(doc["input_height"], doc["input_width"], layers)
    if net.action_count != doc["action_count"]:
        raise ShapeError("action_count does not match final layer")
    return net


def save_model(net, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(net))


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read())
