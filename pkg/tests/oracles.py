"""Independent reference computations used by the test-suite.

Nothing here calls the package's kernels: each oracle recomputes its quantity
from the definition with plain Python loops or brute force.
"""

import cmath
import math

import numpy as np

from advpolicy import env as grid
from advpolicy.nn import DenseLayer, QNetwork


def random_net(rng, h, w, hidden=(8,), actions=4, scale=1.0):
    sizes = [h * w, *hidden, actions]
    layers = []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        act = "identity" if k == len(sizes) - 2 else "relu"
        layers.append(DenseLayer(scale * rng.normal(size=(n_out, n_in)) / math.sqrt(n_in),
                                 0.1 * rng.normal(size=n_out), act))
    return QNetwork(h, w, layers)


def linear_policy(w_rows, bias, h, w):
    """Single identity layer Q = W flatten(s) + b."""
    return QNetwork(h, w, [DenseLayer(np.asarray(w_rows, dtype=np.float64), bias, "identity")])


def naive_forward(net, obs):
    a = [float(v) for v in np.asarray(obs).ravel()]
    for layer in net.layers:
        out = []
        for r in range(layer.weights.shape[0]):
            acc = float(layer.bias[r])
            for c in range(layer.weights.shape[1]):
                acc += float(layer.weights[r, c]) * a[c]
            if layer.activation == "relu":
                acc = max(acc, 0.0)
            out.append(acc)
        a = out
    return np.array(a)


def relu_pattern(net, obs):
    a = np.asarray(obs, dtype=np.float64).ravel()
    pattern = []
    for layer in net.layers:
        z = layer.weights @ a + layer.bias
        if layer.activation == "relu":
            pattern.append(z > 0)
            a = np.maximum(z, 0)
        else:
            a = z
    return np.concatenate(pattern) if pattern else np.zeros(0, bool)


def finite_difference_gradient(loss_fn, net, obs, step=1e-5):
    """Central differences of loss_fn(obs); also returns a mask of pixels whose
    stencil does not cross a ReLU kink (only there is the loss smooth)."""
    obs = np.asarray(obs, dtype=np.float64)
    grad = np.zeros_like(obs)
    smooth = np.ones(obs.shape, dtype=bool)
    for idx in np.ndindex(obs.shape):
        plus, minus = obs.copy(), obs.copy()
        plus[idx] += step
        minus[idx] -= step
        grad[idx] = (loss_fn(plus) - loss_fn(minus)) / (2 * step)
        smooth[idx] = np.array_equal(relu_pattern(net, plus), relu_pattern(net, minus))
    return grad, smooth


def cross_entropy_loss(net, target, temperature=1.0):
    def f(x):
        q = naive_forward(net, x) / temperature
        m = max(q)
        return -(q[target] - m - math.log(sum(math.exp(v - m) for v in q)))
    return f


def naive_dft2(field):
    x = np.asarray(field, dtype=np.float64)
    H, W = x.shape
    out = np.zeros((H, W), dtype=complex)
    for u in range(H):
        for v in range(W):
            acc = 0j
            for m in range(H):
                for n in range(W):
                    acc += x[m, n] * cmath.exp(-2j * math.pi * (u * m / H + v * n / W))
            out[u, v] = acc
    return out


def centered(f):
    """Move frequency (0, 0) to (H // 2, W // 2) by explicit index arithmetic."""
    H, W = f.shape
    out = np.empty_like(f)
    for u in range(H):
        for v in range(W):
            out[(u + H // 2) % H, (v + W // 2) % W] = f[u, v]
    return out


def naive_kmap(net, states, forward):
    """Per-pixel from-scratch recomputation: every occluded copy goes through ``forward``."""
    h, w = net.input_shape
    total = np.zeros((h, w))
    for s in states:
        q = forward(net, s)
        a_star = int(np.argmax(q))
        for i in range(h):
            for j in range(w):
                z = np.array(s, dtype=np.float64)
                z[i, j] = 0.0
                a_aug = int(np.argmax(forward(net, z)))
                total[i, j] += q[a_star] - q[a_aug]
    return total / len(states)


def _softmax(q, t):
    z = [v / t for v in q]
    m = max(z)
    e = [math.exp(v - m) for v in z]
    s = sum(e)
    return [v / s for v in e]


def naive_hmap(net, states, temperature, forward):
    h, w = net.input_shape
    total = np.zeros((h, w))
    for s in states:
        p = _softmax(forward(net, s), temperature)
        for i in range(h):
            for j in range(w):
                z = np.array(s, dtype=np.float64)
                z[i, j] = 0.0
                p_aug = _softmax(forward(net, z), temperature)
                total[i, j] += -sum(pa * math.log(pb) for pa, pb in zip(p, p_aug))
    return total / len(states)


def policy_entropy(q, temperature):
    p = _softmax(q, temperature)
    return -sum(v * math.log(v) for v in p if v > 0)


def value_iteration(spec, discounted=True, sweeps=1000):
    """Optimal value of every free cell by exhaustive Bellman backups (no time limit)."""
    g = spec.gamma if discounted else 1.0
    cells = grid.free_cells(spec)
    v = {c: 0.0 for c in cells}
    for _ in range(sweeps):
        new = {}
        for c in cells:
            if c == spec.goal:
                new[c] = 0.0
                continue
            best = -math.inf
            for a in range(4):
                n = grid.next_cell(spec, c, a)
                r = spec.goal_reward if n == spec.goal else spec.step_penalty
                best = max(best, r + (0.0 if n == spec.goal else g * v[n]))
            new[c] = best
        if new == v:
            break
        v = new
    return v


def shortest_path_net(spec):
    """Hand-built network acting on the BFS shortest path.

    One hidden unit per non-goal reachable cell fires only when the agent (intensity
    1.0) covers that cell; it votes for that cell's shortest-path action.
    """
    policy = grid.shortest_path_actions(spec)
    p = spec.cell_pixels
    h, w = spec.observation_shape
    cells = sorted(policy)
    w1 = np.zeros((len(cells), h * w))
    b1 = np.full(len(cells), -0.9 * p * p)
    w2 = np.zeros((4, len(cells)))
    for k, (r, c) in enumerate(cells):
        for i in range(r * p, (r + 1) * p):
            for j in range(c * p, (c + 1) * p):
                w1[k, i * w + j] = 1.0
        w2[policy[(r, c)], k] = 1.0
    return QNetwork(h, w, [DenseLayer(w1, b1, "relu"), DenseLayer(w2, np.zeros(4), "identity")])
