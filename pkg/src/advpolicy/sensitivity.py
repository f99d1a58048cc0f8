"""Occlusion sensitivity maps KMAP and HMAP, with sparsity and entropy summaries.

Both maps zero one pixel at a time. KMAP records the drop in Q(s, .) caused by
acting greedily for the occluded state; HMAP records the cross-entropy between
the softmax policies at s and at the occluded state. Per-state maps are
averaged over the supplied states.
"""

from dataclasses import dataclass

import numpy as np

from .nn import check_observation, forward, log_softmax, occlusion_q_values


@dataclass
class SensitivityMap:
    kind: str  # "K" or "H"
    values: np.ndarray
    states_aggregated: int
    temperature: float = 1.0


def zero_pixel(s, i, j):
    s = np.asarray(s, dtype=np.float64)
    if not (0 <= i < s.shape[0] and 0 <= j < s.shape[1]):
        raise IndexError(f"pixel ({i}, {j}) outside {s.shape}")
    out = s.copy()
    out[i, j] = 0.0
    return out


def _states(net, states):
    states = [check_observation(net, s) for s in states]
    if not states:
        raise ValueError("need at least one state")
    return states


def kmap(net, states):
    states = _states(net, states)
    total = np.zeros(net.input_height * net.input_width)
    for s in states:
        q = forward(net, s)
        occluded = occlusion_q_values(net, s)
        # np.argmax picks the first maximum, the same tie-break as argmax_action
        a_aug = np.argmax(occluded, axis=1)
        total += q.max() - q[a_aug]
    return SensitivityMap("K", (total / len(states)).reshape(net.input_shape), len(states))


def hmap(net, states, temperature=1.0):
    states = _states(net, states)
    total = np.zeros(net.input_height * net.input_width)
    for s in states:
        p = np.exp(log_softmax(forward(net, s), temperature))
        log_p_aug = log_softmax(occlusion_q_values(net, s), temperature)
        total += -(log_p_aug @ p)
    return SensitivityMap("H", (total / len(states)).reshape(net.input_shape), len(states), temperature)


def sparsity(m):
    """l1 / l2 norm ratio; 1 for a one-hot map, sqrt(cells) for a uniform one."""
    v = np.abs(np.asarray(getattr(m, "values", m), dtype=np.float64)).ravel()
    l2 = np.sqrt(np.sum(v * v))
    if l2 == 0:
        raise ValueError("sparsity of an all-zero map is undefined")
    return float(v.sum() / l2)


def entropy(m):
    """Shannon entropy (nats) of the softmax over all map cells."""
    v = np.asarray(getattr(m, "values", m), dtype=np.float64).ravel()
    logp = log_softmax(v)
    return float(max(-np.sum(np.exp(logp) * logp), 0.0))
