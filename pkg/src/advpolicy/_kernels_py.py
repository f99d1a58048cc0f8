"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and contracts. ``occlusion_q`` calls ``forward`` once per
occluded copy, so it agrees with ``forward`` exactly by construction.
"""

import numpy as np


def forward(weights, biases, relu_flags, x, height, width):
    a = np.asarray(x, dtype=np.float64).ravel()
    for w, b, relu in zip(weights, biases, relu_flags):
        a = w @ a + b
        if relu:
            a = np.maximum(a, 0.0)
    return a


def occlusion_q(weights, biases, relu_flags, x, height, width):
    flat = np.array(x, dtype=np.float64).ravel()
    out = np.empty((flat.size, weights[-1].shape[0]))
    for p in range(flat.size):
        saved = flat[p]
        flat[p] = 0.0
        out[p] = forward(weights, biases, relu_flags, flat, height, width)
        flat[p] = saved
    return out


def _dft_matrix(n):
    k = np.arange(n)
    # reduce the phase index mod n before scaling to keep the angles exact
    return np.exp(-2j * np.pi * (np.outer(k, k) % n) / n)


def dft2_direct(field):
    x = np.asarray(field, dtype=np.float64)
    return _dft_matrix(x.shape[0]) @ x @ _dft_matrix(x.shape[1]).T
