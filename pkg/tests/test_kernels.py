import numpy as np
import pytest

from advpolicy import kernels, nn

import oracles


def test_fallback_always_available():
    assert "python" in kernels.BACKENDS
    assert kernels.backend() in kernels.BACKENDS


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_occlusion_sweep_reproduces_forward_bitwise(backend, rng):
    for hidden in [(), (9,), (7, 5)]:
        net = oracles.random_net(rng, 5, 6, hidden=hidden, actions=3)
        obs = rng.uniform(size=(5, 6))
        obs[1, 2] = 0.0
        q = nn.occlusion_q_values(net, obs)
        for i in range(5):
            for j in range(6):
                z = obs.copy()
                z[i, j] = 0.0
                assert q[i * 6 + j].tobytes() == nn.forward(net, z).tobytes()


def test_backends_agree(rng):
    net = oracles.random_net(rng, 8, 7, hidden=(16, 8), actions=4)
    obs = rng.uniform(size=(8, 7))
    field = rng.normal(size=(6, 10))
    results = {}
    for name in kernels.BACKENDS:
        with kernels.use_backend(name):
            results[name] = (nn.forward(net, obs), nn.occlusion_q_values(net, obs), kernels.dft2_direct(field))
    ref = results["python"]
    for got in results.values():
        for a, b in zip(got, ref):
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_direct_dft_matches_naive(backend, rng):
    for shape in [(1, 1), (1, 5), (3, 4), (7, 6)]:
        field = rng.normal(size=shape)
        np.testing.assert_allclose(kernels.dft2_direct(field), oracles.naive_dft2(field), rtol=0, atol=1e-10)
