"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Shapes follow the default environment: 40x40 observations, one hidden layer of 64.
"""

import argparse
import timeit

import numpy as np

from advpolicy import fourier, kernels, nn


def cases(rng):
    net = nn.init_network(40, 40, (64,), 4, rng)
    obs = rng.uniform(size=(40, 40))
    eta = rng.uniform(-1, 1, size=(40, 40))
    odd = rng.uniform(-1, 1, size=(42, 42))
    return {
        "forward 40x40": lambda: nn.forward(net, obs),
        "occlusion sweep 40x40": lambda: nn.occlusion_q_values(net, obs),
        "dft2 direct 40x40": lambda: fourier.dft2(eta, fast=False),
        "dft2 direct 42x42": lambda: fourier.dft2(odd, fast=False),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    names = sorted(kernels.BACKENDS)
    print("backends:", ", ".join(names))
    print(f"{'kernel':<24}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases(rng).items():
        times = {}
        for name in names:
            with kernels.use_backend(name):
                number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
                best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            times[name] = best * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<24}" + "".join(f"{times[n]:>16.3f}" for n in names) + f"{speed:>9.2f}x")


if __name__ == "__main__":
    main()
