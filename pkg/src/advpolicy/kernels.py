"""Backend selection for the hot kernels.

The compiled Cython extension is used when it was built; otherwise the numpy
fallback is imported. ``use_backend`` switches explicitly (tests, benchmarks).
"""

from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

_active = "cython" if _compiled is not None else "python"


def backend():
    """Name of the active backend, ``"cython"`` or ``"python"``."""
    return _active


def set_backend(name):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    _active = name


@contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def forward(weights, biases, relu_flags, x, height, width):
    return BACKENDS[_active].forward(weights, biases, relu_flags, x, height, width)


def occlusion_q(weights, biases, relu_flags, x, height, width):
    return BACKENDS[_active].occlusion_q(weights, biases, relu_flags, x, height, width)


def dft2_direct(field):
    return BACKENDS[_active].dft2_direct(field)
