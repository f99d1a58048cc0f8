"""Centered 2D power spectra of perturbations and their energy-by-frequency profile.

The profile bins every Fourier coefficient by the Chebyshev radius
max(|f_y|, |f_x|) of its centered integer frequency pair, so bin f collects
the square ring at distance f from the zero-frequency term.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass
class Spectrum:
    coefficients: np.ndarray  # complex (H, W), zero frequency at (H // 2, W // 2)

    @property
    def height(self):
        return self.coefficients.shape[0]

    @property
    def width(self):
        return self.coefficients.shape[1]

    @property
    def power(self):
        return np.abs(self.coefficients) ** 2


@dataclass
class SpectrumProfile:
    energies: np.ndarray
    sample_count: int = 1

    @property
    def f_max(self):
        return len(self.energies) - 1


def _is_pow2(n):
    return n & (n - 1) == 0


def dft2(field, fast=True):
    """Unnormalized forward DFT, center-shifted.

    The direct summation kernel is the reference. With ``fast`` and both sides
    powers of two, numpy's FFT is used instead.
    """
    x = np.asarray(field, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise ValueError(f"need a non-empty 2D field, got shape {x.shape}")
    if fast and _is_pow2(x.shape[0]) and _is_pow2(x.shape[1]):
        f = np.fft.fft2(x)
    else:
        f = kernels.dft2_direct(x)
    return Spectrum(np.fft.fftshift(f))


def centered_frequencies(n):
    return np.arange(n) - n // 2


def chebyshev_bins(height, width):
    fy = np.abs(centered_frequencies(height))[:, None]
    fx = np.abs(centered_frequencies(width))[None, :]
    return np.maximum(fy, fx)


def energy_by_max_frequency(spectrum):
    bins = chebyshev_bins(spectrum.height, spectrum.width)
    f_max = max(spectrum.height // 2, spectrum.width // 2)
    energies = np.bincount(bins.ravel(), weights=spectrum.power.ravel(), minlength=f_max + 1)
    return SpectrumProfile(energies, 1)


def average_profiles(profiles):
    """Elementwise mean of profiles, each counted once, reduced in input order."""
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to average")
    n = len(profiles[0].energies)
    total = np.zeros(n)
    for p in profiles:
        if len(p.energies) != n:
            raise ValueError("profiles have different frequency ranges")
        total = total + p.energies
    return SpectrumProfile(total / len(profiles), sum(p.sample_count for p in profiles))


def spectral_centroid(profile):
    e = np.asarray(profile.energies, dtype=np.float64)
    total = e.sum()
    if not total > 0:
        raise ValueError("spectral centroid of an all-zero profile")
    return float(np.arange(len(e)) @ e / total)


def log_power(spectrum):
    return np.log1p(spectrum.power)
