"""Effective delay-Doppler channel and its action on a transmit frame.

A point target with fractional delay/Doppler does not hit a single grid
cell; it smears over the grid through the separable Dirichlet sampling
kernel.  The received frame is the two-dimensional circular convolution
of the transmit frame with that effective channel, plus white noise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import FrameGrid, Target, check_dd_frame, dirichlet_f, dirichlet_g


@dataclass(frozen=True)
class EffectiveChannel:
    """Sampled channel response on the grid plus the targets that built it."""

    grid: FrameGrid
    h_omega: np.ndarray
    targets: tuple[Target, ...]


def build_effective_channel(targets, grid: FrameGrid) -> EffectiveChannel:
    """Superpose the sampling kernel of every target on the N x M grid.

    Each target contributes gain * g(k - k_nu) * f(l - l_tau) times the
    delay-Doppler coupling phase exp(-2j pi k_nu l_tau / (N M)).  The
    kernels are periodic, so wrapping is automatic.
    """
    n, m = grid.shape
    h = np.zeros((n, m), dtype=np.complex128)
    for t in targets:
        t.validate(grid)
        g = dirichlet_g(np.arange(n) - t.doppler_index, n)
        f = dirichlet_f(np.arange(m) - t.delay_index, m)
        phase = np.exp(-2j * np.pi * t.doppler_index * t.delay_index / grid.size)
        h += t.gain * phase * np.outer(g, f)
    return EffectiveChannel(grid=grid, h_omega=h, targets=tuple(targets))


def apply_channel(x, channel: EffectiveChannel, method: str = "fft") -> np.ndarray:
    """Noiseless received frame: 2-d circular convolution of x with h_omega.

    method="fft" multiplies spectra; method="direct" evaluates the literal
    double sum and is O((NM)^2), kept as a cross-check for small grids.
    """
    x = check_dd_frame(x, channel.grid)
    h = channel.h_omega
    if method == "fft":
        return np.fft.ifft2(np.fft.fft2(x) * np.fft.fft2(h))
    if method == "direct":
        n, m = x.shape
        y = np.empty_like(x)
        rows = np.arange(n)
        cols = np.arange(m)
        for k in range(n):
            for l in range(m):
                shifted = h[np.ix_((k - rows) % n, (l - cols) % m)]
                y[k, l] = np.sum(x * shifted)
        return y
    raise ValueError(f"unknown method {method!r}")


def noise_variance(snr_db: float) -> float:
    """Per-cell complex noise variance for unit-power symbols, 10^(-snr/10)."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


def add_noise(y, snr_db: float, seed) -> np.ndarray:
    """Add circularly symmetric white Gaussian noise at the given SNR.

    snr_db=inf is the noiseless sentinel and returns the input unchanged
    (as a copy).  The draw is deterministic for a fixed seed, and for a
    fixed seed the underlying unit-variance draw is shared across SNR
    levels, which pairs sweeps run at different noise powers.
    """
    y = np.asarray(y, dtype=np.complex128)
    sigma2 = noise_variance(snr_db)
    if sigma2 == 0.0:
        return y.copy()
    rng = np.random.default_rng(seed)
    unit = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    return y + math.sqrt(sigma2 / 2.0) * unit


def simulate_received_frame(x, targets, grid: FrameGrid, snr_db: float, seed) -> np.ndarray:
    """Convenience path: build the channel, convolve, and add noise."""
    chan = build_effective_channel(targets, grid)
    return add_noise(apply_channel(x, chan), snr_db, seed)
