"""Delay-Doppler frame geometry, transmit frames, and sampling kernels.

Frames live on an N x M grid: axis 0 is the Doppler dimension (N bins),
axis 1 is the delay dimension (M bins).  Doppler bins are stored in
[0, N-1] with the upper half aliasing to negative frequencies, the usual
FFT layout.  Target Doppler indices are kept in the signed convention
[-N/2, N/2) so that approaching and receding targets keep their sign.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatch, TargetOutOfRange

C_LIGHT = 299_792_458.0

_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128) / math.sqrt(2.0)


class PilotStrategy(str, Enum):
    """Transmit frame layout used for sensing."""

    FULL = "full_pilot"
    ONE = "one_pilot"


@dataclass(frozen=True)
class FrameGrid:
    """Geometry of one OTFS frame.

    Parameters
    ----------
    n_doppler : int
        Number of Doppler bins (time slots per frame).
    m_delay : int
        Number of delay bins (subcarriers).
    subcarrier_spacing : float
        Subcarrier spacing in Hz.
    slot_duration : float, optional
        Slot duration in seconds.  Defaults to 1/subcarrier_spacing, the
        critically sampled case assumed throughout.
    carrier_freq : float
        Carrier frequency in Hz, used only for unit conversion.
    """

    n_doppler: int
    m_delay: int
    subcarrier_spacing: float = 39_063.0
    slot_duration: float | None = None
    carrier_freq: float = 24e9

    def __post_init__(self):
        if self.n_doppler < 2 or self.m_delay < 2:
            raise ValueError("grid needs at least 2 bins per axis")
        if self.subcarrier_spacing <= 0 or self.carrier_freq <= 0:
            raise ValueError("subcarrier_spacing and carrier_freq must be positive")
        if self.slot_duration is None:
            object.__setattr__(self, "slot_duration", 1.0 / self.subcarrier_spacing)
        if self.slot_duration <= 0:
            raise ValueError("slot_duration must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_doppler, self.m_delay)

    @property
    def size(self) -> int:
        return self.n_doppler * self.m_delay

    @property
    def delay_resolution(self) -> float:
        """Delay per bin in seconds, 1/(M df)."""
        return 1.0 / (self.m_delay * self.subcarrier_spacing)

    @property
    def doppler_resolution(self) -> float:
        """Doppler per bin in Hz, 1/(N T)."""
        return 1.0 / (self.n_doppler * self.slot_duration)

    @property
    def range_per_bin(self) -> float:
        """Two-way range per delay bin in meters."""
        return C_LIGHT * self.delay_resolution / 2.0

    @property
    def velocity_per_bin(self) -> float:
        """Radial velocity per Doppler bin in m/s."""
        return C_LIGHT * self.doppler_resolution / (2.0 * self.carrier_freq)

    @property
    def unambiguous_range(self) -> float:
        """Largest unaliased two-way range in meters, c/(2 df)."""
        return C_LIGHT / (2.0 * self.subcarrier_spacing)

    @property
    def max_unambiguous_speed(self) -> float:
        """Largest unaliased radial speed in m/s, c/(4 fc T)."""
        return C_LIGHT / (4.0 * self.carrier_freq * self.slot_duration)


def split_index(x: float) -> tuple[int, float]:
    """Split a real bin index into (nearest integer bin, fraction in [-0.5, 0.5))."""
    i = math.floor(x + 0.5)
    return i, x - i


def signed_doppler(k: int, n: int) -> int:
    """Map a storage Doppler bin in [0, N-1] to the signed convention."""
    return k if k < n / 2 else k - n


def wrap_doppler_index(value: float, n: int) -> float:
    """Wrap any real Doppler index into the signed span [-N/2, N/2)."""
    return (value + n / 2) % n - n / 2


def wrap_delta(delta, period):
    """Wrap index differences onto the circle, into [-period/2, period/2)."""
    return (np.asarray(delta) + period / 2) % period - period / 2


@dataclass(frozen=True)
class Target:
    """One point scatterer on the delay-Doppler grid.

    delay_index must lie in [0, M-1); doppler_index is signed, in
    [-N/2, N/2).  Both may be fractional.
    """

    gain: complex
    delay_index: float
    doppler_index: float

    def validate(self, grid: FrameGrid) -> None:
        if not (0.0 <= self.delay_index < grid.m_delay - 1):
            raise TargetOutOfRange(
                f"delay_index {self.delay_index} outside [0, {grid.m_delay - 1})"
            )
        half = grid.n_doppler / 2
        if not (-half <= self.doppler_index < half):
            raise TargetOutOfRange(
                f"doppler_index {self.doppler_index} outside [{-half}, {half})"
            )

    def delay_split(self) -> tuple[int, float]:
        return split_index(self.delay_index)

    def doppler_split(self, grid: FrameGrid) -> tuple[int, float]:
        """Nearest storage bin in [0, N-1] and the fractional remainder."""
        i, frac = split_index(self.doppler_index)
        return i % grid.n_doppler, frac

    def range_m(self, grid: FrameGrid) -> float:
        return self.delay_index * grid.range_per_bin

    def velocity_mps(self, grid: FrameGrid) -> float:
        return self.doppler_index * grid.velocity_per_bin


@dataclass(frozen=True)
class Scenario:
    """A sensing scene: grid, targets, noise level, and randomness."""

    grid: FrameGrid
    targets: tuple[Target, ...]
    snr_db: float
    rng_seed: int
    pilot_strategy: PilotStrategy = PilotStrategy.FULL

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        for t in self.targets:
            t.validate(self.grid)


def check_dd_frame(x, grid: FrameGrid | None = None) -> np.ndarray:
    """Validate a delay-Doppler frame and return it as a complex array."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d frame, got ndim={arr.ndim}")
    if grid is not None and arr.shape != grid.shape:
        raise DimensionMismatch(f"frame shape {arr.shape} != grid shape {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("frame contains non-finite entries")
    return np.ascontiguousarray(arr, dtype=np.complex128)


def generate_qpsk_frame(grid: FrameGrid, seed) -> np.ndarray:
    """Uniform random unit-magnitude QPSK frame; total energy is exactly N*M."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, 4, size=grid.shape)
    return _QPSK[idx]


def generate_one_pilot_frame(grid: FrameGrid) -> np.ndarray:
    """Single pilot of amplitude sqrt(N*M) at bin (0, 0); same frame energy as QPSK."""
    x = np.zeros(grid.shape, dtype=np.complex128)
    x[0, 0] = math.sqrt(grid.size)
    return x


def _reduce_period(x: np.ndarray, period: int) -> np.ndarray:
    # same value modulo the period, brought near zero so the closed form
    # stays numerically stable at every multiple of the period
    return x - period * np.round(x / period)


def dirichlet_g(x, n: int):
    """Doppler-axis sampling kernel.

    Normalized sum over k' of exp(-2j pi x k'/n) / n, evaluated in the
    closed Dirichlet form.  Periodic in x with period n; equals 1 at
    multiples of n and 0 at all other integers.

    Parameters
    ----------
    x : float or ndarray
        Doppler bin offset, may be fractional.
    n : int
        Number of Doppler bins.
    """
    arr = _reduce_period(np.asarray(x, dtype=np.float64), n)
    num = np.sin(np.pi * arr)
    den = n * np.sin(np.pi * arr / n)
    # integer offsets are exact: 1 at multiples of n, 0 elsewhere
    integral = arr == np.round(arr)
    peak = arr == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(integral, np.where(peak, 1.0, 0.0),
                         num / np.where(integral, 1.0, den))
    out = np.exp(-1j * np.pi * arr * (n - 1) / n) * ratio
    if out.ndim == 0:
        return complex(out)
    return out


def dirichlet_f(y, m: int):
    """Delay-axis sampling kernel; mirror of dirichlet_g with the opposite
    exponent sign, so the phase winds the other way."""
    arr = _reduce_period(np.asarray(y, dtype=np.float64), m)
    num = np.sin(np.pi * arr)
    den = m * np.sin(np.pi * arr / m)
    integral = arr == np.round(arr)
    peak = arr == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(integral, np.where(peak, 1.0, 0.0),
                         num / np.where(integral, 1.0, den))
    out = np.exp(1j * np.pi * arr * (m - 1) / m) * ratio
    if out.ndim == 0:
        return complex(out)
    return out


def sampling_omega(dk, dl, grid: FrameGrid):
    """Separable two-dimensional sampling kernel g(dk) * f(dl)."""
    return dirichlet_g(dk, grid.n_doppler) * dirichlet_f(dl, grid.m_delay)


def dirichlet_g_deriv(x, n: int):
    """Derivative of dirichlet_g with respect to its argument.

    Evaluated through the defining sum, which is free of removable
    singularities: sum over k' of (-2j pi k'/n) exp(-2j pi x k'/n) / n.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    k = np.arange(n)
    weights = (-2j * np.pi * k / n) / n
    out = np.exp(-2j * np.pi * np.outer(arr, k) / n) @ weights
    if np.ndim(x) == 0:
        return complex(out[0])
    return out.reshape(np.shape(x))


def dirichlet_f_deriv(y, m: int):
    """Derivative of dirichlet_f with respect to its argument."""
    arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
    l = np.arange(m)
    weights = (2j * np.pi * l / m) / m
    out = np.exp(2j * np.pi * np.outer(arr, l) / m) @ weights
    if np.ndim(y) == 0:
        return complex(out[0])
    return out.reshape(np.shape(y))
