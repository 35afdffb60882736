"""Symplectic transforms between the delay-Doppler and time-frequency planes.

Both directions use the unitary 1/sqrt(NM) normalization, so the pair is
an exact inverse and frame energy is preserved.  Doppler pairs with time
through an inverse DFT and delay pairs with frequency through a forward
DFT, which is the mixed-sign structure that distinguishes the symplectic
transform from a plain 2-d FFT.
"""

import numpy as np

from .core import FrameGrid, check_dd_frame
from .exceptions import FractionalTargetUnsupported


def isfft(x_dd) -> np.ndarray:
    """Delay-Doppler to time-frequency: rows become slots, columns subcarriers."""
    x_dd = check_dd_frame(x_dd)
    return np.fft.fft(np.fft.ifft(x_dd, axis=0, norm="ortho"), axis=1, norm="ortho")


def sfft(x_tf) -> np.ndarray:
    """Time-frequency back to delay-Doppler; exact inverse of isfft."""
    x_tf = check_dd_frame(x_tf)
    return np.fft.fft(np.fft.ifft(x_tf, axis=1, norm="ortho"), axis=0, norm="ortho")


def tf_channel_crosscheck(x_dd, targets, grid: FrameGrid) -> np.ndarray:
    """Apply an integer-bin channel by phase ramps in the time-frequency plane.

    A circular shift by (k0, l0) on the delay-Doppler grid is a phase ramp
    exp(2j pi (n k0 / N - m l0 / M)) in the time-frequency plane, so for
    integer targets this route must land on the same received frame as the
    delay-Doppler convolution.  Raises FractionalTargetUnsupported when any
    target sits off the integer grid, where no pure-shift equivalent exists.
    """
    x_dd = check_dd_frame(x_dd, grid)
    n, m = grid.shape
    for t in targets:
        t.validate(grid)
        if t.delay_index != int(t.delay_index) or t.doppler_index != int(t.doppler_index):
            raise FractionalTargetUnsupported(
                f"target at ({t.doppler_index}, {t.delay_index}) is fractional"
            )
    x_tf = isfft(x_dd)
    y_tf = np.zeros_like(x_tf)
    slots = np.arange(n).reshape(-1, 1)
    subcarriers = np.arange(m).reshape(1, -1)
    for t in targets:
        k0 = int(t.doppler_index)
        l0 = int(t.delay_index)
        coupling = np.exp(-2j * np.pi * t.doppler_index * t.delay_index / grid.size)
        ramp = np.exp(2j * np.pi * (slots * k0 / n - subcarriers * l0 / m))
        y_tf += t.gain * coupling * x_tf * ramp
    return sfft(y_tf)
