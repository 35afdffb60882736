"""Tests for the delay-Doppler channel: kernel build, convolution, noise."""

import numpy as np
import pytest

from otfs_radar.channel import (
    add_noise,
    apply_channel,
    build_effective_channel,
    noise_variance,
    simulate_received_frame,
)
from otfs_radar.core import FrameGrid, Target, generate_qpsk_frame
from otfs_radar.exceptions import DimensionMismatch


def test_channel_zero_targets_is_zero():
    grid = FrameGrid(16, 16)
    chan = build_effective_channel((), grid)
    assert np.all(chan.h_omega == 0)


def test_channel_integer_target_single_entry():
    """One integer target puts all its energy in one cell, with the
    delay-Doppler coupling phase attached."""
    grid = FrameGrid(32, 32)
    t = Target(gain=0.8 - 0.3j, delay_index=5.0, doppler_index=2.0)
    chan = build_effective_channel((t,), grid)
    h = chan.h_omega
    assert np.count_nonzero(h) == 1
    expected = t.gain * np.exp(-2j * np.pi * (2.0 * 5.0) / grid.size)
    assert h[2, 5] == pytest.approx(expected, abs=1e-15)


def test_channel_negative_doppler_storage_row():
    grid = FrameGrid(32, 32)
    t = Target(gain=1.0 + 0j, delay_index=3.0, doppler_index=-4.0)
    h = build_effective_channel((t,), grid).h_omega
    assert abs(h[28, 3]) == pytest.approx(1.0, abs=1e-12)
    # the coupling phase keeps the signed Doppler, not the storage bin
    assert h[28, 3] == pytest.approx(np.exp(-2j * np.pi * (-4.0 * 3.0) / grid.size))


def test_channel_energy_is_gain_energy():
    """Kernel separability makes the channel energy equal sum |h_i|^2."""
    grid = FrameGrid(32, 32)
    rng = np.random.default_rng(2)
    targets = tuple(
        Target(gain=complex(g), delay_index=float(d), doppler_index=float(v))
        for g, d, v in zip(rng.standard_normal(3) + 1j * rng.standard_normal(3),
                           rng.uniform(0, 31.0, 3), rng.uniform(-15.5, 15.0, 3))
    )
    single = [build_effective_channel((t,), grid).h_omega for t in targets]
    for t, h in zip(targets, single):
        assert np.sum(np.abs(h) ** 2) == pytest.approx(abs(t.gain) ** 2, rel=1e-12)


def test_apply_channel_identity_target():
    grid = FrameGrid(16, 16)
    x = generate_qpsk_frame(grid, seed=5)
    ident = Target(gain=1.0 + 0j, delay_index=0.0, doppler_index=0.0)
    chan = build_effective_channel((ident,), grid)
    y = apply_channel(x, chan)
    np.testing.assert_allclose(y, x, atol=1e-12)


def test_apply_channel_integer_shift():
    """An integer target circularly shifts the frame and applies the phase."""
    grid = FrameGrid(16, 16)
    x = generate_qpsk_frame(grid, seed=6)
    t = Target(gain=1.0 + 0j, delay_index=3.0, doppler_index=5.0)
    y = apply_channel(x, build_effective_channel((t,), grid))
    expected = np.roll(x, (5, 3), axis=(0, 1)) * np.exp(-2j * np.pi * 15.0 / grid.size)
    np.testing.assert_allclose(y, expected, atol=1e-12)


def test_apply_channel_fft_equals_direct():
    grid = FrameGrid(16, 16)
    rng = np.random.default_rng(31)
    for _ in range(10):
        targets = tuple(
            Target(gain=complex(a, b), delay_index=d, doppler_index=v)
            for a, b, d, v in zip(rng.standard_normal(3), rng.standard_normal(3),
                                  rng.uniform(0, 15.0, 3), rng.uniform(-7.5, 7.0, 3))
        )
        chan = build_effective_channel(targets, grid)
        x = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        y_fft = apply_channel(x, chan, method="fft")
        y_dir = apply_channel(x, chan, method="direct")
        err = np.linalg.norm(y_fft - y_dir) / np.linalg.norm(y_dir)
        assert err < 1e-12


def test_apply_channel_shape_mismatch():
    grid = FrameGrid(16, 16)
    chan = build_effective_channel((), grid)
    with pytest.raises(DimensionMismatch):
        apply_channel(np.zeros((8, 8), dtype=complex), chan)


def test_noise_variance_values():
    assert noise_variance(0.0) == pytest.approx(1.0)
    assert noise_variance(10.0) == pytest.approx(0.1)
    assert noise_variance(-10.0) == pytest.approx(10.0)
    assert noise_variance(np.inf) == 0.0


def test_add_noise_statistics():
    rng_seed = 42
    y = np.zeros((64, 64), dtype=complex)
    out = add_noise(y, snr_db=0.0, seed=rng_seed)
    # complex variance sigma^2 = 1, split evenly between quadratures
    assert np.var(out.real) == pytest.approx(0.5, rel=0.05)
    assert np.var(out.imag) == pytest.approx(0.5, rel=0.05)
    assert np.mean(out) == pytest.approx(0.0, abs=0.02)


def test_add_noise_seeded_and_snr_paired():
    """The same seed draws the same unit noise, scaled by the SNR."""
    y = np.ones((8, 8), dtype=complex)
    a = add_noise(y, 10.0, seed=9)
    b = add_noise(y, 10.0, seed=9)
    c = add_noise(y, 20.0, seed=9)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose((a - y) / np.sqrt(10), (c - y), atol=1e-15)


def test_add_noise_infinite_snr_is_identity():
    y = np.ones((4, 4), dtype=complex) * (2 + 1j)
    out = add_noise(y, np.inf, seed=1)
    np.testing.assert_array_equal(out, y)


def test_simulate_received_frame_matches_manual():
    grid = FrameGrid(16, 16)
    t = Target(gain=1.0 + 0j, delay_index=2.5, doppler_index=-1.25)
    x = generate_qpsk_frame(grid, seed=(77, 0))
    y = simulate_received_frame(x, (t,), grid, 15.0, seed=(77, 1))
    manual = add_noise(apply_channel(x, build_effective_channel((t,), grid)),
                       15.0, seed=(77, 1))
    np.testing.assert_allclose(y, manual, atol=1e-12)
