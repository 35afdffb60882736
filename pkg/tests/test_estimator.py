"""Tests for the scikit-learn style estimator front end."""

import numpy as np
import pytest
from sklearn.base import clone

from otfs_radar.channel import apply_channel, build_effective_channel, add_noise
from otfs_radar.core import FrameGrid, Target, generate_one_pilot_frame
from otfs_radar.correlate import correlate
from otfs_radar.estimator import OtfsRadarEstimator
from otfs_radar.exceptions import DimensionMismatch

GRID = FrameGrid(32, 32)


def _received(targets, snr_db=20.0, seed=5):
    x = generate_one_pilot_frame(GRID)
    y = apply_channel(x, build_effective_channel(targets, GRID))
    return x, add_noise(y, snr_db, seed)


def test_params_round_trip_and_clone():
    est = OtfsRadarEstimator(p_fa=1e-5, guard_cells=3, training_cells=5, num_targets=2)
    params = est.get_params()
    assert params == {
        "p_fa": 1e-5,
        "guard_cells": 3,
        "training_cells": 5,
        "num_targets": 2,
    }
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(p_fa=1e-3)
    assert est.get_params()["p_fa"] == 1e-3


def test_predict_before_fit_raises():
    est = OtfsRadarEstimator()
    with pytest.raises(RuntimeError):
        est.predict(np.zeros((4, 4), dtype=complex))
    with pytest.raises(RuntimeError):
        est.transform(np.zeros((4, 4), dtype=complex))


def test_transform_matches_correlate():
    t = Target(gain=1.0 + 0j, delay_index=9.0, doppler_index=3.0)
    x, y = _received((t,))
    est = OtfsRadarEstimator().fit(x)
    v = est.transform(y)
    assert v.shape == GRID.shape
    assert np.allclose(v, correlate(y, x))
    stacked = est.transform(np.stack([y, y]))
    assert stacked.shape == (2,) + GRID.shape
    assert np.allclose(stacked[0], stacked[1])


def test_predict_recovers_single_target():
    t = Target(gain=1.0 + 0j, delay_index=9.4, doppler_index=-3.3)
    x, y = _received((t,), snr_db=15.0)
    est = OtfsRadarEstimator(p_fa=1e-6).fit(x)
    ests = est.predict(y)
    assert len(ests) == 1
    assert ests[0].doppler_index == pytest.approx(-3.3, abs=0.05)
    assert ests[0].delay_index == pytest.approx(9.4, abs=0.05)


def test_predict_num_targets_path():
    targets = (
        Target(gain=1.0 + 0j, delay_index=9.0, doppler_index=3.0),
        Target(gain=0.8 + 0j, delay_index=20.3, doppler_index=-6.2),
    )
    x, y = _received(targets, snr_db=20.0)
    est = OtfsRadarEstimator(num_targets=2).fit(x)
    ests = est.predict(y)
    assert len(ests) == 2
    bins = {(e.k_int, e.l_int) for e in ests}
    assert (3, 9) in bins


def test_predict_stack_returns_per_frame_lists():
    t = Target(gain=1.0 + 0j, delay_index=9.0, doppler_index=3.0)
    x, y = _received((t,), snr_db=15.0)
    est = OtfsRadarEstimator(p_fa=1e-6).fit(x)
    out = est.predict(np.stack([y, y]))
    assert isinstance(out, list) and len(out) == 2
    assert [(e.k_int, e.l_int) for e in out[0]] == [(e.k_int, e.l_int) for e in out[1]]


def test_shape_mismatch_rejected():
    x = generate_one_pilot_frame(GRID)
    est = OtfsRadarEstimator().fit(x)
    with pytest.raises(DimensionMismatch):
        est.transform(np.zeros((16, 16), dtype=complex))
