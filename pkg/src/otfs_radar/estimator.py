"""Scikit-learn style front end for the detect-and-refine pipeline.

fit() takes the known transmit frame, transform() maps received frames to
correlation maps, and predict() returns refined target estimates.  The
class follows the BaseEstimator parameter conventions so it clones and
composes with the usual scikit-learn tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .core import check_dd_frame
from .correlate import correlate
from .detect import CfarConfig, detect_targets
from .exceptions import DimensionMismatch
from .refine import refine_detections


class OtfsRadarEstimator(BaseEstimator):
    """CFAR detection plus fractional refinement against a fixed reference frame.

    Parameters
    ----------
    p_fa : float
        Design per-cell false-alarm probability.
    guard_cells, training_cells : int
        CFAR window geometry per side of the cell under test.
    num_targets : int or None
        When set, skip CFAR and refine the strongest num_targets peaks.
    """

    def __init__(self, p_fa=1e-3, guard_cells=2, training_cells=4, num_targets=None):
        self.p_fa = p_fa
        self.guard_cells = guard_cells
        self.training_cells = training_cells
        self.num_targets = num_targets

    def fit(self, X, y=None):
        """Store the transmit reference frame (one complex N x M array)."""
        self.reference_ = check_dd_frame(X)
        self.n_doppler_, self.m_delay_ = self.reference_.shape
        return self

    def _check_fitted(self):
        if not hasattr(self, "reference_"):
            raise RuntimeError("call fit with the transmit frame first")

    def _frames(self, Y) -> np.ndarray:
        arr = np.asarray(Y)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3 or arr.shape[1:] != self.reference_.shape:
            raise DimensionMismatch(
                f"expected frames of shape {self.reference_.shape}, got {arr.shape}"
            )
        return arr

    def transform(self, Y) -> np.ndarray:
        """Correlation maps for one frame or a stack of frames."""
        self._check_fitted()
        frames = self._frames(Y)
        maps = np.stack([correlate(f, self.reference_) for f in frames])
        return maps if np.asarray(Y).ndim == 3 else maps[0]

    def predict(self, Y):
        """Refined estimates per frame; a bare 2-d frame returns a bare list."""
        self._check_fitted()
        frames = self._frames(Y)
        cfar = CfarConfig(
            p_fa=self.p_fa,
            guard_cells=self.guard_cells,
            training_cells=self.training_cells,
        )
        out = []
        for f in frames:
            v = correlate(f, self.reference_)
            if self.num_targets is not None:
                out.append(refine_detections(v, num_targets=self.num_targets))
                continue
            dets = detect_targets(v, cfar)
            out.append(refine_detections(v, dets) if dets.count else [])
        return out if np.asarray(Y).ndim == 3 else out[0]
