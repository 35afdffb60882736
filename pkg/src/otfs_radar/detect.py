"""Cell-averaging CFAR detection on the correlation map.

The detector compares |V|^2 in each cell against a threshold scaled from
the mean power of a surrounding training ring.  For an exponential
background the scale alpha = Ns (Pfa^(-1/Ns) - 1) holds the per-cell
false-alarm probability at Pfa independent of the noise level.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from .exceptions import DimensionMismatch, InvalidProbability, WindowTooLarge


@dataclass(frozen=True)
class CfarConfig:
    """Square-ring CFAR window and design false-alarm probability.

    guard_cells and training_cells count cells per side beyond the cell
    under test, so the training ring holds
    (2(T+G)+1)^2 - (2G+1)^2 cells.
    """

    p_fa: float
    guard_cells: int = 2
    training_cells: int = 4

    def __post_init__(self):
        if not (0.0 < self.p_fa < 1.0):
            raise InvalidProbability(f"p_fa must be in (0, 1), got {self.p_fa}")
        if self.guard_cells < 0 or self.training_cells < 1:
            raise ValueError("need guard_cells >= 0 and training_cells >= 1")

    @property
    def window_halfwidth(self) -> int:
        return self.guard_cells + self.training_cells

    @property
    def n_training(self) -> int:
        outer = 2 * self.window_halfwidth + 1
        inner = 2 * self.guard_cells + 1
        return outer * outer - inner * inner


def cfar_alpha(n_training: int, p_fa: float) -> float:
    """Threshold multiplier Ns (Pfa^(-1/Ns) - 1) for an exponential background."""
    if not (0.0 < p_fa < 1.0):
        raise InvalidProbability(f"p_fa must be in (0, 1), got {p_fa}")
    if n_training < 1:
        raise ValueError("n_training must be positive")
    return n_training * (p_fa ** (-1.0 / n_training) - 1.0)


def _power_map(v) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 2:
        raise DimensionMismatch("expected a 2-d map")
    return np.abs(arr).astype(np.float64) ** 2


def _circular_box_sum(p: np.ndarray, half: int) -> np.ndarray:
    # separable moving sum with wraparound; plain rolled adds keep sums of
    # exact zeros exactly zero, which FFT convolution would not
    out = p.copy()
    for d in range(1, half + 1):
        out += np.roll(p, d, axis=0)
        out += np.roll(p, -d, axis=0)
    total = out.copy()
    for d in range(1, half + 1):
        total += np.roll(out, d, axis=1)
        total += np.roll(out, -d, axis=1)
    return total


def cfar_threshold_map(v, config: CfarConfig) -> np.ndarray:
    """Per-cell threshold alpha * mean(|V|^2 over the training ring).

    The ring wraps circularly at the map edges.  Accepts the complex
    correlation map; power is taken internally.
    """
    p = _power_map(v)
    n, m = p.shape
    w = config.window_halfwidth
    if 2 * w + 1 > min(n, m):
        raise WindowTooLarge(
            f"window span {2 * w + 1} exceeds map extent {min(n, m)}"
        )
    outer = _circular_box_sum(p, w)
    inner = _circular_box_sum(p, config.guard_cells)
    ring_mean = (outer - inner) / config.n_training
    return cfar_alpha(config.n_training, config.p_fa) * ring_mean


@dataclass(frozen=True)
class Detection:
    """One map cell that beat its CFAR threshold and survived consolidation."""

    k_int: int
    l_int: int
    statistic: float
    threshold: float


@dataclass(frozen=True)
class DetectionList:
    detections: tuple[Detection, ...] = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.detections)

    def __iter__(self):
        return iter(self.detections)

    def __len__(self):
        return len(self.detections)

    def bins(self) -> list[tuple[int, int]]:
        return [(d.k_int, d.l_int) for d in self.detections]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("k_int,l_int,statistic,threshold\n")
            for d in self.detections:
                fh.write(
                    f"{d.k_int},{d.l_int},{d.statistic:.9g},{d.threshold:.9g}\n"
                )


def detect_targets(v, config: CfarConfig) -> DetectionList:
    """CFAR scan of the correlation map with single-peak consolidation.

    A cell is reported when its power exceeds the CFAR threshold and is
    the maximum of its (2G+1) x (2G+1) neighborhood, so one physical
    target straddling bins yields one detection.  Cells are scanned in
    row-major order, which fixes the output ordering.
    """
    p = _power_map(v)
    thr = cfar_threshold_map(v, config)
    size = 2 * config.guard_cells + 1
    if size > 1:
        local_max = p >= maximum_filter(p, size=size, mode="wrap")
    else:
        local_max = np.ones_like(p, dtype=bool)
    mask = (p > thr) & local_max
    n, m = p.shape
    half = config.guard_cells
    kept = []
    dets = []
    for k, l in np.argwhere(mask):
        k = int(k)
        l = int(l)
        # exact power ties (a target at a half-integer offset straddles two
        # bins with equal magnitude) both survive the local-max test; keep
        # only the first in row-major order within the consolidation window
        tied = False
        for kk, ll in kept:
            dk = abs(k - kk)
            dl = abs(l - ll)
            if min(dk, n - dk) <= half and min(dl, m - dl) <= half:
                tied = True
                break
        if tied:
            continue
        kept.append((k, l))
        dets.append(
            Detection(k_int=k, l_int=l, statistic=float(p[k, l]), threshold=float(thr[k, l]))
        )
    return DetectionList(detections=tuple(dets))


def estimate_gain(v, k: int, l: int) -> complex:
    """Complex amplitude estimate at a detected cell, V[k, l]/(NM).

    The correlation conjugates the channel, so the returned value carries
    the conjugate phase of the underlying gain times the delay-Doppler
    coupling phase.
    """
    arr = np.asarray(v)
    return complex(arr[k, l] / arr.size)
