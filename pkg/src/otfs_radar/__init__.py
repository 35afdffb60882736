"""OTFS delay-Doppler radar sensing toolkit.

Simulates OTFS frames through fractional delay-Doppler channels, detects
targets with cell-averaging CFAR on the 2-d circular correlation map,
refines detections to fractional bin offsets, and evaluates estimation
bounds, with a Monte Carlo harness and CLI on top.
"""

__version__ = "0.1.0"

from .channel import (
    EffectiveChannel,
    add_noise,
    apply_channel,
    build_effective_channel,
    noise_variance,
    simulate_received_frame,
)
from .core import (
    C_LIGHT,
    FrameGrid,
    PilotStrategy,
    Scenario,
    Target,
    check_dd_frame,
    dirichlet_f,
    dirichlet_g,
    generate_one_pilot_frame,
    generate_qpsk_frame,
    sampling_omega,
    signed_doppler,
    split_index,
    wrap_delta,
    wrap_doppler_index,
)
from .correlate import CorrelationMeanReport, correlate, correlation_mean_check
from .crlb import (
    CRLBReport,
    crlb_bounds,
    fisher_matrix,
    mean_frame_jacobian,
    noiseless_mean_frame,
    scenario_crlb,
)
from .detect import (
    CfarConfig,
    Detection,
    DetectionList,
    cfar_alpha,
    cfar_threshold_map,
    detect_targets,
    estimate_gain,
)
from .estimator import OtfsRadarEstimator
from .harness import (
    BaselineKind,
    ExperimentConfig,
    MetricsRow,
    ScenarioMode,
    TrialRecord,
    compute_metrics,
    match_targets,
    pooled_crlb,
    roc_sweep,
    run_experiment,
    run_snr_point,
    run_trial,
    sample_scenario,
)
from .modem import isfft, sfft, tf_channel_crosscheck
from .refine import (
    FractionalEstimate,
    estimate_iota,
    estimate_kappa,
    pick_neighbor,
    refine_detections,
)

__all__ = [name for name in dir() if not name.startswith("_")]
