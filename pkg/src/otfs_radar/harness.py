"""Monte Carlo harness: scenario sampling, trials, matching, and metrics.

An experiment sweeps SNR points, runs independent trials at each point,
matches refined estimates against the ground truth on the circular index
grid, and aggregates detection, false-alarm, and error metrics into one
CSV row per SNR point.  Everything derives from a single root seed:
scenario draws, transmit frames, and noise all use per-trial seed
sequences, so a rerun with the same config is byte-identical regardless
of worker count.  Scenario and frame draws depend only on the trial
index, which pairs the sweep across SNR points.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .baseline import baseline_trial
from .channel import add_noise, apply_channel, build_effective_channel
from .core import (
    FrameGrid,
    PilotStrategy,
    Scenario,
    Target,
    split_index,
    wrap_delta,
)
from .correlate import correlate, transmit_frame
from .crlb import scenario_crlb
from .detect import CfarConfig, DetectionList, detect_targets
from .exceptions import RetryExhausted, SingularFisher
from .refine import FractionalEstimate, refine_detections

MAX_TARGET_RANGE_M = 3830.0
MAX_TARGET_SPEED_MPS = 440.0 / 3.6
DISTINCT_DRAW_LIMIT = 1000


class ScenarioMode(str, Enum):
    """How target positions are drawn."""

    DISTINCT_ROWS = "distinct_rows"
    RANDOM = "random"


class BaselineKind(str, Enum):
    NONE = "none"
    OFDM_PERIODOGRAM = "ofdm_periodogram"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment; every field has a desk-scale default."""

    grid: FrameGrid = field(default_factory=lambda: FrameGrid(32, 32))
    target_count: int = 4
    snr_sweep_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    trials_per_point: int = 200
    cfar: CfarConfig = field(default_factory=lambda: CfarConfig(p_fa=1e-3))
    pilot_strategy: PilotStrategy = PilotStrategy.FULL
    scenario_mode: ScenarioMode = ScenarioMode.DISTINCT_ROWS
    baseline: BaselineKind = BaselineKind.NONE
    rng_seed: int = 0
    workers: int = 1
    crlb_trials: int = 200
    match_gate_cells: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "snr_sweep_db", tuple(float(s) for s in self.snr_sweep_db))
        if self.target_count < 0:
            raise ValueError("target_count must be >= 0")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if not self.snr_sweep_db:
            raise ValueError("snr_sweep_db must not be empty")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.scenario_mode == ScenarioMode.DISTINCT_ROWS and self.target_count > min(
            self.grid.n_doppler, self.grid.m_delay - 1
        ):
            raise ValueError("too many targets for distinct integer bins")


def _delay_cap(grid: FrameGrid) -> float:
    # largest admissible delay index: grid limit or the range cap
    tau_max = 2.0 * MAX_TARGET_RANGE_M / 299_792_458.0
    cap = tau_max / grid.delay_resolution
    return min(grid.m_delay - 1.0, cap)


def _doppler_cap(grid: FrameGrid) -> float:
    nu_max = 2.0 * grid.carrier_freq * MAX_TARGET_SPEED_MPS / 299_792_458.0
    cap = nu_max / grid.doppler_resolution
    return min(grid.n_doppler / 2.0, cap)


def sample_scenario(config: ExperimentConfig, trial: int, snr_db: float | None = None) -> Scenario:
    """Draw one scene.  Deterministic in (config.rng_seed, trial) only.

    Gains are unit magnitude with uniform phase.  Under DISTINCT_ROWS the
    draw repeats until every pair of targets lands on distinct integer
    delay bins and distinct integer Doppler bins; after 1000 failures
    RetryExhausted is raised.
    """
    grid = config.grid
    p = config.target_count
    rng = np.random.default_rng(np.random.SeedSequence((config.rng_seed, 1, trial)))
    l_hi = _delay_cap(grid)
    k_hi = _doppler_cap(grid)
    for _ in range(DISTINCT_DRAW_LIMIT):
        delays = rng.uniform(0.0, l_hi, size=p)
        dopplers = rng.uniform(-k_hi, k_hi, size=p)
        if config.scenario_mode == ScenarioMode.RANDOM or p <= 1:
            break
        l_bins = [split_index(d)[0] for d in delays]
        k_bins = [split_index(d)[0] % grid.n_doppler for d in dopplers]
        if len(set(l_bins)) == p and len(set(k_bins)) == p:
            break
    else:
        raise RetryExhausted(f"no admissible draw in {DISTINCT_DRAW_LIMIT} tries")
    phases = rng.uniform(0.0, 2.0 * np.pi, size=p)
    targets = tuple(
        Target(gain=np.exp(1j * ph), delay_index=float(d), doppler_index=float(v))
        for ph, d, v in zip(phases, delays, dopplers)
    )
    seed = int(np.random.SeedSequence((config.rng_seed, 2, trial)).generate_state(1)[0])
    return Scenario(
        grid=grid,
        targets=targets,
        snr_db=config.snr_sweep_db[0] if snr_db is None else snr_db,
        rng_seed=seed,
        pilot_strategy=config.pilot_strategy,
    )


@dataclass(frozen=True)
class TrialRecord:
    """Everything one trial produced, for matching and aggregation."""

    trial: int
    scenario: Scenario
    detections: DetectionList
    estimates: tuple[FractionalEstimate, ...]
    correlation_map: np.ndarray | None = None


def run_trial(scenario: Scenario, config: ExperimentConfig, keep_map: bool = False) -> TrialRecord:
    """One synthesize/detect/refine pass for a scenario."""
    x = transmit_frame(scenario)
    chan = build_effective_channel(scenario.targets, scenario.grid)
    y = add_noise(
        apply_channel(x, chan),
        scenario.snr_db,
        np.random.SeedSequence((scenario.rng_seed, 1)),
    )
    v = correlate(y, x)
    detections = detect_targets(v, config.cfar)
    estimates = (
        tuple(refine_detections(v, detections)) if detections.count else tuple()
    )
    return TrialRecord(
        trial=-1,
        scenario=scenario,
        detections=detections,
        estimates=estimates,
        correlation_map=v if keep_map else None,
    )


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int, float], ...]  # (estimate index, truth index, distance)
    unmatched_truths: tuple[int, ...]
    unmatched_estimates: tuple[int, ...]


def match_targets(estimates, truths, grid: FrameGrid, gate_cells: float = 1.5) -> MatchResult:
    """Greedy one-to-one matching on circular index distance.

    All candidate pairs are sorted by Euclidean distance over the wrapped
    (Doppler, delay) offsets; pairs beyond the gate never match.  Ties
    break on (distance, estimate index, truth index) so the outcome is
    deterministic.
    """
    n, m = grid.shape
    candidates = []
    for i, e in enumerate(estimates):
        for j, t in enumerate(truths):
            dk = float(wrap_delta(e.doppler_index - t.doppler_index, n))
            dl = float(wrap_delta(e.delay_index - t.delay_index, m))
            dist = math.hypot(dk, dl)
            if dist <= gate_cells:
                candidates.append((dist, i, j))
    candidates.sort()
    used_e: set[int] = set()
    used_t: set[int] = set()
    pairs = []
    for dist, i, j in candidates:
        if i in used_e or j in used_t:
            continue
        used_e.add(i)
        used_t.add(j)
        pairs.append((i, j, dist))
    unmatched_t = tuple(j for j in range(len(truths)) if j not in used_t)
    unmatched_e = tuple(i for i in range(len(estimates)) if i not in used_e)
    return MatchResult(
        pairs=tuple(pairs), unmatched_truths=unmatched_t, unmatched_estimates=unmatched_e
    )


@dataclass(frozen=True)
class MetricsRow:
    """One aggregated sweep point; the CSV column order follows the fields."""

    snr_db: float
    detection_rate: float
    false_alarm_rate: float
    rmse_range_m: float
    rmse_velocity_mps: float
    nmse_kappa: float
    nmse_iota: float
    crlb_kappa: float
    crlb_iota: float

    CSV_HEADER = (
        "snr_db,detection_rate,false_alarm_rate,rmse_range_m,rmse_velocity_mps,"
        "nmse_kappa,nmse_iota,crlb_kappa,crlb_iota"
    )

    def csv_line(self) -> str:
        vals = (
            self.snr_db,
            self.detection_rate,
            self.false_alarm_rate,
            self.rmse_range_m,
            self.rmse_velocity_mps,
            self.nmse_kappa,
            self.nmse_iota,
            self.crlb_kappa,
            self.crlb_iota,
        )
        return ",".join(f"{v:.9g}" for v in vals)


def _matched_errors(records, config: ExperimentConfig):
    """Pooled per-pair circular errors and truth fractions across records."""
    grid = config.grid
    n, m = grid.shape
    dk_err, dl_err, kappa_true, iota_true = [], [], [], []
    matched = 0
    truths_total = 0
    false_alarms = 0
    for rec in records:
        truths = rec.scenario.targets
        truths_total += len(truths)
        res = match_targets(rec.estimates, truths, grid, config.match_gate_cells)
        matched += len(res.pairs)
        false_alarms += len(res.unmatched_estimates)
        for i, j, _ in res.pairs:
            e, t = rec.estimates[i], truths[j]
            dk_err.append(float(wrap_delta(e.doppler_index - t.doppler_index, n)))
            dl_err.append(float(wrap_delta(e.delay_index - t.delay_index, m)))
            kappa_true.append(t.doppler_split(grid)[1])
            iota_true.append(t.delay_split()[1])
    return (
        np.array(dk_err),
        np.array(dl_err),
        np.array(kappa_true),
        np.array(iota_true),
        matched,
        truths_total,
        false_alarms,
    )


def compute_metrics(records, config: ExperimentConfig, snr_db: float,
                    crlb_kappa: float = math.nan, crlb_iota: float = math.nan) -> MetricsRow:
    """Aggregate one SNR point.  Empty match sets yield NaN errors, not zeros."""
    grid = config.grid
    dk, dl, k_true, i_true, matched, truths_total, fas = _matched_errors(records, config)
    cells = grid.size * len(records)
    det_rate = matched / truths_total if truths_total else math.nan
    far = fas / cells if cells else math.nan
    if matched:
        rmse_range = float(np.sqrt(np.mean(dl**2))) * grid.range_per_bin
        rmse_vel = float(np.sqrt(np.mean(dk**2))) * grid.velocity_per_bin
        k_norm = float(np.sum(k_true**2))
        i_norm = float(np.sum(i_true**2))
        nmse_k = float(np.sum(dk**2)) / k_norm if k_norm > 0 else math.nan
        nmse_i = float(np.sum(dl**2)) / i_norm if i_norm > 0 else math.nan
    else:
        rmse_range = rmse_vel = nmse_k = nmse_i = math.nan
    return MetricsRow(
        snr_db=snr_db,
        detection_rate=det_rate,
        false_alarm_rate=far,
        rmse_range_m=rmse_range,
        rmse_velocity_mps=rmse_vel,
        nmse_kappa=nmse_k,
        nmse_iota=nmse_i,
        crlb_kappa=crlb_kappa,
        crlb_iota=crlb_iota,
    )


def _trial_task(args):
    config, trial, snr_db = args
    try:
        scenario = sample_scenario(config, trial, snr_db)
        rec = run_trial(scenario, config)
        return trial, replace(rec, trial=trial), None
    except Exception as exc:  # noqa: BLE001 - failures are reported, not fatal
        return trial, None, f"{type(exc).__name__}: {exc}"


def run_snr_point(config: ExperimentConfig, snr_db: float):
    """All trials at one SNR point; returns (records, failure strings)."""
    tasks = [(config, t, snr_db) for t in range(config.trials_per_point)]
    if config.workers == 1:
        results = [_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=16))
    results.sort(key=lambda r: r[0])
    records = [rec for _, rec, err in results if err is None]
    failures = [f"trial {t} at {snr_db} dB: {err}" for t, _, err in results if err is not None]
    return records, failures


@dataclass(frozen=True)
class PooledCrlb:
    """Scenario-pooled bound summaries at one SNR point."""

    kappa_bound: float
    iota_bound: float
    mean_kappa_crlb: float
    mean_iota_crlb: float
    scenes_used: int


def pooled_crlb(config: ExperimentConfig, snr_db: float) -> PooledCrlb:
    """Scenario-averaged bounds at one SNR.

    Sums the per-scenario bound numerators and fraction norms over the
    first crlb_trials scenarios (the bound is deterministic per scene, so
    a subsample is enough), skipping scenes whose Fisher matrix is
    singular.  The normalized bounds divide pooled numerators by pooled
    norms, matching how the harness pools NMSE.
    """
    n_scenes = min(config.crlb_trials, config.trials_per_point)
    k_num = i_num = k_den = i_den = 0.0
    used = 0
    targets_used = 0
    for trial in range(n_scenes):
        scenario = sample_scenario(config, trial, snr_db)
        if not scenario.targets:
            continue
        x = transmit_frame(scenario)
        try:
            p = len(scenario.targets)
            report = scenario_crlb(x, scenario.targets, config.grid, snr_db)
        except (SingularFisher, ValueError):
            continue
        k_num += float(np.sum(report.per_param[:p]))
        i_num += float(np.sum(report.per_param[p:]))
        k_den += sum(t.doppler_split(config.grid)[1] ** 2 for t in scenario.targets)
        i_den += sum(t.delay_split()[1] ** 2 for t in scenario.targets)
        used += 1
        targets_used += p
    if used == 0 or targets_used == 0:
        return PooledCrlb(math.nan, math.nan, math.nan, math.nan, 0)
    return PooledCrlb(
        kappa_bound=k_num / k_den if k_den > 0 else math.nan,
        iota_bound=i_num / i_den if i_den > 0 else math.nan,
        mean_kappa_crlb=k_num / targets_used,
        mean_iota_crlb=i_num / targets_used,
        scenes_used=used,
    )


def pooled_physical_bounds(config: ExperimentConfig, snr_db: float):
    """CRLB sweep row: normalized bounds plus physical-unit variances."""
    pooled = pooled_crlb(config, snr_db)
    grid = config.grid
    return (
        snr_db,
        pooled.kappa_bound,
        pooled.iota_bound,
        pooled.mean_iota_crlb * grid.range_per_bin**2,
        pooled.mean_kappa_crlb * grid.velocity_per_bin**2,
    )


def run_experiment(config: ExperimentConfig, out_dir=None, with_crlb: bool = True):
    """Full SNR sweep.  Returns (rows, failures); optionally writes CSVs.

    With out_dir set, writes metrics.csv plus manifest.txt echoing the
    config, seed, and any per-trial failures.  Output is byte-identical
    across reruns and worker counts.
    """
    rows = []
    all_failures = []
    for snr_db in config.snr_sweep_db:
        records, failures = run_snr_point(config, snr_db)
        all_failures.extend(failures)
        if with_crlb:
            pooled = pooled_crlb(config, snr_db)
            ck, ci = pooled.kappa_bound, pooled.iota_bound
        else:
            ck = ci = math.nan
        rows.append(compute_metrics(records, config, snr_db, ck, ci))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8") as fh:
            fh.write(MetricsRow.CSV_HEADER + "\n")
            for row in rows:
                fh.write(row.csv_line() + "\n")
        write_manifest(config, os.path.join(out_dir, "manifest.txt"), all_failures)
    return rows, all_failures


@dataclass(frozen=True)
class RocRow:
    p_fa: float
    detection_rate: float
    false_alarm_rate: float
    baseline_detection_rate: float
    baseline_false_alarm_rate: float

    CSV_HEADER = (
        "p_fa,detection_rate,false_alarm_rate,"
        "baseline_detection_rate,baseline_false_alarm_rate"
    )

    def csv_line(self) -> str:
        vals = (
            self.p_fa,
            self.detection_rate,
            self.false_alarm_rate,
            self.baseline_detection_rate,
            self.baseline_false_alarm_rate,
        )
        return ",".join(f"{v:.9g}" for v in vals)


def _roc_task(args):
    config, trial, snr_db, p_fa_values = args
    scenario = sample_scenario(config, trial, snr_db)
    grid = config.grid
    x = transmit_frame(scenario)
    chan = build_effective_channel(scenario.targets, grid)
    y = add_noise(apply_channel(x, chan), snr_db, np.random.SeedSequence((scenario.rng_seed, 1)))
    v = correlate(y, x)
    counts = []
    for p_fa in p_fa_values:
        cfar = replace(config.cfar, p_fa=p_fa)
        dets = detect_targets(v, cfar)
        ests = refine_detections(v, dets) if dets.count else []
        res = match_targets(ests, scenario.targets, grid, config.match_gate_cells)
        counts.append((len(res.pairs), len(res.unmatched_estimates)))
        if config.baseline == BaselineKind.OFDM_PERIODOGRAM:
            _, b_ests = baseline_trial(scenario, cfar)
            b_res = match_targets(b_ests, scenario.targets, grid, config.match_gate_cells)
            counts[-1] = counts[-1] + (len(b_res.pairs), len(b_res.unmatched_estimates))
    return trial, counts


def roc_sweep(config: ExperimentConfig, snr_db: float, p_fa_values) -> list[RocRow]:
    """Reuse each trial's maps across the whole P_fa sweep.

    Sharing the maps makes the detection rate structurally non-decreasing
    in P_fa instead of only statistically so.
    """
    p_fa_values = tuple(float(p) for p in p_fa_values)
    tasks = [(config, t, snr_db, p_fa_values) for t in range(config.trials_per_point)]
    if config.workers == 1:
        results = [_roc_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_roc_task, tasks, chunksize=4))
    results.sort(key=lambda r: r[0])
    truths_total = config.target_count * config.trials_per_point
    cells = config.grid.size * config.trials_per_point
    rows = []
    for idx, p_fa in enumerate(p_fa_values):
        matched = sum(res[1][idx][0] for res in results)
        fas = sum(res[1][idx][1] for res in results)
        if config.baseline == BaselineKind.OFDM_PERIODOGRAM:
            b_matched = sum(res[1][idx][2] for res in results)
            b_fas = sum(res[1][idx][3] for res in results)
            b_rate = b_matched / truths_total if truths_total else math.nan
            b_far = b_fas / cells
        else:
            b_rate = b_far = math.nan
        rows.append(
            RocRow(
                p_fa=p_fa,
                detection_rate=matched / truths_total if truths_total else math.nan,
                false_alarm_rate=fas / cells,
                baseline_detection_rate=b_rate,
                baseline_false_alarm_rate=b_far,
            )
        )
    return rows


def config_to_pairs(config: ExperimentConfig) -> list[tuple[str, str]]:
    """Flatten the config to the key=value vocabulary of the config file."""
    grid = config.grid
    return [
        ("n_doppler", str(grid.n_doppler)),
        ("m_delay", str(grid.m_delay)),
        ("subcarrier_spacing", f"{grid.subcarrier_spacing:.9g}"),
        ("slot_duration", f"{grid.slot_duration:.9g}"),
        ("carrier_freq", f"{grid.carrier_freq:.9g}"),
        ("target_count", str(config.target_count)),
        ("snr_sweep_db", ",".join(f"{s:.9g}" for s in config.snr_sweep_db)),
        ("trials_per_point", str(config.trials_per_point)),
        ("p_fa", f"{config.cfar.p_fa:.9g}"),
        ("guard_cells", str(config.cfar.guard_cells)),
        ("training_cells", str(config.cfar.training_cells)),
        ("pilot_strategy", config.pilot_strategy.value),
        ("scenario_mode", config.scenario_mode.value),
        ("baseline", config.baseline.value),
        ("rng_seed", str(config.rng_seed)),
        ("workers", str(config.workers)),
        ("crlb_trials", str(config.crlb_trials)),
        ("match_gate_cells", f"{config.match_gate_cells:.9g}"),
    ]


def write_manifest(config: ExperimentConfig, path, failures=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# experiment manifest\n")
        for key, val in config_to_pairs(config):
            fh.write(f"{key} = {val}\n")
        fh.write(f"failed_trials = {len(failures)}\n")
        for line in failures:
            fh.write(f"# failure: {line}\n")
