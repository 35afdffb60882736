"""Flat key=value experiment configuration files.

One assignment per line, # starts a comment, blank lines ignored.  Keys
mirror ExperimentConfig; unknown keys are rejected so typos fail loudly.
"""

from .core import FrameGrid, PilotStrategy
from .detect import CfarConfig
from .harness import BaselineKind, ExperimentConfig, ScenarioMode

_KNOWN_KEYS = {
    "n_doppler",
    "m_delay",
    "subcarrier_spacing",
    "slot_duration",
    "carrier_freq",
    "target_count",
    "snr_sweep_db",
    "trials_per_point",
    "p_fa",
    "guard_cells",
    "training_cells",
    "pilot_strategy",
    "scenario_mode",
    "baseline",
    "rng_seed",
    "workers",
    "crlb_trials",
    "match_gate_cells",
}


def read_config_file(path) -> dict[str, str]:
    """Parse a key=value file into a string dict."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.rstrip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _KNOWN_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val
    return values


def build_config(file_values: dict[str, str] | None = None, **overrides) -> ExperimentConfig:
    """Assemble an ExperimentConfig from file values plus keyword overrides.

    Overrides win over the file; both win over defaults.  Keyword names
    match the file keys.
    """
    merged: dict[str, str] = dict(file_values or {})
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in _KNOWN_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = str(val)

    defaults = ExperimentConfig()

    def get_int(key, fallback):
        return int(merged[key]) if key in merged else fallback

    def get_float(key, fallback):
        return float(merged[key]) if key in merged else fallback

    grid = FrameGrid(
        n_doppler=get_int("n_doppler", defaults.grid.n_doppler),
        m_delay=get_int("m_delay", defaults.grid.m_delay),
        subcarrier_spacing=get_float("subcarrier_spacing", defaults.grid.subcarrier_spacing),
        slot_duration=get_float("slot_duration", None) if "slot_duration" in merged else None,
        carrier_freq=get_float("carrier_freq", defaults.grid.carrier_freq),
    )
    if "snr_sweep_db" in merged:
        sweep = tuple(float(s) for s in merged["snr_sweep_db"].split(",") if s.strip())
    else:
        sweep = defaults.snr_sweep_db
    cfar = CfarConfig(
        p_fa=get_float("p_fa", defaults.cfar.p_fa),
        guard_cells=get_int("guard_cells", defaults.cfar.guard_cells),
        training_cells=get_int("training_cells", defaults.cfar.training_cells),
    )
    return ExperimentConfig(
        grid=grid,
        target_count=get_int("target_count", defaults.target_count),
        snr_sweep_db=sweep,
        trials_per_point=get_int("trials_per_point", defaults.trials_per_point),
        cfar=cfar,
        pilot_strategy=PilotStrategy(merged.get("pilot_strategy", defaults.pilot_strategy.value)),
        scenario_mode=ScenarioMode(merged.get("scenario_mode", defaults.scenario_mode.value)),
        baseline=BaselineKind(merged.get("baseline", defaults.baseline.value)),
        rng_seed=get_int("rng_seed", defaults.rng_seed),
        workers=get_int("workers", defaults.workers),
        crlb_trials=get_int("crlb_trials", defaults.crlb_trials),
        match_gate_cells=get_float("match_gate_cells", defaults.match_gate_cells),
    )
