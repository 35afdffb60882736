"""Command line front end.

Subcommands: simulate (SNR sweep to metrics.csv), detect and estimate
(single-trial CSV dumps), crlb (bound sweep), roc (P_fa sweep), heatmap
(|V| dump).  Global flags --config, --seed, --out-dir, --workers apply to
every subcommand; flags override config-file values.
"""

import argparse
import os

from . import __version__
from .config import build_config, read_config_file
from .correlate import correlation_map_to_csv
from .crlb import crlb_sweep_csv
from .harness import (
    ExperimentConfig,
    RocRow,
    pooled_physical_bounds,
    roc_sweep,
    run_experiment,
    run_trial,
    sample_scenario,
    write_manifest,
)
from .refine import estimates_to_csv


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="root RNG seed (overrides config)")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--workers", type=int, help="parallel worker processes")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otfs-radar",
        description="Delay-Doppler radar sensing simulation and estimation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the SNR sweep and write metrics.csv")
    p_sim.add_argument(
        "--full-scale",
        action="store_true",
        help="use the large 64x128 grid with 10000 trials per point",
    )
    p_sim.add_argument("--trials", type=int, help="trials per SNR point")

    p_det = sub.add_parser("detect", help="one trial, write detections.csv")
    p_det.add_argument("--trial", type=int, default=0)
    p_det.add_argument("--snr-db", type=float)

    p_est = sub.add_parser("estimate", help="one trial, write estimates.csv")
    p_est.add_argument("--trial", type=int, default=0)
    p_est.add_argument("--snr-db", type=float)

    sub.add_parser("crlb", help="bound sweep over SNR, write crlb.csv")

    p_roc = sub.add_parser("roc", help="P_fa sweep at fixed SNR, write roc.csv")
    p_roc.add_argument("--snr-db", type=float, default=10.0)
    p_roc.add_argument(
        "--p-fa-values",
        default="1e-4,3e-4,1e-3,3e-3,1e-2,3e-2,1e-1",
        help="comma separated P_fa sweep",
    )

    p_map = sub.add_parser("heatmap", help="one trial, write |V| as heatmap.csv")
    p_map.add_argument("--trial", type=int, default=0)
    p_map.add_argument("--snr-db", type=float)

    for p in (p_sim, p_det, p_est, p_roc, p_map, sub.choices["crlb"]):
        _add_common(p)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    file_values = read_config_file(args.config) if args.config else None
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if getattr(args, "trials", None) is not None:
        overrides["trials_per_point"] = args.trials
    if getattr(args, "full_scale", False):
        overrides.setdefault("n_doppler", 64)
        overrides.setdefault("m_delay", 128)
        overrides.setdefault("trials_per_point", 10_000)
    return build_config(file_values, **overrides)


def _single_trial(config: ExperimentConfig, args, keep_map: bool = False):
    snr = args.snr_db if args.snr_db is not None else config.snr_sweep_db[0]
    scenario = sample_scenario(config, args.trial, snr)
    return scenario, run_trial(scenario, config, keep_map=keep_map)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)

    if args.command == "simulate":
        rows, failures = run_experiment(config, out_dir)
        for row in rows:
            print(row.csv_line())
        if failures:
            print(f"{len(failures)} trial(s) failed; see manifest.txt")
        print(f"wrote {os.path.join(out_dir, 'metrics.csv')}")
        return 0

    if args.command == "detect":
        _, rec = _single_trial(config, args)
        path = os.path.join(out_dir, "detections.csv")
        rec.detections.to_csv(path)
        print(f"{rec.detections.count} detection(s) -> {path}")
        return 0

    if args.command == "estimate":
        scenario, rec = _single_trial(config, args)
        path = os.path.join(out_dir, "estimates.csv")
        estimates_to_csv(rec.estimates, scenario.grid, path)
        print(f"{len(rec.estimates)} estimate(s) -> {path}")
        return 0

    if args.command == "crlb":
        rows = []
        for snr_db in config.snr_sweep_db:
            rows.append(pooled_physical_bounds(config, snr_db))
        path = os.path.join(out_dir, "crlb.csv")
        crlb_sweep_csv(rows, path)
        write_manifest(config, os.path.join(out_dir, "manifest.txt"))
        print(f"wrote {path}")
        return 0

    if args.command == "roc":
        p_fas = [float(s) for s in args.p_fa_values.split(",") if s.strip()]
        rows = roc_sweep(config, args.snr_db, p_fas)
        path = os.path.join(out_dir, "roc.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(RocRow.CSV_HEADER + "\n")
            for row in rows:
                fh.write(row.csv_line() + "\n")
        write_manifest(config, os.path.join(out_dir, "manifest.txt"))
        print(f"wrote {path}")
        return 0

    if args.command == "heatmap":
        _, rec = _single_trial(config, args, keep_map=True)
        path = os.path.join(out_dir, "heatmap.csv")
        correlation_map_to_csv(rec.correlation_map, path)
        print(f"wrote {path}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
