"""Command-line entry point: ``herdmarket {simulate,sweep,scenario,analyze}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import io
from .analytics import DomainError, run_statistics
from .experiments import run_ensemble, run_single, scenario_streak
from .params import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("herdmarket")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON run config (defaults to the baseline market)")
    p.add_argument("--seed", type=int, help="override model.seed")
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--steps", type=int, help="override model.n_steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herdmarket", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one run -> timeseries.csv + stats.csv")
    _common(p)

    p = sub.add_parser("sweep", help="ensemble over the config's sweep grid -> sweep.csv")
    _common(p)
    p.add_argument("--workers", type=int, help="worker processes (default: $HERDMARKET_WORKERS or CPU count)")

    p = sub.add_parser("scenario", help="scripted-news run -> timeseries.csv + streak.json")
    _common(p)

    p = sub.add_parser("analyze", help="recompute statistics from an existing timeseries CSV")
    _common(p)
    p.add_argument("timeseries", type=Path)
    return parser


def _load(args) -> io.RunConfig:
    cfg = io.load_config(args.config) if args.config else io.parse_config({})
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.steps is not None:
        changes["n_steps"] = args.steps
    if changes:
        cfg = dataclasses.replace(cfg, params=cfg.params.with_(**changes))
        if cfg.sweep is not None:
            sweep_changes = {"base": cfg.params}
            if "seed" in changes:
                sweep_changes["seed_base"] = changes["seed"]
            cfg = dataclasses.replace(cfg, sweep=dataclasses.replace(cfg.sweep, **sweep_changes))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=str(args.out))
    return cfg


def cmd_simulate(cfg: io.RunConfig) -> None:
    out = Path(cfg.output_dir)
    ts, stats = run_single(cfg.params, cfg.news, cfg.acf_max_lag, **cfg.histogram_edges())
    if cfg.emit_timeseries:
        io.emit_timeseries(ts, out / "timeseries.csv")
    if cfg.emit_stats:
        io.emit_stats(stats, out / "stats.csv")
    io.atomic_write(out / "config.json", io.dumps_config(cfg))
    print(json.dumps(stats.summary()))


def cmd_sweep(cfg: io.RunConfig, workers) -> None:
    if cfg.sweep is None:
        raise ConfigError("sweep", "config has no sweep section")
    out = Path(cfg.output_dir)
    io.atomic_write(out / "config.json", io.dumps_config(cfg))
    result = run_ensemble(cfg.sweep, results_path=out / "realizations.csv", workers=workers)
    io.emit_sweep(result, out / "sweep.csv")
    for p in result.points:
        print(json.dumps({**p.overrides, "n": p.n_realizations, "mean_max_mean_k": p.mean_max_mean_k}))


def cmd_scenario(cfg: io.RunConfig) -> None:
    if not cfg.news.scripted:
        raise ConfigError("news", "scenario needs scripted news entries")
    out = Path(cfg.output_dir)
    ts, diag = scenario_streak(cfg.params, cfg.news.scripted[0], horizon=cfg.scenario_horizon)
    if cfg.emit_timeseries:
        io.emit_timeseries(ts, out / "timeseries.csv")
    text = json.dumps(dataclasses.asdict(diag), indent=2) + "\n"
    io.atomic_write(out / "streak.json", text)
    io.atomic_write(out / "config.json", io.dumps_config(cfg))
    print(text, end="")


def cmd_analyze(cfg: io.RunConfig, path: Path) -> None:
    ts = io.read_timeseries(path)
    stats = run_statistics(ts.after(cfg.params.burn_in), cfg.acf_max_lag, **cfg.histogram_edges())
    io.emit_stats(stats, Path(cfg.output_dir) / "stats.csv")
    print(json.dumps(stats.summary()))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.workers)
        elif args.command == "scenario":
            cmd_scenario(cfg)
        else:
            cmd_analyze(cfg, args.timeseries)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, DomainError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
