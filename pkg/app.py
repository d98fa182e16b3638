"""
fotune - Command Line Application
=================================

Command-line entry point for data-driven FO-PID tuning. It provides:
- simulate-data: synthetic one-shot data from a plant (closed or open loop)
- tune: fictitious-reference tuning from a data CSV, no plant model needed
- tune-sim: tuning by closed-loop simulation on a plant or plant model
- evaluate: step-response metrics of one controller on a plant
- compare: side-by-side re-evaluation of tuned controllers on one plant
- freq-response: frequency sweep of the fractional-operator approximation

Exit codes: 0 success, 1 configuration or file error, 2 invalid data or
usage, 3 optimizer failure.
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from fotune.config import Config, LoggingConfig, setup_logging
from fotune.exceptions import (
    ConfigError,
    DataInvalidError,
    FotuneError,
    InvalidParameterError,
    OptimizerError,
)
from fotune.frac import fractional_frequency_response
from fotune.lti import Sequence
from fotune.objective import Criterion
from fotune.pipeline import (
    TuningConfig,
    add_measurement_noise,
    collect_closed_loop_data,
    collect_open_loop_data,
    evaluate_controller,
    load_run_config,
    tune_fr,
    tune_sim,
)
from fotune.report import compare_report, format_metrics, format_outcome_text, write_outcome
from fotune.storage import (
    read_data_csv,
    read_outcome,
    read_phi,
    resolve_plant,
    write_data_csv,
    write_freq_response_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_OPTIMIZER = 3

TUNING_COMMANDS = ("tune", "tune-sim")


def _with_overrides(cfg: TuningConfig, args: argparse.Namespace) -> TuningConfig:
    """Apply command-line overrides on top of the run configuration."""
    changes = {}
    if getattr(args, "criterion", None):
        changes["criterion"] = Criterion(args.criterion)
    pso_changes = {}
    for option, name in (("seed", "seed"), ("population", "population"),
                         ("max_evaluations", "max_evaluations"), ("workers", "workers")):
        value = getattr(args, option, None)
        if value is not None:
            pso_changes[name] = value
    if pso_changes:
        changes["pso"] = replace(cfg.pso, **pso_changes)
    if getattr(args, "noise_std", None) is not None:
        changes["noise_std"] = args.noise_std
    if getattr(args, "noise_seed", None) is not None:
        changes["noise_seed"] = args.noise_seed
    if getattr(args, "phi0", None):
        changes["phi0"] = read_phi(args.phi0)
    return cfg.with_overrides(**changes) if changes else cfg


def cmd_simulate_data(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Record synthetic one-shot data and write it as CSV"""
    plant = resolve_plant(args.plant)
    if args.open_loop_step is not None:
        u = Sequence.constant(args.open_loop_step, cfg.n_steps, cfg.sample_time)
        data = collect_open_loop_data(plant, u, cfg)
    else:
        data = collect_closed_loop_data(plant, cfg.phi0, cfg)
    if cfg.noise_std > 0:
        data, _ = add_measurement_noise(data, cfg.noise_std, cfg.noise_seed)
        logger.info(f"Added measurement noise: std {cfg.noise_std:g}, seed {cfg.noise_seed}")
    write_data_csv(data, args.out)
    print(f"Wrote {len(data.u)} samples from {plant.label} to {args.out}")
    return EXIT_OK


def cmd_tune(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Fictitious-reference tuning from a data CSV"""
    data = read_data_csv(args.data)
    outcome = tune_fr(data, cfg)
    if args.label:
        outcome = replace(outcome, strategy=args.label)
    write_outcome(outcome, args.out)
    print(format_outcome_text(outcome), end="")
    return EXIT_OK


def cmd_tune_sim(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Tuning by closed-loop simulation"""
    plant = resolve_plant(args.plant)
    evaluation_plant = resolve_plant(args.evaluation_plant) if args.evaluation_plant else None
    outcome = tune_sim(plant, cfg, evaluation_plant=evaluation_plant, label=args.label)
    write_outcome(outcome, args.out)
    print(format_outcome_text(outcome), end="")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Print the step-response metrics of one controller"""
    plant = resolve_plant(args.plant)
    phi = read_phi(args.phi)
    metrics = evaluate_controller(plant, phi, cfg)
    print(format_metrics(f"evaluation on {plant.label}", phi, metrics))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Compare tuned controllers on one plant"""
    plant = resolve_plant(args.plant)
    outcomes = [read_outcome(path) for path in args.outcomes]
    report = compare_report(outcomes, plant, cfg)
    report.write(args.out)
    print(report.to_text(), end="")
    return EXIT_OK


def cmd_freq_response(args: argparse.Namespace, cfg: TuningConfig) -> int:
    """Frequency sweep of the s^gamma approximation"""
    band = cfg.oustaloup
    omega_min = args.omega_min if args.omega_min is not None else band.omega_low
    omega_max = args.omega_max if args.omega_max is not None else band.omega_high
    if not 0 < omega_min < omega_max:
        raise ConfigError(f"frequency range must satisfy 0 < min < max, got ({omega_min}, {omega_max})")
    if args.points < 2:
        raise ConfigError(f"--points must be at least 2, got {args.points}")
    omegas = np.logspace(np.log10(omega_min), np.log10(omega_max), args.points)
    mag_db, phase_deg = fractional_frequency_response(args.gamma, band, omegas)
    write_freq_response_csv(omegas, mag_db, phase_deg, args.out)
    mid = int(np.argmin(np.abs(np.log10(omegas) - np.log10(band.center_frequency))))
    print(f"s^{args.gamma:g}: {mag_db[mid]:.3f} dB, {phase_deg[mid]:.3f} deg at {omegas[mid]:.4g} rad/s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fotune",
        description="Data-driven FO-PID tuning from one-shot experimental data.")
    parser.add_argument("--log-level", default=LoggingConfig.LEVEL_INFO,
                        choices=[LoggingConfig.LEVEL_DEBUG, LoggingConfig.LEVEL_INFO,
                                 LoggingConfig.LEVEL_WARNING, LoggingConfig.LEVEL_ERROR])
    parser.add_argument("--log-file", action="store_true",
                        help=f"also log to a rotating file in --log-dir (default '{Config.LOG_DIR}')")
    parser.add_argument("--log-dir", default=Config.LOG_DIR)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plant=False, tuning=False):
        p.add_argument("--config", help="key=value run-configuration file")
        if plant:
            p.add_argument("--plant", default="full", help="full, reduced or file:<path>")
        if tuning:
            p.add_argument("--criterion", choices=[c.value for c in Criterion])
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--label", help="strategy label used in reports")
            p.add_argument("--seed", type=int)
            p.add_argument("--population", type=int)
            p.add_argument("--max-evaluations", dest="max_evaluations", type=int)
            p.add_argument("--workers", type=int)

    p = sub.add_parser("simulate-data", help="record synthetic one-shot data")
    common(p, plant=True)
    p.add_argument("--out", required=True, help="data CSV to write")
    p.add_argument("--phi0", help="data-collection controller kfp,kfi,kfd,lambda,mu")
    p.add_argument("--open-loop-step", dest="open_loop_step", type=float,
                   help="apply a step of this amplitude in open loop instead")
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.add_argument("--noise-seed", dest="noise_seed", type=int)
    p.set_defaults(handler=cmd_simulate_data)

    p = sub.add_parser("tune", help="tune from one-shot data (no plant model)")
    common(p, tuning=True)
    p.add_argument("--data", required=True, help="data CSV")
    p.add_argument("--phi0", help="incumbent seeded into the swarm")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("tune-sim", help="tune by closed-loop simulation")
    common(p, plant=True, tuning=True)
    p.add_argument("--evaluation-plant", dest="evaluation_plant",
                   help="plant the metrics are computed on (defaults to --plant)")
    p.add_argument("--phi0", help="incumbent seeded into the swarm")
    p.set_defaults(handler=cmd_tune_sim)

    p = sub.add_parser("evaluate", help="metrics of one controller")
    common(p, plant=True)
    p.add_argument("--phi", required=True, help="kfp,kfi,kfd,lambda,mu")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("compare", help="compare tuned controllers on one plant")
    common(p, plant=True)
    p.add_argument("--outcomes", nargs="+", required=True, help="outcome directories")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("freq-response", help="frequency sweep of s^gamma")
    common(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out", required=True, help="CSV to write")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--omega-min", dest="omega_min", type=float)
    p.add_argument("--omega-max", dest="omega_max", type=float)
    p.set_defaults(handler=cmd_freq_response)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(args.log_dir if args.log_file else None, args.log_level)

    try:
        cfg = _with_overrides(load_run_config(args.config), args)
        return args.handler(args, cfg)
    except DataInvalidError as e:
        logger.error(f"Invalid data: {e}")
        return EXIT_DATA
    except OptimizerError as e:
        logger.error(f"Optimization failed: {e}")
        return EXIT_OPTIMIZER
    except (ConfigError, InvalidParameterError, OSError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except FotuneError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_OPTIMIZER if args.command in TUNING_COMMANDS else EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
