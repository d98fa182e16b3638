"""
Reports
=======

Plain-text and CSV rendering of tuning outcomes, and the strategy
comparison that re-evaluates every tuned controller on one plant.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence as SequenceLike

import numpy as np

from fotune.config import Config, get_current_timestamp, sanitize_filename
from fotune.exceptions import ConfigError
from fotune.frac import FoPidParams
from fotune.lti import Sequence, step_response_from_t
from fotune.objective import Criterion, evaluate_simulated
from fotune.pipeline import (
    ControllerMetrics,
    PlantModel,
    TuningConfig,
    TuningOutcome,
    controller_impulse,
    evaluate_controller,
)
from fotune.storage import (
    write_outcome_json,
    write_rows_csv,
    write_step_response_csv,
    write_trace_csv,
)

logger = logging.getLogger(__name__)


def _num(value: float, digits: int = 6) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}g}"


def format_metrics(label: str, phi: FoPidParams, metrics: ControllerMetrics) -> str:
    """Metrics of one controller as an aligned text block."""
    lines = [
        f"Controller: {label}",
        f"  phi = {phi}",
        f"  stable             : {'yes' if metrics.stable else 'no'}",
        f"  ITAE               : {_num(metrics.itae, 10)}",
        f"  IAE                : {_num(metrics.iae, 10)}",
        f"  overshoot [%]      : {_num(metrics.overshoot_pct)}",
        f"  settling time [s]  : {_num(metrics.settling_time)}",
        f"  steady-state error : {_num(metrics.steady_state_error)}",
    ]
    if metrics.reason:
        lines.append(f"  note               : {metrics.reason}")
    return "\n".join(lines)


def format_outcome_text(outcome: TuningOutcome) -> str:
    cfg = outcome.config
    free = ", ".join(cfg.space.free_names)
    lines = [
        f"fotune tuning report ({outcome.generated_at})",
        "",
        f"Strategy          : {outcome.strategy}",
        f"Criterion         : {outcome.criterion.value} ({cfg.weight_scheme().describe()} weights)",
        f"Horizon           : {len(outcome.t_est)} samples at {outcome.t_est.sample_time:g} s",
        f"Setpoint          : {cfg.setpoint:g}",
        f"Searched          : {free}" + (f" (fixed {dict(cfg.fixed)})" if cfg.fixed else ""),
        f"Evaluations       : {outcome.trace.total_evaluations} in {outcome.trace.iterations} iterations",
        f"Objective at phi* : {_num(outcome.objective_value, 12)}",
        "",
        format_metrics(f"{outcome.strategy} (metrics on {outcome.evaluated_on})",
                       outcome.phi_star, outcome.metrics),
    ]
    return "\n".join(lines) + "\n"


def write_outcome(outcome: TuningOutcome, out_dir: str) -> None:
    """
    Write outcome.json, step_response.csv, trace.csv and report.txt into ``out_dir``.
    """
    os.makedirs(out_dir, exist_ok=True)
    write_outcome_json(outcome.as_dict(), os.path.join(out_dir, Config.OUTCOME_FILE))
    step = outcome.metrics.step_response
    if step is None:
        step = step_response_from_t(outcome.t_est, outcome.config.setpoint)
    write_step_response_csv(step, os.path.join(out_dir, Config.STEP_RESPONSE_FILE))
    write_trace_csv(outcome.trace, outcome.config.space, os.path.join(out_dir, Config.TRACE_FILE))
    with open(os.path.join(out_dir, Config.REPORT_FILE), 'w') as f:
        f.write(format_outcome_text(outcome))
    logger.info(f"Outcome of {outcome.strategy} written to {out_dir}")


@dataclass(frozen=True, eq=False)
class ComparisonRow:
    """
    One strategy re-evaluated on the comparison plant.

    ``surrogate_objective`` is the value the strategy optimized (on data or
    on its own model); ``realized_objective`` is the same criterion on the
    comparison plant.
    """

    strategy: str
    criterion: Criterion
    phi_star: FoPidParams
    surrogate_objective: float
    realized_objective: float
    metrics: ControllerMetrics

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.realized_objective), np.finfo(float).tiny)
        return abs(self.surrogate_objective - self.realized_objective) / scale


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """
    Table of strategies plus step-response traces on one plant.

    Attributes:
        plant_label (str): Plant all rows were evaluated on
        setpoint (float): Step reference
        rows (list): One ComparisonRow per outcome, in input order
        traces (dict): Step response per strategy label (None when unstable)
        generated_at (str): Timestamp
    """

    plant_label: str
    setpoint: float
    sample_time: float
    n_steps: int
    rows: List[ComparisonRow]
    traces: Dict[str, Optional[Sequence]]
    generated_at: str = field(default_factory=get_current_timestamp)

    def to_text(self) -> str:
        header = ["Strategy", "phi*", "J surrogate", "J realized", "rel. gap",
                  "ITAE", "IAE", "OS [%]", "Ts [s]", "SSE", "stable"]
        table = [header]
        for row in self.rows:
            m = row.metrics
            table.append([
                row.strategy, str(row.phi_star),
                _num(row.surrogate_objective, 10), _num(row.realized_objective, 10),
                _num(row.relative_gap, 3),
                _num(m.itae), _num(m.iae), _num(m.overshoot_pct, 4), _num(m.settling_time, 4),
                _num(m.steady_state_error, 4), "yes" if m.stable else "no",
            ])
        widths = [max(len(r[i]) for r in table) for i in range(len(header))]
        lines = [
            f"fotune strategy comparison ({self.generated_at})",
            f"Plant: {self.plant_label}, setpoint {self.setpoint:g}, "
            f"{self.n_steps + 1} samples at {self.sample_time:g} s",
            "",
        ]
        for i, r in enumerate(table):
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str) -> None:
        """Write comparison.txt, comparison.csv and step_responses.csv."""
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, Config.COMPARISON_TEXT_FILE), 'w') as f:
            f.write(self.to_text())

        write_rows_csv(
            os.path.join(out_dir, Config.COMPARISON_CSV_FILE),
            ["strategy", "criterion", "kfp", "kfi", "kfd", "lambda", "mu",
             "surrogate_objective", "realized_objective", "relative_gap",
             "itae", "iae", "overshoot_pct", "settling_time", "steady_state_error", "stable"],
            ([row.strategy, row.criterion.value, *row.phi_star.as_tuple(),
              float(row.surrogate_objective), float(row.realized_objective), float(row.relative_gap),
              float(row.metrics.itae), float(row.metrics.iae), float(row.metrics.overshoot_pct),
              float(row.metrics.settling_time), float(row.metrics.steady_state_error),
              row.metrics.stable] for row in self.rows))

        times = np.arange(self.n_steps + 1) * self.sample_time
        labels = list(self.traces)
        columns = [self.traces[label].values if self.traces[label] is not None
                   else np.full(self.n_steps + 1, np.nan) for label in labels]
        write_rows_csv(
            os.path.join(out_dir, Config.COMPARISON_TRACES_FILE),
            ["t", "setpoint", *(sanitize_filename(label) for label in labels)],
            ([float(times[k]), float(self.setpoint), *(float(col[k]) for col in columns)]
             for k in range(self.n_steps + 1)))
        logger.info(f"Comparison of {len(self.rows)} strategies written to {out_dir}")


def compare_report(outcomes: SequenceLike, plant: PlantModel, cfg: TuningConfig) -> ComparisonReport:
    """
    Re-evaluate tuned controllers on one plant.

    Args:
        outcomes: TuningOutcome or StoredOutcome objects (strategy, criterion,
            phi_star, objective_value)
        plant (PlantModel): Plant every controller is evaluated on
        cfg (TuningConfig): Horizon, setpoint and weights of the evaluation

    Returns:
        ComparisonReport: One row per outcome plus step-response traces

    Raises:
        ConfigError: If no outcome is given
    """
    if not outcomes:
        raise ConfigError("compare_report needs at least one outcome")
    n, ts, r0 = cfg.n_steps, cfg.sample_time, cfg.setpoint
    p_imp = plant.impulse(ts, n)

    rows, traces = [], {}
    for outcome in outcomes:
        phi = outcome.phi_star
        metrics = evaluate_controller(plant, phi, cfg)
        weights = cfg.with_overrides(criterion=outcome.criterion).weight_scheme()
        realized = evaluate_simulated(p_imp, controller_impulse(phi, cfg, n), r0, weights)
        rows.append(ComparisonRow(
            strategy=outcome.strategy,
            criterion=outcome.criterion,
            phi_star=phi,
            surrogate_objective=float(outcome.objective_value),
            realized_objective=realized.value,
            metrics=metrics,
        ))
        label = outcome.strategy
        suffix = 2
        while label in traces:
            label = f"{outcome.strategy}#{suffix}"
            suffix += 1
        traces[label] = metrics.step_response
        logger.info(f"{outcome.strategy}: surrogate {outcome.objective_value:.10g}, "
                    f"realized on {plant.label} {realized.value:.10g}")

    return ComparisonReport(plant.label, r0, ts, n, rows, traces)
