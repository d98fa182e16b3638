"""
Storage Module
==============

Flat-file persistence: data CSVs, step-response and trace CSVs, outcome
JSON, plant description files and frequency sweeps.

Floats are written with 17 significant digits, which reproduces every
float64 exactly on read.
"""

import csv
import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from fotune.config import Config, parse_float, parse_float_list, parse_key_values
from fotune.exceptions import ConfigError, DataInvalidError, InvalidSequenceError
from fotune.fictref import DataRecord
from fotune.frac import PARAMETER_NAMES, FoPidParams
from fotune.lti import ContinuousTf, DiscreteTf, Sequence
from fotune.objective import Criterion
from fotune.optimizer import OptimizationTrace
from fotune.pipeline import ParameterSpace, PlantModel, plant_preset

logger = logging.getLogger(__name__)

DATA_HEADER = ["k", "t", "u", "y"]
PLANT_FILE_KEYS = ("domain", "num", "den", "label", "sample_time")


def fmt(value: float) -> str:
    return f"{value:.{Config.CSV_PRECISION}g}"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# Data CSV ----------------------------------------------------------------------

def write_data_csv(data: DataRecord, path: str) -> None:
    """
    Write a DataRecord as ``k,t,u,y`` rows below a ``# sample_time=`` comment.

    Args:
        data (DataRecord): Data to write
        path (str): Destination file
    """
    _ensure_parent(path)
    ts = data.sample_time
    with open(path, 'w', newline='') as f:
        f.write(f"# sample_time={fmt(ts)}\n")
        if data.meta:
            f.write(f"# source={data.meta}\n")
        writer = csv.writer(f)
        writer.writerow(DATA_HEADER)
        for k, (u, y) in enumerate(zip(data.u.values, data.y.values)):
            writer.writerow([k, fmt(k * ts), fmt(u), fmt(y)])
    logger.info(f"Wrote {len(data.u)} samples to {path}")


def read_data_csv(path: str) -> DataRecord:
    """
    Read a data CSV written by ``write_data_csv`` (or by hand in the same format).

    Args:
        path (str): Source file

    Returns:
        DataRecord: The recorded data

    Raises:
        DataInvalidError: If the file is malformed or violates u_0 != 0
        OSError: If the file cannot be read
    """
    with open(path, 'r', newline='') as f:
        lines = f.read().splitlines()

    comments = {}
    body = []
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped.lstrip("#").strip().partition("=")
            if sep:
                comments[key.strip()] = value.strip()
            continue
        body.append(line)

    if "sample_time" not in comments:
        raise DataInvalidError(f"{path}: missing '# sample_time=<seconds>' comment line")
    try:
        ts = float(comments["sample_time"])
    except ValueError:
        raise DataInvalidError(f"{path}: sample_time '{comments['sample_time']}' is not a number") from None

    rows = list(csv.reader(body))
    if not rows or [cell.strip() for cell in rows[0]] != DATA_HEADER:
        raise DataInvalidError(f"{path}: expected header {','.join(DATA_HEADER)}")
    if len(rows) < 2:
        raise DataInvalidError(f"{path}: no data rows")

    u, y = [], []
    for lineno, row in enumerate(rows[1:], start=1):
        if len(row) != len(DATA_HEADER):
            raise DataInvalidError(f"{path}: data row {lineno} has {len(row)} fields, expected 4")
        try:
            k = int(row[0])
            u.append(float(row[2]))
            y.append(float(row[3]))
        except ValueError:
            raise DataInvalidError(f"{path}: data row {lineno} is not numeric: {row}") from None
        if k != lineno - 1:
            raise DataInvalidError(f"{path}: sample index {k} out of order at data row {lineno}")

    try:
        data = DataRecord(Sequence(u, ts), Sequence(y, ts), meta=comments.get("source", path))
    except InvalidSequenceError as e:
        raise DataInvalidError(f"{path}: {e}") from e
    except DataInvalidError as e:
        raise DataInvalidError(f"{path}: {e}") from e
    logger.info(f"Loaded {len(u)} samples from {path} (sample time {ts:g} s)")
    return data


# Result CSVs -------------------------------------------------------------------

def write_rows_csv(path: str, header: List[str], rows: Iterable[Iterable]) -> None:
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_step_response_csv(y: Sequence, path: str) -> None:
    write_rows_csv(path, ["k", "t", "y"],
                   ([k, float(t), float(v)] for k, (t, v) in enumerate(zip(y.times, y.values))))


def write_trace_csv(trace: OptimizationTrace, space: ParameterSpace, path: str) -> None:
    """
    Write the optimizer trace with full parameter vectors (fixed values included).
    """
    rows = []
    for i, (f, x, evals) in enumerate(zip(trace.best_objective, trace.best_position, trace.evaluations)):
        phi = space.to_params(x)
        rows.append([i, evals, float(f), *(float(v) for v in phi.as_tuple())])
    write_rows_csv(path, ["iteration", "evaluations", "best_objective", *PARAMETER_NAMES], rows)


def write_freq_response_csv(omegas: np.ndarray, magnitude_db: np.ndarray, phase_deg: np.ndarray,
                            path: str) -> None:
    write_rows_csv(path, ["omega", "magnitude_db", "phase_deg"],
                   ([float(w), float(m), float(p)] for w, m, p in zip(omegas, magnitude_db, phase_deg)))
    logger.info(f"Wrote {len(omegas)}-point frequency sweep to {path}")


# Outcome JSON ------------------------------------------------------------------

@dataclass(frozen=True)
class StoredOutcome:
    """Outcome summary read back from an outcome directory."""

    strategy: str
    criterion: Criterion
    phi_star: FoPidParams
    objective_value: float
    source: str


def write_outcome_json(summary: Dict[str, object], path: str) -> None:
    _ensure_parent(path)
    with open(path, 'w') as f:
        json.dump(summary, f, indent=2, default=str)
    logger.info(f"Saved outcome to {path}")


def read_outcome(out_dir: str) -> StoredOutcome:
    """
    Load the outcome summary of a ``tune`` / ``tune-sim`` output directory.

    Raises:
        ConfigError: If the directory holds no readable outcome
    """
    path = os.path.join(out_dir, Config.OUTCOME_FILE)
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"No outcome file found in {out_dir}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in outcome file {path}: {e}") from None
    try:
        phi = data["phi_star"]
        return StoredOutcome(
            strategy=str(data["strategy"]),
            criterion=Criterion(data["criterion"]),
            phi_star=FoPidParams(*(float(phi[name]) for name in PARAMETER_NAMES)),
            objective_value=float(data["objective_value"]),
            source=out_dir,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Outcome file {path} is incomplete: {e}") from None


# Plants ------------------------------------------------------------------------

def read_plant_file(path: str) -> PlantModel:
    """
    Read a plant description (``domain=ct|dt``, ``num=``, ``den=``, optional
    ``label=`` and, for discrete plants, ``sample_time=``).

    Raises:
        ConfigError: If the file is missing or malformed
    """
    try:
        with open(path, 'r') as f:
            text = f.read()
    except FileNotFoundError:
        raise ConfigError(f"Plant file not found: {path}") from None
    values = parse_key_values(text, PLANT_FILE_KEYS, source=path)
    for key in ("domain", "num", "den"):
        if key not in values:
            raise ConfigError(f"{path}: missing '{key}'")
    label = values.get("label", os.path.splitext(os.path.basename(path))[0])
    num = parse_float_list("num", values["num"])
    den = parse_float_list("den", values["den"])
    domain = values["domain"].lower()
    try:
        if domain == "ct":
            return PlantModel(label, ct_tf=ContinuousTf(num, den))
        if domain == "dt":
            if "sample_time" not in values:
                raise ConfigError(f"{path}: discrete plants need 'sample_time'")
            return PlantModel(label, dt_tf=DiscreteTf(num, den, parse_float("sample_time", values["sample_time"])))
    except InvalidSequenceError as e:
        raise ConfigError(f"{path}: {e}") from e
    raise ConfigError(f"{path}: domain must be 'ct' or 'dt', got '{values['domain']}'")


def resolve_plant(name: str) -> PlantModel:
    """Plant from a preset name (``full``, ``reduced``) or ``file:<path>``."""
    if name.startswith("file:"):
        return read_plant_file(name[len("file:"):])
    return plant_preset(name)


def read_phi(text: str) -> FoPidParams:
    """Parse ``kfp,kfi,kfd,lambda,mu``."""
    values = parse_float_list("phi", text)
    if len(values) != len(PARAMETER_NAMES):
        raise ConfigError(f"phi: expected {len(PARAMETER_NAMES)} values kfp,kfi,kfd,lambda,mu, got '{text}'")
    return FoPidParams(*values)

