"""
Tuning Pipeline
===============

End-to-end tuning strategies and the plumbing around them:
- PlantModel and the built-in plant presets
- TuningConfig / ParameterSpace and the run-config loader
- Synthetic data collection (closed loop, open loop) and measurement noise
- Strategies: tune_fr (one-shot data, no plant) and tune_sim (plant simulation)
- Controller evaluation metrics
"""

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from fotune.config import (
    TuningDefaults,
    get_current_timestamp,
    parse_float,
    parse_float_list,
    parse_int,
    parse_range,
    read_run_config,
)
from fotune.exceptions import (
    AlgebraicLoopError,
    ConfigError,
    InvalidParameterError,
    InvalidSequenceError,
    NonFiniteError,
    OptimizerError,
    SampleTimeMismatchError,
)
from fotune.fictref import DataRecord
from fotune.frac import PARAMETER_NAMES, FoPidParams, OustaloupConfig, fopid_discrete
from fotune.lti import (
    ContinuousTf,
    DiscreteTf,
    Sequence,
    closed_loop_impulse,
    conv_trunc,
    deconvolve,
    impulse_response,
    step_response_from_t,
    tustin,
)
from fotune.objective import (
    Criterion,
    ObjectiveEvaluation,
    WeightKind,
    WeightScheme,
    evaluate_data_driven,
    evaluate_simulated,
    itae_from_t,
    iae_from_t,
    prefilter_moving_average,
)
from fotune.optimizer import Bounds, OptimizationTrace, PsoConfig, pso_minimize

logger = logging.getLogger(__name__)


# Plants ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PlantModel:
    """
    Plant given either in continuous time (discretized by Tustin on demand)
    or directly in discrete time.

    Attributes:
        label (str): Name used in reports
        ct_tf (ContinuousTf, optional): Continuous-time model
        dt_tf (DiscreteTf, optional): Discrete-time model
    """

    label: str
    ct_tf: Optional[ContinuousTf] = None
    dt_tf: Optional[DiscreteTf] = None

    def __post_init__(self):
        if (self.ct_tf is None) == (self.dt_tf is None):
            raise InvalidParameterError(
                f"plant '{self.label}' needs exactly one of a continuous or a discrete model")

    def discretize(self, sample_time: float) -> DiscreteTf:
        """
        Discrete model at ``sample_time``.

        Raises:
            SampleTimeMismatchError: If a discrete plant has another sampling time
        """
        if self.dt_tf is not None:
            if not np.isclose(self.dt_tf.sample_time, sample_time, rtol=1e-12, atol=0.0):
                raise SampleTimeMismatchError(
                    f"plant '{self.label}' is sampled at {self.dt_tf.sample_time} s, "
                    f"configuration asks for {sample_time} s")
            return self.dt_tf
        return tustin(self.ct_tf, sample_time)

    def impulse(self, sample_time: float, n: int) -> Sequence:
        """Plant impulse response p_0..p_n."""
        return impulse_response(self.discretize(sample_time), n)

    def same_model(self, other: "PlantModel") -> bool:
        """True when both carry the same transfer function, whatever their labels."""
        if self is other:
            return True
        if self.ct_tf is not None and other.ct_tf is not None:
            return (np.array_equal(self.ct_tf.num_coeffs, other.ct_tf.num_coeffs)
                    and np.array_equal(self.ct_tf.den_coeffs, other.ct_tf.den_coeffs))
        if self.dt_tf is not None and other.dt_tf is not None:
            return (self.dt_tf.sample_time == other.dt_tf.sample_time
                    and np.array_equal(self.dt_tf.b_coeffs, other.dt_tf.b_coeffs)
                    and np.array_equal(self.dt_tf.a_coeffs, other.dt_tf.a_coeffs))
        return False


# Highly oscillatory fourth-order process and its third-order reduction; the
# reduction lumps the fast lag into the slow one and keeps DC gain 1.
PLANT_PRESETS: Dict[str, PlantModel] = {
    "full": PlantModel(
        "P_full",
        ct_tf=ContinuousTf([1.0], np.polymul(np.polymul([1.0, 1.0], [1.0, 0.3, 1.0]), [0.1, 1.0])),
    ),
    "reduced": PlantModel(
        "P_reduced",
        ct_tf=ContinuousTf([1.0], np.polymul([1.1, 1.0], [1.0, 0.3, 1.0])),
    ),
}


def plant_preset(name: str) -> PlantModel:
    try:
        return PLANT_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown plant preset '{name}'; choose one of {sorted(PLANT_PRESETS)}") from None


# Configuration -----------------------------------------------------------------

def _default_bounds() -> Dict[str, Tuple[float, float]]:
    gains = {name: TuningDefaults.GAIN_BOUNDS for name in PARAMETER_NAMES[:3]}
    orders = {name: TuningDefaults.ORDER_BOUNDS for name in PARAMETER_NAMES[3:]}
    return {**gains, **orders}


@dataclass(frozen=True, eq=False)
class ParameterSpace:
    """
    Maps the optimizer's free-coordinate vector to full FO-PID parameters.

    Attributes:
        bounds (dict): (lo, hi) for every parameter name
        fixed (dict): Pinned parameter values; pinned names are not searched
    """

    bounds: Mapping[str, Tuple[float, float]]
    fixed: Mapping[str, float] = field(default_factory=dict)

    @property
    def free_names(self) -> Tuple[str, ...]:
        return tuple(name for name in PARAMETER_NAMES if name not in self.fixed)

    def search_bounds(self) -> Bounds:
        free = self.free_names
        if not free:
            raise ConfigError("every controller parameter is fixed; leave at least one free "
                              "or give it a single-point range instead")
        return Bounds([self.bounds[name][0] for name in free],
                      [self.bounds[name][1] for name in free])

    def to_params(self, x: np.ndarray) -> FoPidParams:
        values = dict(self.fixed)
        values.update(zip(self.free_names, (float(v) for v in x)))
        return FoPidParams(*(values[name] for name in PARAMETER_NAMES))

    def to_vector(self, phi: FoPidParams) -> np.ndarray:
        full = phi.as_dict()
        return np.array([full[name] for name in self.free_names], dtype=float)


@dataclass(frozen=True, eq=False)
class TuningConfig:
    """
    Settings shared by every strategy.

    Attributes:
        sample_time (float): Sampling time in seconds
        horizon_seconds (float): Evaluation horizon; horizon / sample_time must be an integer
        setpoint (float): Step reference r0, nonzero
        criterion (Criterion): ITAE or IAE
        weight_kind (WeightKind): Linear or saturated ITAE weights
        weight_alpha (float): Saturation level of saturated weights
        oustaloup (OustaloupConfig): Fractional-operator approximation
        bounds (dict): Search range per parameter name
        fixed (dict): Pinned parameters
        pso (PsoConfig): Swarm settings
        singularity_eps (float): Guard on the fictitious-reference leading value
        prefilter_window (int, optional): Moving-average window applied to noisy output data
        phi0 (FoPidParams): Controller used for data collection, seeded into the swarm
        noise_std (float): Standard deviation of synthetic measurement noise
        noise_seed (int): Seed of the synthetic noise
    """

    sample_time: float = TuningDefaults.SAMPLE_TIME
    horizon_seconds: float = TuningDefaults.HORIZON_SECONDS
    setpoint: float = TuningDefaults.SETPOINT
    criterion: Criterion = Criterion.ITAE
    weight_kind: WeightKind = WeightKind.LINEAR
    weight_alpha: float = TuningDefaults.SATURATION_ALPHA
    oustaloup: OustaloupConfig = field(default_factory=OustaloupConfig)
    bounds: Mapping[str, Tuple[float, float]] = field(default_factory=_default_bounds)
    fixed: Mapping[str, float] = field(default_factory=dict)
    pso: PsoConfig = field(default_factory=PsoConfig)
    singularity_eps: float = TuningDefaults.SINGULARITY_EPS
    prefilter_window: Optional[int] = None
    phi0: FoPidParams = field(default_factory=lambda: FoPidParams(*TuningDefaults.PHI0))
    noise_std: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if not self.sample_time > 0:
            raise InvalidParameterError(f"sample_time must be positive, got {self.sample_time}")
        steps = self.horizon_seconds / self.sample_time
        if self.horizon_seconds <= 0 or not math.isclose(steps, round(steps), rel_tol=1e-9, abs_tol=1e-9):
            raise InvalidParameterError(
                f"horizon {self.horizon_seconds} s is not a positive whole number of "
                f"{self.sample_time} s samples")
        if self.setpoint == 0 or not math.isfinite(self.setpoint):
            raise InvalidParameterError(f"setpoint must be finite and nonzero, got {self.setpoint}")
        if self.weight_kind is WeightKind.FLAT:
            raise InvalidParameterError("flat weights are selected with criterion=iae, not weight.kind")
        if not self.singularity_eps > 0:
            raise InvalidParameterError(f"singularity_eps must be positive, got {self.singularity_eps}")
        if self.noise_std < 0:
            raise InvalidParameterError(f"noise std must be nonnegative, got {self.noise_std}")

        bounds = {**_default_bounds(), **dict(self.bounds)}
        for name, (lo, hi) in bounds.items():
            if name not in PARAMETER_NAMES:
                raise InvalidParameterError(f"unknown parameter '{name}' in bounds")
            admissible = TuningDefaults.ORDER_BOUNDS if name in ("lambda", "mu") else (0.0, math.inf)
            if not (admissible[0] <= lo <= hi <= admissible[1] and math.isfinite(hi)):
                raise InvalidParameterError(
                    f"bounds for {name} must satisfy {admissible[0]} <= lo <= hi <= {admissible[1]}, "
                    f"got ({lo}, {hi})")
        for name in self.fixed:
            if name not in PARAMETER_NAMES:
                raise InvalidParameterError(f"unknown parameter '{name}' in fixed values")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "fixed", dict(self.fixed))
        # validate the pinned values through the parameter type
        self.space.to_params([bounds[name][0] for name in self.space.free_names])

    @property
    def n_steps(self) -> int:
        """Last sample index N of the evaluation horizon."""
        return int(round(self.horizon_seconds / self.sample_time))

    @property
    def space(self) -> ParameterSpace:
        return ParameterSpace(self.bounds, self.fixed)

    def weight_scheme(self, sample_time: Optional[float] = None) -> WeightScheme:
        ts = self.sample_time if sample_time is None else sample_time
        if self.criterion is Criterion.IAE:
            return WeightScheme.flat(ts)
        if self.weight_kind is WeightKind.SATURATED:
            return WeightScheme.saturated(ts, self.weight_alpha)
        return WeightScheme.linear(ts)

    def with_overrides(self, **changes) -> "TuningConfig":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, object]:
        """Flat echo of the settings for outcome files."""
        return {
            "sample_time": self.sample_time,
            "horizon_seconds": self.horizon_seconds,
            "setpoint": self.setpoint,
            "criterion": self.criterion.value,
            "weight": self.weight_scheme().describe(),
            "oustaloup": {"order": self.oustaloup.order,
                          "omega_low": self.oustaloup.omega_low,
                          "omega_high": self.oustaloup.omega_high},
            "bounds": {name: list(self.bounds[name]) for name in PARAMETER_NAMES},
            "fixed": dict(self.fixed),
            "pso": {"population": self.pso.population,
                    "max_evaluations": self.pso.max_evaluations,
                    "seed": self.pso.seed,
                    "inertia": self.pso.inertia,
                    "cognitive": self.pso.cognitive,
                    "social": self.pso.social,
                    "workers": self.pso.workers},
            "singularity_eps": self.singularity_eps,
            "prefilter_window": self.prefilter_window,
            "phi0": list(self.phi0.as_tuple()),
        }


def _parse_enum(enum_cls, key: str, value: str):
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"{key}: expected one of {choices}, got '{value}'") from None


def tuning_config_from_values(values: Mapping[str, str], source: str = "<config>") -> TuningConfig:
    """
    Build a TuningConfig from raw run-config values; missing keys keep their defaults.

    Raises:
        ConfigError: On malformed or inadmissible values
    """
    kwargs = {}
    oustaloup = {}
    pso = {}
    bounds = {}
    fixed = {}

    for key, value in values.items():
        if key in ("sample_time", "horizon_seconds", "setpoint", "singularity_eps"):
            kwargs[key] = parse_float(key, value)
        elif key == "criterion":
            kwargs["criterion"] = _parse_enum(Criterion, key, value)
        elif key == "weight.kind":
            kwargs["weight_kind"] = _parse_enum(WeightKind, key, value)
        elif key == "weight.alpha":
            kwargs["weight_alpha"] = parse_float(key, value)
        elif key == "oustaloup.order":
            oustaloup["order"] = parse_int(key, value)
        elif key in ("oustaloup.omega_low", "oustaloup.omega_high"):
            oustaloup[key.split(".", 1)[1]] = parse_float(key, value)
        elif key.startswith("bounds."):
            bounds[key.split(".", 1)[1]] = parse_range(key, value)
        elif key.startswith("fixed."):
            fixed[key.split(".", 1)[1]] = parse_float(key, value)
        elif key in ("pso.population", "pso.max_evaluations", "pso.seed", "pso.workers"):
            pso[key.split(".", 1)[1]] = parse_int(key, value)
        elif key in ("pso.inertia", "pso.cognitive", "pso.social"):
            pso[key.split(".", 1)[1]] = parse_float(key, value)
        elif key == "prefilter.window":
            kwargs["prefilter_window"] = parse_int(key, value)
        elif key == "phi0":
            kwargs["phi0_values"] = parse_float_list(key, value)
        elif key == "noise.std":
            kwargs["noise_std"] = parse_float(key, value)
        elif key == "noise.seed":
            kwargs["noise_seed"] = parse_int(key, value)
        else:
            raise ConfigError(f"{source}: unknown key '{key}'")

    try:
        if "phi0_values" in kwargs:
            kwargs["phi0"] = FoPidParams.from_vector(kwargs.pop("phi0_values"))
        if oustaloup:
            kwargs["oustaloup"] = OustaloupConfig(**oustaloup)
        if pso:
            kwargs["pso"] = PsoConfig(**pso)
        return TuningConfig(bounds=bounds, fixed=fixed, **kwargs)
    except InvalidParameterError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_run_config(path: Optional[str]) -> TuningConfig:
    """
    Load a run-configuration file; ``None`` gives the defaults.

    Raises:
        ConfigError: If the file is missing, malformed or inadmissible
    """
    if path is None:
        return TuningConfig()
    return tuning_config_from_values(read_run_config(path), source=path)


def controller_impulse(phi: FoPidParams, cfg: TuningConfig, n: int,
                       sample_time: Optional[float] = None) -> Sequence:
    ts = cfg.sample_time if sample_time is None else sample_time
    return fopid_discrete(phi, cfg.oustaloup, ts, n).impulse


# Data collection ---------------------------------------------------------------

def collect_closed_loop_data(plant: PlantModel, phi0: FoPidParams, cfg: TuningConfig) -> DataRecord:
    """
    Record one closed-loop step experiment under the controller ``phi0``.

    Solves (delta + c*p) u = c*r for the plant input, then y = p*u.

    Args:
        plant (PlantModel): Plant to run the experiment on
        phi0 (FoPidParams): Controller in the loop during the experiment
        cfg (TuningConfig): Sampling, horizon and setpoint

    Returns:
        DataRecord: (u, y) over the horizon

    Raises:
        AlgebraicLoopError: If the loop is ill-posed
        DataInvalidError: If the recorded u_0 is zero
    """
    n, ts = cfg.n_steps, cfg.sample_time
    p_imp = plant.impulse(ts, n)
    c_imp = controller_impulse(phi0, cfg, n)
    r = Sequence.constant(cfg.setpoint, n, ts)

    loop = conv_trunc(c_imp, p_imp)
    if abs(1.0 + loop.values[0]) <= 1e-14 * max(1.0, abs(loop.values[0])):
        raise AlgebraicLoopError(f"ill-posed loop: 1 + p_0 c_0 = {1.0 + loop.values[0]:.3g}")
    sensitivity = loop.values.copy()
    sensitivity[0] += 1.0
    u = deconvolve(loop.with_values(sensitivity), conv_trunc(c_imp, r))
    y = conv_trunc(p_imp, u)
    data = DataRecord(u, y, meta=f"closed loop on {plant.label}, phi0 {phi0}, r0 {cfg.setpoint:g}")
    logger.info(f"Collected closed-loop data on {plant.label}: {len(u)} samples, "
                f"u_0 = {u.values[0]:.6g}, y_N = {y.values[-1]:.6g}")
    return data


def collect_open_loop_data(plant: PlantModel, u: Sequence, cfg: TuningConfig) -> DataRecord:
    """
    Record the plant response to an arbitrary input applied in open loop.

    Raises:
        SampleTimeMismatchError: If ``u`` is not sampled at the configured rate
        DataInvalidError: If u_0 is zero
    """
    if not np.isclose(u.sample_time, cfg.sample_time, rtol=1e-12, atol=0.0):
        raise SampleTimeMismatchError(
            f"input sampled at {u.sample_time} s, configuration asks for {cfg.sample_time} s")
    p_imp = plant.impulse(cfg.sample_time, u.horizon)
    y = conv_trunc(p_imp, u)
    logger.info(f"Collected open-loop data on {plant.label}: {len(u)} samples")
    return DataRecord(u, y, meta=f"open loop on {plant.label}")


def add_measurement_noise(data: DataRecord, std: float, seed: int = 0) -> Tuple[DataRecord, Sequence]:
    """
    Add white Gaussian measurement noise to the output.

    Args:
        data (DataRecord): Noise-free data
        std (float): Noise standard deviation, nonnegative
        seed (int): Seed of the noise generator

    Returns:
        tuple: (noisy DataRecord, the noise Sequence that was added)
    """
    if std < 0:
        raise InvalidParameterError(f"noise std must be nonnegative, got {std}")
    rng = np.random.default_rng(seed)
    noise = data.y.with_values(rng.normal(0.0, std, len(data.y)) if std > 0 else np.zeros(len(data.y)))
    noisy = data.with_output(data.y.with_values(data.y.values + noise.values),
                             meta=f"{data.meta}, noise std {std:g} seed {seed}")
    return noisy, noise


# Metrics -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ControllerMetrics:
    """
    Step-response quality of one closed loop.

    ``stable`` is False when the response left the finite range within the
    horizon; the numeric fields are then NaN.
    """

    itae: float
    iae: float
    overshoot_pct: float
    settling_time: float
    steady_state_error: float
    stable: bool
    step_response: Optional[Sequence] = None
    reason: str = ""

    @classmethod
    def unstable(cls, reason: str) -> "ControllerMetrics":
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, False, None, reason)

    def as_dict(self) -> Dict[str, object]:
        return {
            "itae": self.itae,
            "iae": self.iae,
            "overshoot_pct": self.overshoot_pct,
            "settling_time": self.settling_time,
            "steady_state_error": self.steady_state_error,
            "stable": self.stable,
            "reason": self.reason,
        }


def metrics_from_t(t: Sequence, r0: float, band: float = TuningDefaults.SETTLING_BAND) -> ControllerMetrics:
    """
    Metrics of the step response implied by the closed-loop impulse response ``t``.

    Args:
        t (Sequence): Closed-loop impulse response
        r0 (float): Setpoint, nonzero
        band (float): Relative settling band

    Returns:
        ControllerMetrics: ITAE (linear weights), IAE, overshoot %, settling time,
            steady-state error
    """
    with np.errstate(over="ignore", invalid="ignore"):
        y = float(r0) * np.cumsum(t.values)
    if not np.all(np.isfinite(y)):
        logger.warning("Step response overflowed within the horizon; flagging the loop unstable")
        return ControllerMetrics.unstable("step response is not finite")

    step = step_response_from_t(t, r0)
    normalized = y / r0
    overshoot = max(0.0, (float(np.max(normalized)) - 1.0) * 100.0)
    outside = np.nonzero(np.abs(y - r0) > band * abs(r0))[0]
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] == t.horizon:
        settling = math.inf
    else:
        settling = float((outside[-1] + 1) * t.sample_time)

    return ControllerMetrics(
        itae=itae_from_t(t, r0, WeightScheme.linear(t.sample_time)),
        iae=iae_from_t(t, r0),
        overshoot_pct=overshoot,
        settling_time=settling,
        steady_state_error=abs(float(r0) - float(y[-1])),
        stable=True,
        step_response=step,
    )


def evaluate_controller(plant: PlantModel, phi: FoPidParams, cfg: TuningConfig) -> ControllerMetrics:
    """
    Simulate the closed loop of ``plant`` and ``phi`` under the configured step.

    Returns:
        ControllerMetrics: Metrics, or an unstable record when the loop is
            ill-posed or diverges
    """
    n, ts = cfg.n_steps, cfg.sample_time
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            p_imp = plant.impulse(ts, n)
            c_imp = controller_impulse(phi, cfg, n)
            t = closed_loop_impulse(p_imp, c_imp)
    except (AlgebraicLoopError, NonFiniteError, InvalidSequenceError) as e:
        logger.warning(f"Closed loop of {phi} on {plant.label} could not be simulated: {e}")
        return ControllerMetrics.unstable(str(e))
    return metrics_from_t(t, cfg.setpoint)


# Strategies --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TuningOutcome:
    """
    Result of one tuning strategy.

    Attributes:
        strategy (str): Strategy label, e.g. FR-ITAE-min
        criterion (Criterion): Criterion that was minimized
        phi_star (FoPidParams): Tuned parameters
        objective_value (float): Objective at phi_star
        t_est (Sequence): Closed-loop impulse response the objective saw at phi_star
        trace (OptimizationTrace): Optimizer trace
        metrics (ControllerMetrics): Metrics on the evaluation plant (estimated
            response for data-driven tuning)
        evaluated_on (str): Where the metrics come from
        config (TuningConfig): Settings used
        generated_at (str): Timestamp
    """

    strategy: str
    criterion: Criterion
    phi_star: FoPidParams
    objective_value: float
    t_est: Sequence
    trace: OptimizationTrace
    metrics: ControllerMetrics
    evaluated_on: str
    config: TuningConfig
    generated_at: str = field(default_factory=get_current_timestamp)

    def as_dict(self) -> Dict[str, object]:
        return {
            "strategy": self.strategy,
            "criterion": self.criterion.value,
            "phi_star": self.phi_star.as_dict(),
            "objective_value": self.objective_value,
            "metrics": self.metrics.as_dict(),
            "evaluated_on": self.evaluated_on,
            "evaluations": self.trace.total_evaluations,
            "iterations": self.trace.iterations,
            "generated_at": self.generated_at,
            "config": self.config.as_dict(),
        }


class CandidateObjective:
    """
    Objective callable handed to the optimizer.

    Maps a free-coordinate vector to controller parameters, discretizes the
    controller and evaluates it; counts infeasible candidates (thread-safe).
    """

    def __init__(self, space: ParameterSpace, cfg: TuningConfig, n: int, sample_time: float, evaluate):
        self.space = space
        self.cfg = cfg
        self.n = n
        self.sample_time = sample_time
        self._evaluate = evaluate
        self._lock = threading.Lock()
        self.infeasible = 0

    def evaluate(self, x: np.ndarray) -> ObjectiveEvaluation:
        phi = self.space.to_params(x)
        c_imp = controller_impulse(phi, self.cfg, self.n, self.sample_time)
        return self._evaluate(c_imp)

    def __call__(self, x: np.ndarray) -> float:
        result = self.evaluate(x)
        if not result.feasible:
            with self._lock:
                self.infeasible += 1
        return result.value


def _run_strategy(label: str, objective: CandidateObjective, cfg: TuningConfig):
    space = objective.space
    bounds = space.search_bounds()
    logger.info(f"{label}: searching {', '.join(space.free_names)}"
                + (f" with {dict(space.fixed)} fixed" if space.fixed else ""))
    best_x, best_f, trace = pso_minimize(objective, bounds, cfg.pso,
                                         initial_positions=space.to_vector(cfg.phi0))
    if objective.infeasible:
        logger.warning(f"{label}: {objective.infeasible} of {trace.total_evaluations} candidates "
                       f"were infeasible and received the barrier value")
    final = objective.evaluate(best_x)
    if not final.feasible:
        raise OptimizerError(f"{label}: no feasible controller found ({final.reason})", trace=trace)
    phi_star = space.to_params(best_x)
    logger.info(f"{label}: phi* = {phi_star}, objective {best_f:.10g}")
    return phi_star, final, trace


def tune_fr(data: DataRecord, cfg: TuningConfig) -> TuningOutcome:
    """
    Tune the FO-PID controller from one-shot data without any plant model.

    The objective is the data-driven criterion over the data horizon; phi0 is
    seeded into the swarm, so the result is never worse than phi0 when phi0
    lies in the search box.

    Args:
        data (DataRecord): One-shot data, u_0 != 0
        cfg (TuningConfig): Settings

    Returns:
        TuningOutcome: Metrics computed from the estimated closed-loop response

    Raises:
        OptimizerError: With the partial trace attached
    """
    ts = data.sample_time
    if not np.isclose(ts, cfg.sample_time, rtol=1e-12, atol=0.0):
        logger.warning(f"Data sampled at {ts} s, configuration says {cfg.sample_time} s; "
                       f"using the data sampling time")
    if cfg.prefilter_window:
        data = data.with_output(prefilter_moving_average(data.y, cfg.prefilter_window),
                                meta=f"{data.meta}, moving average {cfg.prefilter_window}")
        logger.info(f"Output data smoothed with a {cfg.prefilter_window}-sample moving average")

    weights = cfg.weight_scheme(ts)
    r0, eps = cfg.setpoint, cfg.singularity_eps
    objective = CandidateObjective(
        cfg.space, cfg, data.horizon, ts,
        lambda c_imp: evaluate_data_driven(data, c_imp, r0, weights, eps))

    label = f"FR-{cfg.criterion.name}-min"
    phi_star, final, trace = _run_strategy(label, objective, cfg)
    return TuningOutcome(
        strategy=label,
        criterion=cfg.criterion,
        phi_star=phi_star,
        objective_value=final.value,
        t_est=final.t_est,
        trace=trace,
        metrics=metrics_from_t(final.t_est, r0),
        evaluated_on="data",
        config=cfg,
    )


def tune_sim(plant: PlantModel, cfg: TuningConfig,
             evaluation_plant: Optional[PlantModel] = None,
             label: Optional[str] = None) -> TuningOutcome:
    """
    Tune the FO-PID controller by simulating closed loops on ``plant``.

    With the true plant this mimics repeated closed-loop experiments; with a
    reduced model it is model-based tuning.

    Args:
        plant (PlantModel): Plant the candidates are simulated on
        cfg (TuningConfig): Settings
        evaluation_plant (PlantModel, optional): Plant the metrics are computed
            on; defaults to ``plant``
        label (str, optional): Strategy label; defaults to Exp-<CRIT>-min when the
            metrics come from the simulated plant itself, MB-<CRIT>-min otherwise

    Returns:
        TuningOutcome: Result with metrics on the evaluation plant
    """
    n, ts = cfg.n_steps, cfg.sample_time
    p_imp = plant.impulse(ts, n)
    weights = cfg.weight_scheme()
    r0 = cfg.setpoint
    objective = CandidateObjective(
        cfg.space, cfg, n, ts,
        lambda c_imp: evaluate_simulated(p_imp, c_imp, r0, weights))

    target = evaluation_plant or plant
    if label is None:
        prefix = "Exp" if target.same_model(plant) else "MB"
        label = f"{prefix}-{cfg.criterion.name}-min"
    phi_star, final, trace = _run_strategy(label, objective, cfg)
    return TuningOutcome(
        strategy=label,
        criterion=cfg.criterion,
        phi_star=phi_star,
        objective_value=final.value,
        t_est=final.t_est,
        trace=trace,
        metrics=evaluate_controller(target, phi_star, cfg),
        evaluated_on=target.label,
        config=cfg,
    )
