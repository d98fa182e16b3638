"""
fotune
======

Data-driven tuning of fractional-order PID controllers from one-shot
input/output data, using the fictitious reference signal.
"""

from fotune.exceptions import (
    AlgebraicLoopError,
    ConfigError,
    ControllerNotInvertibleError,
    DataInvalidError,
    DiscretizationError,
    FotuneError,
    InvalidParameterError,
    InvalidSequenceError,
    NonFiniteError,
    OptimizerError,
    SampleTimeMismatchError,
    SingularityError,
)
from fotune.fictref import DataRecord, estimated_t, fictitious_data, fictitious_reference
from fotune.frac import (
    DiscreteController,
    FoPidParams,
    OustaloupConfig,
    fopid_discrete,
    oustaloup_ct,
)
from fotune.lti import (
    ContinuousTf,
    DiscreteTf,
    Sequence,
    closed_loop_impulse,
    conv_trunc,
    deconvolve,
    impulse_response,
    tustin,
)
from fotune.objective import (
    Criterion,
    WeightScheme,
    iae_data_driven,
    iae_simulated,
    itae_data_driven,
    itae_simulated,
    noise_bias,
    saturated_weight,
)
from fotune.optimizer import Bounds, OptimizationTrace, PsoConfig, pso_minimize
from fotune.pipeline import (
    ControllerMetrics,
    ParameterSpace,
    PlantModel,
    TuningConfig,
    TuningOutcome,
    add_measurement_noise,
    collect_closed_loop_data,
    collect_open_loop_data,
    evaluate_controller,
    load_run_config,
    tune_fr,
    tune_sim,
)
from fotune.report import ComparisonReport, compare_report

__version__ = "1.0.0"
