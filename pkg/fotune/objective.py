"""
Performance Indices
===================

ITAE and IAE criteria for a step reference r^0:

    J = sum_k w_k |r^0 - y_k|,   y = r^0 * cumsum(t)

evaluated either from one-shot data through the fictitious reference
(data-driven) or from a plant impulse response (simulation). Time weights
are linear (w_k = k ts), saturated (w_k = Sat(k ts)) or flat (IAE).

The sum carries no extra ts factor; a positive constant scaling of the
weights cannot move the minimizer.

Also provides the measurement-noise bias decomposition and a moving-average
pre-filter hook for noisy output data.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from fotune.config import TuningDefaults
from fotune.exceptions import (
    AlgebraicLoopError,
    InvalidParameterError,
    InvalidSequenceError,
    NonFiniteError,
    SampleTimeMismatchError,
    SingularityError,
)
from fotune.fictref import DataRecord, fictitious_data
from fotune.lti import Sequence, closed_loop_impulse, step_response_from_t

logger = logging.getLogger(__name__)


class WeightKind(Enum):
    """Time-weight schemes."""
    LINEAR = "linear"
    SATURATED = "saturated"
    FLAT = "flat"


class Criterion(Enum):
    """Performance criteria."""
    ITAE = "itae"
    IAE = "iae"


def saturated_weight(tau: Union[float, np.ndarray], alpha: float) -> Union[float, np.ndarray]:
    """
    Bounded time weight Sat(tau) = alpha (1 - exp(-tau / alpha)).

    Strictly increasing, below alpha for every tau >= 0 and Sat(tau)/tau -> 1
    as tau -> 0.

    Args:
        tau: Time in seconds (scalar or array), nonnegative
        alpha (float): Saturation level, positive

    Returns:
        Weight(s) with the shape of ``tau``
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0):
        raise InvalidParameterError("tau must be nonnegative")
    out = -alpha * np.expm1(-tau_arr / alpha)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WeightScheme:
    """
    Time weights w_0..w_N.

    Attributes:
        kind (WeightKind): Linear, saturated or flat
        sample_time (float): Sampling time in seconds
        alpha (float): Saturation level, saturated weights only
    """

    kind: WeightKind
    sample_time: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if not self.sample_time > 0:
            raise InvalidParameterError(f"sample_time must be positive, got {self.sample_time}")
        if self.kind is WeightKind.SATURATED and not (self.alpha and self.alpha > 0):
            raise InvalidParameterError(f"saturated weights need a positive alpha, got {self.alpha}")

    @classmethod
    def linear(cls, sample_time: float) -> "WeightScheme":
        return cls(WeightKind.LINEAR, sample_time)

    @classmethod
    def saturated(cls, sample_time: float, alpha: float = TuningDefaults.SATURATION_ALPHA) -> "WeightScheme":
        return cls(WeightKind.SATURATED, sample_time, alpha)

    @classmethod
    def flat(cls, sample_time: float) -> "WeightScheme":
        return cls(WeightKind.FLAT, sample_time)

    def weights(self, n: int) -> np.ndarray:
        """Weights for steps 0..n."""
        tau = np.arange(n + 1) * self.sample_time
        if self.kind is WeightKind.LINEAR:
            return tau
        if self.kind is WeightKind.SATURATED:
            return saturated_weight(tau, self.alpha)
        return np.ones(n + 1)

    def describe(self) -> str:
        if self.kind is WeightKind.SATURATED:
            return f"saturated(alpha={self.alpha:g})"
        return self.kind.value


def _check_sample_time(t: Sequence, w: WeightScheme) -> None:
    if not np.isclose(t.sample_time, w.sample_time, rtol=1e-12, atol=0.0):
        raise SampleTimeMismatchError(
            f"weight scheme sample time {w.sample_time} does not match sequence {t.sample_time}")


def weighted_error(t: Sequence, r0: float, w: WeightScheme) -> Sequence:
    """Signed weighted error vector diag(w)(r0 1 - R0 t)."""
    _check_sample_time(t, w)
    y = step_response_from_t(t, r0)
    return t.with_values(w.weights(t.horizon) * (float(r0) - y.values))


def itae_from_t(t: Sequence, r0: float, w: WeightScheme) -> float:
    """
    Weighted absolute tracking error of the impulse response ``t``.

    Args:
        t (Sequence): Closed-loop impulse response
        r0 (float): Setpoint
        w (WeightScheme): Time weights

    Returns:
        float: sum_k w_k |r0 - y_k|
    """
    return float(np.sum(np.abs(weighted_error(t, r0, w).values)))


def iae_from_t(t: Sequence, r0: float, w: Optional[WeightScheme] = None) -> float:
    """Unweighted counterpart of ``itae_from_t``."""
    return itae_from_t(t, r0, w or WeightScheme.flat(t.sample_time))


@dataclass(frozen=True, eq=False)
class ObjectiveEvaluation:
    """
    Outcome of one objective evaluation.

    Attributes:
        value (float): Criterion value, or the barrier when infeasible
        feasible (bool): False when a guard failed or a solve diverged
        reason (str): Diagnostic for infeasible evaluations
        t_est (Sequence): Closed-loop impulse response used, if any
        r_tilde (Sequence): Fictitious reference, data-driven evaluations only
    """

    value: float
    feasible: bool
    reason: str = ""
    t_est: Optional[Sequence] = None
    r_tilde: Optional[Sequence] = None


def data_barrier(data: DataRecord) -> float:
    """Barrier 1e12 (1 + ||y^D||_1): finite and above any feasible value."""
    return TuningDefaults.BARRIER_SCALE * (1.0 + float(np.sum(np.abs(data.y.values))))


def simulation_barrier(r0: float, w: WeightScheme, n: int) -> float:
    return TuningDefaults.BARRIER_SCALE * (1.0 + abs(float(r0)) * float(np.sum(w.weights(n))))


def _finish(t: Sequence, r0: float, w: WeightScheme, barrier: float) -> ObjectiveEvaluation:
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            value = itae_from_t(t, r0, w)
    except InvalidSequenceError:
        value = np.inf
    if not np.isfinite(value):
        return ObjectiveEvaluation(barrier, False, "criterion overflowed", t)
    if value >= barrier:
        return ObjectiveEvaluation(barrier, False, "criterion reached the barrier", t)
    return ObjectiveEvaluation(value, True, "", t)


def evaluate_data_driven(data: DataRecord, c_imp: Sequence, r0: float, w: WeightScheme,
                         eps: float = TuningDefaults.SINGULARITY_EPS) -> ObjectiveEvaluation:
    """
    Data-driven criterion J^D(phi) with the barrier contract.

    Never raises for infeasible candidates; the optimizer relies on that.
    """
    barrier = data_barrier(data)
    try:
        fd = fictitious_data(data, c_imp, eps)
    except (SingularityError, NonFiniteError, InvalidSequenceError) as e:
        return ObjectiveEvaluation(barrier, False, str(e))
    return replace(_finish(fd.t_est, r0, w, barrier), r_tilde=fd.r_tilde)


def itae_data_driven(data: DataRecord, c_imp: Sequence, r0: float, w: WeightScheme,
                     eps: float = TuningDefaults.SINGULARITY_EPS) -> float:
    """
    ITAE of the controller ``c_imp`` computed from one-shot data only.

    Args:
        data (DataRecord): One-shot plant data
        c_imp (Sequence): Controller impulse response
        r0 (float): Setpoint
        w (WeightScheme): Time weights
        eps (float): Singularity guard

    Returns:
        float: J^D(phi), or the barrier value when the guard fails
    """
    return evaluate_data_driven(data, c_imp, r0, w, eps).value


def iae_data_driven(data: DataRecord, c_imp: Sequence, r0: float,
                    w_flat: Optional[WeightScheme] = None,
                    eps: float = TuningDefaults.SINGULARITY_EPS) -> float:
    """IAE of ``c_imp`` from one-shot data."""
    return itae_data_driven(data, c_imp, r0, w_flat or WeightScheme.flat(data.sample_time), eps)


def evaluate_simulated(p_imp: Sequence, c_imp: Sequence, r0: float, w: WeightScheme) -> ObjectiveEvaluation:
    """Simulation-side criterion with the barrier contract."""
    barrier = simulation_barrier(r0, w, p_imp.horizon)
    try:
        t = closed_loop_impulse(p_imp, c_imp)
    except (AlgebraicLoopError, NonFiniteError, InvalidSequenceError) as e:
        return ObjectiveEvaluation(barrier, False, str(e))
    return _finish(t, r0, w, barrier)


def itae_simulated(p_imp: Sequence, c_imp: Sequence, r0: float, w: WeightScheme) -> float:
    """
    ITAE of the loop formed by a known plant and ``c_imp``.

    Raises:
        AlgebraicLoopError: If 1 + p_0 c_0 = 0
    """
    return itae_from_t(closed_loop_impulse(p_imp, c_imp), r0, w)


def iae_simulated(p_imp: Sequence, c_imp: Sequence, r0: float,
                  w_flat: Optional[WeightScheme] = None) -> float:
    return itae_simulated(p_imp, c_imp, r0, w_flat or WeightScheme.flat(p_imp.sample_time))


# Measurement noise -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NoiseDecomposition:
    """
    Split of the noisy criterion J^nD = ||ell + d||_1.

    Attributes:
        ell (Sequence): Weighted error vector from the clean data
        d (Sequence): Bias induced by the measurement noise
        j_noisy (float): Criterion computed from the noisy data
        t_clean (Sequence): Impulse response estimated from clean data
        t_noisy (Sequence): Impulse response estimated from noisy data
    """

    ell: Sequence
    d: Sequence
    j_noisy: float
    t_clean: Sequence
    t_noisy: Sequence


def noise_bias(data_noisy: DataRecord, noise: Sequence, c_imp: Sequence, r0: float, w: WeightScheme,
               eps: float = TuningDefaults.SINGULARITY_EPS) -> NoiseDecomposition:
    """
    Decompose the noisy data-driven criterion into clean part and bias.

    The noise must be known, so this is a diagnostic for synthetic studies.

    Args:
        data_noisy (DataRecord): Data with y^nD = y^D + n^D
        noise (Sequence): The noise n^D that was added
        c_imp (Sequence): Controller impulse response
        r0 (float): Setpoint
        w (WeightScheme): Time weights
        eps (float): Singularity guard

    Returns:
        NoiseDecomposition: ell, d = (noisy vector) - ell, and J^nD

    Raises:
        SingularityError: If the guard fails on the clean or the noisy data
    """
    clean = data_noisy.with_output(data_noisy.y.with_values(data_noisy.y.values - noise.values),
                                   meta=f"{data_noisy.meta} (noise removed)")
    decomposed = {}
    for label, record in (("clean", clean), ("noisy", data_noisy)):
        try:
            decomposed[label] = fictitious_data(record, c_imp, eps)
        except SingularityError as e:
            raise type(e)(f"{label} data: {e}", leading_value=e.leading_value,
                          threshold=e.threshold) from e
        except NonFiniteError as e:
            raise NonFiniteError(f"{label} data: {e}") from e

    ell = weighted_error(decomposed["clean"].t_est, r0, w)
    noisy_vec = weighted_error(decomposed["noisy"].t_est, r0, w)
    d = ell.with_values(noisy_vec.values - ell.values)
    return NoiseDecomposition(
        ell=ell,
        d=d,
        j_noisy=float(np.sum(np.abs(noisy_vec.values))),
        t_clean=decomposed["clean"].t_est,
        t_noisy=decomposed["noisy"].t_est,
    )


def prefilter_moving_average(y_noisy: Sequence, window: int) -> Sequence:
    """
    Centered moving average with windows shrinking at the edges.

    Args:
        y_noisy (Sequence): Signal to smooth
        window (int): Odd window length, at most the signal length

    Returns:
        Sequence: Smoothed signal
    """
    if window < 1 or window % 2 == 0:
        raise InvalidParameterError(f"moving-average window must be a positive odd count, got {window}")
    if window > len(y_noisy):
        raise InvalidParameterError(f"window {window} exceeds signal length {len(y_noisy)}")
    kernel = np.ones(window)
    sums = np.convolve(y_noisy.values, kernel, mode="same")
    counts = np.convolve(np.ones(len(y_noisy)), kernel, mode="same")
    return y_noisy.with_values(sums / counts)
