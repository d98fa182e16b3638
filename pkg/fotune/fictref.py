"""
Fictitious Reference
====================

Builds the fictitious reference signal from one-shot plant data and a
candidate controller, and recovers the closed-loop impulse response that
controller would produce:

    r~(phi) = C(z; phi)^{-1} * u^D + y^D
    t(phi)  = (R~^D(phi))^{-1} y^D

R~^D is the lower-triangular Toeplitz operator generated by r~; it is only
ever applied through forward substitution. The data may come from a
closed-loop or an open-loop experiment.
"""

import logging
from dataclasses import dataclass

import numpy as np

from fotune.config import TuningDefaults
from fotune.exceptions import ControllerNotInvertibleError, DataInvalidError, SingularityError
from fotune.lti import Sequence, deconvolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DataRecord:
    """
    One-shot plant input/output data u^D_[0:N], y^D_[0:N].

    Attributes:
        u (Sequence): Plant input
        y (Sequence): Plant output
        meta (str): Free-form description of where the data came from
    """

    u: Sequence
    y: Sequence
    meta: str = ""

    def __post_init__(self):
        if len(self.u) != len(self.y):
            raise DataInvalidError(f"u and y lengths differ: {len(self.u)} vs {len(self.y)}")
        if not np.isclose(self.u.sample_time, self.y.sample_time, rtol=1e-12, atol=0.0):
            raise DataInvalidError(
                f"u and y sample times differ: {self.u.sample_time} vs {self.y.sample_time}")
        if self.u.values[0] == 0:
            raise DataInvalidError(
                "first input sample u_0 is zero; data collection must start when a nonzero "
                "input is applied (u_0 != 0 is required to invert the fictitious reference)")

    @property
    def sample_time(self) -> float:
        return self.u.sample_time

    @property
    def horizon(self) -> int:
        return self.u.horizon

    def scale(self) -> float:
        """max(1, max|u|, max|y|), the reference magnitude of the singularity guard."""
        return float(max(1.0, np.max(np.abs(self.u.values)), np.max(np.abs(self.y.values))))

    def with_output(self, y: Sequence, meta: str = None) -> "DataRecord":
        return DataRecord(self.u, y, self.meta if meta is None else meta)


@dataclass(frozen=True, eq=False)
class FictitiousData:
    """
    Fictitious reference and the impulse response it implies.

    Attributes:
        r_tilde (Sequence): Fictitious reference r~^D(phi)
        t_est (Sequence): Estimated closed-loop impulse response t(phi)
        leading_value (float): r~_0, the diagonal of the Toeplitz operator
    """

    r_tilde: Sequence
    t_est: Sequence
    leading_value: float


def singularity_threshold(data: DataRecord, eps: float = TuningDefaults.SINGULARITY_EPS) -> float:
    """Guard threshold eps * max(1, max|u|, max|y|) on |r~_0|."""
    return eps * data.scale()


def fictitious_reference(data: DataRecord, c_imp: Sequence,
                         eps: float = TuningDefaults.SINGULARITY_EPS) -> Sequence:
    """
    Fictitious reference r~ = C^{-1} * u + y.

    Args:
        data (DataRecord): One-shot data
        c_imp (Sequence): Controller impulse response
        eps (float): Guard on |c_0|

    Returns:
        Sequence: r~ over the data horizon

    Raises:
        ControllerNotInvertibleError: If |c_0| is below the guard
    """
    c0 = float(c_imp.values[0])
    if c0 == 0 or abs(c0) < eps:
        raise ControllerNotInvertibleError(
            f"controller leading impulse value {c0:.6g} is below the guard {eps:.3g}; "
            f"the controller is not invertible", leading_value=c0, threshold=eps)
    c_inv_u = deconvolve(c_imp.padded(len(data.u)), data.u)
    return data.y.with_values(c_inv_u.values + data.y.values)


def estimated_t(r_tilde: Sequence, y: Sequence, threshold: float = 0.0) -> Sequence:
    """
    Solve R~^D t = y^D by forward substitution.

    Args:
        r_tilde (Sequence): Fictitious reference
        y (Sequence): Output data
        threshold (float): Singularity guard on |r~_0|

    Returns:
        Sequence: Estimated closed-loop impulse response, t_0 = y_0 / r~_0

    Raises:
        SingularityError: If |r~_0| is at or below the threshold
    """
    return deconvolve(r_tilde, y, threshold=threshold)


def fictitious_data(data: DataRecord, c_imp: Sequence,
                    eps: float = TuningDefaults.SINGULARITY_EPS) -> FictitiousData:
    """
    Fictitious reference plus estimated impulse response for one controller.

    Raises:
        SingularityError: If either leading value fails its guard
        NonFiniteError: If a solve diverges over the horizon
    """
    r_tilde = fictitious_reference(data, c_imp, eps)
    threshold = singularity_threshold(data, eps)
    lead = float(r_tilde.values[0])
    if abs(lead) < threshold:
        raise SingularityError(
            f"fictitious reference leading value {lead:.6g} is below the guard {threshold:.6g}",
            leading_value=lead, threshold=threshold)
    t_est = estimated_t(r_tilde, data.y)
    return FictitiousData(r_tilde=r_tilde, t_est=t_est, leading_value=lead)
