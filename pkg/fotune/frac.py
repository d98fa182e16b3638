"""
Fractional Operators and FO-PID Assembly
========================================

This module approximates the fractional operator s^gamma with the Oustaloup
recursive filter and assembles the discrete FO-PID controller

    C(z; phi) = Tustin(Oustaloup(K_fp + K_fi s^-lambda + K_fd s^mu))

as three parallel branches. Each fractional exponent is split into an
integer part, realized exactly by bilinear integrators/differentiators, and
a fractional part in [0, 1), realized by the Oustaloup filter.

Every branch is kept as a cascade of first-order sections; the zeros and
poles of an order-5 filter span nine decades and expanding them into one
polynomial loses most of the significant digits.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import signal

from fotune.config import TuningDefaults
from fotune.exceptions import InvalidParameterError
from fotune.lti import ContinuousTf, DiscreteTf, Sequence

logger = logging.getLogger(__name__)

PARAMETER_NAMES = ("kfp", "kfi", "kfd", "lambda", "mu")


@dataclass(frozen=True)
class FoPidParams:
    """
    The five tunable FO-PID values phi = (K_fp, K_fi, K_fd, lambda, mu).

    Gains are nonnegative, orders lie in [0, 2].
    """

    k_fp: float
    k_fi: float
    k_fd: float
    lam: float
    mu: float

    def __post_init__(self):
        for name, value in zip(PARAMETER_NAMES, self.as_tuple()):
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
        for name, gain in zip(PARAMETER_NAMES[:3], self.as_tuple()[:3]):
            if gain < 0:
                raise InvalidParameterError(f"{name} must be nonnegative, got {gain}")
        lo, hi = TuningDefaults.ORDER_BOUNDS
        for name, order in (("lambda", self.lam), ("mu", self.mu)):
            if not lo <= order <= hi:
                raise InvalidParameterError(f"{name} must lie in [{lo}, {hi}], got {order}")

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.k_fp, self.k_fi, self.k_fd, self.lam, self.mu)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(PARAMETER_NAMES, (float(v) for v in self.as_tuple())))

    @classmethod
    def from_vector(cls, values) -> "FoPidParams":
        values = [float(v) for v in values]
        if len(values) != 5:
            raise InvalidParameterError(f"expected 5 controller parameters, got {len(values)}")
        return cls(*values)

    def __str__(self) -> str:
        return ("[" + " ".join(f"{v:.6g}" for v in self.as_tuple()) + "]")


@dataclass(frozen=True)
class OustaloupConfig:
    """Order and valid frequency band (rad/s) of the Oustaloup filter."""

    order: int = TuningDefaults.OUSTALOUP_ORDER
    omega_low: float = TuningDefaults.OUSTALOUP_OMEGA_LOW
    omega_high: float = TuningDefaults.OUSTALOUP_OMEGA_HIGH

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidParameterError(f"Oustaloup order must be a positive integer, got {self.order}")
        if not 0 < self.omega_low < self.omega_high:
            raise InvalidParameterError(
                f"Oustaloup band must satisfy 0 < omega_low < omega_high, "
                f"got ({self.omega_low}, {self.omega_high})")

    @property
    def center_frequency(self) -> float:
        return math.sqrt(self.omega_low * self.omega_high)


def oustaloup_zpk(gamma: float, cfg: OustaloupConfig) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Zeros, poles and gain of the Oustaloup approximation of s^gamma.

    Zeros and poles are returned in matching order (zero k sits just below
    pole k in frequency) so they can be paired into first-order sections.

    Args:
        gamma (float): Exponent in (-1, 1)
        cfg (OustaloupConfig): Filter order and band

    Returns:
        tuple: (zeros, poles, gain) of the continuous-time filter

    Raises:
        InvalidParameterError: If |gamma| >= 1
    """
    if not -1.0 < gamma < 1.0:
        raise InvalidParameterError(
            f"Oustaloup exponent must lie in (-1, 1), got {gamma}; "
            f"split the integer part off first (see fopid_discrete)")
    n = cfg.order
    ratio = cfg.omega_high / cfg.omega_low
    k = np.arange(-n, n + 1)
    omega_zero = cfg.omega_low * ratio ** ((k + n + 0.5 * (1.0 - gamma)) / (2 * n + 1))
    omega_pole = cfg.omega_low * ratio ** ((k + n + 0.5 * (1.0 + gamma)) / (2 * n + 1))
    zeros = -omega_zero
    poles = -omega_pole

    # unit-gain sections, then match |G(j wc)| = wc^gamma at the band center
    wc = cfg.center_frequency
    shape = np.prod(np.abs(1j * wc - zeros) / np.abs(1j * wc - poles))
    gain = wc ** gamma / shape
    return zeros, poles, float(gain)


def oustaloup_ct(gamma: float, cfg: OustaloupConfig) -> ContinuousTf:
    """
    Order-N recursive zero/pole approximation of s^gamma.

    Args:
        gamma (float): Exponent in (-1, 1)
        cfg (OustaloupConfig): Filter order and band

    Returns:
        ContinuousTf: Biproper rational approximation; constant 1 for gamma = 0
    """
    if gamma == 0:
        return ContinuousTf([1.0], [1.0])
    zeros, poles, gain = oustaloup_zpk(gamma, cfg)
    num, den = signal.zpk2tf(zeros, poles, gain)
    return ContinuousTf(num, den)


def oustaloup_frequency_response(gamma: float, cfg: OustaloupConfig,
                                 omegas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Magnitude (dB) and phase (deg) of the approximation on the imaginary axis.

    Args:
        gamma (float): Exponent in (-1, 1)
        cfg (OustaloupConfig): Filter order and band
        omegas (np.ndarray): Frequencies in rad/s

    Returns:
        tuple: (magnitude_db, phase_deg)
    """
    omegas = np.asarray(omegas, dtype=float)
    if gamma == 0:
        return np.zeros_like(omegas), np.zeros_like(omegas)
    zeros, poles, gain = oustaloup_zpk(gamma, cfg)
    _, h = signal.freqs_zpk(zeros, poles, gain, worN=omegas)
    return 20.0 * np.log10(np.abs(h)), np.degrees(np.angle(h))


def fractional_frequency_response(gamma: float, cfg: OustaloupConfig,
                                  omegas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Continuous-time response of the s^gamma approximation for gamma in [-2, 2].

    The integer part contributes 20 n dB/decade and 90 n degrees exactly.
    """
    lo, hi = -TuningDefaults.ORDER_BOUNDS[1], TuningDefaults.ORDER_BOUNDS[1]
    if not lo <= gamma <= hi:
        raise InvalidParameterError(f"gamma must lie in [{lo}, {hi}], got {gamma}")
    omegas = np.asarray(omegas, dtype=float)
    integer_part = math.floor(gamma)
    mag_db, phase_deg = oustaloup_frequency_response(gamma - integer_part, cfg, omegas)
    return mag_db + 20.0 * integer_part * np.log10(omegas), phase_deg + 90.0 * integer_part


def _first_order_sections(zeros: np.ndarray, poles: np.ndarray, gain: float) -> np.ndarray:
    sos = np.zeros((zeros.size, 6))
    sos[:, 0] = 1.0
    sos[:, 1] = -np.real(zeros)
    sos[:, 3] = 1.0
    sos[:, 4] = -np.real(poles)
    sos[0, :3] *= gain
    return sos


def oustaloup_sections(gamma: float, cfg: OustaloupConfig, sample_time: float) -> np.ndarray:
    """
    Tustin image of the Oustaloup filter as first-order sections.

    Args:
        gamma (float): Exponent in (-1, 1)
        cfg (OustaloupConfig): Filter order and band
        sample_time (float): Sampling time in seconds

    Returns:
        np.ndarray: ``(2N+1, 6)`` second-order-section array (first-order rows)
    """
    zeros, poles, gain = oustaloup_zpk(gamma, cfg)
    zd, pd, kd = signal.bilinear_zpk(zeros, poles, gain, fs=1.0 / sample_time)
    return _first_order_sections(np.asarray(zd), np.asarray(pd), float(kd))


def integer_power_sections(n: int, sample_time: float) -> np.ndarray:
    """
    Bilinear image of s^n as |n| first-order sections.

    Args:
        n (int): Integer exponent; negative values give integrators
        sample_time (float): Sampling time in seconds

    Returns:
        np.ndarray: ``(|n|, 6)`` section array, empty for n = 0
    """
    c = 2.0 / sample_time
    sos = np.zeros((abs(n), 6))
    if n > 0:
        sos[:] = [c, -c, 0.0, 1.0, 1.0, 0.0]
    elif n < 0:
        sos[:] = [1.0 / c, 1.0 / c, 0.0, 1.0, -1.0, 0.0]
    return sos


def fractional_power_sections(gamma: float, cfg: OustaloupConfig, sample_time: float) -> np.ndarray:
    """
    Discrete approximation of s^gamma for gamma in [-2, 2].

    The floor of gamma is realized exactly; only a nonzero fractional part
    goes through the Oustaloup filter.

    Returns:
        np.ndarray: Section array; empty means the identity
    """
    integer_part = math.floor(gamma)
    frac_part = gamma - integer_part
    parts = [integer_power_sections(integer_part, sample_time)]
    if frac_part > 0:
        parts.append(oustaloup_sections(frac_part, cfg, sample_time))
    return np.vstack(parts) if parts else np.zeros((0, 6))


def sections_impulse(sos: np.ndarray, n: int) -> np.ndarray:
    """Impulse response of a section cascade over n+1 samples."""
    delta = np.zeros(n + 1)
    delta[0] = 1.0
    if sos.shape[0] == 0:
        return delta
    return signal.sosfilt(sos, delta)


def sections_to_tf(sos: np.ndarray, sample_time: float) -> DiscreteTf:
    """Collapse a section cascade into one DiscreteTf (inspection only)."""
    if sos.shape[0] == 0:
        return DiscreteTf.constant(1.0, sample_time)
    b, a = signal.sos2tf(sos)
    return DiscreteTf(b, a, sample_time)


@dataclass(frozen=True, eq=False)
class DiscreteController:
    """
    Discretized FO-PID controller.

    Attributes:
        params (FoPidParams): Parameters it was built from
        integral_sections (np.ndarray): Cascade realizing s^-lambda
        derivative_sections (np.ndarray): Cascade realizing s^mu
        branch_impulses (dict): Unscaled impulse response of each branch
        impulse (Sequence): Combined impulse response c_0..c_N
    """

    params: FoPidParams
    integral_sections: np.ndarray
    derivative_sections: np.ndarray
    branch_impulses: Dict[str, np.ndarray]
    impulse: Sequence

    @property
    def leading_value(self) -> float:
        return float(self.impulse.values[0])

    @property
    def is_biproper(self) -> bool:
        return self.leading_value != 0.0

    def branch_tfs(self) -> Dict[str, DiscreteTf]:
        """Branch transfer functions (unscaled), for inspection and export."""
        ts = self.impulse.sample_time
        return {
            "proportional": DiscreteTf.constant(1.0, ts),
            "integral": sections_to_tf(self.integral_sections, ts),
            "derivative": sections_to_tf(self.derivative_sections, ts),
        }


def fopid_discrete(phi: FoPidParams, cfg: OustaloupConfig, sample_time: float, n: int) -> DiscreteController:
    """
    Assemble and discretize C(z; phi) = K_fp + K_fi s^-lambda + K_fd s^mu.

    Args:
        phi (FoPidParams): Controller parameters
        cfg (OustaloupConfig): Oustaloup settings for the fractional parts
        sample_time (float): Sampling time in seconds
        n (int): Last sample index of the impulse response

    Returns:
        DiscreteController: Branch set plus combined impulse response
    """
    if n < 0:
        raise InvalidParameterError(f"n must be nonnegative, got {n}")
    integral = fractional_power_sections(-phi.lam, cfg, sample_time)
    derivative = fractional_power_sections(phi.mu, cfg, sample_time)

    branches = {
        "proportional": sections_impulse(np.zeros((0, 6)), n),
        "integral": sections_impulse(integral, n),
        "derivative": sections_impulse(derivative, n),
    }
    combined = (phi.k_fp * branches["proportional"]
                + phi.k_fi * branches["integral"]
                + phi.k_fd * branches["derivative"])
    controller = DiscreteController(
        params=phi,
        integral_sections=integral,
        derivative_sections=derivative,
        branch_impulses=branches,
        impulse=Sequence(combined, sample_time),
    )
    if not controller.is_biproper:
        logger.debug(f"Controller {phi} has a zero leading impulse value and cannot be inverted")
    return controller
