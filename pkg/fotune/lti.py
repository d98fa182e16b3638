"""
Finite-Horizon LTI Algebra
==========================

Discrete SISO LTI building blocks used by every tuning strategy:
- Sequence: finite real time series at a fixed sampling time
- ContinuousTf / DiscreteTf: rational transfer functions
- Tustin discretization, impulse responses, truncated convolution
- Deconvolution by forward substitution of the lower-triangular Toeplitz system
- Closed-loop composition on truncated impulse responses

All loop algebra works on impulse-response sequences of length N+1 instead of
expanded polynomial quotients, so every identity is exact at the horizon.
"""

import logging
from dataclasses import dataclass
from typing import Sequence as SequenceLike, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import signal

from fotune.exceptions import (
    AlgebraicLoopError,
    DiscretizationError,
    InvalidSequenceError,
    NonFiniteError,
    SampleTimeMismatchError,
    SingularityError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[SequenceLike[float], np.ndarray]


def _frozen_array(values: ArrayLike, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise InvalidSequenceError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidSequenceError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Sequence:
    """
    Finite real time series u_0..u_N sampled every ``sample_time`` seconds.

    Holds recorded signals as well as impulse responses.
    """

    values: np.ndarray
    sample_time: float

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, "Sequence values"))
        if not (np.isfinite(self.sample_time) and self.sample_time > 0):
            raise InvalidSequenceError(f"sample_time must be strictly positive, got {self.sample_time}")
        object.__setattr__(self, "sample_time", float(self.sample_time))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, index):
        return self.values[index]

    @property
    def horizon(self) -> int:
        """Last sample index N."""
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.sample_time

    def with_values(self, values: ArrayLike) -> "Sequence":
        return Sequence(values, self.sample_time)

    def padded(self, length: int) -> "Sequence":
        """Zero-pad (or truncate) to ``length`` samples."""
        out = np.zeros(length)
        m = min(length, self.values.size)
        out[:m] = self.values[:m]
        return Sequence(out, self.sample_time)

    @classmethod
    def impulse(cls, n: int, sample_time: float) -> "Sequence":
        """Unit impulse of length n+1."""
        values = np.zeros(n + 1)
        values[0] = 1.0
        return cls(values, sample_time)

    @classmethod
    def constant(cls, value: float, n: int, sample_time: float) -> "Sequence":
        return cls(np.full(n + 1, float(value)), sample_time)


@dataclass(frozen=True, eq=False)
class ContinuousTf:
    """
    Proper rational transfer function in the Laplace variable.

    Coefficients are given in descending powers of s.
    """

    num_coeffs: np.ndarray
    den_coeffs: np.ndarray

    def __post_init__(self):
        num = np.trim_zeros(_frozen_array(self.num_coeffs, "numerator"), "f")
        den = np.trim_zeros(_frozen_array(self.den_coeffs, "denominator"), "f")
        if den.size == 0:
            raise InvalidSequenceError("leading denominator coefficient must be nonzero")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise InvalidSequenceError(
                f"transfer function is improper: numerator degree {num.size - 1} "
                f"exceeds denominator degree {den.size - 1}")
        num.flags.writeable = False
        den.flags.writeable = False
        object.__setattr__(self, "num_coeffs", num)
        object.__setattr__(self, "den_coeffs", den)

    @property
    def order(self) -> int:
        return self.den_coeffs.size - 1

    def evaluate(self, s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        return np.polyval(self.num_coeffs, s) / np.polyval(self.den_coeffs, s)

    def dc_gain(self) -> float:
        den0 = self.den_coeffs[-1]
        if den0 == 0:
            return np.inf
        return float(self.num_coeffs[-1] / den0)

    def series(self, other: "ContinuousTf") -> "ContinuousTf":
        return ContinuousTf(np.polymul(self.num_coeffs, other.num_coeffs),
                            np.polymul(self.den_coeffs, other.den_coeffs))


@dataclass(frozen=True, eq=False)
class DiscreteTf:
    """
    Rational transfer function in z^{-1}.

    Realizes y_k = sum_i b_i u_{k-i} - sum_{i>=1} a_i y_{k-i}; the
    denominator is normalized to a_0 = 1 at construction.
    """

    b_coeffs: np.ndarray
    a_coeffs: np.ndarray
    sample_time: float = 1.0

    def __post_init__(self):
        b = _frozen_array(self.b_coeffs, "b_coeffs")
        a = _frozen_array(self.a_coeffs, "a_coeffs")
        if a[0] == 0:
            raise InvalidSequenceError("a_0 must be nonzero")
        if not (np.isfinite(self.sample_time) and self.sample_time > 0):
            raise InvalidSequenceError(f"sample_time must be strictly positive, got {self.sample_time}")
        b = b / a[0]
        a = a / a[0]
        b.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "b_coeffs", b)
        object.__setattr__(self, "a_coeffs", a)
        object.__setattr__(self, "sample_time", float(self.sample_time))

    @classmethod
    def constant(cls, gain: float, sample_time: float = 1.0) -> "DiscreteTf":
        return cls([gain], [1.0], sample_time)

    @classmethod
    def delay(cls, steps: int = 1, sample_time: float = 1.0) -> "DiscreteTf":
        b = np.zeros(steps + 1)
        b[-1] = 1.0
        return cls(b, [1.0], sample_time)

    def evaluate(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        q = 1.0 / np.asarray(z, dtype=complex)
        return P.polyval(q, self.b_coeffs) / P.polyval(q, self.a_coeffs)

    def dc_gain(self) -> float:
        return float(np.real(self.evaluate(1.0)))

    def series(self, other: "DiscreteTf") -> "DiscreteTf":
        return DiscreteTf(P.polymul(self.b_coeffs, other.b_coeffs),
                          P.polymul(self.a_coeffs, other.a_coeffs),
                          self.sample_time)

    def simulate(self, u: Sequence) -> Sequence:
        """Run the difference equation on ``u``."""
        return u.with_values(signal.lfilter(self.b_coeffs, self.a_coeffs, u.values))


def tustin(g: ContinuousTf, sample_time: float) -> DiscreteTf:
    """
    Discretize with the bilinear substitution s = (2/ts)(1 - z^-1)/(1 + z^-1).

    The map goes through the zero-pole-gain form; numerator excess is filled
    with zeros at z = -1. Because s = 0 maps to z = 1, the numerator is then
    rescaled so the discrete DC gain equals g(0) as evaluated on the returned
    coefficients.

    Args:
        g (ContinuousTf): Proper continuous-time transfer function
        sample_time (float): Sampling time in seconds

    Returns:
        DiscreteTf: Bilinear image with the DC gain preserved

    Raises:
        DiscretizationError: If a pole sits at s = 2/ts or the image is not finite
    """
    if not sample_time > 0:
        raise InvalidSequenceError(f"sample_time must be strictly positive, got {sample_time}")
    c = 2.0 / sample_time
    if not np.any(g.num_coeffs):
        return DiscreteTf([0.0], [1.0], sample_time)

    zeros, poles, gain = signal.tf2zpk(g.num_coeffs, g.den_coeffs)
    if np.any(np.abs(c - poles) <= 1e-12 * c):
        raise DiscretizationError(
            f"bilinear mapping degenerates at 2/ts = {c}: a pole lies on the mapping singularity")
    zeros_d, poles_d, gain_d = signal.bilinear_zpk(zeros, poles, gain, fs=1.0 / sample_time)
    b, a = signal.zpk2tf(zeros_d, poles_d, gain_d)
    b, a = np.real(b), np.real(a)
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))) or a[0] == 0:
        raise DiscretizationError(f"bilinear mapping at 2/ts = {c} produced a degenerate denominator")
    gd = DiscreteTf(b, a, sample_time)

    # poles at s = 0 have no DC gain to keep
    target = g.dc_gain()
    if np.isfinite(target) and target != 0:
        current = gd.dc_gain()
        if np.isfinite(current) and current != 0:
            gd = DiscreteTf(gd.b_coeffs * (target / current), gd.a_coeffs, sample_time)
    return gd


def bilinear_power(n: int, sample_time: float) -> DiscreteTf:
    """
    Bilinear image of the integer operator s^n (integrator chain for n < 0).

    Args:
        n (int): Integer exponent
        sample_time (float): Sampling time in seconds

    Returns:
        DiscreteTf: ((2/ts)(1 - z^-1)/(1 + z^-1))^n
    """
    c = 2.0 / sample_time
    diff = P.polypow([1.0, -1.0], abs(n))
    summ = P.polypow([1.0, 1.0], abs(n))
    if n >= 0:
        return DiscreteTf(c ** n * diff, summ, sample_time)
    return DiscreteTf(summ / c ** abs(n), diff, sample_time)


def impulse_response(g: DiscreteTf, n: int) -> Sequence:
    """
    Impulse response g_0..g_n of a discrete transfer function.

    Args:
        g (DiscreteTf): Transfer function
        n (int): Last sample index

    Returns:
        Sequence: n+1 samples at g's sampling time
    """
    if n < 0:
        raise InvalidSequenceError(f"n must be nonnegative, got {n}")
    delta = Sequence.impulse(n, g.sample_time)
    return g.simulate(delta)


def _aligned(a: Sequence, b: Sequence):
    if not np.isclose(a.sample_time, b.sample_time, rtol=1e-12, atol=0.0):
        raise SampleTimeMismatchError(
            f"sample times differ: {a.sample_time} vs {b.sample_time}")
    length = max(len(a), len(b))
    return a.padded(length).values, b.padded(length).values, length


def conv_trunc(a: Sequence, b: Sequence) -> Sequence:
    """
    Truncated convolution result_k = sum_{i<=k} a_i b_{k-i}.

    The shorter input is zero-padded; the result keeps the common length.

    Raises:
        SampleTimeMismatchError: If the sampling times differ
    """
    av, bv, length = _aligned(a, b)
    return Sequence(np.convolve(av, bv)[:length], a.sample_time)


def deconvolve(a: Sequence, b: Sequence, threshold: float = 0.0) -> Sequence:
    """
    Solve conv_trunc(a, x) = b for x by forward substitution.

    This is the lower-triangular Toeplitz solve with first column ``a``;
    the matrix itself is never formed.

    Args:
        a (Sequence): Toeplitz generator, a_0 != 0
        b (Sequence): Right-hand side
        threshold (float): Singularity guard on |a_0|

    Returns:
        Sequence: Solution x

    Raises:
        SingularityError: If |a_0| <= threshold (or a_0 == 0)
        NonFiniteError: If the solution overflows over the horizon
    """
    av, bv, _ = _aligned(a, b)
    lead = av[0]
    if lead == 0 or abs(lead) <= threshold:
        raise SingularityError(
            f"leading coefficient {lead:.6g} is below the singularity guard {threshold:.6g}",
            leading_value=float(lead), threshold=float(threshold))
    with np.errstate(over="ignore", invalid="ignore"):
        x = signal.lfilter([1.0], av, bv)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("deconvolution diverged to non-finite values within the horizon")
    return Sequence(x, a.sample_time)


def closed_loop_impulse(p_imp: Sequence, c_imp: Sequence) -> Sequence:
    """
    Truncated impulse response of T = PC (1 + PC)^{-1}.

    Args:
        p_imp (Sequence): Plant impulse response
        c_imp (Sequence): Controller impulse response

    Returns:
        Sequence: t with t + g * t = g, g = p * c

    Raises:
        AlgebraicLoopError: If 1 + p_0 c_0 = 0
    """
    g = conv_trunc(p_imp, c_imp)
    lead = 1.0 + g.values[0]
    if abs(lead) <= 1e-14 * max(1.0, abs(g.values[0])):
        raise AlgebraicLoopError(f"ill-posed loop: 1 + p_0 c_0 = {lead:.3g}")
    one_plus_g = g.values.copy()
    one_plus_g[0] += 1.0
    return deconvolve(g.with_values(one_plus_g), g)


def step_response_from_t(t: Sequence, r0: float) -> Sequence:
    """Output under the constant reference r0: y_k = r0 * sum_{i<=k} t_i."""
    return t.with_values(float(r0) * np.cumsum(t.values))
