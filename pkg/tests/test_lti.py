import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import solve_triangular, toeplitz

from fotune.exceptions import (
    AlgebraicLoopError,
    DiscretizationError,
    InvalidSequenceError,
    NonFiniteError,
    SampleTimeMismatchError,
    SingularityError,
)
from fotune.frac import integer_power_sections, sections_impulse
from fotune.lti import (
    ContinuousTf,
    DiscreteTf,
    Sequence,
    bilinear_power,
    closed_loop_impulse,
    conv_trunc,
    deconvolve,
    impulse_response,
    step_response_from_t,
    tustin,
)

TS = 0.01


def test_sequence_rejects_bad_input():
    with pytest.raises(InvalidSequenceError):
        Sequence([], TS)
    with pytest.raises(InvalidSequenceError):
        Sequence([1.0, np.nan], TS)
    with pytest.raises(InvalidSequenceError):
        Sequence([1.0], 0.0)


def test_sequence_is_immutable():
    s = Sequence([1.0, 2.0], TS)
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    assert s.horizon == 1
    assert_allclose(s.times, [0.0, TS])


def test_improper_continuous_tf_rejected():
    with pytest.raises(InvalidSequenceError):
        ContinuousTf([1.0, 0.0, 0.0], [1.0, 1.0])


def test_discrete_tf_normalizes_denominator():
    g = DiscreteTf([2.0, 4.0], [2.0, -1.0], TS)
    assert_allclose(g.b_coeffs, [1.0, 2.0])
    assert_allclose(g.a_coeffs, [1.0, -0.5])
    with pytest.raises(InvalidSequenceError):
        DiscreteTf([1.0], [0.0, 1.0], TS)


@pytest.mark.parametrize("num, den", [
    ([1.0], [1.0, 1.0]),
    ([2.0, 1.0], [1.0, 3.0, 2.0]),
    ([1.0], [1.0, 3.0, 3.0, 1.0]),
    ([0.5, 0.0, 4.0], [1.0, 0.6, 2.0]),
    ([1.0], np.polymul(np.polymul([1.0, 1.0], [1.0, 0.3, 1.0]), [0.1, 1.0])),
])
def test_tustin_preserves_dc_gain(num, den):
    g = ContinuousTf(num, den)
    gd = tustin(g, TS)
    assert abs(gd.dc_gain() - g.dc_gain()) <= 1e-10 * abs(g.dc_gain())


def test_tustin_first_order_coefficients():
    # 1/(s+1) -> (1 + z^-1) / ((c+1) + (1-c) z^-1), c = 2/ts
    c = 2.0 / TS
    gd = tustin(ContinuousTf([1.0], [1.0, 1.0]), TS)
    assert_allclose(gd.b_coeffs, np.array([1.0, 1.0]) / (c + 1.0))
    assert_allclose(gd.a_coeffs, [1.0, (1.0 - c) / (1.0 + c)])


def test_tustin_rejects_pole_on_the_mapping_singularity():
    with pytest.raises(DiscretizationError):
        tustin(ContinuousTf([1.0], [1.0, -2.0 / TS]), TS)


def test_tustin_keeps_integrators_and_zero_plants():
    # 1/s -> (ts/2)(1 + z^-1)/(1 - z^-1)
    gd = tustin(ContinuousTf([1.0], [1.0, 0.0]), TS)
    assert_allclose(gd.b_coeffs, [TS / 2, TS / 2])
    assert_allclose(gd.a_coeffs, [1.0, -1.0])
    zero = tustin(ContinuousTf([0.0], [1.0, 1.0]), TS)
    assert np.all(impulse_response(zero, 5).values == 0.0)


def test_bilinear_power_matches_integer_sections():
    for n in (-2, -1, 1, 2):
        from_tf = impulse_response(bilinear_power(n, TS), 20).values
        from_sections = sections_impulse(integer_power_sections(n, TS), 20)
        assert_allclose(from_tf, from_sections, rtol=1e-12, atol=1e-12)


def test_conv_trunc_pads_shorter_input():
    a = Sequence([1.0, 2.0, 3.0], TS)
    b = Sequence([1.0, 1.0], TS)
    assert_allclose(conv_trunc(a, b).values, [1.0, 3.0, 5.0])


def test_conv_trunc_rejects_sample_time_mismatch():
    with pytest.raises(SampleTimeMismatchError):
        conv_trunc(Sequence([1.0], TS), Sequence([1.0], 0.02))


def test_deconvolve_matches_dense_triangular_solve():
    rng = np.random.default_rng(7)
    a = np.concatenate([[2.0], 0.1 * rng.standard_normal(49)])
    b = rng.standard_normal(50)
    x = deconvolve(Sequence(a, TS), Sequence(b, TS)).values
    dense = solve_triangular(toeplitz(a, np.zeros(50)), b, lower=True)
    assert_allclose(x, dense, rtol=1e-10, atol=1e-10)
    assert abs(x[0] - b[0] / a[0]) <= 1e-12 * abs(b[0] / a[0])


def test_deconvolve_inverts_convolution():
    a = Sequence([1.0, 0.5, 0.25, 0.0, 0.1], TS)
    x = Sequence([0.3, -1.0, 2.0, 0.5, 0.0], TS)
    assert_allclose(deconvolve(a, conv_trunc(a, x)).values, x.values, atol=1e-14)


def test_deconvolve_singular_and_divergent():
    with pytest.raises(SingularityError) as info:
        deconvolve(Sequence([0.0, 1.0], TS), Sequence([1.0, 1.0], TS))
    assert info.value.leading_value == 0.0
    with pytest.raises(SingularityError):
        deconvolve(Sequence([1e-9, 1.0], TS), Sequence([1.0, 1.0], TS), threshold=1e-6)
    with pytest.raises(NonFiniteError):
        deconvolve(Sequence([1e-3, 1.0], TS), Sequence(np.ones(400), TS))


def test_closed_loop_of_delay_and_unit_controller():
    # T = z^-1 / (1 + z^-1) = z^-1 - z^-2 + z^-3 ...
    p = impulse_response(DiscreteTf.delay(1, TS), 6)
    c = Sequence.impulse(6, TS)
    t = closed_loop_impulse(p, c)
    assert_allclose(t.values, [0.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


def test_closed_loop_matches_rational_formula():
    gd = tustin(ContinuousTf([1.0], [1.0, 2.0, 1.0]), TS)
    p = impulse_response(gd, 300)
    c = Sequence(2.0 * Sequence.impulse(300, TS).values, TS)
    t = closed_loop_impulse(p, c)
    # T = 2P / (1 + 2P) = 2b / (a + 2b)
    b = np.pad(gd.b_coeffs, (0, len(gd.a_coeffs) - len(gd.b_coeffs)))
    expected = impulse_response(DiscreteTf(2.0 * b, gd.a_coeffs + 2.0 * b, TS), 300)
    assert_allclose(t.values, expected.values, rtol=1e-9, atol=1e-12)


def test_algebraic_loop_detected():
    p = Sequence([-1.0, 0.0, 0.0], TS)
    c = Sequence([1.0, 0.0, 0.0], TS)
    with pytest.raises(AlgebraicLoopError):
        closed_loop_impulse(p, c)


def test_step_response_is_scaled_cumulative_sum():
    t = Sequence([0.5, 0.25, 0.0, 0.0], TS)
    assert_allclose(step_response_from_t(t, 2.0).values, [1.0, 1.5, 1.5, 1.5])


def test_series_impulse_is_truncated_convolution():
    g1 = tustin(ContinuousTf([1.0], [1.0, 1.0]), TS)
    g2 = tustin(ContinuousTf([1.0, 2.0], [1.0, 0.4, 4.0]), TS)
    n = 300
    series = impulse_response(g1.series(g2), n)
    convolved = conv_trunc(impulse_response(g1, n), impulse_response(g2, n))
    scale = np.max(np.abs(convolved.values))
    assert_allclose(series.values, convolved.values, rtol=1e-9, atol=1e-12 * scale)
