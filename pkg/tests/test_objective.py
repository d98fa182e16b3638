import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from fotune.exceptions import InvalidParameterError
from fotune.fictref import DataRecord
from fotune.lti import ContinuousTf, Sequence, closed_loop_impulse, impulse_response, tustin
from fotune.objective import (
    WeightScheme,
    data_barrier,
    evaluate_data_driven,
    evaluate_simulated,
    iae_data_driven,
    iae_from_t,
    iae_simulated,
    itae_data_driven,
    itae_from_t,
    itae_simulated,
    noise_bias,
    prefilter_moving_average,
    saturated_weight,
    simulation_barrier,
    weighted_error,
)
from fotune.optimizer import PsoConfig, pso_minimize
from fotune.pipeline import add_measurement_noise, controller_impulse

TS = 0.01


def test_itae_of_perfect_tracking_is_zero():
    t = Sequence.impulse(100, TS)
    assert itae_from_t(t, 1.0, WeightScheme.linear(TS)) == 0.0
    assert iae_from_t(t, 1.0) == 0.0


def test_itae_hand_computation():
    # y = [0.5, 1, 1], errors [0.5, 0, 0] at tau = [0, ts, 2ts]; IAE 0.5, ITAE 0
    t = Sequence([0.5, 0.5, 0.0], TS)
    assert itae_from_t(t, 1.0, WeightScheme.linear(TS)) == 0.0
    assert iae_from_t(t, 1.0) == pytest.approx(0.5)
    # y = [0, 0, 1]: errors [1, 1, 0]; ITAE = 0 + ts
    t = Sequence([0.0, 0.0, 1.0], TS)
    assert itae_from_t(t, 1.0, WeightScheme.linear(TS)) == pytest.approx(TS)


def test_itae_with_unit_sample_time():
    # y = [0.5, 0.75, 0.75], errors [0.5, 0.25, 0.25], weights [0, 1, 2]
    t = Sequence([0.5, 0.25, 0.0], 1.0)
    assert itae_from_t(t, 1.0, WeightScheme.linear(1.0)) == pytest.approx(0.75)


def test_saturated_weight_properties():
    alpha = 5.0
    tau = np.linspace(0.0, 20 * alpha, 2001)
    sat = saturated_weight(tau, alpha)
    assert np.all(sat < alpha)
    assert np.all(np.diff(sat) > 0)
    small = np.linspace(1e-6, alpha / 10, 200)
    assert np.all(np.abs(saturated_weight(small, alpha) - small) / small <= 0.05)
    with pytest.raises(InvalidParameterError):
        saturated_weight(1.0, 0.0)


def test_weight_schemes():
    assert_allclose(WeightScheme.linear(TS).weights(3), [0.0, TS, 2 * TS, 3 * TS])
    assert_allclose(WeightScheme.flat(TS).weights(2), [1.0, 1.0, 1.0])
    sat = WeightScheme.saturated(TS, 2.0)
    assert sat.describe() == "saturated(alpha=2)"
    assert np.max(sat.weights(1000)) < 2.0
    with pytest.raises(InvalidParameterError):
        WeightScheme.saturated(TS, -1.0)


def test_data_driven_itae_equals_simulated(toy3_data, random_phis, third_order_plant, short_cfg):
    n = toy3_data.horizon
    p_imp = third_order_plant.impulse(TS, n)
    w = WeightScheme.linear(TS)
    for phi in random_phis:
        c_imp = controller_impulse(phi, short_cfg, n)
        j_data = itae_data_driven(toy3_data, c_imp, 1.0, w)
        j_sim = itae_simulated(p_imp, c_imp, 1.0, w)
        assert abs(j_data - j_sim) / j_sim <= 1e-6


def test_data_driven_iae_equals_simulated(toy3_data, random_phis, third_order_plant, short_cfg):
    n = toy3_data.horizon
    p_imp = third_order_plant.impulse(TS, n)
    for phi in random_phis:
        c_imp = controller_impulse(phi, short_cfg, n)
        j_data = iae_data_driven(toy3_data, c_imp, 1.0)
        j_sim = iae_simulated(p_imp, c_imp, 1.0)
        assert abs(j_data - j_sim) / j_sim <= 1e-6


def test_saturated_data_driven_criterion_equals_simulated(toy3_data, random_phis, third_order_plant, short_cfg):
    n = toy3_data.horizon
    p_imp = third_order_plant.impulse(TS, n)
    w = WeightScheme.saturated(TS, 2.0)
    c_imp = controller_impulse(random_phis[3], short_cfg, n)
    j_data = evaluate_data_driven(toy3_data, c_imp, 1.0, w)
    j_sim = evaluate_simulated(p_imp, c_imp, 1.0, w)
    assert j_data.feasible and j_sim.feasible
    assert j_data.r_tilde is not None
    assert abs(j_data.value - j_sim.value) / j_sim.value <= 1e-6


def test_non_invertible_controller_gets_data_barrier(toy3_data):
    c_imp = Sequence(np.zeros(toy3_data.horizon + 1), TS)
    result = evaluate_data_driven(toy3_data, c_imp, 1.0, WeightScheme.linear(TS))
    assert not result.feasible
    assert result.value == data_barrier(toy3_data)
    assert result.value == pytest.approx(1e12 * (1.0 + np.sum(np.abs(toy3_data.y.values))))


def test_singular_reference_gets_barrier():
    data = DataRecord(Sequence([1.0, 0.5, 0.5], TS), Sequence([-1.0, 0.2, 0.3], TS))
    value = itae_data_driven(data, Sequence.impulse(2, TS), 1.0, WeightScheme.linear(TS))
    assert value == data_barrier(data)


def test_algebraic_loop_gets_simulation_barrier():
    p_imp = Sequence([-1.0, 0.0, 0.0], TS)
    c_imp = Sequence.impulse(2, TS)
    w = WeightScheme.linear(TS)
    result = evaluate_simulated(p_imp, c_imp, 1.0, w)
    assert not result.feasible
    assert result.value == simulation_barrier(1.0, w, 2)


def test_divergent_loop_is_clipped_to_an_infeasible_barrier():
    # 1/(s - 10) under a gain of 0.1 keeps a pole near 9.9: huge but finite over 5 s
    p_imp = impulse_response(tustin(ContinuousTf([1.0], [1.0, -10.0]), TS), 500)
    c_imp = Sequence(0.1 * Sequence.impulse(500, TS).values, TS)
    w = WeightScheme.linear(TS)
    result = evaluate_simulated(p_imp, c_imp, 1.0, w)
    assert result.value == simulation_barrier(1.0, w, 500)
    assert not result.feasible
    assert result.reason


def test_barrier_dominates_feasible_values(toy3_data, random_phis, short_cfg):
    w = WeightScheme.linear(TS)
    barrier = data_barrier(toy3_data)
    for phi in random_phis[:5]:
        c_imp = controller_impulse(phi, short_cfg, toy3_data.horizon)
        assert itae_data_driven(toy3_data, c_imp, 1.0, w) < barrier


@pytest.mark.parametrize("fraction", [0.01, 0.05, 0.10])
def test_noise_decomposition_sums_to_noisy_criterion(toy3_data, phi0, short_cfg, fraction):
    data = DataRecord(toy3_data.u.padded(201), toy3_data.y.padded(201))
    std = fraction * float(np.ptp(data.y.values))
    noisy, noise = add_measurement_noise(data, std, seed=3)
    c_imp = controller_impulse(phi0, short_cfg, data.horizon)
    w = WeightScheme.linear(TS)
    dec = noise_bias(noisy, noise, c_imp, 1.0, w)
    total = float(np.sum(np.abs(dec.ell.values + dec.d.values)))
    assert abs(total - dec.j_noisy) <= 1e-10 * dec.j_noisy


def test_noise_bias_vanishes_without_noise(toy3_data, phi0, short_cfg):
    noisy, noise = add_measurement_noise(toy3_data, 0.0)
    c_imp = controller_impulse(phi0, short_cfg, toy3_data.horizon)
    dec = noise_bias(noisy, noise, c_imp, 1.0, WeightScheme.linear(TS))
    assert np.all(dec.d.values == 0.0)
    assert_allclose(dec.t_clean.values, dec.t_noisy.values)


def test_prefilter_moving_average():
    y = Sequence([0.0, 3.0, 0.0, 3.0, 0.0], TS)
    smoothed = prefilter_moving_average(y, 3).values
    assert_allclose(smoothed, [1.5, 1.0, 2.0, 1.0, 1.5])
    assert_allclose(prefilter_moving_average(Sequence([0.0, 3.0, 0.0], TS), 3).values, [1.5, 1.0, 1.5])
    with pytest.raises(InvalidParameterError):
        prefilter_moving_average(y, 4)
    with pytest.raises(InvalidParameterError):
        prefilter_moving_average(y, 7)


def test_true_closed_loop_criterion_is_positive(third_order_plant, phi0, short_cfg):
    p_imp = third_order_plant.impulse(TS, 100)
    t = closed_loop_impulse(p_imp, controller_impulse(phi0, short_cfg, 100))
    assert itae_from_t(t, 1.0, WeightScheme.linear(TS)) > 0


@pytest.mark.parametrize("factor", [0.25, 3.0, 40.0])
def test_scaling_the_weights_keeps_the_minimizer(toy1_data, short_cfg, factor):
    space = short_cfg.space
    n = toy1_data.horizon
    w = WeightScheme.linear(TS)
    pso = PsoConfig(population=8, max_evaluations=64, seed=5)

    def objective(scale):
        def evaluate(x):
            c_imp = controller_impulse(space.to_params(x), short_cfg, n)
            result = evaluate_data_driven(toy1_data, c_imp, 1.0, w)
            if not result.feasible:
                return scale * result.value
            return float(np.sum(np.abs(scale * weighted_error(result.t_est, 1.0, w).values)))
        return evaluate

    reference = pso_minimize(objective(1.0), space.search_bounds(), pso)
    scaled = pso_minimize(objective(factor), space.search_bounds(), pso)
    assert_array_equal(scaled.best_x, reference.best_x)
    assert scaled.best_f == pytest.approx(factor * reference.best_f, rel=1e-12)
