"""Full-protocol run on the fourth-order preset; deselected by default (``pytest -m slow``)."""

import pytest

from fotune.objective import WeightScheme, itae_data_driven
from fotune.optimizer import PsoConfig
from fotune.pipeline import (
    TuningConfig,
    collect_closed_loop_data,
    controller_impulse,
    evaluate_controller,
    plant_preset,
    tune_fr,
)
from fotune.report import compare_report


@pytest.mark.slow
def test_one_shot_tuning_on_the_full_plant():
    cfg = TuningConfig(pso=PsoConfig(population=150, max_evaluations=9000, seed=0))
    plant = plant_preset("full")
    data = collect_closed_loop_data(plant, cfg.phi0, cfg)
    assert data.horizon == 2500

    outcome = tune_fr(data, cfg)
    j0 = itae_data_driven(data, controller_impulse(cfg.phi0, cfg, data.horizon), cfg.setpoint,
                          WeightScheme.linear(cfg.sample_time))
    assert outcome.objective_value <= j0

    realized = evaluate_controller(plant, outcome.phi_star, cfg)
    assert realized.stable
    assert abs(realized.itae - outcome.objective_value) <= 1e-6 * realized.itae
    assert realized.steady_state_error <= 0.01

    report = compare_report([outcome], plant, cfg)
    assert report.rows[0].relative_gap <= 1e-6
