"""Shared fixtures: toy plants, small configurations and recorded data."""

import numpy as np
import pytest

from fotune.frac import FoPidParams
from fotune.lti import ContinuousTf
from fotune.optimizer import PsoConfig
from fotune.pipeline import PlantModel, TuningConfig, collect_closed_loop_data

TS = 0.01


@pytest.fixture
def first_order_plant():
    return PlantModel("toy1", ct_tf=ContinuousTf([1.0], [1.0, 1.0]))


@pytest.fixture
def third_order_plant():
    return PlantModel("toy3", ct_tf=ContinuousTf([1.0], [1.0, 3.0, 3.0, 1.0]))


@pytest.fixture
def short_cfg():
    """5 s horizon (N = 500) and a small swarm."""
    return TuningConfig(sample_time=TS, horizon_seconds=5.0,
                        pso=PsoConfig(population=12, max_evaluations=240, seed=0))


@pytest.fixture
def phi0():
    return FoPidParams(1.0, 0.0, 1.0, 0.0, 1.0)


@pytest.fixture
def toy3_data(third_order_plant, phi0, short_cfg):
    return collect_closed_loop_data(third_order_plant, phi0, short_cfg)


@pytest.fixture
def toy1_data(first_order_plant, phi0, short_cfg):
    return collect_closed_loop_data(first_order_plant, phi0, short_cfg)


@pytest.fixture
def random_phis():
    """Twenty admissible controllers in a moderate, stabilizing range."""
    rng = np.random.default_rng(1234)
    return [FoPidParams(rng.uniform(0.5, 3.0), rng.uniform(0.1, 1.0), rng.uniform(0.0, 0.5),
                        rng.uniform(0.5, 1.5), rng.uniform(0.2, 1.0))
            for _ in range(20)]
