import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from fotune.exceptions import ConfigError, DataInvalidError
from fotune.frac import FoPidParams
from fotune.objective import Criterion
from fotune.storage import (
    read_data_csv,
    read_outcome,
    read_phi,
    read_plant_file,
    resolve_plant,
    write_data_csv,
    write_outcome_json,
)

TS = 0.01


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_data_csv_round_trip_is_exact(toy3_data, tmp_path):
    path = str(tmp_path / "data" / "toy3.csv")
    write_data_csv(toy3_data, path)
    loaded = read_data_csv(path)
    assert_array_equal(loaded.u.values, toy3_data.u.values)
    assert_array_equal(loaded.y.values, toy3_data.y.values)
    assert loaded.sample_time == toy3_data.sample_time
    assert loaded.meta == toy3_data.meta


def test_data_csv_first_input_must_be_nonzero(tmp_path):
    path = _write(tmp_path / "zero.csv", "# sample_time=0.01\nk,t,u,y\n0,0,0,0\n1,0.01,1,0.1\n")
    with pytest.raises(DataInvalidError, match="u_0"):
        read_data_csv(path)


@pytest.mark.parametrize("text", [
    "k,t,u,y\n0,0,1,0\n",
    "# sample_time=fast\nk,t,u,y\n0,0,1,0\n",
    "# sample_time=0.01\nk,u,y\n0,1,0\n",
    "# sample_time=0.01\nk,t,u,y\n",
    "# sample_time=0.01\nk,t,u,y\n0,0,1,abc\n",
    "# sample_time=0.01\nk,t,u,y\n0,0,1,0\n2,0.02,1,0\n",
    "# sample_time=0.01\nk,t,u,y\n0,0,1\n",
])
def test_malformed_data_csv(tmp_path, text):
    with pytest.raises(DataInvalidError):
        read_data_csv(_write(tmp_path / "bad.csv", text))


def test_hand_written_data_csv(tmp_path):
    path = _write(tmp_path / "hand.csv",
                  "# sample_time=0.5\n\nk,t,u,y\n0,0,2,0\n1,0.5,1,0.25\n2,1.0,1,0.5\n")
    data = read_data_csv(path)
    assert data.sample_time == 0.5
    assert data.horizon == 2
    assert data.meta == path


def test_continuous_plant_file(tmp_path):
    plant = read_plant_file(_write(tmp_path / "lag.txt", "# first-order lag\ndomain=ct\nnum=1\nden=2,1\n"))
    assert plant.label == "lag"
    assert plant.ct_tf.dc_gain() == 1.0
    assert plant.impulse(TS, 10).values.shape == (11,)


def test_discrete_plant_file(tmp_path):
    path = _write(tmp_path / "d.txt", "domain=dt\nnum=0,1\nden=1,-0.5\nsample_time=0.01\nlabel=P_dt\n")
    plant = resolve_plant(f"file:{path}")
    assert plant.label == "P_dt"
    np.testing.assert_allclose(plant.impulse(TS, 3).values, [0.0, 1.0, 0.5, 0.25])


@pytest.mark.parametrize("text", [
    "domain=ct\nnum=1\n",
    "domain=dt\nnum=1\nden=1,1\n",
    "domain=laplace\nnum=1\nden=1,1\n",
    "domain=ct\nnum=1,0,0\nden=1,1\n",
    "domain=ct\nnum=1\nden=1,1\ngain=2\n",
])
def test_malformed_plant_file(tmp_path, text):
    with pytest.raises(ConfigError):
        read_plant_file(_write(tmp_path / "plant.txt", text))


def test_missing_plant_file_and_preset(tmp_path):
    with pytest.raises(ConfigError):
        resolve_plant(f"file:{tmp_path / 'nowhere.txt'}")
    with pytest.raises(ConfigError):
        resolve_plant("bogus")
    assert resolve_plant("reduced").label == "P_reduced"


def test_read_phi():
    assert read_phi("1, 0.5, 0.2, 0.9, 0.7") == FoPidParams(1.0, 0.5, 0.2, 0.9, 0.7)
    with pytest.raises(ConfigError):
        read_phi("1,2,3")
    with pytest.raises(ConfigError):
        read_phi("1,2,3,x,5")


def test_read_outcome(tmp_path):
    summary = {"strategy": "FR-ITAE-min", "criterion": "itae",
               "phi_star": {"kfp": 1.5, "kfi": 0.2, "kfd": 0.4, "lambda": 0.9, "mu": 0.8},
               "objective_value": 0.125}
    write_outcome_json(summary, str(tmp_path / "run" / "outcome.json"))
    stored = read_outcome(str(tmp_path / "run"))
    assert stored.strategy == "FR-ITAE-min"
    assert stored.criterion is Criterion.ITAE
    assert stored.phi_star == FoPidParams(1.5, 0.2, 0.4, 0.9, 0.8)
    assert stored.objective_value == 0.125


def test_read_outcome_errors(tmp_path):
    with pytest.raises(ConfigError, match="No outcome"):
        read_outcome(str(tmp_path))
    (tmp_path / "outcome.json").write_text("{not json")
    with pytest.raises(ConfigError, match="Invalid JSON"):
        read_outcome(str(tmp_path))
    (tmp_path / "outcome.json").write_text(json.dumps({"strategy": "x", "criterion": "itae"}))
    with pytest.raises(ConfigError, match="incomplete"):
        read_outcome(str(tmp_path))
