import json
import math

import numpy as np
import pytest

from rfwigner.config import (ConfigError, RunConfig, decoherence_budget, load_config,
                             rates_from_physical)
from rfwigner.dynamics import Setup
from rfwigner.modefilter import FilterKind


def test_defaults():
    cfg = RunConfig()
    assert cfg.omega == pytest.approx(1 / math.sqrt(8))
    assert cfg.trajectories == 1000 and cfg.angles == 20 and cfg.bins == 100
    assert np.allclose(np.rad2deg(cfg.thetas()), 4.5 * np.arange(20))
    assert cfg.edges()[0] == -5.0 and cfg.edges()[-1] == 5.0 and cfg.edges().size == 101
    assert cfg.tol == 1e-6 and cfg.max_iter == 20000
    assert cfg.channels().setup is Setup.SEMI_INFINITE


@pytest.mark.parametrize("changes, field", [
    ({"setup": "ring"}, "setup"),
    ({"setup": "infinite", "gamma1": 0.5, "gamma2": 0.0}, "gamma2"),
    ({"gamma2": 0.5}, "gamma2"),
    ({"omega": -1.0}, "omega"),
    ({"dt": 0.0}, "dt"),
    ({"T": 1.0005}, "T"),
    ({"trajectories": 0}, "trajectories"),
    ({"cutoff": 1.5}, "cutoff"),
    ({"x_min": 5.0}, "x_max"),
    ({"seed": -1}, "seed"),
    ({"filter": "gauss"}, "filter"),
    ({"filter": "custom"}, "filter_file"),
    ({"gamma_phi": float("nan")}, "gamma_phi"),
])
def test_invalid_configs_name_the_field(changes, field):
    with pytest.raises(ConfigError) as err:
        RunConfig(**changes)
    assert err.value.field == field


def test_round_trip_and_unknown_keys(tmp_path):
    cfg = RunConfig(omega=0.3, seed=9)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"omgea": 0.3})
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"gamma-phi": 0.1, "T": 2.0}))
    assert load_config(path) == {"gamma_phi": 0.1, "T": 2.0}


def test_filters_from_config():
    assert RunConfig().mode_filter().kind is FilterKind.BOXCAR
    f = RunConfig(filter="exponential").mode_filter()
    assert f.kind is FilterKind.EXPONENTIAL and f.rate == 1.0


def test_physical_units():
    assert rates_from_physical(20.0, 20.0, 40.0) == {"gamma_phi": 1e-3, "gamma_nr": 2e-3}
    rates = decoherence_budget()
    assert rates["gamma_nr"] + 2 * rates["gamma_phi"] == pytest.approx(89 / 20e3)
    assert rates["gamma_nr"] == pytest.approx(2 * rates["gamma_phi"])
    with pytest.raises(ConfigError):
        rates_from_physical(0.0)
