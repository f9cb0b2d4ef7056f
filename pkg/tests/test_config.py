import json

import pytest

from tnsim.config import ConfigError, parse_run_config, parse_sweep_config


def spinboson(**over):
    d = {"model": "spinboson", "solver": "tdvp",
         "spinboson": {"alpha": 0.1, "s": 0.5, "omega_c": 10.0, "n_modes": 2, "d_b": 3},
         "tdvp": {"dt": 0.05, "n_steps": 10, "max_bond": 4}, "seed": 3}
    d.update(over)
    return d


def retinal(n_theta):
    return {"model": "retinal", "solver": "tdvp",
            "retinal": {"inertia": 4000.0, "W0": 3.6, "W1": 1.19, "E1": 2.48, "omega_c": 0.19, "kappa_c": 0.1,
                        "lam": 0.19, "bath": [[0.05, 0.01]], "n_theta": n_theta, "d_modes": 3,
                        "full_model": False},
            "tdvp": {"dt": 1.0, "n_steps": 2}}


def test_even_n_theta_names_field():
    with pytest.raises(ConfigError) as err:
        parse_run_config(retinal(10))
    assert "n_theta" in str(err.value)
    parse_run_config(retinal(11))


@pytest.mark.parametrize("data,field", [
    (spinboson(extra=1), "extra"),
    (spinboson(solver="mc"), "solver"),
    ({**spinboson(), "ising2d": {"nx": 2, "ny": 2}}, "ising2d"),
    (spinboson(seed="1"), "seed"),
    ({**spinboson(), "tdvp": {"dt": 0.05}}, "n_steps"),
    ({**spinboson(), "tdvp": {"dt": 0.05, "n_steps": 2, "scheme": "leapfrog"}}, "scheme"),
    ({**spinboson(), "spinboson": {"alpha": "big"}}, "alpha"),
    ({**spinboson(), "spinboson": {"d_b": 2.5}}, "d_b"),
    ({**retinal(11), "solver": "dmrg", "dmrg": {}, "tdvp": None}, "tdvp"),
])
def test_schema_errors_name_the_field(data, field):
    data = {k: v for k, v in data.items() if v is not None}
    with pytest.raises(ConfigError) as err:
        parse_run_config(data)
    assert field in str(err.value)


def test_retinal_dmrg_rejected():
    data = retinal(11)
    del data["tdvp"]
    data["solver"] = "dmrg"
    with pytest.raises(ConfigError, match="retinal"):
        parse_run_config(data)


def test_round_trip_and_hash():
    cfg = parse_run_config(spinboson())
    again = parse_run_config(json.loads(json.dumps(cfg.to_dict())))
    assert again.hash() == cfg.hash()
    assert cfg.with_overrides({"spinboson.alpha": 0.2}).hash() != cfg.hash()
    assert cfg.spinboson().alpha == 0.1 and cfg.tdvp().max_bond == 4


def test_override_bad_path():
    cfg = parse_run_config(spinboson())
    with pytest.raises(ConfigError, match="dmrg"):
        cfg.with_overrides({"dmrg.bonds": [4]})
    with pytest.raises(ConfigError, match="n_modes"):
        cfg.with_overrides({"spinboson.n_modes": 0})


def test_dmrg_schedule_views():
    base = {"model": "ising2d", "solver": "dmrg", "ising2d": {"nx": 2, "ny": 2}}
    cfg = parse_run_config({**base, "dmrg": {"bonds": [4, 8], "noise": 1e-4}})
    sched = cfg.dmrg_schedule()
    assert [s.max_bond for s in sched.sweeps] == [4, 8]
    cfg = parse_run_config({**base, "dmrg": {"sweeps": [{"max_bond": 6, "noise": 0.0}]}})
    assert cfg.dmrg_schedule().sweeps[0].max_bond == 6
    with pytest.raises(ConfigError, match="both"):
        parse_run_config({**base, "dmrg": {"bonds": [4], "sweeps": [{"max_bond": 4}]}})
    with pytest.raises(ConfigError, match="h_values"):
        parse_run_config({**base, "ising2d": {"nx": 2, "ny": 2, "h_values": []}})


class TestSweepConfig:
    def test_grid_order(self):
        scfg = parse_sweep_config({"base": spinboson(),
                                   "axes": {"spinboson.alpha": [0.3, 0.1, 0.2], "spinboson.s": [0.7, 0.5]}})
        grid = scfg.grid()
        assert len(grid) == 6
        keys = [(g["spinboson.alpha"], g["spinboson.s"]) for g in grid]
        assert keys == sorted(keys)

    def test_errors(self):
        with pytest.raises(ConfigError, match="axes"):
            parse_sweep_config({"base": spinboson(), "axes": {}})
        with pytest.raises(ConfigError, match="duplicate"):
            parse_sweep_config({"base": spinboson(), "axes": {"spinboson.alpha": [0.1, 0.1]}})
        with pytest.raises(ConfigError, match="max_parallel"):
            parse_sweep_config({"base": spinboson(), "axes": {"spinboson.alpha": [0.1]}, "max_parallel": 0})
        # every grid point is validated up front
        with pytest.raises(ConfigError, match="d_b"):
            parse_sweep_config({"base": spinboson(), "axes": {"spinboson.d_b": [3, 0]}})
