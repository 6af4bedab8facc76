"""Configuration parsing, validation, and lossless round-trips."""

import json
import math

import pytest

from vortexlab.config import ExperimentConfig, first_radius
from vortexlab.errors import ConfigError


def minimal_dict(**overrides):
    data = {
        "grid": {"L": 10.0, "n": 64},
        "solver": {"nu": 1e-3, "t_end": 0.2},
        "layout": [{"center": [5.0, 5.0], "eps": 0.5, "a": 1.0}],
    }
    data.update(overrides)
    return data


def test_minimal_config_parses_with_defaults():
    cfg = ExperimentConfig.from_dict(minimal_dict())
    assert cfg.solver.cfl == 0.4
    assert cfg.solver.dealias is True
    assert cfg.pv.dt == 1e-3
    assert cfg.layout[0].profile == "gaussian"
    assert cfg.seed == 0


def test_round_trip_is_lossless(tmp_path):
    data = minimal_dict(
        solver={"nu": 1.2345678901234567e-3, "t_end": 0.7, "diag_times": [0.0, 0.35, 0.7]},
        metrics={"R": [0.125], "p": [4.0], "gamma": 1.75, "beta": 2.5},
        sweep={"eps": [0.1, 0.2], "nu": [1e-4], "jobs": 2},
    )
    cfg = ExperimentConfig.from_dict(data)
    d1 = cfg.to_dict()
    d2 = ExperimentConfig.from_dict(d1).to_dict()
    assert d1 == d2
    path = tmp_path / "cfg.json"
    cfg.save(path)
    assert ExperimentConfig.load(path).to_dict() == d1
    # exact float preservation through the file form
    assert json.loads(path.read_text())["solver"]["nu"] == 1.2345678901234567e-3


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict(minimal_dict(extra={"x": 1}))
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict(minimal_dict(grid={"L": 10.0, "n": 64, "spacing": 1}))


def test_missing_sections_rejected():
    with pytest.raises(ConfigError, match="missing"):
        ExperimentConfig.from_dict({"grid": {"L": 10.0, "n": 64}})


@pytest.mark.parametrize(
    "patch,message",
    [
        ({"grid": {"L": 10.0, "n": 63}}, "even"),
        ({"grid": {"L": -1.0, "n": 64}}, "positive"),
        ({"solver": {"nu": -1e-3}}, "nonnegative"),
        ({"solver": {"nu": 1e-3, "cfl": 1.5}}, "cfl"),
        ({"layout": [{"center": [5.0, 5.0], "eps": -0.1, "a": 1.0}]}, "eps"),
        ({"layout": [{"center": [5.0, 5.0], "eps": 0.5, "a": 0.0}]}, "nonzero"),
        ({"layout": [{"center": [50.0, 5.0], "eps": 0.5, "a": 1.0}]}, "outside"),
        ({"layout": [{"center": [5.0, 5.0], "eps": 0.5, "a": 1.0, "profile": "square"}]}, "profile"),
    ],
)
def test_invalid_values_rejected(patch, message):
    with pytest.raises(ConfigError, match=message):
        ExperimentConfig.from_dict(minimal_dict(**patch))


def test_diag_times_resolution():
    cfg = ExperimentConfig.from_dict(minimal_dict(solver={"nu": 0.0, "t_end": 1.0, "diag_count": 5}))
    assert cfg.solver.resolve_diag_times() == [0.0, 0.25, 0.5, 0.75, 1.0]
    cfg = ExperimentConfig.from_dict(minimal_dict(solver={"nu": 0.0, "t_end": 0.0}))
    assert cfg.solver.resolve_diag_times() == [0.0]
    explicit = [0.0, 0.1, 0.2]
    cfg = ExperimentConfig.from_dict(
        minimal_dict(solver={"nu": 0.0, "t_end": 0.2, "diag_times": explicit})
    )
    assert cfg.solver.resolve_diag_times() == explicit


def test_overrides_replace_eps_and_nu():
    cfg = ExperimentConfig.from_dict(minimal_dict())
    derived = cfg.with_overrides(eps=0.25, nu=5e-4)
    assert derived.layout[0].eps == 0.25
    assert derived.solver.nu == 5e-4
    assert cfg.layout[0].eps == 0.5  # original untouched


def test_first_radius_fallbacks():
    cfg = ExperimentConfig.from_dict(minimal_dict(metrics={"R": [0.7]}))
    assert first_radius(cfg, 3.0) == 0.7
    cfg = ExperimentConfig.from_dict(minimal_dict())
    assert first_radius(cfg, 3.0) == pytest.approx(0.5)
    assert first_radius(cfg, math.inf) == pytest.approx(2.5)
