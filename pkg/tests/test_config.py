import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kppfront.config import GridConfig, RunConfig, SimConfig, SolverConfig, WeightConfig
from kppfront.errors import CriticalOrSubcriticalSpeed, NotNormalized, ValidationError

pos = st.floats(1e-6, 1e3, allow_nan=False)

configs = st.builds(
    RunConfig,
    nonlinearity=st.sampled_from(["fisher", "cubic", [0.0, 1.0, -1.0]]),
    kernel=st.sampled_from([[1.0], [4 / 3, -1 / 3], [-0.5, 1.5]]),
    c=st.floats(2.1, 10.0),
    h_list=st.lists(pos, min_size=1, max_size=4, unique=True).map(lambda v: sorted(v, reverse=True)),
    grid=st.builds(GridConfig, L=st.none() | pos, m=st.integers(1, 4)),
    weight=st.builds(WeightConfig, epsilon=st.none() | pos),
    solver=st.builds(SolverConfig, tol=pos, max_iter=st.integers(1, 500), ball_radius=pos),
    sim=st.builds(SimConfig, dt=st.none() | pos, T=pos, J=st.none() | st.integers(10, 10 ** 5)),
    seed=st.integers(0, 2 ** 31),
    output=st.text("abcxyz/_", min_size=1, max_size=12),
)


@given(configs)
def test_round_trip(cfg):
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


@given(configs)
def test_generated_configs_validate(cfg):
    g, kernel = cfg.validate()
    assert kernel.K == len(cfg.kernel)


def test_defaults_materialized():
    d = RunConfig().to_dict()
    assert d["h_list"] == [0.1, 0.05, 0.025]
    assert d["solver"]["tol"] == 1e-12 and d["seed"] == 0
    assert set(d) >= {"grid", "weight", "solver", "sim", "probe", "output"}


@pytest.mark.parametrize("patch, exc", [
    ({"c": 2.0}, CriticalOrSubcriticalSpeed),
    ({"kernel": [0.9]}, NotNormalized),
    ({"h_list": []}, ValidationError),
    ({"h_list": [0.05, 0.1]}, ValidationError),
    ({"solver": {"tol": 0.0}}, ValidationError),
    ({"sim": {"T": -1.0}}, ValidationError),
    ({"kernel": 1.0}, ValidationError),
])
def test_invalid_configs(patch, exc):
    cfg = RunConfig.from_dict(patch)
    with pytest.raises(exc):
        cfg.validate()


def test_parse_errors():
    with pytest.raises(ValidationError):
        RunConfig.from_json("{not json")
    with pytest.raises(ValidationError):
        RunConfig.from_dict({"speed": 3})
    with pytest.raises(ValidationError):
        RunConfig.from_dict({"grid": {"N": 3}})
    with pytest.raises(ValidationError):
        RunConfig.from_dict([1, 2])


def test_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"c": 4.0, "grid": {"m": 3}}))
    cfg = RunConfig.load(p)
    assert cfg.c == 4.0 and cfg.grid.m == 3 and cfg.grid.L is None
