import json
import math

import pytest
from hypothesis import given, strategies as st

from qfpsim.config import ConfigError, RunConfig, build_spec, build_stack, load_config, parse_config


def test_empty_object_gives_baseline():
    cfg = parse_config({})
    assert cfg == RunConfig()
    assert (cfg.grid.center_THz, cfg.grid.spacing_GHz, cfg.shaper.M) == (193.0, 15.0, 6)
    assert (cfg.shaper.kappa_sq, cfg.waveguide.loss_dB_per_cm, cfg.ring.radius_um) == (0.01, 0.5, 20.0)
    assert cfg.eom.depth == 0.8283


def test_partial_override():
    cfg = parse_config({"grid": {"spacing_GHz": 5}})
    assert cfg.grid.spacing_GHz == 5.0
    assert cfg.shaper == RunConfig().shaper
    stack = build_stack(cfg)
    assert stack.shaper.grid.spacing == pytest.approx(2 * math.pi * 5e9)


def test_errors_are_path_annotated():
    with pytest.raises(ConfigError) as exc:
        parse_config({"grid": {"spacing_GHz": -5}, "eom": {"colour": 1}})
    paths = [p for p, _ in exc.value.errors]
    assert "grid.spacing_GHz" in paths
    assert "eom.colour" in paths


def test_cross_field_checks():
    with pytest.raises(ConfigError):
        parse_config({"shaper": {"M": 6, "phases": [0, 1]}})
    with pytest.raises(ConfigError):
        build_spec(parse_config({"gate": {"target": "hadamard-parallel"}}))
    with pytest.raises(ConfigError):
        build_spec(parse_config({"gate": {"target": [[1, 0], [0, 1]]}}))


def test_explicit_matrix_with_complex_entries():
    s = 1 / math.sqrt(2)
    cfg = parse_config({"gate": {"target": [[s, [0, s]], [[0, s], s]], "modes": [1, 2]}})
    spec = build_spec(cfg)
    assert spec.target[0, 1] == pytest.approx(1j * s)
    assert spec.computational_modes == (1, 2)


settings_strategy = st.fixed_dictionaries(
    {},
    optional={
        "grid": st.fixed_dictionaries({}, optional={"spacing_GHz": st.floats(0.1, 100)}),
        "shaper": st.fixed_dictionaries(
            {}, optional={"filter_order": st.integers(1, 6), "kappa_sq": st.floats(1e-4, 0.5)}
        ),
        "eom": st.fixed_dictionaries({}, optional={"depth": st.floats(0, 2), "rf_phase": st.floats(-7, 7)}),
        "sweep": st.fixed_dictionaries({}, optional={"steps": st.integers(1, 50), "state": st.sampled_from(["+", "0"])}),
    },
)


@given(settings_strategy)
def test_round_trip(data):
    cfg = parse_config(data)
    again = RunConfig.model_validate_json(cfg.model_dump_json())
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_digest_sensitive_to_content(tmp_path):
    a = parse_config({})
    b = parse_config({"grid": {"spacing_GHz": 14.999}})
    assert a.digest() != b.digest()
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"grid": {"spacing_GHz": 15.0}}))
    assert load_config(path).digest() == a.digest()


def test_load_rejects_non_object(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
