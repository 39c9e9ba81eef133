import json
import math

import numpy as np
import pytest

from beltrami_scope.errors import ConfigError
from beltrami_scope.fields import ConstantField, Perturbed, Scaled, Sum
from beltrami_scope.geometry import TubeChart
from beltrami_scope.synthetic import SyntheticDiscField
from scripts.config import (
    RunConfig,
    build_chart,
    build_disc,
    build_field,
    build_metric,
    is_disc_fixture,
    load_config,
    parse_config,
)
from scripts.grid_format import export_grid


def test_defaults():
    config = parse_config({"field": {"kind": "builtin", "name": "twisted-tube"}})
    assert config.chart.R == 1.0
    assert config.chart.L == pytest.approx(2.0 * math.pi)
    assert config.metric.kind == "euclidean"
    assert config.require_transverse
    assert build_chart(config).R == 1.0


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        parse_config({"field": {"kind": "builtin", "name": "twisted-tube"}, "colour": "blue"})
    with pytest.raises(ConfigError):
        parse_config({"field": {"kind": "builtin", "name": "hopf"}})


def test_nested_field_tree_builds():
    config = parse_config(
        {
            "field": {
                "kind": "perturbed",
                "amplitude": 1e-4,
                "seed": 3,
                "field": {
                    "kind": "sum",
                    "first": {"kind": "builtin", "name": "lundquist", "scale": -1.0},
                    "second": {"kind": "scaled", "factor": 0.0, "field": {"kind": "builtin", "name": "twisted-tube"}},
                },
            }
        }
    )
    field = build_field(config.field, build_chart(config))
    assert isinstance(field, Perturbed)
    assert isinstance(field.field, Sum)
    assert isinstance(field.field.second, Scaled)
    assert not is_disc_fixture(config.field)


def test_synthetic_tree_is_a_disc_fixture():
    config = parse_config(
        {
            "field": {
                "kind": "scaled",
                "factor": 2.0,
                "field": {"kind": "synthetic", "points": [{"position": [0.1, 0.0], "kind": "source", "sigma": -1}]},
            },
            "assume_lambda_sign": 1,
        }
    )
    assert is_disc_fixture(config.field)
    field = build_field(config.field, build_chart(config))
    assert isinstance(field.field, SyntheticDiscField)


def test_metric_and_disc():
    config = parse_config(
        {
            "field": {"kind": "builtin", "name": "twisted-tube"},
            "metric": {"kind": "conformal", "factor": 2.0},
            "disc": {"z0": 0.5, "bump": 0.1},
        }
    )
    g, mu = build_metric(config)
    pts = np.zeros((1, 3))
    assert g.norm(pts, [[1.0, 0.0, 0.0]])[0] == pytest.approx(2.0)
    assert mu.density(pts)[0] == pytest.approx(8.0)
    disc = build_disc(config, build_chart(config))
    assert disc.z0 == 0.5
    assert disc.bump == 0.1


def test_euclidean_metric_takes_no_factor():
    config = parse_config({"field": {"kind": "builtin", "name": "twisted-tube"}, "metric": {"factor": 3.0}})
    with pytest.raises(ConfigError):
        build_metric(config)


def test_grid_leaf_must_share_the_chart(tmp_path):
    path = export_grid(ConstantField([0.0, 0.0, 1.0]), TubeChart(2.0, 3.0), (4, 4, 4), tmp_path / "g.bsg")
    spec = {"kind": "grid", "path": str(path)}
    matching = parse_config({"field": spec, "chart": {"R": 2.0, "L": 3.0}})
    assert build_field(matching.field, build_chart(matching)).shape == (4, 4, 4)
    mismatched = parse_config({"field": spec})
    with pytest.raises(ConfigError):
        build_field(mismatched.field, build_chart(mismatched))


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"field": {"kind": "builtin", "name": "figure-five"}, "assume_lambda_sign": 1}))
    assert load_config(path).assume_lambda_sign == 1
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_schema_names_the_field_kinds():
    schema = json.dumps(RunConfig.model_json_schema())
    for kind in ("builtin", "grid", "synthetic", "scaled", "sum", "perturbed"):
        assert f'"{kind}"' in schema
