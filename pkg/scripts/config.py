# scripts/config.py
"""Run configuration for the bscope command line.

A run is described by a JSON document validated against RunConfig before
anything is computed. Field trees are tagged by `kind`, so combinators can
wrap builtins, grid files or synthetic disc fixtures.
"""

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from beltrami_scope.config import (
    BOUNDARY_GRID,
    DISC_SCAN_RESOLUTION,
    ORBIT_SEEDS,
    WINDING_SAMPLES,
)
from beltrami_scope.errors import ConfigError
from beltrami_scope.fields import LundquistField, Perturbed, Scaled, Sum, VectorField, twisted_tube
from beltrami_scope.geometry import MeridionalDisc, MetricField, TubeChart, VolumeForm
from beltrami_scope.synthetic import SingularitySpec, figure_five_specs, synthesize_disc_field

BUILTIN_FIELDS = ("twisted-tube", "lundquist", "figure-five")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- Field Tree ---


class BuiltinFieldSpec(_Strict):
    kind: Literal["builtin"] = "builtin"
    name: Literal["twisted-tube", "lundquist", "figure-five"]
    scale: float = Field(1.0, description="Lundquist wavenumber; its sign is the sign of lambda.")


class GridFieldSpec(_Strict):
    kind: Literal["grid"] = "grid"
    path: str = Field(description="Path to a .bsg grid file.")
    method: Literal["linear", "cubic"] = "linear"


class SyntheticPointSpec(_Strict):
    position: tuple[float, float]
    kind: Literal["source", "sink", "saddle", "degree"]
    sigma: Literal[-1, 1] = 1
    degree: int = 1


class SyntheticFieldSpec(_Strict):
    kind: Literal["synthetic"] = "synthetic"
    points: list[SyntheticPointSpec] = Field(default_factory=list)


class ScaledFieldSpec(_Strict):
    kind: Literal["scaled"] = "scaled"
    factor: float
    field: "FieldSpec"


class SumFieldSpec(_Strict):
    kind: Literal["sum"] = "sum"
    first: "FieldSpec"
    second: "FieldSpec"


class PerturbedFieldSpec(_Strict):
    kind: Literal["perturbed"] = "perturbed"
    amplitude: float
    seed: int = 0
    field: "FieldSpec"


FieldSpec = Annotated[
    Union[
        BuiltinFieldSpec,
        GridFieldSpec,
        SyntheticFieldSpec,
        ScaledFieldSpec,
        SumFieldSpec,
        PerturbedFieldSpec,
    ],
    Field(discriminator="kind"),
]

for _model in (ScaledFieldSpec, SumFieldSpec, PerturbedFieldSpec):
    _model.model_rebuild()


# --- Run ---


class ChartSpec(_Strict):
    R: float = Field(1.0, gt=0)
    L: float = Field(2.0 * math.pi, gt=0)


class MetricSpec(_Strict):
    kind: Literal["euclidean", "conformal"] = "euclidean"
    factor: float = Field(1.0, gt=0, description="Length scale c, so that g = c^2 * delta.")


class DiscSpec(_Strict):
    z0: float = 0.0
    bump: float = 0.0
    tilt: float = 0.0


class NumericsSpec(_Strict):
    curl_tol: float | None = Field(None, gt=0, description="Defaults depend on analytic vs sampled input.")
    div_tol: float | None = Field(None, gt=0)
    resolution: int = Field(DISC_SCAN_RESOLUTION, ge=8)
    winding_samples: int = Field(WINDING_SAMPLES, ge=8)
    boundary_grid: int = Field(BOUNDARY_GRID, ge=16)
    orbit_seeds: int = Field(ORBIT_SEEDS, ge=1)


class RunConfig(_Strict):
    field: FieldSpec
    chart: ChartSpec = Field(default_factory=ChartSpec)
    metric: MetricSpec = Field(default_factory=MetricSpec)
    disc: DiscSpec = Field(default_factory=DiscSpec)
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    assume_lambda_sign: Literal[-1, 0, 1] | None = Field(
        None, description="Score disc-only data as the slice of a field with this Sign(lambda)."
    )
    require_transverse: bool = True
    oracle: bool = True
    orbits: bool = True


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        return RunConfig.model_validate(json.loads(path.read_text()))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file is not valid JSON: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"Invalid run config:\n{e}") from e


def parse_config(document: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"Invalid run config:\n{e}") from e


# --- Builders ---


def build_chart(config: RunConfig) -> TubeChart:
    return TubeChart(config.chart.R, config.chart.L)


def build_metric(config: RunConfig) -> tuple[MetricField, VolumeForm]:
    if config.metric.kind == "euclidean":
        if config.metric.factor != 1.0:
            raise ConfigError("The euclidean metric takes no factor; use kind 'conformal'.")
        g = MetricField.euclidean()
    else:
        g = MetricField.conformal(config.metric.factor)
    return g, VolumeForm.metric_volume(g)


def build_disc(config: RunConfig, chart: TubeChart) -> MeridionalDisc:
    return MeridionalDisc(chart, z0=config.disc.z0, bump=config.disc.bump, tilt=config.disc.tilt)


def build_field(spec, chart: TubeChart) -> VectorField:
    """Instantiate a field tree. Grid leaves must share the run's chart."""
    if spec.kind == "builtin":
        if spec.name == "twisted-tube":
            return twisted_tube()
        if spec.name == "lundquist":
            return LundquistField(spec.scale)
        return synthesize_disc_field(figure_five_specs(), chart)
    if spec.kind == "grid":
        from scripts.grid_format import read_grid

        grid = read_grid(spec.path, method=spec.method)
        if not (math.isclose(grid.chart.R, chart.R, rel_tol=1e-9) and math.isclose(grid.chart.L, chart.L, rel_tol=1e-9)):
            raise ConfigError(
                f"Grid {spec.path} was sampled on R={grid.chart.R:g}, L={grid.chart.L:g}, "
                f"but the run uses R={chart.R:g}, L={chart.L:g}."
            )
        return grid
    if spec.kind == "synthetic":
        points = [SingularitySpec(p.position, p.kind, p.sigma, p.degree) for p in spec.points]
        return synthesize_disc_field(points, chart)
    if spec.kind == "scaled":
        return Scaled(spec.factor, build_field(spec.field, chart))
    if spec.kind == "sum":
        return Sum(build_field(spec.first, chart), build_field(spec.second, chart))
    return Perturbed(build_field(spec.field, chart), spec.amplitude, chart, seed=spec.seed)


def is_disc_fixture(spec) -> bool:
    """True when the tree contains a synthetic disc fixture, which is not Beltrami on its own."""
    if spec.kind == "synthetic" or (spec.kind == "builtin" and spec.name == "figure-five"):
        return True
    if spec.kind == "sum":
        return is_disc_fixture(spec.first) or is_disc_fixture(spec.second)
    if spec.kind in ("scaled", "perturbed"):
        return is_disc_fixture(spec.field)
    return False
