import math

import numpy as np
import pytest
from scipy import special

from beltrami_scope.boundary import (
    TorusLineField,
    boundary_foliation,
    check_invariance,
    classify_boundary,
    reeb_component_sanity,
)
from beltrami_scope.errors import VanishingFieldError
from beltrami_scope.fields import AffineField, ConstantField, LundquistField, Perturbed
from beltrami_scope.geometry import TWO_PI, MetricField, TubeChart
from beltrami_scope.reports import BoundaryClassification


def _grid(n_theta, n_z, L):
    theta = TWO_PI * np.arange(n_theta) / n_theta
    z = L * np.arange(n_z) / n_z
    return np.meshgrid(theta, z, indexing="ij")


def test_tube_is_invariant(tube, flat, tight_chart):
    report = check_invariance(tube, flat[0], tight_chart)
    assert report.passed
    assert report.max_radial < 1e-12


def test_radial_field_is_flagged(flat, tight_chart):
    radial = AffineField(np.diag([0.1, 0.1, 0.0]), offset=(0.0, 0.0, 1.0))
    report = check_invariance(radial, flat[0], tight_chart)
    assert not report.passed
    assert report.max_radial == pytest.approx(0.1 / math.sqrt(1.01), rel=1e-6)


def test_vanishing_boundary_field(flat, tight_chart):
    with pytest.raises(VanishingFieldError):
        check_invariance(ConstantField([0.0, 0.0, 0.0]), flat[0], tight_chart)


def test_foliation_is_perpendicular_to_the_field(tube, tight_chart):
    g = MetricField.conformal(1.7)
    F = boundary_foliation(tube, g, tight_chart, (16, 8))
    dots = np.einsum("...i,...ij,...j->...", F.directions, F.metric, F.components)
    np.testing.assert_allclose(dots, 0.0, atol=1e-12)
    lengths = np.einsum("...i,...ij,...j->...", F.directions, F.metric, F.directions)
    np.testing.assert_allclose(lengths, 1.0)


@pytest.mark.parametrize("R", [1.0, 2.5])
def test_tube_has_a_transverse_circle(R, tube, flat):
    chart = TubeChart(R, TWO_PI)
    result = classify_boundary(boundary_foliation(tube, flat[0], chart, (64, 64)))
    assert result.kind == "TransversalExists"
    assert result.witness_kind == "circle"
    assert result.witness_min_angle == pytest.approx(math.asin(math.sin(R)), rel=1e-6)


def test_tube_at_the_first_zero_is_meridional(tube, flat):
    chart = TubeChart(3.14159, 6.28318)
    result = classify_boundary(boundary_foliation(tube, flat[0], chart, (64, 64)))
    assert result.kind == "MeridionalFoliation"
    assert result.witness_z is None


@pytest.mark.parametrize(
    ("offset", "kind"),
    [(-0.1, "TransversalExists"), (0.0, "MeridionalFoliation"), (0.1, "TransversalExists")],
)
def test_lundquist_boundary_flips_at_the_first_bessel_zero(offset, kind, flat):
    chart = TubeChart(special.jn_zeros(1, 1)[0] + offset, TWO_PI)
    result = classify_boundary(boundary_foliation(LundquistField(1.0), flat[0], chart, (64, 64)))
    assert result.kind == kind


def test_tiny_perturbation_stays_invariant(tube, flat, tight_chart):
    assert check_invariance(Perturbed(tube, 1e-9, tight_chart), flat[0], tight_chart).passed
    assert not check_invariance(Perturbed(tube, 1e-3, tight_chart), flat[0], tight_chart).passed


def test_graph_witness_when_no_circle_is_transverse(tight_chart):
    theta, _ = _grid(64, 32, tight_chart.L)
    components = np.stack((np.cos(2 * theta), np.sin(theta)), axis=-1)
    result = classify_boundary(TorusLineField.from_components(tight_chart, components))
    assert result.kind == "TransversalExists"
    assert result.witness_kind == "graph"
    assert result.diagnostics["gain"] == 2.0
    assert len(result.witness_z) == 64
    assert result.witness_min_angle > 0


def test_reeb_component_fixture(tight_chart):
    L = tight_chart.L
    theta, z = _grid(64, 64, L)
    components = np.stack((np.sin(TWO_PI * z / L) * (np.cos(theta) + 0.5), -np.ones_like(z)), axis=-1)
    result = classify_boundary(TorusLineField.from_components(tight_chart, components))
    assert result.kind == "ReebComponent"
    np.testing.assert_allclose(result.closed_leaves, [0.0, L / 2], atol=1e-9)


def test_reeb_sanity_warning():
    reeb = BoundaryClassification(kind="ReebComponent", closed_leaves=[0.0, 1.0])
    assert "informational" in reeb_component_sanity(reeb, beltrami_passed=False)[0]
    assert len(reeb_component_sanity(reeb, beltrami_passed=True)) == 1
    assert reeb_component_sanity(BoundaryClassification(kind="MeridionalFoliation"), True) == []
