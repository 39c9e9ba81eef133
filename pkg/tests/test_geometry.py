import math

import numpy as np
import pytest

from beltrami_scope.errors import ChartDomainError, FieldDataError, NotTransverseError
from beltrami_scope.geometry import (
    MeridionalDisc,
    MetricField,
    TubeChart,
    VolumeForm,
    disc_frame,
    metric_pair,
    orient_boundary,
)


def test_chart_round_trip(tight_chart):
    cyl = np.array([[0.5, 1.0, 2.0], [1.0, 5.0, 0.1]])
    back = tight_chart.to_cylindrical(tight_chart.to_cartesian(cyl))
    np.testing.assert_allclose(back, cyl, atol=1e-12)


def test_chart_rejects_bad_parameters():
    with pytest.raises(ChartDomainError):
        TubeChart(0.0, 1.0)
    with pytest.raises(ChartDomainError):
        TubeChart(1.0, -2.0)


def test_require_inside(tight_chart):
    tight_chart.require_inside([[0.9, 0.0, 3.0]])
    with pytest.raises(ChartDomainError):
        tight_chart.require_inside([[1.5, 0.0, 0.0]])


def test_wrap_dz(tight_chart):
    L = tight_chart.L
    assert tight_chart.wrap_dz(L - 0.1) == pytest.approx(-0.1)
    assert tight_chart.wrap_dz(0.2 + 3 * L) == pytest.approx(0.2)


def test_metric_pair_in_cylindrical_basis():
    chart = TubeChart(3.0, 1.0)
    g = MetricField.euclidean()
    assert metric_pair(g, chart, [2.0, 0.7, 0.0], [0, 1, 0], [0, 1, 0]) == pytest.approx(4.0)
    assert metric_pair(g, chart, [2.0, 0.7, 0.0], [1, 0, 0], [0, 1, 0]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ChartDomainError):
        metric_pair(g, chart, [4.0, 0.0, 0.0], [1, 0, 0], [1, 0, 0])


def test_conformal_metric_scales_lengths():
    g = MetricField.conformal(2.0)
    pts = np.zeros((1, 3))
    assert g.norm(pts, [[1.0, 0.0, 0.0]])[0] == pytest.approx(2.0)


def test_metric_must_be_positive_definite():
    g = MetricField(lambda pts: np.broadcast_to(np.diag([1.0, -1.0, 1.0]), (len(pts), 3, 3)))
    with pytest.raises(FieldDataError):
        g.matrix(np.zeros((2, 3)))


def test_volume_form_orientation(flat):
    g, mu = flat
    pts = np.zeros((1, 3))
    e = np.eye(3)[None]
    assert mu.evaluate(pts, e[:, 0], e[:, 1], e[:, 2])[0] == pytest.approx(1.0)
    assert mu.reversed().evaluate(pts, e[:, 0], e[:, 1], e[:, 2])[0] == pytest.approx(-1.0)


def test_volume_density_must_be_positive():
    mu = VolumeForm(lambda pts: np.zeros(len(pts)))
    with pytest.raises(FieldDataError):
        mu.density(np.zeros((1, 3)))


def test_disc_boundary_lies_on_torus(tight_chart):
    disc = MeridionalDisc(tight_chart, z0=0.5, bump=0.2, tilt=0.1)
    t = np.linspace(0.0, 2.0 * math.pi, 33)
    r = np.hypot(*disc.boundary_curve(t)[:, :2].T)
    np.testing.assert_allclose(r, tight_chart.R)


def test_disc_boundary_velocity_matches_curve(tight_chart):
    disc = MeridionalDisc(tight_chart, bump=0.3, tilt=0.2, lift=(0.1, -0.05, 0.0, 0.05))
    for orientation in (1, -1):
        d = disc.with_orientation(orientation)
        t = np.array([0.3, 1.7, 4.0])
        h = 1e-6
        numeric = (d.boundary_curve(t + h) - d.boundary_curve(t - h)) / (2 * h)
        np.testing.assert_allclose(d.boundary_velocity(t), numeric, atol=1e-6)


def test_lifted_disc_hits_prescribed_boundary_heights(tight_chart):
    lift = (0.2, 0.1, -0.1, -0.2, 0.0, 0.1)
    disc = MeridionalDisc(tight_chart, z0=1.0, lift=lift)
    theta = 2.0 * math.pi * np.arange(len(lift)) / len(lift)
    z = disc.embed(np.column_stack((np.cos(theta), np.sin(theta))))[:, 2]
    np.testing.assert_allclose(z, 1.0 + np.array(lift), atol=1e-12)


def test_disc_frame_is_orthonormal_in_the_metric(tight_chart):
    g = MetricField.conformal(1.5)
    disc = MeridionalDisc(tight_chart, bump=0.4)
    uv = np.array([[0.3, -0.2], [0.0, 0.0], [-0.6, 0.5]])
    t1, t2, n = disc_frame(disc, g, uv)
    pts = disc.embed(uv)
    np.testing.assert_allclose(g.norm(pts, n), 1.0)
    np.testing.assert_allclose(g.pair(pts, n, t1), 0.0, atol=1e-12)
    np.testing.assert_allclose(g.pair(pts, n, t2), 0.0, atol=1e-12)


def test_disc_frame_rejects_points_outside(flat_disc, flat):
    with pytest.raises(ChartDomainError):
        disc_frame(flat_disc, flat[0], [[1.2, 0.0]])


def test_flipping_orientation_flips_normal(flat_disc, flat):
    g, _ = flat
    uv = np.array([[0.1, 0.2]])
    n_plus = flat_disc.frame(g, uv)[2]
    n_minus = flat_disc.with_orientation(-1).frame(g, uv)[2]
    np.testing.assert_allclose(n_plus, -n_minus)
    np.testing.assert_allclose(n_plus, [[0.0, 0.0, 1.0]])


def test_orient_boundary_follows_the_contact_form(flat_disc, flat, tube, negative_lundquist):
    g, _ = flat
    assert orient_boundary(flat_disc, tube, g).orientation == 1
    assert orient_boundary(flat_disc.with_orientation(-1), tube, g).orientation == 1
    assert orient_boundary(flat_disc, negative_lundquist, g).orientation == -1


def test_orient_boundary_rejects_a_meridional_boundary(flat, tube):
    disc = MeridionalDisc(TubeChart(math.pi, 2.0 * math.pi))
    with pytest.raises(NotTransverseError):
        orient_boundary(disc, tube, flat[0])
