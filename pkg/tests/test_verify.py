import math

import numpy as np
import pytest
from scipy import special

from beltrami_scope.disc_index import compute_index, compute_slk
from beltrami_scope.fields import ConstantField, LundquistField
from beltrami_scope.geometry import MeridionalDisc, TubeChart
from beltrami_scope.synthetic import SingularitySpec, synthesize_disc_field
from beltrami_scope.verify import (
    PolyCurve,
    calibrate,
    cross_validate,
    find_closed_orbits,
    gauss_linking,
    integrate_flowline,
    orbit_seeds,
    slk_pushoff_oracle,
)


def _circle(center, axes, samples=200):
    t = 2.0 * math.pi * np.arange(samples) / samples
    first, second = (np.asarray(a, dtype=float) for a in axes)
    return np.asarray(center, dtype=float) + np.outer(np.cos(t), first) + np.outer(np.sin(t), second)


def test_hopf_link():
    first = _circle((0, 0, 0), ((1, 0, 0), (0, 1, 0)))
    second = _circle((1, 0, 0), ((1, 0, 0), (0, 0, 1)))
    assert abs(gauss_linking(first, second)) == pytest.approx(1.0, abs=1e-6)
    assert gauss_linking(first, second) == pytest.approx(gauss_linking(second, first), abs=1e-9)


def test_separated_circles_do_not_link():
    first = _circle((0, 0, 0), ((1, 0, 0), (0, 1, 0)))
    second = _circle((5, 0, 0), ((1, 0, 0), (0, 0, 1)))
    assert gauss_linking(first, second) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("R", [1.0, 2.5])
def test_oracle_agrees_with_the_disc_count_on_the_tube(R, tube, flat):
    g, _ = flat
    disc = MeridionalDisc(TubeChart(R, 2.0 * math.pi))
    oracle = slk_pushoff_oracle(tube, disc, g)
    assert oracle.slk == compute_slk(tube, disc, g).slk == -1
    assert oracle.rounding_residual < 0.1
    assert oracle.push_distance == pytest.approx(0.01 * R)


def test_oracle_agrees_beyond_the_first_zero_on_a_bumped_disc(tube, flat):
    g, _ = flat
    disc = MeridionalDisc(TubeChart(4.0, 2.0 * math.pi), bump=0.2)
    oracle = slk_pushoff_oracle(tube, disc, g)
    assert oracle.slk == compute_slk(tube, disc, g).slk == 1


@pytest.mark.parametrize(("scale", "expected"), [(1.0, -1), (-1.0, 1)])
def test_oracle_agrees_on_lundquist(scale, expected, flat_disc, flat):
    g, _ = flat
    field = LundquistField(scale)
    assert slk_pushoff_oracle(field, flat_disc, g).slk == compute_slk(field, flat_disc, g).slk == expected


def test_oracle_on_the_figure_five(figure_five, flat_disc, flat):
    g, _ = flat
    assert slk_pushoff_oracle(figure_five, flat_disc, g).slk == compute_slk(figure_five, flat_disc, g).slk == -3


def test_oracle_on_a_source_saddle_source_disc(flat_disc, flat, tight_chart):
    g, _ = flat
    specs = [
        SingularitySpec((-0.4, 0.0), "source", 1),
        SingularitySpec((0.0, 0.1), "saddle", 1),
        SingularitySpec((0.4, 0.0), "source", 1),
    ]
    field = synthesize_disc_field(specs, tight_chart)
    assert slk_pushoff_oracle(field, flat_disc, g).slk == compute_slk(field, flat_disc, g).slk == -1


def test_flowline_of_a_constant_field(tight_chart):
    curve = integrate_flowline(ConstantField([0.0, 0.0, 1.0]), [0.5, 0.0, 0.0], tight_chart.L, tight_chart)
    np.testing.assert_allclose(curve.points[:, :2], [[0.5, 0.0]] * len(curve.points), atol=1e-9)
    assert curve.points[-1, 2] == pytest.approx(tight_chart.L)
    assert curve.winding() == (0, 1)


def test_polycurve_winding_around_the_core(tight_chart):
    t = 2.0 * math.pi * np.arange(64) / 64
    loop = PolyCurve(np.column_stack((0.5 * np.cos(t), 0.5 * np.sin(t), np.zeros_like(t))), tight_chart, closed=True)
    assert loop.winding() == (1, 0)


def test_orbit_seeds_are_inside(tight_chart):
    seeds = orbit_seeds(tight_chart, 16)
    assert seeds.shape == (16, 3)
    assert np.all(np.hypot(seeds[:, 0], seeds[:, 1]) < tight_chart.R)


def test_contractible_orbit_at_the_first_zero(tube):
    chart = TubeChart(math.pi, 2.0 * math.pi)
    orbits = find_closed_orbits(tube, chart, seeds=[[1.7, 0.0, 0.5]])
    assert orbits
    orbit = orbits[0]
    assert orbit.contractible
    assert orbit.winding == (1, 0)
    assert orbit.period == pytest.approx(math.pi**2, abs=1e-4)
    assert orbit.mean_radius == pytest.approx(math.pi / 2, abs=1e-5)
    assert orbit.closure_residual < 1e-6 * math.pi


def test_cross_validation_is_inconclusive_for_index_zero(lundquist, flat, tight_chart):
    g, mu = flat
    report = compute_index(lundquist, g, mu, tight_chart, energy=False)
    result = cross_validate(report, lundquist, tight_chart)
    assert result.status == "inconclusive"
    assert result.orbits_found == 0
    assert result.witness is None


def test_cross_validation_confirms_a_forced_orbit(lundquist, flat):
    g, mu = flat
    chart = TubeChart(special.jn_zeros(1, 1)[0], 2.0 * math.pi)
    report = compute_index(lundquist, g, mu, chart, energy=False)
    assert report.verdict == "OrbitForced"
    result = cross_validate(report, lundquist, chart, seeds=[[2.3, 0.0, 0.5]])
    assert result.status == "confirmed"
    witness = result.witness
    assert witness.contractible
    assert witness.winding == (1, 0)
    radius = special.jn_zeros(0, 1)[0]
    assert witness.mean_radius == pytest.approx(radius, abs=1e-5)
    assert witness.period == pytest.approx(2.0 * math.pi * radius / special.j1(radius), rel=1e-5)


def test_core_orbit_is_not_contractible(lundquist, tight_chart):
    core = integrate_flowline(lundquist, [0.0, 0.0, 0.0], tight_chart.L, tight_chart)
    assert core.winding() == (0, 1)
    (orbit,) = find_closed_orbits(lundquist, tight_chart, seeds=[[0.0, 0.0, 0.0]])
    assert orbit.winding == (0, 1)
    assert not orbit.contractible
    assert orbit.period == pytest.approx(tight_chart.L)


def test_calibration_is_stable():
    result = calibrate((64, 97))
    assert result.s_star == -1
    assert result.stable
    assert [run.weighted_sum for run in result.runs] == [1, 1]
    assert all(run.oracle_slk == -1 for run in result.runs)
