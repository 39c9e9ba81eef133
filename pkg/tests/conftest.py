import math

import numpy as np
import pytest

from beltrami_scope.disc_index import PlanarField
from beltrami_scope.fields import LundquistField, twisted_tube
from beltrami_scope.geometry import MeridionalDisc, MetricField, TubeChart, VolumeForm
from beltrami_scope.synthetic import figure_five_specs, synthesize_disc_field


@pytest.fixture
def flat():
    g = MetricField.euclidean()
    return g, VolumeForm.metric_volume(g)


@pytest.fixture
def tight_chart():
    return TubeChart(1.0, 2.0 * math.pi)


@pytest.fixture
def tube():
    return twisted_tube()


@pytest.fixture
def lundquist():
    return LundquistField(1.0)


@pytest.fixture
def negative_lundquist():
    return LundquistField(-1.0)


@pytest.fixture
def flat_disc(tight_chart):
    return MeridionalDisc(tight_chart)


@pytest.fixture
def figure_five(tight_chart):
    return synthesize_disc_field(figure_five_specs(), tight_chart)


def planar(func):
    """Wrap a function of (u, v) arrays returning two components as a PlanarField."""
    return PlanarField(lambda uv: np.column_stack(func(uv[:, 0], uv[:, 1])))
