# beltrami_scope/synthetic.py
"""Test fields with prescribed rest points on the flat meridional disc z = 0.

The horizontal part of the field is a complex product with one factor per
rest point, so every prescribed point is a zero of the prescribed index and
there are no others. When the indices add up to one, the product is blended
into the swirl i*w near r = R so the disc boundary is transverse and the
field is tangent to the boundary torus. The vertical part is a sum of bumps
carrying the prescribed sign at each rest point.
"""

import dataclasses
from typing import Literal

import numpy as np

from beltrami_scope.config import MERGE_RADIUS
from beltrami_scope.errors import SynthesisSpecError
from beltrami_scope.fields import VectorField
from beltrami_scope.geometry import TWO_PI, TubeChart

BLEND_START = 0.8
_MAX_TWIST = 0.9 * np.pi


@dataclasses.dataclass(frozen=True)
class SingularitySpec:
    position: tuple[float, float]
    kind: Literal["source", "sink", "saddle", "degree"]
    sigma: int = 1
    degree: int = 1

    @property
    def index(self) -> int:
        if self.kind == "saddle":
            return -1
        if self.kind == "degree":
            return self.degree
        return 1


def _bump(distance: np.ndarray, radius: float) -> np.ndarray:
    s = np.clip(distance / radius, 0.0, 1.0)
    inside = s < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _factor(delta: np.ndarray, index: int) -> np.ndarray:
    return delta**index if index >= 0 else np.conj(delta) ** (-index)


class SyntheticDiscField(VectorField):
    def __init__(self, specs: list[SingularitySpec], chart: TubeChart):
        self.specs = list(specs)
        self.chart = chart
        self._validate()
        self.transverse_boundary = sum(s.index for s in self.specs) == 1
        self._centers = np.array([complex(*s.position) for s in self.specs])
        self._radii = np.array([self._bump_radius(k) for k in range(len(self.specs))])
        self._rotations = np.zeros(len(self.specs))
        self._scale = 1.0
        if self.transverse_boundary:
            ring = BLEND_START * np.exp(1j * TWO_PI * np.arange(256) / 256)
            self._scale = float(np.mean(np.abs(self._product(ring))))
        for k, spec in enumerate(self.specs):
            if spec.kind in ("source", "sink"):
                others = np.prod([_factor(self._centers[k] - self._centers[j], s.index) for j, s in enumerate(self.specs) if j != k])
                lead = (1j if self.transverse_boundary else 1.0) * others
                target = 0.0 if spec.kind == "source" else np.pi
                self._rotations[k] = target - np.angle(lead)

    def _validate(self) -> None:
        positions = [np.asarray(s.position, dtype=float) for s in self.specs]
        for k, (spec, p) in enumerate(zip(self.specs, positions)):
            if spec.kind not in ("source", "sink", "saddle", "degree"):
                raise SynthesisSpecError(f"Unknown rest point kind {spec.kind!r}.")
            if spec.sigma not in (1, -1):
                raise SynthesisSpecError(f"sigma must be +1 or -1, got {spec.sigma}.")
            if spec.kind == "degree" and spec.degree == 0:
                raise SynthesisSpecError("A degree-0 point is not a rest point of a generic field.")
            if np.hypot(*p) >= BLEND_START - 0.05:
                raise SynthesisSpecError(f"Rest point {k} at {p.tolist()} is too close to the boundary.")
            for j in range(k):
                if np.hypot(*(p - positions[j])) <= 2.0 * MERGE_RADIUS:
                    raise SynthesisSpecError(f"Rest points {j} and {k} collide.")
        if sum(s.index for s in self.specs) == 1:
            twist = sum(abs(s.index) * np.arcsin(min(1.0, np.hypot(*p) / BLEND_START)) for s, p in zip(self.specs, positions))
            if twist >= _MAX_TWIST:
                raise SynthesisSpecError("Rest points sit too far out to blend into a transverse boundary.")

    def _bump_radius(self, k: int) -> float:
        center = self._centers[k]
        gaps = [abs(center - c) for j, c in enumerate(self._centers) if j != k]
        return min([0.15, BLEND_START - abs(center) - 0.02] + [0.45 * gap for gap in gaps])

    def _product(self, w: np.ndarray) -> np.ndarray:
        out = np.ones_like(w)
        for spec, center in zip(self.specs, self._centers):
            out = out * _factor(w - center, spec.index)
        return out

    def _planar(self, w: np.ndarray) -> np.ndarray:
        product = self._product(w)
        for center, radius, rotation in zip(self._centers, self._radii, self._rotations):
            if rotation:
                product = product * np.exp(1j * rotation * _bump(np.abs(w - center), radius))
        if not self.transverse_boundary:
            return product
        t = np.clip((np.abs(w) - BLEND_START) / (1.0 - BLEND_START), 0.0, 1.0)
        blend = t * t * (3.0 - 2.0 * t)
        return 1j * ((1.0 - blend) * product / self._scale + blend * w)

    def _evaluate(self, points):
        w = (points[:, 0] + 1j * points[:, 1]) / self.chart.R
        planar = self._planar(w)
        vertical = np.zeros(len(points))
        for spec, center, radius in zip(self.specs, self._centers, self._radii):
            vertical += spec.sigma * _bump(np.abs(w - center), radius)
        if not self.specs:
            vertical += 1.0
        return np.column_stack((planar.real, planar.imag, vertical))

    def describe(self):
        return {
            "kind": "synthetic",
            "points": [dataclasses.asdict(s) for s in self.specs],
        }


def synthesize_disc_field(specs: list[SingularitySpec], chart: TubeChart) -> SyntheticDiscField:
    return SyntheticDiscField(specs, chart)


def _polar(radius: float, degrees: float) -> tuple[float, float]:
    angle = np.radians(degrees)
    return float(radius * np.cos(angle)), float(radius * np.sin(angle))


def figure_five_specs() -> list[SingularitySpec]:
    """Three elliptic points and two saddles of opposite sign: weighted sum 3."""
    return [
        SingularitySpec(_polar(0.4, 90.0), "source", 1),
        SingularitySpec(_polar(0.4, 210.0), "source", 1),
        SingularitySpec(_polar(0.4, 330.0), "sink", 1),
        SingularitySpec(_polar(0.2, 30.0), "saddle", -1),
        SingularitySpec(_polar(0.2, 150.0), "saddle", 1),
    ]
