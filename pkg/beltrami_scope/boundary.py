# beltrami_scope/boundary.py
"""Characteristic foliation of the boundary torus r = R and its trichotomy.

Vectors tangent to the torus are written in the orthonormal Euclidean frame
(e_theta, e_z); the induced metric h of g is carried alongside so angles and
rotations are measured in g.
"""

import dataclasses
import logging

import numpy as np
from scipy.integrate import solve_ivp
from scipy.ndimage import map_coordinates
from scipy.optimize import brentq

from beltrami_scope.config import (
    BOUNDARY_GRID,
    CLOSED_LEAF_TOLERANCE,
    INVARIANCE_TOLERANCE,
    MERIDIONAL_TOLERANCE,
    TRANSVERSE_MIN_ANGLE,
    VANISHING_FIELD_FLOOR,
)
from beltrami_scope.errors import VanishingFieldError
from beltrami_scope.fields import VectorField
from beltrami_scope.geometry import TWO_PI, MetricField, TubeChart
from beltrami_scope.reports import BoundaryClassification, InvarianceReport

logger = logging.getLogger(__name__)

_GRAPH_GAINS = (0.5, 1.0, 2.0, 4.0, 8.0)
_TURNING_FLOOR = 1e-6


def check_invariance(
    field: VectorField,
    g: MetricField,
    chart: TubeChart,
    tol: float = INVARIANCE_TOLERANCE,
    grid: tuple[int, int] = (64, 32),
) -> InvarianceReport:
    """Largest relative radial component dr(X) / |X| over the boundary torus."""
    thetas = TWO_PI * np.arange(grid[0]) / grid[0]
    zs = chart.L * np.arange(grid[1]) / grid[1]
    pts = chart.boundary_points(thetas, zs)
    vectors = field(pts)
    e_r = chart.frame(pts)[0]
    radial = np.abs(np.einsum("ni,ni->n", vectors, e_r))
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms < VANISHING_FIELD_FLOOR):
        raise VanishingFieldError("Field vanishes on the boundary torus.", min_norm=float(norms.min()))
    worst = float(np.max(radial / norms))
    return InvarianceReport(max_radial=worst, tolerance=tol, passed=worst < tol)


@dataclasses.dataclass
class TorusLineField:
    """Foliation directions on a (theta, z) grid of the boundary torus.

    components holds the frame coefficients (a, b) of X = a e_theta + b e_z,
    metric the induced metric in that frame and directions the h-unit
    +90 degree rotation of X. When field is set, witnesses are re-checked
    against the field itself rather than the grid.
    """

    chart: TubeChart
    thetas: np.ndarray
    zs: np.ndarray
    components: np.ndarray
    metric: np.ndarray
    directions: np.ndarray
    field: VectorField | None = None
    g: MetricField | None = None

    @classmethod
    def from_components(cls, chart: TubeChart, components: np.ndarray) -> "TorusLineField":
        """Build from frame coefficients on a uniform grid, with the flat induced metric."""
        components = np.asarray(components, dtype=float)
        n_theta, n_z, _ = components.shape
        metric = np.broadcast_to(np.eye(2), (n_theta, n_z, 2, 2)).copy()
        return cls(
            chart,
            TWO_PI * np.arange(n_theta) / n_theta,
            chart.L * np.arange(n_z) / n_z,
            components,
            metric,
            _rotate(components, metric),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.components.shape[:2]

    def sample(self, theta, z) -> tuple[np.ndarray, np.ndarray]:
        """(a, b) coefficients and induced metric at arbitrary torus points."""
        theta = np.asarray(theta, dtype=float).ravel()
        z = np.asarray(z, dtype=float).ravel()
        if self.field is not None:
            pts = self.chart.to_cartesian(np.column_stack((np.full(theta.size, self.chart.R), theta, z)))
            return _frame_data(self.field, self.g, self.chart, pts)
        n_theta, n_z = self.shape
        coords = np.vstack((np.mod(theta, TWO_PI) * n_theta / TWO_PI, np.mod(z, self.chart.L) * n_z / self.chart.L))
        comps = np.stack(
            [map_coordinates(self.components[..., k], coords, order=1, mode="grid-wrap") for k in range(2)],
            axis=-1,
        )
        metric = np.stack(
            [
                map_coordinates(self.metric[..., i, j], coords, order=1, mode="grid-wrap")
                for i in range(2)
                for j in range(2)
            ],
            axis=-1,
        ).reshape(-1, 2, 2)
        return comps, metric


def _frame_data(
    field: VectorField, g: MetricField, chart: TubeChart, pts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    vectors = field(pts)
    _, e_theta, e_z = chart.frame(pts)
    components = np.column_stack(
        (np.einsum("ni,ni->n", vectors, e_theta), np.einsum("ni,ni->n", vectors, e_z))
    )
    metric = np.empty((len(pts), 2, 2))
    metric[:, 0, 0] = g.pair(pts, e_theta, e_theta)
    metric[:, 0, 1] = metric[:, 1, 0] = g.pair(pts, e_theta, e_z)
    metric[:, 1, 1] = g.pair(pts, e_z, e_z)
    return components, metric


def _rotate(components: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """h-unit rotation by +90 degrees in the oriented frame (e_theta, e_z)."""
    det = np.linalg.det(metric)
    turned = np.sqrt(det)[..., None] * np.stack((-components[..., 1], components[..., 0]), axis=-1)
    rotated = np.linalg.solve(metric, turned[..., None])[..., 0]
    size = np.sqrt(np.einsum("...i,...ij,...j->...", rotated, metric, rotated))
    return rotated / size[..., None]


def _h_pair(metric: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...ij,...j->...", u, metric, v)


def boundary_foliation(
    field: VectorField,
    g: MetricField,
    chart: TubeChart,
    grid: tuple[int, int] = (BOUNDARY_GRID, BOUNDARY_GRID),
) -> TorusLineField:
    n_theta, n_z = grid
    thetas = TWO_PI * np.arange(n_theta) / n_theta
    zs = chart.L * np.arange(n_z) / n_z
    pts = chart.boundary_points(thetas, zs)
    components, metric = _frame_data(field, g, chart, pts)
    norms = np.sqrt(_h_pair(metric, components, components))
    if np.any(norms < VANISHING_FIELD_FLOOR):
        raise VanishingFieldError("Field vanishes on the boundary torus.", min_norm=float(norms.min()))
    components = components.reshape(n_theta, n_z, 2)
    metric = metric.reshape(n_theta, n_z, 2, 2)
    return TorusLineField(chart, thetas, zs, components, metric, _rotate(components, metric), field, g)


# --- Classification ---


def _transversality(F: TorusLineField, theta, z, slope) -> np.ndarray:
    """alpha(T) / (|X| |T|) for the curve tangent T = R e_theta + slope e_z."""
    comps, metric = F.sample(theta, z)
    tangent = np.column_stack((np.full(comps.shape[0], F.chart.R), np.asarray(slope, dtype=float).ravel()))
    return _h_pair(metric, comps, tangent) / np.sqrt(
        _h_pair(metric, comps, comps) * _h_pair(metric, tangent, tangent)
    )


def _is_transverse(relative: np.ndarray) -> bool:
    floor = np.sin(TRANSVERSE_MIN_ANGLE)
    return bool(np.all(relative > floor) or np.all(relative < -floor))


def _circle_witness(F: TorusLineField) -> BoundaryClassification | None:
    comps, metric = F.components, F.metric
    e_theta = np.broadcast_to(np.array([1.0, 0.0]), comps.shape)
    along = _h_pair(metric, comps, e_theta) / np.sqrt(_h_pair(metric, comps, comps) * metric[..., 0, 0])
    margins = np.where(
        np.all(along > 0, axis=0), along.min(axis=0), np.where(np.all(along < 0, axis=0), -along.max(axis=0), 0.0)
    )
    row = int(np.argmax(margins))
    if margins[row] <= np.sin(TRANSVERSE_MIN_ANGLE):
        return None
    z0 = float(F.zs[row])
    fine = TWO_PI * np.arange(4 * len(F.thetas)) / (4 * len(F.thetas))
    relative = _transversality(F, fine, np.full(fine.size, z0), np.zeros(fine.size))
    if not _is_transverse(relative):
        return None
    return BoundaryClassification(
        kind="TransversalExists",
        witness_kind="circle",
        witness_z=[z0] * len(F.thetas),
        witness_min_angle=float(np.arcsin(np.min(np.abs(relative)))),
    )


def _graph_slope(F: TorusLineField, gain: float, theta, z) -> np.ndarray:
    """Slope R * gain * b / |X| of a graph meridian climbing along the e_z part of X."""
    z = np.asarray(z, dtype=float).ravel()
    comps, metric = F.sample(np.broadcast_to(theta, z.shape), z)
    return F.chart.R * gain * comps[:, 1] / np.sqrt(_h_pair(metric, comps, comps))


def _graph_witness(F: TorusLineField) -> BoundaryClassification | None:
    """Graph meridians z(theta), closed by a root of the return map."""
    L = F.chart.L
    seeds = np.asarray(F.zs, dtype=float)
    n_fine = 4 * len(F.thetas)
    fine = TWO_PI * np.arange(n_fine + 1) / n_fine
    for gain in _GRAPH_GAINS:

        def rhs(theta, z, gain=gain):
            return _graph_slope(F, gain, theta, z)

        def gap(z0, rhs=rhs):
            run = solve_ivp(rhs, (0.0, TWO_PI), [z0], method="DOP853", rtol=1e-10, atol=1e-13 * L)
            return float(run.y[0, -1] - z0)

        sweep = solve_ivp(rhs, (0.0, TWO_PI), seeds, method="DOP853", rtol=1e-9, atol=1e-12 * L)
        if not sweep.success:
            continue
        drift = sweep.y[:, -1] - seeds
        if np.any(np.abs(drift) < CLOSED_LEAF_TOLERANCE * L):
            start = float(seeds[int(np.argmin(np.abs(drift)))])
        else:
            flips = np.nonzero(np.sign(drift[:-1]) != np.sign(drift[1:]))[0]
            if not flips.size:
                continue
            k = int(flips[0])
            start = brentq(gap, seeds[k], seeds[k + 1], xtol=1e-12 * L)

        curve = solve_ivp(rhs, (0.0, TWO_PI), [start], method="DOP853", t_eval=fine, rtol=1e-10, atol=1e-13 * L)
        # Spread the residual gap linearly so the curve closes exactly.
        closure = float(curve.y[0, -1] - start)
        z_curve = (curve.y[0] - closure * fine / TWO_PI)[:-1]
        slopes = _graph_slope(F, gain, fine[:-1], curve.y[0, :-1]) - closure / TWO_PI
        relative = _transversality(F, fine[:-1], z_curve, slopes)
        if not _is_transverse(relative):
            continue
        return BoundaryClassification(
            kind="TransversalExists",
            witness_kind="graph",
            witness_z=[float(v) for v in z_curve[::4]],
            witness_min_angle=float(np.arcsin(np.min(np.abs(relative)))),
            diagnostics={"gain": gain, "closure_gap": closure},
        )
    return None


def _leaf_analysis(F: TorusLineField) -> BoundaryClassification:
    L = F.chart.L
    turning = np.abs(F.directions[..., 0])
    if turning.min() < _TURNING_FLOOR:
        return BoundaryClassification(
            kind="Degenerate",
            diagnostics={"reason": "leaves turn back in theta", "min_theta_component": float(turning.min())},
        )

    def leaf(theta, z):
        comps, metric = F.sample(np.full(np.size(z), theta), z)
        turned = _rotate(comps, metric)
        return F.chart.R * turned[:, 1] / turned[:, 0]

    seeds = np.asarray(F.zs, dtype=float)
    sweep = solve_ivp(leaf, (0.0, TWO_PI), seeds, method="DOP853", rtol=1e-9, atol=1e-12 * L)
    if not sweep.success:
        return BoundaryClassification(kind="Degenerate", diagnostics={"reason": "leaf integration failed"})
    drift = sweep.y[:, -1] - seeds
    tol = CLOSED_LEAF_TOLERANCE * L
    closed = np.abs(drift) < tol

    if np.all(closed):
        return BoundaryClassification(
            kind="MeridionalFoliation",
            diagnostics={"reason": "every leaf closes after one turn", "max_drift": float(np.abs(drift).max())},
        )

    leaves: list[float] = []
    n = len(seeds)
    for k in range(n):
        nxt = (k + 1) % n
        if closed[k]:
            if not leaves or not closed[k - 1]:
                leaves.append(float(seeds[k]))
        elif not closed[nxt] and np.sign(drift[k]) != np.sign(drift[nxt]):
            upper = seeds[nxt] + (L if nxt == 0 else 0.0)
            weight = drift[k] / (drift[k] - drift[nxt])
            leaves.append(float(np.mod(seeds[k] + weight * (upper - seeds[k]), L)))

    if leaves:
        return BoundaryClassification(
            kind="ReebComponent",
            closed_leaves=sorted(leaves),
            diagnostics={"max_drift": float(np.abs(drift).max())},
        )
    return BoundaryClassification(
        kind="Degenerate",
        diagnostics={"reason": "no closed leaf and no transverse meridian found", "max_drift": float(np.abs(drift).max())},
    )


def classify_boundary(F: TorusLineField) -> BoundaryClassification:
    circle = _circle_witness(F)
    if circle is not None:
        return circle

    comps, metric = F.components, F.metric
    e_theta_part = np.abs(comps[..., 0]) / np.sqrt(_h_pair(metric, comps, comps))
    if e_theta_part.max() < MERIDIONAL_TOLERANCE:
        return BoundaryClassification(
            kind="MeridionalFoliation",
            diagnostics={"max_e_theta_fraction": float(e_theta_part.max())},
        )

    graph = _graph_witness(F)
    if graph is not None:
        return graph
    return _leaf_analysis(F)


def reeb_component_sanity(classification: BoundaryClassification, beltrami_passed: bool) -> list[str]:
    if classification.kind != "ReebComponent":
        return []
    if beltrami_passed:
        return [
            "Reeb component on the boundary of an invariant Beltrami field: "
            "this cannot happen, check the data and tolerances."
        ]
    logger.info("Reeb component found on a field that did not pass the Beltrami check.")
    return ["Reeb component on a field that failed the Beltrami check; the boundary class is informational only."]
