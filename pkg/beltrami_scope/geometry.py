# beltrami_scope/geometry.py
"""Chart, metric, volume form and meridional discs of the solid torus V = D^2 x S^1.

Points and vectors are carried in Cartesian components (x, y, z) with z
periodic of period L; this doubles as the Cartesian patch around the core,
where the cylindrical frame is undefined. Every evaluator is vectorized over
a leading batch axis: points have shape (N, 3).
"""

import dataclasses
from collections.abc import Callable

import numpy as np

from beltrami_scope.config import SPD_TOLERANCE, TRANSVERSE_MIN_ANGLE
from beltrami_scope.errors import (
    ChartDomainError,
    DegenerateEmbeddingError,
    FieldDataError,
    NotTransverseError,
)

TWO_PI = 2.0 * np.pi


def as_points(points) -> np.ndarray:
    """Coerce a point or an array of points to shape (N, 3)."""
    arr = np.asarray(points, dtype=float)
    if arr.shape[-1] != 3:
        raise ChartDomainError(f"Expected 3-vectors, got shape {arr.shape}.")
    return arr.reshape(-1, 3)


@dataclasses.dataclass(frozen=True)
class TubeChart:
    """Coordinates (r, theta, z) on V with tube radius R and longitudinal period L."""

    R: float
    L: float

    def __post_init__(self):
        if not (np.isfinite(self.R) and np.isfinite(self.L)):
            raise ChartDomainError("Chart parameters must be finite.")
        if self.R <= 0 or self.L <= 0:
            raise ChartDomainError(
                f"Chart needs R > 0 and L > 0, got R={self.R}, L={self.L}."
            )

    def to_cartesian(self, cylindrical) -> np.ndarray:
        cyl = as_points(cylindrical)
        r, theta, z = cyl.T
        return np.column_stack((r * np.cos(theta), r * np.sin(theta), z))

    def to_cylindrical(self, points) -> np.ndarray:
        pts = as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), TWO_PI)
        return np.column_stack((r, theta, np.mod(pts[:, 2], self.L)))

    def frame(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (e_r, e_theta, e_z) at each point; theta = 0 on the core."""
        pts = as_points(points)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        c, s = np.cos(theta), np.sin(theta)
        zero = np.zeros_like(c)
        e_r = np.column_stack((c, s, zero))
        e_theta = np.column_stack((-s, c, zero))
        e_z = np.column_stack((zero, zero, zero + 1.0))
        return e_r, e_theta, e_z

    def cylindrical_jacobian(self, cylindrical) -> np.ndarray:
        """Columns are the coordinate vectors d/dr, d/dtheta, d/dz in Cartesian components."""
        cyl = as_points(cylindrical)
        r, theta = cyl[:, 0], cyl[:, 1]
        c, s = np.cos(theta), np.sin(theta)
        jac = np.zeros((len(cyl), 3, 3))
        jac[:, 0, 0], jac[:, 1, 0] = c, s
        jac[:, 0, 1], jac[:, 1, 1] = -r * s, r * c
        jac[:, 2, 2] = 1.0
        return jac

    def contains(self, points, slack: float = 1e-9) -> np.ndarray:
        pts = as_points(points)
        return np.hypot(pts[:, 0], pts[:, 1]) <= self.R * (1.0 + slack)

    def require_inside(self, points, slack: float = 1e-9) -> np.ndarray:
        pts = as_points(points)
        if not np.all(self.contains(pts, slack)):
            worst = float(np.max(np.hypot(pts[:, 0], pts[:, 1])))
            raise ChartDomainError(
                f"Point outside the solid torus (r={worst:.6g} > R={self.R}).",
                radius=worst,
            )
        return pts

    def wrap_dz(self, dz):
        """Map z differences to (-L/2, L/2]."""
        return -np.mod(-np.asarray(dz) + self.L / 2.0, self.L) + self.L / 2.0

    def boundary_points(self, thetas, zs) -> np.ndarray:
        """Points of the boundary torus r = R on the (theta, z) product grid, theta-major."""
        tt, zz = np.meshgrid(np.asarray(thetas), np.asarray(zs), indexing="ij")
        cyl = np.column_stack((np.full(tt.size, self.R), tt.ravel(), zz.ravel()))
        return self.to_cartesian(cyl)


class MetricField:
    """Riemannian metric g as a point -> SPD 3x3 matrix map in Cartesian components."""

    def __init__(
        self,
        evaluator: Callable[[np.ndarray], np.ndarray],
        tag: str = "custom",
        check: bool = True,
    ):
        self._evaluator = evaluator
        self.tag = tag
        self._check = check

    @classmethod
    def euclidean(cls) -> "MetricField":
        return cls(lambda pts: np.broadcast_to(np.eye(3), (len(pts), 3, 3)), "euclidean", False)

    @classmethod
    def conformal(cls, factor: float) -> "MetricField":
        """The scaled metric factor^2 * g_euclidean."""
        if factor <= 0:
            raise ChartDomainError(f"Metric scale must be positive, got {factor}.")
        return cls(
            lambda pts: np.broadcast_to(factor * factor * np.eye(3), (len(pts), 3, 3)),
            f"scaled:{factor:g}",
            False,
        )

    def scaled(self, factor: float) -> "MetricField":
        return MetricField(
            lambda pts: factor * factor * self.matrix(pts), f"{self.tag}*{factor:g}^2", False
        )

    def matrix(self, points) -> np.ndarray:
        pts = as_points(points)
        mats = np.asarray(self._evaluator(pts), dtype=float)
        if self._check:
            _require_spd(mats)
        return mats

    def lower(self, points, u) -> np.ndarray:
        """Index-lowered vectors g(u, .) as Cartesian covector components."""
        return np.einsum("nij,nj->ni", self.matrix(points), np.asarray(u, dtype=float).reshape(-1, 3))

    def pair(self, points, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1, 3)
        v = np.asarray(v, dtype=float).reshape(-1, 3)
        return np.einsum("ni,nij,nj->n", u, self.matrix(points), v)

    def norm(self, points, u) -> np.ndarray:
        return np.sqrt(np.maximum(self.pair(points, u, u), 0.0))

    def raise_index(self, points, covector) -> np.ndarray:
        cov = np.asarray(covector, dtype=float).reshape(-1, 3)
        return np.linalg.solve(self.matrix(points), cov[..., None])[..., 0]


def _require_spd(mats: np.ndarray) -> None:
    if not np.all(np.isfinite(mats)):
        raise FieldDataError("Metric has non-finite entries.")
    asym = np.max(np.abs(mats - np.swapaxes(mats, 1, 2)), initial=0.0)
    if asym > SPD_TOLERANCE * max(1.0, float(np.max(np.abs(mats), initial=0.0))):
        raise FieldDataError(f"Metric is not symmetric (asymmetry {asym:.3g}).")
    smallest = float(np.min(np.linalg.eigvalsh(mats), initial=np.inf))
    if smallest <= SPD_TOLERANCE:
        raise FieldDataError(f"Metric is not positive-definite (eigenvalue {smallest:.3g}).")


def metric_pair(g: MetricField, chart: TubeChart, p, u, v) -> float:
    """g_p(u, v) for a chart point p = (r, theta, z) and vectors in the (d/dr, d/dtheta, d/dz) basis."""
    cyl = as_points(p)
    if np.any(cyl[:, 0] < 0) or np.any(cyl[:, 0] > chart.R * (1.0 + 1e-12)):
        raise ChartDomainError(f"Point {cyl[0].tolist()} is outside the chart.")
    jac = chart.cylindrical_jacobian(cyl)
    g_cyl = np.einsum("nki,nkl,nlj->nij", jac, g.matrix(chart.to_cartesian(cyl)), jac)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u @ g_cyl[0] @ v)


class VolumeForm:
    """Volume form mu = orientation * density * dx ^ dy ^ dz."""

    def __init__(
        self,
        density: Callable[[np.ndarray], np.ndarray],
        orientation: int = 1,
        tag: str = "custom",
    ):
        if orientation not in (1, -1):
            raise ChartDomainError("Volume orientation must be +1 or -1.")
        self._density = density
        self.orientation = orientation
        self.tag = tag

    @classmethod
    def metric_volume(cls, g: MetricField, orientation: int = 1) -> "VolumeForm":
        return cls(
            lambda pts: np.sqrt(np.linalg.det(g.matrix(pts))),
            orientation,
            f"vol({g.tag})",
        )

    def reversed(self) -> "VolumeForm":
        return VolumeForm(self._density, -self.orientation, self.tag)

    def density(self, points) -> np.ndarray:
        rho = np.asarray(self._density(as_points(points)), dtype=float)
        if not np.all(rho > 0):
            raise FieldDataError("Volume density must be strictly positive.")
        return rho

    def signed_density(self, points) -> np.ndarray:
        return self.orientation * self.density(points)

    def evaluate(self, points, a, b, c) -> np.ndarray:
        dets = np.linalg.det(np.stack((a, b, c), axis=-1))
        return self.signed_density(points) * dets


@dataclasses.dataclass(frozen=True)
class MeridionalDisc:
    """Embedded disc (u, v) -> (R u, R v, z(u, v)) with boundary on r = R.

    z(u, v) = z0 + bump (1 - u^2 - v^2) + tilt R u + (u^2 + v^2) lift(theta),
    where lift is a Fourier-interpolated boundary offset used to span a
    graph-curve meridian. orientation = +1 orients the boundary
    counterclockwise in (u, v) and the normal along t_u x t_v.
    """

    chart: TubeChart
    z0: float = 0.0
    bump: float = 0.0
    tilt: float = 0.0
    orientation: int = 1
    lift: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ChartDomainError("Disc orientation must be +1 or -1.")

    def with_orientation(self, orientation: int) -> "MeridionalDisc":
        return dataclasses.replace(self, orientation=orientation)

    def bumped(self, bump: float) -> "MeridionalDisc":
        return dataclasses.replace(self, bump=bump)

    def describe(self) -> dict:
        return {
            "z0": self.z0,
            "bump": self.bump,
            "tilt": self.tilt,
            "orientation": self.orientation,
            "lifted": self.lift is not None,
        }

    def _lift(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.lift is None:
            zero = np.zeros_like(theta)
            return zero, zero
        coeffs = np.fft.rfft(np.asarray(self.lift)) / len(self.lift)
        k = np.arange(len(coeffs))
        weights = np.where((k == 0) | ((len(self.lift) % 2 == 0) & (k == len(self.lift) // 2)), 1.0, 2.0)
        phase = np.exp(1j * np.outer(theta, k))
        value = np.real(phase @ (weights * coeffs))
        slope = np.real(phase @ (1j * k * weights * coeffs))
        return value, slope

    def embed(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        u, v = uv.T
        rho2 = u * u + v * v
        lift, _ = self._lift(np.arctan2(v, u))
        z = self.z0 + self.bump * (1.0 - rho2) + self.tilt * self.chart.R * u + rho2 * lift
        return np.column_stack((self.chart.R * u, self.chart.R * v, z))

    def tangents(self, uv) -> tuple[np.ndarray, np.ndarray]:
        """Parameter tangents (d/du, d/dv) of the embedding."""
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        u, v = uv.T
        lift, slope = self._lift(np.arctan2(v, u))
        R = self.chart.R
        zero = np.zeros_like(u)
        dz_du = -2.0 * self.bump * u + self.tilt * R + 2.0 * u * lift - v * slope
        dz_dv = -2.0 * self.bump * v + 2.0 * v * lift + u * slope
        t_u = np.column_stack((zero + R, zero, dz_du))
        t_v = np.column_stack((zero, zero + R, dz_dv))
        return t_u, t_v

    def frame(self, g: MetricField, uv) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(t1, t2, n) with n the g-unit normal, positively oriented for mu = vol(g)."""
        t_u, t_v = self.tangents(uv)
        covector = np.cross(t_u, t_v)
        area = np.linalg.norm(covector, axis=1)
        scale = np.linalg.norm(t_u, axis=1) * np.linalg.norm(t_v, axis=1)
        if np.any(area <= 1e-12 * scale):
            raise DegenerateEmbeddingError("Disc embedding has a rank-deficient Jacobian.")
        pts = self.embed(uv)
        normal = g.raise_index(pts, covector)
        normal /= np.sqrt(np.einsum("ni,ni->n", covector, normal))[:, None]
        o = self.orientation
        return t_u, o * t_v, o * normal

    def boundary_parameters(self, t) -> np.ndarray:
        """Unit-circle parameters of the oriented boundary curve gamma(t)."""
        t = np.asarray(t, dtype=float)
        return np.column_stack((np.cos(self.orientation * t), np.sin(self.orientation * t)))

    def boundary_curve(self, t) -> np.ndarray:
        return self.embed(self.boundary_parameters(t))

    def boundary_velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        uv = self.boundary_parameters(t)
        t_u, t_v = self.tangents(uv)
        o = self.orientation
        return o * (-uv[:, 1:2] * t_u + uv[:, 0:1] * t_v)


def disc_frame(disc: MeridionalDisc, g: MetricField, uv) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    uv = np.asarray(uv, dtype=float).reshape(-1, 2)
    if np.any(np.hypot(uv[:, 0], uv[:, 1]) > 1.0 + 1e-9):
        raise ChartDomainError("Disc parameter outside the closed unit disc.")
    return disc.frame(g, uv)


def orient_boundary(
    disc: MeridionalDisc,
    field: Callable[[np.ndarray], np.ndarray],
    g: MetricField,
    samples: int = 512,
    min_angle: float = TRANSVERSE_MIN_ANGLE,
) -> MeridionalDisc:
    """Orient the boundary so that alpha(gamma') = g(X, gamma') > 0 everywhere.

    The disc orientation follows the boundary (outward normal first), so the
    result does not depend on the orientation flag of the input.
    """
    base = disc.with_orientation(1)
    t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    pts = base.boundary_curve(t)
    velocity = base.boundary_velocity(t)
    vectors = field(pts)
    alpha = g.pair(pts, vectors, velocity)
    scale = g.norm(pts, vectors) * g.norm(pts, velocity)
    relative = alpha / np.maximum(scale, 1e-300)
    floor = np.sin(min_angle)
    if np.all(relative > floor):
        return base
    if np.all(relative < -floor):
        return base.with_orientation(-1)
    worst = int(np.argmin(np.abs(relative)))
    raise NotTransverseError(
        "Disc boundary is not transverse to the contact planes.",
        min_relative_alpha=float(relative[worst]),
        theta=float(t[worst]),
    )
